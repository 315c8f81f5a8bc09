// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails.  Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nambu/brackets.hpp"
#include "nambu/dirac.hpp"
#include "nambu/dynamics.hpp"
#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"
#include "nambu/multipartite.hpp"

using namespace nambu;

namespace {

struct Harness {
  bool all_ok = true;

  void record(int id, const std::string& name, bool ok, const std::string& detail) {
    all_ok = all_ok && ok;
    std::printf("%s  %2d  %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
  }

  template <typename Fn>
  void criterion(int id, const std::string& name, Fn&& fn) {
    try {
      auto [ok, detail] = fn();
      record(id, name, ok, detail);
    } catch (const std::exception& e) {
      record(id, name, false, std::string("exception: ") + e.what());
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

double casimir_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& row : traj.diagnostics)
    for (int n = 0; n < 4; ++n)
      worst = std::max(worst, std::abs(row.casimirs[n] - traj.diagnostics[0].casimirs[n]));
  return worst;
}

double eigenvalue_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& row : traj.diagnostics)
    worst = std::max(worst, (row.eigenvalues - traj.diagnostics[0].eigenvalues)
                                .cwiseAbs()
                                .maxCoeff());
  return worst;
}

DensityMatrix pure_normalized(int d, std::uint64_t seed) {
  const DensityMatrix p = random_density(d, 1, seed);
  return DensityMatrix(p.mat() / p.mat().trace().real());
}

double linear_match(const Trajectory& traj, const DensityMatrix& rho0,
                    const HermitianMatrix& hhat) {
  double worst = 0.0;
  // compare at a handful of sample times plus the endpoint
  const std::size_t n = traj.states.size();
  for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 16))
    worst = std::max(worst, max_abs(traj.states[i].mat() -
                                    linear_reference(rho0, hhat, traj.times[i]).mat()));
  worst = std::max(worst, max_abs(traj.states.back().mat() -
                                  linear_reference(rho0, hhat, traj.times.back()).mat()));
  return worst;
}

}  // namespace

int main() {
  Harness h;
  using Clock = std::chrono::steady_clock;

  // shared run for criteria 1 and 2: d = 4, random linear H, S = renyi_a(3)
  const HermitianMatrix hhat4 = random_hermitian(4, 2024);
  const DensityMatrix rho4 = random_density(4, 4, 2025);
  const Functional h_lin4 = linear_observable(hhat4);
  const Functional s_a3 = renyi_a(3.0);

  Trajectory iso_run, rk4_run;
  double shared_seconds = 0.0;
  bool shared_ok = true;
  std::string shared_err;
  try {
    const auto t0 = Clock::now();
    iso_run = evolve(rho4, {h_lin4, s_a3, 10.0, 0.01, Method::isospectral});
    rk4_run = evolve(rho4, {h_lin4, s_a3, 10.0, 1e-3, Method::rk4});
    shared_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  } catch (const std::exception& e) {
    shared_ok = false;
    shared_err = e.what();
  }

  h.criterion(1, "Casimir conservation", [&]() -> std::pair<bool, std::string> {
    if (!shared_ok) return {false, "run failed: " + shared_err};
    const double iso = casimir_drift(iso_run);
    const double rk4 = casimir_drift(rk4_run);
    const bool ok = iso <= 1e-10 && rk4 <= 1e-6 && shared_seconds < 5.0;
    return {ok, "iso " + fmt(iso) + " <= 1e-10, rk4 " + fmt(rk4) + " <= 1e-6, " +
                    fmt(shared_seconds) + " s < 5 s"};
  });

  h.criterion(2, "Eigenvalue conservation", [&]() -> std::pair<bool, std::string> {
    if (!shared_ok) return {false, "run failed: " + shared_err};
    const double iso = eigenvalue_drift(iso_run);
    const double rk4 = eigenvalue_drift(rk4_run);
    const bool ok = iso <= 1e-12 && rk4 <= 1e-6;
    return {ok, "iso " + fmt(iso) + " <= 1e-12, rk4 " + fmt(rk4) + " <= 1e-6"};
  });

  h.criterion(3, "Linear reduction at alpha=2", [&]() -> std::pair<bool, std::string> {
    const Functional s = renyi_a(2.0);
    const Trajectory iso = evolve(rho4, {h_lin4, s, 10.0, 0.01, Method::isospectral});
    const Trajectory rk4 = evolve(rho4, {h_lin4, s, 10.0, 1e-3, Method::rk4});
    const double di = linear_match(iso, rho4, hhat4);
    const double dr = linear_match(rk4, rho4, hhat4);
    const bool ok = di <= 1e-8 && dr <= 1e-8;
    return {ok, "iso " + fmt(di) + ", rk4 " + fmt(dr) + " <= 1e-8"};
  });

  h.criterion(4, "Pure-state linearity", [&]() -> std::pair<bool, std::string> {
    double worst_dev = 0.0, worst_purity = 0.0;
    const DensityMatrix pure = pure_normalized(4, 4100);
    for (double alpha : {1.5, 3.0, 4.0}) {
      const Trajectory traj =
          evolve(pure, {h_lin4, renyi_a(alpha), 10.0, 1e-3, Method::isospectral});
      worst_dev = std::max(worst_dev, linear_match(traj, pure, hhat4));
      for (const auto& row : traj.diagnostics)
        worst_purity = std::max(worst_purity, std::abs(row.casimirs[1] - 1.0));
    }
    const bool ok = worst_dev <= 1e-8 && worst_purity <= 1e-9;
    return {ok, "deviation " + fmt(worst_dev) + " <= 1e-8, purity drift " +
                    fmt(worst_purity) + " <= 1e-9"};
  });

  h.criterion(5, "Variant-B rescaling", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    const DensityMatrix pure = pure_normalized(4, 5100);
    for (double alpha : {1.5, 3.0}) {
      const double scale_factor = alpha / (2.0 * (alpha - 1.0));
      const HermitianMatrix scaled = hermitize(scale_factor * hhat4.mat());
      const Trajectory traj =
          evolve(pure, {h_lin4, renyi_b(alpha), 10.0, 1e-3, Method::isospectral});
      worst = std::max(worst, linear_match(traj, pure, scaled));
    }
    return {worst <= 1e-8, "deviation " + fmt(worst) + " <= 1e-8"};
  });

  h.criterion(6, "Homogeneity", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    for (auto [method, dt] : {std::pair{Method::isospectral, 0.01}, {Method::rk4, 1e-3}}) {
      const Trajectory base = evolve(rho4, {h_lin4, s_a3, 10.0, dt, method});
      for (double lam : {0.5, 2.0}) {
        const Trajectory scaled =
            evolve(DensityMatrix(lam * rho4.mat()), {h_lin4, s_a3, 10.0, dt, method});
        for (std::size_t i = 0; i < base.states.size(); i += 100)
          worst = std::max(worst, max_abs(scaled.states[i].mat() -
                                          lam * base.states[i].mat()));
        worst = std::max(worst, max_abs(scaled.states.back().mat() -
                                        lam * base.states.back().mat()));
      }
    }
    return {worst <= 1e-8, "max gap " + fmt(worst) + " <= 1e-8"};
  });

  h.criterion(7, "No-signaling", [&]() -> std::pair<bool, std::string> {
    const auto t0 = Clock::now();
    double bracket = 0.0;
    for (auto dims : {std::pair{2, 2}, {2, 3}, {3, 3}})
      bracket = std::max(bracket, nosignal_bracket_test(dims, 100, 7000));
    const HermitianMatrix hi = random_hermitian(2, 7100);
    const HermitianMatrix hii = random_hermitian(2, 7101);
    double gap = subsystem_generator_test({2, 2}, hi, hii,
                                          casimir_function_preset("c2_half"), 7102);
    gap = std::max(gap, subsystem_generator_test({2, 2}, hi, hii, renyi_a(3.0), 7103));
    const double overlap_control = nosignal_bracket_test({2, 2}, 100, 7000, true);
    const double interact_control = subsystem_generator_test(
        {2, 2}, hi, hii, renyi_a(3.0), 7103, random_hermitian(4, 7104));
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool ok = bracket <= 1e-10 && gap <= 1e-10 && overlap_control >= 1e-3 &&
                    interact_control >= 1e-3 && seconds < 10.0;
    return {ok, "bracket " + fmt(bracket) + ", gap " + fmt(gap) + " <= 1e-10, controls " +
                    fmt(overlap_control) + "/" + fmt(interact_control) + " >= 1e-3, " +
                    fmt(seconds) + " s < 10 s"};
  });

  h.criterion(8, "Algebra suite", [&]() -> std::pair<bool, std::string> {
    double jacobi = 0.0, antisym = 0.0;
    for (int d = 2; d <= 4; ++d) {
      const StructureTensor tensor = structure_tensor(d);
      jacobi = std::max(jacobi, jacobi_residual(tensor));
      antisym = std::max(antisym, total_antisymmetry_residual(tensor));
    }
    double tvm = 0.0;
    for (int d = 2; d <= 4; ++d) {
      const StructureTensor tensor = structure_tensor(d);
      std::vector<Functional> pool{linear_observable(random_hermitian(d, 8000 + d)),
                                   casimir(2), casimir(3), renyi_a(2.5),
                                   casimir_function_preset("c2sq_plus_c3")};
      for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho = random_density(d, d, 8100 + 10 * d + trial);
        const Functional& f = pool[trial % pool.size()];
        const Functional& g = pool[(trial + 1) % pool.size()];
        const Functional& s = pool[(trial + 2) % pool.size()];
        tvm = std::max(tvm, std::abs(bracket_via_tensor(f, g, s, rho, tensor) -
                                     lie_nambu(f, g, s, rho)));
      }
    }
    double casimir_gap = 0.0;
    for (int d = 2; d <= 3; ++d)
      for (int n = 1; n <= 4; ++n) {
        const CyclicTraceTensor tensor = cyclic_trace_tensor(d, n);
        for (std::uint64_t seed : {1, 2, 3}) {
          const DensityMatrix rho = random_density(d, d, 8200 + seed);
          casimir_gap = std::max(casimir_gap, std::abs(casimir_via_tensor(tensor, rho) -
                                                       trace_power(rho, n)));
        }
      }
    const bool ok =
        jacobi <= 1e-12 && antisym <= 1e-12 && tvm <= 1e-10 && casimir_gap <= 1e-10;
    return {ok, "jacobi " + fmt(jacobi) + ", antisym " + fmt(antisym) + " <= 1e-12, " +
                    "bracket gap " + fmt(tvm) + ", C_n gap " + fmt(casimir_gap) +
                    " <= 1e-10"};
  });

  h.criterion(9, "Gradient validation", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    for (int d = 2; d <= 4; ++d) {
      std::vector<Functional> kinds{linear_observable(random_hermitian(d, 9000 + d)),
                                    casimir(1),
                                    casimir(2),
                                    casimir(3),
                                    casimir(4),
                                    renyi_a(1.5),
                                    renyi_a(2.5),
                                    renyi_a(3.0),
                                    renyi_b(1.5),
                                    renyi_b(3.0),
                                    casimir_function_preset("c2_half"),
                                    casimir_function_preset("c1"),
                                    casimir_function_preset("c2sq_plus_c3")};
      for (std::uint64_t state = 0; state < 20; ++state) {
        const DensityMatrix rho = random_density(d, d, 9100 + 20 * d + state);
        for (const Functional& f : kinds)
          worst = std::max(worst, gradient_check(f, rho, 1e-5));
      }
    }
    return {worst <= 1e-6, "max error " + fmt(worst) + " <= 1e-6 at eps = 1e-5"};
  });

  h.criterion(10, "Dirac suite", [&]() -> std::pair<bool, std::string> {
    const auto t0 = Clock::now();
    const double identities = appendix_identity_residuals().max();

    double dispersion = 0.0, form = 0.0;
    for (double m : {0.0, 0.5, 1.0, 3.0})
      for (int ix = -1; ix <= 1; ++ix)
        for (int iy = -1; iy <= 1; ++iy)
          for (int iz = -1; iz <= 1; ++iz) {
            const Vector3r k(ix, iy, iz);
            for (const auto& [e_val, mode] : dirac_eigenmodes(k, m)) {
              dispersion = std::max(
                  dispersion, std::abs(e_val * e_val - (k.squaredNorm() + m * m)));
              form = std::max(form, form_equivalence_test(mode, e_val, m));
            }
          }

    Rng rng(10100);
    std::vector<std::pair<SpinorMode, Complex>> ensemble;
    for (int i = 0; i < 5; ++i) {
      SpinorMode mode;
      mode.k = Vector3r(rng.normal(), rng.normal(), rng.normal());
      for (int j = 0; j < 2; ++j) {
        mode.psi[j] = rng.complex_normal();
        mode.xi[j] = rng.complex_normal();
      }
      ensemble.emplace_back(mode, rng.complex_normal());
    }
    const double n0 = ensemble_norm(ensemble);
    const double norm_drift =
        std::abs(ensemble_norm(evolve_modes(ensemble, 1.0, 100.0)) - n0);
    const double hamilton = hamilton_equations_check(ensemble, 1.0);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    const bool ok = identities <= 1e-13 && dispersion <= 1e-10 && norm_drift <= 1e-12 &&
                    form <= 1e-12 && hamilton <= 1e-6 && seconds < 5.0;
    return {ok, "identities " + fmt(identities) + " <= 1e-13, dispersion " +
                    fmt(dispersion) + " <= 1e-10, norm " + fmt(norm_drift) +
                    " <= 1e-12, form " + fmt(form) + " <= 1e-12, hamilton " +
                    fmt(hamilton) + " <= 1e-6, " + fmt(seconds) + " s < 5 s"};
  });

  std::printf("%s\n", h.all_ok ? "acceptance: all criteria passed"
                               : "acceptance: FAILURES present");
  return h.all_ok ? 0 : 1;
}
