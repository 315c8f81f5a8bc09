// Experiment runner: evolve | nosignal | algebra | dirac | gradcheck.
// Every run is deterministic in its seed; each subcommand prints a JSON
// summary with its max residuals and exits nonzero when a module tolerance
// is violated (2 for usage errors, 1 for numerical failures).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nambu/brackets.hpp"
#include "nambu/dirac.hpp"
#include "nambu/dynamics.hpp"
#include "nambu/functionals.hpp"
#include "nambu/io.hpp"
#include "nambu/matrix.hpp"
#include "nambu/multipartite.hpp"

namespace {

using namespace nambu;

void emit(const Json& report, const std::string& out_path) {
  std::cout << report.dump(2) << std::endl;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << report.dump(2) << "\n";
  }
}

Functional make_entropy(const std::string& name, double alpha) {
  if (name == "renyi-a") return renyi_a(alpha);
  if (name == "renyi-b") return renyi_b(alpha);
  if (name == "c2-half") return casimir_function_preset("c2_half");
  if (name == "c1") return casimir_function_preset("c1");
  if (name == "c2sq-plus-c3") return casimir_function_preset("c2sq_plus_c3");
  throw CLI::ValidationError("--entropy", "unknown entropy kind '" + name + "'");
}

std::vector<Functional> bracket_pool(int d, std::uint64_t seed) {
  std::vector<Functional> pool;
  pool.push_back(linear_observable(random_hermitian(d, seed)));
  pool.push_back(casimir(2));
  pool.push_back(casimir(3));
  pool.push_back(renyi_a(2.5));
  pool.push_back(quadratic_observable(random_hermitian(d, seed + 1)));
  pool.push_back(casimir_function_preset("c2sq_plus_c3"));
  return pool;
}

struct EvolveArgs {
  int dim = 4;
  int rank = 0;
  double alpha = 3.0;
  std::string entropy = "renyi-a";
  std::string method = "isospectral";
  double dt = 0.01;
  double t_end = 10.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_csv;
  std::string hamiltonian_path;
  std::string initial_path;
};

int run_evolve(const EvolveArgs& a) {
  const bool randomized = a.hamiltonian_path.empty() || a.initial_path.empty();
  if (randomized && !a.seed_given) {
    std::cerr << "evolve: --seed is mandatory for randomized runs\n";
    return 2;
  }
  const HermitianMatrix hhat = a.hamiltonian_path.empty()
                                   ? random_hermitian(a.dim, a.seed)
                                   : load_matrix(a.hamiltonian_path);
  const int dim = hhat.dim();
  const int rank = a.rank > 0 ? a.rank : dim;
  const DensityMatrix rho0 = a.initial_path.empty()
                                 ? random_density(dim, rank, a.seed + 1)
                                 : load_density(a.initial_path);
  if (rho0.dim() != dim)
    throw std::runtime_error("evolve: Hamiltonian and initial state dimensions differ");

  EvolutionSpec spec{linear_observable(hhat), make_entropy(a.entropy, a.alpha), a.t_end,
                     a.dt, a.method == "rk4" ? Method::rk4 : Method::isospectral};
  const Trajectory traj = evolve(rho0, spec);
  if (!a.out_csv.empty()) write_trajectory_csv(traj, a.out_csv);

  double eig_drift = 0.0, casimir_drift = 0.0;
  for (const auto& row : traj.diagnostics) {
    eig_drift = std::max(eig_drift, (row.eigenvalues - traj.diagnostics[0].eigenvalues)
                                        .cwiseAbs()
                                        .maxCoeff());
    for (int n = 0; n < 4; ++n)
      casimir_drift = std::max(
          casimir_drift, std::abs(row.casimirs[n] - traj.diagnostics[0].casimirs[n]));
  }
  const double final_dev =
      max_abs(traj.states.back().mat() -
              linear_reference(rho0, hhat, traj.times.back()).mat());

  const double tol = spec.method == Method::isospectral ? 1e-10 : 1e-6;
  const bool ok = eig_drift <= tol && casimir_drift <= tol;
  Json report{{"subcommand", "evolve"},
              {"dim", dim},
              {"entropy", a.entropy},
              {"alpha", a.alpha},
              {"method", a.method},
              {"dt", a.dt},
              {"t_end", a.t_end},
              {"seed", a.seed},
              {"steps", traj.times.size() - 1},
              {"max_eigenvalue_drift", eig_drift},
              {"max_casimir_drift", casimir_drift},
              {"final_linear_deviation", final_dev},
              {"tolerance", tol},
              {"ok", ok}};
  emit(report, "");
  return ok ? 0 : 1;
}

int run_algebra(int dim, std::uint64_t seed, double inject, const std::string& out_path) {
  const StructureTensor tensor = structure_tensor(dim);
  const double jacobi = jacobi_residual(tensor) + inject;
  const double antisym = total_antisymmetry_residual(tensor) + inject;

  double tvm = inject;
  const auto pool = bracket_pool(dim, seed);
  for (std::uint64_t trial = 0; trial < 12; ++trial) {
    const DensityMatrix rho = random_density(dim, dim, seed + 100 + trial);
    const Functional& f = pool[trial % pool.size()];
    const Functional& g = pool[(trial + 1) % pool.size()];
    const Functional& h = pool[(trial + 2) % pool.size()];
    tvm = std::max(tvm, std::abs(bracket_via_tensor(f, g, h, rho, tensor) -
                                 lie_nambu(f, g, h, rho)));
  }

  const bool ok = jacobi <= 1e-12 && antisym <= 1e-12 && tvm <= 1e-10;
  Json report{{"d", dim},
              {"jacobi_residual", jacobi},
              {"antisymmetry_residual", antisym},
              {"tensor_vs_matrix_max", tvm},
              {"ok", ok}};
  emit(report, out_path);
  return ok ? 0 : 1;
}

int run_nosignal(const std::vector<int>& dims, int trials, std::uint64_t seed, double inject,
                 const std::string& out_path) {
  if (dims.size() != 2) throw CLI::ValidationError("--dims", "expected two dimensions");
  const double bracket = nosignal_bracket_test({dims[0], dims[1]}, trials, seed) + inject;
  const HermitianMatrix hi = random_hermitian(dims[0], seed + 1);
  const HermitianMatrix hii = random_hermitian(dims[1], seed + 2);
  const double gap_linear = subsystem_generator_test(
      {dims[0], dims[1]}, hi, hii, casimir_function_preset("c2_half"), seed + 3);
  const double gap_renyi =
      subsystem_generator_test({dims[0], dims[1]}, hi, hii, renyi_a(3.0), seed + 4);
  const double gap = std::max(gap_linear, gap_renyi) + inject;

  const bool ok = bracket <= 1e-10 && gap <= 1e-10;
  Json report{{"dims", dims},
              {"trials", trials},
              {"max_bracket", bracket},
              {"max_generator_gap", gap},
              {"seed", seed},
              {"ok", ok}};
  emit(report, out_path);
  return ok ? 0 : 1;
}

int run_dirac(const std::string& check, double mass, const std::vector<double>& kvec,
              std::uint64_t seed, double inject, const std::string& out_path) {
  if (kvec.size() != 3) throw CLI::ValidationError("--k", "expected a comma triple");
  const Vector3r k(kvec[0], kvec[1], kvec[2]);
  Json report{{"subcommand", "dirac"},
              {"check", check},
              {"mass", mass},
              {"k", kvec},
              {"seed", seed}};
  bool ok = false;

  auto ensemble = [](std::uint64_t s) {
    Rng rng(s);
    std::vector<std::pair<SpinorMode, Complex>> out;
    for (int i = 0; i < 5; ++i) {
      SpinorMode mode;
      mode.k = Vector3r(rng.normal(), rng.normal(), rng.normal());
      for (int j = 0; j < 2; ++j) {
        mode.psi[j] = rng.complex_normal();
        mode.xi[j] = rng.complex_normal();
      }
      out.emplace_back(mode, rng.complex_normal());
    }
    return out;
  };

  if (check == "identities") {
    const AppendixResiduals r = appendix_identity_residuals();
    report["residuals"] = {{"iw1", r.iw1},
                           {"iw2", r.iw2},
                           {"gs1", r.gs1},
                           {"gs2", r.gs2},
                           {"duality_sigma", r.duality_sigma},
                           {"duality_sigma_bar", r.duality_sigma_bar},
                           {"id1", r.id1},
                           {"id2", r.id2},
                           {"antisymmetry", r.antisymmetry},
                           {"slicing_contraction", r.slicing_contraction}};
    const double worst = r.max() + inject;
    report["max_residual"] = worst;
    report["tolerance"] = 1e-13;
    ok = worst <= 1e-13;
  } else if (check == "dispersion") {
    double worst = inject;
    for (double m : {0.0, 0.5, 1.0, 3.0})
      for (int ix = -1; ix <= 1; ++ix)
        for (int iy = -1; iy <= 1; ++iy)
          for (int iz = -1; iz <= 1; ++iz) {
            const Vector3r kk(ix, iy, iz);
            for (const auto& [e_val, mode] : dirac_eigenmodes(kk, m))
              worst = std::max(worst,
                               std::abs(e_val * e_val - (kk.squaredNorm() + m * m)));
          }
    for (const auto& [e_val, mode] : dirac_eigenmodes(k, mass))
      worst = std::max(worst, std::abs(e_val * e_val - (k.squaredNorm() + mass * mass)));
    report["max_dispersion_residual"] = worst;
    report["tolerance"] = 1e-10;
    ok = worst <= 1e-10;
  } else if (check == "evolve") {
    const auto modes = ensemble(seed);
    const double n0 = ensemble_norm(modes);
    const double drift =
        std::abs(ensemble_norm(evolve_modes(modes, mass, 100.0)) - n0) + inject;
    report["norm_drift"] = drift;
    report["t"] = 100.0;
    report["tolerance"] = 1e-12;
    ok = drift <= 1e-12;
  } else if (check == "hamilton") {
    const double residual = hamilton_equations_check(ensemble(seed), mass) + inject;
    report["max_residual"] = residual;
    report["tolerance"] = 1e-6;
    ok = residual <= 1e-6;
  } else {
    throw CLI::ValidationError("--check", "expected identities|dispersion|evolve|hamilton");
  }
  report["ok"] = ok;
  emit(report, out_path);
  return ok ? 0 : 1;
}

int run_gradcheck(int dim, std::uint64_t seed, double eps, double alpha, double inject,
                  const std::string& out_path) {
  Json per_kind;
  double worst = 0.0;
  auto run_kind = [&](const std::string& name, const Functional& f) {
    double e = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i)
      e = std::max(e, gradient_check(f, random_density(dim, dim, seed + 10 * i), eps));
    e += inject;
    per_kind[name] = e;
    worst = std::max(worst, e);
  };
  run_kind("linear", linear_observable(random_hermitian(dim, seed)));
  run_kind("casimir", casimir(4));
  run_kind("renyi_a", renyi_a(alpha));
  run_kind("renyi_b", renyi_b(alpha));
  run_kind("casimir_function", casimir_function_preset("c2sq_plus_c3"));

  const bool ok = worst <= 1e-6;
  Json report{{"subcommand", "gradcheck"},
              {"dim", dim},
              {"eps", eps},
              {"alpha", alpha},
              {"seed", seed},
              {"max_error", per_kind},
              {"worst", worst},
              {"ok", ok}};
  emit(report, out_path);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-dimensional laboratory for triple-bracket density-matrix dynamics"};
  app.require_subcommand(1);

  EvolveArgs ev;
  std::string out_path;
  std::uint64_t seed = 1;
  double inject = 0.0;

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate i rho_dot = [rho, H, S]");
  evolve_cmd->add_option("--dim", ev.dim, "Hilbert dimension")->check(CLI::Range(2, 64));
  evolve_cmd->add_option("--rank", ev.rank, "initial state rank (default: full)");
  evolve_cmd->add_option("--alpha", ev.alpha, "Renyi exponent");
  evolve_cmd->add_option("--entropy", ev.entropy, "renyi-a|renyi-b|c2-half|c1|c2sq-plus-c3");
  evolve_cmd->add_option("--method", ev.method, "rk4|isospectral")
      ->check(CLI::IsMember({"rk4", "isospectral"}));
  evolve_cmd->add_option("--dt", ev.dt, "step size")->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--t-end", ev.t_end, "final time");
  evolve_cmd->add_option("--seed", ev.seed, "PRNG seed")
      ->each([&ev](const std::string&) { ev.seed_given = true; });
  evolve_cmd->add_option("--out", ev.out_csv, "trajectory CSV path");
  evolve_cmd->add_option("--hamiltonian", ev.hamiltonian_path, "matrix JSON path");
  evolve_cmd->add_option("--initial", ev.initial_path, "density matrix JSON path");

  int algebra_dim = 3;
  auto* algebra_cmd = app.add_subcommand("algebra", "structure-constant residual report");
  algebra_cmd->add_option("--dim", algebra_dim, "Hilbert dimension")->check(CLI::Range(2, 4));
  algebra_cmd->add_option("--seed", seed, "PRNG seed");
  algebra_cmd->add_option("--out", out_path, "JSON report path");
  algebra_cmd->add_option("--inject", inject,
                          "fault-injection offset added to residuals (testing aid)");

  std::vector<int> ns_dims{2, 2};
  int ns_trials = 100;
  auto* nosignal_cmd = app.add_subcommand("nosignal", "no-signaling bracket trials");
  nosignal_cmd->add_option("--dims", ns_dims, "subsystem dimensions dI,dII")
      ->delimiter(',')
      ->expected(1, 2);
  nosignal_cmd->add_option("--trials", ns_trials, "trial count")->check(CLI::PositiveNumber);
  nosignal_cmd->add_option("--seed", seed, "PRNG seed")->required();
  nosignal_cmd->add_option("--out", out_path, "JSON report path");
  nosignal_cmd->add_option("--inject", inject,
                           "fault-injection offset added to residuals (testing aid)");

  std::string dirac_check;
  double dirac_mass = 1.0;
  std::vector<double> dirac_k{0.0, 0.0, 1.0};
  auto* dirac_cmd = app.add_subcommand("dirac", "two-spinor Dirac mode checks");
  dirac_cmd->add_option("--check", dirac_check, "identities|dispersion|evolve|hamilton")
      ->required();
  dirac_cmd->add_option("--mass", dirac_mass, "mass")->check(CLI::NonNegativeNumber);
  dirac_cmd->add_option("--k", dirac_k, "wave vector comma triple")
      ->delimiter(',')
      ->expected(1, 3);
  dirac_cmd->add_option("--seed", seed, "PRNG seed");
  dirac_cmd->add_option("--out", out_path, "JSON report path");
  dirac_cmd->add_option("--inject", inject,
                        "fault-injection offset added to residuals (testing aid)");

  int grad_dim = 3;
  double grad_eps = 1e-5, grad_alpha = 2.5;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient validation");
  grad_cmd->add_option("--dim", grad_dim, "Hilbert dimension")->check(CLI::Range(2, 16));
  grad_cmd->add_option("--eps", grad_eps, "perturbation size");
  grad_cmd->add_option("--alpha", grad_alpha, "Renyi exponent");
  grad_cmd->add_option("--seed", seed, "PRNG seed")->required();
  grad_cmd->add_option("--out", out_path, "JSON report path");
  grad_cmd->add_option("--inject", inject,
                       "fault-injection offset added to residuals (testing aid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*evolve_cmd) return run_evolve(ev);
    if (*algebra_cmd) return run_algebra(algebra_dim, seed, inject, out_path);
    if (*nosignal_cmd) return run_nosignal(ns_dims, ns_trials, seed, inject, out_path);
    if (*dirac_cmd) return run_dirac(dirac_check, dirac_mass, dirac_k, seed, inject, out_path);
    if (*grad_cmd) return run_gradcheck(grad_dim, seed, grad_eps, grad_alpha, inject, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
