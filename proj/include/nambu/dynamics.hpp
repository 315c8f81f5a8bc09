#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nambu/brackets.hpp"
#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"

namespace nambu {

enum class Method { rk4, isospectral };

/// Generators and grid of one integration run.
struct EvolutionSpec {
  Functional h;
  Functional s;
  double t_end = 0.0;
  double dt = 0.0;
  Method method = Method::rk4;
};

struct DiagnosticsRow {
  double t = 0.0;
  std::array<double, 4> casimirs{};  // C1..C4
  RealVector eigenvalues;            // ascending
  double s_value = 0.0;
  double h_value = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<DiagnosticsRow> diagnostics;
  std::optional<HermitianMatrix> linear_hamiltonian;  // set when H is linear
};

/// One classical Runge-Kutta step of rho_dot = -i [dH, dS].  Output is
/// re-hermitized but deliberately not projected back to the PSD cone;
/// violations beyond 1e-8 abort (they signal that dt is too large).
inline DensityMatrix step_rk4(const DensityMatrix& rho, double dt, const Functional& h,
                              const Functional& s) {
  const ComplexMatrix k1 = nambu_rhs(h, s, rho).mat();
  const ComplexMatrix k2 = nambu_rhs(h, s, hermitize(rho.mat() + (0.5 * dt) * k1)).mat();
  const ComplexMatrix k3 = nambu_rhs(h, s, hermitize(rho.mat() + (0.5 * dt) * k2)).mat();
  const ComplexMatrix k4 = nambu_rhs(h, s, hermitize(rho.mat() + dt * k3)).mat();
  const ComplexMatrix next = rho.mat() + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return DensityMatrix(hermitize(next).mat(), 1e-8);
}

namespace detail {

/// Loewner matrix of divided differences of the spectral function phi:
/// secant (phi(p_k) - phi(p_j)) / (p_k - p_j) for separated pairs, the
/// derivative of the floored phi on (near-)degenerate ones.  The derivative
/// fill is what makes phi = id reproduce B = -i H' exactly, diagonal
/// included, so the alpha = 2 flow steps by exact linear conjugation.
inline RealMatrix divided_differences(const RealVector& p, const SpectralGenerator& gen) {
  const Eigen::Index n = p.size();
  const double tau = 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff());
  RealMatrix dd(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double gap = p[k] - p[j];
      dd(j, k) = std::abs(gap) > tau ? (gen.phi(p[k]) - gen.phi(p[j])) / gap
                                     : gen.dphi(0.5 * (p[j] + p[k]));
    }
  }
  return dd;
}

/// Lax generator B with [B, rho] = -i [dH, dS] at the given state:
/// B_jk = -i H'_jk dd_jk in the eigenbasis of rho, rotated back.
inline ComplexMatrix lax_generator(const Functional& h, const Functional& s,
                                   const HermitianMatrix& rho) {
  const Spectrum sp = eig_hermitian(rho);
  const SpectralGenerator gen = s.spectral_generator(rho);
  const RealMatrix dd = divided_differences(sp.eigenvalues, gen);
  const ComplexMatrix hp =
      sp.eigenvectors.adjoint() * h.gradient(rho).mat() * sp.eigenvectors;
  const ComplexMatrix b = (-kImagUnit) * hp.cwiseProduct(dd.cast<Complex>());
  return sp.eigenvectors * b * sp.eigenvectors.adjoint();
}

/// exp(dt B) for skew-Hermitian B through the spectral theorem on iB.
inline ComplexMatrix unitary_exp(const ComplexMatrix& b, double dt) {
  const Spectrum sp = eig_hermitian(hermitize(kImagUnit * b));
  ComplexVector phases(sp.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    phases[k] = std::exp(Complex(0.0, -dt * sp.eigenvalues[k]));
  return sp.eigenvectors * phases.asDiagonal() * sp.eigenvectors.adjoint();
}

}  // namespace detail

/// Unitary-conjugation (Lax) step: rho -> U rho U†, so the spectrum is
/// preserved to machine precision by construction.  The base substep
/// evaluates B at the midpoint of the conjugation itself (fixed point of
/// B = lax(exp(dt/2 B) rho exp(-dt/2 B))), which keeps every evaluation
/// state exactly isospectral with rho -- fractional spectral functions
/// never see off-manifold eigenvalues -- and makes the substep
/// time-symmetric and second order; a triple-jump composition raises the
/// step to fourth order.  With S = C2/2 the generator is the constant
/// -i Hhat and the step collapses to the exact linear conjugation.
/// Requires a linear H and an S whose gradient commutes with rho
/// (Casimir functions and the Renyi generators).
namespace detail {

inline ComplexMatrix lax_midpoint_substep(const ComplexMatrix& rho, double dt,
                                          const Functional& h, const Functional& s) {
  ComplexMatrix b = lax_generator(h, s, hermitize(rho));
  for (int iter = 0; iter < 4; ++iter) {
    const ComplexMatrix uh = unitary_exp(b, 0.5 * dt);
    b = lax_generator(h, s, hermitize(uh * rho * uh.adjoint()));
  }
  const ComplexMatrix u = unitary_exp(b, dt);
  return u * rho * u.adjoint();
}

}  // namespace detail

inline DensityMatrix step_isospectral(const DensityMatrix& rho, double dt,
                                      const Functional& h, const Functional& s) {
  if (!h.linear_matrix())
    throw std::invalid_argument("step_isospectral: H must be a linear observable");
  if (!s.has_spectral_generator())
    throw std::runtime_error(
        "step_isospectral: unsupported generator, dS does not commute with rho");
  // fourth-order triple-jump composition of the symmetric midpoint substep
  const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
  const double g2 = 1.0 - 2.0 * g1;
  ComplexMatrix out = detail::lax_midpoint_substep(rho.mat(), g1 * dt, h, s);
  out = detail::lax_midpoint_substep(out, g2 * dt, h, s);
  out = detail::lax_midpoint_substep(out, g1 * dt, h, s);
  return DensityMatrix(hermitize(out).mat());
}

/// Exact linear Liouville-von Neumann solution e^{-i H t} rho0 e^{i H t}.
inline DensityMatrix linear_reference(const DensityMatrix& rho0, const HermitianMatrix& hhat,
                                      double t) {
  const Spectrum sp = eig_hermitian(hhat);
  ComplexVector phases(sp.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    phases[k] = std::exp(Complex(0.0, -t * sp.eigenvalues[k]));
  const ComplexMatrix u = sp.eigenvectors * phases.asDiagonal() * sp.eigenvectors.adjoint();
  return DensityMatrix(hermitize(u * rho0.mat() * u.adjoint()).mat());
}

inline DiagnosticsRow diagnostics_row(double t, const DensityMatrix& state,
                                      const Functional& h, const Functional& s) {
  DiagnosticsRow row;
  row.t = t;
  for (int n = 1; n <= 4; ++n) row.casimirs[n - 1] = trace_power(state, n);
  row.eigenvalues = eig_hermitian(state).eigenvalues;
  row.s_value = s.value(state);
  row.h_value = h.value(state);
  return row;
}

/// Fixed-step integration with per-step conservation diagnostics.  The last
/// recorded time is round(t_end / dt) * dt, within dt of t_end.
inline Trajectory evolve(const DensityMatrix& rho0, const EvolutionSpec& spec) {
  if (!(spec.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(spec.t_end >= 0.0)) throw std::invalid_argument("evolve: t_end must be >= 0");
  const long long n_steps = std::llround(spec.t_end / spec.dt);

  Trajectory traj;
  traj.linear_hamiltonian = spec.h.linear_matrix();
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.diagnostics.reserve(n_steps + 1);

  DensityMatrix state = rho0;
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  traj.diagnostics.push_back(diagnostics_row(0.0, state, spec.h, spec.s));

  for (long long step = 1; step <= n_steps; ++step) {
    try {
      state = spec.method == Method::rk4 ? step_rk4(state, spec.dt, spec.h, spec.s)
                                         : step_isospectral(state, spec.dt, spec.h, spec.s);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "evolve: aborted at step " << step << " (t = " << step * spec.dt
         << "): " << e.what();
      throw std::runtime_error(os.str());
    }
    const double t = step * spec.dt;
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.diagnostics.push_back(diagnostics_row(t, state, spec.h, spec.s));
  }
  return traj;
}

/// Closed-form observable rate of the first Renyi flow,
///   dF/dt = -i c1(rho) Tr(rho^(alpha-1) [Fhat, Hhat]).
inline double observable_rate(const HermitianMatrix& fhat, const HermitianMatrix& hhat,
                              const HermitianMatrix& rho, double alpha) {
  detail::require_alpha(alpha);
  const auto terms = detail::renyi_terms(rho, alpha);
  const ComplexMatrix ra = matrix_power(rho, alpha - 1.0).mat();
  const Complex tr = (ra * commutator(fhat.mat(), hhat.mat())).trace();
  return detail::real_checked(-detail::kImagUnit * terms.c1 * tr, "observable_rate");
}

/// Per-step table of conserved-quantity diagnostics.  Columns follow the
/// CSV schema: t, C1..C4, ascending eigenvalues, S, H and the max-norm
/// deviation from the linear reference flow (NaN when H is not linear).
struct DiagnosticsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline DiagnosticsTable diagnostics_table(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("diagnostics_table: empty trajectory");
  const int d = traj.states.front().dim();
  DiagnosticsTable table;
  table.columns = {"t", "C1", "C2", "C3", "C4"};
  for (int k = 1; k <= d; ++k) table.columns.push_back("p_" + std::to_string(k));
  table.columns.push_back("S_value");
  table.columns.push_back("H_value");
  table.columns.push_back("linear_deviation");

  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const DiagnosticsRow& row = traj.diagnostics[i];
    std::vector<double> out;
    out.reserve(table.columns.size());
    out.push_back(row.t);
    for (double c : row.casimirs) out.push_back(c);
    for (Eigen::Index k = 0; k < row.eigenvalues.size(); ++k)
      out.push_back(row.eigenvalues[k]);
    out.push_back(row.s_value);
    out.push_back(row.h_value);
    if (traj.linear_hamiltonian) {
      const DensityMatrix ref =
          linear_reference(traj.states.front(), *traj.linear_hamiltonian, row.t);
      out.push_back(max_abs(traj.states[i].mat() - ref.mat()));
    } else {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    table.rows.push_back(std::move(out));
  }
  return table;
}

}  // namespace nambu
