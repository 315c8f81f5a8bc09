#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"

namespace nambu {

namespace detail {

constexpr Complex kImagUnit{0.0, 1.0};

inline double real_checked(const Complex& z, const char* who) {
  if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z.real()))) {
    std::ostringstream os;
    os << who << ": imaginary residue " << z.imag() << " exceeds tolerance";
    throw std::runtime_error(os.str());
  }
  return z.real();
}

inline void require_same_dim(int a, int b, const char* who) {
  if (a != b) {
    std::ostringstream os;
    os << who << ": dimension mismatch " << a << " vs " << b;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

/// Lie-Poisson bracket {F, G} = -i Tr(rho [dF, dG]).  Real by construction;
/// with a linear Hamiltonian it generates the linear von Neumann flow.
inline double lie_poisson(const Functional& f, const Functional& g,
                          const HermitianMatrix& rho) {
  const ComplexMatrix df = f.gradient(rho).mat();
  const ComplexMatrix dg = g.gradient(rho).mat();
  detail::require_same_dim(static_cast<int>(df.rows()), rho.dim(), "lie_poisson");
  detail::require_same_dim(static_cast<int>(dg.rows()), rho.dim(), "lie_poisson");
  const Complex tr = (rho.mat() * commutator(df, dg)).trace();
  return detail::real_checked(-detail::kImagUnit * tr, "lie_poisson");
}

/// Lie-Nambu triple bracket [F, G, H] = -i Tr(dF [dG, dH]), totally
/// antisymmetric in its three slots.  Putting C2/2 in the last slot
/// recovers the Lie-Poisson bracket.
inline double lie_nambu(const Functional& f, const Functional& g, const Functional& h,
                        const HermitianMatrix& rho) {
  const ComplexMatrix df = f.gradient(rho).mat();
  const ComplexMatrix dg = g.gradient(rho).mat();
  const ComplexMatrix dh = h.gradient(rho).mat();
  detail::require_same_dim(static_cast<int>(df.rows()), rho.dim(), "lie_nambu");
  detail::require_same_dim(static_cast<int>(dg.rows()), rho.dim(), "lie_nambu");
  detail::require_same_dim(static_cast<int>(dh.rows()), rho.dim(), "lie_nambu");
  const Complex tr = (df * commutator(dg, dh)).trace();
  return detail::real_checked(-detail::kImagUnit * tr, "lie_nambu");
}

/// Equation-of-motion right-hand side: rho_dot = -i [dH, dS].  With a linear
/// H and S = C2/2 this is the linear Liouville-von Neumann flow -i [Hhat, rho].
inline HermitianMatrix nambu_rhs(const Functional& h, const Functional& s,
                                 const HermitianMatrix& rho) {
  const ComplexMatrix dh = h.gradient(rho).mat();
  const ComplexMatrix ds = s.gradient(rho).mat();
  detail::require_same_dim(static_cast<int>(dh.rows()), rho.dim(), "nambu_rhs");
  detail::require_same_dim(static_cast<int>(ds.rows()), rho.dim(), "nambu_rhs");
  const ComplexMatrix out = -detail::kImagUnit * commutator(dh, ds);
  if ((out - out.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, max_abs(out)))
    throw std::runtime_error("nambu_rhs: result is not Hermitian");
  return hermitize(out);
}

/// Functional of a wavefunction and its conjugate, supplied with the
/// gradient dF/dPsi_bar (a column vector; dF/dPsi is its conjugate for
/// real-valued F).
struct WavefunctionFunctional {
  std::function<double(const ComplexVector&)> value;
  std::function<ComplexVector(const ComplexVector&)> grad_conj;
};

/// Canonical pure-state bracket
///   {F, G} = -i sum_k (dF/dPsi_k dG/dPsibar_k - dG/dPsi_k dF/dPsibar_k)
///          = 2 Im <dF/dPsibar, dG/dPsibar>.
inline double pure_state_bracket(const WavefunctionFunctional& f,
                                 const WavefunctionFunctional& g,
                                 const ComplexVector& psi) {
  const ComplexVector fb = f.grad_conj(psi);
  const ComplexVector gb = g.grad_conj(psi);
  return 2.0 * fb.dot(gb).imag();  // Eigen dot conjugates the left argument
}

/// Wavefunction functional induced by a matrix functional through the
/// pure-state density matrix rho = Psi Psi†.
inline WavefunctionFunctional induced_wavefunction_functional(const Functional& f) {
  return {[f](const ComplexVector& psi) {
            return f.value(hermitize(psi * psi.adjoint()));
          },
          [f](const ComplexVector& psi) -> ComplexVector {
            return f.gradient(hermitize(psi * psi.adjoint())).mat() * psi;
          }};
}

/// Orthonormal Hermitian operator basis: normalized identity first, then
/// for each pair j < k the symmetric and antisymmetric generalized
/// Gell-Mann elements, then the diagonal ones.  Tr(T_a T_b) = delta_ab.
inline std::vector<HermitianMatrix> hermitian_basis(int d) {
  if (d < 1) throw std::invalid_argument("hermitian_basis: d must be >= 1");
  std::vector<HermitianMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  basis.emplace_back(ComplexMatrix::Identity(d, d) / std::sqrt(double(d)));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix sym = ComplexMatrix::Zero(d, d);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      basis.emplace_back(std::move(sym));
      ComplexMatrix asym = ComplexMatrix::Zero(d, d);
      asym(j, k) = Complex(0.0, -inv_sqrt2);
      asym(k, j) = Complex(0.0, inv_sqrt2);
      basis.emplace_back(std::move(asym));
    }
  }
  for (int l = 1; l < d; ++l) {
    ComplexMatrix diag = ComplexMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(double(l) * (l + 1));
    for (int j = 0; j < l; ++j) diag(j, j) = norm;
    diag(l, l) = -double(l) * norm;
    basis.emplace_back(std::move(diag));
  }
  return basis;
}

/// Explicit structure constants and metric tensors over the Hermitian basis
/// for small Hilbert dimension.  Rank-3 arrays are stored flat with index
/// (a * n + b) * n + c, n = d^2.
struct StructureTensor {
  int d = 0;
  std::vector<HermitianMatrix> basis;
  RealMatrix g_lower, g_upper;
  std::vector<double> omega_lower;  // Omega_abc = -i Tr(T_a [T_b, T_c])
  std::vector<double> omega_mixed;  // Omega^a_bc = g^{ad} Omega_dbc

  int n() const { return d * d; }
  double lower(int a, int b, int c) const { return omega_lower[(a * n() + b) * n() + c]; }
  double mixed(int a, int b, int c) const { return omega_mixed[(a * n() + b) * n() + c]; }
};

inline StructureTensor structure_tensor(int d) {
  if (d < 2 || d > 4)
    throw std::invalid_argument("structure_tensor: d must be in [2, 4]");
  StructureTensor t;
  t.d = d;
  t.basis = hermitian_basis(d);
  const int n = t.n();

  t.g_lower = RealMatrix(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      t.g_lower(a, b) = (t.basis[a].mat() * t.basis[b].mat()).trace().real();
  t.g_upper = t.g_lower.inverse();
  if ((t.g_lower * t.g_upper - RealMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    throw std::runtime_error("structure_tensor: metric inversion failed");

  t.omega_lower.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < n; ++c) {
      const ComplexMatrix comm = commutator(t.basis[b].mat(), t.basis[c].mat());
      for (int a = 0; a < n; ++a) {
        const Complex tr = (t.basis[a].mat() * comm).trace();
        t.omega_lower[(a * n + b) * n + c] =
            detail::real_checked(-detail::kImagUnit * tr, "structure_tensor");
      }
    }
  }

  t.omega_mixed.assign(t.omega_lower.size(), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int e = 0; e < n; ++e) acc += t.g_upper(a, e) * t.lower(e, b, c);
        t.omega_mixed[(a * n + b) * n + c] = acc;
      }
  return t;
}

/// Max violation of Omega^a_cb = -Omega^a_bc.
inline double antisymmetry_residual(const StructureTensor& t) {
  double worst = 0.0;
  const int n = t.n();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        worst = std::max(worst, std::abs(t.mixed(a, b, c) + t.mixed(a, c, b)));
  return worst;
}

/// Max violation of total antisymmetry of Omega_abc over all six
/// permutations.
inline double total_antisymmetry_residual(const StructureTensor& t) {
  double worst = 0.0;
  const int n = t.n();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double v = t.lower(a, b, c);
        worst = std::max({worst, std::abs(t.lower(a, c, b) + v),
                          std::abs(t.lower(b, a, c) + v),
                          std::abs(t.lower(c, b, a) + v),
                          std::abs(t.lower(b, c, a) - v),
                          std::abs(t.lower(c, a, b) - v)});
      }
  return worst;
}

/// Max residual of the Jacobi identity
///   Omega^a_bc Omega^c_de + Omega^a_ec Omega^c_bd + Omega^a_dc Omega^c_eb = 0.
inline double jacobi_residual(const StructureTensor& t) {
  const int n = t.n();
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        for (int e = 0; e < n; ++e) {
          double acc = 0.0;
          for (int c = 0; c < n; ++c)
            acc += t.mixed(a, b, c) * t.mixed(c, d, e) +
                   t.mixed(a, e, c) * t.mixed(c, b, d) +
                   t.mixed(a, d, c) * t.mixed(c, e, b);
          worst = std::max(worst, std::abs(acc));
        }
  return worst;
}

/// Component form of the triple bracket: expand each gradient over the
/// basis, f_a = Tr(T_a dF), and contract with Omega_abc.  Agrees with
/// lie_nambu by completeness of the basis.
inline double bracket_via_tensor(const Functional& f, const Functional& g,
                                 const Functional& h, const HermitianMatrix& rho,
                                 const StructureTensor& t) {
  detail::require_same_dim(rho.dim(), t.d, "bracket_via_tensor");
  const int n = t.n();
  const ComplexMatrix df = f.gradient(rho).mat();
  const ComplexMatrix dg = g.gradient(rho).mat();
  const ComplexMatrix dh = h.gradient(rho).mat();
  std::vector<double> fa(n), gb(n), hc(n);
  for (int a = 0; a < n; ++a) {
    fa[a] = (t.basis[a].mat() * df).trace().real();
    gb[a] = (t.basis[a].mat() * dg).trace().real();
    hc[a] = (t.basis[a].mat() * dh).trace().real();
  }
  double acc = 0.0;
  for (int a = 0; a < n; ++a) {
    if (fa[a] == 0.0) continue;
    for (int b = 0; b < n; ++b) {
      if (gb[b] == 0.0) continue;
      for (int c = 0; c < n; ++c) acc += t.lower(a, b, c) * fa[a] * gb[b] * hc[c];
    }
  }
  return acc;
}

/// Totally cyclic tensor of basis traces, entry(a_1..a_n) = Re Tr(T_a1 ... T_an);
/// contracting it with n copies of rho_a = Tr(T_a rho) reproduces Tr rho^n.
struct CyclicTraceTensor {
  int d = 0;
  int arity = 0;
  std::vector<double> entries;  // flat, last index fastest

  int n() const { return d * d; }
  double entry(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int i : idx) flat = flat * n() + static_cast<std::size_t>(i);
    return entries[flat];
  }
};

inline CyclicTraceTensor cyclic_trace_tensor(int d, int arity) {
  if (d < 2 || d > 3) throw std::invalid_argument("cyclic_trace_tensor: d must be 2 or 3");
  if (arity < 1 || arity > 4)
    throw std::invalid_argument("cyclic_trace_tensor: arity must be in [1, 4]");
  CyclicTraceTensor t;
  t.d = d;
  t.arity = arity;
  const std::vector<HermitianMatrix> basis = hermitian_basis(d);
  const int n = d * d;
  std::size_t total = 1;
  for (int i = 0; i < arity; ++i) total *= static_cast<std::size_t>(n);
  t.entries.assign(total, 0.0);
  std::vector<int> idx(arity, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int i = arity - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    ComplexMatrix prod = basis[idx[0]].mat();
    for (int i = 1; i < arity; ++i) prod = (prod * basis[idx[i]].mat()).eval();
    t.entries[flat] = prod.trace().real();
  }
  return t;
}

inline double casimir_via_tensor(const CyclicTraceTensor& t, const HermitianMatrix& rho) {
  detail::require_same_dim(rho.dim(), t.d, "casimir_via_tensor");
  const int n = t.n();
  const std::vector<HermitianMatrix> basis = hermitian_basis(t.d);
  std::vector<double> comp(n);
  for (int a = 0; a < n; ++a) comp[a] = (basis[a].mat() * rho.mat()).trace().real();
  double acc = 0.0;
  std::vector<int> idx(t.arity, 0);
  const std::size_t total = t.entries.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double weight = 1.0;
    for (int i = t.arity - 1; i >= 0; --i) {
      weight *= comp[rest % n];
      rest /= n;
    }
    acc += t.entries[flat] * weight;
  }
  return acc;
}

/// Max violation of cyclic symmetry of the trace tensor.
inline double cyclic_symmetry_residual(const CyclicTraceTensor& t) {
  const int n = t.n();
  double worst = 0.0;
  std::vector<int> idx(t.arity, 0), rot(t.arity, 0);
  const std::size_t total = t.entries.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int i = t.arity - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    for (int s = 1; s < t.arity; ++s) {
      for (int i = 0; i < t.arity; ++i) rot[i] = idx[(i + s) % t.arity];
      worst = std::max(worst, std::abs(t.entry(rot) - t.entries[flat]));
    }
  }
  return worst;
}

}  // namespace nambu
