#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "nambu/rng.hpp"

namespace nambu {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;   // per-entry |M - M†| bound
inline constexpr double kPsdTol = 1e-10;         // eigenvalue >= -kPsdTol
inline constexpr double kEigenvalueFloor = 1e-12;  // fractional powers clip here

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

inline void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << who << ": matrix is " << m.rows() << "x" << m.cols() << ", expected square";
    throw std::invalid_argument(os.str());
  }
  if (m.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty matrix");
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

}  // namespace detail

/// Square complex matrix constrained to equal its conjugate transpose to
/// 1e-12 per entry.  Value type; validated on construction.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m) : mat_(std::move(m)) {
    detail::require_square(mat_, "HermitianMatrix");
    const double dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTol) {
      std::ostringstream os;
      os << "HermitianMatrix: not Hermitian, max |M - M†| = " << dev;
      throw std::invalid_argument(os.str());
    }
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const ComplexMatrix& mat() const { return mat_; }

 private:
  ComplexMatrix mat_;
};

/// Hermitian, positive semidefinite to -1e-10 (configurable for integrator
/// output), positive trace.  Trace is deliberately NOT normalized to one:
/// the scaling experiments need unnormalized states.
class DensityMatrix : public HermitianMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m, double psd_tol = kPsdTol)
      : HermitianMatrix(std::move(m)) {
    const std::string err = psd_violation(*this, psd_tol);
    if (!err.empty()) throw std::invalid_argument("DensityMatrix: " + err);
  }

  static std::optional<DensityMatrix> try_make(const ComplexMatrix& m,
                                               double psd_tol = kPsdTol) {
    if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) return std::nullopt;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) return std::nullopt;
    HermitianMatrix h{m};
    if (!psd_violation(h, psd_tol).empty()) return std::nullopt;
    return DensityMatrix(h, psd_tol);
  }

 private:
  DensityMatrix(HermitianMatrix h, double) : HermitianMatrix(std::move(h)) {}

  static std::string psd_violation(const HermitianMatrix& h, double psd_tol) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.mat(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return "eigenvalue computation failed";
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -psd_tol) {
      std::ostringstream os;
      os << "eigenvalue " << lo << " below PSD tolerance -" << psd_tol;
      return os.str();
    }
    const double tr = h.mat().trace().real();
    if (!(tr > 0.0)) {
      std::ostringstream os;
      os << "trace " << tr << " is not positive";
      return os.str();
    }
    return {};
  }
};

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary of column eigenvectors.
struct Spectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

inline HermitianMatrix hermitize(const ComplexMatrix& m) {
  detail::require_square(m, "hermitize");
  return HermitianMatrix(0.5 * (m + m.adjoint()).eval());
}

inline Spectrum eig_hermitian(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.mat());
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_hermitian: no convergence, ||M||_max = " << max_abs(m.mat());
    throw std::runtime_error(os.str());
  }
  Spectrum s{es.eigenvalues(), es.eigenvectors()};
  const double scale = std::max(1.0, max_abs(m.mat()));
  const double rec =
      max_abs(s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint() - m.mat());
  const ComplexMatrix gram = s.eigenvectors.adjoint() * s.eigenvectors;
  const double unit = max_abs(gram - ComplexMatrix::Identity(m.dim(), m.dim()));
  if (rec > 1e-10 * scale || unit > 1e-10) {
    std::ostringstream os;
    os << "eig_hermitian: spectrum invariant violated (reconstruction " << rec
       << ", unitarity " << unit << ", ||M||_max = " << max_abs(m.mat()) << ")";
    throw std::runtime_error(os.str());
  }
  return s;
}

/// rho^s through the spectral decomposition.  Eigenvalues below 1e-12 are
/// clipped to zero and 0^s := 0 for every s >= 0 (including s = 0), which
/// keeps kernel directions inert under fractional powers.
inline HermitianMatrix matrix_power(const HermitianMatrix& rho, double s) {
  if (!(s >= 0.0)) throw std::domain_error("matrix_power: exponent must be >= 0");
  const Spectrum sp = eig_hermitian(rho);
  RealVector powers(sp.eigenvalues.size());
  for (Eigen::Index k = 0; k < powers.size(); ++k) {
    const double p = sp.eigenvalues[k];
    powers[k] = p < kEigenvalueFloor ? 0.0 : std::pow(p, s);
  }
  const ComplexMatrix out =
      sp.eigenvectors * powers.asDiagonal() * sp.eigenvectors.adjoint();
  return hermitize(out);
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_square(a, "commutator");
  detail::require_square(b, "commutator");
  if (a.rows() != b.rows()) {
    std::ostringstream os;
    os << "commutator: dimension mismatch " << a.rows() << " vs " << b.rows();
    throw std::invalid_argument(os.str());
  }
  return a * b - b * a;
}

/// Tr(rho^n) by repeated multiplication (no eigendecomposition, so it can
/// serve as an algebraically independent route against the spectral one).
inline double trace_power(const HermitianMatrix& rho, int n) {
  if (n < 1) throw std::domain_error("trace_power: n must be >= 1");
  ComplexMatrix p = rho.mat();
  for (int k = 1; k < n; ++k) p = (p * rho.mat()).eval();
  const Complex tr = p.trace();
  if (std::abs(tr.imag()) > 1e-12 * std::max(1.0, std::abs(tr.real()))) {
    std::ostringstream os;
    os << "trace_power: internal consistency failure, Im Tr = " << tr.imag();
    throw std::runtime_error(os.str());
  }
  return tr.real();
}

/// Seeded Hermitian observable: hermitized matrix of standard complex
/// normal entries, filled row-major.
inline HermitianMatrix random_hermitian(int d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_hermitian: d must be >= 1");
  Rng rng(seed);
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  return hermitize(g);
}

/// Seeded density matrix G G† / Tr(G G†) with G a d x rank complex normal
/// matrix; rank 1 gives a pure state, rank d a generic full-rank state.
inline DensityMatrix random_density(int d, int rank, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_density: d must be >= 1");
  if (rank < 1 || rank > d) {
    std::ostringstream os;
    os << "random_density: rank " << rank << " out of range [1, " << d << "]";
    throw std::invalid_argument(os.str());
  }
  Rng rng(seed);
  ComplexMatrix g(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = rng.complex_normal();
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(std::move(m));
}

}  // namespace nambu
