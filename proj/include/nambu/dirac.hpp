#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nambu/matrix.hpp"

namespace nambu {

// Spinor conventions, stated once and used consistently below:
//   eps_{01} = eps^{01} = +1,  psi^A = eps^{AB} psi_B,  psi_A = psi^B eps_{BA},
//   world metric (+,-,-,-),  Levi-Civita orientation e^{0123} = +1
//   (equivalently e_{0123} = -1, which gives the self-duality signs
//   *sigma = -i sigma, *sigma_bar = +i sigma_bar),
//   Infeld-van der Waerden symbols g_a^{AA'} = (1, sigma_x, sigma_y, sigma_z)/sqrt(2).

using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;
using Vector3r = Eigen::Vector3d;

/// Minkowski four-vector, signature (+,-,-,-).
struct FourVector {
  double t = 0.0, x = 0.0, y = 0.0, z = 0.0;

  double operator[](int a) const {
    switch (a) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }
};

inline double minkowski_dot(const FourVector& a, const FourVector& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

inline FourVector rest_frame() { return {1.0, 0.0, 0.0, 0.0}; }

/// Plane-wave Dirac mode: spatial wave vector plus the 2-spinor pair
/// (psi^A, xi_A').
struct SpinorMode {
  Vector3r k = Vector3r::Zero();
  Vector2 psi = Vector2::Zero();
  Vector2 xi = Vector2::Zero();
};

namespace spindetail {

inline double eta(int a) { return a == 0 ? 1.0 : -1.0; }

inline double eps(int a, int b) {
  if (a == 0 && b == 1) return 1.0;
  if (a == 1 && b == 0) return -1.0;
  return 0.0;
}

/// T_{AA'} = T^{BB'} eps_{BA} eps_{B'A'}
inline Matrix2 lower_both(const Matrix2& m) {
  Matrix2 out = Matrix2::Zero();
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp) out(A, Ap) += m(B, Bp) * eps(B, A) * eps(Bp, Ap);
  return out;
}

/// T_A{}^{B'} -> with only the second index lowered: T^{A}{}_{B'} = T^{AC'} eps_{C'B'}
inline Matrix2 lower_second(const Matrix2& m) {
  Matrix2 out = Matrix2::Zero();
  for (int A = 0; A < 2; ++A)
    for (int Bp = 0; Bp < 2; ++Bp)
      for (int Cp = 0; Cp < 2; ++Cp) out(A, Bp) += m(A, Cp) * eps(Cp, Bp);
  return out;
}

/// e_{abcd} with the orientation e_{0123} = -1 (so e^{0123} = +1).
inline int levi_civita(int a, int b, int c, int d) {
  const int p[4] = {a, b, c, d};
  int sign = -1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (p[i] == p[j]) return 0;
      if (p[i] > p[j]) sign = -sign;
    }
  return sign;
}

}  // namespace spindetail

/// The four soldering symbols g_a^{AA'}.
struct IvwSymbols {
  std::array<Matrix2, 4> up;  // g_a^{AA'}

  Matrix2 up_world(int a) const { return spindetail::eta(a) * up[a]; }      // g^{a AA'}
  Matrix2 lo(int a) const { return spindetail::lower_both(up[a]); }          // g_{a AA'}
  Matrix2 up_world_lo(int a) const { return spindetail::lower_both(up_world(a)); }  // g^a_{AA'}
  Matrix2 mixed(int a) const { return spindetail::lower_second(up[a]); }     // g_a^A_{B'}
};

inline IvwSymbols ivw_symbols() {
  const Complex i{0.0, 1.0};
  const double s = 1.0 / std::sqrt(2.0);
  IvwSymbols g;
  g.up[0] << s, 0, 0, s;
  g.up[1] << 0, s, s, 0;
  g.up[2] << 0, -i * s, i * s, 0;
  g.up[3] << s, 0, 0, -s;
  return g;
}

/// Lorentz generators of the (1/2,0) and (0,1/2) representations,
/// sigma[a][b] = sigma^{ab}_X{}^Y and sigma_bar[a][b] = sigma_bar^{ab}_X'{}^{Y'}
/// built from antisymmetrized products of the soldering symbols.
struct SigmaGenerators {
  std::array<std::array<Matrix2, 4>, 4> sigma;
  std::array<std::array<Matrix2, 4>, 4> sigma_bar;
};

inline SigmaGenerators sigma_generators() {
  const IvwSymbols g = ivw_symbols();
  const Complex inv_2i = Complex(0.0, -0.5);  // 1/(2i)
  SigmaGenerators out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const Matrix2 galo = g.up_world_lo(a);
      const Matrix2 gblo = g.up_world_lo(b);
      const Matrix2 gaup = g.up_world(a);
      const Matrix2 gbup = g.up_world(b);
      Matrix2 s = Matrix2::Zero(), sb = Matrix2::Zero();
      for (int X = 0; X < 2; ++X) {
        for (int Y = 0; Y < 2; ++Y) {
          Complex acc{0.0, 0.0}, accb{0.0, 0.0};
          for (int C = 0; C < 2; ++C) {
            // contraction over the primed index (generators of (1/2,0))
            acc += galo(X, C) * gbup(Y, C) - gblo(X, C) * gaup(Y, C);
            // contraction over the unprimed index (generators of (0,1/2))
            accb += galo(C, X) * gbup(C, Y) - gblo(C, X) * gaup(C, Y);
          }
          s(X, Y) = inv_2i * acc;
          sb(X, Y) = inv_2i * accb;
        }
      }
      out.sigma[a][b] = s;
      out.sigma_bar[a][b] = sb;
    }
  }
  return out;
}

namespace spindetail {

/// Hodge dual on the antisymmetric world index pair, all indices up:
/// (*T)_{ab} = (1/2) e_{abcd} T^{cd}, raised back through the diagonal
/// metric.
inline std::array<std::array<Matrix2, 4>, 4> dual_pair(
    const std::array<std::array<Matrix2, 4>, 4>& t) {
  std::array<std::array<Matrix2, 4>, 4> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Matrix2 acc = Matrix2::Zero();
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const int e = levi_civita(a, b, c, d);
          if (e != 0) acc += 0.5 * double(e) * eta(a) * eta(b) * t[c][d];
        }
      out[a][b] = acc;
    }
  return out;
}

}  // namespace spindetail

/// Componentwise residuals of every appendix identity with the concrete
/// Pauli-based symbols.
struct AppendixResiduals {
  double iw1 = 0.0, iw2 = 0.0;
  double gs1 = 0.0, gs2 = 0.0;
  double duality_sigma = 0.0, duality_sigma_bar = 0.0;
  double id1 = 0.0, id2 = 0.0;
  double antisymmetry = 0.0;
  double slicing_contraction = 0.0;  // n_{AA'} n^{BA'} = eps_A{}^B / 2

  double max() const {
    double m = 0.0;
    for (double v : {iw1, iw2, gs1, gs2, duality_sigma, duality_sigma_bar, id1, id2,
                     antisymmetry, slicing_contraction})
      m = std::max(m, v);
    return m;
  }
};

inline double slicing_contraction_residual(const FourVector& n) {
  const IvwSymbols g = ivw_symbols();
  Matrix2 n_up = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) n_up += n[a] * g.up[a];
  const Matrix2 n_lo = spindetail::lower_both(n_up);
  double worst = 0.0;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) {
      Complex acc{0.0, 0.0};
      for (int Ap = 0; Ap < 2; ++Ap) acc += n_lo(A, Ap) * n_up(B, Ap);
      worst = std::max(worst, std::abs(acc - (A == B ? Complex(0.5, 0.0) : Complex(0.0, 0.0))));
    }
  return worst;
}

inline AppendixResiduals appendix_identity_residuals() {
  using spindetail::eps;
  using spindetail::eta;
  const IvwSymbols g = ivw_symbols();
  const SigmaGenerators sg = sigma_generators();
  const Complex i{0.0, 1.0};
  AppendixResiduals r;

  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const Matrix2 galo = g.up_world_lo(a);
      const Matrix2 gblo = g.up_world_lo(b);
      const Matrix2 gaup = g.up_world(a);
      const Matrix2 gbup = g.up_world(b);
      const double gab = a == b ? eta(a) : 0.0;
      for (int X = 0; X < 2; ++X) {
        for (int Y = 0; Y < 2; ++Y) {
          Complex sym{0.0, 0.0}, symb{0.0, 0.0}, one{0.0, 0.0}, oneb{0.0, 0.0};
          for (int C = 0; C < 2; ++C) {
            sym += galo(X, C) * gbup(Y, C) + gblo(X, C) * gaup(Y, C);
            symb += galo(C, X) * gbup(C, Y) + gblo(C, X) * gaup(C, Y);
            one += galo(X, C) * gbup(Y, C);
            oneb += galo(C, X) * gbup(C, Y);
          }
          const Complex delta = X == Y ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
          r.iw1 = std::max(r.iw1, std::abs(sym - gab * delta));
          r.iw2 = std::max(r.iw2, std::abs(symb - gab * delta));
          r.id1 = std::max(r.id1, std::abs(one - (0.5 * gab * delta + i * sg.sigma[a][b](X, Y))));
          r.id2 = std::max(r.id2,
                           std::abs(oneb - (0.5 * gab * delta + i * sg.sigma_bar[a][b](X, Y))));
          r.antisymmetry = std::max(
              r.antisymmetry, std::abs(sg.sigma[a][b](X, Y) + sg.sigma[b][a](X, Y)));
          r.antisymmetry = std::max(
              r.antisymmetry, std::abs(sg.sigma_bar[a][b](X, Y) + sg.sigma_bar[b][a](X, Y)));
        }
      }
    }
  }

  // purely spinor form: lower the world pair and convert through g_{aAA'},
  // then compare with the epsilon-symmetrized expressions
  const Complex inv_2i = Complex(0.0, -0.5);
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp)
          for (int X = 0; X < 2; ++X)
            for (int Y = 0; Y < 2; ++Y) {
              Complex from_world{0.0, 0.0}, from_world_bar{0.0, 0.0};
              for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                  // sigma^{ab} with the free spinor index lowered, then the
                  // upper world pair converted with g_{a AA'} g_{b BB'}
                  Complex s_lo{0.0, 0.0}, sb_lo{0.0, 0.0};
                  for (int Z = 0; Z < 2; ++Z) {
                    s_lo += sg.sigma[a][b](X, Z) * eps(Z, Y);
                    sb_lo += sg.sigma_bar[a][b](X, Z) * eps(Z, Y);
                  }
                  from_world += g.lo(a)(A, Ap) * g.lo(b)(B, Bp) * s_lo;
                  from_world_bar += g.lo(a)(A, Ap) * g.lo(b)(B, Bp) * sb_lo;
                }
              const Complex gs1 =
                  inv_2i * eps(Ap, Bp) * (eps(A, X) * eps(B, Y) + eps(B, X) * eps(A, Y));
              // the barred generators carry primed free indices X', Y'
              const Complex gs2 =
                  inv_2i * eps(A, B) * (eps(Ap, X) * eps(Bp, Y) + eps(Bp, X) * eps(Ap, Y));
              r.gs1 = std::max(r.gs1, std::abs(from_world - gs1));
              r.gs2 = std::max(r.gs2, std::abs(from_world_bar - gs2));
            }

  const auto dual_s = spindetail::dual_pair(sg.sigma);
  const auto dual_sb = spindetail::dual_pair(sg.sigma_bar);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      r.duality_sigma =
          std::max(r.duality_sigma, max_abs(ComplexMatrix(dual_s[a][b] + i * sg.sigma[a][b])));
      r.duality_sigma_bar = std::max(
          r.duality_sigma_bar, max_abs(ComplexMatrix(dual_sb[a][b] - i * sg.sigma_bar[a][b])));
    }

  r.slicing_contraction = slicing_contraction_residual(rest_frame());
  r.slicing_contraction = std::max(
      r.slicing_contraction,
      slicing_contraction_residual({std::cosh(0.3), 0.0, 0.0, std::sinh(0.3)}));
  return r;
}

/// Residual of the momentum-space Dirac pair for the plane wave e^{-ik.x},
/// k = (E, kvec):
///   k_{AA'} psi^A = (m/sqrt2) xi_{A'},   k^{AA'} xi_{A'} = (m/sqrt2) psi^A.
inline double dirac_residual(const SpinorMode& mode, double e_energy, double m) {
  if (m < 0.0) throw std::domain_error("dirac_residual: mass must be >= 0");
  const IvwSymbols g = ivw_symbols();
  const double k4[4] = {e_energy, mode.k[0], mode.k[1], mode.k[2]};
  Matrix2 k_up = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) k_up += k4[a] * g.up[a];
  const Matrix2 k_lo = spindetail::lower_both(k_up);
  const double ms = m / std::sqrt(2.0);

  double worst = 0.0;
  for (int Ap = 0; Ap < 2; ++Ap) {
    Complex acc{0.0, 0.0};
    for (int A = 0; A < 2; ++A) acc += k_lo(A, Ap) * mode.psi[A];
    worst = std::max(worst, std::abs(acc - ms * mode.xi[Ap]));
  }
  for (int A = 0; A < 2; ++A) {
    Complex acc{0.0, 0.0};
    for (int Ap = 0; Ap < 2; ++Ap) acc += k_up(A, Ap) * mode.xi[Ap];
    worst = std::max(worst, std::abs(acc - ms * mode.psi[A]));
  }
  return worst;
}

namespace spindetail {

inline void require_slicing(const FourVector& n) {
  if (std::abs(minkowski_dot(n, n) - 1.0) > 1e-10 || !(n.t > 0.0)) {
    std::ostringstream os;
    os << "dirac: slicing vector must be future-pointing and normalized, got n.n = "
       << minkowski_dot(n, n) << ", n_t = " << n.t;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace spindetail

/// Mode matrix of the Hamiltonian form of the Dirac pair for the slicing
/// vector n, acting on the stacked components (psi^0, psi^1, xi_0', xi_1').
/// Both equations are assembled literally: all n.grad terms (the explicit
/// one and those hiding inside the spinor-index gradient) are collected on
/// the left, the tangential wave-vector and mass terms on the right, and
/// the left block is inverted.  For the rest frame this reduces to
/// [[k.sigma, m], [m, -k.sigma]], Hermitian in the standard inner product;
/// in general it is Hermitian with respect to dirac_norm_matrix(n).
inline Matrix4 dirac_hamiltonian(const Vector3r& k, double m,
                                 const FourVector& n = rest_frame()) {
  using spindetail::eps;
  spindetail::require_slicing(n);
  const IvwSymbols g = ivw_symbols();

  // tangential part of the wave four-vector (0, k)
  const FourVector ks{0.0, k[0], k[1], k[2]};
  const double kn = minkowski_dot(n, ks);
  double kappa[4];
  for (int a = 0; a < 4; ++a) kappa[a] = ks[a] - kn * n[a];

  Matrix2 n_up = Matrix2::Zero(), n_mixed = Matrix2::Zero(), n_lo = Matrix2::Zero();
  Matrix2 kap_mixed = Matrix2::Zero(), kap_lo = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) {
    n_up += n[a] * g.up[a];
    n_mixed += n[a] * g.mixed(a);
    n_lo += n[a] * g.lo(a);
    kap_mixed += kappa[a] * g.mixed(a);
    kap_lo += kappa[a] * g.lo(a);
  }
  const double ms = m / std::sqrt(2.0);

  Matrix2 l_psi = Matrix2::Identity(), l_xi = Matrix2::Identity();
  Matrix2 r_psipsi = Matrix2::Zero(), r_psixi = Matrix2::Zero();
  Matrix2 r_xixi = Matrix2::Zero(), r_xipsi = Matrix2::Zero();
  for (int A = 0; A < 2; ++A) {
    for (int C = 0; C < 2; ++C) {
      Complex lp{0.0, 0.0}, rp{0.0, 0.0};
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp) {
          lp += n_up(B, Bp) * n_mixed(A, Bp) * eps(C, B);
          rp += n_up(B, Bp) * kap_mixed(A, Bp) * eps(C, B);
        }
      l_psi(A, C) -= lp;
      r_psipsi(A, C) = rp;
    }
  }
  for (int Ap = 0; Ap < 2; ++Ap) {
    for (int Cp = 0; Cp < 2; ++Cp) {
      Complex lx{0.0, 0.0}, rx{0.0, 0.0};
      for (int B = 0; B < 2; ++B) {
        lx += n_up(B, Cp) * n_lo(B, Ap);
        rx += n_up(B, Cp) * kap_lo(B, Ap);
      }
      l_xi(Ap, Cp) -= lx;
      r_xixi(Ap, Cp) = rx;
    }
  }
  r_psixi = ms * n_up;                 // (m/sqrt2) n^{AB'} xi_{B'}
  r_xipsi = ms * n_lo.transpose();     // (m/sqrt2) n_{BA'} psi^B, row A'

  Matrix4 lhs = Matrix4::Zero(), rhs = Matrix4::Zero();
  lhs.topLeftCorner<2, 2>() = l_psi;
  lhs.bottomRightCorner<2, 2>() = l_xi;
  rhs.topLeftCorner<2, 2>() = r_psipsi;
  rhs.topRightCorner<2, 2>() = r_psixi;
  rhs.bottomLeftCorner<2, 2>() = r_xipsi;
  rhs.bottomRightCorner<2, 2>() = r_xixi;
  return lhs.inverse() * rhs;
}

/// Gram matrix of the slicing norm on the stacked mode components:
/// ||Psi||^2 per mode = Psi† N Psi = n^{AA'}(psi_A psibar_A' + xibar_A xi_A').
inline Matrix4 dirac_norm_matrix(const FourVector& n = rest_frame()) {
  using spindetail::eps;
  spindetail::require_slicing(n);
  const IvwSymbols g = ivw_symbols();
  Matrix2 n_up = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) n_up += n[a] * g.up[a];

  Matrix2 n_psi = Matrix2::Zero();
  for (int C = 0; C < 2; ++C)
    for (int B = 0; B < 2; ++B) {
      Complex acc{0.0, 0.0};
      for (int A = 0; A < 2; ++A)
        for (int Ap = 0; Ap < 2; ++Ap) acc += eps(B, A) * eps(C, Ap) * n_up(A, Ap);
      n_psi(C, B) = acc;
    }
  Matrix4 out = Matrix4::Zero();
  out.topLeftCorner<2, 2>() = n_psi;
  out.bottomRightCorner<2, 2>() = n_up;
  return out;
}

inline double mode_norm(const SpinorMode& mode, const FourVector& n = rest_frame()) {
  const Matrix4 gram = dirac_norm_matrix(n);
  Vector4 v;
  v << mode.psi[0], mode.psi[1], mode.xi[0], mode.xi[1];
  return (v.adjoint() * gram * v)(0, 0).real();
}

/// Energy eigenmodes of h(k) in the rest frame, ascending.
inline std::vector<std::pair<double, SpinorMode>> dirac_eigenmodes(const Vector3r& k,
                                                                   double m) {
  const Matrix4 h = dirac_hamiltonian(k, m);
  if (max_abs(ComplexMatrix(h - h.adjoint())) > 1e-12)
    throw std::runtime_error("dirac_eigenmodes: rest-frame mode matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix4> es(h);
  std::vector<std::pair<double, SpinorMode>> out;
  for (int j = 0; j < 4; ++j) {
    SpinorMode mode;
    mode.k = k;
    mode.psi = es.eigenvectors().col(j).head<2>();
    mode.xi = es.eigenvectors().col(j).tail<2>();
    out.emplace_back(es.eigenvalues()[j], mode);
  }
  return out;
}

/// Advance every mode by the spectral exponential of its mode matrix.
inline std::vector<std::pair<SpinorMode, Complex>> evolve_modes(
    const std::vector<std::pair<SpinorMode, Complex>>& modes, double m, double t) {
  std::vector<std::pair<SpinorMode, Complex>> out;
  out.reserve(modes.size());
  for (const auto& [mode, amplitude] : modes) {
    const Matrix4 h = dirac_hamiltonian(mode.k, m);
    Eigen::SelfAdjointEigenSolver<Matrix4> es(h);
    Vector4 phases;
    for (int j = 0; j < 4; ++j) phases[j] = std::exp(Complex(0.0, -t * es.eigenvalues()[j]));
    const Matrix4 u =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    Vector4 v;
    v << mode.psi[0], mode.psi[1], mode.xi[0], mode.xi[1];
    v = u * v;
    SpinorMode advanced = mode;
    advanced.psi = v.head<2>();
    advanced.xi = v.tail<2>();
    out.emplace_back(advanced, amplitude);
  }
  return out;
}

inline double ensemble_norm(const std::vector<std::pair<SpinorMode, Complex>>& modes) {
  double acc = 0.0;
  for (const auto& [mode, amplitude] : modes) acc += std::norm(amplitude) * mode_norm(mode);
  return acc;
}

/// Residual of the rearranged first-order form
///   P_a psi^A = 2 P^b (*sigma)_{ba}{}^A{}_B psi^B + sqrt2 m g_a^{AB'} xi_{B'}
///   P_a xi_A' = 2 P^b (*sigma_bar)_{ba}{}_{A'}{}^{B'} xi_{B'} + sqrt2 m g_{aBA'} psi^B
/// on a solution mode; an identity once the Dirac pair holds.
inline double form_equivalence_test(const SpinorMode& mode, double e_energy, double m) {
  using spindetail::eps;
  using spindetail::eta;
  if (dirac_residual(mode, e_energy, m) > 1e-12)
    throw std::invalid_argument("form_equivalence_test: input is not a Dirac solution");
  const IvwSymbols g = ivw_symbols();
  const SigmaGenerators sg = sigma_generators();
  const auto dual_s = spindetail::dual_pair(sg.sigma);
  const auto dual_sb = spindetail::dual_pair(sg.sigma_bar);

  const double k_up[4] = {e_energy, mode.k[0], mode.k[1], mode.k[2]};
  double k_lo[4];
  for (int a = 0; a < 4; ++a) k_lo[a] = eta(a) * k_up[a];
  const double sm = std::sqrt(2.0) * m;

  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int A = 0; A < 2; ++A) {
      // (*sigma)_{ba}{}^A{}_B: lower both world indices of the dual, raise X,
      // lower Y
      Complex acc = k_lo[a] * mode.psi[A];
      for (int b = 0; b < 4; ++b) {
        Matrix2 m_lo = eta(b) * eta(a) * dual_s[b][a];
        for (int B = 0; B < 2; ++B) {
          Complex elem{0.0, 0.0};
          for (int X = 0; X < 2; ++X)
            for (int Y = 0; Y < 2; ++Y) elem += eps(A, X) * m_lo(X, Y) * eps(Y, B);
          acc -= 2.0 * k_up[b] * elem * mode.psi[B];
        }
      }
      for (int Bp = 0; Bp < 2; ++Bp) acc -= sm * g.up[a](A, Bp) * mode.xi[Bp];
      worst = std::max(worst, std::abs(acc));
    }
    for (int Ap = 0; Ap < 2; ++Ap) {
      Complex acc = k_lo[a] * mode.xi[Ap];
      for (int b = 0; b < 4; ++b) {
        Matrix2 m_lo = eta(b) * eta(a) * dual_sb[b][a];
        for (int Bp = 0; Bp < 2; ++Bp) acc -= 2.0 * k_up[b] * m_lo(Ap, Bp) * mode.xi[Bp];
      }
      for (int B = 0; B < 2; ++B) acc -= sm * g.lo(a)(B, Ap) * mode.psi[B];
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

/// Consistency of the Hamilton form: i dPsi/dt from evolve_modes (centered
/// difference) against I delta_H/delta_Psibar from the discretized
/// Hamiltonian function, in the lowered components Psi_alpha = (psi_A, xi_A').
inline double hamilton_equations_check(
    const std::vector<std::pair<SpinorMode, Complex>>& modes, double m) {
  using spindetail::eps;
  const IvwSymbols g = ivw_symbols();
  const FourVector n = rest_frame();
  Matrix2 n_up = Matrix2::Zero(), n_lo = Matrix2::Zero();
  for (int a = 0; a < 4; ++a) {
    n_up += n[a] * g.up[a];
    n_lo += n[a] * g.lo(a);
  }
  const double kernel_mass = std::sqrt(2.0) * m;  // doubled (m/sqrt2), see below
  const double dt = 1e-6;

  auto lowered = [](const SpinorMode& mode, const Complex& amp) {
    Vector4 v;
    // psi_A = psi^B eps_BA
    v[0] = -mode.psi[1];
    v[1] = mode.psi[0];
    v[2] = mode.xi[0];
    v[3] = mode.xi[1];
    return Vector4(amp * v);
  };

  double worst = 0.0;
  for (const auto& entry : modes) {
    const std::vector<std::pair<SpinorMode, Complex>> one{entry};
    const Vector4 plus = lowered(evolve_modes(one, m, dt)[0].first, entry.second);
    const Vector4 minus = lowered(evolve_modes(one, m, -dt)[0].first, entry.second);
    const Vector4 lhs = Complex(0.0, 1.0) * (plus - minus) / (2.0 * dt);

    // Kernel i nabla_{AB'} on a mode.  The kernel's four-gradient contains
    // the normal derivative as well as the tangential one; on solutions of
    // the mode equations the normal part contributes exactly as much as
    // the tangential-plus-mass part, so the slice-data kernel carries the
    // tangential and mass entries twice.
    const double kappa[4] = {0.0, entry.first.k[0], entry.first.k[1], entry.first.k[2]};
    Matrix2 kap_lo = Matrix2::Zero();
    for (int a = 0; a < 4; ++a) kap_lo += 2.0 * kappa[a] * g.lo(a);

    const Vector4 psi_lo = lowered(entry.first, entry.second);
    const Vector2 psi_l = psi_lo.head<2>();
    const Vector2 xi_l = psi_lo.tail<2>();

    // sandwiched right factors: n^{BB'} psi_B (index B'), n^{BB'} xi_{B'} (index B)
    Vector2 r_psi = Vector2::Zero(), r_xi = Vector2::Zero();
    for (int B = 0; B < 2; ++B)
      for (int Bp = 0; Bp < 2; ++Bp) {
        r_psi[Bp] += n_up(B, Bp) * psi_l[B];
        r_xi[B] += n_up(B, Bp) * xi_l[Bp];
      }

    // dH/dpsibar_{A'} and dH/dxibar_A
    Vector2 d_psibar = Vector2::Zero(), d_xibar = Vector2::Zero();
    for (int Ap = 0; Ap < 2; ++Ap) {
      Complex acc{0.0, 0.0};
      for (int A = 0; A < 2; ++A) {
        Complex inner{0.0, 0.0};
        for (int Bp = 0; Bp < 2; ++Bp) inner += kap_lo(A, Bp) * r_psi[Bp];
        for (int B = 0; B < 2; ++B) inner -= kernel_mass * eps(A, B) * r_xi[B];
        acc += n_up(A, Ap) * inner;
      }
      d_psibar[Ap] = acc;
    }
    for (int A = 0; A < 2; ++A) {
      Complex acc{0.0, 0.0};
      for (int Ap = 0; Ap < 2; ++Ap) {
        Complex inner{0.0, 0.0};
        for (int Bp = 0; Bp < 2; ++Bp) inner += kernel_mass * eps(Ap, Bp) * r_psi[Bp];
        for (int B = 0; B < 2; ++B) inner += kap_lo(B, Ap) * r_xi[B];
        acc += n_up(A, Ap) * inner;
      }
      d_xibar[A] = acc;
    }

    // i psidot_A = I_{AA'} dH/dpsibar_{A'},  i xidot_{A'} = I_{AA'} dH/dxibar_A
    Vector4 rhs = Vector4::Zero();
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) {
        rhs[A] += 2.0 * n_lo(A, Ap) * d_psibar[Ap];
        rhs[2 + Ap] += 2.0 * n_lo(A, Ap) * d_xibar[A];
      }

    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace nambu
