#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nambu/matrix.hpp"

namespace nambu {

enum class FunctionalKind { linear, casimir, renyi_a, renyi_b, casimir_function, composite };

/// Scalar function phi (and its derivative) such that the gradient of a
/// functional at the current state is phi(rho) + const * identity, applied
/// spectrally.  Only functionals whose gradient commutes with rho have one.
struct SpectralGenerator {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
};

/// Real-valued functional of a density matrix together with its gradient
/// matrix dF/drho.  Evaluation accepts any Hermitian matrix so integrator
/// stages slightly outside the PSD cone remain usable.
class Functional {
 public:
  using ValueFn = std::function<double(const HermitianMatrix&)>;
  using GradFn = std::function<HermitianMatrix(const HermitianMatrix&)>;
  using SpectralFn = std::function<SpectralGenerator(const HermitianMatrix&)>;

  Functional(FunctionalKind kind, ValueFn value, GradFn grad, SpectralFn spectral = nullptr,
             std::optional<HermitianMatrix> linear_matrix = std::nullopt)
      : kind_(kind),
        value_(std::move(value)),
        grad_(std::move(grad)),
        spectral_(std::move(spectral)),
        linear_matrix_(std::move(linear_matrix)) {}

  double value(const HermitianMatrix& rho) const { return value_(rho); }
  HermitianMatrix gradient(const HermitianMatrix& rho) const { return grad_(rho); }
  FunctionalKind kind() const { return kind_; }

  /// True when the gradient commutes with rho at every state.
  bool has_spectral_generator() const { return static_cast<bool>(spectral_); }
  SpectralGenerator spectral_generator(const HermitianMatrix& rho) const {
    if (!spectral_)
      throw std::runtime_error("Functional: unsupported generator (gradient does not commute with rho)");
    return spectral_(rho);
  }

  /// The observable matrix when the functional is Tr(A rho), scaled
  /// multiples included.
  const std::optional<HermitianMatrix>& linear_matrix() const { return linear_matrix_; }

 private:
  FunctionalKind kind_;
  ValueFn value_;
  GradFn grad_;
  SpectralFn spectral_;
  std::optional<HermitianMatrix> linear_matrix_;
};

namespace detail {

inline double real_trace(const ComplexMatrix& m) { return m.trace().real(); }

inline double clipped_pow_sum(const Spectrum& sp, double s) {
  double acc = 0.0;
  for (double p : sp.eigenvalues) acc += p < kEigenvalueFloor ? 0.0 : std::pow(p, s);
  return acc;
}

/// Shared chain-rule pieces of the two Renyi-type generators:
///   u = Tr rho^alpha, v = Tr rho, e = 1/(alpha-1),
///   c1 = u^(e-1) v^(1-e)  multiplies rho^(alpha-1) in both gradients.
struct RenyiTerms {
  double u, v, e, c1;
};

inline RenyiTerms renyi_terms(const HermitianMatrix& rho, double alpha) {
  const Spectrum sp = eig_hermitian(rho);
  RenyiTerms t{};
  t.u = clipped_pow_sum(sp, alpha);
  t.v = real_trace(rho.mat());
  t.e = 1.0 / (alpha - 1.0);
  if (!(t.u > 0.0) || !(t.v > 0.0))
    throw std::runtime_error("renyi generator: degenerate state, Tr rho^alpha or Tr rho not positive");
  t.c1 = std::pow(t.u, t.e - 1.0) * std::pow(t.v, 1.0 - t.e);
  return t;
}

inline void require_alpha(double alpha) {
  if (!(alpha > 1.0)) throw std::domain_error("renyi generator: alpha must be > 1");
}

}  // namespace detail

/// H[rho] = Tr(A rho) with constant gradient A.
inline Functional linear_observable(const HermitianMatrix& a) {
  return Functional(
      FunctionalKind::linear,
      [a](const HermitianMatrix& rho) { return detail::real_trace(a.mat() * rho.mat()); },
      [a](const HermitianMatrix&) { return a; },
      [a](const HermitianMatrix&) -> SpectralGenerator {
        throw std::runtime_error("linear_observable: unsupported generator");
      },
      a);
}

/// C_n[rho] = Tr rho^n with gradient n rho^(n-1), rho^0 := identity.
inline Functional casimir(int n) {
  if (n < 1) throw std::domain_error("casimir: n must be >= 1");
  return Functional(
      FunctionalKind::casimir,
      [n](const HermitianMatrix& rho) { return trace_power(rho, n); },
      [n](const HermitianMatrix& rho) -> HermitianMatrix {
        if (n == 1)
          return HermitianMatrix(ComplexMatrix::Identity(rho.dim(), rho.dim()));
        return hermitize(double(n) * matrix_power(rho, n - 1.0).mat());
      },
      [n](const HermitianMatrix&) -> SpectralGenerator {
        return {[n](double p) { return n * std::pow(p, n - 1); },
                [n](double p) { return n <= 1 ? 0.0 : n * (n - 1) * std::pow(p, n - 2); }};
      });
}

/// First Renyi-type generator,
///   S_alpha = (1 - 1/alpha) (Tr rho^alpha)^(1/(alpha-1)) / (Tr rho)^(1/(alpha-1)-1).
/// Gradient c1 rho^(alpha-1) + c2 I, both coefficients from the chain rule
/// on the two traces; the identity term cancels in commutators but is kept
/// for honest finite-difference validation.
inline Functional renyi_a(double alpha) {
  detail::require_alpha(alpha);
  auto value = [alpha](const HermitianMatrix& rho) {
    const auto t = detail::renyi_terms(rho, alpha);
    return (1.0 - 1.0 / alpha) * std::pow(t.u, t.e) * std::pow(t.v, 1.0 - t.e);
  };
  auto grad = [alpha](const HermitianMatrix& rho) -> HermitianMatrix {
    const auto t = detail::renyi_terms(rho, alpha);
    const double c2 =
        (1.0 - 1.0 / alpha) * (1.0 - t.e) * std::pow(t.u, t.e) * std::pow(t.v, -t.e);
    ComplexMatrix g = t.c1 * matrix_power(rho, alpha - 1.0).mat();
    g += c2 * ComplexMatrix::Identity(rho.dim(), rho.dim());
    return hermitize(g);
  };
  auto spectral = [alpha](const HermitianMatrix& rho) -> SpectralGenerator {
    const auto t = detail::renyi_terms(rho, alpha);
    const double c1 = t.c1;
    return {[c1, alpha](double p) {
              return p < kEigenvalueFloor ? 0.0 : c1 * std::pow(p, alpha - 1.0);
            },
            [c1, alpha](double p) {
              return p < kEigenvalueFloor ? 0.0 : c1 * (alpha - 1.0) * std::pow(p, alpha - 2.0);
            }};
  };
  return Functional(FunctionalKind::renyi_a, std::move(value), std::move(grad),
                    std::move(spectral));
}

/// Second Renyi-type generator,
///   S_alpha = (1/2) (Tr rho^alpha)^(1/(alpha-1)) / (Tr rho)^(1/(alpha-1)-1),
/// whose pure-state restriction is (Tr rho)^2 / 2.
inline Functional renyi_b(double alpha) {
  detail::require_alpha(alpha);
  auto value = [alpha](const HermitianMatrix& rho) {
    const auto t = detail::renyi_terms(rho, alpha);
    return 0.5 * std::pow(t.u, t.e) * std::pow(t.v, 1.0 - t.e);
  };
  auto grad = [alpha](const HermitianMatrix& rho) -> HermitianMatrix {
    const auto t = detail::renyi_terms(rho, alpha);
    const double cr = 0.5 * (alpha / (alpha - 1.0)) * t.c1;
    const double c2 = 0.5 * (1.0 - t.e) * std::pow(t.u, t.e) * std::pow(t.v, -t.e);
    ComplexMatrix g = cr * matrix_power(rho, alpha - 1.0).mat();
    g += c2 * ComplexMatrix::Identity(rho.dim(), rho.dim());
    return hermitize(g);
  };
  auto spectral = [alpha](const HermitianMatrix& rho) -> SpectralGenerator {
    const auto t = detail::renyi_terms(rho, alpha);
    const double cr = 0.5 * (alpha / (alpha - 1.0)) * t.c1;
    return {[cr, alpha](double p) {
              return p < kEigenvalueFloor ? 0.0 : cr * std::pow(p, alpha - 1.0);
            },
            [cr, alpha](double p) {
              return p < kEigenvalueFloor ? 0.0 : cr * (alpha - 1.0) * std::pow(p, alpha - 2.0);
            }};
  };
  return Functional(FunctionalKind::renyi_b, std::move(value), std::move(grad),
                    std::move(spectral));
}

/// Differentiable scalar function phi(C_1, ..., C_kmax) of the trace powers,
/// supplied with its partial derivatives.
struct CasimirFunction {
  int k_max = 0;
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> partials;
};

inline Functional casimir_function(CasimirFunction f) {
  if (f.k_max < 1 || !f.value || !f.partials)
    throw std::invalid_argument("casimir_function: need k_max >= 1, value and partials");
  auto shared = std::make_shared<CasimirFunction>(std::move(f));
  auto traces = [shared](const HermitianMatrix& rho) {
    std::vector<double> c(shared->k_max);
    for (int k = 1; k <= shared->k_max; ++k) c[k - 1] = trace_power(rho, k);
    return c;
  };
  auto value = [shared, traces](const HermitianMatrix& rho) {
    return shared->value(traces(rho));
  };
  auto grad = [shared, traces](const HermitianMatrix& rho) -> HermitianMatrix {
    const std::vector<double> w = shared->partials(traces(rho));
    ComplexMatrix g = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (int k = 1; k <= shared->k_max; ++k) {
      if (w[k - 1] == 0.0) continue;
      if (k == 1)
        g += w[0] * ComplexMatrix::Identity(rho.dim(), rho.dim());
      else
        g += w[k - 1] * double(k) * matrix_power(rho, k - 1.0).mat();
    }
    return hermitize(g);
  };
  auto spectral = [shared, traces](const HermitianMatrix& rho) -> SpectralGenerator {
    const std::vector<double> w = shared->partials(traces(rho));
    auto phi = [w](double p) {
      double acc = 0.0;
      for (std::size_t k = 1; k <= w.size(); ++k)
        acc += w[k - 1] * double(k) * (k == 1 ? 1.0 : std::pow(p, double(k - 1)));
      return acc;
    };
    auto dphi = [w](double p) {
      double acc = 0.0;
      for (std::size_t k = 2; k <= w.size(); ++k)
        acc += w[k - 1] * double(k) * double(k - 1) * std::pow(p, double(k - 2));
      return acc;
    };
    return {phi, dphi};
  };
  return Functional(FunctionalKind::casimir_function, std::move(value), std::move(grad),
                    std::move(spectral));
}

/// Named presets used by the JSON descriptors: "c2_half" (the entropy
/// C_2/2 of the linear theory), "c1", "c2sq_plus_c3".
inline Functional casimir_function_preset(const std::string& name) {
  if (name == "c2_half") {
    return casimir_function(
        {2, [](const std::vector<double>& c) { return 0.5 * c[1]; },
         [](const std::vector<double>&) { return std::vector<double>{0.0, 0.5}; }});
  }
  if (name == "c1") {
    return casimir_function({1, [](const std::vector<double>& c) { return c[0]; },
                             [](const std::vector<double>&) {
                               return std::vector<double>{1.0};
                             }});
  }
  if (name == "c2sq_plus_c3") {
    return casimir_function(
        {3,
         [](const std::vector<double>& c) { return c[1] * c[1] + c[2]; },
         [](const std::vector<double>& c) {
           return std::vector<double>{0.0, 2.0 * c[1], 1.0};
         }});
  }
  throw std::invalid_argument("casimir_function_preset: unknown preset '" + name + "'");
}

/// Tr((A rho)^2), the quadratic observable family used by the no-signaling
/// trials; gradient 2 A rho A.
inline Functional quadratic_observable(const HermitianMatrix& a) {
  return Functional(
      FunctionalKind::composite,
      [a](const HermitianMatrix& rho) {
        const ComplexMatrix ar = a.mat() * rho.mat();
        return (ar * ar).trace().real();
      },
      [a](const HermitianMatrix& rho) {
        return hermitize(2.0 * a.mat() * rho.mat() * a.mat());
      });
}

inline Functional scale(const Functional& f, double c) {
  std::optional<HermitianMatrix> lin;
  if (f.linear_matrix()) lin = hermitize(c * f.linear_matrix()->mat());
  Functional::SpectralFn spectral = nullptr;
  if (f.has_spectral_generator()) {
    spectral = [f, c](const HermitianMatrix& rho) -> SpectralGenerator {
      const SpectralGenerator g = f.spectral_generator(rho);
      return {[g, c](double p) { return c * g.phi(p); },
              [g, c](double p) { return c * g.dphi(p); }};
    };
  }
  return Functional(
      f.linear_matrix() ? FunctionalKind::linear : FunctionalKind::composite,
      [f, c](const HermitianMatrix& rho) { return c * f.value(rho); },
      [f, c](const HermitianMatrix& rho) { return hermitize(c * f.gradient(rho).mat()); },
      std::move(spectral), std::move(lin));
}

inline Functional multiply(const Functional& f, const Functional& g) {
  return Functional(
      FunctionalKind::composite,
      [f, g](const HermitianMatrix& rho) { return f.value(rho) * g.value(rho); },
      [f, g](const HermitianMatrix& rho) {
        return hermitize(f.value(rho) * g.gradient(rho).mat() +
                         g.value(rho) * f.gradient(rho).mat());
      });
}

/// Central-difference validation of the gradient: max over 20 seeded
/// Hermitian directions (max-norm one) of
///   |(F(rho + eps D) - F(rho - eps D)) / (2 eps) - Tr(grad D)|.
/// Directions pushing the state out of the PSD cone are halved up to five
/// times, then skipped.
inline double gradient_check(const Functional& f, const DensityMatrix& rho, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3))
    throw std::invalid_argument("gradient_check: eps must lie in [1e-7, 1e-3]");
  constexpr std::uint64_t kDirectionSeedBase = 7001;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ComplexMatrix dir = random_hermitian(rho.dim(), kDirectionSeedBase + i).mat();
    dir /= max_abs(dir);
    bool usable = false;
    for (int attempt = 0; attempt <= 5; ++attempt) {
      if (DensityMatrix::try_make(rho.mat() + eps * dir) &&
          DensityMatrix::try_make(rho.mat() - eps * dir)) {
        usable = true;
        break;
      }
      dir *= 0.5;
    }
    if (!usable) continue;
    const double fp = f.value(hermitize(rho.mat() + eps * dir));
    const double fm = f.value(hermitize(rho.mat() - eps * dir));
    const double directional = (fp - fm) / (2.0 * eps);
    const double predicted = (f.gradient(rho).mat() * dir).trace().real();
    worst = std::max(worst, std::abs(directional - predicted));
  }
  return worst;
}

}  // namespace nambu
