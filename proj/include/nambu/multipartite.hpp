#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nambu/brackets.hpp"
#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"

namespace nambu {

/// Density matrix on a tensor product of subsystems.
struct MultipartiteState {
  std::vector<int> dims;
  DensityMatrix rho;

  MultipartiteState(std::vector<int> dims_, DensityMatrix rho_)
      : dims(std::move(dims_)), rho(std::move(rho_)) {
    int prod = 1;
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("MultipartiteState: bad slot dimension");
      prod *= d;
    }
    if (prod != rho.dim())
      throw std::invalid_argument("MultipartiteState: dims do not factor the matrix dimension");
  }
};

namespace detail {

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// mixed-radix digits of a flat tensor index, slot 0 slowest
inline void decompose(int flat, const std::vector<int>& dims, std::vector<int>& digits) {
  for (int s = static_cast<int>(dims.size()) - 1; s >= 0; --s) {
    digits[s] = flat % dims[s];
    flat /= dims[s];
  }
}

inline int recompose(const std::vector<int>& digits, const std::vector<int>& dims,
                     const std::vector<int>& slots) {
  int flat = 0;
  for (int s : slots) flat = flat * dims[s] + digits[s];
  return flat;
}

}  // namespace detail

inline MultipartiteState tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  return MultipartiteState({a.dim(), b.dim()},
                           DensityMatrix(detail::kron(a.mat(), b.mat())));
}

/// Contraction over every slot not in `keep`; trace preserving.  The kept
/// slots retain their original order.
inline DensityMatrix partial_trace(const MultipartiteState& s, const std::vector<int>& keep) {
  const int n_slots = static_cast<int>(s.dims.size());
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<bool> kept(n_slots, false);
  for (int slot : keep) {
    if (slot < 0 || slot >= n_slots) {
      std::ostringstream os;
      os << "partial_trace: slot " << slot << " out of range [0, " << n_slots << ")";
      throw std::invalid_argument(os.str());
    }
    if (kept[slot]) throw std::invalid_argument("partial_trace: repeated slot");
    kept[slot] = true;
  }
  std::vector<int> keep_sorted, drop;
  for (int slot = 0; slot < n_slots; ++slot) (kept[slot] ? keep_sorted : drop).push_back(slot);

  int dim_keep = 1, dim_drop = 1;
  for (int slot : keep_sorted) dim_keep *= s.dims[slot];
  for (int slot : drop) dim_drop *= s.dims[slot];

  const int full = s.rho.dim();
  ComplexMatrix out = ComplexMatrix::Zero(dim_keep, dim_keep);
  std::vector<int> row(n_slots), col(n_slots);
  for (int i = 0; i < full; ++i) {
    detail::decompose(i, s.dims, row);
    for (int j = 0; j < full; ++j) {
      detail::decompose(j, s.dims, col);
      bool diagonal_on_dropped = true;
      for (int slot : drop)
        if (row[slot] != col[slot]) {
          diagonal_on_dropped = false;
          break;
        }
      if (!diagonal_on_dropped) continue;
      out(detail::recompose(row, s.dims, keep_sorted),
          detail::recompose(col, s.dims, keep_sorted)) += s.rho.mat()(i, j);
    }
  }
  return DensityMatrix(std::move(out));
}

/// identity (x) ... (x) A (x) ... (x) identity with A in the given slot.
inline HermitianMatrix lift_local(const HermitianMatrix& a, int slot,
                                  const std::vector<int>& dims) {
  if (slot < 0 || slot >= static_cast<int>(dims.size()))
    throw std::invalid_argument("lift_local: slot out of range");
  if (a.dim() != dims[slot])
    throw std::invalid_argument("lift_local: operator does not match the slot dimension");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    out = detail::kron(out, k == slot
                                ? a.mat()
                                : ComplexMatrix::Identity(dims[k], dims[k]).eval());
  }
  return HermitianMatrix(std::move(out));
}

/// Functional of the reduced state of one slot, promoted to the full space:
/// value f(rho^slot), gradient the lifted local gradient.
inline Functional local_functional(const Functional& f, int slot, std::vector<int> dims) {
  // evaluation states may sit slightly outside the PSD cone, so the
  // reduction contracts the raw matrix instead of going through
  // partial_trace and the DensityMatrix invariants
  auto reduced = [slot, dims](const HermitianMatrix& rho) -> HermitianMatrix {
    const int n_slots = static_cast<int>(dims.size());
    int dim_keep = dims[slot];
    ComplexMatrix out = ComplexMatrix::Zero(dim_keep, dim_keep);
    std::vector<int> row(n_slots), col(n_slots);
    const int full = rho.dim();
    for (int i = 0; i < full; ++i) {
      detail::decompose(i, dims, row);
      for (int j = 0; j < full; ++j) {
        detail::decompose(j, dims, col);
        bool diag = true;
        for (int k = 0; k < n_slots; ++k)
          if (k != slot && row[k] != col[k]) {
            diag = false;
            break;
          }
        if (diag) out(row[slot], col[slot]) += rho.mat()(i, j);
      }
    }
    return hermitize(out);
  };
  return Functional(
      FunctionalKind::composite,
      [f, reduced](const HermitianMatrix& rho) { return f.value(reduced(rho)); },
      [f, reduced, slot, dims](const HermitianMatrix& rho) {
        return lift_local(f.gradient(reduced(rho)), slot, dims);
      });
}

/// Noninteracting split Hamiltonian H = H^I + H^II as a linear functional
/// on the product space.
inline Functional split_hamiltonian(const HermitianMatrix& hi, const HermitianMatrix& hii,
                                    const std::vector<int>& dims) {
  if (dims.size() != 2) throw std::invalid_argument("split_hamiltonian: two slots expected");
  const ComplexMatrix total =
      lift_local(hi, 0, dims).mat() + lift_local(hii, 1, dims).mat();
  return linear_observable(HermitianMatrix(total));
}

/// Totally antisymmetric N-index tensor with equal slot dimensions.
struct SlotTensor {
  int slot_dim = 0;
  int n_slots = 0;
  ComplexVector data;
};

/// Alternating-sum projection (1/N!) sum_perm sgn(perm) Psi_perm; idempotent,
/// and identically zero when N exceeds the slot dimension.
inline SlotTensor antisymmetrize(const SlotTensor& psi) {
  if (psi.slot_dim < 1 || psi.n_slots < 1)
    throw std::invalid_argument("antisymmetrize: bad tensor shape");
  std::size_t expect = 1;
  for (int i = 0; i < psi.n_slots; ++i) expect *= static_cast<std::size_t>(psi.slot_dim);
  if (static_cast<std::size_t>(psi.data.size()) != expect)
    throw std::invalid_argument("antisymmetrize: ragged data size");

  const int n = psi.n_slots;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SlotTensor out{psi.slot_dim, psi.n_slots, ComplexVector::Zero(psi.data.size())};

  // enumerate permutations with parity tracked via inversion count
  std::vector<int> dims(n, psi.slot_dim), digits(n), permuted(n);
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    const double sign = inversions % 2 == 0 ? 1.0 : -1.0;
    for (Eigen::Index flat = 0; flat < psi.data.size(); ++flat) {
      detail::decompose(static_cast<int>(flat), dims, digits);
      for (int i = 0; i < n; ++i) permuted[i] = digits[perm[i]];
      int src = 0;
      for (int i = 0; i < n; ++i) src = src * psi.slot_dim + permuted[i];
      out.data[flat] += sign * psi.data[src];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  out.data /= fact;
  return out;
}

namespace detail {

inline Functional marginal_probe(int kind, int slot, const std::vector<int>& dims,
                                 std::uint64_t seed) {
  const Functional local = kind == 0
                               ? linear_observable(random_hermitian(dims[slot], seed))
                               : quadratic_observable(random_hermitian(dims[slot], seed));
  return local_functional(local, slot, dims);
}

}  // namespace detail

/// Max over seeded trials of |[F^I, G^II, K]| with F^I, G^II (non)linear
/// functionals of the two marginals and K a global linear or renyi_a(3)
/// functional.  With `overlap` both probes read the same slot, the control
/// case where the bracket does not vanish.
inline double nosignal_bracket_test(std::pair<int, int> dims, int trials, std::uint64_t seed,
                                    bool overlap = false) {
  if (trials < 1) throw std::invalid_argument("nosignal_bracket_test: trials must be >= 1");
  const std::vector<int> dd{dims.first, dims.second};
  const int full = dims.first * dims.second;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t base = seed * 1000003ULL + static_cast<std::uint64_t>(t) * 17ULL;
    const int kind_f = t % 2;
    const int kind_g = (t / 2) % 2;
    const bool renyi_k = (t / 4) % 2 == 0;
    const Functional fi = detail::marginal_probe(kind_f, 0, dd, base + 1);
    const Functional gii = detail::marginal_probe(kind_g, overlap ? 0 : 1, dd, base + 2);
    const Functional k =
        renyi_k ? renyi_a(3.0) : linear_observable(random_hermitian(full, base + 3));
    const DensityMatrix rho = random_density(full, full, base + 4);
    worst = std::max(worst, std::abs(lie_nambu(fi, gii, k, rho)));
  }
  return worst;
}

/// Max over seeded local observables and entangled states of
/// |[F^I, H_total, S] - [F^I, H^I_lifted, S]|: the subsystem generator
/// identity behind the no-signaling theorem.  An optional interaction term
/// is added to H_total as the control case.
inline double subsystem_generator_test(std::pair<int, int> dims, const HermitianMatrix& hi,
                                       const HermitianMatrix& hii, const Functional& s,
                                       std::uint64_t seed,
                                       const std::optional<HermitianMatrix>& interaction =
                                           std::nullopt) {
  const std::vector<int> dd{dims.first, dims.second};
  if (hi.dim() != dims.first || hii.dim() != dims.second)
    throw std::invalid_argument("subsystem_generator_test: Hamiltonian dims mismatch");
  const int full = dims.first * dims.second;

  ComplexMatrix total = lift_local(hi, 0, dd).mat() + lift_local(hii, 1, dd).mat();
  if (interaction) {
    if (interaction->dim() != full)
      throw std::invalid_argument("subsystem_generator_test: interaction dims mismatch");
    total += interaction->mat();
  }
  const Functional h_total = linear_observable(HermitianMatrix(total));
  const Functional h_local = linear_observable(lift_local(hi, 0, dd));

  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    const std::uint64_t base = seed * 2000003ULL + static_cast<std::uint64_t>(t) * 23ULL;
    const Functional fi = detail::marginal_probe(t % 2, 0, dd, base + 1);
    const DensityMatrix rho = random_density(full, full, base + 2);
    worst = std::max(worst,
                     std::abs(lie_nambu(fi, h_total, s, rho) - lie_nambu(fi, h_local, s, rho)));
  }
  return worst;
}

}  // namespace nambu
