#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/grid.hpp"
#include "padic/parallel.hpp"
#include "padic/step_function.hpp"
#include "padic/unit_value.hpp"

namespace padic {

/// Multi-index (n_1, ..., n_d) of a tensor-product basis function.
using MultiIndex = std::vector<std::int64_t>;

/// Decoded generalized Haar index: n = m_k + r (p_{k+1} - 1) + s - 1.
struct HaarIndex {
  int k = 0;
  std::int64_t r = 0;
  int s = 0;
  friend bool operator==(const HaarIndex&, const HaarIndex&) = default;
};

inline HaarIndex haar_decode(const BranchSeq& seq, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("Haar index " + std::to_string(n) + " has no (k, r, s) form");
  if (n >= seq.modulus(seq.depth())) throw std::out_of_range("Haar index " + std::to_string(n) + " beyond depth cap");
  int k = 0;
  while (seq.modulus(k + 1) <= n) ++k;
  const auto offset = n - seq.modulus(k);
  const int q = seq.base(k + 1) - 1;
  return HaarIndex{k, offset / q, static_cast<int>(offset % q) + 1};
}

inline std::int64_t haar_encode(const BranchSeq& seq, const HaarIndex& h) {
  if (h.k < 0 || h.k >= seq.depth()) throw std::out_of_range("Haar rank beyond depth cap");
  const int p = seq.base(h.k + 1);
  if (h.r < 0 || h.r >= seq.modulus(h.k) || h.s < 1 || h.s > p - 1) throw std::out_of_range("Haar (r, s) out of range");
  return seq.modulus(h.k) + h.r * (p - 1) + h.s - 1;
}

/// Rank of the partition on which chi_n is constant (0 for the constant).
inline int haar_rank(const BranchSeq& seq, std::int64_t n) { return n == 0 ? 0 : haar_decode(seq, n).k + 1; }

/// Number of digit blocks of a Price index: the least b with k < m_b.
inline int price_rank(const BranchSeq& seq, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("negative Price index");
  int b = 0;
  while (seq.modulus(b) <= k) {
    if (b == seq.depth()) throw std::out_of_range("Price index " + std::to_string(k) + " beyond depth cap");
    ++b;
  }
  return b;
}

/// Digits alpha_1..alpha_b of k = sum_j alpha_j m_{j-1}.
inline std::vector<int> price_digits(const BranchSeq& seq, std::int64_t k) {
  const int b = price_rank(seq, k);
  std::vector<int> out(static_cast<std::size_t>(b));
  for (int j = 1; j <= b; ++j) {
    out[static_cast<std::size_t>(j - 1)] = static_cast<int>(k % seq.base(j));
    k /= seq.base(j);
  }
  return out;
}

/// Generalized Haar function chi_n at a point given by its digits.
inline UnitValue gen_haar_eval(const BranchSeq& seq, std::int64_t n, std::span<const int> digits) {
  if (n == 0) return UnitValue::one();
  const auto h = haar_decode(seq, n);
  if (static_cast<int>(digits.size()) < h.k + 1) throw std::out_of_range("point depth below Haar rank");
  if (interval_of_digits(seq, digits, h.k) != h.r) return UnitValue::zero();
  const int x = digits[static_cast<std::size_t>(h.k)];
  return UnitValue(static_cast<std::uint64_t>(seq.modulus(h.k)), Phase(static_cast<std::int64_t>(x) * h.s, seq.base(h.k + 1)));
}

// Two-index dyadic numbering: chi_k^{(i)}, 1 <= i <= 2^k, is generalized
// Haar index 2^k + i - 1 on the dyadic grid (classical flat index 2^k + i).
inline std::int64_t classical_to_haar_index(int k, std::int64_t i) {
  if (k < 0 || k > 61 || i < 1 || i > (std::int64_t{1} << k)) throw std::out_of_range("classical Haar position out of range");
  return (std::int64_t{1} << k) + i - 1;
}

inline std::pair<int, std::int64_t> haar_index_to_classical(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("constant function has no two-index form");
  int k = 0;
  while ((std::int64_t{2} << k) <= n) ++k;
  return {k, n - (std::int64_t{1} << k) + 1};
}

/// Classical Haar chi_k^{(i)}: +2^{k/2} on the left half of its support,
/// -2^{k/2} on the right half.  Digits are binary.
inline UnitValue classical_haar_eval(int k, std::int64_t i, std::span<const int> digits) {
  if (k < 0 || k > 61 || i < 1 || i > (std::int64_t{1} << k)) throw std::out_of_range("classical Haar position out of range");
  if (static_cast<int>(digits.size()) < k + 1) throw std::out_of_range("point depth below Haar rank");
  std::int64_t cell = 0;
  for (int t = 0; t < k; ++t) cell = cell * 2 + digits[static_cast<std::size_t>(t)];
  if (cell != i - 1) return UnitValue::zero();
  const int half = digits[static_cast<std::size_t>(k)];
  return UnitValue(std::uint64_t{1} << k, Phase(half, 2));
}

/// Price character psi_k(x) = exp(2 pi i sum_j alpha_j x_j / p_j).
inline UnitValue price_eval(const BranchSeq& seq, std::int64_t k, std::span<const int> digits) {
  const auto alpha = price_digits(seq, k);
  if (digits.size() < alpha.size()) throw std::out_of_range("point depth below Price rank");
  Phase ph;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    ph = ph + Phase(static_cast<std::int64_t>(alpha[j]) * digits[j], seq.base(static_cast<int>(j) + 1));
  }
  return UnitValue(1, ph);
}

/// Values of chi_n on every rank-`rank` interval.
inline std::vector<UnitValue> haar_table(const BranchSeq& seq, std::int64_t n, int rank) {
  if (rank < haar_rank(seq, n)) throw std::out_of_range("table rank below Haar rank");
  const auto m = seq.modulus(rank);
  if (n == 0) return std::vector<UnitValue>(static_cast<std::size_t>(m), UnitValue::one());
  std::vector<UnitValue> out(static_cast<std::size_t>(m));
  const auto h = haar_decode(seq, n);
  const int p = seq.base(h.k + 1);
  const auto radicand = static_cast<std::uint64_t>(seq.modulus(h.k));
  const auto [lo, hi] = descendant_range(seq, h.k, h.r, rank);
  for (auto c = lo; c < hi; ++c) {
    const auto digit = ancestor_index(seq, rank, c, h.k + 1) % p;
    out[static_cast<std::size_t>(c)] = UnitValue(radicand, Phase(digit * h.s, p));
  }
  return out;
}

inline std::vector<UnitValue> price_table(const BranchSeq& seq, std::int64_t k, int rank) {
  if (rank < price_rank(seq, k)) throw std::out_of_range("table rank below Price rank");
  const auto m = seq.modulus(rank);
  std::vector<UnitValue> out(static_cast<std::size_t>(m));
  for (std::int64_t c = 0; c < m; ++c) out[static_cast<std::size_t>(c)] = price_eval(seq, k, digits_of_interval(seq, c, rank));
  return out;
}

namespace detail {

inline void check_multi_index(const GridConfig& cfg, const MultiIndex& n) {
  if (static_cast<int>(n.size()) != cfg.dims()) throw std::invalid_argument("multi-index dimension does not match grid");
}

inline StepFunction<UnitValue> tensor_from_tables(const GridConfig& cfg, int rank, const std::vector<std::vector<UnitValue>>& tables) {
  auto out = StepFunction<UnitValue>::filled(cfg, rank, UnitValue::zero());
  parallel_for(out.size(), [&](std::size_t i) {
    auto lin = static_cast<std::int64_t>(i);
    UnitValue v = UnitValue::one();
    for (int j = cfg.dims() - 1; j >= 0; --j) {
      const auto m = cfg.seq(j).modulus(rank);
      v = v * tables[static_cast<std::size_t>(j)][static_cast<std::size_t>(lin % m)];
      lin /= m;
    }
    out[i] = v;
  });
  return out;
}

}  // namespace detail

inline int tensor_haar_rank(const GridConfig& cfg, const MultiIndex& n) {
  detail::check_multi_index(cfg, n);
  int r = 0;
  for (int j = 0; j < cfg.dims(); ++j) r = std::max(r, haar_rank(cfg.seq(j), n[static_cast<std::size_t>(j)]));
  return r;
}

inline int tensor_price_rank(const GridConfig& cfg, const MultiIndex& n) {
  detail::check_multi_index(cfg, n);
  int r = 0;
  for (int j = 0; j < cfg.dims(); ++j) r = std::max(r, price_rank(cfg.seq(j), n[static_cast<std::size_t>(j)]));
  return r;
}

/// chi_{n_1}(x_1) ... chi_{n_d}(x_d) on Lambda_rank (default: its own rank).
inline StepFunction<UnitValue> tensor_haar_step(const GridConfig& cfg, const MultiIndex& n, int rank = -1) {
  if (rank < 0) rank = tensor_haar_rank(cfg, n);
  detail::check_multi_index(cfg, n);
  std::vector<std::vector<UnitValue>> tables;
  for (int j = 0; j < cfg.dims(); ++j) tables.push_back(haar_table(cfg.seq(j), n[static_cast<std::size_t>(j)], rank));
  return detail::tensor_from_tables(cfg, rank, tables);
}

inline StepFunction<UnitValue> tensor_price_step(const GridConfig& cfg, const MultiIndex& n, int rank = -1) {
  if (rank < 0) rank = tensor_price_rank(cfg, n);
  detail::check_multi_index(cfg, n);
  std::vector<std::vector<UnitValue>> tables;
  for (int j = 0; j < cfg.dims(); ++j) tables.push_back(price_table(cfg.seq(j), n[static_cast<std::size_t>(j)], rank));
  return detail::tensor_from_tables(cfg, rank, tables);
}

/// ||chi_n||_inf^2 = prod_j m^j_{k_j}, exactly.
inline std::uint64_t haar_norm_sq(const GridConfig& cfg, const MultiIndex& n) {
  detail::check_multi_index(cfg, n);
  std::uint64_t r = 1;
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto nj = n[static_cast<std::size_t>(j)];
    if (nj == 0) continue;
    const auto mk = static_cast<std::uint64_t>(cfg.seq(j).modulus(haar_decode(cfg.seq(j), nj).k));
    if (__builtin_mul_overflow(r, mk, &r)) throw std::overflow_error("Haar norm overflow");
  }
  return r;
}

inline StepFunction<Complex> to_complex(const StepFunction<UnitValue>& f) {
  return f.map([](const UnitValue& u) { return u.to_complex(); });
}

/// <f, g> = sum over the common refinement of f conj(g) mu.  Deterministic.
inline Complex inner_product(const StepFunction<Complex>& f, const StepFunction<Complex>& g) {
  require_same_grid(f.grid(), g.grid());
  const int r = std::max(f.rank(), g.rank());
  const auto fr = f.refined(r);
  const auto gr = g.refined(r);
  const Complex s = deterministic_sum<Complex>(fr.size(), [&](std::size_t i) { return fr[i] * std::conj(gr[i]); });
  return s / static_cast<double>(fr.size());
}

/// Change of basis inside one rank block: psi_k = sum_l gamma[k][l] chi_l,
/// with k and l running over [m_{n-1}, m_n).  gamma[k][l] = <psi_k, chi_l>.
class GammaMatrix {
 public:
  GammaMatrix(int block_rank, std::int64_t first, std::int64_t size, std::vector<Complex> entries)
      : block_rank_(block_rank), first_(first), size_(size), entries_(std::move(entries)) {}

  int block_rank() const { return block_rank_; }
  std::int64_t first() const { return first_; }
  std::int64_t size() const { return size_; }

  /// Entry for Price index k (row) and Haar index l (column), both global.
  const Complex& at(std::int64_t k, std::int64_t l) const {
    return entries_[static_cast<std::size_t>((k - first_) * size_ + (l - first_))];
  }

  const std::vector<Complex>& entries() const { return entries_; }

 private:
  int block_rank_;
  std::int64_t first_;
  std::int64_t size_;
  std::vector<Complex> entries_;
};

inline GammaMatrix gamma_matrix(const BranchSeq& seq, int block_rank) {
  if (block_rank < 1 || block_rank > seq.depth()) throw std::out_of_range("gamma block rank outside 1..depth");
  const auto first = seq.modulus(block_rank - 1);
  const auto size = seq.modulus(block_rank) - first;
  const auto cells = static_cast<double>(seq.modulus(block_rank));
  std::vector<std::vector<UnitValue>> psi, chi;
  for (std::int64_t t = 0; t < size; ++t) {
    psi.push_back(price_table(seq, first + t, block_rank));
    chi.push_back(haar_table(seq, first + t, block_rank));
  }
  std::vector<Complex> entries(static_cast<std::size_t>(size * size));
  parallel_for(entries.size(), [&](std::size_t e) {
    const auto& a = psi[e / static_cast<std::size_t>(size)];
    const auto& b = chi[e % static_cast<std::size_t>(size)];
    Complex s{0.0, 0.0};
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (!b[c].is_zero()) s += (a[c] * b[c].conj()).to_complex();
    }
    entries[e] = s / cells;
  });
  return GammaMatrix(block_rank, first, size, std::move(entries));
}

/// Block of a 1-D index: 0 for the constant, b for [m_{b-1}, m_b).
inline int index_block(const BranchSeq& seq, std::int64_t n) { return n == 0 ? 0 : price_rank(seq, n); }

}  // namespace padic
