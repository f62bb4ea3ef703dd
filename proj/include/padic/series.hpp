#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/grid.hpp"
#include "padic/step_function.hpp"
#include "padic/systems.hpp"

namespace padic {

enum class CoeffMode { haar, price };

inline const char* to_string(CoeffMode m) { return m == CoeffMode::haar ? "haar" : "price"; }

/// Largest |value| a series may reach and still be exactly representable.
inline constexpr double kExactValueGuard = 4503599627370496.0;  // 2^52

/// Finitely supported coefficients a_n (Haar mode) or b_n (Price mode).
class CoeffMap {
 public:
  CoeffMap(GridConfig cfg, CoeffMode mode) : cfg_(std::move(cfg)), mode_(mode) {}

  const GridConfig& grid() const { return cfg_; }
  CoeffMode mode() const { return mode_; }
  const std::map<MultiIndex, Complex>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  void set(const MultiIndex& n, Complex value) {
    detail::check_multi_index(cfg_, n);
    for (int j = 0; j < cfg_.dims(); ++j) {
      const auto nj = n[static_cast<std::size_t>(j)];
      if (nj < 0 || nj >= cfg_.seq(j).modulus(cfg_.depth())) {
        throw std::out_of_range("coefficient index " + std::to_string(nj) + " beyond depth in dimension " + std::to_string(j));
      }
    }
    entries_[n] = value;
  }

  Complex get(const MultiIndex& n) const {
    auto it = entries_.find(n);
    return it == entries_.end() ? Complex{} : it->second;
  }

  /// Least N with every stored index below N~ (n_j < m^j_N for all j).
  int stabilization_rank() const {
    int r = 0;
    for (const auto& [n, v] : entries_) {
      for (int j = 0; j < cfg_.dims(); ++j) r = std::max(r, index_block(cfg_.seq(j), n[static_cast<std::size_t>(j)]));
    }
    return r;
  }

  /// Upper bound on sup |sum_n a_n basis_n|.
  double value_bound() const {
    double b = 0.0;
    for (const auto& [n, v] : entries_) {
      const double sup = mode_ == CoeffMode::haar ? std::sqrt(static_cast<double>(haar_norm_sq(cfg_, n))) : 1.0;
      b += std::abs(v) * sup;
    }
    return b;
  }

 private:
  GridConfig cfg_;
  CoeffMode mode_;
  std::map<MultiIndex, Complex> entries_;
};

/// Basis function of the map's mode on Lambda_rank.
inline StepFunction<UnitValue> basis_step(const CoeffMap& c, const MultiIndex& n, int rank) {
  return c.mode() == CoeffMode::haar ? tensor_haar_step(c.grid(), n, rank) : tensor_price_step(c.grid(), n, rank);
}

/// S_N = sum over n < N~ of a_n times the basis function, on Lambda_N.
inline StepFunction<Complex> partial_sum(const CoeffMap& coeffs, int N) {
  const auto& cfg = coeffs.grid();
  if (N < 0 || N > cfg.depth()) throw std::out_of_range("partial sum rank " + std::to_string(N) + " beyond depth");
  if (coeffs.value_bound() > kExactValueGuard) throw std::range_error("series values exceed the 2^52 exactness guard");
  auto out = StepFunction<Complex>::filled(cfg, N, Complex{});
  for (const auto& [n, a] : coeffs.entries()) {
    bool inside = true;
    for (int j = 0; j < cfg.dims(); ++j) inside = inside && index_block(cfg.seq(j), n[static_cast<std::size_t>(j)]) <= N;
    if (!inside || a == Complex{}) continue;
    std::vector<std::vector<UnitValue>> tables;
    std::vector<std::pair<std::int64_t, std::int64_t>> support;
    for (int j = 0; j < cfg.dims(); ++j) {
      const auto nj = n[static_cast<std::size_t>(j)];
      const auto& seq = cfg.seq(j);
      if (coeffs.mode() == CoeffMode::haar) {
        tables.push_back(haar_table(seq, nj, N));
        if (nj == 0) {
          support.emplace_back(0, seq.modulus(N));
        } else {
          const auto h = haar_decode(seq, nj);
          support.push_back(descendant_range(seq, h.k, h.r, N));
        }
      } else {
        tables.push_back(price_table(seq, nj, N));
        support.emplace_back(0, seq.modulus(N));
      }
    }
    const int d = cfg.dims();
    std::vector<std::int64_t> extent(static_cast<std::size_t>(d));
    std::int64_t count = 1;
    for (int j = 0; j < d; ++j) {
      extent[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j)].second - support[static_cast<std::size_t>(j)].first;
      count *= extent[static_cast<std::size_t>(j)];
    }
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
      auto rem = static_cast<std::int64_t>(i);
      std::int64_t lin = 0, stride = 1;
      UnitValue u = UnitValue::one();
      for (int j = d - 1; j >= 0; --j) {
        const auto sj = static_cast<std::size_t>(j);
        const auto c = support[sj].first + rem % extent[sj];
        rem /= extent[sj];
        u = u * tables[sj][static_cast<std::size_t>(c)];
        lin += c * stride;
        stride *= cfg.seq(j).modulus(N);
      }
      out[static_cast<std::size_t>(lin)] += a * u.to_complex();
    });
  }
  return out;
}

/// Additive function on P-adic boxes given by its density on Lambda_R.
/// Psi(I) is the integral of the density over I; for a series-backed Psi the
/// density is S_R, past which every partial sum integral is stable.
template <class T>
class AdditiveFn {
 public:
  explicit AdditiveFn(StepFunction<T> density) : density_(std::move(density)) {}

  /// From Psi's values on every cell of Lambda_R.
  static AdditiveFn from_table(const StepFunction<T>& cell_values) {
    const auto cells = static_cast<std::int64_t>(cell_values.size());
    return AdditiveFn(cell_values.map([cells](const T& v) { return ValueTraits<T>::scale(v, Frac(cells)); }));
  }

  const StepFunction<T>& density() const { return density_; }
  const GridConfig& grid() const { return density_.grid(); }
  int stabilization_rank() const { return density_.rank(); }

 private:
  StepFunction<T> density_;
};

inline AdditiveFn<Complex> additive_fn(const CoeffMap& coeffs) {
  return AdditiveFn<Complex>(partial_sum(coeffs, coeffs.stabilization_rank()));
}

/// Psi on a box.  Mixed-rank boxes are split into uniform cells first and
/// the cell values summed.
template <class T>
T psi_eval(const AdditiveFn<T>& psi, const Cell& box) {
  validate_cell(psi.grid(), box);
  if (box.uniform()) return integral(psi.density(), box);
  T total = ValueTraits<T>::zero();
  for (const auto& c : decompose_box(psi.grid(), box)) total += integral(psi.density(), c);
  return total;
}

/// Psi'(x): limit of Psi(I_k)/mu(I_k), reached exactly at the stabilization rank.
template <class T>
StepFunction<T> derivative(const AdditiveFn<T>& psi) {
  return psi.density();
}

/// Averages of f over the cells of the coarser partition Lambda_to.
template <class T>
StepFunction<T> cell_averages(const StepFunction<T>& f, int to) {
  const auto& cfg = f.grid();
  if (to > f.rank()) throw std::invalid_argument("averaging rank above function rank");
  StepFunction<T> cur = f;
  for (int r = f.rank() - 1; r >= to; --r) {
    auto next = StepFunction<T>::filled(cfg, r, ValueTraits<T>::zero());
    std::vector<int> p(static_cast<std::size_t>(cfg.dims()));
    std::int64_t children = 1;
    for (int j = 0; j < cfg.dims(); ++j) {
      p[static_cast<std::size_t>(j)] = cfg.seq(j).base(r + 1);
      children *= p[static_cast<std::size_t>(j)];
    }
    parallel_for(next.size(), [&](std::size_t i) {
      const Cell parent = cell_at(cfg, r, static_cast<std::int64_t>(i));
      std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
      for (int j = 0; j < cfg.dims(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        ranges.emplace_back(parent.index[sj] * p[sj], (parent.index[sj] + 1) * p[sj]);
      }
      std::vector<std::int64_t> idx(static_cast<std::size_t>(cfg.dims()));
      for (int j = 0; j < cfg.dims(); ++j) idx[static_cast<std::size_t>(j)] = ranges[static_cast<std::size_t>(j)].first;
      T acc = ValueTraits<T>::zero();
      while (true) {
        acc += cur[static_cast<std::size_t>(linear_index(cfg, r + 1, idx))];
        int j = cfg.dims() - 1;
        for (; j >= 0; --j) {
          const auto sj = static_cast<std::size_t>(j);
          if (++idx[sj] < ranges[sj].second) break;
          idx[sj] = ranges[sj].first;
        }
        if (j < 0) break;
      }
      next[i] = ValueTraits<T>::scale(acc, Frac(BigInt(1), BigInt(children)));
    });
    cur = std::move(next);
  }
  return cur;
}

/// Psi*(x) = sup |Psi(I)|/mu(I) over uniform-rank cells I containing x.
/// Cells finer than the stabilization rank repeat the rank-R ratio, so the
/// chain 0..R is the whole supremum.
template <class T>
StepFunction<MagnitudeOf<T>> majorant(const AdditiveFn<T>& psi) {
  using M = MagnitudeOf<T>;
  const int R = psi.stabilization_rank();
  std::vector<StepFunction<T>> avg(static_cast<std::size_t>(R + 1));
  avg[static_cast<std::size_t>(R)] = psi.density();
  for (int r = R - 1; r >= 0; --r) avg[static_cast<std::size_t>(r)] = cell_averages(avg[static_cast<std::size_t>(r + 1)], r);
  auto best = avg[0].map([](const T& v) { return ValueTraits<T>::magnitude(v); });
  for (int r = 1; r <= R; ++r) {
    auto up = best.refined(r);
    const auto& a = avg[static_cast<std::size_t>(r)];
    parallel_for(up.size(), [&](std::size_t i) {
      M m = ValueTraits<T>::magnitude(a[i]);
      if (m > up[i]) up[i] = m;
    });
    best = std::move(up);
  }
  return best;
}

namespace detail {

inline std::vector<std::int64_t> block_members(const BranchSeq& seq, int block) {
  if (block == 0) return {0};
  std::vector<std::int64_t> out;
  for (auto n = seq.modulus(block - 1); n < seq.modulus(block); ++n) out.push_back(n);
  return out;
}

// to_price: b_k = sum_l a_l conj(gamma[k][l]); otherwise a_l = sum_k b_k gamma[k][l].
inline CoeffMap transform_blocks(const CoeffMap& in, bool to_price) {
  const auto& cfg = in.grid();
  const int d = cfg.dims();
  CoeffMap out(cfg, to_price ? CoeffMode::price : CoeffMode::haar);
  std::map<std::pair<int, int>, GammaMatrix> gammas;
  auto gamma = [&](int j, int block) -> const GammaMatrix& {
    auto key = std::make_pair(j, block);
    auto it = gammas.find(key);
    if (it == gammas.end()) it = gammas.emplace(key, gamma_matrix(cfg.seq(j), block)).first;
    return it->second;
  };
  auto factor = [&](int j, int block, std::int64_t src, std::int64_t dst) -> Complex {
    if (block == 0) return {1.0, 0.0};
    const auto& g = gamma(j, block);
    return to_price ? std::conj(g.at(dst, src)) : g.at(src, dst);
  };
  std::map<std::vector<int>, std::vector<std::pair<MultiIndex, Complex>>> by_block;
  for (const auto& [n, v] : in.entries()) {
    std::vector<int> blocks;
    for (int j = 0; j < d; ++j) blocks.push_back(index_block(cfg.seq(j), n[static_cast<std::size_t>(j)]));
    by_block[blocks].emplace_back(n, v);
  }
  for (const auto& [blocks, members] : by_block) {
    std::vector<std::vector<std::int64_t>> axes;
    for (int j = 0; j < d; ++j) axes.push_back(block_members(cfg.seq(j), blocks[static_cast<std::size_t>(j)]));
    std::vector<std::size_t> pos(static_cast<std::size_t>(d), 0);
    while (true) {
      MultiIndex target(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) target[static_cast<std::size_t>(j)] = axes[static_cast<std::size_t>(j)][pos[static_cast<std::size_t>(j)]];
      Complex acc{};
      for (const auto& [src, v] : members) {
        Complex w = v;
        for (int j = 0; j < d; ++j) {
          const auto sj = static_cast<std::size_t>(j);
          w *= factor(j, blocks[sj], src[sj], target[sj]);
        }
        acc += w;
      }
      out.set(target, acc);
      int j = d - 1;
      for (; j >= 0; --j) {
        const auto sj = static_cast<std::size_t>(j);
        if (++pos[sj] < axes[sj].size()) break;
        pos[sj] = 0;
      }
      if (j < 0) break;
    }
  }
  return out;
}

}  // namespace detail

/// Haar coefficients a to Price coefficients b with sum a chi = sum b psi.
/// Every block touched by the input is emitted in full.
inline CoeffMap price_coeffs_from_haar(const CoeffMap& a) {
  if (a.mode() != CoeffMode::haar) throw std::invalid_argument("expected Haar-mode coefficients");
  return detail::transform_blocks(a, true);
}

inline CoeffMap haar_coeffs_from_price(const CoeffMap& b) {
  if (b.mode() != CoeffMode::price) throw std::invalid_argument("expected Price-mode coefficients");
  return detail::transform_blocks(b, false);
}

inline CoeffMap convert_coeffs(const CoeffMap& c, CoeffMode target) {
  if (c.mode() == target) return c;
  return target == CoeffMode::price ? price_coeffs_from_haar(c) : haar_coeffs_from_price(c);
}

}  // namespace padic
