#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "padic/grid.hpp"
#include "padic/parallel.hpp"
#include "padic/rational.hpp"

namespace padic {

/// Dense step functions are capped at 2^22 cells.
inline constexpr std::int64_t kMaxCells = std::int64_t{1} << 22;

/// Relative band used when a double-valued quantity is compared against an
/// exact threshold.  Values inside the band count as ties.
inline constexpr double kRelativeGuard = 1e-12;

template <class T>
struct ValueTraits;

template <>
struct ValueTraits<Complex> {
  using Magnitude = double;
  static Complex zero() { return {0.0, 0.0}; }
  static double magnitude(const Complex& v) { return std::abs(v); }
  static Complex conj(const Complex& v) { return std::conj(v); }
  static Complex scale(const Complex& v, const Frac& w) { return v * to_double(w); }
  static Complex from_frac(const Frac& f) { return {to_double(f), 0.0}; }
};

template <>
struct ValueTraits<double> {
  using Magnitude = double;
  static double zero() { return 0.0; }
  static double magnitude(double v) { return std::abs(v); }
  static double conj(double v) { return v; }
  static double scale(double v, const Frac& w) { return v * to_double(w); }
  static double from_frac(const Frac& f) { return to_double(f); }
};

template <>
struct ValueTraits<std::int64_t> {
  using Magnitude = std::int64_t;
  static std::int64_t zero() { return 0; }
  static std::int64_t magnitude(std::int64_t v) { return v < 0 ? -v : v; }
};

template <>
struct ValueTraits<Frac> {
  using Magnitude = Frac;
  static Frac zero() { return Frac(0); }
  static Frac magnitude(const Frac& v) { return frac_abs(v); }
  static Frac conj(const Frac& v) { return v; }
  static Frac scale(const Frac& v, const Frac& w) { return v * w; }
  static Frac from_frac(const Frac& f) { return f; }
};

template <class T>
using MagnitudeOf = typename ValueTraits<T>::Magnitude;

// Threshold comparisons.  Exact for Frac; guarded for doubles, with ties
// resolved in favour of "within".
inline bool mag_leq(double g, const Frac& h) { return g <= to_double(h) * (1.0 + kRelativeGuard); }
inline bool mag_leq(const Frac& g, const Frac& h) { return g <= h; }
inline bool mag_gt(double g, const Frac& h) { return !mag_leq(g, h); }
inline bool mag_gt(const Frac& g, const Frac& h) { return g > h; }
inline bool mag_geq(double g, const Frac& h) { return g >= to_double(h) * (1.0 - kRelativeGuard); }
inline bool mag_geq(const Frac& g, const Frac& h) { return g >= h; }
inline bool mag_tie(double g, const Frac& h) {
  const double hd = to_double(h);
  return std::abs(g - hd) <= kRelativeGuard * std::abs(hd);
}
inline bool mag_tie(const Frac& g, const Frac& h) { return g == h; }

inline double magnitude_to_double(double g) { return g; }
inline double magnitude_to_double(const Frac& g) { return to_double(g); }

/// Function on [0,1)^d constant on every cell of Lambda_rank, stored densely
/// in row-major cell order.
template <class T>
class StepFunction {
 public:
  using value_type = T;

  StepFunction() = default;

  StepFunction(GridConfig cfg, int rank, std::vector<T> values)
      : cfg_(std::move(cfg)), rank_(rank), values_(std::move(values)) {
    if (rank_ < 0 || rank_ > cfg_.depth()) throw std::out_of_range("step function rank " + std::to_string(rank_) + " exceeds grid depth");
    const auto n = checked_cells(cfg_, rank_);
    if (static_cast<std::int64_t>(values_.size()) != n) throw std::invalid_argument("step function value count does not match its partition");
  }

  static StepFunction filled(GridConfig cfg, int rank, const T& v) {
    const auto n = checked_cells(cfg, rank);
    return StepFunction(std::move(cfg), rank, std::vector<T>(static_cast<std::size_t>(n), v));
  }

  static StepFunction constant(GridConfig cfg, const T& v) { return filled(std::move(cfg), 0, v); }

  static std::int64_t checked_cells(const GridConfig& cfg, int rank) {
    const auto n = cell_count(cfg, rank);
    if (n > kMaxCells) throw std::length_error("rank " + std::to_string(rank) + " needs " + std::to_string(n) + " cells, above the 2^22 cell budget");
    return n;
  }

  const GridConfig& grid() const { return cfg_; }
  int rank() const { return rank_; }
  std::size_t size() const { return values_.size(); }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator[](std::size_t i) { return values_[i]; }

  Cell cell(std::size_t i) const { return cell_at(cfg_, rank_, static_cast<std::int64_t>(i)); }

  Partition partition() const {
    Partition out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out.push_back(cell(i));
    return out;
  }

  const T& at(const PointCode& pt) const {
    const Cell c = cell_of_point(cfg_, pt, rank_);
    return values_[static_cast<std::size_t>(linear_index(cfg_, rank_, c.index))];
  }

  /// Same function on the finer partition Lambda_to.
  StepFunction refined(int to) const {
    if (to == rank_) return *this;
    if (to < rank_) throw std::invalid_argument("cannot refine to a coarser rank");
    const auto n = checked_cells(cfg_, to);
    std::vector<std::vector<std::int64_t>> parent(static_cast<std::size_t>(cfg_.dims()));
    for (int j = 0; j < cfg_.dims(); ++j) {
      const auto m = cfg_.seq(j).modulus(to);
      auto& tab = parent[static_cast<std::size_t>(j)];
      tab.resize(static_cast<std::size_t>(m));
      for (std::int64_t c = 0; c < m; ++c) tab[static_cast<std::size_t>(c)] = ancestor_index(cfg_.seq(j), to, c, rank_);
    }
    std::vector<T> out(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      auto lin = static_cast<std::int64_t>(i);
      std::int64_t src = 0, stride = 1;
      for (int j = cfg_.dims() - 1; j >= 0; --j) {
        const auto m = cfg_.seq(j).modulus(to);
        src += parent[static_cast<std::size_t>(j)][static_cast<std::size_t>(lin % m)] * stride;
        stride *= cfg_.seq(j).modulus(rank_);
        lin /= m;
      }
      out[i] = values_[static_cast<std::size_t>(src)];
    });
    return StepFunction(cfg_, to, std::move(out));
  }

  template <class F>
  auto map(F&& f) const -> StepFunction<std::decay_t<std::invoke_result_t<F, const T&>>> {
    using U = std::decay_t<std::invoke_result_t<F, const T&>>;
    std::vector<U> out(values_.size());
    parallel_for(values_.size(), [&](std::size_t i) { out[i] = f(values_[i]); });
    return StepFunction<U>(cfg_, rank_, std::move(out));
  }

 private:
  GridConfig cfg_;
  int rank_ = 0;
  std::vector<T> values_;
};

/// Applies op(a_i, b_i) on the common refinement of f and g.
template <class A, class B, class Op>
auto zip_with(const StepFunction<A>& f, const StepFunction<B>& g, Op&& op)
    -> StepFunction<std::decay_t<std::invoke_result_t<Op, const A&, const B&>>> {
  require_same_grid(f.grid(), g.grid());
  using U = std::decay_t<std::invoke_result_t<Op, const A&, const B&>>;
  const int r = std::max(f.rank(), g.rank());
  const auto fr = f.refined(r);
  const auto gr = g.refined(r);
  std::vector<U> out(fr.size());
  parallel_for(fr.size(), [&](std::size_t i) { out[i] = op(fr[i], gr[i]); });
  return StepFunction<U>(f.grid(), r, std::move(out));
}

namespace detail {

// Cell ranges of f's partition meeting `box`, and the exact per-cell measure
// of each intersection (one factor per dimension).
struct BoxOverlap {
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  Frac cell_measure = 1;
};

inline BoxOverlap overlap(const GridConfig& cfg, int rank, const Cell& box) {
  validate_cell(cfg, box);
  BoxOverlap o;
  BigInt den = 1;
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const int k = box.rank[sj];
    if (k <= rank) {
      o.ranges.push_back(descendant_range(cfg.seq(j), k, box.index[sj], rank));
      den *= cfg.seq(j).modulus(rank);
    } else {
      const auto a = ancestor_index(cfg.seq(j), k, box.index[sj], rank);
      o.ranges.emplace_back(a, a + 1);
      den *= cfg.seq(j).modulus(k);
    }
  }
  o.cell_measure = Frac(BigInt(1), den);
  return o;
}

// Sum of term(linear cell index) over the product of index ranges.
template <class T, class Term>
T sum_over_ranges(const GridConfig& cfg, int rank, const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges, Term&& term) {
  const int d = cfg.dims();
  std::vector<std::int64_t> extent(static_cast<std::size_t>(d));
  std::int64_t count = 1;
  for (int j = 0; j < d; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    extent[sj] = ranges[sj].second - ranges[sj].first;
    count *= extent[sj];
  }
  return deterministic_sum<T>(static_cast<std::size_t>(count), [&](std::size_t i) {
    auto rem = static_cast<std::int64_t>(i);
    std::int64_t lin = 0, stride = 1;
    for (int j = d - 1; j >= 0; --j) {
      const auto sj = static_cast<std::size_t>(j);
      lin += (ranges[sj].first + rem % extent[sj]) * stride;
      rem /= extent[sj];
      stride *= cfg.seq(j).modulus(rank);
    }
    return term(static_cast<std::size_t>(lin));
  }, ValueTraits<T>::zero());
}

}  // namespace detail

/// Exact-cell integral of f over a (possibly mixed-rank) box.
template <class T>
T integral(const StepFunction<T>& f, const Cell& box) {
  auto o = detail::overlap(f.grid(), f.rank(), box);
  T s = detail::sum_over_ranges<T>(f.grid(), f.rank(), o.ranges, [&](std::size_t i) { return f[i]; });
  return ValueTraits<T>::scale(s, o.cell_measure);
}

template <class T>
T integral(const StepFunction<T>& f) {
  return integral(f, root_cell(f.grid()));
}

/// Exact measure of {x in box : pred(value)}.
template <class T, class Pred>
Frac measure_where(const StepFunction<T>& f, const Cell& box, Pred&& pred) {
  auto o = detail::overlap(f.grid(), f.rank(), box);
  auto hits = detail::sum_over_ranges<std::int64_t>(f.grid(), f.rank(), o.ranges, [&](std::size_t i) -> std::int64_t { return pred(f[i]) ? 1 : 0; });
  return Frac(hits) * o.cell_measure;
}

/// Pointwise sup-norm over all cells.
template <class T>
MagnitudeOf<T> sup_norm(const StepFunction<T>& f) {
  MagnitudeOf<T> best{};
  for (const auto& v : f.values()) {
    auto m = ValueTraits<T>::magnitude(v);
    if (m > best) best = m;
  }
  return best;
}

}  // namespace padic
