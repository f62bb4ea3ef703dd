#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/rational.hpp"

namespace padic {

/// Branching sequence p_1..p_K with cached moduli m_0 = 1, m_k = m_{k-1} p_k.
/// K is the depth cap; every accessor past it throws std::out_of_range.
class BranchSeq {
 public:
  BranchSeq() : moduli_{1} {}

  explicit BranchSeq(std::vector<int> bases) : bases_(std::move(bases)), moduli_{1} {
    moduli_.reserve(bases_.size() + 1);
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      if (bases_[i] < 2) {
        throw std::invalid_argument("branching entry p_" + std::to_string(i + 1) + " = " +
                                    std::to_string(bases_[i]) + " must be >= 2");
      }
      moduli_.push_back(checked_mul(moduli_.back(), bases_[i]));
    }
  }

  int depth() const { return static_cast<int>(bases_.size()); }

  /// p_k for 1 <= k <= depth.
  int base(int k) const {
    if (k < 1 || k > depth()) throw std::out_of_range("branch index " + std::to_string(k) + " outside 1.." + std::to_string(depth()));
    return bases_[static_cast<std::size_t>(k - 1)];
  }

  std::int64_t modulus(int k) const {
    if (k < 0 || k > depth()) throw std::out_of_range("modulus rank " + std::to_string(k) + " outside 0.." + std::to_string(depth()));
    return moduli_[static_cast<std::size_t>(k)];
  }

  std::span<const int> bases() const { return bases_; }

  bool dyadic() const {
    return std::all_of(bases_.begin(), bases_.end(), [](int p) { return p == 2; });
  }

  friend bool operator==(const BranchSeq&, const BranchSeq&) = default;

 private:
  std::vector<int> bases_;
  std::vector<std::int64_t> moduli_;
};

inline std::int64_t modulus(const BranchSeq& seq, int k) { return seq.modulus(k); }

/// The generator: one branching sequence per dimension.
class GridConfig {
 public:
  GridConfig() = default;

  explicit GridConfig(std::vector<BranchSeq> seqs) : seqs_(std::move(seqs)) {
    if (seqs_.empty()) throw std::invalid_argument("grid needs at least one dimension");
  }

  static GridConfig uniform(int dims, const BranchSeq& seq) {
    return GridConfig(std::vector<BranchSeq>(static_cast<std::size_t>(dims), seq));
  }

  int dims() const { return static_cast<int>(seqs_.size()); }
  const BranchSeq& seq(int j) const { return seqs_.at(static_cast<std::size_t>(j)); }
  const std::vector<BranchSeq>& seqs() const { return seqs_; }

  /// Usable uniform depth: the smallest depth cap over dimensions.
  int depth() const {
    int d = seqs_.empty() ? 0 : seqs_.front().depth();
    for (const auto& s : seqs_) d = std::min(d, s.depth());
    return d;
  }

  /// Condition (M) bound: max over all branching entries.
  int bound() const {
    int m = 0;
    for (const auto& s : seqs_) {
      for (int p : s.bases()) m = std::max(m, p);
    }
    return m;
  }

  friend bool operator==(const GridConfig&, const GridConfig&) = default;

 private:
  std::vector<BranchSeq> seqs_;
};

inline void require_same_grid(const GridConfig& a, const GridConfig& b) {
  if (!(a == b)) throw std::invalid_argument("grid configurations do not match");
}

/// Product of per-dimension P-adic intervals [n_j/m_{k_j}, (n_j+1)/m_{k_j}).
/// Ranks may differ per dimension; cells with one common rank form Lambda_k.
struct Cell {
  std::vector<int> rank;
  std::vector<std::int64_t> index;

  int dims() const { return static_cast<int>(rank.size()); }

  bool uniform() const {
    return std::adjacent_find(rank.begin(), rank.end(), std::not_equal_to<>()) == rank.end();
  }

  int max_rank() const { return rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()); }

  /// Common rank of a uniform cell.
  int uniform_rank() const {
    if (!uniform()) throw std::logic_error("cell has mixed ranks");
    return rank.empty() ? 0 : rank.front();
  }

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

using Partition = std::vector<Cell>;

inline Cell root_cell(const GridConfig& cfg) {
  return Cell{std::vector<int>(static_cast<std::size_t>(cfg.dims()), 0),
              std::vector<std::int64_t>(static_cast<std::size_t>(cfg.dims()), 0)};
}

inline Cell uniform_cell(int rank, std::vector<std::int64_t> index) {
  return Cell{std::vector<int>(index.size(), rank), std::move(index)};
}

inline void validate_cell(const GridConfig& cfg, const Cell& c) {
  if (c.dims() != cfg.dims() || c.index.size() != c.rank.size()) {
    throw std::invalid_argument("cell dimension does not match grid");
  }
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto k = c.rank[static_cast<std::size_t>(j)];
    const auto n = c.index[static_cast<std::size_t>(j)];
    if (k < 0 || k > cfg.seq(j).depth()) {
      throw std::out_of_range("cell rank " + std::to_string(k) + " in dimension " + std::to_string(j) + " exceeds depth");
    }
    if (n < 0 || n >= cfg.seq(j).modulus(k)) {
      throw std::out_of_range("cell index " + std::to_string(n) + " out of range in dimension " + std::to_string(j));
    }
  }
}

inline Frac lower_edge(const GridConfig& cfg, const Cell& c, int j) {
  const auto sj = static_cast<std::size_t>(j);
  return Frac(c.index[sj], cfg.seq(j).modulus(c.rank[sj]));
}

inline Frac upper_edge(const GridConfig& cfg, const Cell& c, int j) {
  const auto sj = static_cast<std::size_t>(j);
  return Frac(c.index[sj] + 1, cfg.seq(j).modulus(c.rank[sj]));
}

inline Frac measure(const GridConfig& cfg, const Cell& c) {
  BigInt den = 1;
  for (int j = 0; j < c.dims(); ++j) den *= cfg.seq(j).modulus(c.rank[static_cast<std::size_t>(j)]);
  return Frac(BigInt(1), den);
}

/// Number of cells in Lambda_k, i.e. prod_j m^j_k.
inline std::int64_t cell_count(const GridConfig& cfg, int rank) {
  std::int64_t n = 1;
  for (int j = 0; j < cfg.dims(); ++j) n = checked_mul(n, cfg.seq(j).modulus(rank));
  return n;
}

/// Half-open index range [first, last) of the rank-`to` cells covering the
/// rank-`from` interval with index n (requires from <= to).
inline std::pair<std::int64_t, std::int64_t> descendant_range(const BranchSeq& s, int from, std::int64_t n, int to) {
  const auto ratio = s.modulus(to) / s.modulus(from);
  return {n * ratio, (n + 1) * ratio};
}

/// Index of the rank-`to` ancestor of a rank-`from` interval (to <= from).
inline std::int64_t ancestor_index(const BranchSeq& s, int from, std::int64_t n, int to) {
  return n / (s.modulus(from) / s.modulus(to));
}

inline bool contains(const GridConfig& cfg, const Cell& outer, const Cell& inner) {
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    if (inner.rank[sj] < outer.rank[sj]) return false;
    if (ancestor_index(cfg.seq(j), inner.rank[sj], inner.index[sj], outer.rank[sj]) != outer.index[sj]) return false;
  }
  return true;
}

inline bool interiors_disjoint(const GridConfig& cfg, const Cell& a, const Cell& b) {
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const int hi = std::max(a.rank[sj], b.rank[sj]);
    auto ra = descendant_range(cfg.seq(j), a.rank[sj], a.index[sj], hi);
    auto rb = descendant_range(cfg.seq(j), b.rank[sj], b.index[sj], hi);
    if (ra.second <= rb.first || rb.second <= ra.first) return true;
  }
  return false;
}

/// Partition invariants: every cell inside `region`, pairwise disjoint
/// interiors, exact measure sum equal to the region's measure.
inline bool is_partition_of(const GridConfig& cfg, const Partition& parts, const Cell& region) {
  Frac total = 0;
  for (std::size_t a = 0; a < parts.size(); ++a) {
    validate_cell(cfg, parts[a]);
    if (!contains(cfg, region, parts[a])) return false;
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if (!interiors_disjoint(cfg, parts[a], parts[b])) return false;
    }
    total += measure(cfg, parts[a]);
  }
  return total == measure(cfg, region);
}

/// One-step subdivision of `c` along dimension `dim`.
inline Partition refine_cell(const GridConfig& cfg, const Cell& c, int dim) {
  validate_cell(cfg, c);
  if (dim < 0 || dim >= cfg.dims()) throw std::out_of_range("refinement dimension out of range");
  const auto sd = static_cast<std::size_t>(dim);
  const int k = c.rank[sd];
  if (k >= cfg.seq(dim).depth()) throw std::out_of_range("refinement past depth cap in dimension " + std::to_string(dim));
  const int p = cfg.seq(dim).base(k + 1);
  Partition out;
  out.reserve(static_cast<std::size_t>(p));
  for (int t = 0; t < p; ++t) {
    Cell child = c;
    child.rank[sd] = k + 1;
    child.index[sd] = c.index[sd] * p + t;
    out.push_back(std::move(child));
  }
  return out;
}

/// Splits a mixed-rank box into the uniform-rank cells of Lambda_K,
/// K = max rank of the box.  Output order is row-major (last dimension fastest).
inline Partition decompose_box(const GridConfig& cfg, const Cell& box) {
  validate_cell(cfg, box);
  const int K = box.max_rank();
  const int d = cfg.dims();
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  for (int j = 0; j < d; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    ranges.push_back(descendant_range(cfg.seq(j), box.rank[sj], box.index[sj], K));
  }
  Partition out;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) idx[static_cast<std::size_t>(j)] = ranges[static_cast<std::size_t>(j)].first;
  while (true) {
    out.push_back(uniform_cell(K, idx));
    int j = d - 1;
    for (; j >= 0; --j) {
      const auto sj = static_cast<std::size_t>(j);
      if (++idx[sj] < ranges[sj].second) break;
      idx[sj] = ranges[sj].first;
    }
    if (j < 0) break;
  }
  return out;
}

/// Finite-depth P-adic digit expansion of a point, one digit string per
/// dimension: x = sum_i x_i / m_i with 0 <= x_i < p_i.
struct PointCode {
  std::vector<std::vector<int>> digits;

  int dims() const { return static_cast<int>(digits.size()); }

  int depth() const {
    if (digits.empty()) return 0;
    std::size_t d = digits.front().size();
    for (const auto& v : digits) d = std::min(d, v.size());
    return static_cast<int>(d);
  }
};

inline void validate_point(const GridConfig& cfg, const PointCode& pt) {
  if (pt.dims() != cfg.dims()) throw std::invalid_argument("point dimension does not match grid");
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto& dig = pt.digits[static_cast<std::size_t>(j)];
    if (static_cast<int>(dig.size()) > cfg.seq(j).depth()) throw std::out_of_range("point code deeper than grid");
    for (std::size_t i = 0; i < dig.size(); ++i) {
      if (dig[i] < 0 || dig[i] >= cfg.seq(j).base(static_cast<int>(i) + 1)) {
        throw std::out_of_range("digit " + std::to_string(dig[i]) + " out of range at position " + std::to_string(i + 1));
      }
    }
  }
}

/// Index at rank `rank` of the interval holding a 1-D digit string.
inline std::int64_t interval_of_digits(const BranchSeq& seq, std::span<const int> digits, int rank) {
  if (rank > static_cast<int>(digits.size())) throw std::out_of_range("rank exceeds point depth");
  std::int64_t n = 0;
  for (int i = 1; i <= rank; ++i) n = n * seq.base(i) + digits[static_cast<std::size_t>(i - 1)];
  return n;
}

inline Cell cell_of_point(const GridConfig& cfg, const PointCode& pt, int rank) {
  validate_point(cfg, pt);
  if (rank < 0 || rank > pt.depth()) throw std::out_of_range("rank " + std::to_string(rank) + " exceeds point depth");
  Cell c;
  for (int j = 0; j < cfg.dims(); ++j) {
    c.rank.push_back(rank);
    c.index.push_back(interval_of_digits(cfg.seq(j), pt.digits[static_cast<std::size_t>(j)], rank));
  }
  return c;
}

/// Digits x_1..x_k of a rank-k interval index.
inline std::vector<int> digits_of_interval(const BranchSeq& seq, std::int64_t n, int rank) {
  std::vector<int> out(static_cast<std::size_t>(rank));
  for (int i = rank; i >= 1; --i) {
    const int p = seq.base(i);
    out[static_cast<std::size_t>(i - 1)] = static_cast<int>(n % p);
    n /= p;
  }
  return out;
}

/// Digit prefix shared by every point of a uniform cell.
inline PointCode point_of_cell(const GridConfig& cfg, const Cell& c) {
  validate_cell(cfg, c);
  PointCode pt;
  for (int j = 0; j < cfg.dims(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    pt.digits.push_back(digits_of_interval(cfg.seq(j), c.index[sj], c.rank[sj]));
  }
  return pt;
}

/// Row-major position of a uniform rank-`rank` cell (last dimension fastest).
inline std::int64_t linear_index(const GridConfig& cfg, int rank, std::span<const std::int64_t> idx) {
  std::int64_t lin = 0;
  for (int j = 0; j < cfg.dims(); ++j) lin = lin * cfg.seq(j).modulus(rank) + idx[static_cast<std::size_t>(j)];
  return lin;
}

inline Cell cell_at(const GridConfig& cfg, int rank, std::int64_t lin) {
  Cell c = uniform_cell(rank, std::vector<std::int64_t>(static_cast<std::size_t>(cfg.dims())));
  for (int j = cfg.dims() - 1; j >= 0; --j) {
    const auto m = cfg.seq(j).modulus(rank);
    c.index[static_cast<std::size_t>(j)] = lin % m;
    lin /= m;
  }
  return c;
}

}  // namespace padic
