#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/grid.hpp"
#include "padic/rational.hpp"
#include "padic/step_function.hpp"

namespace padic {

/// One cutoff function h_m together with its partition {I^m_k}.
struct FamilyMember {
  StepFunction<Frac> h;
  Partition pieces;
};

/// Nondecreasing family of nonnegative cutoff functions h_1 <= h_2 <= ...
/// Members are indexed from 1 in reports and from 0 in this container.
class HFamily {
 public:
  HFamily(GridConfig cfg, std::vector<FamilyMember> members, Frac declared_c = 1)
      : cfg_(std::move(cfg)), members_(std::move(members)), declared_c_(std::move(declared_c)) {
    if (declared_c_ < 1) throw std::invalid_argument("family constant C must be >= 1");
    for (const auto& m : members_) {
      require_same_grid(cfg_, m.h.grid());
      for (const auto& v : m.h.values()) {
        if (v < 0) throw std::invalid_argument("family member takes a negative value");
      }
      if (!is_partition_of(cfg_, m.pieces, root_cell(cfg_))) throw std::invalid_argument("family member pieces do not partition the cube");
    }
  }

  /// Member that is constant on each piece.
  static FamilyMember piecewise(const GridConfig& cfg, Partition pieces, const std::vector<Frac>& values) {
    if (pieces.size() != values.size()) throw std::invalid_argument("piece and value counts differ");
    int rank = 0;
    for (const auto& p : pieces) rank = std::max(rank, p.max_rank());
    auto h = StepFunction<Frac>::filled(cfg, rank, Frac(-1));
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto o = detail::overlap(cfg, rank, pieces[i]);
      std::vector<std::int64_t> idx(static_cast<std::size_t>(cfg.dims()));
      for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = o.ranges[j].first;
      while (true) {
        h[static_cast<std::size_t>(linear_index(cfg, rank, idx))] = values[i];
        int j = cfg.dims() - 1;
        for (; j >= 0; --j) {
          const auto sj = static_cast<std::size_t>(j);
          if (++idx[sj] < o.ranges[sj].second) break;
          idx[sj] = o.ranges[sj].first;
        }
        if (j < 0) break;
      }
    }
    for (const auto& v : h.values()) {
      if (v < 0) throw std::invalid_argument("pieces leave part of the cube uncovered or carry a negative value");
    }
    return FamilyMember{std::move(h), std::move(pieces)};
  }

  /// h_m == lambdas[m-1] on the trivial partition {[0,1]^d}.
  static HFamily constant(const GridConfig& cfg, const std::vector<Frac>& lambdas) {
    std::vector<FamilyMember> ms;
    for (const auto& l : lambdas) ms.push_back(piecewise(cfg, {root_cell(cfg)}, {l}));
    return HFamily(cfg, std::move(ms));
  }

  const GridConfig& grid() const { return cfg_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const FamilyMember& member(std::size_t i) const { return members_.at(i); }
  const std::vector<FamilyMember>& members() const { return members_; }
  const Frac& declared_c() const { return declared_c_; }

 private:
  GridConfig cfg_;
  std::vector<FamilyMember> members_;
  Frac declared_c_;
};

/// [f]_h: f where |f| <= sqrt(radicand) h, zero elsewhere.  Ties keep f.
template <class T>
StepFunction<T> truncate(const StepFunction<T>& f, const StepFunction<Frac>& h, std::uint64_t radicand = 1) {
  return zip_with(f, h, [radicand](const T& v, const Frac& cut) -> T {
    if constexpr (std::is_same_v<T, Frac>) {
      return v * v <= Frac(radicand) * cut * cut ? v : Frac(0);
    } else {
      const double scale = std::sqrt(static_cast<double>(radicand));
      return ValueTraits<T>::magnitude(v) <= scale * to_double(cut) * (1.0 + kRelativeGuard) ? v : ValueTraits<T>::zero();
    }
  });
}

/// Exact integral over `box` of h restricted to the cell set {g > h}.
template <class M>
Frac tail_integral(const StepFunction<M>& g, const StepFunction<Frac>& h, const Cell& box) {
  const auto prod = zip_with(g, h, [](const M& gv, const Frac& hv) { return mag_gt(gv, hv) ? hv : Frac(0); });
  return integral(prod, box);
}

template <class M>
Frac tail_integral(const StepFunction<M>& g, const StepFunction<Frac>& h) {
  return tail_integral(g, h, root_cell(g.grid()));
}

namespace detail {

template <class T>
std::pair<T, T> extrema_on(const StepFunction<T>& f, const Cell& box) {
  auto o = overlap(f.grid(), f.rank(), box);
  bool first = true;
  T lo{}, hi{};
  std::vector<std::int64_t> idx(static_cast<std::size_t>(f.grid().dims()));
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = o.ranges[j].first;
  while (true) {
    const auto& v = f[static_cast<std::size_t>(linear_index(f.grid(), f.rank(), idx))];
    if (first || v < lo) lo = v;
    if (first || v > hi) hi = v;
    first = false;
    int j = static_cast<int>(idx.size()) - 1;
    for (; j >= 0; --j) {
      const auto sj = static_cast<std::size_t>(j);
      if (++idx[sj] < o.ranges[sj].second) break;
      idx[sj] = o.ranges[sj].first;
    }
    if (j < 0) break;
  }
  return {lo, hi};
}

}  // namespace detail

struct FamilyReport {
  bool h1_ok = true;
  /// Least valid C per member; empty when some piece has inf 0 < sup.
  std::vector<std::optional<Frac>> c_per_member;
  std::optional<Frac> c_min;
  bool h2_ok = false;
  /// inf over m, k of the integral of h_m over I^m_k.
  Frac h3_eps0;
  /// lambda^m_k = inf of h_m on I^m_k.
  std::vector<std::vector<Frac>> lambda;
  /// inf over m, k of lambda^m_k mu(I^m_k).
  Frac eps0;

  bool ok() const { return h1_ok && h2_ok && h3_eps0 > 0; }
};

inline FamilyReport check_family(const HFamily& fam) {
  if (fam.empty()) throw std::invalid_argument("empty family");
  const auto& cfg = fam.grid();
  FamilyReport rep;
  for (std::size_t m = 0; m + 1 < fam.size(); ++m) {
    const auto cmp = zip_with(fam.member(m).h, fam.member(m + 1).h, [](const Frac& a, const Frac& b) { return a <= b ? 1 : 0; });
    for (int v : cmp.values()) rep.h1_ok = rep.h1_ok && v == 1;
  }
  bool first = true;
  bool bounded = true;
  Frac cmax = 1;
  for (const auto& mem : fam.members()) {
    std::optional<Frac> cm = Frac(1);
    std::vector<Frac> lam;
    for (const auto& piece : mem.pieces) {
      auto [lo, hi] = detail::extrema_on(mem.h, piece);
      lam.push_back(lo);
      if (lo == 0) {
        if (hi > 0) cm.reset();
      } else if (cm && hi / lo > *cm) {
        cm = hi / lo;
      }
      const Frac part = integral(mem.h, piece);
      const Frac lm = lo * measure(cfg, piece);
      if (first || part < rep.h3_eps0) rep.h3_eps0 = part;
      if (first || lm < rep.eps0) rep.eps0 = lm;
      first = false;
    }
    if (!cm) bounded = false;
    else if (*cm > cmax) cmax = *cm;
    rep.c_per_member.push_back(cm);
    rep.lambda.push_back(std::move(lam));
  }
  if (bounded) rep.c_min = cmax;
  rep.h2_ok = bounded && cmax <= fam.declared_c();
  return rep;
}

/// Index m0 (0-based) of the shortest suffix whose values agree pairwise
/// within tol; empty if even the last two disagree.
template <class T>
std::optional<std::size_t> settle_index(const std::vector<T>& v, const Frac& tol) {
  if (v.empty()) return std::nullopt;
  std::size_t m0 = v.size() - 1;
  for (std::size_t i = v.size() - 1; i-- > 0;) {
    bool ok = true;
    for (std::size_t j = i + 1; j < v.size() && ok; ++j) ok = mag_leq(ValueTraits<T>::magnitude(v[i] - v[j]), tol);
    if (!ok) break;
    m0 = i;
  }
  if (v.size() >= 2 && m0 == v.size() - 1) return std::nullopt;
  return m0;
}

struct AhOptions {
  std::vector<Frac> alphas{Frac(1, 2), Frac(1), Frac(2)};
  double tolerance = 1e-9;
};

template <class T>
struct AhReport {
  std::vector<T> values;
  std::vector<Frac> alphas;
  /// tails[a][m] = integral over {|f| >= alpha_a h_m} of h_m.
  std::vector<std::vector<Frac>> tails;
  /// Measure of the exact tie set {|f| == alpha h_m}.
  std::vector<std::vector<Frac>> ties;
  double tolerance = 0.0;
  std::optional<std::size_t> m0;
  bool converged = false;
  bool admissible = false;
  bool integrable() const { return converged && admissible; }
};

/// v_m = integral over box of [f]_{h_m}, with the admissibility tails for each
/// alpha on the configured grid.  Verdicts are judged at the last member.
template <class T>
AhReport<T> ah_integral(const StepFunction<T>& f, const HFamily& fam, const Cell& box, const AhOptions& opt = {}) {
  AhReport<T> rep;
  rep.alphas = opt.alphas;
  rep.tolerance = opt.tolerance;
  rep.tails.assign(opt.alphas.size(), {});
  rep.ties.assign(opt.alphas.size(), {});
  const auto mag = f.map([](const T& v) { return ValueTraits<T>::magnitude(v); });
  for (const auto& mem : fam.members()) {
    rep.values.push_back(integral(truncate(f, mem.h), box));
    for (std::size_t a = 0; a < opt.alphas.size(); ++a) {
      const Frac& al = opt.alphas[a];
      const auto part = zip_with(mag, mem.h, [&](const auto& g, const Frac& h) { return mag_geq(g, al * h) ? h : Frac(0); });
      rep.tails[a].push_back(integral(part, box));
      const auto tie = zip_with(mag, mem.h, [&](const auto& g, const Frac& h) -> std::int64_t { return mag_tie(g, al * h) ? 1 : 0; });
      rep.ties[a].push_back(measure_where(tie, box, [](std::int64_t t) { return t == 1; }));
    }
  }
  const Frac tol = exact_frac(opt.tolerance);
  rep.m0 = settle_index(rep.values, tol);
  rep.converged = rep.m0.has_value();
  rep.admissible = !fam.empty();
  for (const auto& t : rep.tails) rep.admissible = rep.admissible && !t.empty() && t.back() <= tol;
  return rep;
}

template <class T>
struct AReport {
  std::vector<Frac> lambdas;
  std::vector<T> values;
  /// lambda_m mu{|f| > lambda_m}.
  std::vector<Frac> clause;
  double tolerance = 0.0;
  std::optional<std::size_t> m0;
  bool converged = false;
  bool clause_ok = false;
  bool integrable() const { return converged && clause_ok; }
};

/// The A-integral with constant cutoffs lambda_m, evaluated directly.
template <class T>
AReport<T> a_integral(const StepFunction<T>& f, const std::vector<Frac>& lambdas, const Cell& box, double tolerance = 1e-9) {
  AReport<T> rep;
  rep.lambdas = lambdas;
  rep.tolerance = tolerance;
  for (const auto& l : lambdas) {
    auto kept = f.map([&](const T& v) { return mag_leq(ValueTraits<T>::magnitude(v), l) ? v : ValueTraits<T>::zero(); });
    rep.values.push_back(integral(kept, box));
    rep.clause.push_back(l * measure_where(f, box, [&](const T& v) { return mag_gt(ValueTraits<T>::magnitude(v), l); }));
  }
  const Frac tol = exact_frac(tolerance);
  rep.m0 = settle_index(rep.values, tol);
  rep.converged = rep.m0.has_value();
  rep.clause_ok = !rep.clause.empty() && rep.clause.back() <= tol;
  return rep;
}

struct UpgradeResult {
  HFamily family;
  std::vector<double> alpha;
  bool hypothesis_violated = false;
};

/// g_m = alpha_m h_m with alpha_m = (sup_{k>=m} t_k + 1/m)^{-1/2}, made
/// nondecreasing.  alpha_m t_m <= sqrt(sup tail), so the product vanishes
/// whenever the tails do.  The tails are judged to vanish when the final sup
/// tail lies below the 1/M regularizer of the last member.
inline UpgradeResult upgrade_family(const HFamily& fam, const std::vector<Frac>& tails) {
  if (tails.size() != fam.size()) throw std::invalid_argument("one tail value per family member required");
  bool all_zero = true;
  for (const auto& m : fam.members()) {
    for (const auto& v : m.h.values()) all_zero = all_zero && v == 0;
  }
  if (fam.empty() || all_zero) throw std::invalid_argument("cannot upgrade an all-zero family");
  const std::size_t n = tails.size();
  std::vector<Frac> sup_tail(n);
  for (std::size_t i = n; i-- > 0;) {
    if (tails[i] < 0) throw std::invalid_argument("tail values must be nonnegative");
    sup_tail[i] = (i + 1 == n || tails[i] > sup_tail[i + 1]) ? tails[i] : sup_tail[i + 1];
  }
  UpgradeResult out{fam, {}, false};
  std::vector<FamilyMember> ms;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(prev, 1.0 / std::sqrt(to_double(sup_tail[i] + Frac(1, static_cast<long>(i + 1)))));
    prev = a;
    out.alpha.push_back(a);
    const Frac af = exact_frac(a);
    const auto& mem = fam.member(i);
    ms.push_back(FamilyMember{mem.h.map([&](const Frac& v) { return Frac(v * af); }), mem.pieces});
  }
  out.family = HFamily(fam.grid(), std::move(ms), fam.declared_c());
  out.hypothesis_violated = sup_tail.back() >= Frac(1, static_cast<long>(n));
  return out;
}

}  // namespace padic
