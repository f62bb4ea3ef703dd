#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic/ah_integration.hpp"
#include "padic/grid.hpp"
#include "padic/recovery.hpp"
#include "padic/series.hpp"
#include "padic/systems.hpp"
#include "padic/unit_value.hpp"

// Dyadic Haar series sum_{n>=1} sum_{i=1..n} 2^{(k_n+i)/2} chi_{k_n+i}^{(alpha(n,i))}
// with k_n = n(n-1)/2 and alpha(n,i) = (1 - 2^{1-i}) 2^{k_n+i} + 1, truncated
// after n = N_max.  Its majorant fails the constant-cutoff tail condition on
// every right-edge interval [1 - 2^-j, 1] while a staircase family satisfies
// the variable-cutoff one.

namespace padic::example {

/// Raised when a requested (j, m) window holds no witness term.
class WindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct ExampleSpec {
  int n_max = 5;
};

inline std::int64_t k_of(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2; }

/// Highest classical rank in the truncated series.
inline int max_term_rank(const ExampleSpec& s) { return static_cast<int>(k_of(s.n_max)) + s.n_max; }

/// Rank of the dyadic partition carrying every term.
inline int carrier_rank(const ExampleSpec& s) { return max_term_rank(s) + 1; }

inline void check_guard(const ExampleSpec& s) {
  if (s.n_max < 1) throw std::invalid_argument("N_max must be >= 1");
  if (max_term_rank(s) > 52) throw std::range_error("series values exceed the 2^52 exactness guard");
  if (carrier_rank(s) > 22) {
    throw std::range_error("N_max = " + std::to_string(s.n_max) + " needs 2^" + std::to_string(carrier_rank(s)) +
                           " cells, above the 2^22 cell budget (N_max <= 6)");
  }
}

inline std::int64_t alpha_of(int n, int i) {
  const auto rank = k_of(n) + i;
  return (std::int64_t{1} << rank) - (std::int64_t{1} << (k_of(n) + 1)) + 1;
}

struct ExampleTerm {
  int n = 0;
  int i = 0;
  int rank = 0;
  std::int64_t position = 0;
  /// 2^{rank/2}, kept exact.
  UnitValue coefficient;
};

inline std::vector<ExampleTerm> example_terms(const ExampleSpec& s) {
  check_guard(s);
  std::vector<ExampleTerm> out;
  for (int n = 1; n <= s.n_max; ++n) {
    for (int i = 1; i <= n; ++i) {
      const int rank = static_cast<int>(k_of(n)) + i;
      out.push_back(ExampleTerm{n, i, rank, alpha_of(n, i), UnitValue(std::uint64_t{1} << rank, Phase{})});
    }
  }
  return out;
}

inline GridConfig example_grid(const ExampleSpec& s) {
  check_guard(s);
  return GridConfig({BranchSeq(std::vector<int>(static_cast<std::size_t>(carrier_rank(s)), 2))});
}

/// Support [(alpha-1)/2^K, alpha/2^K) of a term as a rank-K cell.
inline Cell term_support(const ExampleTerm& t) { return uniform_cell(t.rank, {t.position - 1}); }

/// The series as generalized Haar coefficients (double precision values).
inline CoeffMap build_example_coeffs(const ExampleSpec& s) {
  CoeffMap c(example_grid(s), CoeffMode::haar);
  for (const auto& t : example_terms(s)) c.set({classical_to_haar_index(t.rank, t.position)}, t.coefficient.to_complex());
  return c;
}

/// Adds the exact integer values of one term (or their absolute values) to
/// a function on the carrier partition, touching only the term's support.
inline void accumulate_term(StepFunction<Frac>& out, const ExampleTerm& t, bool absolute = false) {
  const auto& seq = out.grid().seq(0);
  const int R = out.rank();
  const auto [lo, hi] = descendant_range(seq, t.rank, t.position - 1, R);
  const auto mid = lo + (hi - lo) / 2;
  Frac left = *(t.coefficient * classical_haar_eval(t.rank, t.position, digits_of_interval(seq, lo, R))).exact_real();
  Frac right = *(t.coefficient * classical_haar_eval(t.rank, t.position, digits_of_interval(seq, mid, R))).exact_real();
  if (absolute) {
    left = frac_abs(left);
    right = frac_abs(right);
  }
  for (auto c = lo; c < hi; ++c) out[static_cast<std::size_t>(c)] += c < mid ? left : right;
}

inline StepFunction<Frac> exact_term(const ExampleSpec& s, const ExampleTerm& t) {
  auto out = StepFunction<Frac>::filled(example_grid(s), carrier_rank(s), Frac(0));
  accumulate_term(out, t);
  return out;
}

/// Sum of the terms with outer index n <= upto (default: all), exactly.
inline StepFunction<Frac> exact_partial_series(const ExampleSpec& s, std::optional<int> upto = std::nullopt) {
  auto out = StepFunction<Frac>::filled(example_grid(s), carrier_rank(s), Frac(0));
  for (const auto& t : example_terms(s)) {
    if (!upto || t.n <= *upto) accumulate_term(out, t);
  }
  return out;
}

/// Psi with density equal to the truncated series; Psi' = f and Psi* = S*.
inline AdditiveFn<Frac> exact_example_additive(const ExampleSpec& s) { return AdditiveFn<Frac>(exact_partial_series(s)); }

/// Right-edge interval [1 - 2^-j, 1].
inline Cell right_edge(int j) { return uniform_cell(j, {(std::int64_t{1} << j) - 1}); }

/// Staircase member h_m: 2^{k_m+j+1} on [1-2^{1-j}, 1-2^{-j}) for j <= m and
/// 2^m on [1-2^{-m}, 1].
inline FamilyMember staircase_member(const GridConfig& cfg, int m) {
  Partition pieces;
  std::vector<Frac> values;
  for (int j = 1; j <= m; ++j) {
    pieces.push_back(uniform_cell(j, {(std::int64_t{1} << j) - 2}));
    values.push_back(pow2(static_cast<int>(k_of(m)) + j + 1));
  }
  pieces.push_back(right_edge(m));
  values.push_back(pow2(m));
  return HFamily::piecewise(cfg, std::move(pieces), values);
}

/// Members m = 1..members (default N_max).
inline HFamily build_example_hfamily(const ExampleSpec& s, std::optional<int> members = std::nullopt) {
  const auto cfg = example_grid(s);
  const int count = members.value_or(s.n_max);
  if (count < 1 || count > cfg.depth()) throw std::out_of_range("staircase member count outside 1..depth");
  std::vector<FamilyMember> ms;
  for (int m = 1; m <= count; ++m) ms.push_back(staircase_member(cfg, m));
  return HFamily(cfg, std::move(ms));
}

struct Window {
  int m_first = 0;
  int m_last = 0;
};

/// Dyadic levels 2^m whose witness term (n >= j+1, k_n + i = m + 2) exists
/// in the truncated series.
inline Window failure_window(const ExampleSpec& s, int j) {
  check_guard(s);
  if (j < 1) throw std::invalid_argument("j must be >= 1");
  if (j + 1 > s.n_max) {
    throw WindowError("j = " + std::to_string(j) + " has no witness terms for N_max = " + std::to_string(s.n_max) + " (need j <= N_max - 1)");
  }
  Window w{std::max(1, static_cast<int>(k_of(j + 1)) - 1), max_term_rank(s) - 2};
  if (w.m_first > w.m_last) throw WindowError("empty failure window for j = " + std::to_string(j));
  return w;
}

/// (n, i) with k_n + i = r and 1 <= i <= n.
inline std::pair<int, int> split_rank(int r) {
  int n = 1;
  while (k_of(n + 1) < r) ++n;
  return {n, r - static_cast<int>(k_of(n))};
}

struct LambdaFailureEntry {
  int m = 0;
  int witness_n = 0;
  int witness_i = 0;
  /// 2^m mu{x in [1-2^-j, 1] : S* > 2^m}.
  Frac value;
  Frac bound;
  Frac level_measure;
  Frac measure_bound;
  bool witness_inside = false;
  bool ok = false;
};

struct LambdaFailureReport {
  int j = 0;
  Window window;
  std::vector<LambdaFailureEntry> entries;
  bool all_ok() const {
    if (entries.empty()) return false;
    for (const auto& e : entries) {
      if (!e.ok) return false;
    }
    return true;
  }
};

inline LambdaFailureReport verify_lambda_failure(const ExampleSpec& s, int j, const StepFunction<Frac>& s_star) {
  LambdaFailureReport rep;
  rep.j = j;
  rep.window = failure_window(s, j);
  const auto cfg = example_grid(s);
  const Cell region = right_edge(j);
  for (int m = rep.window.m_first; m <= rep.window.m_last; ++m) {
    LambdaFailureEntry e;
    e.m = m;
    const auto [n, i] = split_rank(m + 2);
    e.witness_n = n;
    e.witness_i = std::max(i, j + 1);
    const Cell wsupp = uniform_cell(static_cast<int>(k_of(n)) + e.witness_i, {alpha_of(n, e.witness_i) - 1});
    e.witness_inside = contains(cfg, region, wsupp) && k_of(n) + e.witness_i >= m + 2;
    const Frac level = pow2(m);
    e.level_measure = measure_where(s_star, region, [&](const Frac& g) { return g > level; });
    e.value = level * e.level_measure;
    e.bound = pow2(-(j + 2));
    e.measure_bound = pow2(-(m + 2 + j));
    e.ok = e.witness_inside && e.value >= e.bound && e.level_measure >= e.measure_bound;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

inline LambdaFailureReport verify_lambda_failure(const ExampleSpec& s, int j) {
  return verify_lambda_failure(s, j, majorant(exact_example_additive(s)));
}

struct AhSuccessEntry {
  int m = 0;
  Frac tail;
  Frac bound;
  bool tail_ok = false;
  /// {S* > h_m} lies inside the supports named by the closed-form bound.
  bool inclusion_ok = false;
  /// sum_{n<=m} sum_i |term| <= h_m on every cell.
  bool partial_bound_ok = false;
};

struct AhSuccessReport {
  std::vector<AhSuccessEntry> entries;
  /// Final tail strictly below the first one.
  bool decays = false;
  bool all_ok() const {
    if (entries.empty()) return false;
    for (const auto& e : entries) {
      if (!(e.tail_ok && e.inclusion_ok && e.partial_bound_ok)) return false;
    }
    return true;
  }
};

inline Frac ah_tail_bound(int m) { return Frac(2 * m) / pow2(m) + pow2(m + 1) / pow2(static_cast<int>(k_of(m + 1))); }

inline AhSuccessReport verify_ah_success(const ExampleSpec& s, const StepFunction<Frac>& s_star) {
  if (s.n_max < 2) throw std::invalid_argument("AH success check needs N_max >= 2");
  const auto cfg = example_grid(s);
  const auto terms = example_terms(s);
  const int R = carrier_rank(s);
  AhSuccessReport rep;
  auto abs_sum = StepFunction<Frac>::filled(cfg, R, Frac(0));
  for (int m = 1; m <= s.n_max - 1; ++m) {
    AhSuccessEntry e;
    e.m = m;
    const auto h = staircase_member(cfg, m).h.refined(R);
    e.tail = tail_integral(s_star, h);
    e.bound = ah_tail_bound(m);
    e.tail_ok = e.tail <= e.bound;

    Partition allowed;
    for (int i = 1; i <= m; ++i) allowed.push_back(uniform_cell(static_cast<int>(k_of(m + 1)) + i, {alpha_of(m + 1, i) - 1}));
    for (int i = m + 1; i <= s.n_max; ++i) allowed.push_back(uniform_cell(static_cast<int>(k_of(i)) + i, {alpha_of(i, i) - 1}));
    e.inclusion_ok = true;
    for (std::size_t c = 0; c < h.size() && e.inclusion_ok; ++c) {
      if (!(s_star[c] > h[c])) continue;
      const Cell cell = uniform_cell(R, {static_cast<std::int64_t>(c)});
      bool inside = false;
      for (const auto& a : allowed) inside = inside || contains(cfg, a, cell);
      e.inclusion_ok = inside;
    }

    for (const auto& t : terms) {
      if (t.n == m) accumulate_term(abs_sum, t, true);
    }
    e.partial_bound_ok = true;
    for (std::size_t c = 0; c < abs_sum.size(); ++c) e.partial_bound_ok = e.partial_bound_ok && abs_sum[c] <= h[c];
    rep.entries.push_back(std::move(e));
  }
  rep.decays = rep.entries.size() >= 2 ? rep.entries.back().tail < rep.entries.front().tail : true;
  return rep;
}

inline AhSuccessReport verify_ah_success(const ExampleSpec& s) { return verify_ah_success(s, majorant(exact_example_additive(s))); }

struct EndToEndReport {
  ExampleSpec spec;
  int max_term_rank = 0;
  ConditionReport staircase_condition;
  AhSuccessReport ah_success;
  std::vector<LambdaFailureReport> lambda_failures;
  /// Constant family 2^m over each failure window, restricted to [1-2^-j, 1].
  std::vector<ConditionReport> constant_conditions;
  std::vector<Cell> boxes;
  std::vector<RecoveryReport<Frac>> recoveries;
  FamilyReport staircase_family;

  bool ok() const {
    bool good = staircase_condition.pass() && ah_success.all_ok() && staircase_family.ok();
    for (const auto& l : lambda_failures) good = good && l.all_ok();
    for (const auto& c : constant_conditions) good = good && !c.pass();
    for (const auto& r : recoveries) good = good && r.matched();
    return good;
  }
};

/// Both verdicts of the example plus additive recovery on `boxes`.
inline EndToEndReport example_end_to_end(const ExampleSpec& s, const std::vector<int>& js, const std::vector<Cell>& boxes,
                                         double tolerance = 1e-9) {
  if (s.n_max < 3) throw std::invalid_argument("end-to-end run needs N_max >= 3");
  EndToEndReport rep;
  rep.spec = s;
  rep.max_term_rank = max_term_rank(s);
  const auto psi = exact_example_additive(s);
  const auto s_star = majorant(psi);
  const auto fam = build_example_hfamily(s);
  rep.staircase_family = check_family(fam);
  rep.staircase_condition = condition_check_majorant(s_star, fam, tolerance, root_cell(psi.grid()));
  rep.ah_success = verify_ah_success(s, s_star);
  for (int j : js) {
    rep.lambda_failures.push_back(verify_lambda_failure(s, j, s_star));
    const auto& w = rep.lambda_failures.back().window;
    std::vector<Frac> lambdas;
    for (int m = w.m_first; m <= w.m_last; ++m) lambdas.push_back(pow2(m));
    rep.constant_conditions.push_back(condition_check_majorant(s_star, HFamily::constant(psi.grid(), lambdas), tolerance, right_edge(j)));
  }
  rep.boxes = boxes;
  for (const auto& b : boxes) rep.recoveries.push_back(recover_additive(psi, s_star, fam, b, tolerance));
  return rep;
}

}  // namespace padic::example
