#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "padic/ah_integration.hpp"
#include "padic/series.hpp"
#include "padic/systems.hpp"

namespace padic {

/// Final window of a per-m sequence: its last third, at least two members.
inline std::size_t final_window_start(std::size_t n) {
  const std::size_t w = std::max<std::size_t>(2, (n + 2) / 3);
  return n > w ? n - w : 0;
}

template <class M>
bool nonincreasing_from(const std::vector<M>& v, std::size_t start) {
  for (std::size_t i = start; i + 1 < v.size(); ++i) {
    if (v[i + 1] > v[i]) return false;
  }
  return true;
}

/// Condition (int h): tails_m = integral over {x in region : Psi* > h_m} of h_m.
struct ConditionReport {
  std::vector<Frac> tails;
  double tolerance = 0.0;
  std::size_t window_start = 0;
  bool last_within = false;
  /// Heuristic: nonincreasing over the final window.
  bool nonincreasing = false;
  bool pass() const { return last_within && nonincreasing; }
};

template <class M>
ConditionReport condition_check_majorant(const StepFunction<M>& psi_star, const HFamily& fam, double tolerance, const Cell& region) {
  ConditionReport rep;
  rep.tolerance = tolerance;
  for (const auto& mem : fam.members()) rep.tails.push_back(tail_integral(psi_star, mem.h, region));
  rep.window_start = final_window_start(rep.tails.size());
  rep.last_within = !rep.tails.empty() && rep.tails.back() <= exact_frac(tolerance);
  rep.nonincreasing = nonincreasing_from(rep.tails, rep.window_start);
  return rep;
}

template <class T>
ConditionReport condition_check(const AdditiveFn<T>& psi, const HFamily& fam, double tolerance = 1e-9) {
  return condition_check_majorant(majorant(psi), fam, tolerance, root_cell(psi.grid()));
}

/// lambda mu{x in region : Psi* > lambda} for each lambda, exactly.
template <class M>
std::vector<Frac> lambda_condition_values(const StepFunction<M>& psi_star, const std::vector<Frac>& lambdas, const Cell& region) {
  std::vector<Frac> out;
  for (const auto& l : lambdas) out.push_back(l * measure_where(psi_star, region, [&](const M& g) { return mag_gt(g, l); }));
  return out;
}

template <class T>
std::vector<Frac> lambda_condition_check(const AdditiveFn<T>& psi, const std::vector<Frac>& lambdas) {
  return lambda_condition_values(majorant(psi), lambdas, root_cell(psi.grid()));
}

template <class T>
struct RecoveryReport {
  std::vector<T> estimates;
  T reference{};
  std::vector<MagnitudeOf<T>> errors;
  double tolerance = 0.0;
  std::size_t window_start = 0;
  bool final_within = false;
  bool monotone = false;
  bool hypothesis_ok = true;
  std::vector<std::string> warnings;

  bool matched() const { return final_within && monotone; }
};

namespace detail {

template <class T>
void finish_verdict(RecoveryReport<T>& rep) {
  rep.errors.clear();
  for (const auto& e : rep.estimates) rep.errors.push_back(ValueTraits<T>::magnitude(e - rep.reference));
  rep.window_start = final_window_start(rep.errors.size());
  rep.final_within = !rep.errors.empty() && mag_leq(rep.errors.back(), exact_frac(rep.tolerance));
  rep.monotone = nonincreasing_from(rep.errors, rep.window_start);
}

inline void note_family(const HFamily& fam, bool& ok, std::vector<std::string>& warnings) {
  if (fam.empty()) {
    ok = false;
    warnings.emplace_back("empty family");
    return;
  }
  const auto fr = check_family(fam);
  if (!fr.h1_ok) warnings.emplace_back("family is not pointwise nondecreasing (h1)");
  if (!fr.h2_ok) warnings.emplace_back("family oscillation exceeds the declared constant C (h2)");
  if (!(fr.h3_eps0 > 0)) warnings.emplace_back("family has a piece with zero integral (h3)");
  ok = ok && fr.ok();
}

}  // namespace detail

/// e_m = integral over box of [Psi']_{h_m}, compared against Psi(box).
/// Mixed-rank boxes are handled piecewise over their uniform decomposition.
template <class T>
RecoveryReport<T> recover_additive(const AdditiveFn<T>& psi, const StepFunction<MagnitudeOf<T>>& psi_star, const HFamily& fam,
                                   const Cell& box, double tolerance = 1e-9, ConditionReport* condition = nullptr) {
  RecoveryReport<T> rep;
  rep.tolerance = tolerance;
  detail::note_family(fam, rep.hypothesis_ok, rep.warnings);
  const auto cond = condition_check_majorant(psi_star, fam, tolerance, root_cell(psi.grid()));
  if (!cond.pass()) {
    rep.hypothesis_ok = false;
    rep.warnings.emplace_back("tail condition on Psi* is not met by the family");
  }
  if (condition) *condition = cond;
  const auto& d = derivative(psi);
  const Partition pieces = box.uniform() ? Partition{box} : decompose_box(psi.grid(), box);
  for (const auto& mem : fam.members()) {
    const auto cut = truncate(d, mem.h);
    T e = ValueTraits<T>::zero();
    for (const auto& c : pieces) e += integral(cut, c);
    rep.estimates.push_back(e);
  }
  rep.reference = psi_eval(psi, box);
  detail::finish_verdict(rep);
  return rep;
}

template <class T>
RecoveryReport<T> recover_additive(const AdditiveFn<T>& psi, const HFamily& fam, const Cell& box, double tolerance = 1e-9,
                                   ConditionReport* condition = nullptr) {
  return recover_additive(psi, majorant(psi), fam, box, tolerance, condition);
}

/// a_n = lim integral of [f conj(chi_n)] truncated at ||chi_n||_inf h_m.
inline RecoveryReport<Complex> recover_haar_coeff(const StepFunction<Complex>& f, const MultiIndex& n, const HFamily& fam,
                                                  double tolerance = 1e-8, std::optional<Complex> expected = std::nullopt) {
  RecoveryReport<Complex> rep;
  rep.tolerance = tolerance;
  detail::note_family(fam, rep.hypothesis_ok, rep.warnings);
  const auto chi = to_complex(tensor_haar_step(f.grid(), n));
  const auto norm_sq = haar_norm_sq(f.grid(), n);
  const auto product = zip_with(f, chi, [](const Complex& a, const Complex& b) { return a * std::conj(b); });
  for (const auto& mem : fam.members()) rep.estimates.push_back(integral(truncate(product, mem.h, norm_sq)));
  rep.reference = expected ? *expected : inner_product(f, chi);
  detail::finish_verdict(rep);
  return rep;
}

/// b_n = lim integral of [f conj(psi_n)] truncated at h_m (|psi_n| = 1).
inline RecoveryReport<Complex> recover_price_coeff(const StepFunction<Complex>& f, const MultiIndex& n, const HFamily& fam,
                                                   double tolerance = 1e-8, std::optional<Complex> expected = std::nullopt) {
  RecoveryReport<Complex> rep;
  rep.tolerance = tolerance;
  detail::note_family(fam, rep.hypothesis_ok, rep.warnings);
  const auto psi = to_complex(tensor_price_step(f.grid(), n));
  const auto product = zip_with(f, psi, [](const Complex& a, const Complex& b) { return a * std::conj(b); });
  for (const auto& mem : fam.members()) rep.estimates.push_back(integral(truncate(product, mem.h)));
  rep.reference = expected ? *expected : inner_product(f, psi);
  detail::finish_verdict(rep);
  return rep;
}

/// Price coefficient through the Haar path: recover every a_l in the block
/// of n, then b_n = sum_l conj(gamma^l_n) a_l, per member.
inline RecoveryReport<Complex> price_coeff_via_gamma(const StepFunction<Complex>& f, const MultiIndex& n, const HFamily& fam,
                                                     double tolerance = 1e-8, std::optional<Complex> expected = std::nullopt) {
  const auto& cfg = f.grid();
  detail::check_multi_index(cfg, n);
  RecoveryReport<Complex> rep;
  rep.tolerance = tolerance;
  detail::note_family(fam, rep.hypothesis_ok, rep.warnings);
  rep.estimates.assign(fam.size(), Complex{});
  const int d = cfg.dims();
  std::vector<std::vector<std::int64_t>> axes;
  std::vector<std::optional<GammaMatrix>> gammas;
  for (int j = 0; j < d; ++j) {
    const int b = index_block(cfg.seq(j), n[static_cast<std::size_t>(j)]);
    axes.push_back(detail::block_members(cfg.seq(j), b));
    gammas.push_back(b == 0 ? std::nullopt : std::optional<GammaMatrix>(gamma_matrix(cfg.seq(j), b)));
  }
  std::vector<std::size_t> pos(static_cast<std::size_t>(d), 0);
  while (true) {
    MultiIndex l(static_cast<std::size_t>(d));
    Complex w{1.0, 0.0};
    for (int j = 0; j < d; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      l[sj] = axes[sj][pos[sj]];
      if (gammas[sj]) w *= std::conj(gammas[sj]->at(n[sj], l[sj]));
    }
    const auto part = recover_haar_coeff(f, l, fam, tolerance);
    for (std::size_t m = 0; m < fam.size(); ++m) rep.estimates[m] += w * part.estimates[m];
    int j = d - 1;
    for (; j >= 0; --j) {
      const auto sj = static_cast<std::size_t>(j);
      if (++pos[sj] < axes[sj].size()) break;
      pos[sj] = 0;
    }
    if (j < 0) break;
  }
  rep.reference = expected ? *expected : inner_product(f, to_complex(tensor_price_step(cfg, n)));
  detail::finish_verdict(rep);
  return rep;
}

}  // namespace padic
