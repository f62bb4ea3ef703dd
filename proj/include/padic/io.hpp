#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "padic/ah_integration.hpp"
#include "padic/counterexample.hpp"
#include "padic/grid.hpp"
#include "padic/recovery.hpp"
#include "padic/series.hpp"

namespace padic::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Input error carrying the offending field path.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& field, const std::string& what) : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path, std::string("malformed JSON (") + e.what() + ")");
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---- exact numbers -------------------------------------------------------

inline json frac_json(const Frac& f) { return json::array({numerator_of(f).str(), denominator_of(f).str()}); }

inline BigInt parse_bigint(const json& v, const std::string& field) {
  if (v.is_number_integer()) return BigInt(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      return BigInt(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw FormatError(field, "expected an integer or an integer string");
}

inline Frac parse_frac(const json& v, const std::string& field) {
  if (v.is_number_integer() || v.is_string()) return Frac(parse_bigint(v, field));
  if (!v.is_array() || v.size() != 2) throw FormatError(field, "expected a rational as [num, den]");
  const BigInt den = parse_bigint(v[1], field + "[1]");
  if (den == 0) throw FormatError(field, "zero denominator");
  return Frac(parse_bigint(v[0], field + "[0]"), den);
}

/// Integral values are written as integers, others as doubles.
inline json real_json(double x) {
  if (std::isfinite(x) && std::trunc(x) == x && std::abs(x) < 9007199254740992.0) return static_cast<std::int64_t>(x);
  return x;
}

inline json value_json(const Complex& z) { return json::array({real_json(z.real()), real_json(z.imag())}); }
inline json value_json(double x) { return real_json(x); }
inline json value_json(const Frac& f) { return frac_json(f); }

template <class T>
json values_json(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(value_json(x));
  return a;
}

// ---- grid ----------------------------------------------------------------

inline json grid_json(const GridConfig& cfg) {
  json seqs = json::array();
  for (const auto& s : cfg.seqs()) seqs.push_back(std::vector<int>(s.bases().begin(), s.bases().end()));
  return json{{"dims", cfg.dims()}, {"seqs", seqs}, {"depth", cfg.depth()}};
}

inline GridConfig parse_grid(const json& j, const std::string& field = "grid") {
  if (!j.is_object()) throw FormatError(field, "expected an object");
  for (const char* key : {"dims", "seqs", "depth"}) {
    if (!j.contains(key)) throw FormatError(field + "." + key, "missing");
  }
  if (!j["dims"].is_number_integer() || j["dims"].get<int>() < 1) throw FormatError(field + ".dims", "must be an integer >= 1");
  if (!j["depth"].is_number_integer() || j["depth"].get<int>() < 0) throw FormatError(field + ".depth", "must be an integer >= 0");
  const auto& seqs = j["seqs"];
  const int dims = j["dims"].get<int>();
  if (!seqs.is_array() || static_cast<int>(seqs.size()) != dims) throw FormatError(field + ".seqs", "must hold one array per dimension");
  std::vector<BranchSeq> out;
  std::size_t shortest = SIZE_MAX;
  for (std::size_t d = 0; d < seqs.size(); ++d) {
    const std::string f = field + ".seqs[" + std::to_string(d) + "]";
    if (!seqs[d].is_array()) throw FormatError(f, "must be an array of integers");
    std::vector<int> p;
    for (std::size_t i = 0; i < seqs[d].size(); ++i) {
      const auto& e = seqs[d][i];
      const std::string fi = f + "[" + std::to_string(i) + "]";
      if (!e.is_number_integer()) throw FormatError(fi, "must be an integer");
      if (e.get<long long>() < 2) throw FormatError(fi, "branching entry " + std::to_string(e.get<long long>()) + " must be >= 2");
      p.push_back(e.get<int>());
    }
    shortest = std::min(shortest, p.size());
    try {
      out.emplace_back(std::move(p));
    } catch (const std::exception& e) {
      throw FormatError(f, e.what());
    }
  }
  if (j["depth"].get<std::size_t>() != shortest) throw FormatError(field + ".depth", "must equal the shortest sequence length");
  return GridConfig(std::move(out));
}

inline json cell_json(const Cell& c) { return json{{"ranks", c.rank}, {"index", c.index}}; }

inline Cell parse_cell(const json& j, const GridConfig& cfg, const std::string& field) {
  if (!j.is_object() || !j.contains("ranks") || !j.contains("index")) throw FormatError(field, "expected {\"ranks\": [...], \"index\": [...]}");
  Cell c;
  try {
    c.rank = j["ranks"].get<std::vector<int>>();
    c.index = j["index"].get<std::vector<std::int64_t>>();
    validate_cell(cfg, c);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(field, e.what());
  }
  return c;
}

/// Interval bounds of a cell as exact rational strings.
inline json cell_bounds_json(const GridConfig& cfg, const Cell& c) {
  json lo = json::array(), hi = json::array();
  for (int j = 0; j < cfg.dims(); ++j) {
    lo.push_back(to_string(lower_edge(cfg, c, j)));
    hi.push_back(to_string(upper_edge(cfg, c, j)));
  }
  return json{{"lo", lo}, {"hi", hi}};
}

// ---- coefficient maps ----------------------------------------------------

inline json coeffs_json(const CoeffMap& c) {
  json entries = json::array();
  for (const auto& [n, v] : c.entries()) entries.push_back(json::array({n, real_json(v.real()), real_json(v.imag())}));
  return json{{"mode", to_string(c.mode())}, {"grid", grid_json(c.grid())}, {"entries", entries}};
}

inline CoeffMap parse_coeffs(const json& j) {
  if (!j.is_object()) throw FormatError("series", "expected an object");
  if (!j.contains("mode") || !j["mode"].is_string()) throw FormatError("mode", "missing or not a string");
  const auto mode = j["mode"].get<std::string>();
  if (mode != "haar" && mode != "price") throw FormatError("mode", "must be \"haar\" or \"price\"");
  if (!j.contains("grid")) throw FormatError("grid", "missing");
  CoeffMap c(parse_grid(j["grid"]), mode == "haar" ? CoeffMode::haar : CoeffMode::price);
  if (!j.contains("entries") || !j["entries"].is_array()) throw FormatError("entries", "missing or not an array");
  for (std::size_t i = 0; i < j["entries"].size(); ++i) {
    const auto& e = j["entries"][i];
    const std::string f = "entries[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_array() || !e[1].is_number() || !e[2].is_number()) {
      throw FormatError(f, "expected [[n_1, ..., n_d], re, im]");
    }
    try {
      c.set(e[0].get<MultiIndex>(), Complex(e[1].get<double>(), e[2].get<double>()));
    } catch (const std::exception& ex) {
      throw FormatError(f, ex.what());
    }
  }
  return c;
}

// ---- families ------------------------------------------------------------

inline json family_json(const HFamily& fam) {
  json members = json::array();
  for (const auto& m : fam.members()) {
    json pieces = json::array();
    for (const auto& p : m.pieces) {
      auto [lo, hi] = detail::extrema_on(m.h, p);
      if (lo != hi) throw std::invalid_argument("family member is not constant on its pieces");
      pieces.push_back(json{{"cell", cell_json(p)}, {"value", frac_json(lo)}});
    }
    members.push_back(json{{"pieces", pieces}});
  }
  return json{{"grid", grid_json(fam.grid())}, {"C", frac_json(fam.declared_c())}, {"members", members}};
}

inline HFamily parse_family(const json& j) {
  if (!j.is_object()) throw FormatError("family", "expected an object");
  if (!j.contains("grid")) throw FormatError("grid", "missing");
  const GridConfig cfg = parse_grid(j["grid"]);
  const Frac c = j.contains("C") ? parse_frac(j["C"], "C") : Frac(1);
  if (!j.contains("members") || !j["members"].is_array() || j["members"].empty()) throw FormatError("members", "missing or empty");
  std::vector<FamilyMember> ms;
  for (std::size_t m = 0; m < j["members"].size(); ++m) {
    const std::string f = "members[" + std::to_string(m) + "]";
    const auto& jm = j["members"][m];
    if (!jm.is_object() || !jm.contains("pieces") || !jm["pieces"].is_array()) throw FormatError(f + ".pieces", "missing or not an array");
    Partition pieces;
    std::vector<Frac> values;
    for (std::size_t k = 0; k < jm["pieces"].size(); ++k) {
      const std::string fk = f + ".pieces[" + std::to_string(k) + "]";
      const auto& jp = jm["pieces"][k];
      if (!jp.is_object() || !jp.contains("cell") || !jp.contains("value")) throw FormatError(fk, "expected {\"cell\": ..., \"value\": [num, den]}");
      pieces.push_back(parse_cell(jp["cell"], cfg, fk + ".cell"));
      values.push_back(parse_frac(jp["value"], fk + ".value"));
      if (values.back() < 0) throw FormatError(fk + ".value", "must be nonnegative");
    }
    if (!is_partition_of(cfg, pieces, root_cell(cfg))) throw FormatError(f + ".pieces", "cells do not partition the unit cube");
    ms.push_back(HFamily::piecewise(cfg, std::move(pieces), values));
  }
  try {
    return HFamily(cfg, std::move(ms), c);
  } catch (const std::exception& e) {
    throw FormatError("family", e.what());
  }
}

// ---- step function tables ----------------------------------------------

/// CSV rows: flat_index, cell_lo_1..d, cell_hi_1..d, re, im.
inline std::string step_csv(const StepFunction<Complex>& f, std::int64_t flat_index, bool header) {
  std::ostringstream out;
  out.precision(17);
  const auto& cfg = f.grid();
  if (header) {
    out << "flat_index";
    for (int j = 1; j <= cfg.dims(); ++j) out << ",cell_lo_" << j;
    for (int j = 1; j <= cfg.dims(); ++j) out << ",cell_hi_" << j;
    out << ",re,im\n";
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Cell c = f.cell(i);
    out << flat_index;
    for (int j = 0; j < cfg.dims(); ++j) out << ',' << to_string(lower_edge(cfg, c, j));
    for (int j = 0; j < cfg.dims(); ++j) out << ',' << to_string(upper_edge(cfg, c, j));
    out << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
  return out.str();
}

inline json step_json(const StepFunction<Complex>& f) {
  json cells = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    json row = cell_bounds_json(f.grid(), f.cell(i));
    row["value"] = value_json(f[i]);
    cells.push_back(row);
  }
  return json{{"rank", f.rank()}, {"cells", cells}};
}

inline json gamma_json(const GammaMatrix& g) {
  json rows = json::array();
  for (std::int64_t k = 0; k < g.size(); ++k) {
    json row = json::array();
    for (std::int64_t l = 0; l < g.size(); ++l) row.push_back(value_json(g.at(g.first() + k, g.first() + l)));
    rows.push_back(row);
  }
  return json{{"block_rank", g.block_rank()}, {"first_index", g.first()}, {"size", g.size()}, {"rows", rows}};
}

// ---- reports -------------------------------------------------------------

inline json family_report_json(const FamilyReport& r) {
  json per = json::array();
  for (const auto& c : r.c_per_member) per.push_back(c ? frac_json(*c) : json(nullptr));
  json lambda = json::array();
  for (const auto& l : r.lambda) lambda.push_back(values_json(l));
  return json{{"h1_ok", r.h1_ok},
              {"h2_c_per_member", per},
              {"h2_c_min", r.c_min ? frac_json(*r.c_min) : json(nullptr)},
              {"h2_ok", r.h2_ok},
              {"h3_eps0", frac_json(r.h3_eps0)},
              {"lambda", lambda},
              {"eps0", frac_json(r.eps0)},
              {"ok", r.ok()}};
}

inline json condition_json(const ConditionReport& r) {
  return json{{"tails", values_json(r.tails)},
              {"tolerance", r.tolerance},
              {"window_start_m", r.window_start + 1},
              {"last_within_tolerance", r.last_within},
              {"nonincreasing_over_window", r.nonincreasing},
              {"nonincreasing_is_heuristic", true},
              {"pass", r.pass()}};
}

template <class T>
json recovery_json(const RecoveryReport<T>& r) {
  return json{{"estimates", values_json(r.estimates)},
              {"reference", value_json(r.reference)},
              {"errors", values_json(r.errors)},
              {"tolerance", r.tolerance},
              {"window_start_m", r.window_start + 1},
              {"final_within_tolerance", r.final_within},
              {"errors_nonincreasing_over_window", r.monotone},
              {"hypothesis_ok", r.hypothesis_ok},
              {"warnings", r.warnings},
              {"matched", r.matched()}};
}

template <class T>
json ah_report_json(const AhReport<T>& r) {
  json tails = json::array(), ties = json::array();
  for (const auto& t : r.tails) tails.push_back(values_json(t));
  for (const auto& t : r.ties) ties.push_back(values_json(t));
  return json{{"values", values_json(r.values)},
              {"alpha_grid", values_json(r.alphas)},
              {"alpha_grid_note", "admissibility is checked on this finite alpha grid only"},
              {"admissibility_tails", tails},
              {"tie_measures", ties},
              {"tolerance", r.tolerance},
              {"m0", r.m0 ? json(*r.m0 + 1) : json(nullptr)},
              {"converged", r.converged},
              {"admissible", r.admissible},
              {"integrable", r.integrable()}};
}

inline json lambda_failure_json(const example::LambdaFailureReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back(json{{"m", e.m},
                           {"witness", {{"n", e.witness_n}, {"i", e.witness_i}}},
                           {"value", frac_json(e.value)},
                           {"bound", frac_json(e.bound)},
                           {"level_measure", frac_json(e.level_measure)},
                           {"measure_bound", frac_json(e.measure_bound)},
                           {"witness_inside", e.witness_inside},
                           {"ok", e.ok}});
  }
  return json{{"j", r.j}, {"window", {{"m_first", r.window.m_first}, {"m_last", r.window.m_last}}}, {"entries", entries}, {"all_ok", r.all_ok()}};
}

inline json ah_success_json(const example::AhSuccessReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back(json{{"m", e.m},
                           {"tail", frac_json(e.tail)},
                           {"bound", frac_json(e.bound)},
                           {"tail_ok", e.tail_ok},
                           {"inclusion_ok", e.inclusion_ok},
                           {"partial_bound_ok", e.partial_bound_ok}});
  }
  return json{{"entries", entries}, {"decays", r.decays}, {"all_ok", r.all_ok()}};
}

inline json end_to_end_json(const example::EndToEndReport& r) {
  json lambdas = json::array(), consts = json::array(), recs = json::array();
  for (const auto& l : r.lambda_failures) lambdas.push_back(lambda_failure_json(l));
  for (std::size_t i = 0; i < r.constant_conditions.size(); ++i) {
    json c = condition_json(r.constant_conditions[i]);
    c["j"] = r.lambda_failures[i].j;
    consts.push_back(c);
  }
  for (std::size_t i = 0; i < r.recoveries.size(); ++i) {
    json c = recovery_json(r.recoveries[i]);
    c["box"] = cell_json(r.boxes[i]);
    recs.push_back(c);
  }
  return json{{"schema_version", kSchemaVersion},
              {"command", "counterexample"},
              {"n_max", r.spec.n_max},
              {"max_term_rank", r.max_term_rank},
              {"staircase_family", family_report_json(r.staircase_family)},
              {"staircase_condition", condition_json(r.staircase_condition)},
              {"ah_success", ah_success_json(r.ah_success)},
              {"lambda_failure", lambdas},
              {"constant_family_condition", consts},
              {"recover_additive", recs},
              {"ok", r.ok()}};
}

}  // namespace padic::io
