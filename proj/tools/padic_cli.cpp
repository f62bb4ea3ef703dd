#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "padic/padic.hpp"

using namespace padic;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdict = 2;

struct Globals {
  std::string grid;
  std::string out;
  std::string format;
  int threads = 0;
  std::optional<double> tolerance;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw io::FormatError(what, "'" + s + "' is not an integer");
  return v;
}

/// "0..7" (inclusive) or "1,3,5", or a mix of both.
std::vector<std::int64_t> parse_range(const std::string& s, const std::string& what) {
  std::vector<std::int64_t> out;
  for (const auto& part : split(s, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_int(part, what));
      continue;
    }
    const auto lo = parse_int(part.substr(0, dots), what);
    const auto hi = parse_int(part.substr(dots + 2), what);
    if (hi < lo) throw io::FormatError(what, "empty range " + part);
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw io::FormatError(what, "no indices given");
  return out;
}

MultiIndex parse_multi_index(const std::string& s, const GridConfig& cfg) {
  MultiIndex n;
  for (const auto& part : split(s, ',')) n.push_back(parse_int(part, "--index"));
  if (static_cast<int>(n.size()) != cfg.dims()) {
    throw io::FormatError("--index", "expected " + std::to_string(cfg.dims()) + " comma-separated components");
  }
  return n;
}

/// "rank:index" per dimension, comma separated; "root" for the unit cube.
Cell parse_box(const std::string& s, const GridConfig& cfg) {
  if (s.empty() || s == "root") return root_cell(cfg);
  Cell c;
  for (const auto& part : split(s, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw io::FormatError("--box", "expected rank:index per dimension, got '" + part + "'");
    c.rank.push_back(static_cast<int>(parse_int(part.substr(0, colon), "--box")));
    c.index.push_back(parse_int(part.substr(colon + 1), "--box"));
  }
  try {
    validate_cell(cfg, c);
  } catch (const std::exception& e) {
    throw io::FormatError("--box", e.what());
  }
  return c;
}

std::string resolved_format(const Globals& g) {
  if (!g.format.empty()) return g.format;
  if (g.out == "csv" || g.out == "json") return g.out;
  return "json";
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "csv" || g.out == "json") {
    std::cout << text;
  } else {
    io::write_text(g.out, text);
  }
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

json envelope(const std::string& command) { return json{{"schema_version", io::kSchemaVersion}, {"command", command}}; }

GridConfig require_grid(const Globals& g) {
  if (g.grid.empty()) throw io::FormatError("--grid", "a grid file is required for this command");
  return io::parse_grid(io::read_json_file(g.grid));
}

// ---- systems -------------------------------------------------------------

struct SystemsArgs {
  std::string haar;
  std::string price;
  std::vector<int> gamma_blocks;
  int axis = 0;
  int rank = -1;
};

int cmd_systems(const Globals& g, const SystemsArgs& a) {
  const auto cfg = require_grid(g);
  if (a.axis < 0 || a.axis >= cfg.dims()) throw io::FormatError("--axis", "no such dimension");
  const auto& seq = cfg.seq(a.axis);
  const GridConfig line({seq});
  const auto format = resolved_format(g);

  const auto haar = a.haar.empty() ? std::vector<std::int64_t>{} : parse_range(a.haar, "--haar");
  const auto price = a.price.empty() ? std::vector<std::int64_t>{} : parse_range(a.price, "--price");
  int rank = a.rank;
  if (rank < 0) {
    rank = 0;
    for (auto n : haar) rank = std::max(rank, haar_rank(seq, n));
    for (auto k : price) rank = std::max(rank, price_rank(seq, k));
  }

  std::string csv;
  json out = envelope("systems");
  out["grid"] = io::grid_json(cfg);
  out["axis"] = a.axis;
  out["table_rank"] = rank;
  json jh = json::array(), jp = json::array(), jg = json::array();
  bool header = true;
  for (auto n : haar) {
    const auto f = to_complex(tensor_haar_step(line, {n}, rank));
    if (format == "csv") {
      csv += "# haar " + std::to_string(n) + "\n" + io::step_csv(f, n, header);
    } else {
      json t = io::step_json(f);
      t["index"] = n;
      jh.push_back(t);
    }
  }
  for (auto k : price) {
    const auto f = to_complex(tensor_price_step(line, {k}, rank));
    if (format == "csv") {
      csv += "# price " + std::to_string(k) + "\n" + io::step_csv(f, k, header);
    } else {
      json t = io::step_json(f);
      t["index"] = k;
      jp.push_back(t);
    }
  }
  for (int b : a.gamma_blocks) {
    const auto gm = gamma_matrix(seq, b);
    double residual = 0.0;
    for (auto k = gm.first(); k < gm.first() + gm.size(); ++k) {
      for (auto q = gm.first(); q < gm.first() + gm.size(); ++q) {
        Complex s{};
        for (auto l = gm.first(); l < gm.first() + gm.size(); ++l) s += gm.at(k, l) * std::conj(gm.at(q, l));
        residual = std::max(residual, std::abs(s - (k == q ? 1.0 : 0.0)));
      }
    }
    if (format == "csv") {
      std::ostringstream rows;
      rows.precision(17);
      rows << "# gamma block " << b << "\nprice_index,haar_index,re,im\n";
      for (auto k = gm.first(); k < gm.first() + gm.size(); ++k) {
        for (auto l = gm.first(); l < gm.first() + gm.size(); ++l) rows << k << ',' << l << ',' << gm.at(k, l).real() << ',' << gm.at(k, l).imag() << '\n';
      }
      csv += rows.str();
    } else {
      json t = io::gamma_json(gm);
      t["unitarity_residual"] = residual;
      jg.push_back(t);
    }
  }
  if (format == "csv") {
    emit(g, csv);
  } else {
    out["haar"] = jh;
    out["price"] = jp;
    out["gamma"] = jg;
    emit_json(g, out);
  }
  return kExitOk;
}

// ---- recover -------------------------------------------------------------

struct RecoverArgs {
  std::string series;
  std::string family;
  std::string mode = "additive";
  std::string index;
  std::string box;
};

int cmd_recover(const Globals& g, const RecoverArgs& a) {
  const auto coeffs = io::parse_coeffs(io::read_json_file(a.series));
  const auto fam = io::parse_family(io::read_json_file(a.family));
  const auto& cfg = coeffs.grid();
  if (!(fam.grid() == cfg)) throw io::FormatError("family.grid", "does not match the series grid");
  const auto fam_report = check_family(fam);

  json out = envelope("recover");
  out["mode"] = a.mode;
  out["grid"] = io::grid_json(cfg);
  out["family_check"] = io::family_report_json(fam_report);
  bool hypothesis_ok = fam_report.ok();
  bool matched = false;

  if (a.mode == "additive") {
    const double tol = g.tolerance.value_or(1e-9);
    const auto box = parse_box(a.box, cfg);
    const auto psi = additive_fn(coeffs);
    ConditionReport cond;
    const auto rep = recover_additive(psi, fam, box, tol, &cond);
    out["box"] = io::cell_json(box);
    out["box_bounds"] = io::cell_bounds_json(cfg, box);
    out["condition"] = io::condition_json(cond);
    out["recovery"] = io::recovery_json(rep);
    hypothesis_ok = hypothesis_ok && rep.hypothesis_ok;
    matched = rep.matched();
  } else if (a.mode == "haar" || a.mode == "price") {
    if (a.index.empty()) throw io::FormatError("--index", "required for coefficient recovery");
    const double tol = g.tolerance.value_or(1e-8);
    const auto n = parse_multi_index(a.index, cfg);
    const auto target = a.mode == "haar" ? CoeffMode::haar : CoeffMode::price;
    const auto planted = convert_coeffs(coeffs, target).get(n);
    const auto f = derivative(additive_fn(coeffs));
    out["index"] = n;
    out["planted"] = io::value_json(planted);
    const auto rep = target == CoeffMode::haar ? recover_haar_coeff(f, n, fam, tol, planted) : recover_price_coeff(f, n, fam, tol, planted);
    out["recovery"] = io::recovery_json(rep);
    hypothesis_ok = hypothesis_ok && rep.hypothesis_ok;
    matched = rep.matched();
    if (target == CoeffMode::price) {
      const auto via = price_coeff_via_gamma(f, n, fam, tol, planted);
      const auto gap = std::abs(via.estimates.back() - rep.estimates.back());
      out["gamma_cross_check"] = json{{"recovery", io::recovery_json(via)}, {"final_gap", gap}, {"agrees", gap <= tol}};
      matched = matched && via.matched() && gap <= tol;
    }
  } else {
    throw io::FormatError("--mode", "must be haar, price or additive");
  }
  out["hypothesis_ok"] = hypothesis_ok;
  out["matched"] = matched;
  emit_json(g, out);
  return hypothesis_ok && matched ? kExitOk : kExitVerdict;
}

// ---- check-family --------------------------------------------------------

struct CheckFamilyArgs {
  std::string family;
  std::string series;
};

int cmd_check_family(const Globals& g, const CheckFamilyArgs& a) {
  const auto fam = io::parse_family(io::read_json_file(a.family));
  const auto rep = check_family(fam);
  json out = envelope("check-family");
  out["grid"] = io::grid_json(fam.grid());
  out["members"] = fam.size();
  out["report"] = io::family_report_json(rep);
  bool ok = rep.ok();
  if (!a.series.empty()) {
    const auto coeffs = io::parse_coeffs(io::read_json_file(a.series));
    if (!(fam.grid() == coeffs.grid())) throw io::FormatError("family.grid", "does not match the series grid");
    const auto cond = condition_check(additive_fn(coeffs), fam, g.tolerance.value_or(1e-9));
    out["condition"] = io::condition_json(cond);
    ok = ok && cond.pass();
  }
  out["ok"] = ok;
  emit_json(g, out);
  return ok ? kExitOk : kExitVerdict;
}

// ---- counterexample ------------------------------------------------------

struct CounterexampleArgs {
  int nmax = 5;
  std::string j;
  std::vector<std::string> boxes;
};

int cmd_counterexample(const Globals& g, const CounterexampleArgs& a) {
  example::ExampleSpec spec{a.nmax};
  std::vector<int> js;
  if (a.j.empty()) {
    for (int j = 1; j <= std::min(3, a.nmax - 1); ++j) js.push_back(j);
  } else {
    for (auto v : parse_range(a.j, "--j")) js.push_back(static_cast<int>(v));
  }
  for (int j : js) example::failure_window(spec, j);
  const auto cfg = example::example_grid(spec);
  std::vector<Cell> boxes;
  if (a.boxes.empty()) {
    boxes = {root_cell(cfg), uniform_cell(1, {0})};
  } else {
    for (const auto& b : a.boxes) boxes.push_back(parse_box(b, cfg));
  }
  const auto rep = example::example_end_to_end(spec, js, boxes, g.tolerance.value_or(1e-9));
  emit_json(g, io::end_to_end_json(rep));
  return rep.ok() ? kExitOk : kExitVerdict;
}

// ---- decompose -----------------------------------------------------------

int cmd_decompose(const Globals& g, const std::string& box_spec) {
  const auto cfg = require_grid(g);
  const auto box = parse_box(box_spec, cfg);
  const auto parts = decompose_box(cfg, box);
  json cells = json::array();
  Frac total = 0;
  for (const auto& c : parts) {
    json row = io::cell_json(c);
    row["bounds"] = io::cell_bounds_json(cfg, c);
    row["measure"] = io::frac_json(measure(cfg, c));
    total += measure(cfg, c);
    cells.push_back(row);
  }
  json out = envelope("decompose");
  out["grid"] = io::grid_json(cfg);
  out["box"] = io::cell_json(box);
  out["box_bounds"] = io::cell_bounds_json(cfg, box);
  out["cells"] = cells;
  out["total_measure"] = io::frac_json(total);
  out["measure_matches"] = total == measure(cfg, box);
  emit_json(g, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P-adic Haar/Price systems, AH-integration and coefficient recovery"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--grid", g.grid, "Grid configuration JSON file");
  app.add_option("--out", g.out, "Output file (stdout when omitted)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", g.threads, "Worker threads (falls back to PADIC_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_option("--tolerance", g.tolerance, "Verdict tolerance")->check(CLI::PositiveNumber);
  app.fallthrough();

  SystemsArgs sa;
  auto* systems = app.add_subcommand("systems", "Dump Haar/Price step tables and gamma blocks");
  systems->add_option("--haar", sa.haar, "Haar indices, e.g. 0..7 or 1,3");
  systems->add_option("--price", sa.price, "Price indices, e.g. 0..7");
  systems->add_option("--gamma-block", sa.gamma_blocks, "Gamma block rank (repeatable)");
  systems->add_option("--axis", sa.axis, "Dimension whose branching sequence is used");
  systems->add_option("--rank", sa.rank, "Table rank (default: smallest rank carrying every function)");

  RecoverArgs ra;
  auto* recover = app.add_subcommand("recover", "Recover coefficients or Psi values by AH-truncated integrals");
  recover->add_option("--series", ra.series, "Coefficient map JSON")->required();
  recover->add_option("--family", ra.family, "Cutoff family JSON")->required();
  recover->add_option("--mode", ra.mode, "haar, price or additive")->check(CLI::IsMember({"haar", "price", "additive"}));
  recover->add_option("--index", ra.index, "Multi-index n_1,...,n_d");
  recover->add_option("--box", ra.box, "Box as rank:index per dimension, e.g. 1:0,0:0");

  CheckFamilyArgs ca;
  auto* check = app.add_subcommand("check-family", "Check conditions (h1)-(h3), optionally the tail condition");
  check->add_option("--family", ca.family, "Cutoff family JSON")->required();
  check->add_option("--series", ca.series, "Coefficient map JSON for the tail condition");

  CounterexampleArgs xa;
  auto* counter = app.add_subcommand("counterexample", "Exact check of the A versus AH example");
  counter->add_option("--nmax", xa.nmax, "Truncation N_max");
  counter->add_option("--j", xa.j, "Right-edge levels j, e.g. 1,2,3");
  counter->add_option("--box", xa.boxes, "Recovery boxes (repeatable)");

  std::string box_spec;
  auto* decompose = app.add_subcommand("decompose", "Split a mixed-rank box into uniform-rank cells");
  decompose->add_option("--box", box_spec, "Box as rank:index per dimension")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  if (g.threads > 0) set_thread_count(g.threads);
  try {
    if (*systems) return cmd_systems(g, sa);
    if (*recover) return cmd_recover(g, ra);
    if (*check) return cmd_check_family(g, ca);
    if (*counter) return cmd_counterexample(g, xa);
    if (*decompose) return cmd_decompose(g, box_spec);
  } catch (const example::WindowError& e) {
    std::cerr << "window error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
