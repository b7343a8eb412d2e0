#include "semitoric/cli.hpp"

#include "semitoric/critical.hpp"
#include "semitoric/errors.hpp"
#include "semitoric/lattice.hpp"
#include "semitoric/models.hpp"
#include "semitoric/monodromy.hpp"
#include "semitoric/regularization.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace semitoric {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"classify", "periods", "sigma", "action", "taylor", "monodromy"};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    config_error("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) config_error("not a finite number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) config_error("unknown key '" + k + "' in " + where);
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error("bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& s : split(text, ',')) out.push_back(parse_double(s));
  return out;
}

std::vector<Axis> parse_grid(const std::string& text) {
  std::vector<Axis> axes;
  for (const auto& part : split(text, ',')) {
    const auto f = split(part, ':');
    if (f.size() != 3) config_error("grid axis must be 'lo:hi:count', got '" + part + "'");
    Axis a;
    a.lo = parse_double(f[0]);
    a.hi = parse_double(f[1]);
    const double c = parse_double(f[2]);
    if (c < 1 || c != std::floor(c) || c > 100000) config_error("grid count must be a positive integer");
    a.count = static_cast<int>(c);
    axes.push_back(a);
  }
  if (axes.empty()) config_error("empty grid");
  return axes;
}

json resolve_system_argument(const std::string& arg) {
  if (arg.empty()) config_error("empty system argument");
  try {
    if (arg.front() == '{') return json::parse(arg);
  } catch (const json::exception& e) {
    config_error(std::string("malformed system JSON: ") + e.what());
  }
  if (arg == "champagne_bottle" || arg == "champagne_bottle_normalized") return json{{"type", arg}};
  if (!std::filesystem::is_regular_file(arg)) config_error("unknown system '" + arg + "' (not a builtin or a file)");
  std::ifstream in(arg);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    config_error("malformed system file '" + arg + "': " + e.what());
  }
}

HamiltonianSystem system_from_json(const json& spec) {
  if (spec.is_string()) return system_from_json(resolve_system_argument(spec.get<std::string>()));
  if (!spec.is_object() || !spec.contains("type")) config_error("system spec needs a 'type'");
  const std::string type = get_as<std::string>(spec, "type");
  try {
    if (type == "champagne_bottle") {
      check_keys(spec, {"type", "normalized"}, "champagne_bottle spec");
      const bool norm = spec.contains("normalized") && get_as<bool>(spec, "normalized");
      return norm ? normalized_champagne_bottle() : champagne_bottle();
    }
    if (type == "champagne_bottle_normalized") {
      check_keys(spec, {"type"}, "champagne_bottle_normalized spec");
      return normalized_champagne_bottle();
    }
    if (type == "q_model") {
      check_keys(spec, {"type", "blocks"}, "q_model spec");
      if (!spec.contains("blocks") || !spec["blocks"].is_array()) config_error("q_model needs a 'blocks' array");
      std::vector<BlockSpec> blocks;
      for (const auto& b : spec["blocks"]) {
        if (b.is_string()) {
          blocks.push_back({block_kind_from_string(b.get<std::string>()), 1});
          continue;
        }
        check_keys(b, {"kind", "multiplicity"}, "block");
        const int mult = b.contains("multiplicity") ? get_as<int>(b, "multiplicity") : 1;
        if (mult < 0) config_error("negative block multiplicity");
        blocks.push_back({block_kind_from_string(get_as<std::string>(b, "kind")), mult});
      }
      if (degrees_of_freedom(blocks) < 1) config_error("q_model needs at least one degree of freedom");
      return q_model(blocks);
    }
    if (type == "product") {
      check_keys(spec, {"type", "base", "k"}, "product spec");
      if (!spec.contains("base")) config_error("product needs a 'base'");
      const int k = spec.contains("k") ? get_as<int>(spec, "k") : 1;
      if (k < 0) config_error("product: k must be non-negative");
      return product_with_free_torus(system_from_json(spec["base"]), k);
    }
    if (type == "reparam") {
      check_keys(spec, {"type", "base", "g"}, "reparam spec");
      if (!spec.contains("base") || !spec.contains("g")) config_error("reparam needs 'base' and 'g'");
      const json& g = spec["g"];
      check_keys(g, {"kind", "matrix"}, "reparam map");
      if (get_as<std::string>(g, "kind") != "linear") config_error("only linear reparametrizations are supported");
      const auto rows = get_as<std::vector<std::vector<double>>>(g, "matrix");
      HamiltonianSystem base = system_from_json(spec["base"]);
      if (static_cast<int>(rows.size()) != base.n) config_error("reparam matrix must be n x n");
      Mat a(base.n, base.n);
      for (int i = 0; i < base.n; ++i) {
        if (static_cast<int>(rows[i].size()) != base.n) config_error("reparam matrix must be n x n");
        for (int j = 0; j < base.n; ++j) a(i, j) = rows[i][j];
      }
      return reparametrize(base, linear_reparam(a));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    config_error(std::string("invalid system: ") + e.what());
  }
  config_error("unknown system type '" + type + "'");
}

void apply_config_json(RunConfig& cfg, const json& j) {
  check_keys(j,
             {"command", "system", "out", "format", "seed", "rel_tol", "abs_tol", "log_cut", "radius", "steps",
              "turns", "clockwise", "center", "fixed", "grid", "taylor_degree", "seed_point", "target_rank",
              "threads"},
             "config");
  if (j.contains("command")) cfg.command = get_as<std::string>(j, "command");
  if (j.contains("system"))
    cfg.system = j["system"].is_string() ? resolve_system_argument(j["system"].get<std::string>()) : j["system"];
  if (j.contains("out")) cfg.out = get_as<std::string>(j, "out");
  if (j.contains("format")) cfg.format = get_as<std::string>(j, "format");
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("rel_tol")) cfg.rel_tol = get_as<double>(j, "rel_tol");
  if (j.contains("abs_tol")) cfg.abs_tol = get_as<double>(j, "abs_tol");
  if (j.contains("log_cut")) cfg.log_cut = get_as<double>(j, "log_cut");
  if (j.contains("radius")) cfg.radius = get_as<double>(j, "radius");
  if (j.contains("steps")) cfg.steps = get_as<int>(j, "steps");
  if (j.contains("turns")) cfg.turns = get_as<int>(j, "turns");
  if (j.contains("clockwise")) cfg.clockwise = get_as<bool>(j, "clockwise");
  if (j.contains("center")) cfg.center = get_as<std::vector<double>>(j, "center");
  if (j.contains("fixed")) cfg.fixed = get_as<std::vector<double>>(j, "fixed");
  if (j.contains("grid")) cfg.grid = parse_grid(get_as<std::string>(j, "grid"));
  if (j.contains("taylor_degree")) cfg.taylor_degree = get_as<int>(j, "taylor_degree");
  if (j.contains("seed_point")) cfg.seed_point = get_as<std::vector<double>>(j, "seed_point");
  if (j.contains("target_rank")) cfg.target_rank = get_as<int>(j, "target_rank");
  if (j.contains("threads")) cfg.threads = get_as<int>(j, "threads");
}

void validate_config(const RunConfig& cfg) {
  if (!kCommands.count(cfg.command)) config_error("unknown command '" + cfg.command + "'");
  if (cfg.system.is_null()) config_error("no system given");
  if (cfg.format != "json" && cfg.format != "csv") config_error("format must be csv or json");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) config_error("tolerances must be positive");
  if (!(cfg.radius > 0.0)) config_error("radius must be positive");
  if (cfg.steps < 8) config_error("steps must be at least 8");
  if (cfg.turns < 1) config_error("turns must be at least 1");
  if (cfg.center.size() != 2) config_error("center takes two values");
  if (cfg.taylor_degree < 0) config_error("taylor degree must be non-negative");
  if (cfg.target_rank < 0) config_error("target rank must be non-negative");
  if (cfg.threads < 1) config_error("threads must be at least 1");
  if (!std::isfinite(cfg.log_cut)) config_error("log cut must be finite");
  for (const auto& a : cfg.grid)
    if (a.count < 1 || !std::isfinite(a.lo) || !std::isfinite(a.hi)) config_error("bad grid axis");
  if (!cfg.out.empty()) {
    const auto dir = std::filesystem::path(cfg.out).parent_path();
    if (!dir.empty() && !std::filesystem::is_directory(dir)) config_error("output directory does not exist");
  }
}

std::optional<RunConfig> parse_command_line(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Period lattices, regularized actions and monodromy near focus-focus singularities"};
  std::string command, system, config_path, out_path, format, grid, seed_point, center, fixed;
  std::uint64_t seed = 0;
  double rel_tol = 0, abs_tol = 0, log_cut = 0, radius = 0;
  int steps = 0, turns = 0, degree = 0, target_rank = 0, threads = 0;
  bool clockwise = false;
  app.add_option("command", command, "classify | periods | sigma | action | taylor | monodromy");
  auto* o_system = app.add_option("--system", system, "builtin name, inline JSON, or path to a system spec");
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration (flags override it)");
  auto* o_out = app.add_option("--out", out_path, "output file (default: stdout)");
  auto* o_format = app.add_option("--format", format, "csv or json");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_rel = app.add_option("--rel-tol", rel_tol, "integrator relative tolerance");
  auto* o_abs = app.add_option("--abs-tol", abs_tol, "integrator absolute tolerance");
  auto* o_cut = app.add_option("--log-cut", log_cut, "branch cut angle of the logarithm (radians)");
  auto* o_radius = app.add_option("--radius", radius, "monodromy loop radius");
  auto* o_steps = app.add_option("--steps", steps, "monodromy samples per turn");
  auto* o_turns = app.add_option("--turns", turns, "monodromy loop turns");
  auto* o_cw = app.add_flag("--clockwise", clockwise, "traverse the loop clockwise");
  auto* o_center = app.add_option("--center", center, "loop centre 'v1,v2'");
  auto* o_fixed = app.add_option("--fixed", fixed, "loop values v3..vn 'a,b,...'");
  auto* o_grid = app.add_option("--grid", grid, "value grid 'lo:hi:n,...' (one axis per component)");
  auto* o_degree = app.add_option("--taylor-degree", degree, "Taylor fit degree");
  auto* o_point = app.add_option("--seed-point", seed_point, "phase-space seed 'x1,...,xi_n'");
  auto* o_rank = app.add_option("--target-rank", target_rank, "rank of the critical point to find");
  auto* o_threads = app.add_option("--threads", threads, "worker threads for value grids");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    config_error(e.what());
  }

  RunConfig cfg;
  if (o_config->count()) {
    std::ifstream in(config_path);
    if (!in) config_error("cannot read config file '" + config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      config_error(std::string("malformed config file: ") + e.what());
    }
    apply_config_json(cfg, j);
  }
  if (!command.empty()) cfg.command = command;
  if (o_system->count()) cfg.system = resolve_system_argument(system);
  if (o_out->count()) cfg.out = out_path;
  if (o_format->count()) cfg.format = format;
  if (o_seed->count()) cfg.seed = seed;
  if (o_rel->count()) cfg.rel_tol = rel_tol;
  if (o_abs->count()) cfg.abs_tol = abs_tol;
  if (o_cut->count()) cfg.log_cut = log_cut;
  if (o_radius->count()) cfg.radius = radius;
  if (o_steps->count()) cfg.steps = steps;
  if (o_turns->count()) cfg.turns = turns;
  if (o_cw->count()) cfg.clockwise = clockwise;
  if (o_center->count()) cfg.center = parse_list(center);
  if (o_fixed->count()) cfg.fixed = parse_list(fixed);
  if (o_grid->count()) cfg.grid = parse_grid(grid);
  if (o_degree->count()) cfg.taylor_degree = degree;
  if (o_point->count()) cfg.seed_point = parse_list(seed_point);
  if (o_rank->count()) cfg.target_rank = target_rank;
  if (o_threads->count()) cfg.threads = threads;
  return cfg;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vec(m.row(i).transpose())));
  return rows;
}

json error_json(ErrorKind kind, const std::string& msg) {
  return json{{"kind", to_string(kind)}, {"message", msg}};
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + "\n";
}

void append(std::vector<std::string>& cells, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(fmt(v[i]));
}

std::vector<std::string> names(const std::string& stem, int count, int first = 1) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(first + i));
  return out;
}

struct Output {
  json doc;
  std::string csv;
  /// Per-entry or whole-command numeric failure.
  bool failed = false;
  json error;  // set for whole-command failures
};

// Everything the commands need, resolved before any computation.
struct Prepared {
  HamiltonianSystem sys;
  PhaseVector seed;
  std::vector<Axis> grid;
  BasisOptions basis;
};

PhaseVector default_anchor(const HamiltonianSystem& sys) {
  const int n = sys.n;
  PhaseVector p = PhaseVector::Zero(2 * n);
  p[0] = 0.3;
  p[n] = 0.3;
  if (n >= 2) p[n + 1] = 0.07;
  for (int j = 2; j < n; ++j) p[n + j] = 0.1;
  return p;
}

std::vector<Axis> default_grid(const std::string& command, int n) {
  std::vector<Axis> g;
  if (command == "sigma" || command == "taylor") {
    g = {{0.02, 0.1, 9}, {-0.04, 0.04, 9}};
  } else {
    g = {{0.05, 0.05, 1}};
    if (n >= 2) g.push_back({0.02, 0.02, 1});
  }
  while (static_cast<int>(g.size()) < n) g.push_back({0.1, 0.1, 1});
  return g;
}

std::vector<RegularValue> grid_values(const std::vector<Axis>& axes) {
  std::vector<RegularValue> out;
  std::vector<int> idx(axes.size(), 0);
  while (true) {
    Vec v(static_cast<Eigen::Index>(axes.size()));
    for (std::size_t k = 0; k < axes.size(); ++k) v[k] = linspace(axes[k].lo, axes[k].hi, axes[k].count)[idx[k]];
    out.emplace_back(v);
    int k = static_cast<int>(axes.size()) - 1;
    while (k >= 0 && ++idx[k] == axes[k].count) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

Prepared prepare(const RunConfig& cfg) {
  validate_config(cfg);
  Prepared p;
  p.sys = system_from_json(cfg.system);
  const int n = p.sys.n;
  if (cfg.seed_point) {
    if (static_cast<int>(cfg.seed_point->size()) != 2 * n)
      config_error("seed point needs " + std::to_string(2 * n) + " coordinates");
    p.seed = Eigen::Map<const Vec>(cfg.seed_point->data(), 2 * n);
  } else {
    p.seed = cfg.command == "classify" ? PhaseVector(PhaseVector::Zero(2 * n)) : default_anchor(p.sys);
  }
  p.grid = cfg.grid.empty() ? default_grid(cfg.command, n) : cfg.grid;
  if (cfg.command != "classify" && cfg.command != "monodromy" && static_cast<int>(p.grid.size()) != n)
    config_error("grid needs one axis per component (" + std::to_string(n) + ")");
  if ((cfg.command == "sigma" || cfg.command == "taylor")) {
    if (n < 2) config_error(cfg.command + " needs n >= 2");
    for (int k = 2; k < n; ++k)
      if (p.grid[k].count != 1) config_error("sigma grids vary only v1 and v2");
  }
  if (cfg.command == "taylor" && (p.grid[0].count < 2 || p.grid[1].count < 2))
    config_error("taylor needs at least two nodes per axis");
  if (cfg.command == "monodromy") {
    if (n < 2) config_error("monodromy needs n >= 2");
    const std::size_t need = static_cast<std::size_t>(n - 2);
    if (!cfg.fixed.empty() && cfg.fixed.size() != need)
      config_error("--fixed needs " + std::to_string(need) + " values");
  }
  if (cfg.command == "classify" && cfg.target_rank >= n) config_error("target rank must be below n");
  p.basis.hit.tol = Tolerances{cfg.rel_tol, cfg.abs_tol};
  return p;
}

Output run_classify(const RunConfig& cfg, const Prepared& p) {
  CriticalPoint cp = find_critical_point(p.sys, p.seed, cfg.target_rank);
  ClassifyOptions co;
  co.seed = cfg.seed;
  williamson_classify(p.sys, cp, co);
  Output o;
  o.doc = {{"command", "classify"},
           {"point", to_json(cp.point)},
           {"rank", cp.rank},
           {"residual", cp.residual},
           {"wtype", {{"k_e", cp.wtype.k_e}, {"k_f", cp.wtype.k_f}, {"k_h", cp.wtype.k_h}, {"k_x", cp.wtype.k_x}}},
           {"degenerate", cp.degenerate}};
  const int n = p.sys.n;
  auto head = names("x", n);
  for (auto& s : names("xi", n)) head.push_back(s);
  for (const char* s : {"rank", "residual", "k_e", "k_f", "k_h", "k_x", "degenerate"}) head.push_back(s);
  std::vector<std::string> row;
  append(row, cp.point);
  for (const auto& s : {std::to_string(cp.rank), fmt(cp.residual), std::to_string(cp.wtype.k_e),
                        std::to_string(cp.wtype.k_f), std::to_string(cp.wtype.k_h), std::to_string(cp.wtype.k_x),
                        std::string(cp.degenerate ? "1" : "0")})
    row.push_back(s);
  o.csv = csv_row(head) + csv_row(row);
  return o;
}

Output run_periods(const RunConfig& cfg, const Prepared& p) {
  GridOptions go;
  go.basis = p.basis;
  go.threads = cfg.threads;
  const auto entries = period_grid(p.sys, grid_values(p.grid), p.seed, go);
  const int n = p.sys.n;
  Output o;
  o.doc = {{"command", "periods"}, {"results", json::array()}};
  auto head = names("v", n);
  for (auto& s : names("tau", n)) head.push_back(s);
  head.push_back("residual");
  for (auto& s : names("a", 2 * n)) head.push_back(s);
  head.push_back("error");
  o.csv = csv_row(head);
  for (const auto& e : entries) {
    std::vector<std::string> row;
    append(row, e.at.v);
    if (e.basis) {
      const auto& b = *e.basis;
      o.doc["results"].push_back({{"v", to_json(e.at.v)},
                                  {"tau", to_json(b.tau())},
                                  {"rows", to_json(b.rows)},
                                  {"residuals", to_json(b.residuals)},
                                  {"anchor", to_json(b.anchor)}});
      append(row, b.tau());
      row.push_back(fmt(b.residuals.maxCoeff()));
      append(row, b.anchor);
      row.emplace_back();
    } else {
      o.failed = true;
      o.doc["results"].push_back({{"v", to_json(e.at.v)}, {"error", error_json(*e.error, e.message)}});
      for (int k = 0; k < 3 * n + 2; ++k) row.emplace_back();
      row.back() = to_string(*e.error);
    }
    o.csv += csv_row(row);
  }
  return o;
}

Output run_action(const RunConfig& cfg, const Prepared& p) {
  GridOptions go;
  go.basis = p.basis;
  go.threads = cfg.threads;
  const auto entries = period_grid(p.sys, grid_values(p.grid), p.seed, go);
  const int n = p.sys.n;
  Output o;
  o.doc = {{"command", "action"}, {"results", json::array()}};
  auto head = names("v", n);
  head.push_back("action");
  for (auto& s : names("tau", n)) head.push_back(s);
  head.push_back("error");
  o.csv = csv_row(head);
  for (const auto& e : entries) {
    std::vector<std::string> row;
    append(row, e.at.v);
    std::optional<ErrorKind> kind = e.error;
    std::string message = e.message;
    if (e.basis) {
      try {
        const double a = action_integral(p.sys, *e.basis, std::nullopt, 0, p.basis.hit.tol);
        o.doc["results"].push_back({{"v", to_json(e.at.v)}, {"action", a}, {"tau", to_json(e.basis->tau())}});
        row.push_back(fmt(a));
        append(row, e.basis->tau());
        row.emplace_back();
      } catch (const Error& err) {
        kind = err.kind();
        message = err.what();
      }
    }
    if (kind) {
      o.failed = true;
      o.doc["results"].push_back({{"v", to_json(e.at.v)}, {"error", error_json(*kind, message)}});
      for (int k = 0; k < n + 1; ++k) row.emplace_back();
      row.push_back(to_string(*kind));
    }
    o.csv += csv_row(row);
  }
  return o;
}

SigmaGrid compute_sigma_grid(const RunConfig& cfg, const Prepared& p) {
  const int n = p.sys.n;
  Vec rest(n - 2);
  for (int k = 2; k < n; ++k) rest[k - 2] = p.grid[k].lo;
  SigmaGridOptions so;
  so.grid.basis = p.basis;
  so.grid.threads = cfg.threads;
  so.branch = LogBranch{cfg.log_cut};
  return sigma_grid(p.sys, linspace(p.grid[0].lo, p.grid[0].hi, p.grid[0].count),
                    linspace(p.grid[1].lo, p.grid[1].hi, p.grid[1].count), rest, p.seed, so);
}

Output run_sigma(const RunConfig& cfg, const Prepared& p) {
  const SigmaGrid g = compute_sigma_grid(cfg, p);
  const int n = p.sys.n;
  Output o;
  o.doc = {{"command", "sigma"}, {"results", json::array()}};
  if (g.size1() >= 3 && g.size2() >= 3)
    o.doc["closedness_defect"] = closedness_defect(g);
  else
    o.doc["closedness_defect"] = nullptr;
  auto head = names("v", n);
  for (auto& s : names("sigma", n)) head.push_back(s);
  o.csv = csv_row(head);
  for (const auto& s : g.samples) {
    o.doc["results"].push_back({{"v", to_json(s.at.v)}, {"sigma", to_json(s.sigma)}});
    std::vector<std::string> row;
    append(row, s.at.v);
    append(row, s.sigma);
    o.csv += csv_row(row);
  }
  return o;
}

Output run_taylor(const RunConfig& cfg, const Prepared& p) {
  const SigmaGrid g = compute_sigma_grid(cfg, p);
  const LogBranch branch{cfg.log_cut};
  SigmaSampler sampler = [&](const Vec& v) {
    return sigma_from_periods(build_period_basis(p.sys, RegularValue(v), p.seed, p.basis), branch);
  };
  int base_j = 0;
  for (int j = 1; j < g.size2(); ++j)
    if (std::abs(g.axis2[j]) < std::abs(g.axis2[base_j])) base_j = j;
  IntegrateOptions io;
  io.branch = branch;
  const SField s = integrate_S(g, sampler, base_j, io);
  const TaylorFit fit = taylor_fit(s, cfg.taylor_degree);
  Output o;
  json coeffs = json::array();
  o.csv = csv_row({"j1", "j2", "value"});
  for (const auto& c : fit.coeffs) {
    coeffs.push_back({{"j1", c.j1}, {"j2", c.j2}, {"value", c.value}});
    o.csv += csv_row({std::to_string(c.j1), std::to_string(c.j2), fmt(c.value)});
  }
  o.doc = {{"command", "taylor"},    {"degree", fit.degree},
           {"coeffs", coeffs},       {"residual", fit.residual},
           {"path_residual", s.path_residual}, {"sigma_origin", to_json(s.sigma_origin)}};
  return o;
}

Output run_monodromy(const RunConfig& cfg, const Prepared& p) {
  LoopSpec loop;
  loop.center = Eigen::Vector2d(cfg.center[0], cfg.center[1]);
  loop.radius = cfg.radius;
  loop.steps = cfg.steps;
  loop.turns = cfg.turns;
  loop.orientation = cfg.clockwise ? -1 : 1;
  loop.fixed = cfg.fixed.empty() ? Vec(Vec::Constant(p.sys.n - 2, 0.1))
                                 : Vec(Eigen::Map<const Vec>(cfg.fixed.data(), p.sys.n - 2));
  const TransportResult t = transport_basis(p.sys, loop, p.seed, p.basis);
  const MonodromyMatrix m = monodromy_matrix(t.transported.front(), t.transported.back());
  Output o;
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    std::vector<int> r(m.entries.cols());
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) {
      r[j] = m.entries(i, j);
      cells.push_back(std::to_string(r[j]));
    }
    rows.push_back(r);
    o.csv += csv_row(cells);
  }
  o.doc = {{"command", "monodromy"},
           {"matrix", rows},
           {"max_rounding_error", m.max_rounding_error},
           {"worst_match_ratio", t.worst_match_ratio},
           {"radius", cfg.radius},
           {"steps", cfg.steps}};
  return o;
}

bool write_text(const std::string& path, const std::string& text, std::ostream& err) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream f(path);
  f << text;
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& err) {
  Prepared p;
  try {
    p = prepare(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Output o;
  try {
    if (cfg.command == "classify") o = run_classify(cfg, p);
    else if (cfg.command == "periods") o = run_periods(cfg, p);
    else if (cfg.command == "action") o = run_action(cfg, p);
    else if (cfg.command == "sigma") o = run_sigma(cfg, p);
    else if (cfg.command == "taylor") o = run_taylor(cfg, p);
    else o = run_monodromy(cfg, p);
  } catch (const Error& e) {
    o = Output{};
    o.failed = true;
    o.error = error_json(e.kind(), e.what());
    o.doc = {{"command", cfg.command}, {"error", o.error}};
  }

  bool ok = true;
  if (cfg.format == "json") {
    ok = write_text(cfg.out, o.doc.dump(2) + "\n", err);
  } else {
    if (!o.csv.empty()) ok = write_text(cfg.out, o.csv, err);
    if (!o.error.is_null()) {
      const std::string record = json{{"command", cfg.command}, {"error", o.error}}.dump(2) + "\n";
      if (cfg.out.empty())
        err << record;
      else
        ok = write_text(cfg.out + ".error.json", record, err) && ok;
    }
  }
  if (o.failed) {
    err << "numeric failure: "
        << (o.error.is_null() ? std::string("see per-entry error records") : o.error["message"].get<std::string>())
        << "\n";
    return 2;
  }
  return ok ? 0 : 2;
}

int cli_main(int argc, const char* const* argv) {
  std::optional<RunConfig> cfg;
  try {
    cfg = parse_command_line(argc, argv, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (!cfg) return 0;
  return run(*cfg, std::cerr);
}

}  // namespace semitoric
