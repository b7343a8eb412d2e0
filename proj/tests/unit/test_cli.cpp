#include "semitoric/cli.hpp"
#include "semitoric/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace semitoric;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "semitoric_cli_test";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig parse(std::vector<const char*> args) {
  args.insert(args.begin(), "semitoric");
  std::ostringstream help;
  auto cfg = parse_command_line(static_cast<int>(args.size()), args.data(), help);
  REQUIRE(cfg.has_value());
  return *cfg;
}

int exit_code(const std::vector<const char*>& args) {
  try {
    const RunConfig cfg = parse(args);
    std::ostringstream err;
    return run(cfg, err);
  } catch (const Error& e) {
    return e.kind() == ErrorKind::Config ? 1 : -1;
  }
}

}  // namespace

TEST_CASE("grid and list parsing") {
  const auto g = parse_grid("0.02:0.1:9,-0.04:0.04:5");
  REQUIRE(g.size() == 2);
  CHECK(g[1].lo == -0.04);
  CHECK(g[1].count == 5);
  CHECK(parse_list("1,-2.5").size() == 2);
  CHECK_THROWS_AS(parse_grid("0:1"), Error);
  CHECK_THROWS_AS(parse_list("1,x"), Error);
}

TEST_CASE("system specs") {
  CHECK(system_from_json(resolve_system_argument("champagne_bottle")).n == 2);
  const auto q = system_from_json(json::parse(R"({"type":"q_model","blocks":[{"kind":"E","multiplicity":2},{"kind":"FF"}]})"));
  CHECK(q.n == 4);
  const auto p = system_from_json(json::parse(R"({"type":"product","base":{"type":"champagne_bottle"},"k":1})"));
  CHECK(p.n == 3);
  const auto r = system_from_json(
      json::parse(R"({"type":"reparam","base":{"type":"champagne_bottle"},"g":{"kind":"linear","matrix":[[1,1],[0,1]]}})"));
  CHECK(r.n == 2);
  CHECK_THROWS_AS(system_from_json(json::parse(R"({"type":"champagne_bottle","extra":1})")), Error);
  CHECK_THROWS_AS(resolve_system_argument("{not json"), Error);
}

TEST_CASE("classify through the command line") {
  const fs::path out = scratch_dir() / "classify.json";
  const auto cfg = parse({"classify", "--system", "champagne_bottle", "--seed-point", "0.01,-0.02,0.005,0.01", "--out",
                          out.c_str()});
  std::ostringstream err;
  REQUIRE(run(cfg, err) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc["wtype"]["k_f"] == 1);
  CHECK(doc["wtype"]["k_e"] == 0);
  CHECK(doc["rank"] == 0);
  for (const auto& x : doc["point"]) CHECK(std::abs(x.get<double>()) < 1e-8);
}

TEST_CASE("monodromy through the command line") {
  const fs::path out = scratch_dir() / "mono.json";
  const auto cfg =
      parse({"monodromy", "--system", "champagne_bottle", "--radius", "0.05", "--steps", "64", "--out", out.c_str()});
  std::ostringstream err;
  REQUIRE(run(cfg, err) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc["matrix"] == json::parse("[[1,1],[0,1]]"));
}

TEST_CASE("config errors exit 1 and write nothing") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "never.json";
  fs::remove(out);
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ \"command\": ";
  CHECK(exit_code({"--config", bad.c_str(), "--out", out.c_str()}) == 1);
  const fs::path unknown = dir / "unknown.json";
  std::ofstream(unknown) << R"({"command":"periods","system":"champagne_bottle","bogus":1})";
  CHECK(exit_code({"--config", unknown.c_str(), "--out", out.c_str()}) == 1);
  CHECK(exit_code({"periods", "--system", "champagne_bottle", "--rel-tol", "-1", "--out", out.c_str()}) == 1);
  CHECK(exit_code({"periods", "--system", "{\"type\":", "--out", out.c_str()}) == 1);
  CHECK(exit_code({"explode", "--system", "champagne_bottle", "--out", out.c_str()}) == 1);
  CHECK(exit_code({"monodromy", "--system", "champagne_bottle", "--steps", "4", "--out", out.c_str()}) == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("config file with flag override") {
  const fs::path dir = scratch_dir();
  const fs::path cfg_file = dir / "run.json";
  std::ofstream(cfg_file) << R"({"command":"periods","system":"champagne_bottle","grid":"0.05:0.05:1,0.02:0.02:1","format":"json"})";
  const auto cfg = parse({"--config", cfg_file.c_str(), "--format", "csv"});
  CHECK(cfg.command == "periods");
  CHECK(cfg.format == "csv");
  CHECK(cfg.grid.size() == 2);
}

TEST_CASE("numeric failure exits 2 with an error record") {
  const fs::path out = scratch_dir() / "crit.json";
  const auto cfg = parse({"periods", "--system", "champagne_bottle", "--grid", "0:0:1,0:0:1", "--out", out.c_str()});
  std::ostringstream err;
  CHECK(run(cfg, err) == 2);
  const json doc = json::parse(slurp(out));
  CHECK(doc["results"][0]["error"]["kind"] == "not_regular");
}

TEST_CASE("csv output and determinism") {
  const fs::path dir = scratch_dir();
  const fs::path a = dir / "a.csv", b = dir / "b.csv";
  for (const auto& p : {a, b}) {
    const auto cfg = parse({"periods", "--system", "champagne_bottle", "--grid", "0.03:0.06:2,0.01:0.02:2", "--format",
                            "csv", "--out", p.c_str()});
    std::ostringstream err;
    REQUIRE(run(cfg, err) == 0);
  }
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  std::istringstream lines(text);
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("v1,v2,tau1,tau2", 0) == 0);
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("taylor on the normalized benchmark") {
  const fs::path out = scratch_dir() / "taylor.json";
  const auto cfg = parse({"taylor", "--system", "champagne_bottle_normalized", "--taylor-degree", "2", "--threads", "4",
                          "--out", out.c_str()});
  std::ostringstream err;
  REQUIRE(run(cfg, err) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc["coeffs"].size() == 5);
  CHECK(doc["path_residual"].get<double>() < 1e-3);
}
