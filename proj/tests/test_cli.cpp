#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "twistlap/cli.hpp"
#include "twistlap/common.hpp"
#include "twistlap/experiments.hpp"

using namespace twistlap;
namespace ex = twistlap::experiments;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "twistlap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("twistlap_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("config text parsing") {
  const auto m = ex::parse_config_text("# comment\n\n a = 1 \nb=x,y\na=2\r\n");
  CHECK(m.size() == 2);
  CHECK(m.at("a") == "2");
  CHECK(m.at("b") == "x,y");
  CHECK_THROWS_AS(ex::parse_config_text("a=1\nnot an assignment\n"), ConfigError);
  try {
    ex::parse_config_text("a=1\nbroken\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ex::parse_assignment("=3"), ConfigError);
  CHECK(ex::parse_assignment("k=a=b").second == "a=b");
}

TEST_CASE("config value accessors") {
  const ex::Config c("x", {{"r", "0.5"}, {"p", "inf"}, {"l", "1, 2,3"}, {"q", "3:8,5:0.25"}, {"f", "true"},
                           {"bad", "1.5x"}, {"nan", "nan"}},
                     9);
  CHECK(c.real("r") == 0.5);
  CHECK(std::isinf(c.real("p")));
  CHECK(c.integers("l") == std::vector<int>{1, 2, 3});
  CHECK(c.reals("l") == std::vector<double>{1, 2, 3});
  REQUIRE(c.pairs("q").size() == 2);
  CHECK(c.pairs("q")[1] == std::pair<double, double>{5, 0.25});
  CHECK(c.flag("f"));
  CHECK(c.seed() == 9);
  CHECK_THROWS_AS(c.real("bad"), ConfigError);
  CHECK_THROWS_AS(c.real("nan"), ConfigError);
  CHECK_THROWS_AS(c.integer("r"), ConfigError);
  CHECK_THROWS_AS(c.flag("r"), ConfigError);
  CHECK_THROWS_AS(c.pairs("l"), ConfigError);
  CHECK_THROWS_AS(c.str("missing"), ConfigError);
  CHECK(ex::parse_seed("18446744073709551615") == 18446744073709551615ull);
  CHECK_THROWS_AS(ex::parse_seed("-1"), ConfigError);
  CHECK_THROWS_AS(ex::parse_seed("18446744073709551616"), ConfigError);
}

TEST_CASE("registry is sorted and resolvable") {
  const auto& r = ex::registry();
  REQUIRE(r.size() >= 11);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].name < r[i].name);
  std::set<std::string> crit;
  for (const auto& e : r) {
    if (!e.criterion.empty()) crit.insert(e.criterion);
    const ex::Config c = ex::resolve(e, {}, 1);
    CHECK(c.values().size() == e.params.size());
  }
  for (int i = 1; i <= 11; ++i) CHECK(crit.count("AC" + std::to_string(i)) == 1);
  CHECK_THROWS_AS(ex::resolve(ex::find("lower-set"), {{"nope", "1"}}, 1), ConfigError);
}

TEST_CASE("list and describe") {
  const Result l = invoke({"list"});
  CHECK(l.code == cli::kOk);
  std::istringstream in(l.out);
  std::string line, prev;
  int n = 0;
  while (std::getline(in, line)) {
    const std::string name = line.substr(0, line.find('\t'));
    CHECK(prev < name);
    prev = name;
    ++n;
  }
  CHECK(n == int(ex::registry().size()));

  const Result d = invoke({"describe", "lower-set"});
  REQUIRE(d.code == cli::kOk);
  const auto j = nlohmann::json::parse(d.out);
  CHECK(j["name"] == "lower-set");
  CHECK(j["criterion"] == "AC6");
  bool found = false;
  for (const auto& p : j["parameters"])
    if (p["key"] == "threshold_factor") {
      CHECK(p["default"] == "0.25");
      found = true;
    }
  CHECK(found);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("unknown names are configuration errors") {
  const Result r = invoke({"run", "no-such-experiment"});
  CHECK(r.code == cli::kBadConfig);
  CHECK(r.err.find("critical-exponents") != std::string::npos);
  CHECK(r.err.find("trace-sweep") != std::string::npos);
  CHECK(invoke({"describe", "no-such-experiment"}).code == cli::kBadConfig);
  const fs::path dir = fresh_dir("unknown");
  const Result k = invoke({"run", "lower-set", "nope=1", "--out", dir.string()});
  CHECK(k.code == cli::kBadConfig);
  CHECK(k.err.find("threshold_factor") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "lower-set.manifest.json"));
  CHECK(invoke({"frobnicate"}).code == cli::kBadConfig);
  CHECK(invoke({}).code == cli::kBadConfig);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("codes");
  CHECK(invoke({"run", "critical-exponents", "tol=abc", "--out", dir.string()}).code == cli::kBadConfig);
  CHECK(invoke({"run", "critical-exponents", "--threads", "0", "--out", dir.string()}).code == cli::kBadConfig);
  CHECK(invoke({"run", "critical-exponents", "--seed", "x", "--out", dir.string()}).code == cli::kBadConfig);
  CHECK(invoke({"run", "critical-exponents", "--config", (dir / "missing.cfg").string(), "--out", dir.string()}).code ==
        cli::kBadConfig);
  // precondition violation inside the experiment
  CHECK(invoke({"run", "trace-sweep", "mu_step=0", "--out", dir.string()}).code == cli::kBadConfig);
  // failing checks still complete the run
  const Result f = invoke({"run", "lower-set", "mu=41", "--out", dir.string()});
  CHECK(f.code == cli::kOk);
  CHECK(f.out.find("FAIL AC6 lower_set_measure") != std::string::npos);
  CHECK(json_file(dir / "lower-set.report.json")["checks"][0]["pass"] == false);
}

TEST_CASE("configuration precedence") {
  const fs::path dir = fresh_dir("precedence");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# file values\ntol=1e-9\nseed=5\n";
  const std::string out = dir.string();

  REQUIRE(invoke({"run", "critical-exponents", "--config", cfg.string(), "--out", out}).code == 0);
  auto m = json_file(dir / "critical-exponents.manifest.json");
  CHECK(m["config"]["tol"] == "1e-9");
  CHECK(m["seed"] == 5);

  REQUIRE(invoke({"run", "critical-exponents", "--config", cfg.string(), "--set", "tol=1e-8", "--out", out}).code == 0);
  CHECK(json_file(dir / "critical-exponents.manifest.json")["config"]["tol"] == "1e-8");

  REQUIRE(invoke({"run", "critical-exponents", "--config", cfg.string(), "--set", "tol=1e-8", "tol=1e-7", "--seed", "11",
               "--threads", "3", "--out", out})
              .code == 0);
  m = json_file(dir / "critical-exponents.manifest.json");
  CHECK(m["config"]["tol"] == "1e-7");
  CHECK(m["seed"] == 11);
  CHECK(m["threads"] == 3);
  const auto rep = json_file(dir / "critical-exponents.report.json");
  CHECK(rep["seed"] == 11);
  const std::string csv = slurp(dir / "critical-exponents.identities.csv");
  CHECK(csv.rfind("# experiment=critical-exponents seed=11\n", 0) == 0);
}

TEST_CASE("manifest lists every file with its hash") {
  const fs::path dir = fresh_dir("manifest");
  REQUIRE(invoke({"run", "lower-set", "--out", dir.string()}).code == 0);
  const auto m = json_file(dir / "lower-set.manifest.json");
  CHECK(m["status"] == "ok");
  REQUIRE(m["files"].size() == 2);
  for (const auto& f : m["files"]) {
    const std::string bytes = slurp(dir / f["file"].get<std::string>());
    CHECK(f["bytes"] == bytes.size());
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)ex::fnv1a(bytes));
    CHECK(f["fnv1a64"] == hex);
  }
  CHECK(ex::fnv1a("") == 14695981039346656037ull);
  CHECK(ex::fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("reruns are byte identical") {
  for (const std::string name : {"critical-exponents", "lower-set", "eigen-checks"}) {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    REQUIRE(invoke({"run", name, "--out", a.string(), "--seed", "3"}).code == 0);
    REQUIRE(invoke({"run", name, "--out", b.string(), "--seed", "3"}).code == 0);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(a)) files.push_back(e.path().filename().string());
    CHECK(files.size() >= 3);
    for (const auto& f : files) {
      INFO(name << " " << f);
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }
}

TEST_CASE("non-convergence keeps partial output") {
  ex::Experiment e{"partial", "", "writes one table then fails", 0, {}, [](const ex::Config&, ex::Sink& s) -> ex::Report {
                     s.table("first", "x\n1\n");
                     throw NonConvergence("quadrature did not settle");
                   }};
  const fs::path dir = fresh_dir("partial");
  ex::RunOptions opt;
  opt.out_dir = dir.string();
  CHECK_THROWS_AS(ex::run(e, ex::Config("partial", {}, 4), opt), NonConvergence);
  CHECK(slurp(dir / "partial.first.csv") == "# experiment=partial seed=4\nx\n1\n");
  const auto m = json_file(dir / "partial.manifest.json");
  CHECK(m["status"] == "non_convergence");
  CHECK(m["message"] == "quadrature did not settle");
  CHECK(m["files"].size() == 1);
  CHECK_FALSE(fs::exists(dir / "partial.report.json"));
}
