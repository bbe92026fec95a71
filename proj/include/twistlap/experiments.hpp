#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace twistlap::experiments {

// Flat key=value parameters after defaults, config file and overrides have been merged.
class Config {
 public:
  Config() = default;
  Config(std::string experiment, std::map<std::string, std::string> values, std::uint64_t seed);

  const std::string& experiment() const { return experiment_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;  // accepts inf
  bool flag(const std::string& key) const;    // true/false/1/0
  std::vector<int> integers(const std::string& key) const;    // comma separated
  std::vector<double> reals(const std::string& key) const;    // comma separated
  // comma separated a:b pairs
  std::vector<std::pair<double, double>> pairs(const std::string& key) const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
  std::uint64_t seed_ = 1;
};

// Parsing helpers shared with the command line; throw ConfigError.
double parse_real(const std::string& key, const std::string& text);
int parse_int(const std::string& key, const std::string& text);
std::uint64_t parse_seed(const std::string& text);
// key=value lines, '#' comments and blank lines ignored, later lines win.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::pair<std::string, std::string> parse_assignment(const std::string& text);

struct Check {
  std::string criterion;  // "AC1".."AC11", empty for checks outside the acceptance list
  std::string name;
  bool pass = false;
  std::string detail;
};

// Receives each table as soon as it is complete, so partial results survive a later failure.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual void table(const std::string& name, const std::string& csv) = 0;
};

struct Report {
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<Check> checks;
};

struct ParamSpec {
  std::string key, default_value, help;
};

struct Experiment {
  std::string name;
  std::string criterion;  // acceptance criterion reproduced by this experiment, or empty
  std::string summary;
  double budget_seconds = 0;  // runtime budget of the criterion, 0 when none
  std::vector<ParamSpec> params;
  std::function<Report(const Config&, Sink&)> run;
};

// Sorted by name.
const std::vector<Experiment>& registry();
// Throws ConfigError listing the registered names.
const Experiment& find(const std::string& name);
// Defaults overlaid with `overrides`; unknown keys throw ConfigError.
Config resolve(const Experiment& e, const std::map<std::string, std::string>& overrides, std::uint64_t seed);
nlohmann::ordered_json describe(const Experiment& e);

struct RunOptions {
  std::string out_dir = "out";
  int threads = 1;  // recorded; the experiments run on one thread
};

struct RunOutcome {
  Report report;
  std::vector<std::string> files;  // written, relative to out_dir
  std::string status = "ok";        // ok or non_convergence
  double seconds = 0;
};

// Runs the experiment and writes <name>.<table>.csv, <name>.report.json and <name>.manifest.json atomically.
// On NonConvergence the tables written so far and a manifest with status non_convergence are kept and the
// exception is rethrown.
RunOutcome run(const Experiment& e, const Config& cfg, const RunOptions& opt);

// 64-bit FNV-1a of a byte string, used for manifests and the determinism check.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace twistlap::experiments
