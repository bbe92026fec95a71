#include "twistlap/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "twistlap/common.hpp"
#include "twistlap/experiments.hpp"

namespace twistlap::cli {

namespace ex = twistlap::experiments;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_command(const std::string& name, const std::string& config_file, const std::vector<std::string>& sets,
                const std::vector<std::string>& positional, const std::string& seed_flag, const std::string& out_dir,
                int threads, std::ostream& out) {
  const ex::Experiment& e = ex::find(name);
  // config file < --set and key=value arguments < --seed
  std::map<std::string, std::string> values;
  if (!config_file.empty()) values = ex::parse_config_text(read_file(config_file));
  for (const auto* list : {&sets, &positional})
    for (const auto& s : *list) {
      auto [k, v] = ex::parse_assignment(s);
      values[k] = v;
    }
  std::uint64_t seed = 1;
  if (auto it = values.find("seed"); it != values.end()) {
    seed = ex::parse_seed(it->second);
    values.erase(it);
  }
  if (!seed_flag.empty()) seed = ex::parse_seed(seed_flag);
  if (threads < 1) throw ConfigError("--threads must be >= 1");

  const ex::Config cfg = ex::resolve(e, values, seed);
  ex::RunOptions opt;
  opt.out_dir = out_dir;
  opt.threads = threads;
  const ex::RunOutcome r = ex::run(e, cfg, opt);
  for (const auto& c : r.report.checks)
    out << (c.pass ? "PASS " : "FAIL ") << (c.criterion.empty() ? "-" : c.criterion) << ' ' << c.name << ": "
        << c.detail << '\n';
  for (const auto& f : r.files) out << "wrote " << out_dir << '/' << f << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", r.seconds);
  out << e.name << " finished in " << buf << " s (seed " << seed << ")\n";
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Twisted Laplacian and Hermite operator experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the registered experiments");

  auto* describe = app.add_subcommand("describe", "Show an experiment's parameters and defaults as JSON");
  std::string describe_name;
  describe->add_option("experiment", describe_name, "Experiment name")->required();

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV tables, a JSON report and a manifest");
  std::string run_name, config_file, seed_flag, out_dir = "out";
  std::vector<std::string> sets, positional;
  int threads = 1;
  run->add_option("experiment", run_name, "Experiment name")->required();
  run->add_option("params", positional, "key=value parameter overrides");
  run->add_option("--config", config_file, "File of key=value lines");
  run->add_option("--set", sets, "key=value override (repeatable)");
  run->add_option("--seed", seed_flag, "Random seed (overrides any seed key)");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--threads", threads, "Worker threads (recorded; runs are single threaded)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  }

  try {
    if (*list) {
      for (const auto& e : ex::registry())
        out << e.name << '\t' << (e.criterion.empty() ? "-" : e.criterion) << '\t' << e.summary << '\n';
      return kOk;
    }
    if (*describe) {
      out << ex::describe(ex::find(describe_name)).dump(2) << '\n';
      return kOk;
    }
    return run_command(run_name, config_file, sets, positional, seed_flag, out_dir, threads, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const NonConvergence& e) {
    err << "error: no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace twistlap::cli
