// adbn: run fire-monitoring experiments, check input files, emit traces and
// exact small-instance cross-checks.
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "adbn/error.hpp"
#include "adbn/harness.hpp"
#include "adbn/model/domain_io.hpp"
#include "adbn/model/fire.hpp"
#include "adbn/sim.hpp"

namespace fs = std::filesystem;
using namespace adbn;

namespace {

constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

int cmd_run(const std::string& config_path, const std::string& output, bool quiet) {
  const auto cfg = harness::load_experiment_config(config_path);
  harness::RunOptions opt;
  if (!output.empty()) opt.output_override = fs::path(output);
  const auto result = harness::run_experiment(cfg, opt);
  if (!quiet) {
    std::cout << harness::summary_csv(result);
    std::cerr << "wrote " << opt.output_override.value_or(cfg.output).string() << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& path, const std::string& kind) {
  if (kind == "domain") {
    const auto d = model::load_domain_file(path);
    std::cout << "ok: " << d.spec.size() << " state variables, " << d.observations.size() << " sensors\n";
  } else if (kind == "params") {
    const auto p = model::load_fire_params_file(path);
    p.validate();
    std::cout << "ok: fire parameters\n";
  } else if (kind == "topology") {
    const auto t = model::load_topology_file(path);
    if (!t.connected()) throw Error(Errc::TopologyError, "topology is not connected");
    std::cout << "ok: " << t.size() << " rooms, " << t.edges.size() << " connections, " << t.bridge_count()
              << " single-path connections\n";
  } else {
    const auto c = harness::load_experiment_config(path);
    harness::build_domain(c);
    std::cout << "ok: experiment '" << c.name << "', " << c.variants.size() << " variants, " << c.seeds.size()
              << " seeds\n";
  }
  return 0;
}

int cmd_trace(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& output) {
  const auto cfg = harness::load_experiment_config(config_path);
  const auto fire = harness::build_domain(cfg);
  const auto s = seed.value_or(*std::min_element(cfg.seeds.begin(), cfg.seeds.end()));
  const auto trace = harness::make_trace(cfg, fire, s);
  sim::write_trace(trace, output);
  std::cerr << "wrote " << trace.horizon() << " steps for seed " << s << " to " << output << "\n";
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::string& output) {
  const auto cfg = harness::load_experiment_config(config_path);
  const auto csv = harness::oracle_csv(harness::run_oracle(cfg));
  if (output.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(output, std::ios::binary);
    out << csv;
    if (!out) throw Error(Errc::IoError, "cannot write " + output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous DBN monitoring experiments"};
  app.require_subcommand(1);

  std::string config, output, path, kind = "domain";
  bool quiet = false;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run an experiment config and write its CSV outputs");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("-o,--output", output, "Output directory (overrides the config)");
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* validate = app.add_subcommand("validate", "Check a domain, parameter, topology or experiment file");
  validate->add_option("file", path, "File to check")->required();
  validate->add_option("-t,--type", kind, "domain (default), params, topology or config")
      ->check(CLI::IsMember({"domain", "params", "topology", "config"}));

  auto* trace = app.add_subcommand("trace", "Generate the ground-truth trace of one seed");
  trace->add_option("config", config, "Experiment config (JSON)")->required();
  trace->add_option("-s,--seed", seed, "Seed (default: the smallest configured seed)");
  trace->add_option("-o,--output", output, "Trace file to write")->required();

  auto* oracle = app.add_subcommand("oracle", "Exact filtering on a small instance next to each variant");
  oracle->add_option("config", config, "Experiment config (JSON)")->required();
  oracle->add_option("-o,--output", output, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }

  try {
    if (*run) return cmd_run(config, output, quiet);
    if (*validate) return cmd_validate(path, kind);
    if (*trace) return cmd_trace(config, seed, output);
    if (*oracle) return cmd_oracle(config, output);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? kInvalid : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return 0;
}
