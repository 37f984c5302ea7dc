#pragma once

// Metrics and experiment definitions for the fire-monitoring runs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adbn/engine/plan.hpp"
#include "adbn/model/fire.hpp"
#include "adbn/sim.hpp"

namespace adbn::harness {

inline constexpr double kBeliefFloor = 1e-12;

// Evaluation steps first, first + stride, ... (points of them).
struct EvalGrid {
  std::size_t first = 0;
  std::size_t stride = 10;
  std::size_t points = 0;

  std::vector<std::size_t> steps() const;
};

struct MetricSeries {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> nll;
  // 95% confidence half-widths; zeros for a single seed.
  std::vector<double> half_width;
  std::size_t seeds = 1;

  std::size_t size() const noexcept { return steps.size(); }
  double window_mean() const;
};

// Mean over `vars` of -ln max(b[true state], 1e-12), using each variable's
// latest record at or before the evaluation step. Variables with no record
// yet are skipped with a warning; throws NoBeliefYet when none has one.
MetricSeries nll_metric(const sim::BeliefLog& log, const sim::EventTrace& trace,
                        std::span<const std::size_t> vars, const EvalGrid& grid);

// Pointwise mean and Student-t 95% half-width across seeds. All series must
// share the same grid.
MetricSeries aggregate(std::span<const MetricSeries> per_seed);

// Half-width of a 95% two-sided confidence interval for the mean of xs.
double ci_half_width(std::span<const double> xs);

// One-sided paired t-test of mean(a - b) < 0; returns the p-value.
double paired_t_less(std::span<const double> a, std::span<const double> b);

enum class EngineKind { Adbn, Ff };

struct Variant {
  std::string label;
  EngineKind engine = EngineKind::Adbn;
  // ADBN
  std::size_t history = 2;
  double update_probability = 0.02;
  std::size_t report_offset = 1;
  engine::Approach approach = engine::Approach::One;
  std::size_t local_sweeps = 5;
  // FF
  std::size_t period = 50;
  std::size_t lbp_iters = 2;
};

struct Ignition {
  std::size_t room = 0;
  std::size_t step = 0;
};

struct ExperimentConfig {
  std::string name;
  std::string topology = "desk12";  // desk12, rooms58, line:<n> or a file path
  std::optional<std::filesystem::path> params;
  double dt = 0.01;
  std::size_t horizon = 2500;
  std::optional<Ignition> ignition;
  EvalGrid grid;  // grid.first defaults to the ignition step
  std::vector<std::uint64_t> seeds;
  std::vector<Variant> variants;
  std::filesystem::path output;
  bool write_beliefs = false;
  // Canonical JSON text of the parsed config, hashed into the manifest.
  std::string canonical;
};

// Relative paths resolve against base_dir. Throws ConfigError or SchemaError.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

model::Topology resolve_topology(const std::string& selector);
// 58 rooms in loops and corridors; a stand-in for a floor plan of that size.
model::Topology rooms58_topology();
model::FireDomain build_domain(const ExperimentConfig& config);

// The trace for one seed, with the ignition forced when configured.
sim::EventTrace make_trace(const ExperimentConfig& config, const model::FireDomain& fire,
                           std::uint64_t seed);

std::uint64_t schedule_seed(std::uint64_t trace_seed);

struct VariantRun {
  MetricSeries metric;
  std::uint64_t messages = 0;
  sim::BeliefLog log;
};

VariantRun run_variant(const Variant& variant, const model::FireDomain& fire,
                       const sim::EventTrace& trace, const EvalGrid& grid);

struct VariantResult {
  Variant variant;
  std::vector<MetricSeries> per_seed;  // in config seed order
  std::vector<std::uint64_t> messages;
  MetricSeries mean;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<VariantResult> variants;

  const VariantResult& variant(std::string_view label) const;
};

struct RunOptions {
  // Write the output directory (through a temporary sibling, renamed on
  // success). Off returns results only.
  bool write = true;
  std::optional<std::filesystem::path> output_override;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string aggregate_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result);
std::string manifest_json(const ExperimentResult& result);

std::uint64_t fnv1a64(std::string_view bytes);

// Exact filtering over the joint state of the discretized model; for small
// domains only (TooLarge above max_states joint states). Records every
// variable at every step from 1 on.
sim::BeliefLog exact_filter(const model::Domain& domain, const sim::EventTrace& trace,
                            std::size_t max_states = 4096);

struct OracleResult {
  MetricSeries exact;
  std::vector<std::pair<std::string, MetricSeries>> engines;
};

// Runs the exact filter and every configured variant on the first seed.
OracleResult run_oracle(const ExperimentConfig& config);
std::string oracle_csv(const OracleResult& result);

}  // namespace adbn::harness
