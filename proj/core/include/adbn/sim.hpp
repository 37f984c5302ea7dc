#pragma once

// Ground truth generation, update scheduling and the monitoring loop that
// drives either engine over a trace.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adbn/bp.hpp"
#include "adbn/engine/supernode.hpp"
#include "adbn/ff.hpp"
#include "adbn/model/ctbn.hpp"

namespace adbn::sim {

struct EventTrace {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::size_t num_vars = 0;
  std::size_t num_sensors = 0;
  // Row-major by step: states[step * num_vars + v], sensors likewise.
  std::vector<std::uint8_t> states;
  std::vector<std::uint8_t> sensors;

  std::size_t horizon() const noexcept { return num_vars ? states.size() / num_vars : 0; }
  std::size_t state(std::size_t step, std::size_t var) const { return states[step * num_vars + var]; }
  std::size_t sensor(std::size_t step, std::size_t s) const { return sensors[step * num_sensors + s]; }
  std::vector<std::optional<std::size_t>> readings(std::size_t step) const;
  double time(std::size_t step) const noexcept { return static_cast<double>(step) * dt; }

  friend bool operator==(const EventTrace&, const EventTrace&) = default;
};

// Overrides the sampled value of a state variable at one step.
struct ForcedEvent {
  std::size_t step = 0;
  std::size_t var = 0;
  std::size_t value = 0;
};

// Step 0 is drawn from the initial distributions; every later step advances
// each variable with the dt-discretized transition given the previous step.
// Sensors are sampled at every step. Throws StepTooCoarse if some exit rate
// times dt exceeds 1 and warns above 0.1.
EventTrace generate_trace(const model::CtbnSpec& spec, const model::ObservationModel& obs,
                          double dt, std::size_t horizon, std::uint64_t seed,
                          std::span<const ForcedEvent> forced = {});

// Binary trace file: "ADTR", u32 version, u32 vars, u32 sensors, u64 steps,
// f64 dt, u64 seed, then per step u64 index, vars x u8, sensors x u8.
void write_trace(const EventTrace& trace, const std::filesystem::path& path);
EventTrace read_trace(const std::filesystem::path& path);

struct UpdateEvent {
  std::size_t step = 0;
  std::uint32_t supernode = 0;

  friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

// Events in execution order; steps are nondecreasing.
struct Schedule {
  std::vector<UpdateEvent> events;
};

// Each supernode independently updates with probability p at every step from
// 1 to horizon-1. Supernodes drawn at the same step run one after another in
// a seeded random order.
Schedule schedule_async(std::size_t supernodes, double p, std::size_t horizon, std::uint64_t seed);
// Every supernode, in id order, at steps period, 2*period, ...
Schedule schedule_sync(std::size_t supernodes, std::size_t period, std::size_t horizon);

struct ParityConfig {
  std::size_t history = 0;
  double update_probability = 0.0;
};

// History equal to FF's LBP iterations and mean update interval equal to
// FF's period, so both spend the same expected number of messages.
ParityConfig parity_configure(std::size_t ff_period, std::size_t ff_iters);

struct BeliefRecord {
  std::size_t step = 0;
  std::uint32_t var = 0;
  bp::Vector belief;
  std::uint64_t messages = 0;  // cumulative at the time of the record
};

struct BeliefLog {
  double dt = 0.0;
  std::vector<std::string> var_names;
  std::vector<std::vector<std::string>> labels;
  std::vector<BeliefRecord> records;
  std::uint64_t total_messages = 0;
};

// CSV: time, supernode, one column per state label, message_count.
std::string belief_log_csv(const BeliefLog& log);

struct MonitorOptions {
  // State variables to log; empty logs every variable.
  std::vector<std::size_t> monitored;
  // When set, receives the wall-clock seconds of every supernode update.
  std::vector<double>* update_seconds = nullptr;
};

BeliefLog run_adbn(const std::shared_ptr<const engine::Layout>& layout,
                   const engine::EngineConfig& config, const EventTrace& trace,
                   const Schedule& schedule, const MonitorOptions& options = {});

BeliefLog run_ff(const model::Domain& domain, const ff::FfConfig& config, const EventTrace& trace,
                 const MonitorOptions& options = {});

}  // namespace adbn::sim
