#include "adbn/sim.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "adbn/error.hpp"
#include "adbn/log.hpp"
#include "adbn/text.hpp"

namespace adbn::sim {

std::vector<std::optional<std::size_t>> EventTrace::readings(std::size_t step) const {
  std::vector<std::optional<std::size_t>> out(num_sensors);
  for (std::size_t s = 0; s < num_sensors; ++s) out[s] = sensor(step, s);
  return out;
}

namespace {

std::size_t sample(std::span<const double> p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (x < acc) return i;
  }
  return last;
}

}  // namespace

EventTrace generate_trace(const model::CtbnSpec& spec, const model::ObservationModel& obs,
                          double dt, std::size_t horizon, std::uint64_t seed,
                          std::span<const ForcedEvent> forced) {
  if (horizon == 0) throw Error(Errc::DomainMismatch, "trace horizon must be positive");
  double max_rate = 0.0;
  for (const auto& cims : spec.cims) {
    for (const auto& q : cims) max_rate = std::max(max_rate, q.max_exit_rate());
  }
  if (max_rate * dt > 1.0) {
    throw Error(Errc::StepTooCoarse, "generating step too coarse: max rate * dt = " +
                                         format_number(max_rate * dt));
  }
  if (max_rate * dt > 0.1) warn("generating step is coarse: max rate * dt = " + format_number(max_rate * dt));

  const model::TwoSliceDbn dbn = model::discretize(spec, obs, dt);
  const std::size_t V = spec.size();
  const std::size_t S = obs.size();
  for (const auto& f : forced) {
    if (f.var >= V || f.value >= spec.cardinality(f.var)) {
      throw Error(Errc::DomainMismatch, "forced event out of range");
    }
  }

  EventTrace t;
  t.dt = dt;
  t.seed = seed;
  t.num_vars = V;
  t.num_sensors = S;
  t.states.resize(horizon * V);
  t.sensors.resize(horizon * S);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> values;

  for (std::size_t step = 0; step < horizon; ++step) {
    std::uint8_t* now = t.states.data() + step * V;
    for (std::size_t v = 0; v < V; ++v) {
      if (step == 0) {
        now[v] = static_cast<std::uint8_t>(sample(spec.variables[v].initial, rng));
        continue;
      }
      const std::uint8_t* prev = now - V;
      values.assign(1, prev[v]);
      for (std::size_t p : spec.parents[v]) values.push_back(prev[p]);
      const auto& cpt = dbn.transitions[v];
      now[v] = static_cast<std::uint8_t>(sample(cpt.row(cpt.row_index(values)), rng));
    }
    for (const auto& f : forced) {
      if (f.step == step) now[f.var] = static_cast<std::uint8_t>(f.value);
    }
    for (std::size_t s = 0; s < S; ++s) {
      const auto& sensor = obs.sensors[s];
      values.clear();
      for (std::size_t p : sensor.parents) values.push_back(now[p]);
      t.sensors[step * S + s] =
          static_cast<std::uint8_t>(sample(sensor.cpt.row(sensor.cpt.row_index(values)), rng));
    }
  }
  return t;
}

namespace {

constexpr char kMagic[4] = {'A', 'D', 'T', 'R'};
constexpr std::uint32_t kTraceVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  const std::size_t n = std::is_same_v<T, double> ? 8 : sizeof(T);
  for (std::size_t i = 0; i < n; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <class T>
T get(std::istream& in) {
  const std::size_t n = std::is_same_v<T, double> ? 8 : sizeof(T);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = in.get();
    if (c == EOF) throw Error(Errc::ParseError, "truncated trace file");
    bits |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * i);
  }
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_trace(const EventTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kTraceVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.num_vars));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.num_sensors));
  put<std::uint64_t>(out, trace.horizon());
  put<double>(out, trace.dt);
  put<std::uint64_t>(out, trace.seed);
  for (std::size_t step = 0; step < trace.horizon(); ++step) {
    put<std::uint64_t>(out, step);
    out.write(reinterpret_cast<const char*>(trace.states.data() + step * trace.num_vars),
              static_cast<std::streamsize>(trace.num_vars));
    out.write(reinterpret_cast<const char*>(trace.sensors.data() + step * trace.num_sensors),
              static_cast<std::streamsize>(trace.num_sensors));
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

EventTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw Error(Errc::ParseError, path.string() + ": not a trace file");
  }
  if (get<std::uint32_t>(in) != kTraceVersion) throw Error(Errc::ParseError, "unsupported trace version");
  EventTrace t;
  t.num_vars = get<std::uint32_t>(in);
  t.num_sensors = get<std::uint32_t>(in);
  const auto steps = get<std::uint64_t>(in);
  t.dt = get<double>(in);
  t.seed = get<std::uint64_t>(in);
  t.states.resize(steps * t.num_vars);
  t.sensors.resize(steps * t.num_sensors);
  for (std::uint64_t step = 0; step < steps; ++step) {
    if (get<std::uint64_t>(in) != step) throw Error(Errc::ParseError, "trace steps out of order");
    in.read(reinterpret_cast<char*>(t.states.data() + step * t.num_vars),
            static_cast<std::streamsize>(t.num_vars));
    in.read(reinterpret_cast<char*>(t.sensors.data() + step * t.num_sensors),
            static_cast<std::streamsize>(t.num_sensors));
    if (!in) throw Error(Errc::ParseError, "truncated trace file");
  }
  return t;
}

Schedule schedule_async(std::size_t supernodes, double p, std::size_t horizon, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::ScheduleError, "update probability must be in (0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  Schedule s;
  std::vector<std::uint32_t> drawn;
  for (std::size_t step = 1; step < horizon; ++step) {
    drawn.clear();
    for (std::size_t n = 0; n < supernodes; ++n) {
      if (coin(rng)) drawn.push_back(static_cast<std::uint32_t>(n));
    }
    std::shuffle(drawn.begin(), drawn.end(), rng);
    for (std::uint32_t n : drawn) s.events.push_back({step, n});
  }
  return s;
}

Schedule schedule_sync(std::size_t supernodes, std::size_t period, std::size_t horizon) {
  if (period == 0) throw Error(Errc::ScheduleError, "period must be at least one step");
  Schedule s;
  for (std::size_t step = period; step < horizon; step += period) {
    for (std::size_t n = 0; n < supernodes; ++n) s.events.push_back({step, static_cast<std::uint32_t>(n)});
  }
  return s;
}

ParityConfig parity_configure(std::size_t ff_period, std::size_t ff_iters) {
  if (ff_period == 0 || ff_iters == 0) {
    throw Error(Errc::ConfigError, "FF period and iterations must be positive");
  }
  return {ff_iters, 1.0 / static_cast<double>(ff_period)};
}

std::string belief_log_csv(const BeliefLog& log) {
  std::set<std::uint32_t> vars;
  for (const auto& r : log.records) vars.insert(r.var);
  std::vector<std::string> header;
  std::size_t width = 0;
  bool shared = true;
  for (std::uint32_t v : vars) {
    width = std::max(width, log.labels.at(v).size());
    shared = shared && log.labels.at(v) == log.labels.at(*vars.begin());
  }
  if (shared && !vars.empty()) {
    header = log.labels.at(*vars.begin());
  } else {
    for (std::size_t i = 0; i < width; ++i) header.push_back("s" + std::to_string(i));
  }
  std::ostringstream out;
  out << "time,supernode";
  for (const auto& h : header) out << ',' << h;
  out << ",message_count\n";
  for (const auto& r : log.records) {
    out << format_number(static_cast<double>(r.step) * log.dt) << ',' << log.var_names.at(r.var);
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << ',';
      if (i < r.belief.size()) out << format_number(r.belief[i]);
    }
    out << ',' << r.messages << '\n';
  }
  return out.str();
}

namespace {

BeliefLog empty_log(const model::CtbnSpec& spec, double dt) {
  BeliefLog log;
  log.dt = dt;
  for (const auto& v : spec.variables) {
    log.var_names.push_back(v.name);
    log.labels.push_back(v.states);
  }
  return log;
}

std::vector<bool> monitored_mask(const MonitorOptions& options, std::size_t vars) {
  std::vector<bool> mask(vars, options.monitored.empty());
  for (std::size_t v : options.monitored) mask.at(v) = true;
  return mask;
}

}  // namespace

BeliefLog run_adbn(const std::shared_ptr<const engine::Layout>& layout,
                   const engine::EngineConfig& config, const EventTrace& trace,
                   const Schedule& schedule, const MonitorOptions& options) {
  if (trace.num_vars != layout->num_state_vars() ||
      trace.num_sensors != layout->domain().observations.size()) {
    throw Error(Errc::DomainMismatch, "trace does not match the domain");
  }
  auto supernodes = engine::make_supernodes(layout, config);
  std::vector<std::vector<engine::Communication>> pending(supernodes.size());
  const auto mask = monitored_mask(options, layout->num_state_vars());
  BeliefLog log = empty_log(layout->spec(), trace.dt);

  for (const auto& ev : schedule.events) {
    if (ev.step >= trace.horizon()) throw Error(Errc::ScheduleError, "schedule runs past the trace");
    if (ev.supernode >= supernodes.size()) throw Error(Errc::ScheduleError, "unknown supernode in schedule");
    std::vector<engine::Communication> inbox = std::move(pending[ev.supernode]);
    pending[ev.supernode].clear();
    const auto readings = trace.readings(ev.step);
    const auto start = std::chrono::steady_clock::now();
    engine::UpdateResult r = supernodes[ev.supernode].update(trace.time(ev.step), readings, inbox);
    if (options.update_seconds) {
      options.update_seconds->push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    log.total_messages += r.messages;
    for (auto& c : r.outgoing) pending[c.recipient].push_back(std::move(c));
    for (auto& rep : r.reports) {
      if (mask[rep.var]) {
        log.records.push_back({ev.step, static_cast<std::uint32_t>(rep.var), std::move(rep.belief),
                               log.total_messages});
      }
    }
  }
  return log;
}

BeliefLog run_ff(const model::Domain& domain, const ff::FfConfig& config, const EventTrace& trace,
                 const MonitorOptions& options) {
  if (trace.num_vars != domain.spec.size() || trace.num_sensors != domain.observations.size()) {
    throw Error(Errc::DomainMismatch, "trace does not match the domain");
  }
  std::vector<std::vector<std::optional<std::size_t>>> observations;
  observations.reserve(trace.horizon());
  for (std::size_t step = 0; step < trace.horizon(); ++step) observations.push_back(trace.readings(step));
  const auto mask = monitored_mask(options, domain.spec.size());
  BeliefLog log = empty_log(domain.spec, trace.dt);
  for (auto& tick : ff::ff_run(domain, trace.dt, observations, config)) {
    for (std::size_t v = 0; v < tick.marginals.size(); ++v) {
      if (mask[v]) {
        log.records.push_back({tick.step, static_cast<std::uint32_t>(v), tick.marginals[v], tick.messages});
      }
    }
    log.total_messages = tick.messages;
  }
  return log;
}

}  // namespace adbn::sim
