#include "adbn/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "adbn/engine/layout.hpp"
#include "adbn/error.hpp"
#include "adbn/ff.hpp"
#include "adbn/log.hpp"
#include "adbn/text.hpp"
#include "json.hpp"

namespace adbn::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::size_t> EvalGrid::steps() const {
  std::vector<std::size_t> out(points);
  for (std::size_t i = 0; i < points; ++i) out[i] = first + i * stride;
  return out;
}

double MetricSeries::window_mean() const {
  if (nll.empty()) return 0.0;
  return std::accumulate(nll.begin(), nll.end(), 0.0) / static_cast<double>(nll.size());
}

MetricSeries nll_metric(const sim::BeliefLog& log, const sim::EventTrace& trace,
                        std::span<const std::size_t> vars, const EvalGrid& grid) {
  // Records per monitored variable, in log order (steps nondecreasing).
  std::map<std::size_t, std::vector<const sim::BeliefRecord*>> by_var;
  for (std::size_t v : vars) by_var[v];
  for (const auto& r : log.records) {
    auto it = by_var.find(r.var);
    if (it != by_var.end()) it->second.push_back(&r);
  }

  MetricSeries out;
  std::size_t skipped = 0;
  for (std::size_t step : grid.steps()) {
    if (step >= trace.horizon()) throw Error(Errc::ConfigError, "evaluation step beyond the trace");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t v : vars) {
      const auto& recs = by_var[v];
      auto it = std::upper_bound(recs.begin(), recs.end(), step,
                                 [](std::size_t s, const sim::BeliefRecord* r) { return s < r->step; });
      if (it == recs.begin()) {
        ++skipped;
        continue;
      }
      const auto& belief = (*std::prev(it))->belief;
      sum += -std::log(std::max(belief.at(trace.state(step, v)), kBeliefFloor));
      ++used;
    }
    if (used == 0) {
      throw Error(Errc::NoBeliefYet, "no variable has a belief at step " + std::to_string(step));
    }
    out.steps.push_back(step);
    out.times.push_back(trace.time(step));
    out.nll.push_back(sum / static_cast<double>(used));
    out.half_width.push_back(0.0);
  }
  if (skipped) warn(std::to_string(skipped) + " variable/time pairs had no belief yet and were skipped");
  return out;
}

double ci_half_width(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return t * sd / std::sqrt(static_cast<double>(n));
}

double paired_t_less(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(Errc::ConfigError, "paired test needs two equal samples of size >= 2");
  }
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  if (se == 0.0) return mean < 0.0 ? 0.0 : 1.0;
  boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::cdf(dist, mean / se);
}

MetricSeries aggregate(std::span<const MetricSeries> per_seed) {
  if (per_seed.empty()) throw Error(Errc::ConfigError, "nothing to aggregate");
  MetricSeries out;
  out.steps = per_seed.front().steps;
  out.times = per_seed.front().times;
  out.seeds = per_seed.size();
  std::vector<double> column(per_seed.size());
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    for (std::size_t s = 0; s < per_seed.size(); ++s) {
      if (per_seed[s].steps != out.steps) throw Error(Errc::ConfigError, "series grids differ");
      column[s] = per_seed[s].nll[i];
    }
    out.nll.push_back(std::accumulate(column.begin(), column.end(), 0.0) /
                      static_cast<double>(column.size()));
    out.half_width.push_back(ci_half_width(column));
  }
  return out;
}

// ---------------------------------------------------------------------------
// configuration

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw Error(Errc::SchemaError, where + ": unknown key '" + it.key() + "'");
    }
  }
  for (auto k : required) {
    if (!obj.contains(std::string(k))) {
      throw Error(Errc::SchemaError, where + ": missing key '" + std::string(k) + "'");
    }
  }
}

std::size_t count_field(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw Error(Errc::SchemaError, where + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

double number_field(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(Errc::SchemaError, where + ": expected a number");
  return j.get<double>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

bool is_selector(const std::string& s) {
  return s == "desk12" || s == "rooms58" || s.rfind("line:", 0) == 0;
}

struct Parity {
  std::size_t period = 0;
  std::size_t iters = 0;
};

Variant parse_variant(const json& j, const std::optional<Parity>& parity, std::size_t index) {
  const std::string where = "variants[" + std::to_string(index) + "]";
  require_keys(j,
               {"label", "engine", "history", "update_probability", "report_offset", "approach",
                "local_sweeps", "period", "lbp_iters"},
               {"label", "engine"}, where);
  Variant v;
  if (!j["label"].is_string()) throw Error(Errc::SchemaError, where + ".label: expected a string");
  v.label = j["label"].get<std::string>();
  static const std::regex label_re("[A-Za-z0-9_.+=-]+");
  if (!std::regex_match(v.label, label_re)) {
    throw Error(Errc::ConfigError, where + ": label may only use letters, digits and _.+=-");
  }
  const std::string engine = j["engine"].is_string() ? j["engine"].get<std::string>() : "";
  if (engine == "adbn") {
    v.engine = EngineKind::Adbn;
    for (auto k : {"period", "lbp_iters"}) {
      if (j.contains(k)) throw Error(Errc::SchemaError, where + ": '" + k + "' applies to ff only");
    }
    if (parity) {
      const auto pc = sim::parity_configure(parity->period, parity->iters);
      v.history = pc.history;
      v.update_probability = pc.update_probability;
    } else if (!j.contains("history") || !j.contains("update_probability")) {
      throw Error(Errc::ConfigError, where + ": history and update_probability needed without a parity block");
    }
    if (j.contains("history")) v.history = count_field(j["history"], where + ".history");
    if (j.contains("update_probability")) {
      v.update_probability = number_field(j["update_probability"], where + ".update_probability");
    }
    if (!(v.update_probability > 0.0 && v.update_probability <= 1.0)) {
      throw Error(Errc::ConfigError, where + ": update_probability must lie in (0, 1]");
    }
    v.report_offset = 1;
    if (j.contains("report_offset")) {
      const auto& r = j["report_offset"];
      if (r.is_string() && r.get<std::string>() == "oldest") {
        if (v.history == 0) throw Error(Errc::ConfigError, where + ": 'oldest' needs a bounded history");
        v.report_offset = v.history - 1;
      } else {
        v.report_offset = count_field(r, where + ".report_offset");
      }
    }
    if (v.history != 0 && v.report_offset >= v.history) {
      throw Error(Errc::ConfigError, where + ": report_offset must be below history");
    }
    if (j.contains("approach")) {
      const auto a = count_field(j["approach"], where + ".approach");
      if (a != 1 && a != 2) throw Error(Errc::ConfigError, where + ": approach must be 1 or 2");
      v.approach = a == 1 ? engine::Approach::One : engine::Approach::Two;
    }
    if (j.contains("local_sweeps")) v.local_sweeps = count_field(j["local_sweeps"], where + ".local_sweeps");
  } else if (engine == "ff") {
    v.engine = EngineKind::Ff;
    for (auto k : {"history", "update_probability", "report_offset", "approach", "local_sweeps"}) {
      if (j.contains(k)) throw Error(Errc::SchemaError, where + ": '" + k + "' applies to adbn only");
    }
    if (parity) {
      v.period = parity->period;
      v.lbp_iters = parity->iters;
    } else if (!j.contains("period") || !j.contains("lbp_iters")) {
      throw Error(Errc::ConfigError, where + ": period and lbp_iters needed without a parity block");
    }
    if (j.contains("period")) v.period = count_field(j["period"], where + ".period");
    if (j.contains("lbp_iters")) v.lbp_iters = count_field(j["lbp_iters"], where + ".lbp_iters");
    if (v.period == 0 || v.lbp_iters == 0) {
      throw Error(Errc::ConfigError, where + ": period and lbp_iters must be positive");
    }
  } else {
    throw Error(Errc::ConfigError, where + ": engine must be \"adbn\" or \"ff\"");
  }
  return v;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("experiment config: ") + e.what());
  }
  require_keys(j,
               {"name", "topology", "params", "dt", "horizon", "ignition", "evaluation", "seeds",
                "parity", "variants", "output", "write_beliefs"},
               {"name", "seeds", "variants", "output"}, "config");
  ExperimentConfig c;
  c.canonical = j.dump();
  if (!j["name"].is_string()) throw Error(Errc::SchemaError, "config.name: expected a string");
  c.name = j["name"].get<std::string>();

  if (j.contains("topology")) {
    if (!j["topology"].is_string()) throw Error(Errc::SchemaError, "config.topology: expected a string");
    c.topology = j["topology"].get<std::string>();
    if (!is_selector(c.topology)) {
      const fs::path p = resolve(base_dir, c.topology);
      if (!fs::exists(p)) throw Error(Errc::ConfigError, "topology file not found: " + p.string());
      c.topology = p.string();
    }
  }
  if (j.contains("params")) {
    if (!j["params"].is_string()) throw Error(Errc::SchemaError, "config.params: expected a string");
    c.params = resolve(base_dir, j["params"].get<std::string>());
    if (!fs::exists(*c.params)) throw Error(Errc::ConfigError, "params file not found: " + c.params->string());
  }
  if (j.contains("dt")) c.dt = number_field(j["dt"], "config.dt");
  if (!(c.dt > 0.0)) throw Error(Errc::ConfigError, "dt must be positive");
  if (j.contains("horizon")) c.horizon = count_field(j["horizon"], "config.horizon");
  if (c.horizon < 2) throw Error(Errc::ConfigError, "horizon must be at least 2 steps");

  if (j.contains("ignition")) {
    require_keys(j["ignition"], {"room", "step"}, {"room", "step"}, "config.ignition");
    c.ignition = Ignition{count_field(j["ignition"]["room"], "ignition.room"),
                          count_field(j["ignition"]["step"], "ignition.step")};
    if (c.ignition->step >= c.horizon) throw Error(Errc::ConfigError, "ignition step beyond the horizon");
  }
  c.grid.first = c.ignition ? c.ignition->step : 0;
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    require_keys(e, {"first", "stride", "points"}, {"points"}, "config.evaluation");
    if (e.contains("first")) c.grid.first = count_field(e["first"], "evaluation.first");
    if (e.contains("stride")) c.grid.stride = count_field(e["stride"], "evaluation.stride");
    c.grid.points = count_field(e["points"], "evaluation.points");
  } else {
    c.grid.points = (c.horizon - 1 - c.grid.first) / c.grid.stride + 1;
  }
  if (c.grid.stride == 0 || c.grid.points == 0) throw Error(Errc::ConfigError, "empty evaluation grid");
  if (c.grid.first + (c.grid.points - 1) * c.grid.stride >= c.horizon) {
    throw Error(Errc::ConfigError, "evaluation grid runs past the horizon");
  }

  const auto& seeds = j["seeds"];
  if (seeds.is_array()) {
    for (const auto& s : seeds) c.seeds.push_back(count_field(s, "config.seeds"));
  } else if (seeds.is_object()) {
    require_keys(seeds, {"first", "count"}, {"first", "count"}, "config.seeds");
    const auto first = count_field(seeds["first"], "seeds.first");
    const auto count = count_field(seeds["count"], "seeds.count");
    for (std::size_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
  } else {
    throw Error(Errc::SchemaError, "config.seeds: expected an array or {first, count}");
  }
  if (c.seeds.empty()) throw Error(Errc::ConfigError, "seed list is empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw Error(Errc::ConfigError, "seed list has duplicates");
  }

  std::optional<Parity> parity;
  if (j.contains("parity")) {
    require_keys(j["parity"], {"ff_period", "ff_iters"}, {"ff_period", "ff_iters"}, "config.parity");
    parity = Parity{count_field(j["parity"]["ff_period"], "parity.ff_period"),
                    count_field(j["parity"]["ff_iters"], "parity.ff_iters")};
  }
  if (!j["variants"].is_array() || j["variants"].empty()) {
    throw Error(Errc::ConfigError, "config.variants: expected a nonempty array");
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < j["variants"].size(); ++i) {
    c.variants.push_back(parse_variant(j["variants"][i], parity, i));
    if (!labels.insert(c.variants.back().label).second) {
      throw Error(Errc::ConfigError, "duplicate variant label '" + c.variants.back().label + "'");
    }
  }

  if (!j["output"].is_string()) throw Error(Errc::SchemaError, "config.output: expected a string");
  c.output = resolve(base_dir, j["output"].get<std::string>());
  if (j.contains("write_beliefs")) {
    if (!j["write_beliefs"].is_boolean()) throw Error(Errc::SchemaError, "config.write_beliefs: expected a boolean");
    c.write_beliefs = j["write_beliefs"].get<bool>();
  }

  // Cheap structural checks that need the topology.
  const auto topo = resolve_topology(c.topology);
  if (c.ignition && c.ignition->room >= topo.size()) {
    throw Error(Errc::ConfigError, "ignition room out of range");
  }
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

model::Topology rooms58_topology() {
  using K = model::TopologyBlock::Kind;
  const model::TopologyBlock blocks[] = {
      {K::Loop, 10, 0},     {K::Corridor, 5, 2}, {K::Loop, 8, 14},    {K::Corridor, 4, 7},
      {K::Loop, 12, 5},     {K::Corridor, 6, 20}, {K::Loop, 6, 33},   {K::Corridor, 7, 48},
  };
  return model::generate_topology(blocks);
}

model::Topology resolve_topology(const std::string& selector) {
  if (selector == "desk12") return model::desk12_topology();
  if (selector == "rooms58") return rooms58_topology();
  if (selector.rfind("line:", 0) == 0) {
    std::size_t n = 0;
    try {
      n = std::stoul(selector.substr(5));
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "bad topology selector '" + selector + "'");
    }
    if (n == 0) throw Error(Errc::ConfigError, "line topology needs at least one room");
    return model::line_topology(n);
  }
  return model::load_topology_file(selector);
}

model::FireDomain build_domain(const ExperimentConfig& config) {
  const auto params = config.params ? model::load_fire_params_file(*config.params) : model::default_fire_params();
  return model::build_fire_domain(resolve_topology(config.topology), params);
}

sim::EventTrace make_trace(const ExperimentConfig& config, const model::FireDomain& fire,
                           std::uint64_t seed) {
  std::vector<sim::ForcedEvent> forced;
  if (config.ignition) forced.push_back({config.ignition->step, fire.fire_vars.at(config.ignition->room), 1});
  return sim::generate_trace(fire.domain.spec, fire.domain.observations, config.dt, config.horizon, seed, forced);
}

std::uint64_t schedule_seed(std::uint64_t trace_seed) {
  // splitmix64 finalizer, so schedule and trace streams are unrelated.
  std::uint64_t z = trace_seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

VariantRun run_variant(const Variant& variant, const model::FireDomain& fire,
                       const sim::EventTrace& trace, const EvalGrid& grid) {
  sim::MonitorOptions monitor;
  monitor.monitored = fire.fire_vars;
  VariantRun out;
  if (variant.engine == EngineKind::Adbn) {
    auto layout = std::make_shared<const engine::Layout>(engine::Layout::per_variable(fire.domain));
    engine::EngineConfig ec;
    ec.history = variant.history;
    ec.report_offset = variant.report_offset;
    ec.approach = variant.approach;
    ec.local_sweeps = variant.local_sweeps;
    const auto schedule = sim::schedule_async(layout->size(), variant.update_probability, trace.horizon(),
                                              schedule_seed(trace.seed));
    out.log = sim::run_adbn(layout, ec, trace, schedule, monitor);
  } else {
    out.log = sim::run_ff(fire.domain, ff::FfConfig{variant.period, variant.lbp_iters}, trace, monitor);
  }
  out.messages = out.log.total_messages;
  out.metric = nll_metric(out.log, trace, fire.fire_vars, grid);
  return out;
}

const VariantResult& ExperimentResult::variant(std::string_view label) const {
  for (const auto& v : variants) {
    if (v.variant.label == label) return v;
  }
  throw Error(Errc::ConfigError, "no variant labelled '" + std::string(label) + "'");
}

// ---------------------------------------------------------------------------
// output

namespace {

std::string series_csv(const MetricSeries& m) {
  std::string out = "step,time,nll\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += std::to_string(m.steps[i]) + ',' + format_number(m.times[i]) + ',' + format_number(m.nll[i]) + '\n';
  }
  return out;
}

std::string engine_name(EngineKind k) { return k == EngineKind::Adbn ? "adbn" : "ff"; }

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

std::vector<double> window_means(const VariantResult& v) {
  std::vector<double> out;
  for (const auto& s : v.per_seed) out.push_back(s.window_mean());
  return out;
}

}  // namespace

std::string aggregate_csv(const ExperimentResult& result) {
  std::string out = "variant,step,time,mean_nll,ci_half_width,seeds\n";
  for (const auto& v : result.variants) {
    const auto& m = v.mean;
    for (std::size_t i = 0; i < m.size(); ++i) {
      out += v.variant.label + ',' + std::to_string(m.steps[i]) + ',' + format_number(m.times[i]) + ',' +
             format_number(m.nll[i]) + ',' + format_number(m.half_width[i]) + ',' + std::to_string(m.seeds) + '\n';
    }
  }
  return out;
}

std::string summary_csv(const ExperimentResult& result) {
  std::string out = "variant,engine,seeds,window_mean_nll,ci_half_width,mean_messages\n";
  for (const auto& v : result.variants) {
    const auto means = window_means(v);
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
    const double msgs = std::accumulate(v.messages.begin(), v.messages.end(), 0.0) /
                        static_cast<double>(v.messages.size());
    out += v.variant.label + ',' + engine_name(v.variant.engine) + ',' + std::to_string(means.size()) + ',' +
           format_number(mean) + ',' + format_number(ci_half_width(means)) + ',' + format_number(msgs) + '\n';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_json(const ExperimentResult& result) {
  const auto& c = result.config;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(c.canonical)));
  json m;
  m["name"] = c.name;
  m["config_hash"] = std::string("fnv1a64:") + hash;
  m["seeds"] = c.seeds;
  m["topology"] = c.topology == "desk12" || c.topology == "rooms58" || c.topology.rfind("line:", 0) == 0
                      ? c.topology
                      : fs::path(c.topology).filename().string();
  m["dt"] = c.dt;
  m["horizon"] = c.horizon;
  m["evaluation"] = {{"first", c.grid.first}, {"stride", c.grid.stride}, {"points", c.grid.points}};
  json vs = json::array();
  for (const auto& v : result.variants) {
    json e;
    e["label"] = v.variant.label;
    e["engine"] = engine_name(v.variant.engine);
    if (v.variant.engine == EngineKind::Adbn) {
      e["history"] = v.variant.history;
      e["update_probability"] = v.variant.update_probability;
      e["report_offset"] = v.variant.report_offset;
      e["approach"] = static_cast<int>(v.variant.approach);
    } else {
      e["period"] = v.variant.period;
      e["lbp_iters"] = v.variant.lbp_iters;
    }
    e["messages"] = v.messages;
    vs.push_back(std::move(e));
  }
  m["variants"] = std::move(vs);
  return m.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto fire = build_domain(config);
  ExperimentResult result{config, {}};
  for (const auto& v : config.variants) result.variants.push_back({v, {}, {}, {}});

  const fs::path output = options.output_override.value_or(config.output);
  fs::path staging;
  if (options.write) {
    if (output.empty()) throw Error(Errc::ConfigError, "no output directory");
    staging = output;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);
  }
  try {
    // Sorted by seed so the written files do not depend on list order.
    std::vector<std::uint64_t> seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());
    result.config.seeds = seeds;
    for (std::uint64_t seed : seeds) {
      const auto trace = make_trace(config, fire, seed);
      for (auto& vr : result.variants) {
        auto run = run_variant(vr.variant, fire, trace, config.grid);
        if (options.write) {
          const auto dir = staging / "per_seed" / vr.variant.label;
          write_file(dir / ("seed_" + std::to_string(seed) + ".csv"), series_csv(run.metric));
          if (config.write_beliefs) {
            write_file(staging / "beliefs" / vr.variant.label / ("seed_" + std::to_string(seed) + ".csv"),
                       sim::belief_log_csv(run.log));
          }
        }
        vr.per_seed.push_back(std::move(run.metric));
        vr.messages.push_back(run.messages);
      }
    }
    for (auto& vr : result.variants) vr.mean = aggregate(vr.per_seed);

    if (options.write) {
      write_file(staging / "aggregate.csv", aggregate_csv(result));
      write_file(staging / "summary.csv", summary_csv(result));
      std::string messages = "variant,seed,messages\n";
      for (const auto& vr : result.variants) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          messages += vr.variant.label + ',' + std::to_string(seeds[i]) + ',' + std::to_string(vr.messages[i]) + '\n';
        }
      }
      write_file(staging / "messages.csv", messages);
      write_file(staging / "manifest.json", manifest_json(result));
      fs::remove_all(output);
      if (!output.parent_path().empty()) fs::create_directories(output.parent_path());
      fs::rename(staging, output);
    }
  } catch (...) {
    if (options.write) {
      std::error_code ec;
      fs::remove_all(staging, ec);
    }
    throw;
  }
  return result;
}

// ---------------------------------------------------------------------------
// exact reference

sim::BeliefLog exact_filter(const model::Domain& domain, const sim::EventTrace& trace,
                            std::size_t max_states) {
  const auto& spec = domain.spec;
  const std::size_t n = spec.size();
  if (trace.num_vars != n || trace.num_sensors != domain.observations.size()) {
    throw Error(Errc::DomainMismatch, "trace does not match the domain");
  }
  std::vector<std::size_t> cards(n);
  std::size_t states = 1;
  for (std::size_t v = 0; v < n; ++v) {
    cards[v] = spec.cardinality(v);
    if (states > max_states / cards[v]) {
      throw Error(Errc::TooLarge, "joint state space exceeds " + std::to_string(max_states));
    }
    states *= cards[v];
  }
  auto decode = [&](std::size_t idx) {
    std::vector<std::size_t> x(n);
    for (std::size_t v = n; v-- > 0;) {
      x[v] = idx % cards[v];
      idx /= cards[v];
    }
    return x;
  };
  std::vector<std::vector<std::size_t>> joint(states);
  for (std::size_t i = 0; i < states; ++i) joint[i] = decode(i);

  const auto dbn = model::discretize(spec, domain.observations, trace.dt);
  // T[i * states + j] = P(x' = j | x = i) as the product of per-variable rows.
  std::vector<double> T(states * states);
  std::vector<std::size_t> pv;
  for (std::size_t i = 0; i < states; ++i) {
    const auto& x = joint[i];
    std::vector<std::span<const double>> rows(n);
    for (std::size_t v = 0; v < n; ++v) {
      pv.assign(1, x[v]);
      for (std::size_t p : spec.parents[v]) pv.push_back(x[p]);
      rows[v] = dbn.transitions[v].row(dbn.transitions[v].row_index(pv));
    }
    for (std::size_t j = 0; j < states; ++j) {
      double prob = 1.0;
      for (std::size_t v = 0; v < n && prob != 0.0; ++v) prob *= rows[v][joint[j][v]];
      T[i * states + j] = prob;
    }
  }

  std::vector<double> alpha(states, 1.0);
  for (std::size_t i = 0; i < states; ++i) {
    for (std::size_t v = 0; v < n; ++v) alpha[i] *= spec.variables[v].initial[joint[i][v]];
  }

  sim::BeliefLog log;
  log.dt = trace.dt;
  for (const auto& var : spec.variables) {
    log.var_names.push_back(var.name);
    log.labels.push_back(var.states);
  }
  std::vector<double> next(states);
  for (std::size_t step = 1; step < trace.horizon(); ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < states; ++i) {
      if (alpha[i] == 0.0) continue;
      const double* row = &T[i * states];
      for (std::size_t j = 0; j < states; ++j) next[j] += alpha[i] * row[j];
    }
    double total = 0.0;
    for (std::size_t j = 0; j < states; ++j) {
      for (std::size_t s = 0; s < domain.observations.size(); ++s) {
        const auto& sensor = domain.observations.sensors[s];
        pv.clear();
        for (std::size_t p : sensor.parents) pv.push_back(joint[j][p]);
        next[j] *= sensor.cpt(trace.sensor(step, s), sensor.cpt.row_index(pv));
      }
      total += next[j];
    }
    if (!(total > 0.0)) throw Error(Errc::ZeroBelief, "evidence has zero probability at step " + std::to_string(step));
    for (double& a : next) a /= total;
    alpha.swap(next);
    for (std::size_t v = 0; v < n; ++v) {
      bp::Vector m(cards[v], 0.0);
      for (std::size_t i = 0; i < states; ++i) m[joint[i][v]] += alpha[i];
      log.records.push_back({step, static_cast<std::uint32_t>(v), std::move(m), 0});
    }
  }
  return log;
}

OracleResult run_oracle(const ExperimentConfig& config) {
  const auto fire = build_domain(config);
  const auto trace = make_trace(config, fire, *std::min_element(config.seeds.begin(), config.seeds.end()));
  OracleResult out;
  out.exact = nll_metric(exact_filter(fire.domain, trace), trace, fire.fire_vars, config.grid);
  for (const auto& v : config.variants) {
    out.engines.emplace_back(v.label, run_variant(v, fire, trace, config.grid).metric);
  }
  return out;
}

std::string oracle_csv(const OracleResult& result) {
  std::string out = "step,time,exact";
  for (const auto& [label, _] : result.engines) out += ',' + label;
  out += '\n';
  for (std::size_t i = 0; i < result.exact.size(); ++i) {
    out += std::to_string(result.exact.steps[i]) + ',' + format_number(result.exact.times[i]) + ',' +
           format_number(result.exact.nll[i]);
    for (const auto& [label, m] : result.engines) out += ',' + format_number(m.nll[i]);
    out += '\n';
  }
  return out;
}

}  // namespace adbn::harness
