#include "adbn/model/fire.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "adbn/error.hpp"
#include "json.hpp"

namespace adbn::model {

using nlohmann::json;

std::vector<std::size_t> Topology::neighbors(std::size_t room) const {
  std::vector<std::size_t> out;
  for (const auto& [a, b] : edges) {
    if (a == room) out.push_back(b);
    if (b == room) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Topology::connected() const {
  if (rooms.empty()) return false;
  std::vector<bool> seen(rooms.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t r = stack.back();
    stack.pop_back();
    for (std::size_t n : neighbors(r)) {
      if (!seen[n]) {
        seen[n] = true;
        stack.push_back(n);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

std::size_t Topology::bridge_count() const {
  std::size_t bridges = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    Topology without = *this;
    without.edges.erase(without.edges.begin() + static_cast<std::ptrdiff_t>(e));
    if (!without.connected()) ++bridges;
  }
  return bridges;
}

Topology parse_topology(std::string_view text) {
  Topology t;
  std::map<std::string, std::size_t> ids;
  auto id_of = [&](const std::string& name) {
    auto [it, inserted] = ids.emplace(name, t.rooms.size());
    if (inserted) t.rooms.push_back(name);
    return it->second;
  };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw Error(Errc::ParseError, "topology line " + std::to_string(lineno) +
                                        ": expected exactly two room identifiers");
    }
    if (a == b) throw Error(Errc::TopologyError, "self-loop on room " + a);
    const std::size_t ia = id_of(a);
    const std::size_t ib = id_of(b);
    t.edges.emplace_back(ia, ib);
  }
  return t;
}

Topology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

std::string format_topology(const Topology& topology) {
  std::string out;
  for (const auto& [a, b] : topology.edges) {
    out += topology.rooms[a] + " " + topology.rooms[b] + "\n";
  }
  return out;
}

Topology generate_topology(std::span<const TopologyBlock> blocks) {
  Topology t;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& block = blocks[bi];
    if (block.rooms == 0) throw Error(Errc::TopologyError, "empty topology block");
    if (block.kind == TopologyBlock::Kind::Loop && block.rooms < 3) {
      throw Error(Errc::TopologyError, "a loop block needs at least 3 rooms");
    }
    const std::size_t first = t.rooms.size();
    if (bi > 0 && block.attach >= first) {
      throw Error(Errc::TopologyError, "block attaches to a room that does not exist yet");
    }
    for (std::size_t i = 0; i < block.rooms; ++i) t.rooms.push_back("R" + std::to_string(first + i));
    if (bi > 0) t.edges.emplace_back(block.attach, first);
    for (std::size_t i = 1; i < block.rooms; ++i) t.edges.emplace_back(first + i - 1, first + i);
    if (block.kind == TopologyBlock::Kind::Loop) t.edges.emplace_back(first + block.rooms - 1, first);
  }
  return t;
}

Topology line_topology(std::size_t rooms) {
  const TopologyBlock block{TopologyBlock::Kind::Corridor, rooms, 0};
  return generate_topology(std::span(&block, 1));
}

Topology desk12_topology() {
  const TopologyBlock blocks[] = {
      {TopologyBlock::Kind::Loop, 8, 0},
      {TopologyBlock::Kind::Corridor, 4, 0},
  };
  return generate_topology(blocks);
}

double FireParams::ignition_rate(std::size_t burning_neighbors) const {
  if (ignition.empty()) return 0.0;
  return ignition[std::min(burning_neighbors, ignition.size() - 1)];
}

void FireParams::validate() const {
  if (ignition.empty()) throw Error(Errc::ParamError, "ignition rates missing");
  for (std::size_t k = 0; k < ignition.size(); ++k) {
    if (!(ignition[k] >= 0.0)) throw Error(Errc::ParamError, "negative ignition rate");
    if (k > 0 && ignition[k] < ignition[k - 1]) {
      throw Error(Errc::ParamError,
                  "ignition rate must not decrease with the number of burning neighbours");
    }
  }
  for (double r : {burn_out, sensor_failure, sensor_repair, outside_warming, outside_cooling}) {
    if (!(r >= 0.0)) throw Error(Errc::ParamError, "negative rate");
  }
  if (sensor_working.size() != 3) throw Error(Errc::ParamError, "sensor_working needs 3 rows");
}

FireParams default_fire_params() {
  FireParams p;
  p.ignition = {0.001, 0.35, 0.6, 0.8};
  p.burn_out = 0.02;
  p.temp_no_fire_mild = {{-0.02, 0.02, 0.0}, {1.0, -1.0, 0.0}, {0.0, 2.0, -2.0}};
  p.temp_no_fire_warm = {{-0.1, 0.1, 0.0}, {0.6, -0.6, 0.0}, {0.0, 2.0, -2.0}};
  p.temp_fire_mild = {{-2.0, 2.0, 0.0}, {0.05, -1.55, 1.5}, {0.0, 0.1, -0.1}};
  p.temp_fire_warm = {{-2.5, 2.5, 0.0}, {0.02, -2.02, 2.0}, {0.0, 0.05, -0.05}};
  p.sensor_failure = 0.01;
  p.sensor_repair = 0.01;
  p.outside_warming = 0.05;
  p.outside_cooling = 0.05;
  p.sensor_working = {{0.85, 0.1, 0.05}, {0.1, 0.8, 0.1}, {0.05, 0.15, 0.8}};
  p.sensor_broken = {0.34, 0.33, 0.33};
  p.fire_initial = {0.999, 0.001};
  p.temp_initial = {0.97, 0.025, 0.005};
  p.broken_initial = {0.98, 0.02};
  p.outside_initial = {0.7, 0.3};
  return p;
}

namespace {

json matrix_json(const linalg::Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

linalg::Matrix matrix_from(const json& j, const std::string& where) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.size() != 3) throw Error(Errc::ParamError, where + ": expected a 3x3 matrix");
  linalg::Matrix m(3, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    if (rows[r].size() != 3) throw Error(Errc::ParamError, where + ": expected a 3x3 matrix");
    for (std::size_t c = 0; c < 3; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw Error(Errc::SchemaError, where + ": unknown key '" + it.key() + "'");
    }
  }
  for (auto k : allowed) {
    if (!obj.contains(std::string(k))) {
      throw Error(Errc::SchemaError, where + ": missing key '" + std::string(k) + "'");
    }
  }
}

linalg::IntensityMatrix intensity(linalg::Matrix m, const std::string& what) {
  try {
    return linalg::validate_intensity(std::move(m));
  } catch (const Error& e) {
    throw Error(Errc::ParamError, what + ": " + e.what());
  }
}

}  // namespace

FireParams parse_fire_params(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  try {
    check_keys(doc,
               {"ignition", "burn_out", "temperature", "sensor_failure", "sensor_repair",
                "outside_warming", "outside_cooling", "sensor_working", "sensor_broken", "initial"},
               "fire params");
    check_keys(doc.at("temperature"), {"no_fire_mild", "no_fire_warm", "fire_mild", "fire_warm"},
               "temperature");
    check_keys(doc.at("initial"), {"fire", "temp", "broken", "outside"}, "initial");
    FireParams p;
    p.ignition = doc.at("ignition").get<std::vector<double>>();
    p.burn_out = doc.at("burn_out").get<double>();
    const auto& t = doc.at("temperature");
    p.temp_no_fire_mild = matrix_from(t.at("no_fire_mild"), "no_fire_mild");
    p.temp_no_fire_warm = matrix_from(t.at("no_fire_warm"), "no_fire_warm");
    p.temp_fire_mild = matrix_from(t.at("fire_mild"), "fire_mild");
    p.temp_fire_warm = matrix_from(t.at("fire_warm"), "fire_warm");
    p.sensor_failure = doc.at("sensor_failure").get<double>();
    p.sensor_repair = doc.at("sensor_repair").get<double>();
    p.outside_warming = doc.at("outside_warming").get<double>();
    p.outside_cooling = doc.at("outside_cooling").get<double>();
    p.sensor_working = doc.at("sensor_working").get<std::vector<std::vector<double>>>();
    p.sensor_broken = doc.at("sensor_broken").get<std::vector<double>>();
    const auto& init = doc.at("initial");
    p.fire_initial = init.at("fire").get<std::vector<double>>();
    p.temp_initial = init.at("temp").get<std::vector<double>>();
    p.broken_initial = init.at("broken").get<std::vector<double>>();
    p.outside_initial = init.at("outside").get<std::vector<double>>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, e.what());
  }
}

FireParams load_fire_params_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_fire_params(buf.str());
}

std::string format_fire_params(const FireParams& p) {
  json doc;
  doc["ignition"] = p.ignition;
  doc["burn_out"] = p.burn_out;
  doc["temperature"] = {{"no_fire_mild", matrix_json(p.temp_no_fire_mild)},
                        {"no_fire_warm", matrix_json(p.temp_no_fire_warm)},
                        {"fire_mild", matrix_json(p.temp_fire_mild)},
                        {"fire_warm", matrix_json(p.temp_fire_warm)}};
  doc["sensor_failure"] = p.sensor_failure;
  doc["sensor_repair"] = p.sensor_repair;
  doc["outside_warming"] = p.outside_warming;
  doc["outside_cooling"] = p.outside_cooling;
  doc["sensor_working"] = p.sensor_working;
  doc["sensor_broken"] = p.sensor_broken;
  doc["initial"] = {{"fire", p.fire_initial},
                    {"temp", p.temp_initial},
                    {"broken", p.broken_initial},
                    {"outside", p.outside_initial}};
  return doc.dump(2) + "\n";
}

FireDomain build_fire_domain(const Topology& topology, const FireParams& params) {
  if (topology.size() == 0 || !topology.connected()) {
    throw Error(Errc::TopologyError, "room adjacency graph must be connected");
  }
  params.validate();

  FireDomain out;
  out.topology = topology;
  CtbnSpec& spec = out.domain.spec;
  auto add = [&](std::string name, std::vector<std::string> states, std::vector<double> initial) {
    spec.variables.push_back({std::move(name), std::move(states), std::move(initial)});
    spec.parents.emplace_back();
    spec.cims.emplace_back();
    return spec.variables.size() - 1;
  };

  out.outside_var = add("OutsideTemp", {"mild", "warm"}, params.outside_initial);
  spec.cims[out.outside_var].push_back(
      intensity({{-params.outside_warming, params.outside_warming},
                 {params.outside_cooling, -params.outside_cooling}},
                "outside"));

  const std::size_t rooms = topology.size();
  for (std::size_t r = 0; r < rooms; ++r) {
    const auto& room = topology.rooms[r];
    out.fire_vars.push_back(add("Fire_" + room, {"no", "yes"}, params.fire_initial));
    out.temp_vars.push_back(add("Temp_" + room, {"normal", "hot", "very_hot"}, params.temp_initial));
    out.broken_vars.push_back(add("Broken_" + room, {"ok", "broken"}, params.broken_initial));
  }

  for (std::size_t r = 0; r < rooms; ++r) {
    const std::size_t fire = out.fire_vars[r];
    for (std::size_t n : topology.neighbors(r)) spec.parents[fire].push_back(out.fire_vars[n]);
    const std::size_t configs = std::size_t{1} << spec.parents[fire].size();
    for (std::size_t c = 0; c < configs; ++c) {
      const auto burning = static_cast<std::size_t>(std::popcount(c));
      const double ignite = params.ignition_rate(burning);
      spec.cims[fire].push_back(
          intensity({{-ignite, ignite}, {params.burn_out, -params.burn_out}}, "fire"));
    }

    const std::size_t temp = out.temp_vars[r];
    spec.parents[temp] = {fire, out.outside_var};
    // Configuration order: (fire, outside) with fire most significant.
    spec.cims[temp].push_back(intensity(params.temp_no_fire_mild, "temperature"));
    spec.cims[temp].push_back(intensity(params.temp_no_fire_warm, "temperature"));
    spec.cims[temp].push_back(intensity(params.temp_fire_mild, "temperature"));
    spec.cims[temp].push_back(intensity(params.temp_fire_warm, "temperature"));

    const std::size_t broken = out.broken_vars[r];
    spec.cims[broken].push_back(intensity({{-params.sensor_failure, params.sensor_failure},
                                           {params.sensor_repair, -params.sensor_repair}},
                                          "broken"));
  }
  spec.validate();

  for (std::size_t r = 0; r < rooms; ++r) {
    Sensor s;
    s.name = "Sensor_" + topology.rooms[r];
    s.states = {"normal", "hot", "very_hot"};
    s.parents = {out.temp_vars[r], out.broken_vars[r]};
    std::vector<double> table;
    for (std::size_t t = 0; t < 3; ++t) {
      table.insert(table.end(), params.sensor_working[t].begin(), params.sensor_working[t].end());
      table.insert(table.end(), params.sensor_broken.begin(), params.sensor_broken.end());
    }
    try {
      s.cpt = Cpt(3, {3, 2}, std::move(table));
    } catch (const Error& e) {
      throw Error(Errc::ParamError, std::string("sensor model: ") + e.what());
    }
    out.domain.observations.sensors.push_back(std::move(s));
  }
  out.domain.observations.validate(spec);
  return out;
}

}  // namespace adbn::model
