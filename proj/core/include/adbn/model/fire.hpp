#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adbn/linalg.hpp"
#include "adbn/model/ctbn.hpp"

namespace adbn::model {

// Undirected room adjacency graph.
struct Topology {
  std::vector<std::string> rooms;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t size() const noexcept { return rooms.size(); }
  // Sorted ascending.
  std::vector<std::size_t> neighbors(std::size_t room) const;
  bool connected() const;
  // Edges whose removal disconnects the graph (single-path areas).
  std::size_t bridge_count() const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

// Edge-list text: one "roomA roomB" pair per line, '#' starts a comment.
// Rooms are numbered in order of first appearance.
Topology parse_topology(std::string_view text);
Topology load_topology_file(const std::filesystem::path& path);
std::string format_topology(const Topology& topology);

struct TopologyBlock {
  enum class Kind { Loop, Corridor };
  Kind kind = Kind::Loop;
  std::size_t rooms = 0;
  // Existing room the block's first room connects to; ignored for block 0.
  std::size_t attach = 0;
};

// Builds a layout from loop blocks (several paths between rooms) and corridor
// chains (a single path). Rooms are named R0, R1, ... in creation order.
Topology generate_topology(std::span<const TopologyBlock> blocks);
Topology line_topology(std::size_t rooms);
// 8-room loop plus a 4-room dead-end corridor hanging off room R0.
Topology desk12_topology();

// Rate parameters of the fire-monitoring domain. Time is in abstract units.
struct FireParams {
  // Ignition rate indexed by the number of burning neighbours; [0] is the
  // spontaneous rate and the last entry applies to any larger count.
  std::vector<double> ignition;
  double burn_out = 0.0;
  // Temperature (normal, hot, very_hot) intensity matrices indexed by
  // fire state and outside temperature.
  linalg::Matrix temp_no_fire_mild;
  linalg::Matrix temp_no_fire_warm;
  linalg::Matrix temp_fire_mild;
  linalg::Matrix temp_fire_warm;
  double sensor_failure = 0.0;
  double sensor_repair = 0.0;
  double outside_warming = 0.0;
  double outside_cooling = 0.0;
  // Sensor reading distribution given temperature, for a working sensor.
  std::vector<std::vector<double>> sensor_working;
  std::vector<double> sensor_broken;
  std::vector<double> fire_initial;
  std::vector<double> temp_initial;
  std::vector<double> broken_initial;
  std::vector<double> outside_initial;

  double ignition_rate(std::size_t burning_neighbors) const;
  // Throws ParamError on negative rates or non-monotone ignition.
  void validate() const;

  friend bool operator==(const FireParams&, const FireParams&) = default;
};

FireParams default_fire_params();
FireParams parse_fire_params(std::string_view json_text);
FireParams load_fire_params_file(const std::filesystem::path& path);
std::string format_fire_params(const FireParams& params);

struct FireDomain {
  Domain domain;
  Topology topology;
  std::vector<std::size_t> fire_vars;  // per room
  std::vector<std::size_t> temp_vars;
  std::vector<std::size_t> broken_vars;
  std::size_t outside_var = 0;
};

// Per room: Fire_<room> (no/yes) with neighbouring Fire parents,
// Temp_<room> (normal/hot/very_hot) with parents Fire_<room> and OutsideTemp,
// Broken_<room> (ok/broken), and an observed Sensor_<room> reading the
// temperature through a possibly broken sensor. One global OutsideTemp.
// Throws TopologyError for a disconnected graph and ParamError for bad rates.
FireDomain build_fire_domain(const Topology& topology, const FireParams& params);

}  // namespace adbn::model
