#include "adbn/engine/layout.hpp"

#include <algorithm>
#include <set>

#include "adbn/error.hpp"

namespace adbn::engine {

Layout::Layout(model::Domain domain, std::vector<std::vector<std::size_t>> groups)
    : domain_(std::move(domain)), groups_(std::move(groups)) {
  const std::size_t v_count = domain_.spec.size();
  const std::size_t s_count = domain_.observations.size();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  owner_.assign(v_count + s_count, kUnset);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) throw Error(Errc::DomainMismatch, "empty supernode");
    for (std::size_t v : groups_[g]) {
      if (v >= v_count || owner_[v] != kUnset) {
        throw Error(Errc::DomainMismatch, "supernode groups must partition the state variables");
      }
      owner_[v] = static_cast<std::uint32_t>(g);
    }
  }
  for (std::size_t v = 0; v < v_count; ++v) {
    if (owner_[v] == kUnset) throw Error(Errc::DomainMismatch, "state variable without supernode");
  }
  sensors_.assign(groups_.size(), {});
  for (std::size_t s = 0; s < s_count; ++s) {
    const auto& sensor = domain_.observations.sensors[s];
    if (sensor.parents.empty()) throw Error(Errc::DomainMismatch, sensor.name + ": sensor needs a parent");
    const std::uint32_t g = owner_[sensor.parents.front()];
    owner_[v_count + s] = g;
    sensors_[g].push_back(s);
  }

  children_.assign(v_count, {});
  for (std::size_t v = 0; v < v_count; ++v) {
    for (std::size_t p : domain_.spec.parents[v]) children_[p].push_back(static_cast<std::uint32_t>(v));
  }
  for (std::size_t s = 0; s < s_count; ++s) {
    for (std::size_t p : domain_.observations.sensors[s].parents) {
      children_[p].push_back(static_cast<std::uint32_t>(v_count + s));
    }
  }

  std::vector<std::set<std::uint32_t>> adj(groups_.size());
  auto link = [&](std::uint32_t a, std::uint32_t b) {
    if (owner_[a] != owner_[b]) {
      adj[owner_[a]].insert(owner_[b]);
      adj[owner_[b]].insert(owner_[a]);
    }
  };
  for (std::size_t v = 0; v < v_count; ++v) {
    for (std::uint32_t c : children_[v]) link(static_cast<std::uint32_t>(v), c);
  }
  for (const auto& a : adj) neighbors_.emplace_back(a.begin(), a.end());
}

Layout Layout::per_variable(model::Domain domain) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < domain.spec.size(); ++v) groups.push_back({v});
  return Layout(std::move(domain), std::move(groups));
}

std::size_t Layout::cardinality(std::uint32_t node) const {
  return is_sensor(node) ? domain_.observations.sensors.at(node - num_state_vars()).cardinality()
                         : domain_.spec.cardinality(node);
}

const std::string& Layout::name(std::uint32_t node) const {
  return is_sensor(node) ? domain_.observations.sensors.at(node - num_state_vars()).name
                         : domain_.spec.variables.at(node).name;
}

const std::vector<std::size_t>& Layout::parents(std::uint32_t node) const {
  return is_sensor(node) ? domain_.observations.sensors.at(node - num_state_vars()).parents
                         : domain_.spec.parents.at(node);
}

}  // namespace adbn::engine
