#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adbn/model/ctbn.hpp"

namespace adbn::engine {

// Assignment of state variables to supernodes, plus the routing tables every
// supernode needs. Sensors belong to the supernode of their first parent.
// Node variable ids: state variables 0..V-1, then sensor s as V+s.
class Layout {
 public:
  // Throws DomainMismatch unless the groups partition the state variables.
  Layout(model::Domain domain, std::vector<std::vector<std::size_t>> groups);
  // One supernode per state variable, in variable order.
  static Layout per_variable(model::Domain domain);

  const model::Domain& domain() const noexcept { return domain_; }
  const model::CtbnSpec& spec() const noexcept { return domain_.spec; }
  std::size_t num_state_vars() const noexcept { return domain_.spec.size(); }
  std::size_t num_nodes() const noexcept { return owner_.size(); }
  std::size_t size() const noexcept { return groups_.size(); }

  const std::vector<std::size_t>& members(std::size_t supernode) const { return groups_.at(supernode); }
  const std::vector<std::size_t>& sensors(std::size_t supernode) const { return sensors_.at(supernode); }
  std::uint32_t owner(std::uint32_t node) const { return owner_.at(node); }
  bool is_sensor(std::uint32_t node) const noexcept { return node >= num_state_vars(); }
  std::size_t cardinality(std::uint32_t node) const;
  const std::string& name(std::uint32_t node) const;
  // Parents of a node in CPT order (for a state variable, excluding itself).
  const std::vector<std::size_t>& parents(std::uint32_t node) const;
  // Nodes (state variables and sensors) having this state variable as parent.
  const std::vector<std::uint32_t>& children(std::uint32_t state_var) const { return children_.at(state_var); }
  // Supernodes exchanging messages with this one, ascending.
  const std::vector<std::uint32_t>& neighbors(std::size_t supernode) const { return neighbors_.at(supernode); }
  // Supernode that owns a state variable.
  std::size_t supernode_of(std::size_t state_var) const { return owner_.at(state_var); }

 private:
  model::Domain domain_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::vector<std::size_t>> sensors_;
  std::vector<std::uint32_t> owner_;
  std::vector<std::vector<std::uint32_t>> children_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

}  // namespace adbn::engine
