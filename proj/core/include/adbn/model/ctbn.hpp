#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adbn/linalg.hpp"
#include "adbn/model/cpt.hpp"

namespace adbn::model {

struct VariableSpec {
  std::string name;
  std::vector<std::string> states;
  // Distribution at the start of monitoring.
  std::vector<double> initial;

  std::size_t cardinality() const noexcept { return states.size(); }
  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

// Factored Markov jump process. The parent graph may be cyclic; a variable's
// dependence on its own past is implicit and never listed in `parents`.
struct CtbnSpec {
  std::vector<VariableSpec> variables;
  std::vector<std::vector<std::size_t>> parents;
  // cims[v][c] is Q[v | c] for parent configuration index c (mixed radix over
  // the cardinalities of parents[v], first parent most significant).
  std::vector<std::vector<linalg::IntensityMatrix>> cims;

  std::size_t size() const noexcept { return variables.size(); }
  std::size_t cardinality(std::size_t v) const { return variables.at(v).cardinality(); }
  std::vector<std::size_t> parent_cards(std::size_t v) const;
  std::size_t num_configs(std::size_t v) const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws SchemaError

  // Throws ValidationError / SchemaError when an invariant is broken.
  void validate() const;

  friend bool operator==(const CtbnSpec&, const CtbnSpec&) = default;
};

// An observed variable: instantaneous reading given the current values of its
// parent state variables.
struct Sensor {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::size_t> parents;
  Cpt cpt;

  std::size_t cardinality() const noexcept { return states.size(); }
  friend bool operator==(const Sensor&, const Sensor&) = default;
};

struct ObservationModel {
  std::vector<Sensor> sensors;

  std::size_t size() const noexcept { return sensors.size(); }
  void validate(const CtbnSpec& spec) const;
  friend bool operator==(const ObservationModel&, const ObservationModel&) = default;
};

struct Domain {
  CtbnSpec spec;
  ObservationModel observations;
  friend bool operator==(const Domain&, const Domain&) = default;
};

// P(X_now | X_prev, parents) with every parent held at one value for `dt`:
// the row block for parent configuration u is exp(Q[X|u] dt). Parent order of
// the returned table is (X itself, parents[var]...).
Cpt transition_cpt(const CtbnSpec& spec, std::size_t var, double dt);

// One transition CPT per state variable plus the within-slice sensors.
struct TwoSliceDbn {
  double dt = 0.0;
  std::vector<Cpt> transitions;
  ObservationModel observations;

  friend bool operator==(const TwoSliceDbn&, const TwoSliceDbn&) = default;
};

// Throws NonpositiveInterval for dt <= 0.
TwoSliceDbn discretize(const CtbnSpec& spec, const ObservationModel& obs, double dt);

}  // namespace adbn::model
