#include "adbn/model/ctbn.hpp"

#include <algorithm>
#include <cmath>

#include "adbn/error.hpp"

namespace adbn::model {

std::vector<std::size_t> CtbnSpec::parent_cards(std::size_t v) const {
  std::vector<std::size_t> cards;
  cards.reserve(parents.at(v).size());
  for (std::size_t p : parents[v]) cards.push_back(cardinality(p));
  return cards;
}

std::size_t CtbnSpec::num_configs(std::size_t v) const { return config_count(parent_cards(v)); }

std::optional<std::size_t> CtbnSpec::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t CtbnSpec::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(Errc::SchemaError, "unknown variable '" + std::string(name) + "'");
}

namespace {

void check_distribution(const std::vector<double>& d, std::size_t card, const std::string& what) {
  if (d.size() != card) {
    throw Error(Errc::ValidationError, what + ": expected " + std::to_string(card) + " entries");
  }
  double sum = 0.0;
  for (double p : d) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::ValidationError, what + ": entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kCptRowTolerance) {
    throw Error(Errc::ValidationError, what + ": does not sum to 1");
  }
}

}  // namespace

void CtbnSpec::validate() const {
  if (variables.empty()) throw Error(Errc::SchemaError, "no variables");
  if (parents.size() != variables.size() || cims.size() != variables.size()) {
    throw Error(Errc::SchemaError, "parents/cims do not cover every variable");
  }
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& var = variables[v];
    if (var.cardinality() < 2) {
      throw Error(Errc::ValidationError, var.name + ": needs at least two states");
    }
    for (std::size_t w = 0; w < v; ++w) {
      if (variables[w].name == var.name) {
        throw Error(Errc::SchemaError, "duplicate variable '" + var.name + "'");
      }
    }
    check_distribution(var.initial, var.cardinality(), var.name + " initial");
    auto sorted = parents[v];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(Errc::SchemaError, var.name + ": duplicate parent");
    }
    for (std::size_t p : parents[v]) {
      if (p >= variables.size()) throw Error(Errc::SchemaError, var.name + ": parent out of range");
      if (p == v) throw Error(Errc::SchemaError, var.name + ": lists itself as parent");
    }
    if (cims[v].size() != num_configs(v)) {
      throw Error(Errc::SchemaError, var.name + ": expected " + std::to_string(num_configs(v)) +
                                         " CIMs, found " + std::to_string(cims[v].size()));
    }
    for (const auto& q : cims[v]) {
      if (q.size() != var.cardinality()) {
        throw Error(Errc::ValidationError, var.name + ": CIM has wrong dimension");
      }
    }
  }
}

void ObservationModel::validate(const CtbnSpec& spec) const {
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    const auto& sensor = sensors[s];
    if (sensor.cardinality() < 2) {
      throw Error(Errc::ValidationError, sensor.name + ": needs at least two states");
    }
    if (sensor.parents.empty()) throw Error(Errc::SchemaError, sensor.name + ": no parents");
    if (spec.find(sensor.name)) {
      throw Error(Errc::SchemaError, sensor.name + ": clashes with a state variable");
    }
    std::vector<std::size_t> cards;
    for (std::size_t p : sensor.parents) {
      if (p >= spec.size()) throw Error(Errc::SchemaError, sensor.name + ": parent out of range");
      cards.push_back(spec.cardinality(p));
    }
    if (sensor.cpt.child_card() != sensor.cardinality() || sensor.cpt.parent_cards() != cards) {
      throw Error(Errc::ValidationError, sensor.name + ": CPT shape does not match parents");
    }
  }
}

Cpt transition_cpt(const CtbnSpec& spec, std::size_t var, double dt) {
  const std::size_t card = spec.cardinality(var);
  std::vector<std::size_t> cards{card};
  for (std::size_t c : spec.parent_cards(var)) cards.push_back(c);
  const std::size_t configs = spec.cims[var].size();

  // Row (x_prev, u) lives at x_prev * configs + u.
  std::vector<double> table(card * configs * card);
  for (std::size_t u = 0; u < configs; ++u) {
    const auto p = linalg::matrix_exp(spec.cims[var][u], dt);
    for (std::size_t from = 0; from < card; ++from) {
      const auto src = p.row(from);
      std::copy(src.begin(), src.end(), table.begin() + ((from * configs + u) * card));
    }
  }
  return Cpt(card, std::move(cards), std::move(table));
}

TwoSliceDbn discretize(const CtbnSpec& spec, const ObservationModel& obs, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::NonpositiveInterval, "discretize needs dt > 0");
  TwoSliceDbn dbn;
  dbn.dt = dt;
  dbn.transitions.reserve(spec.size());
  for (std::size_t v = 0; v < spec.size(); ++v) dbn.transitions.push_back(transition_cpt(spec, v, dt));
  dbn.observations = obs;
  return dbn;
}

}  // namespace adbn::model
