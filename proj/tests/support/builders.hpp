#pragma once

// Small helpers for assembling toy domains in tests.

#include <string>
#include <vector>

#include "adbn/linalg.hpp"
#include "adbn/model/ctbn.hpp"

namespace testing_support {

using adbn::linalg::Matrix;

inline adbn::linalg::IntensityMatrix q2(double up, double down) {
  return adbn::linalg::validate_intensity(Matrix{{-up, up}, {down, -down}});
}

struct DomainBuilder {
  adbn::model::Domain d;

  std::size_t var(std::string name, std::vector<double> initial) {
    std::vector<std::string> states;
    for (std::size_t i = 0; i < initial.size(); ++i) states.push_back("s" + std::to_string(i));
    d.spec.variables.push_back({std::move(name), std::move(states), std::move(initial)});
    d.spec.parents.emplace_back();
    d.spec.cims.emplace_back();
    return d.spec.size() - 1;
  }

  void parents(std::size_t v, std::vector<std::size_t> ps) { d.spec.parents[v] = std::move(ps); }

  void cims(std::size_t v, std::vector<adbn::linalg::IntensityMatrix> qs) { d.spec.cims[v] = std::move(qs); }

  std::size_t sensor(std::string name, std::vector<std::size_t> parents, std::size_t card,
                     std::vector<double> table) {
    std::vector<std::size_t> cards;
    for (std::size_t p : parents) cards.push_back(d.spec.cardinality(p));
    std::vector<std::string> states;
    for (std::size_t i = 0; i < card; ++i) states.push_back("r" + std::to_string(i));
    d.observations.sensors.push_back(
        {std::move(name), std::move(states), parents, adbn::model::Cpt(card, cards, std::move(table))});
    return d.observations.size() - 1;
  }

  adbn::model::Domain build() const {
    d.spec.validate();
    d.observations.validate(d.spec);
    return d;
  }
};

}  // namespace testing_support
