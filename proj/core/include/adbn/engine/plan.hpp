#pragma once

// Turning CIMs into CPTs for a new subnode created after an arbitrary delay.

#include <cstddef>
#include <span>
#include <vector>

#include "adbn/engine/messages.hpp"
#include "adbn/model/ctbn.hpp"

namespace adbn::engine {

enum class Approach : std::uint8_t { One = 1, Two = 2 };

// Latest entry of `updates` (ascending) strictly before `before`; falls back
// to the origin subnode when there is none.
SubnodeId bind_latest(std::uint32_t var, std::span<const double> updates, double before,
                      double origin);

// Parents held at their bound values over the whole interval:
// row block u is exp(Q[X|u] (t_now - t_prev)). Throws NonpositiveInterval.
model::Cpt cpt_approach1(const model::CtbnSpec& spec, std::size_t var, double t_prev,
                         double t_now);

struct SubnodePlan {
  double time = 0.0;
  // Local predecessor first, then one binding per CTBN parent in spec order.
  std::vector<SubnodeId> bindings;
  model::Cpt cpt;
  bool intermediate = false;

  friend bool operator==(const SubnodePlan&, const SubnodePlan&) = default;
};

// parent_updates[i] lists the known update times (ascending) of the i-th
// CTBN parent of var.
SubnodePlan plan_approach1(const model::CtbnSpec& spec, std::size_t var, double t_prev,
                           double t_now, std::span<const std::vector<double>> parent_updates,
                           double origin);

// Splits (t_prev, t_now] at every parent update inside the interval. Each
// piece is governed by the parent values in force when it starts; all but the
// last subnode are intermediate.
std::vector<SubnodePlan> plan_approach2(const model::CtbnSpec& spec, std::size_t var,
                                        double t_prev, double t_now,
                                        std::span<const std::vector<double>> parent_updates,
                                        double origin);

std::vector<SubnodePlan> plan_update(Approach approach, const model::CtbnSpec& spec,
                                     std::size_t var, double t_prev, double t_now,
                                     std::span<const std::vector<double>> parent_updates,
                                     double origin);

}  // namespace adbn::engine
