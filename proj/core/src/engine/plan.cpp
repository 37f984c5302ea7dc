#include "adbn/engine/plan.hpp"

#include <algorithm>

#include "adbn/error.hpp"

namespace adbn::engine {

SubnodeId bind_latest(std::uint32_t var, std::span<const double> updates, double before,
                      double origin) {
  auto it = std::lower_bound(updates.begin(), updates.end(), before);
  if (it == updates.begin() || *std::prev(it) < origin) return {var, origin};
  return {var, *std::prev(it)};
}

model::Cpt cpt_approach1(const model::CtbnSpec& spec, std::size_t var, double t_prev,
                         double t_now) {
  if (!(t_now > t_prev)) throw Error(Errc::NonpositiveInterval, "subnode interval must be positive");
  return model::transition_cpt(spec, var, t_now - t_prev);
}

namespace {

SubnodePlan make_plan(const model::CtbnSpec& spec, std::size_t var, double t_prev, double t,
                      std::span<const std::vector<double>> parent_updates, double origin) {
  const auto& parents = spec.parents.at(var);
  if (parent_updates.size() != parents.size()) {
    throw Error(Errc::DomainMismatch, "need update times for every parent");
  }
  SubnodePlan p;
  p.time = t;
  p.bindings.push_back({static_cast<std::uint32_t>(var), t_prev});
  for (std::size_t i = 0; i < parents.size(); ++i) {
    p.bindings.push_back(
        bind_latest(static_cast<std::uint32_t>(parents[i]), parent_updates[i], t, origin));
  }
  p.cpt = cpt_approach1(spec, var, t_prev, t);
  return p;
}

}  // namespace

SubnodePlan plan_approach1(const model::CtbnSpec& spec, std::size_t var, double t_prev,
                           double t_now, std::span<const std::vector<double>> parent_updates,
                           double origin) {
  return make_plan(spec, var, t_prev, t_now, parent_updates, origin);
}

std::vector<SubnodePlan> plan_approach2(const model::CtbnSpec& spec, std::size_t var,
                                        double t_prev, double t_now,
                                        std::span<const std::vector<double>> parent_updates,
                                        double origin) {
  if (!(t_now > t_prev)) throw Error(Errc::NonpositiveInterval, "subnode interval must be positive");
  std::vector<double> cuts;
  for (const auto& times : parent_updates) {
    for (double t : times) {
      if (t > t_prev && t < t_now) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(t_now);

  std::vector<SubnodePlan> out;
  double prev = t_prev;
  for (double t : cuts) {
    out.push_back(make_plan(spec, var, prev, t, parent_updates, origin));
    out.back().intermediate = t != t_now;
    prev = t;
  }
  return out;
}

std::vector<SubnodePlan> plan_update(Approach approach, const model::CtbnSpec& spec,
                                     std::size_t var, double t_prev, double t_now,
                                     std::span<const std::vector<double>> parent_updates,
                                     double origin) {
  if (approach == Approach::Two) {
    return plan_approach2(spec, var, t_prev, t_now, parent_updates, origin);
  }
  return {plan_approach1(spec, var, t_prev, t_now, parent_updates, origin)};
}

}  // namespace adbn::engine
