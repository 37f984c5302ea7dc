#include "adbn/ff.hpp"

#include "adbn/error.hpp"

namespace adbn::ff {

FactoredState initial_state(const model::CtbnSpec& spec, double time) {
  FactoredState s;
  s.time = time;
  for (const auto& v : spec.variables) s.marginals.push_back(v.initial);
  return s;
}

bp::Network two_slice_network(const model::CtbnSpec& spec, const model::TwoSliceDbn& dbn,
                              std::span<const bp::Vector> priors) {
  const std::size_t V = spec.size();
  if (priors.size() != V || dbn.transitions.size() != V) {
    throw Error(Errc::DomainMismatch, "two-slice network needs one prior and CPT per variable");
  }
  bp::Network net;
  for (std::size_t v = 0; v < V; ++v) {
    net.add_node(spec.variables[v].name + "@prev", {}, model::Cpt::prior(priors[v]));
  }
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<std::size_t> parents{v};
    parents.insert(parents.end(), spec.parents[v].begin(), spec.parents[v].end());
    net.add_node(spec.variables[v].name, std::move(parents), dbn.transitions[v]);
  }
  for (const auto& s : dbn.observations.sensors) {
    std::vector<std::size_t> parents;
    for (std::size_t p : s.parents) parents.push_back(V + p);
    net.add_node(s.name, std::move(parents), s.cpt);
  }
  return net;
}

StepResult ff_step(const FactoredState& state, const model::CtbnSpec& spec,
                   const model::TwoSliceDbn& dbn, Readings readings, std::size_t lbp_iters) {
  if (lbp_iters == 0) throw Error(Errc::DomainMismatch, "ff_step needs at least one LBP iteration");
  const std::size_t V = spec.size();
  const bp::Network net = two_slice_network(spec, dbn, state.marginals);
  bp::Evidence evidence;
  for (std::size_t s = 0; s < readings.size() && s < dbn.observations.size(); ++s) {
    if (readings[s]) evidence[2 * V + s] = *readings[s];
  }
  bp::LbpOptions options;
  options.iterations = lbp_iters;
  const bp::LbpResult r = bp::lbp_run(net, evidence, options);

  StepResult out;
  out.state.time = state.time + dbn.dt;
  out.state.marginals.assign(r.beliefs.begin() + static_cast<std::ptrdiff_t>(V),
                             r.beliefs.begin() + static_cast<std::ptrdiff_t>(2 * V));
  out.messages = r.messages;
  return out;
}

std::vector<FfTick> ff_run(const model::Domain& domain, double step_dt,
                           std::span<const std::vector<std::optional<std::size_t>>> observations,
                           const FfConfig& config) {
  if (config.period == 0) throw Error(Errc::DomainMismatch, "FF period must be at least one step");
  const model::TwoSliceDbn dbn = model::discretize(
      domain.spec, domain.observations, static_cast<double>(config.period) * step_dt);
  FactoredState state = initial_state(domain.spec);
  std::vector<FfTick> ticks;
  std::uint64_t total = 0;
  for (std::size_t step = config.period; step < observations.size(); step += config.period) {
    StepResult r = ff_step(state, domain.spec, dbn, observations[step], config.lbp_iters);
    total += r.messages;
    state = std::move(r.state);
    ticks.push_back({step, state.marginals, total});
  }
  return ticks;
}

}  // namespace adbn::ff
