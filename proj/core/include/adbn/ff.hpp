#pragma once

// Factored frontier: a product-of-marginals belief state advanced one slice at
// a time by loopy BP on the two-slice network.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adbn/bp.hpp"
#include "adbn/model/ctbn.hpp"

namespace adbn::ff {

using Readings = std::span<const std::optional<std::size_t>>;

struct FactoredState {
  double time = 0.0;
  std::vector<bp::Vector> marginals;  // one per state variable
};

FactoredState initial_state(const model::CtbnSpec& spec, double time = 0.0);

// Previous-slice roots 0..V-1 with the given priors, current slice V..2V-1,
// then one node per sensor attached to the current slice.
bp::Network two_slice_network(const model::CtbnSpec& spec, const model::TwoSliceDbn& dbn,
                              std::span<const bp::Vector> priors);

struct StepResult {
  FactoredState state;
  std::uint64_t messages = 0;
};

// Throws ZeroBelief, or DomainMismatch for lbp_iters == 0.
StepResult ff_step(const FactoredState& state, const model::CtbnSpec& spec,
                   const model::TwoSliceDbn& dbn, Readings readings, std::size_t lbp_iters = 2);

struct FfConfig {
  std::size_t period = 1;  // generating steps between updates
  std::size_t lbp_iters = 2;
};

struct FfTick {
  std::size_t step = 0;
  std::vector<bp::Vector> marginals;
  std::uint64_t messages = 0;  // cumulative
};

// Updates at steps period, 2*period, ... below observations.size(), reading
// the sensors only at those steps. observations[k] holds step k's readings.
std::vector<FfTick> ff_run(const model::Domain& domain, double step_dt,
                           std::span<const std::vector<std::optional<std::size_t>>> observations,
                           const FfConfig& config);

}  // namespace adbn::ff
