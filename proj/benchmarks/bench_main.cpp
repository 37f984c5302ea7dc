#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "adbn/engine/supernode.hpp"
#include "adbn/ff.hpp"
#include "adbn/linalg.hpp"
#include "adbn/model/fire.hpp"
#include "adbn/sim.hpp"

using namespace adbn;

namespace {

const model::FireDomain& desk12() {
  static const auto fire = model::build_fire_domain(model::desk12_topology(), model::default_fire_params());
  return fire;
}

}  // namespace

static void BM_MatrixExp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  linalg::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = u(rng);
      row += m(i, j);
    }
    m(i, i) = -row;
  }
  const auto q = linalg::validate_intensity(m);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::matrix_exp(q, 0.01));
}
BENCHMARK(BM_MatrixExp)->Arg(2)->Arg(3)->Arg(8);

// One update of each supernode in turn on desk12, in steady state.
static void BM_SupernodeUpdate(benchmark::State& state) {
  const auto& fire = desk12();
  auto layout = std::make_shared<const engine::Layout>(engine::Layout::per_variable(fire.domain));
  engine::EngineConfig cfg;
  cfg.history = static_cast<std::size_t>(state.range(0));
  auto nodes = engine::make_supernodes(layout, cfg);
  const auto trace = sim::generate_trace(fire.domain.spec, fire.domain.observations, 0.01, 2, 1);
  const auto readings = trace.readings(1);
  std::vector<std::vector<engine::Communication>> inbox(nodes.size());
  double now = 0.0;
  std::size_t next = 0;
  for (auto _ : state) {
    now += 0.01;
    auto& node = nodes[next];
    auto r = node.update(now, readings, inbox[next]);
    inbox[next].clear();
    for (auto& c : r.outgoing) inbox[c.recipient].push_back(std::move(c));
    next = (next + 1) % nodes.size();
  }
}
BENCHMARK(BM_SupernodeUpdate)->Arg(2)->Arg(4)->Arg(6);

static void BM_FfStep(benchmark::State& state) {
  const auto& fire = desk12();
  const auto& spec = fire.domain.spec;
  const auto dbn = model::discretize(spec, fire.domain.observations, 0.5);
  const auto trace = sim::generate_trace(spec, fire.domain.observations, 0.01, 2, 1);
  const auto readings = trace.readings(1);
  auto s = ff::initial_state(spec);
  const auto iters = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) s = ff::ff_step(s, spec, dbn, readings, iters).state;
}
BENCHMARK(BM_FfStep)->Arg(2)->Arg(4);
BENCHMARK_MAIN();
