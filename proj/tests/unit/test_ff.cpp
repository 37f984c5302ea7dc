#include <cmath>
#include <random>

#include "adbn/error.hpp"
#include "adbn/ff.hpp"
#include "builders.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace adbn;
using testing_support::DomainBuilder;
using testing_support::q2;

namespace {

using Obs = std::vector<std::vector<std::optional<std::size_t>>>;

// Two unrelated variables, each with its own noisy sensor.
model::Domain independent_pair() {
  DomainBuilder b;
  const auto x = b.var("X", {0.9, 0.1});
  const auto y = b.var("Y", {0.2, 0.5, 0.3});
  b.cims(x, {q2(0.4, 0.9)});
  b.cims(y, {linalg::validate_intensity(linalg::Matrix{{-1, 0.6, 0.4}, {0.2, -0.5, 0.3}, {0.1, 0.1, -0.2}})});
  b.sensor("SX", {x}, 2, {0.8, 0.2, 0.25, 0.75});
  b.sensor("SY", {y}, 2, {0.9, 0.1, 0.5, 0.5, 0.2, 0.8});
  return b.build();
}

oracle::Mat mat(const linalg::IntensityMatrix& q) {
  oracle::Mat m(q.size(), oracle::Vec(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) m[i][j] = q(i, j);
  }
  return m;
}

Obs random_obs(std::size_t steps, std::size_t sensors, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Obs obs(steps, std::vector<std::optional<std::size_t>>(sensors));
  for (auto& row : obs) {
    for (auto& r : row) r = rng() % 2;
  }
  return obs;
}

}  // namespace

TEST_SUITE("ff") {

TEST_CASE("independent variables are filtered exactly") {
  const auto domain = independent_pair();
  const double dt = 0.05;
  const std::size_t period = 3;
  const auto obs = random_obs(60, 2, 17);
  const auto ticks = ff::ff_run(domain, dt, obs, {.period = period, .lbp_iters = 2});
  REQUIRE(ticks.size() == 19);  // steps 3, 6, ..., 57

  for (std::size_t v = 0; v < 2; ++v) {
    const auto& sensor = domain.observations.sensors[v];
    const auto P = oracle::taylor_expm(mat(domain.spec.cims[v][0]), dt * period);
    std::vector<oracle::Mat> trans;
    std::vector<oracle::Vec> like{oracle::Vec(domain.spec.cardinality(v), 1.0)};
    for (const auto& t : ticks) {
      trans.push_back(P);
      oracle::Vec l(domain.spec.cardinality(v));
      for (std::size_t x = 0; x < l.size(); ++x) l[x] = sensor.cpt(*obs[t.step][v], x);
      like.push_back(l);
    }
    const auto exact = oracle::chain_filtering(domain.spec.variables[v].initial, trans, like);
    for (std::size_t k = 0; k < ticks.size(); ++k) {
      for (std::size_t x = 0; x < exact[k + 1].size(); ++x) {
        CHECK(std::abs(ticks[k].marginals[v][x] - exact[k + 1][x]) < 1e-9);
      }
    }
  }
}

TEST_CASE("tick schedule and message count") {
  const auto domain = independent_pair();
  const auto obs = random_obs(40, 2, 3);
  const auto one = ff::ff_run(domain, 0.1, obs, {.period = 39, .lbp_iters = 2});
  REQUIRE(one.size() == 1);
  CHECK(one[0].step == 39);
  // Two transition edges and two sensor edges, a pi and a lambda each, per sweep.
  CHECK(one[0].messages == 2 * 2 * 4);
  const auto many = ff::ff_run(domain, 0.1, obs, {.period = 10, .lbp_iters = 3});
  REQUIRE(many.size() == 3);
  CHECK(many.back().messages == 3 * 3 * 2 * 4);
}

TEST_CASE("without observations the marginals follow the dynamics") {
  const auto domain = independent_pair();
  const Obs obs(30, std::vector<std::optional<std::size_t>>(2));
  const auto ticks = ff::ff_run(domain, 0.1, obs, {.period = 5, .lbp_iters = 2});
  const auto dbn = model::discretize(domain.spec, domain.observations, 0.5);
  for (std::size_t v = 0; v < 2; ++v) {
    std::vector<double> m = domain.spec.variables[v].initial;
    for (const auto& t : ticks) {
      std::vector<double> next(m.size(), 0.0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) next[j] += m[i] * dbn.transitions[v](j, i);
      }
      m = next;
      for (std::size_t j = 0; j < m.size(); ++j) CHECK(std::abs(t.marginals[v][j] - m[j]) < 1e-12);
    }
  }
}

TEST_CASE("two-slice network layout") {
  DomainBuilder b;
  const auto u = b.var("U", {0.5, 0.5});
  const auto x = b.var("X", {0.5, 0.5});
  b.cims(u, {q2(1, 1)});
  b.parents(x, {u});
  b.cims(x, {q2(1, 2), q2(2, 1)});
  b.sensor("S", {x}, 2, {0.9, 0.1, 0.1, 0.9});
  const auto d = b.build();
  const auto dbn = model::discretize(d.spec, d.observations, 0.1);
  const std::vector<bp::Vector> priors{{0.5, 0.5}, {0.5, 0.5}};
  const auto net = ff::two_slice_network(d.spec, dbn, priors);
  CHECK(net.size() == 5);
  CHECK(net.node(3).parents == std::vector<std::size_t>{1, 0});
  CHECK(net.node(4).parents == std::vector<std::size_t>{3});
  CHECK(net.edge_count() == 4);
}

TEST_CASE("zero LBP iterations are rejected") {
  const auto domain = independent_pair();
  const auto dbn = model::discretize(domain.spec, domain.observations, 0.1);
  const std::vector<std::optional<std::size_t>> readings(2);
  CHECK_THROWS_AS(ff::ff_step(ff::initial_state(domain.spec), domain.spec, dbn, readings, 0), Error);
}

}  // TEST_SUITE
