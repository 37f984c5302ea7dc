#include <cmath>
#include <filesystem>

#include "adbn/error.hpp"
#include "adbn/harness.hpp"
#include "adbn/model/domain_io.hpp"
#include "adbn/model/fire.hpp"
#include "doctest.h"
#include "expect.hpp"

using namespace adbn;
using namespace adbn::model;
using testing_support::code_of;

namespace {

const std::filesystem::path kData = std::filesystem::path(ADBN_SOURCE_DIR) / "data";

const char* kMinimal = R"({
  "variables": [{"name": "X", "states": ["a", "b"], "initial": [0.5, 0.5]}],
  "cims": {"X": {"": [-1, 1, 2, -2]}}
})";

}  // namespace

TEST_SUITE("model") {

TEST_CASE("minimal domain document") {
  const auto d = load_domain(kMinimal);
  CHECK(d.spec.size() == 1);
  CHECK(d.spec.cims[0][0](1, 0) == 2.0);
  CHECK(d.observations.size() == 0);
  CHECK(load_domain(save_domain(d)) == d);
}

TEST_CASE("domain document errors") {
  CHECK(code_of([] { load_domain("{"); }) == Errc::ParseError);
  CHECK(code_of([] {
          load_domain(R"({"variables": [{"name": "U", "states": ["0","1"], "initial": [1, 0]},
                                        {"name": "X", "states": ["0","1"], "initial": [1, 0]}],
                          "parents": {"X": ["U"]},
                          "cims": {"U": {"": [-1, 1, 1, -1]}, "X": {"0": [-1, 1, 1, -1]}}})");
        }) == Errc::SchemaError);
  CHECK(code_of([] {
          load_domain(R"({"variables": [{"name": "X", "states": ["a","b"], "initial": [0.5, 0.5]}],
                          "cims": {"X": {"": [-1, 0.5, 2, -2]}}})");
        }) == Errc::ValidationError);
  CHECK(code_of([] {
          load_domain(R"({"variables": [], "cims": {}, "extra": 1})");
        }) == Errc::SchemaError);
}

TEST_CASE("shipped fire document equals the builder output") {
  const auto fire = build_fire_domain(desk12_topology(), load_fire_params_file(kData / "params/fire_default.json"));
  CHECK(load_domain_file(kData / "domains/fire_desk12.json") == fire.domain);
  CHECK(load_fire_params_file(kData / "params/fire_default.json") == default_fire_params());
  CHECK(load_topology_file(kData / "topologies/desk12.txt") == desk12_topology());
  CHECK(load_topology_file(kData / "topologies/rooms58.txt") == harness::rooms58_topology());
}

TEST_CASE("two-room fire domain has the example structure") {
  const auto fire = build_fire_domain(line_topology(2), default_fire_params());
  const auto& spec = fire.domain.spec;
  CHECK(spec.size() == 7);  // Fire, Temp, Broken per room plus OutsideTemp
  CHECK(fire.domain.observations.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto f = fire.fire_vars[r];
    const auto t = fire.temp_vars[r];
    CHECK(spec.parents[f] == std::vector<std::size_t>{fire.fire_vars[1 - r]});
    CHECK(spec.parents[t] == std::vector<std::size_t>{f, fire.outside_var});
    CHECK(spec.parents[fire.broken_vars[r]].empty());
    const auto& s = fire.domain.observations.sensors[r];
    CHECK(s.parents == std::vector<std::size_t>{t, fire.broken_vars[r]});
    CHECK(s.cardinality() == 3);
  }
  CHECK(spec.variables[fire.outside_var].name == "OutsideTemp");
  CHECK(spec.parents[fire.outside_var].empty());
}

TEST_CASE("topologies") {
  const auto desk = desk12_topology();
  CHECK(desk.size() == 12);
  CHECK(desk.connected());
  CHECK(desk.bridge_count() == 4);  // the corridor
  const auto big = harness::rooms58_topology();
  CHECK(big.size() == 58);
  CHECK(big.connected());
  CHECK(big.bridge_count() > 0);
  CHECK(big.bridge_count() < big.edges.size());
  const auto fire = build_fire_domain(big, default_fire_params());
  CHECK(fire.fire_vars.size() == 58);
  CHECK(parse_topology(format_topology(desk)) == desk);
  CHECK(parse_topology("# two rooms\nkitchen hall\n").rooms == std::vector<std::string>{"kitchen", "hall"});
  Topology split{{"a", "b", "c"}, {{0, 1}}};
  CHECK(code_of([&] { build_fire_domain(split, default_fire_params()); }) == Errc::TopologyError);
}

TEST_CASE("fire parameters") {
  const auto p = default_fire_params();
  CHECK(p.ignition_rate(0) < p.ignition_rate(1));
  CHECK(p.ignition_rate(1) <= p.ignition_rate(2));
  CHECK(p.ignition_rate(9) == p.ignition.back());
  CHECK(parse_fire_params(format_fire_params(p)) == p);
  auto bad = p;
  bad.ignition = {0.1, 0.05};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ParamError);
}

TEST_CASE("discretization") {
  const auto d = load_domain(R"({
    "variables": [{"name": "X", "states": ["a", "b"], "initial": [0.5, 0.5]}],
    "cims": {"X": {"": [-1, 1, 1, -1]}}})");
  const auto dbn = discretize(d.spec, d.observations, 0.5);
  CHECK(dbn.transitions[0](0, 0) == doctest::Approx(0.683940).epsilon(1e-5));
  CHECK(dbn.transitions[0](1, 0) == doctest::Approx(0.316060).epsilon(1e-5));
  const auto tiny = transition_cpt(d.spec, 0, 1e-6);
  CHECK(std::abs(tiny(0, 0) - 1.0) < 2e-6);
  CHECK(std::abs(tiny(1, 1) - 1.0) < 2e-6);
  CHECK(code_of([&] { discretize(d.spec, d.observations, 0.0); }) == Errc::NonpositiveInterval);
}

TEST_CASE("transition CPT conditions on self then parents") {
  const auto fire = build_fire_domain(line_topology(2), default_fire_params());
  const auto cpt = transition_cpt(fire.domain.spec, fire.temp_vars[0], 0.25);
  CHECK(cpt.parent_cards() == std::vector<std::size_t>{3, 2, 2});
  const auto p = default_fire_params();
  const auto expected = linalg::matrix_exp(linalg::validate_intensity(p.temp_fire_warm), 0.25);
  // Row for (Temp = hot, Fire = yes, OutsideTemp = warm).
  const std::size_t values[] = {1, 1, 1};
  const auto row = cpt.row(cpt.row_index(values));
  for (std::size_t j = 0; j < 3; ++j) CHECK(row[j] == expected(1, j));
}

}  // TEST_SUITE
