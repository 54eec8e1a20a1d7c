#include <doctest.h>

#include <lmpcirc/analysis.hpp>

using namespace lmpc;

namespace {

const std::vector<TopologyLine> kSevenBusLines{{0, 1, 1}, {0, 6, 1}, {5, 0, 1}, {2, 3, 1}, {1, 3, 1},
                                               {1, 2, 1}, {3, 4, 1}, {4, 5, 1}, {6, 5, 1}};

Eigen::VectorXd seven_bus_prices() {
  Eigen::VectorXd p(7);
  p << 45, 0, 45, 90, 45, 0, 22.5;
  return p;
}

EquivalentCircuit seven_bus() {
  std::vector<Resistor> r;
  for (const TopologyLine& l : kSevenBusLines) r.push_back({l.from, l.to, 1 / l.susceptance});
  return EquivalentCircuit(7, r, {{5, 0, 112.5, 2}, {1, 3, 180, 4}}, 1, 0.0);
}

}  // namespace

TEST_CASE("negative price predicted below a positive offset") {
  const EquivalentCircuit c(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, {{0, 2, 240, 1}}, 1, 20.0);
  const NegativePriceReport r = predict_negative_prices(c, solve_circuit(c));
  CHECK(r.negative);
  REQUIRE(r.witnesses == std::vector<Index>{0});
  CHECK(r.witness_prices[0] == doctest::Approx(-60));
  CHECK(r.min_node == 0);
  CHECK(r.min_price == doctest::Approx(-60));
  CHECK_FALSE(r.ground_is_minimum);
  CHECK(r.negative_voltages);
}

TEST_CASE("no negative price when ground is the lowest node") {
  const EquivalentCircuit c(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, {{0, 1, 60, 0}}, 0, 0.0);
  const NegativePriceReport r = predict_negative_prices(c, solve_circuit(c));
  CHECK_FALSE(r.negative);
  CHECK(r.witnesses.empty());
  CHECK(r.ground_is_minimum);
  CHECK(r.min_price == doctest::Approx(0));
}

TEST_CASE("negative voltages need not mean negative prices when the offset is positive") {
  // Voltages -40 and -20 below a ground priced at 50.
  const EquivalentCircuit c(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, {{1, 0, 60, 0}}, 0, 50.0);
  const NegativePriceReport r = predict_negative_prices(c, solve_circuit(c));
  CHECK_FALSE(r.negative);
  CHECK_FALSE(r.ground_is_minimum);
  CHECK(r.min_price == doctest::Approx(10));
}

TEST_CASE("full recovery with ground and offset") {
  LimitedInfo info;
  info.lines = kSevenBusLines;
  info.sources = {{5, 0, 112.5}, {1, 3, 180}};
  info.ground = 1;
  info.offset = 0.0;
  const RecoveredPrices r = recover_lmps(info);
  REQUIRE(r.lmp.has_value());
  CHECK((*r.lmp - seven_bus_prices()).cwiseAbs().maxCoeff() < 1e-9);

  info.offset = 12.5;
  CHECK((*recover_lmps(info).lmp - seven_bus_prices()).array().abs().maxCoeff() == doctest::Approx(12.5));
}

TEST_CASE("without ground only differences are recovered") {
  LimitedInfo info;
  info.lines = kSevenBusLines;
  info.sources = {{5, 0, 112.5}, {1, 3, 180}};
  const RecoveredPrices r = recover_lmps(info);
  CHECK_FALSE(r.lmp.has_value());
  const Eigen::VectorXd p = seven_bus_prices();
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 7; ++j) CHECK(r.differences(i, j) == doctest::Approx(p(i) - p(j)));

  info.ground = 1;
  CHECK_FALSE(recover_lmps(info).lmp.has_value());
}

TEST_CASE("recovery input validation") {
  LimitedInfo info;
  info.lines = kSevenBusLines;
  info.sources = {{0, 3, 10}};
  CHECK_THROWS_AS(recover_lmps(info), CircuitError);
  info.sources = {{5, 0, 112.5}};
  info.ground = 9;
  CHECK_THROWS_AS(recover_lmps(info), CircuitError);
  info.ground.reset();
  info.lines.push_back({1, 0, 2});
  CHECK_THROWS_AS(recover_lmps(info), CircuitError);
  info.lines = {{0, 1, 1}, {2, 3, 1}};
  info.sources = {{0, 1, 1}};
  CHECK_THROWS_AS(recover_lmps(info), CircuitError);
  info.sources.clear();
  info.lines = kSevenBusLines;
  CHECK_THROWS_AS(recover_lmps(info), NoCongestion);
}

TEST_CASE("per-source congestion impact") {
  const EquivalentCircuit c = seven_bus();
  const CongestionImpact impact = congestion_impact(c);
  REQUIRE(impact.sources.size() == 2);
  const Eigen::VectorXd sum = impact.sources[0].contribution + impact.sources[1].contribution;
  CHECK((sum - impact.total).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((impact.total - seven_bus_prices()).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(impact.sources[0].contribution(0) == doctest::Approx(225.0 / 13));
  CHECK(impact.sources[0].contribution(5) == doctest::Approx(-600.0 / 13));
  CHECK(impact.sources[0].min == doctest::Approx(-600.0 / 13));
  CHECK(impact.sources[0].negative_nodes == std::vector<Index>{2, 3, 4, 5, 6});
  CHECK(impact.sources[1].contribution(3) == doctest::Approx(1320.0 / 13));
  CHECK(impact.sources[1].negative_nodes.empty());
  CHECK(impact.sources[1].max == doctest::Approx(1320.0 / 13));
}
