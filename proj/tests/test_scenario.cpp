#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "findex/rng.hpp"
#include "findex/scenario.hpp"

using namespace findex;

namespace {

Scenario round_trip(const Scenario& sc) {
  return parse_scenario(serialize_scenario(sc));
}

}  // namespace

TEST_CASE("decimal strings round trip bit-exactly") {
  for (double x : {0.1, 1.0 / 3.0, 4.05, -2.5e-17, 1e300, 0.0}) {
    CHECK(parse_decimal(format_decimal(x)) == x);
  }
  CHECK(std::isinf(parse_decimal("inf")));
  CHECK_THROWS_AS(parse_decimal("1.2.3"), ParseError);
  CHECK_THROWS_AS(parse_decimal("pi"), ParseError);
  CHECK_THROWS_AS(parse_decimal(""), ParseError);
}

TEST_CASE("trace scenario round trips, including rotated embeddings") {
  AlgebraShape sub({1, 2}), amb({3, 2});
  Eigen::MatrixXi lam(2, 2);
  lam << 1, 1, 0, 1;
  Rng rng(5);
  Embedding e(sub, amb, lam, {rng.haar_unitary(3), rng.haar_unitary(2)});
  Scenario sc = scenario_of(trace_ce(e, {0.25, 1.75}), "rotated-trace");
  sc.checks = {"validate", "constants"};
  sc.seed = 99;
  Scenario back = round_trip(sc);
  CHECK(back.name == "rotated-trace");
  CHECK(back.kind == CEKind::trace);
  CHECK(back.trace_weights == std::vector<double>{0.25, 1.75});
  CHECK(back.checks == sc.checks);
  CHECK(back.seed == 99);
  CondExp a = make_condexp(sc), b = make_condexp(back);
  CHECK((a.map().matrix() - b.map().matrix()).norm() < 1e-15);
  CHECK(validate_ce(b).ok);
}

TEST_CASE("remaining kinds round trip through json") {
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = 0.5;
  c(0, 1) = Complex(0.1, 0.05);
  c(1, 0) = Complex(0.1, -0.05);
  c(1, 1) = 0.5;
  Scenario tensor = scenario_of(tensor_state_ce(2, 2, c), "tensor");
  Scenario t2 = round_trip(tensor);
  CHECK(t2.h == 2);
  CHECK(t2.k == 2);
  CHECK((t2.density - c).norm() == 0.0);

  Scenario corner = scenario_of(weighted_corner_ce({2, 1}, 1.0 / 2.25), "corner");
  Scenario c2 = round_trip(corner);
  CHECK(c2.corner_dims == std::vector<int>{2, 1});
  CHECK(c2.lambda == 1.0 / 2.25);

  Scenario grp = scenario_of(group_average_ce({0, 3, 2, 1}, {1, 2, 1, 0.5}), "grp");
  Scenario g2 = round_trip(grp);
  CHECK(g2.involution == std::vector<int>{0, 3, 2, 1});
  CHECK(g2.point_weights == std::vector<double>{1, 2, 1, 0.5});

  CondExp base = make_condexp(corner);
  Scenario custom = scenario_of(custom_ce(base.embedding(), base.map()), "custom");
  Scenario k2 = round_trip(custom);
  CHECK(k2.kind == CEKind::custom);
  CHECK((make_condexp(k2).map().matrix() - base.map().matrix()).norm() < 1e-15);
}

TEST_CASE("parser rejects malformed input") {
  Scenario ok = scenario_of(weighted_corner_ce({1}, 0.5), "x");
  std::string good = serialize_scenario(ok);
  CHECK_THROWS_AS(parse_scenario("not json at all"), ParseError);
  {
    std::string bad = good;
    bad.replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 7");
    CHECK_THROWS_AS(parse_scenario(bad), ParseError);
  }
  {
    std::string bad = good;
    bad.replace(bad.find("weighted_corner"), 15, "weighted_dinner");
    CHECK_THROWS_AS(parse_scenario(bad), ParseError);
  }
  Scenario badcheck = ok;
  badcheck.checks = {"validate", "no-such-check"};
  CHECK_THROWS_AS(parse_scenario(serialize_scenario(badcheck)), ParseError);
}

TEST_CASE("random scenarios are deterministic and well-formed") {
  Scenario a = random_scenario(2024), b = random_scenario(2024);
  CHECK(serialize_scenario(a) == serialize_scenario(b));
  CHECK(serialize_scenario(a) != serialize_scenario(random_scenario(2025)));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Scenario sc = random_scenario(seed);
    CHECK(sc.kind == CEKind::trace);
    REQUIRE(sc.embedding.has_value());
    CHECK(sc.embedding->amb_shape().ambient_dim() <= 24);
    sc.embedding->validate();
    CHECK(validate_ce(make_condexp(sc)).ok);
  }
}

TEST_CASE("known checks list is stable") {
  const auto& ids = known_checks();
  CHECK(ids.size() == 14);
  for (const char* id : {"validate", "constants", "sandwich", "gap_law", "index",
                         "tower", "stinespring", "pointwise_index"})
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
}
