#include <cmath>

#include "doctest.h"
#include "opfcut/netcase.hpp"
#include "test_util.hpp"

using namespace opfcut;

namespace {

const char* kTwoBus = R"(
function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0  0 0 1 1 0 345 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 345 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 300 -300 1 100 1 250 10 0 0 0 0 0 0 0 0 0 0 0;
];
mpc.branch = [
  1 2 0.01 0.1 0 250 250 250 0 0 1 -360 360;
];
mpc.gencost = [
  2 1500 0 3 0.11 5 150;
];
)";

}  // namespace

TEST_CASE("case9 parses with expected sizes and per-unit conversion") {
  Network net = parse_case_file(testutil::data_path("case9.m"));
  CHECK(net.buses.size() == 9);
  CHECK(net.generators.size() == 3);
  CHECK(net.branches.size() == 9);
  CHECK(net.baseMVA == doctest::Approx(100.0));
  CHECK(net.reference_bus == 1);
  CHECK(net.bus(5).Pd == doctest::Approx(0.9));   // 90 MW / 100
  CHECK(net.bus(9).Qd == doctest::Approx(0.5));
  // cost conversion: $/MW^2 -> $/pu^2
  CHECK(net.generators[0].cost.c2 == doctest::Approx(0.11 * 100 * 100));
  CHECK(net.generators[0].cost.c1 == doctest::Approx(5 * 100));
  CHECK(net.generators[0].cost.c0 == doctest::Approx(150));
  // rating per-unit
  CHECK(net.branches[0].rateA == doctest::Approx(2.5));
}

TEST_CASE("two-bus file: series admittance and per-unit demand") {
  Network net = parse_case(kTwoBus);
  REQUIRE(net.branches.size() == 1);
  CHECK(net.branches[0].g == doctest::Approx(0.990099).epsilon(1e-5));
  CHECK(net.branches[0].b == doctest::Approx(-9.90099).epsilon(1e-5));
  CHECK(net.bus(2).Pd == doctest::Approx(0.5));
  CHECK(net.bus(1).Vmax == doctest::Approx(1.1));
}

TEST_CASE("branch referencing unknown bus is rejected") {
  std::string bad = kTwoBus;
  auto pos = bad.find("1 2 0.01");
  bad.replace(pos, 3, "1 99");
  CHECK_THROWS_WITH_AS(parse_case(bad),
                       doctest::Contains("unknown bus"), ParseError);
}

TEST_CASE("missing matrix block is rejected") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("mpc.gencost"), 11, "mpc.nocost ");
  CHECK_THROWS_WITH_AS(parse_case(bad), doctest::Contains("gencost"), ParseError);
}

TEST_CASE("non-numeric token is rejected") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("0.01"), 4, "zzzz");
  CHECK_THROWS_AS(parse_case(bad), ParseError);
}

TEST_CASE("zero series impedance on in-service branch is rejected") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("0.01 0.1"), 8, "0.00 0.0");
  CHECK_THROWS_WITH_AS(parse_case(bad), doctest::Contains("impedance"), ParseError);
}

TEST_CASE("reference bus must be unique") {
  std::string none = kTwoBus;
  none.replace(none.find("1 3 0"), 3, "1 2 ");
  CHECK_THROWS_WITH_AS(parse_case(none), doctest::Contains("no reference"), ParseError);
  std::string two = kTwoBus;
  two.replace(two.find("2 1 50"), 3, "2 3 ");
  CHECK_THROWS_WITH_AS(parse_case(two), doctest::Contains("multiple"), ParseError);
}

TEST_CASE("piecewise-linear cost model is rejected") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("2 1500"), 6, "1 1500");
  CHECK_THROWS_WITH_AS(parse_case(bad), doctest::Contains("piecewise"), ParseError);
}

TEST_CASE("restrictive angle-difference limits are rejected") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("-360 360"), 8, "-30  30 ");
  CHECK_THROWS_WITH_AS(parse_case(bad),
                       doctest::Contains("angle-difference"), ParseError);
}

TEST_CASE("tap 0 maps to tau=1, shift converts to radians") {
  std::string txt = kTwoBus;
  txt.replace(txt.find("0 0 1 -360 360"), 14, "2 30 1 -360 360");
  Network net = parse_case(txt);
  CHECK(net.branches[0].tau == doctest::Approx(2.0));
  CHECK(net.branches[0].sigma == doctest::Approx(30.0 * M_PI / 180));
  Network plain = parse_case(kTwoBus);
  CHECK(plain.branches[0].tau == doctest::Approx(1.0));
}

TEST_CASE("g >= 0 whenever r >= 0 on parsed branches") {
  for (const char* f : {"case9.m", "case30.m"}) {
    Network net = parse_case_file(testutil::data_path(f));
    for (const auto& br : net.branches) {
      if (!br.in_service) continue;
      if (br.r >= 0) CHECK(br.g >= 0);
    }
  }
}

TEST_CASE("JSON round-trip preserves every numeric field") {
  Network net = parse_case_file(testutil::data_path("case9.m"));
  Network back = network_from_json(network_to_json(net));
  REQUIRE(back.buses.size() == net.buses.size());
  REQUIRE(back.branches.size() == net.branches.size());
  REQUIRE(back.generators.size() == net.generators.size());
  CHECK(back.baseMVA == doctest::Approx(net.baseMVA).epsilon(1e-12));
  for (size_t i = 0; i < net.buses.size(); ++i) {
    CHECK(back.buses[i].id == net.buses[i].id);
    CHECK(back.buses[i].Pd == doctest::Approx(net.buses[i].Pd).epsilon(1e-12));
    CHECK(back.buses[i].Bs == doctest::Approx(net.buses[i].Bs).epsilon(1e-12));
    CHECK(back.buses[i].Vmin == doctest::Approx(net.buses[i].Vmin).epsilon(1e-12));
  }
  for (size_t i = 0; i < net.branches.size(); ++i) {
    CHECK(back.branches[i].g == doctest::Approx(net.branches[i].g).epsilon(1e-12));
    CHECK(back.branches[i].b == doctest::Approx(net.branches[i].b).epsilon(1e-12));
    CHECK(back.branches[i].tau == doctest::Approx(net.branches[i].tau).epsilon(1e-12));
    CHECK(back.branches[i].rateA == doctest::Approx(net.branches[i].rateA).epsilon(1e-12));
  }
  for (size_t i = 0; i < net.generators.size(); ++i) {
    CHECK(back.generators[i].cost.c2 ==
          doctest::Approx(net.generators[i].cost.c2).epsilon(1e-12));
    CHECK(back.generators[i].Pmax ==
          doctest::Approx(net.generators[i].Pmax).epsilon(1e-12));
  }
  // and the canonical text itself is stable
  CHECK(network_to_json(back) == network_to_json(net));
}

TEST_CASE("parallel branches are kept as distinct entries") {
  std::string txt = kTwoBus;
  txt.replace(txt.find("mpc.branch = [\n"), 15,
              "mpc.branch = [\n  1 2 0.02 0.2 0 250 250 250 0 0 1;\n");
  Network net = parse_case(txt);
  REQUIRE(net.branches.size() == 2);
  CHECK(net.branches[0].x == doctest::Approx(0.2));
  CHECK(net.branches[1].x == doctest::Approx(0.1));
}

TEST_CASE("out-of-service equipment is retained but flagged") {
  std::string txt = kTwoBus;
  txt.replace(txt.find("mpc.branch = [\n"), 15,
              "mpc.branch = [\n  1 2 0.02 0.2 0 250 250 250 0 0 0;\n");
  Network net = parse_case(txt);
  REQUIRE(net.branches.size() == 2);
  CHECK_FALSE(net.branches[0].in_service);
  CHECK(net.branches[1].in_service);
}
