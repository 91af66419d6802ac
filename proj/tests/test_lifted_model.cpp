#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "opfcut/branch_physics.hpp"
#include "opfcut/lifted_model.hpp"
#include "test_util.hpp"

using namespace opfcut;

namespace {

// master-property helper: rows an arbitrary in-box profile must satisfy
// exclude the balance rows of buses without generators (no output there can
// absorb the residual of an arbitrary profile)
bool row_applies(const Network& net, const std::vector<bool>& has_gen,
                 const LinearConstraint& row) {
  if (row.name.rfind("pbal_", 0) == 0 || row.name.rfind("qbal_", 0) == 0) {
    int id = std::stoi(row.name.substr(5));
    return has_gen[(size_t)net.bus_index(id)];
  }
  return true;
}

}  // namespace

TEST_CASE("two-bus catalog has the documented 31 variables") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  CHECK(m.cat.nvars() == 31);
  CHECK(m.cat.branches.size() == 1);
  CHECK(m.cat.gens.size() == 1);
  CHECK(m.cat.names[(size_t)m.cat.v2(0)] == "V2_1");
  CHECK(m.cat.names[(size_t)m.cat.pkm(0)] == "P_1_2");
  CHECK(m.cat.names[(size_t)m.cat.pmk(0)] == "P_2_1");
  CHECK(m.cat.names[(size_t)m.cat.de_mk(0)] == "dE_2_1");
}

TEST_CASE("flow definition rows reduce to the simple-case coefficients") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  const auto& cat = m.cat;
  const BranchParams& br = net.branches[0];

  const LinearConstraint* pdef = nullptr;
  for (const auto& row : m.rows)
    if (row.name == "pdef_1_2") pdef = &row;
  REQUIRE(pdef != nullptr);
  auto coef = [&](int var) {
    for (auto [id, c] : pdef->terms)
      if (id == var) return c;
    return 0.0;
  };
  // P_1_2 - g Ekk - g Fkk + g E - b EF + b FE + g F = 0
  CHECK(coef(cat.pkm(0)) == doctest::Approx(1.0));
  CHECK(coef(cat.ekk(0)) == doctest::Approx(-br.g));
  CHECK(coef(cat.fkk(0)) == doctest::Approx(-br.g));
  CHECK(coef(cat.xk(0)) == doctest::Approx(0.0));
  CHECK(coef(cat.e_km(0)) == doctest::Approx(br.g));
  CHECK(coef(cat.ef_km(0)) == doctest::Approx(-br.b));
  CHECK(coef(cat.fe_km(0)) == doctest::Approx(br.b));
  CHECK(coef(cat.f_km(0)) == doctest::Approx(br.g));
}

TEST_CASE("absolute-difference rows reduce to +-(e_k - e_m) without transformer") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  const auto& cat = m.cat;
  int found = 0;
  for (const auto& row : m.rows) {
    if (row.name == "dEdef_1_2_p") {
      ++found;
      REQUIRE(row.terms.size() == 3);
      for (auto [id, c] : row.terms) {
        if (id == cat.de_km(0)) CHECK(c == doctest::Approx(1.0));
        if (id == cat.e(0)) CHECK(c == doctest::Approx(-1.0));
        if (id == cat.e(1)) CHECK(c == doctest::Approx(1.0));
      }
      CHECK(row.sense == Sense::GE);
      CHECK(row.rhs == doctest::Approx(0.0));
    }
    if (row.name == "dEdef_1_2_n") ++found;
  }
  CHECK(found == 2);
}

TEST_CASE("embedded points satisfy the definitional rows exactly") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  std::mt19937 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto v = testutil::random_voltages(net, rng);
    LiftedPoint pt = embed_feasible_point(net, m, v);
    const auto& cat = m.cat;
    for (int i = 0; i < cat.nbus; ++i)
      CHECK(pt[cat.v2(i)] ==
            doctest::Approx(pt[cat.ekk(i)] + pt[cat.fkk(i)]).epsilon(1e-12));
    auto has_gen = testutil::gen_buses(net);
    for (const auto& row : m.rows) {
      if (!row_applies(net, has_gen, row)) continue;
      CHECK(row.slack(pt.x) >= -1e-9);
    }
  }
}

TEST_CASE("master property on case9: base rows hold at 200 random profiles") {
  Network net = parse_case_file(testutil::data_path("case9.m"));
  ModelInstance m = build_base_model(net);
  auto has_gen = testutil::gen_buses(net);
  std::mt19937 rng(4);
  for (int t = 0; t < 200; ++t) {
    auto v = testutil::random_voltages(net, rng);
    LiftedPoint pt = embed_feasible_point(net, m, v);
    for (const auto& row : m.rows) {
      if (!row_applies(net, has_gen, row)) continue;
      CHECK(row.slack(pt.x) >= -1e-7);
    }
  }
}

TEST_CASE("flow rows tie the product variables to the exact physics") {
  // every pdef/qdef row evaluated at an embedded point must close to zero,
  // for all three branch regimes
  std::mt19937 rng(5);
  auto base = testutil::make_two_bus();
  for (int regime = 0; regime <= 2; ++regime) {
    Network net = base;
    BranchParams& br = net.branches[0];
    br = testutil::random_branch(rng, regime);
    br.from = 1;
    br.to = 2;
    br.rateA = 2.5;
    ModelInstance m = build_base_model(net);
    for (int t = 0; t < 100; ++t) {
      auto v = testutil::random_voltages(net, rng);
      LiftedPoint pt = embed_feasible_point(net, m, v);
      for (const auto& row : m.rows)
        if (row.name.rfind("pdef_", 0) == 0 || row.name.rfind("qdef_", 0) == 0)
          CHECK(std::abs(row.lhs_value(pt.x) - row.rhs) < 1e-9);
    }
  }
}

TEST_CASE("objective at an embedded point equals the true generation cost") {
  Network net = parse_case_file(testutil::data_path("case9.m"));
  ModelInstance m = build_base_model(net);
  std::mt19937 rng(6);
  auto v = testutil::random_voltages(net, rng);
  LiftedPoint pt = embed_feasible_point(net, m, v);
  double want = 0;
  for (int gj = 0; gj < (int)m.cat.gens.size(); ++gj) {
    const auto& cc = net.generators[(size_t)m.cat.gens[(size_t)gj].net_index].cost;
    double p = pt[m.cat.pg(gj)];
    want += cc.c2 * p * p + cc.c1 * p + cc.c0;
  }
  CHECK(m.objective_at(pt.x) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("cost epigraph tangents") {
  CostCurve cc{1.0, 0.0, 0.0};
  SUBCASE("tangent at the vertex") {
    LinearConstraint row = cost_epigraph_tangent(cc, 0.0, 0, 1, "t");
    // t >= 0
    CHECK(row.sense == Sense::GE);
    CHECK(row.rhs == doctest::Approx(0.0));
    REQUIRE(row.terms.size() == 1);  // p coefficient vanishes
    CHECK(row.terms[0].first == 1);
  }
  SUBCASE("tangency at p=1") {
    LinearConstraint row = cost_epigraph_tangent(cc, 1.0, 0, 1, "t");
    // t >= 2p - 1: binding at p=1 (cost 1)
    std::vector<double> x{1.0, 1.0};
    CHECK(row.lhs_value(x) == doctest::Approx(row.rhs));
    x = {2.0, 4.0};  // cost(2)=4, tangent gives 3: strictly below
    CHECK(row.slack(x) == doctest::Approx(1.0));
  }
  SUBCASE("linear cost is reproduced regardless of p_hat") {
    CostCurve lin{0.0, 3.0, 7.0};
    LinearConstraint a = cost_epigraph_tangent(lin, 0.0, 0, 1, "a");
    LinearConstraint b = cost_epigraph_tangent(lin, 42.0, 0, 1, "b");
    CHECK(a.rhs == doctest::Approx(b.rhs));
    CHECK(a.terms == b.terms);
  }
}

TEST_CASE("reference bus fixing: f pinned at zero, e in [Vmin, Vmax]") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  int ref = net.bus_index(net.reference_bus);
  CHECK(m.lb[(size_t)m.cat.f(ref)] == doctest::Approx(0.0));
  CHECK(m.ub[(size_t)m.cat.f(ref)] == doctest::Approx(0.0));
  CHECK(m.lb[(size_t)m.cat.e(ref)] == doctest::Approx(0.9));
  CHECK(m.ub[(size_t)m.cat.e(ref)] == doctest::Approx(1.1));

  BuildOptions opt;
  opt.reference_angle = M_PI / 4;
  ModelInstance m2 = build_base_model(net, opt);
  CHECK(m2.lb[(size_t)m2.cat.e(ref)] == doctest::Approx(0.9 / std::sqrt(2.0)));
  CHECK(m2.ub[(size_t)m2.cat.f(ref)] == doctest::Approx(1.1 / std::sqrt(2.0)));
  bool has_angfix = false;
  for (const auto& row : m2.rows) has_angfix |= row.name == "angfix_1";
  CHECK(has_angfix);
}

TEST_CASE("LP export round-trips through the reader") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  LPModel lp = to_lp_model(m);
  std::ostringstream text;
  write_lp_file(lp, text);
  std::istringstream in(text.str());
  LPModel back = read_lp_file(in);
  CHECK(back.ncols() == lp.ncols());
  CHECK(back.rows.size() == lp.rows.size());
  // spot-check a named variable's bounds survive
  int idx = -1;
  for (int j = 0; j < back.ncols(); ++j)
    if (back.col_names[(size_t)j] == "V2_2") idx = j;
  REQUIRE(idx >= 0);
  CHECK(back.lb[(size_t)idx] == doctest::Approx(0.81));
  CHECK(back.ub[(size_t)idx] == doctest::Approx(1.21));
}

TEST_CASE("generator on unknown bus is rejected at build time") {
  Network net = testutil::make_two_bus();
  net.generators[0].bus = 77;
  CHECK_THROWS_AS(build_base_model(net), std::invalid_argument);
}
