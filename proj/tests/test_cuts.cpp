#include <cmath>
#include <tuple>
#include <random>

#include "doctest.h"
#include "opfcut/cuts.hpp"
#include "test_util.hpp"

using namespace opfcut;

namespace {

// two-bus network with a prescribed branch
Network net_with_branch(BranchParams br) {
  Network net = testutil::make_two_bus();
  br.from = 1;
  br.to = 2;
  net.branches[0] = br;
  return net;
}

LiftedPoint zero_point(const ModelInstance& m) {
  LiftedPoint pt;
  pt.x.assign((size_t)m.cat.nvars(), 0.0);
  return pt;
}

}  // namespace

TEST_CASE("interval trig ranges") {
  CHECK(max_abs_cos(-10, 10) == doctest::Approx(1.0));
  CHECK(max_abs_cos(0.1, 0.2) == doctest::Approx(std::cos(0.1)));
  CHECK(max_abs_cos(3.0, 3.3) == doctest::Approx(1.0));  // contains pi
  CHECK(max_abs_cos(1.4, 1.7) == doctest::Approx(std::abs(std::cos(1.4))));
  auto cr = cos_range(-0.5, 0.5);
  CHECK(cr.first == doctest::Approx(std::cos(0.5)));
  CHECK(cr.second == doctest::Approx(1.0));
  auto sr = sin_range(0.1, 0.4);
  CHECK(sr.first == doctest::Approx(std::sin(0.1)));
  CHECK(sr.second == doctest::Approx(std::sin(0.4)));
  auto sr2 = sin_range(1.0, 2.5);  // contains pi/2
  CHECK(sr2.second == doctest::Approx(1.0));
}

TEST_CASE("delta bounds") {
  BranchParams br;
  br.r = 0, br.x = 0;  // g,b set directly
  SUBCASE("no interval: sqrt(g^2+b^2) * Vmax") {
    br.g = 1, br.b = -1;
    auto d = delta_bounds(br, 1.1);
    CHECK(d.mu == doctest::Approx(1.1 * std::sqrt(2.0)));
    CHECK(d.nu == doctest::Approx(1.1 * std::sqrt(2.0)));
  }
  SUBCASE("angle pinned at zero with g=1,b=0") {
    br.g = 1, br.b = 0;
    auto d = delta_bounds(br, 1.1, AngleInterval{1, 0.0, 0.0});
    CHECK(d.mu == doctest::Approx(1.1));
    CHECK(d.nu == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("full-circle interval equals the no-interval bound") {
    br.g = 0.3, br.b = -2.0;
    auto free_b = delta_bounds(br, 1.05);
    auto full = delta_bounds(br, 1.05, AngleInterval{1, -4.0, 4.0});
    CHECK(full.mu == doctest::Approx(free_b.mu));
    CHECK(full.nu == doctest::Approx(free_b.nu));
  }
  SUBCASE("monotone in the interval") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 1000; ++t) {
      br.g = u(rng);
      br.b = u(rng);
      double a = u(rng), b2 = u(rng), c = u(rng), d2 = u(rng);
      double ilo = std::min({a, b2, c, d2}), ihi = std::max({a, b2, c, d2});
      double olo = std::min(a, b2), ohi = std::max(a, b2);
      // [olo,ohi] might not contain [ilo,ihi]; build proper nesting
      double nlo = std::max(ilo, olo), nhi = std::min(ihi, ohi);
      if (nlo > nhi) continue;
      auto inner = delta_bounds(br, 1.1, AngleInterval{1, nlo, nhi});
      auto outer = delta_bounds(br, 1.1, AngleInterval{1, ilo, ihi});
      CHECK(inner.mu <= outer.mu + 1e-12);
      CHECK(inner.nu <= outer.nu + 1e-12);
    }
  }
  SUBCASE("bound really bounds the linear forms over the interval") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> m01(0.0, 1.1);
    for (int t = 0; t < 500; ++t) {
      br.g = u(rng);
      br.b = u(rng);
      double lo = u(rng), hi = lo + m01(rng);
      auto d = delta_bounds(br, 1.1, AngleInterval{1, lo, hi});
      std::uniform_real_distribution<double> th(lo, hi);
      for (int s = 0; s < 20; ++s) {
        double theta = th(rng), mag = m01(rng);
        double e = mag * std::cos(theta), f = mag * std::sin(theta);
        CHECK(std::abs(br.g * e + br.b * f) <= d.mu + 1e-9);
        CHECK(std::abs(-br.b * e + br.g * f) <= d.nu + 1e-9);
      }
    }
  }
}

TEST_CASE("delta cuts reduce to |P| <= mu dE + nu dF and hold at embedded points") {
  BranchParams br;
  br.r = 0.05;
  br.x = 0.2;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);
  auto kb = delta_bounds(br, 1.1);
  auto mb = delta_bounds(br, 1.1);
  auto cuts = delta_cuts(net, m, 0, kb, mb);
  REQUIRE(cuts.size() == 4);

  // first cut: +Pkm - mu dE_km - nu dF_km <= 0 (normalized)
  const auto& row = cuts[0].row;
  double cp = 0, cde = 0, cdf = 0;
  for (auto [id, c] : row.terms) {
    if (id == m.cat.pkm(0)) cp = c;
    if (id == m.cat.de_km(0)) cde = c;
    if (id == m.cat.df_km(0)) cdf = c;
  }
  CHECK(cp > 0);
  CHECK(cde / cp == doctest::Approx(-kb.mu));
  CHECK(cdf / cp == doctest::Approx(-kb.nu));
  CHECK(row.coef_norm() == doctest::Approx(1.0));

  std::mt19937 rng(13);
  for (int t = 0; t < 200; ++t) {
    auto v = testutil::random_voltages(net, rng);
    LiftedPoint pt = embed_feasible_point(net, m, v);
    for (const auto& c : cuts) CHECK(c.row.slack(pt.x) >= -1e-9);
  }
}

TEST_CASE("delta cuts with zero bounds pin the shunt-adjusted flow") {
  BranchParams br;
  br.r = 0.05;
  br.x = 0.2;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);
  auto cuts = delta_cuts(net, m, 0, DeltaBounds{0, 0}, DeltaBounds{0, 0});
  LiftedPoint pt = zero_point(m);
  pt.x[(size_t)m.cat.pkm(0)] = 0.3;
  // +P <= 0 violated, -P <= 0 satisfied
  CHECK(cuts[0].row.slack(pt.x) == doctest::Approx(-0.3));
  CHECK(cuts[1].row.slack(pt.x) == doctest::Approx(0.3));
}

TEST_CASE("delta cuts hold at embedded points in the general regime") {
  std::mt19937 rng(14);
  for (int t = 0; t < 50; ++t) {
    BranchParams br = testutil::random_branch(rng, 2);
    Network net = net_with_branch(br);
    ModelInstance m = build_base_model(net);
    auto kb = delta_bounds(br, net.bus(1).Vmax);
    auto mb = delta_bounds(br, net.bus(2).Vmax);
    auto cuts = delta_cuts(net, m, 0, kb, mb);
    for (int s = 0; s < 40; ++s) {
      auto v = testutil::random_voltages(net, rng);
      LiftedPoint pt = embed_feasible_point(net, m, v);
      for (const auto& c : cuts) CHECK(c.row.slack(pt.x) >= -1e-9);
    }
  }
}

TEST_CASE("loss separation") {
  BranchParams br;
  br.r = 1.0;
  br.x = 1e-9;  // g ~ 1, b ~ 0
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);

  SUBCASE("no violation, no cut") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.pkm(0)] = 0.2;  // nonnegative rhs, zero lhs
    CHECK_FALSE(loss_separate(net, m, 0, pt).has_value());
  }
  SUBCASE("documented violation example") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.de_mk(0)] = 1.0;
    pt.x[(size_t)m.cat.pkm(0)] = 0.5;  // Pkm + Pmk = 0.5
    auto cut = loss_separate(net, m, 0, pt);
    REQUIRE(cut.has_value());
    // raw tangent: 2 dE - Pkm - Pmk <= 1, violated by 0.5
    double nrm = cut->row.coef_norm();
    CHECK(nrm == doctest::Approx(1.0));  // stored normalized
    CHECK(-cut->row.slack(pt.x) == doctest::Approx(cut->violation));
    // reconstruct the raw violation: 0.5 / ||(2,-1,-1)||
    CHECK(cut->violation ==
          doctest::Approx(0.5 / std::sqrt(6.0)).epsilon(1e-6));
  }
  SUBCASE("embedded points satisfy every loss tangent") {
    std::mt19937 rng(15);
    for (int t = 0; t < 40; ++t) {
      BranchParams rb = testutil::random_branch(rng, 2);
      Network rnet = net_with_branch(rb);
      ModelInstance rm = build_base_model(rnet);
      // tangents anchored at arbitrary points must still be valid
      LiftedPoint anchor = zero_point(rm);
      std::uniform_real_distribution<double> u(0.0, 2.0);
      anchor.x[(size_t)rm.cat.de_mk(0)] = u(rng);
      anchor.x[(size_t)rm.cat.df_mk(0)] = u(rng);
      anchor.x[(size_t)rm.cat.pkm(0)] = -10;  // force violation
      auto cut = loss_separate(rnet, rm, 0, anchor);
      REQUIRE(cut.has_value());
      for (int s = 0; s < 40; ++s) {
        auto v = testutil::random_voltages(rnet, rng);
        LiftedPoint pt = embed_feasible_point(rnet, rm, v);
        CHECK(cut->row.slack(pt.x) >= -1e-9);
      }
    }
  }
  SUBCASE("negative-g branches are skipped") {
    BranchParams neg = br;
    neg.r = -0.5;
    neg.x = 0.2;
    std::tie(neg.g, neg.b) = series_admittance(neg.r, neg.x);
    Network nnet = net_with_branch(neg);
    ModelInstance nm = build_base_model(nnet);
    LiftedPoint pt = zero_point(nm);
    pt.x[(size_t)nm.cat.de_mk(0)] = 5.0;
    CHECK_FALSE(loss_separate(nnet, nm, 0, pt).has_value());
  }
}

TEST_CASE("circle separation") {
  BranchParams br;
  br.r = 1.0;
  br.x = 0.0;  // r^2+x^2 = 1 so the cone constant c = 1
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);

  SUBCASE("inside the cone: no cut") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.v2(0)] = 1.0;
    pt.x[(size_t)m.cat.v2(1)] = 1.0;
    CHECK_FALSE(circle_separate(net, m, 0, pt, BranchEnd::SendingAtK).has_value());
  }
  SUBCASE("on the boundary: no cut") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.alpha_km(0)] = 1.0;
    pt.x[(size_t)m.cat.v2(0)] = 1.0;
    pt.x[(size_t)m.cat.v2(1)] = 1.0;
    CHECK_FALSE(circle_separate(net, m, 0, pt, BranchEnd::SendingAtK).has_value());
  }
  SUBCASE("documented violated point") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.alpha_km(0)] = 1.0;
    pt.x[(size_t)m.cat.v2(0)] = 1.0;
    pt.x[(size_t)m.cat.v2(1)] = 0.5;
    auto cut = circle_separate(net, m, 0, pt, BranchEnd::SendingAtK);
    REQUIRE(cut.has_value());
    double raw_gap = std::sqrt(4.0 + 0.25) - 1.5;  // ||(2,0,.5)|| - rhs
    CHECK(-cut->row.slack(pt.x) == doctest::Approx(cut->violation));
    // the stored row is unit-normalized, so recover the raw scale
    LinearConstraint raw = cut->row;
    double scale = 0;
    for (auto [id, c] : raw.terms)
      if (id == m.cat.alpha_km(0)) scale = 2.0 * (2.0 / std::sqrt(4.25)) / c;
    CHECK(cut->violation * scale == doctest::Approx(raw_gap).epsilon(1e-9));
    // and every cone point satisfies it
    std::mt19937 rng(16);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
      LiftedPoint q = zero_point(m);
      double v2k = 0.2 + u(rng), v2m = 0.2 + u(rng);
      double rad = std::sqrt(v2k * v2m) * u(rng);
      double phi = 2 * M_PI * u(rng);
      q.x[(size_t)m.cat.v2(0)] = v2k;
      q.x[(size_t)m.cat.v2(1)] = v2m;
      q.x[(size_t)m.cat.alpha_km(0)] = rad * std::cos(phi);
      q.x[(size_t)m.cat.beta_km(0)] = rad * std::sin(phi);
      CHECK(cut->row.slack(q.x) >= -1e-12);
    }
  }
  SUBCASE("embedded points satisfy circle cuts at both ends, general regime") {
    std::mt19937 rng(17);
    for (int t = 0; t < 30; ++t) {
      BranchParams rb = testutil::random_branch(rng, 2);
      rb.tau = t % 2 == 0 ? 0.88 + 0.06 * (t % 3) : 1.02 + 0.04 * (t % 3);
      Network rnet = net_with_branch(rb);
      ModelInstance rm = build_base_model(rnet);
      // anchor a violated point to get a cut, then check exact points
      double z2 = rb.r * rb.r + rb.x * rb.x;
      for (BranchEnd end : {BranchEnd::SendingAtK, BranchEnd::ReceivingAtM}) {
        double cone_c = end == BranchEnd::SendingAtK ? 1.0 / (rb.tau * rb.tau * z2)
                                                     : 1.0 / z2;
        LiftedPoint anchor = zero_point(rm);
        anchor.x[(size_t)(end == BranchEnd::SendingAtK ? rm.cat.alpha_km(0)
                                                       : rm.cat.alpha_mk(0))] =
            3.0 * std::sqrt(cone_c);
        anchor.x[(size_t)rm.cat.v2(0)] = 1.0;
        anchor.x[(size_t)rm.cat.v2(1)] = 1.0;
        auto cut = circle_separate(rnet, rm, 0, anchor, end);
        REQUIRE(cut.has_value());
        for (int s = 0; s < 40; ++s) {
          auto v = testutil::random_voltages(rnet, rng);
          LiftedPoint pt = embed_feasible_point(rnet, rm, v);
          CHECK(cut->row.slack(pt.x) >= -1e-9);
        }
      }
    }
  }
}

TEST_CASE("rating separation") {
  BranchParams br;
  br.r = 0.01;
  br.x = 0.1;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  br.rateA = 1.0;
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);

  SUBCASE("zero flow: no cut") {
    LiftedPoint pt = zero_point(m);
    CHECK_FALSE(rating_separate(net, m, 0, pt, BranchEnd::SendingAtK).has_value());
  }
  SUBCASE("P=Q=1 gives the sqrt(2)-1 tangent") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.pkm(0)] = 1.0;
    pt.x[(size_t)m.cat.qkm(0)] = 1.0;
    auto cut = rating_separate(net, m, 0, pt, BranchEnd::SendingAtK);
    REQUIRE(cut.has_value());
    CHECK(cut->violation == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-9));
    CHECK(cut->row.rhs == doctest::Approx(1.0));
    for (auto [id, c] : cut->row.terms) CHECK(c == doctest::Approx(1 / std::sqrt(2.0)));
  }
  SUBCASE("embedded in-rating points satisfy emitted cuts") {
    std::mt19937 rng(18);
    LiftedPoint anchor = zero_point(m);
    anchor.x[(size_t)m.cat.pmk(0)] = 1.4;
    anchor.x[(size_t)m.cat.qmk(0)] = -0.4;
    auto cut = rating_separate(net, m, 0, anchor, BranchEnd::ReceivingAtM);
    REQUIRE(cut.has_value());
    int checked = 0;
    for (int s = 0; s < 500 && checked < 100; ++s) {
      auto v = testutil::random_voltages(net, rng);
      LiftedPoint pt = embed_feasible_point(net, m, v);
      double p = pt[m.cat.pmk(0)], q = pt[m.cat.qmk(0)];
      if (p * p + q * q > br.rateA * br.rateA) continue;  // outside the rating
      ++checked;
      CHECK(cut->row.slack(pt.x) >= -1e-9);
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("psd certificate") {
  SUBCASE("identity is PSD") {
    double I[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK_FALSE(psd_certificate(I, 3).has_value());
  }
  SUBCASE("[[1,2],[2,1]]") {
    double M[4] = {1, 2, 2, 1};
    auto c = psd_certificate(M, 2);
    REQUIRE(c.has_value());
    CHECK(c->value == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(c->u[0] - 1 / std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(c->u[1] + 1 / std::sqrt(2.0)) < 1e-9);
  }
  SUBCASE("[[0,1],[1,0]]") {
    double M[4] = {0, 1, 1, 0};
    auto c = psd_certificate(M, 2);
    REQUIRE(c.has_value());
    CHECK(c->value == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("asymmetric input is symmetrized first") {
    double M[4] = {1, 4, 0, 1};  // symmetrized: [[1,2],[2,1]]
    auto c = psd_certificate(M, 2);
    REQUIRE(c.has_value());
    CHECK(c->value == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("random Gram matrices are accepted, indefinite ones certified") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 500; ++t) {
      int dim = 2 + (int)(u(rng) * 3 + 3) % 5;  // 2..6
      double G[81] = {0};
      // Gram: A' A
      double A[81];
      for (int i = 0; i < dim * dim; ++i) A[i] = u(rng);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          double s = 0;
          for (int k = 0; k < dim; ++k) s += A[k * dim + i] * A[k * dim + j];
          G[i * dim + j] = s;
        }
      CHECK_FALSE(psd_certificate(G, dim).has_value());
      // make it indefinite by construction
      double H[81];
      for (int i = 0; i < dim * dim; ++i) H[i] = G[i];
      for (int i = 0; i < dim; ++i) H[i * dim + i] -= 10.0;
      auto c = psd_certificate(H, dim);
      REQUIRE(c.has_value());
      double q = 0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          q += c->u[(size_t)i] * H[i * dim + j] * c->u[(size_t)j];
      CHECK(q == doctest::Approx(c->value).epsilon(1e-9));
      CHECK(c->value < 0);
      double nrm = 0;
      for (int i = 0; i < dim; ++i) nrm += c->u[(size_t)i] * c->u[(size_t)i];
      CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("sdp separation") {
  BranchParams br;
  br.r = 0.01;
  br.x = 0.1;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  Network net = net_with_branch(br);
  ModelInstance m = build_base_model(net);
  SdpSubset sub;
  sub.branch_j = 0;

  SUBCASE("exact embedded points produce rank-one moments: no cut") {
    std::mt19937 rng(20);
    for (int t = 0; t < 100; ++t) {
      auto v = testutil::random_voltages(net, rng);
      LiftedPoint pt = embed_feasible_point(net, m, v);
      CHECK_FALSE(sdp_separate(m, pt, sub).has_value());
      SdpSubset with_one = sub;
      with_one.include_one = true;
      CHECK_FALSE(sdp_separate(m, pt, with_one).has_value());
    }
  }
  SUBCASE("documented 2x2 block example") {
    LiftedPoint pt = zero_point(m);
    pt.x[(size_t)m.cat.ekk(0)] = 1.0;  // E_kk
    pt.x[(size_t)m.cat.fkk(1)] = 1.0;  // F_mm
    pt.x[(size_t)m.cat.ef_km(0)] = 2.0;
    auto cut = sdp_separate(m, pt, sub);
    REQUIRE(cut.has_value());
    // cut ~ 0.5 Ekk - EF + 0.5 Fmm >= 0, scaled to unit norm
    double ce = 0, cef = 0, cf = 0;
    for (auto [id, c] : cut->row.terms) {
      if (id == m.cat.ekk(0)) ce = c;
      if (id == m.cat.ef_km(0)) cef = c;
      if (id == m.cat.fkk(1)) cf = c;
    }
    CHECK(ce == doctest::Approx(cf).epsilon(1e-9));
    CHECK(cef / ce == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(cut->row.sense == Sense::GE);
    CHECK(cut->row.rhs == doctest::Approx(0.0));
    // raw violation 1 = |u'Wu|; normalized by ||(0.5,-1,0.5)|| = sqrt(1.5)
    CHECK(cut->violation == doctest::Approx(1.0 / std::sqrt(1.5)).epsilon(1e-9));
  }
  SUBCASE("emitted cuts are satisfied by 1000 random rank-one points") {
    LiftedPoint bad = zero_point(m);
    bad.x[(size_t)m.cat.ekk(0)] = 1.0;
    bad.x[(size_t)m.cat.fkk(1)] = 1.0;
    bad.x[(size_t)m.cat.ef_km(0)] = 2.0;
    auto cut = sdp_separate(m, bad, sub);
    REQUIRE(cut.has_value());
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int t = 0; t < 1000; ++t) {
      std::vector<std::complex<double>> v{{u(rng), u(rng)}, {u(rng), u(rng)}};
      LiftedPoint pt = embed_feasible_point(net, m, v);
      CHECK(cut->row.slack(pt.x) >= -1e-12);
    }
  }
  SUBCASE("explicit bus-list subsets use the same product variables") {
    SdpSubset buses;
    buses.buses = {0, 1};
    LiftedPoint bad = zero_point(m);
    bad.x[(size_t)m.cat.ekk(0)] = 1.0;
    bad.x[(size_t)m.cat.fkk(1)] = 1.0;
    bad.x[(size_t)m.cat.ef_km(0)] = 2.0;
    CHECK(sdp_separate(m, bad, buses).has_value());
  }
  SUBCASE("missing product variable is a configuration error") {
    // three-bus path 1-2, 2-3: pair (1,3) has no branch, hence no products
    Network net3 = parse_case(R"(
function mpc = three_bus
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0 0 0 1 1 0 345 1 1.1 0.9;
  2 1 10 0 0 0 1 1 0 345 1 1.1 0.9;
  3 1 10 0 0 0 1 1 0 345 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 300 -300 1 100 1 250 10; ];
mpc.branch = [
  1 2 0.01 0.1 0 0 0 0 0 0 1;
  2 3 0.01 0.1 0 0 0 0 0 0 1;
];
mpc.gencost = [ 2 0 0 3 0.1 5 0; ];
)");
    ModelInstance m3 = build_base_model(net3);
    SdpSubset bad_sub;
    bad_sub.buses = {0, 2};
    LiftedPoint pt = zero_point(m3);
    CHECK_THROWS_AS(sdp_separate(m3, pt, bad_sub), std::invalid_argument);
  }
}

TEST_CASE("cost separation tangent") {
  Network net = testutil::make_two_bus();
  ModelInstance m = build_base_model(net);
  LiftedPoint pt = zero_point(m);
  pt.x[(size_t)m.cat.pg(0)] = 2.0;
  pt.x[(size_t)m.cat.tg(0)] = 0.0;  // true cost at p=2: 0.11*1e4*4+500*2+150
  auto cut = cost_separate(net, m, 0, pt);
  REQUIRE(cut.has_value());
  CHECK(-cut->row.slack(pt.x) == doctest::Approx(cut->violation));
  // satisfied on the exact epigraph
  const auto& cc = net.generators[0].cost;
  for (double p = 0; p < 3.0; p += 0.1) {
    LiftedPoint q = zero_point(m);
    q.x[(size_t)m.cat.pg(0)] = p;
    q.x[(size_t)m.cat.tg(0)] = cc.c2 * p * p + cc.c1 * p + cc.c0;
    CHECK(cut->row.slack(q.x) >= -1e-9);
  }
}

TEST_CASE("supporting cuts hold at exact embedded points") {
  std::mt19937 rng(22);
  for (int regime = 0; regime <= 2; ++regime) {
    BranchParams br = testutil::random_branch(rng, regime);
    br.rateA = 50.0;  // large enough to keep arbitrary profiles inside
    Network net = net_with_branch(br);
    ModelInstance m = build_base_model(net);
    for (int t = 0; t < 30; ++t) {
      auto v = testutil::random_voltages(net, rng);
      LiftedPoint pt = embed_feasible_point(net, m, v);
      for (const Cut& c : supporting_cuts(net, m, 0, pt))
        CHECK(c.row.slack(pt.x) >= -1e-7);
    }
  }
}
