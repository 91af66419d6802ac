#include <cmath>
#include <tuple>
#include <complex>
#include <random>

#include "doctest.h"
#include "opfcut/branch_physics.hpp"
#include "test_util.hpp"

using namespace opfcut;

TEST_CASE("series admittance basics") {
  auto [g0, b0] = series_admittance(0.0, 1.0);
  CHECK(g0 == doctest::Approx(0.0));
  CHECK(b0 == doctest::Approx(-1.0));
  auto [g1, b1] = series_admittance(1.0, 0.0);
  CHECK(g1 == doctest::Approx(1.0));
  CHECK(b1 == doctest::Approx(0.0));
  auto [g2, b2] = series_admittance(0.01, 0.1);
  CHECK(g2 == doctest::Approx(0.990099).epsilon(1e-6));
  CHECK(b2 == doctest::Approx(-9.90099).epsilon(1e-6));
  CHECK_THROWS_AS(series_admittance(0.0, 0.0), std::domain_error);
}

TEST_CASE("branch admittance matrix entries") {
  BranchParams br;
  br.r = 0.1;
  br.x = 0.2;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  std::complex<double> y(br.g, br.b);

  SUBCASE("no transformer, no shunt") {
    auto Y = branch_admittance_matrix(br);
    CHECK(std::abs(Y.kk - y) < 1e-14);
    CHECK(std::abs(Y.km + y) < 1e-14);
    CHECK(std::abs(Y.mk + y) < 1e-14);
    CHECK(std::abs(Y.mm - y) < 1e-14);
  }
  SUBCASE("tau = 2") {
    br.tau = 2.0;
    auto Y = branch_admittance_matrix(br);
    CHECK(std::abs(Y.kk - y / 4.0) < 1e-14);
    CHECK(std::abs(Y.km + y / 2.0) < 1e-14);
    CHECK(std::abs(Y.mk + y / 2.0) < 1e-14);
    CHECK(std::abs(Y.mm - y) < 1e-14);
  }
  SUBCASE("shunt only") {
    br.b_sh = 0.2;
    auto Y = branch_admittance_matrix(br);
    CHECK(std::abs(Y.kk - (y + std::complex<double>(0, 0.1))) < 1e-14);
    CHECK(std::abs(Y.mm - (y + std::complex<double>(0, 0.1))) < 1e-14);
  }
  SUBCASE("phase shift splits the off-diagonals") {
    br.sigma = 0.3;
    auto Y = branch_admittance_matrix(br);
    std::complex<double> n = std::polar(1.0, 0.3);
    CHECK(std::abs(Y.km + y * n) < 1e-14);
    CHECK(std::abs(Y.mk + y / n) < 1e-14);
  }
}

TEST_CASE("flow_rect: identical endpoint voltages give zero flow") {
  BranchParams br;
  br.r = 0.02;
  br.x = 0.15;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);
  FlowQuad f = flow_rect(br, {0.97, 0.21, 0.97, 0.21});
  CHECK(f.Pkm == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.Qkm == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.Pmk == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.Qmk == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flow_rect matches the hand-evaluated pure-reactance case") {
  BranchParams br;
  br.r = 0.0;
  br.x = 0.1;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);  // g=0, b=-10
  ComplexVoltagePair v{1.0, 0.0, std::cos(-0.1), std::sin(-0.1)};
  FlowQuad f = flow_rect(br, v);
  CHECK(f.Pkm == doctest::Approx(10 * std::sin(0.1)).epsilon(1e-9));
}

TEST_CASE("loss identity Pkm + Pmk = g |Vk - Vm|^2 without shunt/transformer") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  for (int t = 0; t < 1000; ++t) {
    BranchParams br = testutil::random_branch(rng, 0);
    ComplexVoltagePair v{u(rng), u(rng), u(rng), u(rng)};
    FlowQuad f = flow_rect(br, v);
    double loss = br.g * std::norm(v.vk() - v.vm());
    CHECK(f.Pkm + f.Pmk == doctest::Approx(loss).epsilon(1e-9));
  }
}

TEST_CASE("general loss identity with shunts and transformer") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.9, 1.1);
  std::uniform_real_distribution<double> a(-0.6, 0.6);
  for (int t = 0; t < 1000; ++t) {
    BranchParams br = testutil::random_branch(rng, 2);
    double vk = u(rng), vm = u(rng), thk = a(rng), thm = a(rng);
    ComplexVoltagePair v{vk * std::cos(thk), vk * std::sin(thk),
                         vm * std::cos(thm), vm * std::sin(thm)};
    FlowQuad f = flow_rect(br, v);
    double loss_expected =
        (vk * vk / (br.tau * br.tau) + vm * vm) * br.g -
        2 * br.g * (vk / br.tau) * vm * std::cos(thk - thm - br.sigma) +
        br.g_sh / (2 * br.tau * br.tau) * vk * vk + br.g_sh / 2 * vm * vm;
    CHECK(f.Pkm + f.Pmk == doctest::Approx(loss_expected).epsilon(1e-9));
    // the k1 form of the same identity
    std::complex<double> vk1 = k1_voltage(br, v.vk());
    double via_k1 = br.g * std::norm(v.vm() - vk1) +
                    br.g_sh / (2 * br.tau * br.tau) * vk * vk +
                    br.g_sh / 2 * vm * vm;
    CHECK(f.Pkm + f.Pmk == doctest::Approx(via_k1).epsilon(1e-9));
  }
}

TEST_CASE("flow_polar agrees with flow_rect across all three regimes") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> mag(0.85, 1.15);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int regime = 0; regime <= 2; ++regime) {
    for (int t = 0; t < 1000; ++t) {
      BranchParams br = testutil::random_branch(rng, regime);
      double vk = mag(rng), vm = mag(rng), thk = ang(rng), thm = ang(rng);
      ComplexVoltagePair v{vk * std::cos(thk), vk * std::sin(thk),
                           vm * std::cos(thm), vm * std::sin(thm)};
      FlowQuad fr = flow_rect(br, v);
      FlowQuad fp = flow_polar(br, vk, vm, thk - thm);
      CHECK(fr.Pkm == doctest::Approx(fp.Pkm).epsilon(1e-9));
      CHECK(fr.Qkm == doctest::Approx(fp.Qkm).epsilon(1e-9));
      CHECK(fr.Pmk == doctest::Approx(fp.Pmk).epsilon(1e-9));
      CHECK(fr.Qmk == doctest::Approx(fp.Qmk).epsilon(1e-9));
    }
  }
}

TEST_CASE("general-case formulas reduce to the shunt-only case at tau=1, sigma=0") {
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  for (int t = 0; t < 200; ++t) {
    BranchParams general = testutil::random_branch(rng, 2);
    general.tau = 1.0;
    general.sigma = 0.0;
    BranchParams shuntcase = general;  // same parameters, shunt-regime path
    ComplexVoltagePair v{u(rng), u(rng), u(rng), u(rng)};
    FlowQuad a = flow_rect(general, v);
    // shunt-only closed form: I = y (Vk - Vm) + ysh/2 Vk
    std::complex<double> y(shuntcase.g, shuntcase.b);
    std::complex<double> ysh(shuntcase.g_sh, shuntcase.b_sh);
    std::complex<double> ikm = y * (v.vk() - v.vm()) + 0.5 * ysh * v.vk();
    std::complex<double> imk = y * (v.vm() - v.vk()) + 0.5 * ysh * v.vm();
    std::complex<double> skm = v.vk() * std::conj(ikm);
    std::complex<double> smk = v.vm() * std::conj(imk);
    CHECK(a.Pkm == doctest::Approx(skm.real()).epsilon(1e-12));
    CHECK(a.Qkm == doctest::Approx(skm.imag()).epsilon(1e-12));
    CHECK(a.Pmk == doctest::Approx(smk.real()).epsilon(1e-12));
    CHECK(a.Qmk == doctest::Approx(smk.imag()).epsilon(1e-12));
  }
}

TEST_CASE("k1 voltage") {
  BranchParams br;
  br.r = 0.1;
  br.x = 0.2;
  std::tie(br.g, br.b) = series_admittance(br.r, br.x);

  SUBCASE("identity transformer") {
    std::complex<double> vk(0.93, -0.12);
    CHECK(std::abs(k1_voltage(br, vk) - vk) < 1e-15);
  }
  SUBCASE("tau=2") {
    br.tau = 2.0;
    CHECK(std::abs(k1_voltage(br, {1.0, 0.0}) - std::complex<double>(0.5, 0.0)) < 1e-15);
  }
  SUBCASE("sigma = pi/2 rotates by -90 degrees") {
    br.sigma = M_PI / 2;
    CHECK(std::abs(k1_voltage(br, {1.0, 0.0}) - std::complex<double>(0.0, -1.0)) < 1e-15);
  }
  SUBCASE("component formula") {
    br.tau = 1.7;
    br.sigma = 0.43;
    std::complex<double> vk(0.8, -0.5);
    std::complex<double> got = k1_voltage(br, vk);
    double c = std::cos(br.sigma), s = std::sin(br.sigma);
    CHECK(got.real() == doctest::Approx((vk.real() * c + vk.imag() * s) / br.tau).epsilon(1e-12));
    CHECK(got.imag() == doctest::Approx((vk.imag() * c - vk.real() * s) / br.tau).epsilon(1e-12));
  }
}
