#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "opfcut/branch_physics.hpp"
#include "opfcut/netcase.hpp"

namespace testutil {

#ifndef OPFCUT_DATA_DIR
#define OPFCUT_DATA_DIR "data"
#endif

inline std::string data_path(const std::string& name) {
  return std::string(OPFCUT_DATA_DIR) + "/" + name;
}

// random in-box voltage profile, one complex voltage per bus; the reference
// bus keeps angle 0 (the without-loss-of-generality rotation every model
// and cut assumes)
inline std::vector<std::complex<double>> random_voltages(const opfcut::Network& net,
                                                         std::mt19937& rng) {
  std::vector<std::complex<double>> v;
  v.reserve(net.buses.size());
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (const auto& b : net.buses) {
    std::uniform_real_distribution<double> mag(b.Vmin, b.Vmax);
    double th = b.id == net.reference_bus ? 0.0 : ang(rng);
    v.emplace_back(std::polar(mag(rng), th));
  }
  return v;
}

// 2-bus, 1-branch, 1-generator network used across the model tests
inline opfcut::Network make_two_bus() {
  return opfcut::parse_case(R"(
function mpc = two_bus
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0  0  0 0 1 1 0 345 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 345 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 300 -300 1 100 1 250 10;
];
mpc.branch = [
  1 2 0.01 0.1 0 250 250 250 0 0 1;
];
mpc.gencost = [
  2 1500 0 3 0.11 5 150;
];
)");
}

// buses with at least one in-service generator (indices into net.buses)
inline std::vector<bool> gen_buses(const opfcut::Network& net) {
  std::vector<bool> has(net.buses.size(), false);
  for (const auto& g : net.generators)
    if (g.in_service) has[(size_t)net.bus_index(g.bus)] = true;
  return has;
}

inline opfcut::BranchParams random_branch(std::mt19937& rng, int regime) {
  // regime 0: plain line; 1: shunt, no transformer; 2: general
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  opfcut::BranchParams br;
  br.from = 1;
  br.to = 2;
  br.r = 0.001 + 0.1 * ur(rng);
  br.x = 0.01 + 0.3 * ur(rng);
  auto [g, b] = opfcut::series_admittance(br.r, br.x);
  br.g = g;
  br.b = b;
  if (regime >= 1) {
    br.b_sh = 0.5 * ur(rng);
    br.g_sh = regime == 1 && ur(rng) < 0.5 ? 0.0 : 0.05 * ur(rng);
  }
  if (regime >= 2) {
    br.tau = 0.9 + 0.2 * ur(rng);
    br.sigma = (ur(rng) - 0.5) * 0.4;
  }
  return br;
}

}  // namespace testutil
