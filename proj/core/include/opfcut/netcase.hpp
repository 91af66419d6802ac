#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace opfcut {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BusKind { PQ, PV, Reference };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double Pd = 0, Qd = 0;    // per-unit demand
  double Gs = 0, Bs = 0;    // per-unit bus shunt
  double Vmin = 0, Vmax = 0;
};

struct CostCurve {
  double c2 = 0, c1 = 0, c0 = 0;  // cost = c2*p^2 + c1*p + c0, p in per-unit
};

struct Generator {
  int bus = 0;
  double Pmin = 0, Pmax = 0;
  double Qmin = 0, Qmax = 0;
  CostCurve cost;
  bool in_service = true;
};

// Pi-model branch. The ideal transformer (tau, sigma) sits at the "from" end;
// g,b are the series admittance, g_sh,b_sh the total shunt admittance split
// half per end.
struct BranchParams {
  int from = 0, to = 0;
  double r = 0, x = 0;
  double g = 0, b = 0;        // r/(r^2+x^2), -x/(r^2+x^2)
  double g_sh = 0, b_sh = 0;
  double tau = 1.0;
  double sigma = 0.0;         // radians
  double rateA = 0.0;         // per-unit apparent power limit, 0 = unlimited
  bool in_service = true;
};

struct Network {
  double baseMVA = 0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<BranchParams> branches;
  int reference_bus = 0;

  int bus_index(int id) const;  // -1 if unknown
  const Bus& bus(int id) const;
};

/// Parse a MATPOWER-style case file (matrices baseMVA, bus, gen, branch,
/// gencost) into a validated per-unit Network.
Network parse_case(const std::string& text);

/// Same, reading from a file path.
Network parse_case_file(const std::string& path);

/// Canonical JSON serialization (stable key order, full double precision).
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& json_text);

}  // namespace opfcut
