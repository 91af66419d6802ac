#pragma once

#include <complex>
#include <utility>

#include "opfcut/netcase.hpp"

namespace opfcut {

// Rectangular endpoint voltages of one branch.
struct ComplexVoltagePair {
  double e_k = 0, f_k = 0;
  double e_m = 0, f_m = 0;

  std::complex<double> vk() const { return {e_k, f_k}; }
  std::complex<double> vm() const { return {e_m, f_m}; }
  double mag_k() const { return std::abs(vk()); }
  double mag_m() const { return std::abs(vm()); }
  double angle_k() const { return std::atan2(f_k, e_k); }
  double angle_m() const { return std::atan2(f_m, e_m); }
};

// Per-unit power injections at the two line ends (flow *into* the line).
struct FlowQuad {
  double Pkm = 0, Qkm = 0;
  double Pmk = 0, Qmk = 0;
};

struct BranchAdmittance {
  std::complex<double> kk, km, mk, mm;
};

/// g = r/(r^2+x^2), b = -x/(r^2+x^2). Throws on zero impedance.
std::pair<double, double> series_admittance(double r, double x);

/// 2x2 branch admittance matrix of the pi-model with transformer at the
/// "from" end: I = Y * (Vk, Vm).
BranchAdmittance branch_admittance_matrix(const BranchParams& br);

/// Exact flows from S = V I*, I = Y V. Authoritative for every regime.
FlowQuad flow_rect(const BranchParams& br, const ComplexVoltagePair& v);

/// Same flows from the polar trigonometric expressions; agrees with
/// flow_rect to roundoff on consistent inputs.
FlowQuad flow_polar(const BranchParams& br, double Vk_mag, double Vm_mag,
                    double theta_km);

/// Voltage at the fictitious node between the ideal transformer and the
/// series impedance: V_k1 = V_k / (tau e^{j sigma}).
std::complex<double> k1_voltage(const BranchParams& br,
                                std::complex<double> Vk);

}  // namespace opfcut
