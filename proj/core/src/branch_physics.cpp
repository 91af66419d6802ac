#include "opfcut/branch_physics.hpp"

#include <cmath>
#include <stdexcept>

namespace opfcut {

std::pair<double, double> series_admittance(double r, double x) {
  double z2 = r * r + x * x;
  if (z2 <= 0.0) throw std::domain_error("zero series impedance");
  return {r / z2, -x / z2};
}

BranchAdmittance branch_admittance_matrix(const BranchParams& br) {
  std::complex<double> y(br.g, br.b);
  std::complex<double> ysh(br.g_sh, br.b_sh);
  std::complex<double> n = std::polar(br.tau, br.sigma);
  BranchAdmittance Y;
  Y.kk = (y + 0.5 * ysh) / (br.tau * br.tau);
  Y.km = -y / std::conj(n);
  Y.mk = -y / n;
  Y.mm = y + 0.5 * ysh;
  return Y;
}

FlowQuad flow_rect(const BranchParams& br, const ComplexVoltagePair& v) {
  BranchAdmittance Y = branch_admittance_matrix(br);
  std::complex<double> Vk = v.vk(), Vm = v.vm();
  std::complex<double> Ikm = Y.kk * Vk + Y.km * Vm;
  std::complex<double> Imk = Y.mk * Vk + Y.mm * Vm;
  std::complex<double> Skm = Vk * std::conj(Ikm);
  std::complex<double> Smk = Vm * std::conj(Imk);
  return {Skm.real(), Skm.imag(), Smk.real(), Smk.imag()};
}

FlowQuad flow_polar(const BranchParams& br, double Vk_mag, double Vm_mag,
                    double theta_km) {
  const double g = br.g, b = br.b;
  const double tau = br.tau, sigma = br.sigma;
  const double vk2 = Vk_mag * Vk_mag, vm2 = Vm_mag * Vm_mag;
  const double vkm = Vk_mag * Vm_mag;
  const double ck = std::cos(theta_km - sigma), sk = std::sin(theta_km - sigma);
  // theta_mk + sigma = -(theta_km - sigma)
  const double cm = ck, sm = -sk;

  FlowQuad F;
  F.Pkm = vk2 * g / (tau * tau) - vkm * (g / tau) * ck - vkm * (b / tau) * sk +
          br.g_sh / (2 * tau * tau) * vk2;
  F.Qkm = -vk2 * b / (tau * tau) + vkm * (b / tau) * ck - vkm * (g / tau) * sk -
          br.b_sh / (2 * tau * tau) * vk2;
  F.Pmk = vm2 * g - vkm * (g / tau) * cm - vkm * (b / tau) * sm +
          br.g_sh / 2 * vm2;
  F.Qmk = -vm2 * b + vkm * (b / tau) * cm - vkm * (g / tau) * sm -
          br.b_sh / 2 * vm2;
  return F;
}

std::complex<double> k1_voltage(const BranchParams& br,
                                std::complex<double> Vk) {
  return Vk / std::polar(br.tau, br.sigma);
}

}  // namespace opfcut
