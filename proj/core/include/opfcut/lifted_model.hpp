#pragma once

#include <complex>
#include <string>
#include <vector>

#include "opfcut/linear.hpp"
#include "opfcut/lp_backend.hpp"
#include "opfcut/netcase.hpp"

namespace opfcut {

// Variable catalog of the lifted relaxation. Layout (deterministic):
//   per bus    : V2, e, f, Ekk, Fkk, X           (6)
//   per branch : Pkm Qkm Pmk Qmk  a_km b_km a_mk b_mk
//                E_km EF_km FE_km F_km  dE_km dF_km dE_mk dF_mk   (16)
//   per gen    : pg qg tg                        (3)
// Only in-service branches and generators get variables.
struct VarCatalog {
  struct BranchEntry {
    int net_index = 0;     // into Network::branches
    int from = 0, to = 0;  // indices into Network::buses
    std::string fwd, rev;  // name tags, e.g. "4_9" / "9_4" (parallels suffixed)
  };
  struct GenEntry {
    int net_index = 0;
    int bus = 0;  // index into Network::buses
  };

  int nbus = 0;
  std::vector<BranchEntry> branches;
  std::vector<GenEntry> gens;
  std::vector<std::string> names;

  int nvars() const { return (int)names.size(); }

  int v2(int bus) const { return 6 * bus + 0; }
  int e(int bus) const { return 6 * bus + 1; }
  int f(int bus) const { return 6 * bus + 2; }
  int ekk(int bus) const { return 6 * bus + 3; }
  int fkk(int bus) const { return 6 * bus + 4; }
  int xk(int bus) const { return 6 * bus + 5; }

  int branch_base() const { return 6 * nbus; }
  int pkm(int j) const { return 6 * nbus + 16 * j + 0; }
  int qkm(int j) const { return 6 * nbus + 16 * j + 1; }
  int pmk(int j) const { return 6 * nbus + 16 * j + 2; }
  int qmk(int j) const { return 6 * nbus + 16 * j + 3; }
  int alpha_km(int j) const { return 6 * nbus + 16 * j + 4; }
  int beta_km(int j) const { return 6 * nbus + 16 * j + 5; }
  int alpha_mk(int j) const { return 6 * nbus + 16 * j + 6; }
  int beta_mk(int j) const { return 6 * nbus + 16 * j + 7; }
  int e_km(int j) const { return 6 * nbus + 16 * j + 8; }
  int ef_km(int j) const { return 6 * nbus + 16 * j + 9; }
  int fe_km(int j) const { return 6 * nbus + 16 * j + 10; }
  int f_km(int j) const { return 6 * nbus + 16 * j + 11; }
  int de_km(int j) const { return 6 * nbus + 16 * j + 12; }
  int df_km(int j) const { return 6 * nbus + 16 * j + 13; }
  int de_mk(int j) const { return 6 * nbus + 16 * j + 14; }
  int df_mk(int j) const { return 6 * nbus + 16 * j + 15; }

  int gen_base() const { return 6 * nbus + 16 * (int)branches.size(); }
  int pg(int j) const { return gen_base() + 3 * j + 0; }
  int qg(int j) const { return gen_base() + 3 * j + 1; }
  int tg(int j) const { return gen_base() + 3 * j + 2; }
};

struct LiftedPoint {
  std::vector<double> x;
  double operator[](int id) const { return x[(size_t)id]; }
};

struct BuildOptions {
  double reference_angle = 0.0;                // radians
  std::vector<AngleInterval> angle_intervals;  // per-bus tightening
};

struct ModelInstance {
  VarCatalog cat;
  std::vector<LinearConstraint> rows;  // base constraints
  std::vector<double> lb, ub, obj;     // minimize obj'x
  std::vector<Cut> cut_pool;           // append-only

  double objective_at(const std::vector<double>& x) const {
    double v = 0;
    for (size_t i = 0; i < obj.size(); ++i) v += obj[i] * x[i];
    return v;
  }
};

/// Assemble the base linear relaxation: linking equalities, rectangular flow
/// definitions over product variables, bus balances, bounds, reference-angle
/// fixing, absolute-difference bounding pairs and the cost epigraph.
ModelInstance build_base_model(const Network& net, const BuildOptions& opt = {});

/// Exact lifted embedding of a voltage assignment (one complex voltage per
/// bus, in Network::buses order). Generator outputs absorb their bus
/// residuals (split equally when a bus hosts several units); epigraph values
/// are exact quadratic costs.
LiftedPoint embed_feasible_point(const Network& net, const ModelInstance& m,
                                 const std::vector<std::complex<double>>& voltages);

/// Tangent of the quadratic cost at p_hat: t >= (2 c2 p_hat + c1) p - c2 p_hat^2 + c0.
LinearConstraint cost_epigraph_tangent(const CostCurve& cost, double p_hat,
                                       int p_var, int t_var, std::string name);

/// Flatten model rows + cut pool into a solver/export LP.
LPModel to_lp_model(const ModelInstance& m);

/// LP-format text of the instance (deterministic naming).
void write_model_lp(const ModelInstance& m, const std::string& path);

}  // namespace opfcut
