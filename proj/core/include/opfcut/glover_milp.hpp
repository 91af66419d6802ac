#pragma once

#include <array>
#include <string>
#include <vector>

#include "opfcut/lifted_model.hpp"
#include "opfcut/lp_backend.hpp"
#include "opfcut/netcase.hpp"

namespace opfcut {

// One binary-expanded coordinate of the MILP.
struct ExpansionSpec {
  int target = -1;       // catalog id of the expanded coordinate
  int T = 8;             // bit count (<= 30)
  double shift = 0;      // u = shift + scale * u_normalized
  double scale = 1;      // > 0
  std::string var;       // names, for the manifest
  std::string normalized, delta;
  std::vector<std::string> bits;
};

/// Greedy most-significant-first expansion u = sum 2^-j y_j + delta with
/// 0 <= delta <= 2^-T. Requires u in [0,1].
std::pair<std::vector<int>, double> binary_expansion(double u_normalized, int T);

/// The four linking rows making w = y*v valid for binary y and v in [0,1]:
/// w <= v, w <= y, w >= v + y - 1, w >= 0.
std::array<LinearConstraint, 4> mccormick_link(int y_var, int v_var, int w_var,
                                               const std::string& tag);

struct GloverBuild {
  LPModel milp;
  std::vector<ExpansionSpec> expansions;
  int T = 8;
};

/// Replace every product variable of the lifted base model by the Glover
/// sandwich: the lexicographically-first factor of each product is binary
/// expanded (after normalization to [0,1]); fixed factors degrade to exact
/// linear rows. Base constraints, bounds and the cost epigraph carry over.
GloverBuild build_milp(const Network& net, int T);

/// LP-format export (Binary/General sections included).
void export_milp(const LPModel& m, const std::string& path);

/// JSON manifest mapping each expanded coordinate to its bit variables.
std::string glover_manifest_json(const GloverBuild& gb);

}  // namespace opfcut
