#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opfcut/cuts.hpp"
#include "opfcut/lifted_model.hpp"
#include "opfcut/netcase.hpp"

namespace opfcut {

struct SolveConfig {
  // enabled cut families
  bool delta = true, loss = true, circle = true, sdp = true, rating = true,
       cost = true;

  double tol_violation = 1e-6;  // minimum normalized violation to accept a cut
  double tol_improve = 1e-7;    // relative bound improvement counted as progress
  int max_rounds = 200;
  int max_cuts_per_round_per_family = 0;  // 0 = 2 * branch count
  int stall_rounds = 5;

  std::vector<AngleInterval> angle_intervals;  // bound tightening
  double reference_angle = 0.0;
  bool sdp_with_one = false;     // use (1, e, f, ...) subsets
  bool loss_both_ends = false;   // also emit the k-side loss tangents
  std::vector<std::vector<int>> sdp_bus_subsets;  // extra subsets, bus ids
  unsigned seed = 0;             // echoed into the report
};

struct RoundStat {
  double bound = 0;
  std::map<std::string, int> added;  // family -> cuts accepted this round
};

struct SolveReport {
  enum class Status { Converged, RoundLimit, Infeasible };
  Status status = Status::Converged;
  bool fully_separated = false;  // no separator fired at the final iterate
  int rounds = 0;
  double final_bound = 0;
  std::optional<double> reference_objective;
  std::optional<double> gap;  // (reference - bound) / reference
  double wall_seconds = 0;
  long lp_iterations = 0;
  unsigned seed = 0;
  std::map<std::string, int> cuts_per_family;
  std::vector<RoundStat> trajectory;
};

const char* report_status_name(SolveReport::Status s);

// Final engine state, for callers that keep working with the relaxation.
struct RunArtifacts {
  ModelInstance model;    // base rows + full cut pool
  LiftedPoint last_point; // last LP iterate (empty when infeasible)
};

/// The cutting-plane loop: solve the LP relaxation, separate every enabled
/// family at the iterate, append violated cuts, repeat until no separator
/// fires, the bound stalls, or the round limit hits.
SolveReport run(const Network& net, const SolveConfig& cfg = {},
                std::optional<double> reference_obj = std::nullopt,
                RunArtifacts* artifacts = nullptr);

/// report_v1 JSON document.
std::string report_to_json(const SolveReport& rep);
/// round-by-round bound trajectory as CSV ("round,bound,cuts_added").
std::string report_to_csv(const SolveReport& rep);

}  // namespace opfcut
