#include "opfcut/cutting_plane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace opfcut {

namespace {

// duplicate suppression: coefficients rounded at 1e-9
std::string cut_key(const LinearConstraint& row) {
  std::string key;
  key.reserve(row.terms.size() * 16 + 16);
  key += std::to_string((int)row.sense);
  key += '|';
  key += std::to_string((long long)std::llround(row.rhs * 1e9));
  for (auto [id, c] : row.terms) {
    key += '|';
    key += std::to_string(id);
    key += ':';
    key += std::to_string((long long)std::llround(c * 1e9));
  }
  return key;
}

std::optional<AngleInterval> interval_for(const SolveConfig& cfg, int bus_id,
                                          double ref_angle, int ref_bus_id) {
  std::optional<AngleInterval> out;
  if (bus_id == ref_bus_id) out = AngleInterval{bus_id, ref_angle, ref_angle};
  for (const auto& ai : cfg.angle_intervals) {
    if (ai.bus != bus_id) continue;
    if (!out) {
      out = ai;
    } else {
      out->lo = std::max(out->lo, ai.lo);
      out->hi = std::min(out->hi, ai.hi);
    }
  }
  return out;
}

}  // namespace

const char* report_status_name(SolveReport::Status s) {
  switch (s) {
    case SolveReport::Status::Converged: return "converged";
    case SolveReport::Status::RoundLimit: return "round-limit";
    case SolveReport::Status::Infeasible: return "infeasible";
  }
  return "?";
}

SolveReport run(const Network& net, const SolveConfig& cfg,
                std::optional<double> reference_obj, RunArtifacts* artifacts) {
  auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  rep.seed = cfg.seed;
  rep.reference_objective = reference_obj;

  BuildOptions bopt;
  bopt.reference_angle = cfg.reference_angle;
  bopt.angle_intervals = cfg.angle_intervals;
  ModelInstance model = build_base_model(net, bopt);
  const VarCatalog& cat = model.cat;

  std::unordered_set<std::string> pool_keys;
  auto accept = [&](Cut&& cut) -> bool {
    std::string key = cut_key(cut.row);
    if (!pool_keys.insert(key).second) return false;
    model.cut_pool.push_back(std::move(cut));
    return true;
  };

  // Delta inequalities are point-free; install them up front with bounds
  // tightened by any configured angle interval of the incident bus.
  if (cfg.delta) {
    for (int j = 0; j < (int)cat.branches.size(); ++j) {
      const auto& be = cat.branches[(size_t)j];
      const BranchParams& br = net.branches[(size_t)be.net_index];
      const Bus& busk = net.buses[(size_t)be.from];
      const Bus& busm = net.buses[(size_t)be.to];
      auto kb = delta_bounds(br, busk.Vmax,
                             interval_for(cfg, busk.id, cfg.reference_angle,
                                          net.reference_bus));
      auto mb = delta_bounds(br, busm.Vmax,
                             interval_for(cfg, busm.id, cfg.reference_angle,
                                          net.reference_bus));
      for (Cut& c : delta_cuts(net, model, j, kb, mb)) {
        rep.cuts_per_family["delta"] += accept(std::move(c)) ? 1 : 0;
      }
    }
  }

  SimplexSolver solver(to_lp_model(model));
  int cap = cfg.max_cuts_per_round_per_family > 0
                ? cfg.max_cuts_per_round_per_family
                : 2 * std::max<int>(1, (int)cat.branches.size());

  double prev_bound = -std::numeric_limits<double>::infinity();
  int stall = 0;
  rep.status = SolveReport::Status::RoundLimit;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    LPSolution sol = solver.solve();
    rep.lp_iterations = sol.iterations;
    if (sol.status == LPSolution::Status::Infeasible) {
      rep.status = SolveReport::Status::Infeasible;
      rep.rounds = round;
      break;
    }
    if (sol.status != LPSolution::Status::Optimal)
      throw std::runtime_error(std::string("cutting_plane: LP solve failed (") +
                               status_name(sol.status) + ") at round " +
                               std::to_string(round));

    double bound = sol.objective;
    if (bound < prev_bound - 1e-7)
      std::fprintf(stderr,
                   "cutting_plane: bound decreased by %.3e at round %d\n",
                   prev_bound - bound, round);
    LiftedPoint pt{sol.x};

    RoundStat rs;
    rs.bound = bound;
    rep.trajectory.push_back(rs);
    rep.rounds = round + 1;
    rep.final_bound = bound;
    if (artifacts) artifacts->last_point = pt;

    // separate every enabled family at the iterate
    std::vector<Cut> found;
    for (int j = 0; j < (int)cat.branches.size(); ++j) {
      if (cfg.loss) {
        if (auto c = loss_separate(net, model, j, pt, BranchEnd::ReceivingAtM,
                                   cfg.tol_violation))
          found.push_back(std::move(*c));
        if (cfg.loss_both_ends) {
          if (auto c = loss_separate(net, model, j, pt, BranchEnd::SendingAtK,
                                     cfg.tol_violation))
            found.push_back(std::move(*c));
        }
      }
      if (cfg.circle) {
        for (BranchEnd end : {BranchEnd::SendingAtK, BranchEnd::ReceivingAtM})
          if (auto c = circle_separate(net, model, j, pt, end, cfg.tol_violation))
            found.push_back(std::move(*c));
      }
      if (cfg.rating) {
        for (BranchEnd end : {BranchEnd::SendingAtK, BranchEnd::ReceivingAtM})
          if (auto c = rating_separate(net, model, j, pt, end, cfg.tol_violation))
            found.push_back(std::move(*c));
      }
      if (cfg.sdp) {
        SdpSubset sub;
        sub.branch_j = j;
        sub.include_one = cfg.sdp_with_one;
        if (auto c = sdp_separate(model, pt, sub, cfg.tol_violation))
          found.push_back(std::move(*c));
      }
    }
    if (cfg.sdp) {
      for (const auto& bus_ids : cfg.sdp_bus_subsets) {
        SdpSubset sub;
        sub.branch_j = -1;
        sub.include_one = cfg.sdp_with_one;
        for (int id : bus_ids) {
          int bi = net.bus_index(id);
          if (bi < 0)
            throw std::invalid_argument("sdp subset references unknown bus " +
                                        std::to_string(id));
          sub.buses.push_back(bi);
        }
        if (auto c = sdp_separate(model, pt, sub, cfg.tol_violation))
          found.push_back(std::move(*c));
      }
    }
    if (cfg.cost) {
      for (int gj = 0; gj < (int)cat.gens.size(); ++gj)
        if (auto c = cost_separate(net, model, gj, pt, cfg.tol_violation))
          found.push_back(std::move(*c));
    }

    // separation soundness is a hard engine invariant
    for (const Cut& c : found) {
      if (!(c.violation > cfg.tol_violation) || -c.row.slack(pt.x) <= 0)
        throw std::logic_error("separator returned a non-violated cut (" +
                               std::string(family_name(c.family)) + " " + c.source + ")");
    }

    // keep the most violated per family, capped; the batch is only appended
    // when the loop continues, so the pool always matches what the last LP
    // solve has seen
    std::stable_sort(found.begin(), found.end(),
                     [](const Cut& a, const Cut& b) { return a.violation > b.violation; });
    if (found.empty()) {
      rep.status = SolveReport::Status::Converged;
      rep.fully_separated = true;
      break;
    }
    double rel = std::abs(bound - prev_bound) / std::max(1.0, std::abs(bound));
    stall = rel < cfg.tol_improve ? stall + 1 : 0;
    prev_bound = bound;
    if (stall >= cfg.stall_rounds) {
      rep.status = SolveReport::Status::Converged;
      break;
    }
    if (round + 1 >= cfg.max_rounds) break;  // round limit, nothing to append

    std::map<std::string, int> taken;
    std::vector<LinearConstraint> new_rows;
    for (Cut& c : found) {
      std::string fam = family_name(c.family);
      if (taken[fam] >= cap) continue;
      LinearConstraint row = c.row;
      if (!accept(std::move(c))) continue;
      ++taken[fam];
      ++rep.cuts_per_family[fam];
      ++rep.trajectory.back().added[fam];
      row.name = "cut_" + fam + "_r" + std::to_string(round) + "_" +
                 std::to_string(taken[fam]);
      new_rows.push_back(std::move(row));
    }
    if (new_rows.empty()) {  // everything violated was already pooled
      rep.status = SolveReport::Status::Converged;
      break;
    }
    solver.append_rows(new_rows);
  }

  if (reference_obj) {
    double ref = *reference_obj;
    if (std::abs(ref) > 1e-12 && rep.status != SolveReport::Status::Infeasible)
      rep.gap = (ref - rep.final_bound) / ref;
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (artifacts) artifacts->model = std::move(model);
  return rep;
}

std::string report_to_json(const SolveReport& rep) {
  nlohmann::ordered_json j;
  j["schema"] = "report_v1";
  j["status"] = report_status_name(rep.status);
  j["fully_separated"] = rep.fully_separated;
  j["rounds"] = rep.rounds;
  j["final_bound"] = rep.final_bound;
  if (rep.reference_objective) j["reference_objective"] = *rep.reference_objective;
  if (rep.gap) j["gap"] = *rep.gap;
  j["wall_seconds"] = rep.wall_seconds;
  j["lp_iterations"] = rep.lp_iterations;
  j["seed"] = rep.seed;
  j["cuts"] = nlohmann::ordered_json::object();
  for (const auto& [fam, n] : rep.cuts_per_family) j["cuts"][fam] = n;
  j["trajectory"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < rep.trajectory.size(); ++i) {
    nlohmann::ordered_json r;
    r["round"] = (int)i + 1;
    r["bound"] = rep.trajectory[i].bound;
    r["added"] = nlohmann::ordered_json::object();
    for (const auto& [fam, n] : rep.trajectory[i].added) r["added"][fam] = n;
    j["trajectory"].push_back(std::move(r));
  }
  return j.dump(2);
}

std::string report_to_csv(const SolveReport& rep) {
  std::ostringstream out;
  out << "round,bound,cuts_added\n";
  for (size_t i = 0; i < rep.trajectory.size(); ++i) {
    int added = 0;
    for (const auto& [fam, n] : rep.trajectory[i].added) added += n;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", rep.trajectory[i].bound);
    out << (i + 1) << ',' << buf << ',' << added << "\n";
  }
  return out.str();
}

}  // namespace opfcut
