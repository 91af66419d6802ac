#include "opfcut/lp_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace opfcut {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int LPModel::add_col(double lo, double hi, double cost, std::string name,
                     ColKind k) {
  lb.push_back(lo);
  ub.push_back(hi);
  obj.push_back(cost);
  col_names.push_back(std::move(name));
  kind.push_back(k);
  return (int)lb.size() - 1;
}

const char* status_name(LPSolution::Status s) {
  switch (s) {
    case LPSolution::Status::Optimal: return "optimal";
    case LPSolution::Status::Infeasible: return "infeasible";
    case LPSolution::Status::Unbounded: return "unbounded";
    case LPSolution::Status::IterationLimit: return "iteration-limit";
    case LPSolution::Status::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Bounded-variable simplex with dual pivoting.
//
// Internal form: A x + s = rhs with one logical column per row
//   <=  : s in [0, inf)
//   >=  : s in (-inf, 0]
//   =   : s fixed at 0
// The all-logical basis is made dual feasible by parking each structural at
// the bound matching its cost sign, so a cold start and a warm start after
// row appends both run the same dual loop. The basis is factored with
// Eigen's SparseLU and updated in product form between refactorizations.
// ---------------------------------------------------------------------------

struct SimplexSolver::Impl {
  LPModel model;
  SimplexOptions opt;

  int n = 0;  // structural columns
  int m = 0;  // rows
  std::vector<std::vector<std::pair<int, double>>> cols;  // incl. logicals
  std::vector<double> lo, hi, cost;                       // incl. logicals
  std::vector<double> rhs;

  enum class St : unsigned char { Basic, Lower, Upper };
  std::vector<St> stat;
  std::vector<int> basic;    // basis position -> column
  std::vector<double> xB;    // basic values by position
  std::vector<double> cbar;  // reduced costs, all columns
  std::vector<double> y;     // duals per row

  struct Eta {
    int r;
    double pivot;
    std::vector<std::pair<int, double>> w;  // FTRAN'd entering column
  };
  std::vector<Eta> etas;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool factored = false;
  long total_iters = 0;
  bool warned_bigbound = false;
  std::vector<double> orig_cost;
  bool perturbed = false;

  Impl(LPModel mdl, SimplexOptions o) : model(std::move(mdl)), opt(o) {
    n = model.ncols();
    m = (int)model.rows.size();
    if ((int)model.obj.size() != n || (int)model.ub.size() != n)
      throw std::invalid_argument("LPModel arrays are inconsistent");
    lo = model.lb;
    hi = model.ub;
    cost = model.obj;
    cols.resize((size_t)n);
    for (int i = 0; i < m; ++i) add_internal_row(model.rows[(size_t)i]);
    cap_bounds();
    stat.assign((size_t)(n + m), St::Lower);
    for (int j = 0; j < n; ++j) stat[(size_t)j] = start_status(j);
    basic.resize((size_t)m);
    for (int i = 0; i < m; ++i) {
      basic[(size_t)i] = n + i;
      stat[(size_t)(n + i)] = St::Basic;
    }
    factored = false;
  }

  void add_internal_row(const LinearConstraint& row) {
    int i = (int)rhs.size();
    for (auto [id, c] : row.terms) {
      if (id < 0 || id >= n)
        throw std::invalid_argument("row references unknown column");
      cols[(size_t)id].emplace_back(i, c);
    }
    rhs.push_back(row.rhs);
    std::vector<std::pair<int, double>> slack{{i, 1.0}};
    cols.push_back(std::move(slack));
    double slo, shi;
    switch (row.sense) {
      case Sense::LE: slo = 0, shi = kInf; break;
      case Sense::GE: slo = -kInf, shi = 0; break;
      default: slo = shi = 0; break;
    }
    lo.push_back(slo);
    hi.push_back(shi);
    cost.push_back(0.0);
  }

  std::vector<bool> capped_col;

  void cap_bounds() {
    capped_col.assign((size_t)n, false);
    for (int j = 0; j < n; ++j) {
      bool capped = false;
      if (!std::isfinite(lo[(size_t)j])) {
        lo[(size_t)j] = -opt.big_bound;
        capped = true;
      }
      if (!std::isfinite(hi[(size_t)j])) {
        hi[(size_t)j] = opt.big_bound;
        capped = true;
      }
      capped_col[(size_t)j] = capped;
      if (capped && !warned_bigbound) {
        if (!opt.quiet)
          std::fprintf(stderr,
                       "lp_backend: infinite bound replaced by +-%g "
                       "(model should supply finite bounds)\n",
                       opt.big_bound);
        warned_bigbound = true;
      }
    }
  }

  St start_status(int j) const {
    if (cost[(size_t)j] > 0) return St::Lower;
    if (cost[(size_t)j] < 0) return St::Upper;
    return std::abs(lo[(size_t)j]) <= std::abs(hi[(size_t)j]) ? St::Lower
                                                              : St::Upper;
  }

  double nb_value(int j) const {
    return stat[(size_t)j] == St::Upper ? hi[(size_t)j] : lo[(size_t)j];
  }

  int repairs = 0;

  // Nonsingular by construction: all logicals basic, structurals parked at
  // the bound nearest their current value.
  void reset_to_slack_basis() {
    for (int j = 0; j < n; ++j) {
      if (stat[(size_t)j] != St::Basic) continue;
      stat[(size_t)j] = St::Lower;
    }
    for (int i = 0; i < m; ++i) {
      int bj = basic[(size_t)i];
      if (bj < n) {
        double v = xB[(size_t)i];
        stat[(size_t)bj] = std::abs(v - lo[(size_t)bj]) <= std::abs(v - hi[(size_t)bj])
                               ? St::Lower
                               : St::Upper;
      }
      basic[(size_t)i] = n + i;
      stat[(size_t)(n + i)] = St::Basic;
    }
  }

  void factorize() {
    etas.clear();
    if (m == 0) {
      factored = true;
      return;
    }
    for (int attempt = 0;; ++attempt) {
      Eigen::SparseMatrix<double> B(m, m);
      std::vector<Eigen::Triplet<double>> trips;
      for (int p = 0; p < m; ++p)
        for (auto [i, c] : cols[(size_t)basic[(size_t)p]])
          trips.emplace_back(i, p, c);
      B.setFromTriplets(trips.begin(), trips.end());
      lu.compute(B);
      if (lu.info() == Eigen::Success) break;
      std::fprintf(stderr, "factorize: singular at m=%d iters=%ld attempt=%d repairs=%d\n",
                   m, total_iters, attempt, repairs);
      // singular basis: fall back to the all-logical basis and let the dual
      // iterations rebuild it
      if (attempt > 0 || ++repairs > 4)
        throw std::runtime_error("basis factorization failed");
      reset_to_slack_basis();
    }
    factored = true;
  }

  // x := B^-1 x
  void ftran(Eigen::VectorXd& v) {
    if (m == 0) return;
    v = lu.solve(v).eval();
    for (const Eta& e : etas) {
      double t = v[e.r] / e.pivot;
      if (t != 0.0) {
        for (auto [i, w] : e.w)
          if (i != e.r) v[i] -= w * t;
      }
      v[e.r] = t;
    }
  }

  // y := B^-T y
  void btran(Eigen::VectorXd& v) {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = 0;
      for (auto [i, w] : it->w)
        if (i != it->r) s += w * v[i];
      v[it->r] = (v[it->r] - s) / it->pivot;
    }
    v = lu.transpose().solve(v).eval();
  }

  void recompute_primal(Eigen::VectorXd& v) {
    v.resize(m);
    for (int i = 0; i < m; ++i) v[i] = rhs[(size_t)i];
    for (int j = 0; j < n + m; ++j) {
      if (stat[(size_t)j] == St::Basic) continue;
      double val = nb_value(j);
      if (val == 0.0) continue;
      for (auto [i, c] : cols[(size_t)j]) v[i] -= c * val;
    }
    ftran(v);
    xB.assign(v.data(), v.data() + m);
  }

  void recompute_duals() {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = cost[(size_t)basic[(size_t)i]];
    btran(v);
    y.assign(v.data(), v.data() + m);
    cbar.assign((size_t)(n + m), 0.0);
    for (int j = 0; j < n + m; ++j) {
      if (stat[(size_t)j] == St::Basic) continue;
      double cb = cost[(size_t)j];
      for (auto [i, c] : cols[(size_t)j]) cb -= y[(size_t)i] * c;
      cbar[(size_t)j] = cb;
    }
    if (opt.trace_every > 0) {
      double dinf = 0;
      for (int j = 0; j < n + m; ++j) {
        if (stat[(size_t)j] == St::Basic || lo[(size_t)j] == hi[(size_t)j]) continue;
        double v2 = stat[(size_t)j] == St::Lower ? -cbar[(size_t)j] : cbar[(size_t)j];
        dinf = std::max(dinf, v2);
      }
      std::fprintf(stderr, "    [recompute_duals] max dual infeas %.3e at iters=%ld\n",
                   dinf, total_iters);
    }
  }

  // Repair dual feasibility of nonbasic statuses by bound flips (possible
  // because every column has finite working bounds).
  bool repair_dual() {
    bool flipped = false;
    for (int j = 0; j < n + m; ++j) {
      if (stat[(size_t)j] == St::Basic) continue;
      if (lo[(size_t)j] == hi[(size_t)j]) continue;
      if (stat[(size_t)j] == St::Lower && cbar[(size_t)j] < -opt.opt_tol &&
          std::isfinite(hi[(size_t)j])) {
        stat[(size_t)j] = St::Upper;
        flipped = true;
      } else if (stat[(size_t)j] == St::Upper && cbar[(size_t)j] > opt.opt_tol &&
                 std::isfinite(lo[(size_t)j])) {
        stat[(size_t)j] = St::Lower;
        flipped = true;
      }
    }
    return flipped;
  }

  // Deterministic cost perturbation pointing away from each nonbasic bound.
  // It breaks the total dual degeneracy of models whose cost lives on a few
  // columns; the true costs are restored before the final cleanup pass.
  void apply_perturbation() {
    orig_cost = cost;
    perturbed = true;
    for (int j = 0; j < n + m; ++j) {
      if (stat[(size_t)j] == St::Basic) continue;
      if (lo[(size_t)j] == hi[(size_t)j]) continue;
      double phase = std::fmod((double)(j + 1) * 0.61803398874989484, 1.0);
      double eps = 1e-7 * (0.5 + phase) * (1.0 + std::abs(cost[(size_t)j]));
      cost[(size_t)j] += stat[(size_t)j] == St::Lower ? eps : -eps;
    }
  }

  void restore_costs() {
    cost = orig_cost;
    perturbed = false;
  }

  LPSolution make_solution(LPSolution::Status st) {
    LPSolution sol;
    sol.status = st;
    sol.iterations = total_iters;
    sol.x.assign((size_t)n, 0.0);
    for (int j = 0; j < n; ++j)
      if (stat[(size_t)j] != St::Basic) sol.x[(size_t)j] = nb_value(j);
    for (int i = 0; i < m; ++i)
      if (basic[(size_t)i] < n) sol.x[(size_t)basic[(size_t)i]] = xB[(size_t)i];
    sol.dual = y;
    sol.dual.resize((size_t)m, 0.0);
    sol.objective = 0;
    for (int j = 0; j < n; ++j) sol.objective += model.obj[(size_t)j] * sol.x[(size_t)j];
    return sol;
  }

  LPSolution run() {
    for (int j = 0; j < n; ++j)
      if (lo[(size_t)j] > hi[(size_t)j]) {
        xB.assign((size_t)m, 0.0);
        y.assign((size_t)m, 0.0);
        return make_solution(LPSolution::Status::Infeasible);
      }

    long maxit = opt.max_iterations > 0
                     ? opt.max_iterations
                     : 50L * (long)(m + n);
    if (!factored) factorize();
    long iters_this = 0;

    // Phase order: dual iterations under a deterministic cost perturbation
    // (sidesteps the total dual degeneracy of these models), then the true
    // costs come back and a bounded-variable primal pass polishes
    // optimality without ever leaving the feasible region.
    if (!perturbed) apply_perturbation();
    LPSolution sol = iterate(maxit, &iters_this);
    restore_costs();
    if (sol.status != LPSolution::Status::Optimal) return sol;
    recompute_duals();
    sol = iterate_primal(maxit, &iters_this);
    if (sol.status != LPSolution::Status::Optimal) return sol;

    // a capped variable resting on its artificial bound means the true
    // model was unbounded in that direction
    for (int j = 0; j < n; ++j) {
      if (!capped_col[(size_t)j]) continue;
      if (std::abs(std::abs(sol.x[(size_t)j]) - opt.big_bound) <
          1e-6 * opt.big_bound) {
        sol.status = LPSolution::Status::Unbounded;
        break;
      }
    }
    return sol;
  }

  LPSolution iterate(long maxit, long* iters_this) {
    recompute_duals();
    if (repair_dual()) recompute_duals();
    Eigen::VectorXd work;
    recompute_primal(work);
    bool fresh = etas.empty();

    int degen_streak = 0;
    Eigen::VectorXd rho(m), wcol(m);
    std::vector<double> alpha((size_t)(n + m));

    while (true) {
      // leaving row: worst bound violation (Bland: lowest basic index)
      int r = -1;
      double worst = opt.feas_tol;
      bool case_low = true;
      bool bland = degen_streak > opt.bland_trigger;
      for (int i = 0; i < m; ++i) {
        int bj = basic[(size_t)i];
        double v = xB[(size_t)i];
        double vl = lo[(size_t)bj] - v, vu = v - hi[(size_t)bj];
        double viol = std::max(vl, vu);
        if (viol <= opt.feas_tol) continue;
        bool better;
        if (bland)
          better = r < 0 || bj < basic[(size_t)r];
        else
          better = viol > worst;
        if (better) {
          worst = viol;
          r = i;
          case_low = vl >= vu;
        }
      }
      if (r < 0) {
        if (!fresh) {
          // rebuild factors and re-verify with fresh numbers
          factorize();
          recompute_duals();
          if (repair_dual()) recompute_duals();
          recompute_primal(work);
          fresh = true;
          continue;
        }
        return make_solution(LPSolution::Status::Optimal);
      }

      if ((*iters_this)++ >= maxit)
        return make_solution(LPSolution::Status::IterationLimit);
      ++total_iters;
      if (opt.trace_every > 0 && *iters_this % opt.trace_every == 0)
        std::fprintf(stderr, "  it %ld: worst viol %.3e at row %d, degen %d\n",
                     *iters_this, worst, r, degen_streak);

      // pivot row r: rho = B^-T e_r, alpha_j = rho . A_j
      rho.setZero(m);
      rho[r] = 1.0;
      btran(rho);
      for (int j = 0; j < n + m; ++j) {
        double a = 0;
        for (auto [i, c] : cols[(size_t)j]) a += rho[i] * c;
        alpha[(size_t)j] = a;
      }

      // entering column: dual ratio test
      auto eligible = [&](int j) {
        if (stat[(size_t)j] == St::Basic) return false;
        if (lo[(size_t)j] == hi[(size_t)j]) return false;
        double a = alpha[(size_t)j];
        if (case_low)
          return (stat[(size_t)j] == St::Lower && a < -opt.ratio_tol) ||
                 (stat[(size_t)j] == St::Upper && a > opt.ratio_tol);
        return (stat[(size_t)j] == St::Lower && a > opt.ratio_tol) ||
               (stat[(size_t)j] == St::Upper && a < -opt.ratio_tol);
      };
      auto dual_ratio = [&](int j) {
        double cb = cbar[(size_t)j];
        // clamp tiny dual infeasibilities from drift
        if (stat[(size_t)j] == St::Lower) cb = std::max(cb, 0.0);
        else cb = std::min(cb, 0.0);
        return std::abs(cb / alpha[(size_t)j]);
      };
      auto select_entering = [&]() {
        double best_ratio = kInf;
        for (int j = 0; j < n + m; ++j)
          if (eligible(j)) best_ratio = std::min(best_ratio, dual_ratio(j));
        if (best_ratio == kInf) return -1;
        double ratio_cap = best_ratio + 1e-9 * (1 + best_ratio);
        int q = -1;
        for (int j = 0; j < n + m; ++j) {
          if (!eligible(j) || dual_ratio(j) > ratio_cap) continue;
          if (bland) return j;  // lowest admissible index
          if (q < 0 || std::abs(alpha[(size_t)j]) > std::abs(alpha[(size_t)q]))
            q = j;  // largest pivot among near-minimal ratios
        }
        return q;
      };

      // Bound-flipping ratio test: walk the breakpoints in ratio order;
      // while the leaving row stays infeasible after flipping a boxed
      // column across its bounds, flip it and keep going. The column that
      // finally absorbs the infeasibility enters the basis.
      std::vector<std::pair<double, int>> bps;
      for (int j = 0; j < n + m; ++j)
        if (eligible(j)) bps.emplace_back(dual_ratio(j), j);
      if (bps.empty()) return make_solution(LPSolution::Status::Infeasible);
      std::sort(bps.begin(), bps.end());

      int q = -1;
      double piv = 0;
      bool restart_pass = false;
      std::vector<int> flips;
      for (int attempt = 0; attempt < 64 && q < 0; ++attempt) {
        flips.clear();
        double slope = worst;  // remaining infeasibility on row r
        int cand = -1;
        for (auto [ratio, j] : bps) {
          if (alpha[(size_t)j] == 0.0) continue;  // banned earlier
          double range = hi[(size_t)j] - lo[(size_t)j];
          double reduction = std::isfinite(range)
                                 ? std::abs(alpha[(size_t)j]) * range
                                 : kInf;
          if (reduction < slope - opt.feas_tol) {
            flips.push_back(j);
            slope -= reduction;
            continue;
          }
          cand = j;
          break;
        }
        if (cand < 0) {
          if (!flips.empty()) break;  // flips alone repair the row
          bool any = false;
          for (int j = 0; j < n + m && !any; ++j) any = eligible(j);
          if (any && opt.trace_every >= 0)
            std::fprintf(stderr, "dual: no trustworthy candidate at iters=%ld m=%d\n",
                         total_iters, m);
          return make_solution(any ? LPSolution::Status::NumericalFailure
                                   : LPSolution::Status::Infeasible);
        }
        wcol.setZero(m);
        for (auto [i, c] : cols[(size_t)cand]) wcol[i] = c;
        ftran(wcol);
        piv = wcol[r];
        double wmax = wcol.cwiseAbs().maxCoeff();
        bool tiny = std::abs(piv) < opt.pivot_tol ||
                    std::abs(piv) < 1e-9 * wmax;
        bool drifted = std::abs(piv - alpha[(size_t)cand]) >
                       1e-5 * std::max(1.0, std::abs(piv));
        if (!tiny && !drifted) {
          q = cand;
          break;
        }
        if (!etas.empty()) {  // stale factors: rebuild and redo the pass
          factorize();
          recompute_primal(work);
          recompute_duals();
          fresh = true;
          restart_pass = true;
          break;
        }
        alpha[(size_t)cand] = 0;  // fresh factors reject it: ban and retry
      }
      if (restart_pass) continue;
      if (q < 0 && flips.empty()) {
        if (opt.trace_every >= 0)
          std::fprintf(stderr, "dual: pivot bans exhausted at iters=%ld m=%d\n",
                       total_iters, m);
        return make_solution(LPSolution::Status::NumericalFailure);
      }

      if (!flips.empty()) {
        // move the flipped columns to their opposite bounds and update the
        // basic values with one combined FTRAN
        Eigen::VectorXd drhs = Eigen::VectorXd::Zero(m);
        for (int j : flips) {
          double delta_j = stat[(size_t)j] == St::Lower
                               ? hi[(size_t)j] - lo[(size_t)j]
                               : lo[(size_t)j] - hi[(size_t)j];
          for (auto [i, c] : cols[(size_t)j]) drhs[i] += c * delta_j;
          stat[(size_t)j] =
              stat[(size_t)j] == St::Lower ? St::Upper : St::Lower;
        }
        ftran(drhs);
        for (int i = 0; i < m; ++i) xB[(size_t)i] -= drhs[i];
      }
      if (q < 0) continue;  // the row was repaired by flips alone

      int leave = basic[(size_t)r];
      double leave_to = case_low ? lo[(size_t)leave] : hi[(size_t)leave];
      double delta = xB[(size_t)r] - leave_to;
      if (case_low ? delta > -opt.feas_tol : delta < opt.feas_tol)
        delta = 0.0;  // flips already brought the row (nearly) feasible
      double step = delta / piv;  // change of entering variable
      double theta_d = cbar[(size_t)q] / piv;

      for (int i = 0; i < m; ++i) xB[(size_t)i] -= step * wcol[i];
      xB[(size_t)r] = nb_value(q) + step;

      for (int j = 0; j < n + m; ++j) {
        if (j == q || stat[(size_t)j] == St::Basic) continue;
        if (alpha[(size_t)j] != 0.0) cbar[(size_t)j] -= theta_d * alpha[(size_t)j];
      }
      cbar[(size_t)leave] = -theta_d;
      cbar[(size_t)q] = 0.0;
      for (int i = 0; i < m; ++i) y[(size_t)i] += theta_d * rho[i];

      stat[(size_t)leave] = case_low ? St::Lower : St::Upper;
      stat[(size_t)q] = St::Basic;
      basic[(size_t)r] = q;

      Eta e;
      e.r = r;
      e.pivot = piv;
      for (int i = 0; i < m; ++i)
        if (wcol[i] != 0.0) e.w.emplace_back(i, wcol[i]);
      etas.push_back(std::move(e));
      fresh = false;

      degen_streak = std::abs(theta_d) < 1e-12 ? degen_streak + 1 : 0;

      if ((int)etas.size() >= opt.refactor_every) {
        factorize();
        recompute_primal(work);
        recompute_duals();
        fresh = true;
      }
    }
  }

  // Primal pass over a primal-feasible basis: picks dual-infeasible columns,
  // walks them to a blocking bound (or flips them across their own box) and
  // never leaves the feasible region. Used to polish optimality after the
  // perturbed dual phase.
  LPSolution iterate_primal(long maxit, long* iters_this) {
    Eigen::VectorXd work;
    recompute_primal(work);
    bool fresh = etas.empty();
    int degen_streak = 0;
    long flips = 0;
    Eigen::VectorXd rho(m), wcol(m);
    std::vector<double> alpha((size_t)(n + m));

    while (true) {
      // entering column: worst dual infeasibility (Bland: lowest index)
      int q = -1;
      double worst = opt.opt_tol;
      bool bland = degen_streak > opt.bland_trigger;
      for (int j = 0; j < n + m; ++j) {
        if (stat[(size_t)j] == St::Basic) continue;
        if (lo[(size_t)j] == hi[(size_t)j]) continue;
        double v = stat[(size_t)j] == St::Lower ? -cbar[(size_t)j]
                                                : cbar[(size_t)j];
        if (v > worst) {
          worst = v;
          q = j;
          if (bland) break;
        }
      }
      if (q < 0) {
        if (!fresh) {
          factorize();
          recompute_duals();
          recompute_primal(work);
          fresh = true;
          continue;
        }
        return make_solution(LPSolution::Status::Optimal);
      }
      if ((*iters_this)++ >= maxit)
        return make_solution(LPSolution::Status::IterationLimit);
      ++total_iters;

      wcol.setZero(m);
      for (auto [i, c] : cols[(size_t)q]) wcol[i] = c;
      ftran(wcol);
      double sigma = stat[(size_t)q] == St::Lower ? 1.0 : -1.0;

      // ratio test: first blocking basic bound, or the entering column's
      // own opposite bound (a flip)
      double flip_t = hi[(size_t)q] - lo[(size_t)q];
      double t_min = flip_t;
      for (int i = 0; i < m; ++i) {
        double w = sigma * wcol[i];
        int bj = basic[(size_t)i];
        double t;
        if (w > opt.ratio_tol)
          t = (xB[(size_t)i] - lo[(size_t)bj]) / w;
        else if (w < -opt.ratio_tol)
          t = (hi[(size_t)bj] - xB[(size_t)i]) / (-w);
        else
          continue;
        if (t < t_min) t_min = std::max(t, 0.0);
      }
      int r = -1;
      bool leave_low = true;
      double cap = t_min + 1e-9 * (1 + t_min);
      for (int i = 0; i < m; ++i) {
        double w = sigma * wcol[i];
        int bj = basic[(size_t)i];
        double t;
        bool low;
        if (w > opt.ratio_tol) {
          t = (xB[(size_t)i] - lo[(size_t)bj]) / w;
          low = true;
        } else if (w < -opt.ratio_tol) {
          t = (hi[(size_t)bj] - xB[(size_t)i]) / (-w);
          low = false;
        } else {
          continue;
        }
        if (t > cap) continue;
        if (bland) {
          if (r < 0 || bj < basic[(size_t)r]) {
            r = i;
            leave_low = low;
          }
        } else if (r < 0 || std::abs(wcol[i]) > std::abs(wcol[r])) {
          r = i;
          leave_low = low;
        }
      }

      if (r < 0) {
        // no blocking row: flip the entering column across its box
        for (int i = 0; i < m; ++i) xB[(size_t)i] -= sigma * flip_t * wcol[i];
        stat[(size_t)q] = stat[(size_t)q] == St::Lower ? St::Upper : St::Lower;
        degen_streak = 0;
        if (++flips % 64 == 0) recompute_primal(work);
        continue;
      }

      double piv = wcol[r];
      if (std::abs(piv) < opt.pivot_tol) {
        if (!etas.empty()) {
          factorize();
          recompute_duals();
          recompute_primal(work);
          fresh = true;
          continue;
        }
        if (opt.trace_every >= 0)
          std::fprintf(stderr, "primal: tiny pivot at iters=%ld m=%d\n",
                       total_iters, m);
        return make_solution(LPSolution::Status::NumericalFailure);
      }

      rho.setZero(m);
      rho[r] = 1.0;
      btran(rho);
      for (int j = 0; j < n + m; ++j) {
        double a = 0;
        for (auto [i, c] : cols[(size_t)j]) a += rho[i] * c;
        alpha[(size_t)j] = a;
      }

      int leave = basic[(size_t)r];
      double theta_d = cbar[(size_t)q] / piv;
      for (int i = 0; i < m; ++i) xB[(size_t)i] -= sigma * t_min * wcol[i];
      xB[(size_t)r] = nb_value(q) + sigma * t_min;
      for (int j = 0; j < n + m; ++j) {
        if (j == q || stat[(size_t)j] == St::Basic) continue;
        if (alpha[(size_t)j] != 0.0) cbar[(size_t)j] -= theta_d * alpha[(size_t)j];
      }
      cbar[(size_t)leave] = -theta_d;
      cbar[(size_t)q] = 0.0;
      for (int i = 0; i < m; ++i) y[(size_t)i] += theta_d * rho[i];

      stat[(size_t)leave] = leave_low ? St::Lower : St::Upper;
      stat[(size_t)q] = St::Basic;
      basic[(size_t)r] = q;

      Eta e;
      e.r = r;
      e.pivot = piv;
      for (int i = 0; i < m; ++i)
        if (wcol[i] != 0.0) e.w.emplace_back(i, wcol[i]);
      etas.push_back(std::move(e));
      fresh = false;
      degen_streak = t_min < 1e-10 ? degen_streak + 1 : 0;

      if ((int)etas.size() >= opt.refactor_every) {
        factorize();
        recompute_primal(work);
        recompute_duals();
        fresh = true;
      }
    }
  }
};

SimplexSolver::SimplexSolver(LPModel model, SimplexOptions opt)
    : impl_(std::make_unique<Impl>(std::move(model), opt)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

const LPModel& SimplexSolver::model() const { return impl_->model; }

void SimplexSolver::append_rows(const std::vector<LinearConstraint>& rows) {
  Impl& im = *impl_;
  for (const auto& row : rows) {
    im.model.rows.push_back(row);
    // appended slack starts basic so the old basis stays dual feasible
    int old_cols = (int)im.cols.size();
    // structural entries must be spliced before the new slack column
    int i = (int)im.rhs.size();
    for (auto [id, c] : row.terms) {
      if (id < 0 || id >= im.n)
        throw std::invalid_argument("appended row references unknown column");
      im.cols[(size_t)id].emplace_back(i, c);
    }
    im.rhs.push_back(row.rhs);
    std::vector<std::pair<int, double>> slack{{i, 1.0}};
    im.cols.push_back(std::move(slack));
    double slo, shi;
    switch (row.sense) {
      case Sense::LE: slo = 0, shi = kInf; break;
      case Sense::GE: slo = -kInf, shi = 0; break;
      default: slo = shi = 0; break;
    }
    im.lo.push_back(slo);
    im.hi.push_back(shi);
    im.cost.push_back(0.0);
    im.stat.push_back(Impl::St::Basic);
    im.basic.push_back(old_cols);
    ++im.m;
  }
  im.factored = false;
}

LPSolution SimplexSolver::solve() { return impl_->run(); }

LPSolution solve_lp(const LPModel& m, const SimplexOptions& opt) {
  SimplexSolver s(m, opt);
  return s.solve();
}

double dual_objective(const LPModel& m, const LPSolution& s) {
  const double inf = kInf;
  double v = 0;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    double yi = s.dual[i];
    if (m.rows[i].sense == Sense::LE && yi > 1e-9) return -inf;
    if (m.rows[i].sense == Sense::GE && yi < -1e-9) return -inf;
    v += yi * m.rows[i].rhs;
  }
  std::vector<double> cb = m.obj;
  for (size_t i = 0; i < m.rows.size(); ++i)
    for (auto [id, c] : m.rows[i].terms) cb[(size_t)id] -= s.dual[i] * c;
  for (int j = 0; j < m.ncols(); ++j) {
    double c = cb[(size_t)j];
    if (std::abs(c) < 1e-12) continue;
    double bound = c > 0 ? m.lb[(size_t)j] : m.ub[(size_t)j];
    if (!std::isfinite(bound)) return -inf;
    v += c * bound;
  }
  return v;
}

}  // namespace opfcut
