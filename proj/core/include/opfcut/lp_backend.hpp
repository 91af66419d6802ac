#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "opfcut/linear.hpp"

namespace opfcut {

// Bounded-variable LP in minimization form. Integrality markers are carried
// for MILP export only; the solver treats every column as continuous.
struct LPModel {
  std::vector<double> lb, ub, obj;
  std::vector<std::string> col_names;
  std::vector<LinearConstraint> rows;
  enum class ColKind : unsigned char { Continuous, Binary, Integer };
  std::vector<ColKind> kind;

  int ncols() const { return (int)lb.size(); }
  int add_col(double lo, double hi, double cost, std::string name,
              ColKind k = ColKind::Continuous);
};

struct LPSolution {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };
  Status status = Status::NumericalFailure;
  double objective = 0;
  std::vector<double> x;     // primal values, structural columns
  std::vector<double> dual;  // one multiplier per row, y in cbar = c - A'y
  long iterations = 0;
};

const char* status_name(LPSolution::Status s);

struct SimplexOptions {
  double big_bound = 1e6;        // replaces infinite structural bounds
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-11;      // below this the pivot is a breakdown
  double ratio_tol = 1e-9;       // eligibility threshold in the ratio test
  long max_iterations = 0;       // 0 = 50*(rows+cols)
  int bland_trigger = 50;        // degenerate pivots before Bland's rule
  int refactor_every = 64;
  bool quiet = true;
  long trace_every = 0;          // > 0: progress prints to stderr
};

// Bounded-variable simplex (dual pivoting) with a sparse LU basis and
// product-form updates. Row appends keep the factored basis and re-solve
// warm, which is what the cutting-plane loop needs.
class SimplexSolver {
 public:
  explicit SimplexSolver(LPModel model, SimplexOptions opt = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  void append_rows(const std::vector<LinearConstraint>& rows);
  LPSolution solve();

  const LPModel& model() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot solve.
LPSolution solve_lp(const LPModel& m, const SimplexOptions& opt = {});

/// Lagrangian bound from (dual, reduced costs); equals the primal objective
/// at an exact optimum. Used by the weak-duality checks.
double dual_objective(const LPModel& m, const LPSolution& s);

// ---- LP-format file interchange (CPLEX LP subset) ----
void write_lp_file(const LPModel& m, std::ostream& out);
void write_lp_file(const LPModel& m, const std::string& path);
LPModel read_lp_file(std::istream& in);
LPModel read_lp_file_path(const std::string& path);

}  // namespace opfcut
