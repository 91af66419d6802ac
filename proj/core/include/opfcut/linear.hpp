#pragma once

#include <string>
#include <utility>
#include <vector>

namespace opfcut {

enum class Sense { LE, EQ, GE };

// Sparse row over catalog variable ids. Terms are unique and sorted by id.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::LE;
  double rhs = 0;
  std::string name;

  double lhs_value(const std::vector<double>& x) const {
    double v = 0;
    for (auto [id, c] : terms) v += c * x[(size_t)id];
    return v;
  }
  // >= 0 iff satisfied; for equalities, minus the absolute residual.
  double slack(const std::vector<double>& x) const {
    double v = lhs_value(x);
    switch (sense) {
      case Sense::LE: return rhs - v;
      case Sense::GE: return v - rhs;
      case Sense::EQ: return v > rhs ? rhs - v : v - rhs;
    }
    return 0;
  }
  double coef_norm() const;
  // Scales coefficients and rhs so the coefficient vector has unit norm.
  void normalize();
};

// Accumulates coefficients, merging duplicate ids, then emits a clean row.
class RowBuilder {
 public:
  RowBuilder& add(int var, double coef);
  LinearConstraint done(Sense sense, double rhs, std::string name);

 private:
  std::vector<std::pair<int, double>> terms_;
};

enum class CutFamily { Delta, Loss, Circle, Sdp, Rating, Cost };
const char* family_name(CutFamily f);

struct Cut {
  LinearConstraint row;   // unit-normalized coefficients
  CutFamily family = CutFamily::Delta;
  std::string source;     // branch/bus/generator label
  double violation = 0;   // at the generating point, after normalization
};

// Voltage-angle interval for one bus (radians), used for bound tightening.
struct AngleInterval {
  int bus = 0;
  double lo = 0, hi = 0;
};

// max over psi in [lo,hi] of |cos(psi)|
double max_abs_cos(double lo, double hi);
// range of cos/sin over [lo,hi]
std::pair<double, double> cos_range(double lo, double hi);
std::pair<double, double> sin_range(double lo, double hi);

}  // namespace opfcut
