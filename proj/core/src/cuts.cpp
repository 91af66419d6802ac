#include "opfcut/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opfcut {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double LinearConstraint::coef_norm() const {
  double s = 0;
  for (auto [id, c] : terms) s += c * c;
  return std::sqrt(s);
}

void LinearConstraint::normalize() {
  double nrm = coef_norm();
  if (nrm <= 0) return;
  for (auto& [id, c] : terms) c /= nrm;
  rhs /= nrm;
}

RowBuilder& RowBuilder::add(int var, double coef) {
  if (coef != 0.0) terms_.emplace_back(var, coef);
  return *this;
}

LinearConstraint RowBuilder::done(Sense sense, double rhs, std::string name) {
  std::sort(terms_.begin(), terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  LinearConstraint c;
  for (const auto& [id, v] : terms_) {
    if (!c.terms.empty() && c.terms.back().first == id)
      c.terms.back().second += v;
    else
      c.terms.emplace_back(id, v);
  }
  std::erase_if(c.terms, [](const auto& t) { return t.second == 0.0; });
  c.sense = sense;
  c.rhs = rhs;
  c.name = std::move(name);
  terms_.clear();
  return c;
}

const char* family_name(CutFamily f) {
  switch (f) {
    case CutFamily::Delta: return "delta";
    case CutFamily::Loss: return "loss";
    case CutFamily::Circle: return "circle";
    case CutFamily::Sdp: return "sdp";
    case CutFamily::Rating: return "rating";
    case CutFamily::Cost: return "cost";
  }
  return "?";
}

double max_abs_cos(double lo, double hi) {
  if (hi - lo >= kPi) return 1.0;
  double k = std::ceil(lo / kPi);
  if (k * kPi <= hi) return 1.0;  // |cos| peaks at multiples of pi
  return std::max(std::abs(std::cos(lo)), std::abs(std::cos(hi)));
}

std::pair<double, double> cos_range(double lo, double hi) {
  if (hi - lo >= 2 * kPi) return {-1.0, 1.0};
  double mx = std::max(std::cos(lo), std::cos(hi));
  double mn = std::min(std::cos(lo), std::cos(hi));
  double k = std::ceil(lo / (2 * kPi));
  if (k * 2 * kPi <= hi) mx = 1.0;
  double k2 = std::ceil((lo - kPi) / (2 * kPi));
  if (kPi + k2 * 2 * kPi <= hi) mn = -1.0;
  return {mn, mx};
}

std::pair<double, double> sin_range(double lo, double hi) {
  return cos_range(lo - kPi / 2, hi - kPi / 2);
}

DeltaBounds delta_bounds(const BranchParams& br, double Vmax_k,
                         const std::optional<AngleInterval>& interval) {
  double nrm = std::hypot(br.g, br.b);
  DeltaBounds d{nrm * Vmax_k, nrm * Vmax_k};
  if (!interval) return d;
  // (g,b).(e,f) = |V| sqrt(g^2+b^2) cos(theta - phi), phi = atan2(b,g);
  // (-b,g).(e,f) likewise with phi' = atan2(g,-b)
  double phi = std::atan2(br.b, br.g);
  double phi2 = std::atan2(br.g, -br.b);
  d.mu = nrm * Vmax_k * max_abs_cos(interval->lo - phi, interval->hi - phi);
  d.nu = nrm * Vmax_k * max_abs_cos(interval->lo - phi2, interval->hi - phi2);
  return d;
}

namespace {

Cut finish_cut(LinearConstraint row, CutFamily fam, std::string source,
               double violation) {
  Cut c;
  c.row = std::move(row);
  c.family = fam;
  c.source = std::move(source);
  c.violation = violation;
  return c;
}

// violation of a normalized row at a point: positive iff the point breaks it
double row_violation(const LinearConstraint& row, const std::vector<double>& x) {
  return -row.slack(x);
}

}  // namespace

std::vector<Cut> delta_cuts(const Network& net, const ModelInstance& m,
                            int branch_j, const DeltaBounds& kb,
                            const DeltaBounds& mb) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)branch_j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  const double t = br.tau;

  std::vector<Cut> out;
  auto push = [&](int pvar, double psign, double shunt_coef, int v2var,
                  int devar, double mu, int dfvar, double nu,
                  const std::string& src) {
    //  +-P - shunt*V2 - mu*dE - nu*dF <= 0
    RowBuilder rb;
    rb.add(pvar, psign).add(v2var, -shunt_coef).add(devar, -mu).add(dfvar, -nu);
    LinearConstraint row = rb.done(Sense::LE, 0.0, "");
    row.normalize();
    out.push_back(finish_cut(std::move(row), CutFamily::Delta, src, 0.0));
  };
  double shunt_k = br.g_sh / (2 * t * t);
  double shunt_m = br.g_sh / 2;
  push(cat.pkm(branch_j), +1.0, shunt_k, cat.v2(be.from), cat.de_km(branch_j),
       kb.mu / t, cat.df_km(branch_j), kb.nu / t, be.fwd);
  push(cat.pkm(branch_j), -1.0, shunt_k, cat.v2(be.from), cat.de_km(branch_j),
       kb.mu / t, cat.df_km(branch_j), kb.nu / t, be.fwd);
  push(cat.pmk(branch_j), +1.0, shunt_m, cat.v2(be.to), cat.de_mk(branch_j),
       mb.mu, cat.df_mk(branch_j), mb.nu, be.rev);
  push(cat.pmk(branch_j), -1.0, shunt_m, cat.v2(be.to), cat.de_mk(branch_j),
       mb.mu, cat.df_mk(branch_j), mb.nu, be.rev);
  return out;
}

namespace {

// builds the loss tangent row at (de_hat, df_hat); valid for g >= 0
LinearConstraint loss_tangent_row(const Network& net, const ModelInstance& m,
                                  int j, BranchEnd end, double de_hat,
                                  double df_hat) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  const double g = br.g, t = br.tau;
  int devar = end == BranchEnd::ReceivingAtM ? cat.de_mk(j) : cat.de_km(j);
  int dfvar = end == BranchEnd::ReceivingAtM ? cat.df_mk(j) : cat.df_km(j);
  // 2g de^ dE + 2g df^ dF - Pkm - Pmk + (g_sh/2)(V2_k/t^2 + V2_m)
  //   <= g(de^2 + df^2)
  RowBuilder rb;
  rb.add(devar, 2 * g * de_hat).add(dfvar, 2 * g * df_hat);
  rb.add(cat.pkm(j), -1.0).add(cat.pmk(j), -1.0);
  rb.add(cat.v2(be.from), br.g_sh / (2 * t * t));
  rb.add(cat.v2(be.to), br.g_sh / 2);
  return rb.done(Sense::LE, g * (de_hat * de_hat + df_hat * df_hat), "");
}

}  // namespace

std::optional<Cut> loss_separate(const Network& net, const ModelInstance& m,
                                 int branch_j, const LiftedPoint& pt,
                                 BranchEnd end, double tol) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)branch_j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  if (br.g < 0) return std::nullopt;  // r<0 modeling artifact: skip
  int devar = end == BranchEnd::ReceivingAtM ? cat.de_mk(branch_j) : cat.de_km(branch_j);
  int dfvar = end == BranchEnd::ReceivingAtM ? cat.df_mk(branch_j) : cat.df_km(branch_j);
  double de = pt[devar], df = pt[dfvar];
  double rhsval = pt[cat.pkm(branch_j)] + pt[cat.pmk(branch_j)] -
                  br.g_sh / 2 * (pt[cat.v2(be.from)] / (br.tau * br.tau) +
                                 pt[cat.v2(be.to)]);
  double v = br.g * (de * de + df * df) - rhsval;
  if (v <= 0) return std::nullopt;

  LinearConstraint row = loss_tangent_row(net, m, branch_j, end, de, df);
  row.normalize();
  double viol = row_violation(row, pt.x);
  if (viol <= tol) return std::nullopt;
  std::string src = end == BranchEnd::ReceivingAtM ? be.rev : be.fwd;
  return finish_cut(std::move(row), CutFamily::Loss, src, viol);
}

namespace {

struct CircleVars {
  int alpha, beta, v2k, v2m;
  double c;
};

CircleVars circle_vars(const Network& net, const ModelInstance& m, int j,
                       BranchEnd end) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  double z2 = br.r * br.r + br.x * br.x;
  // both ends share the tap-scaled cone constant: the receiving circle's
  // radius also carries |V_k|/tau through the k1 point
  double c = 1.0 / (br.tau * br.tau * z2);
  if (end == BranchEnd::SendingAtK)
    return {cat.alpha_km(j), cat.beta_km(j), cat.v2(be.from), cat.v2(be.to), c};
  return {cat.alpha_mk(j), cat.beta_mk(j), cat.v2(be.from), cat.v2(be.to), c};
}

}  // namespace

std::optional<Cut> circle_separate(const Network& net, const ModelInstance& m,
                                   int branch_j, const LiftedPoint& pt,
                                   BranchEnd end, double tol) {
  CircleVars cv = circle_vars(net, m, branch_j, end);
  const auto& be = m.cat.branches[(size_t)branch_j];
  double a = pt[cv.alpha], b = pt[cv.beta];
  double lhs3 = cv.c * pt[cv.v2k] - pt[cv.v2m];
  double rhs = cv.c * pt[cv.v2k] + pt[cv.v2m];
  double nrm = std::sqrt(4 * a * a + 4 * b * b + lhs3 * lhs3);
  std::string src = end == BranchEnd::SendingAtK ? be.fwd : be.rev;

  if (nrm <= 0 && rhs < 0) {
    // degenerate: the cone apex is cut off, bounds are contradictory
    RowBuilder rb;
    rb.add(cv.v2k, -cv.c).add(cv.v2m, -1.0);
    LinearConstraint row = rb.done(Sense::LE, 0.0, "");
    row.normalize();
    double viol = row_violation(row, pt.x);
    if (viol <= tol) return std::nullopt;
    return finish_cut(std::move(row), CutFamily::Circle, src, viol);
  }
  if (nrm <= rhs + tol) return std::nullopt;

  // (w/|w|).(2a, 2b, c V2k - V2m) <= c V2k + V2m, w = point's lhs vector
  double w1 = 2 * a / nrm, w2 = 2 * b / nrm, w3 = lhs3 / nrm;
  RowBuilder rb;
  rb.add(cv.alpha, 2 * w1).add(cv.beta, 2 * w2);
  rb.add(cv.v2k, cv.c * w3 - cv.c).add(cv.v2m, -w3 - 1.0);
  LinearConstraint row = rb.done(Sense::LE, 0.0, "");
  row.normalize();
  double viol = row_violation(row, pt.x);
  if (viol <= tol) return std::nullopt;
  return finish_cut(std::move(row), CutFamily::Circle, src, viol);
}

std::optional<Cut> rating_separate(const Network& net, const ModelInstance& m,
                                   int branch_j, const LiftedPoint& pt,
                                   BranchEnd end, double tol) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)branch_j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  if (br.rateA <= 0) return std::nullopt;
  int pvar = end == BranchEnd::SendingAtK ? cat.pkm(branch_j) : cat.pmk(branch_j);
  int qvar = end == BranchEnd::SendingAtK ? cat.qkm(branch_j) : cat.qmk(branch_j);
  double p = pt[pvar], q = pt[qvar];
  double nrm = std::hypot(p, q);
  if (nrm * nrm <= br.rateA * br.rateA + tol) return std::nullopt;

  RowBuilder rb;
  rb.add(pvar, p / nrm).add(qvar, q / nrm);
  LinearConstraint row = rb.done(Sense::LE, br.rateA, "");
  double viol = row_violation(row, pt.x);  // coefficients already unit norm
  if (viol <= tol) return std::nullopt;
  std::string src = end == BranchEnd::SendingAtK ? be.fwd : be.rev;
  return finish_cut(std::move(row), CutFamily::Rating, src, viol);
}

std::optional<PsdCertificate> psd_certificate(const double* M, int dim,
                                              double tol) {
  if (dim < 1 || dim > 9) throw std::invalid_argument("psd_certificate: dim must be 1..9");
  double A[9][9], V[9][9];
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      A[i][j] = 0.5 * (M[i * dim + j] + M[j * dim + i]);
      V[i][j] = (i == j) ? 1.0 : 0.0;
    }

  const int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0;
    for (int p = 0; p < dim; ++p)
      for (int q = p + 1; q < dim; ++q) off += A[p][q] * A[p][q];
    if (off < 1e-30) {
      converged = true;
      break;
    }
    for (int p = 0; p < dim; ++p) {
      for (int q = p + 1; q < dim; ++q) {
        if (std::abs(A[p][q]) < 1e-300) continue;
        double theta = (A[q][q] - A[p][p]) / (2 * A[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int i = 0; i < dim; ++i) {
          double aip = A[i][p], aiq = A[i][q];
          A[i][p] = c * aip - s * aiq;
          A[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < dim; ++i) {
          double api = A[p][i], aqi = A[q][i];
          A[p][i] = c * api - s * aqi;
          A[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < dim; ++i) {
          double vip = V[i][p], viq = V[i][q];
          V[i][p] = c * vip - s * viq;
          V[i][q] = s * vip + c * viq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0;
    for (int p = 0; p < dim; ++p)
      for (int q = p + 1; q < dim; ++q) off += A[p][q] * A[p][q];
    if (off > 1e-20)
      throw std::runtime_error("psd_certificate: Jacobi sweeps did not converge");
  }

  int arg = 0;
  for (int i = 1; i < dim; ++i)
    if (A[i][i] < A[arg][arg]) arg = i;
  if (A[arg][arg] >= -tol) return std::nullopt;

  PsdCertificate cert;
  cert.dim = dim;
  double nrm = 0;
  for (int i = 0; i < dim; ++i) nrm += V[i][arg] * V[i][arg];
  nrm = std::sqrt(nrm);
  int big = 0;
  for (int i = 1; i < dim; ++i)
    if (std::abs(V[i][arg]) > std::abs(V[big][arg])) big = i;
  double sign = V[big][arg] >= 0 ? 1.0 : -1.0;
  for (int i = 0; i < dim; ++i) cert.u[(size_t)i] = sign * V[i][arg] / nrm;

  // exact quadratic form on the symmetrized input
  double val = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      val += cert.u[(size_t)i] * 0.5 * (M[i * dim + j] + M[j * dim + i]) *
             cert.u[(size_t)j];
  cert.value = val;
  if (val >= -tol) return std::nullopt;
  return cert;
}

namespace {

// product-variable id for a pair of (bus, is_f) coordinates
int product_var(const VarCatalog& cat, int bus_a, bool f_a, int bus_b, bool f_b) {
  if (bus_a == bus_b) {
    if (f_a == f_b) return f_a ? cat.fkk(bus_a) : cat.ekk(bus_a);
    return cat.xk(bus_a);
  }
  for (int j = 0; j < (int)cat.branches.size(); ++j) {
    const auto& be = cat.branches[(size_t)j];
    int from = -1;  // which of (a,b) is the branch's from end
    if (be.from == bus_a && be.to == bus_b) from = 0;
    else if (be.from == bus_b && be.to == bus_a) from = 1;
    else continue;
    bool f_from = from == 0 ? f_a : f_b;
    bool f_to = from == 0 ? f_b : f_a;
    if (!f_from && !f_to) return cat.e_km(j);
    if (f_from && f_to) return cat.f_km(j);
    if (!f_from && f_to) return cat.ef_km(j);
    return cat.fe_km(j);
  }
  return -1;
}

}  // namespace

std::optional<Cut> sdp_separate(const ModelInstance& m, const LiftedPoint& pt,
                                const SdpSubset& subset, double tol) {
  const VarCatalog& cat = m.cat;
  struct Coord {
    int bus;
    bool is_f;
  };
  std::vector<Coord> w;
  std::string src;
  if (subset.branch_j >= 0) {
    const auto& be = cat.branches[(size_t)subset.branch_j];
    w = {{be.from, false}, {be.from, true}, {be.to, false}, {be.to, true}};
    src = be.fwd;
  } else {
    for (int b : subset.buses) {
      w.push_back({b, false});
      w.push_back({b, true});
      src += (src.empty() ? "b" : "_b") + std::to_string(b);
    }
  }
  const int off = subset.include_one ? 1 : 0;
  const int dim = (int)w.size() + off;
  if (dim > 9)
    throw std::invalid_argument("sdp_separate: subset too large (dim > 9)");

  // moment matrix ids: -1 marks the constant-1 row/column
  int ids[9][9];
  double W[9][9];
  if (subset.include_one) {
    ids[0][0] = -1;
    W[0][0] = 1.0;
    for (size_t i = 0; i < w.size(); ++i) {
      int v = w[i].is_f ? cat.f(w[i].bus) : cat.e(w[i].bus);
      ids[0][i + 1] = ids[i + 1][0] = v;
      W[0][i + 1] = W[i + 1][0] = pt[v];
    }
  }
  for (size_t i = 0; i < w.size(); ++i)
    for (size_t j = i; j < w.size(); ++j) {
      int v = product_var(cat, w[i].bus, w[i].is_f, w[j].bus, w[j].is_f);
      if (v < 0)
        throw std::invalid_argument(
            "sdp_separate: no product variable for the requested bus pair");
      ids[i + off][j + off] = ids[j + off][i + off] = v;
      W[i + off][j + off] = W[j + off][i + off] = pt[v];
    }

  double flat[81];
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) flat[i * dim + j] = W[i][j];
  auto cert = psd_certificate(flat, dim);
  if (!cert) return std::nullopt;

  // sum_ij u_i u_j W_ij >= 0; constant entries move to the rhs
  RowBuilder rb;
  double rhs = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double coef = cert->u[(size_t)i] * cert->u[(size_t)j];
      if (ids[i][j] < 0)
        rhs -= coef;  // constant 1 * coef on the lhs
      else
        rb.add(ids[i][j], coef);
    }
  LinearConstraint row = rb.done(Sense::GE, rhs, "");
  row.normalize();
  double viol = row_violation(row, pt.x);
  if (viol <= tol) return std::nullopt;
  if (subset.include_one) src += "_w1";
  return finish_cut(std::move(row), CutFamily::Sdp, src, viol);
}

std::optional<Cut> cost_separate(const Network& net, const ModelInstance& m,
                                 int gen_j, const LiftedPoint& pt, double tol) {
  const VarCatalog& cat = m.cat;
  const Generator& gen = net.generators[(size_t)cat.gens[(size_t)gen_j].net_index];
  const CostCurve& cc = gen.cost;
  double p = pt[cat.pg(gen_j)];
  double want = cc.c2 * p * p + cc.c1 * p + cc.c0;
  if (pt[cat.tg(gen_j)] >= want - tol) return std::nullopt;
  LinearConstraint row = cost_epigraph_tangent(cc, p, cat.pg(gen_j),
                                               cat.tg(gen_j), "");
  row.normalize();
  double viol = row_violation(row, pt.x);
  if (viol <= tol) return std::nullopt;
  return finish_cut(std::move(row), CutFamily::Cost,
                    "g" + std::to_string(gen_j + 1), viol);
}

std::vector<Cut> supporting_cuts(const Network& net, const ModelInstance& m,
                                 int branch_j, const LiftedPoint& pt) {
  const VarCatalog& cat = m.cat;
  const auto& be = cat.branches[(size_t)branch_j];
  const BranchParams& br = net.branches[(size_t)be.net_index];
  const Bus& busk = net.buses[(size_t)be.from];
  const Bus& busm = net.buses[(size_t)be.to];
  std::vector<Cut> out;

  auto kb = delta_bounds(br, busk.Vmax);
  auto mb = delta_bounds(br, busm.Vmax);
  for (Cut& c : delta_cuts(net, m, branch_j, kb, mb)) out.push_back(std::move(c));

  if (br.g >= 0) {
    for (BranchEnd end : {BranchEnd::SendingAtK, BranchEnd::ReceivingAtM}) {
      int devar = end == BranchEnd::ReceivingAtM ? cat.de_mk(branch_j) : cat.de_km(branch_j);
      int dfvar = end == BranchEnd::ReceivingAtM ? cat.df_mk(branch_j) : cat.df_km(branch_j);
      LinearConstraint row =
          loss_tangent_row(net, m, branch_j, end, pt[devar], pt[dfvar]);
      row.normalize();
      out.push_back(finish_cut(std::move(row), CutFamily::Loss,
                               end == BranchEnd::ReceivingAtM ? be.rev : be.fwd,
                               0.0));
    }
  }

  for (BranchEnd end : {BranchEnd::SendingAtK, BranchEnd::ReceivingAtM}) {
    CircleVars cv = circle_vars(net, m, branch_j, end);
    double a = pt[cv.alpha], b = pt[cv.beta];
    double lhs3 = cv.c * pt[cv.v2k] - pt[cv.v2m];
    double nrm = std::sqrt(4 * a * a + 4 * b * b + lhs3 * lhs3);
    if (nrm > 0) {
      RowBuilder rb;
      rb.add(cv.alpha, 2 * (2 * a / nrm)).add(cv.beta, 2 * (2 * b / nrm));
      rb.add(cv.v2k, cv.c * (lhs3 / nrm) - cv.c).add(cv.v2m, -(lhs3 / nrm) - 1.0);
      LinearConstraint row = rb.done(Sense::LE, 0.0, "");
      row.normalize();
      out.push_back(finish_cut(std::move(row), CutFamily::Circle,
                               end == BranchEnd::SendingAtK ? be.fwd : be.rev,
                               0.0));
    }
    if (br.rateA > 0) {
      int pvar = end == BranchEnd::SendingAtK ? cat.pkm(branch_j) : cat.pmk(branch_j);
      int qvar = end == BranchEnd::SendingAtK ? cat.qkm(branch_j) : cat.qmk(branch_j);
      double p = pt[pvar], q = pt[qvar];
      double pn = std::hypot(p, q);
      if (pn > 0 && pn <= br.rateA) {
        RowBuilder rb;
        rb.add(pvar, p / pn).add(qvar, q / pn);
        out.push_back(finish_cut(rb.done(Sense::LE, br.rateA, ""),
                                 CutFamily::Rating,
                                 end == BranchEnd::SendingAtK ? be.fwd : be.rev,
                                 0.0));
      }
    }
  }

  SdpSubset sub;
  sub.branch_j = branch_j;
  if (auto c = sdp_separate(m, pt, sub, 0.0)) out.push_back(std::move(*c));
  sub.include_one = true;
  if (auto c = sdp_separate(m, pt, sub, 0.0)) out.push_back(std::move(*c));
  return out;
}

}  // namespace opfcut
