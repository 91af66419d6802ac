#include "opfcut/lifted_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "opfcut/branch_physics.hpp"

namespace opfcut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf, hi = kInf;
};

Interval intersect(Interval a, Interval b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

Interval product_range(Interval a, Interval b) {
  double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval square_range(Interval a) {
  double lo2 = a.lo * a.lo, hi2 = a.hi * a.hi;
  double lo = (a.lo <= 0 && a.hi >= 0) ? 0.0 : std::min(lo2, hi2);
  return {lo, std::max(lo2, hi2)};
}

double max_abs(Interval a) { return std::max(std::abs(a.lo), std::abs(a.hi)); }

// Coefficients of one flow on the product variables
// {Ekk,Fkk,Xk, Emm,Fmm,Xm, Ekm,EFkm,FEkm,Fkm}.
struct FlowCoef {
  double ekk = 0, fkk = 0, xk = 0;
  double emm = 0, fmm = 0, xm = 0;
  double ekm = 0, efkm = 0, fekm = 0, fkm = 0;
};

FlowCoef pkm_coef(const BranchParams& br) {
  const double g = br.g, b = br.b, t = br.tau;
  const double c = std::cos(br.sigma), s = std::sin(br.sigma);
  FlowCoef F;
  F.ekk = (g + br.g_sh / 2) / (t * t);
  F.fkk = F.ekk;
  F.ekm = (-g * c + b * s) / t;
  F.efkm = (g * s + b * c) / t;
  F.fekm = (-b * c - g * s) / t;
  F.fkm = (b * s - g * c) / t;
  return F;
}

FlowCoef qkm_coef(const BranchParams& br) {
  const double g = br.g, b = br.b, t = br.tau;
  const double c = std::cos(br.sigma), s = std::sin(br.sigma);
  FlowCoef F;
  F.ekk = -(b + br.b_sh / 2) / (t * t);
  F.fkk = F.ekk;
  F.ekm = (b * c + g * s) / t;
  F.efkm = (g * c - b * s) / t;
  F.fekm = (-g * c + b * s) / t;
  F.fkm = (g * s + b * c) / t;
  return F;
}

FlowCoef pmk_coef(const BranchParams& br) {
  const double g = br.g, b = br.b, t = br.tau;
  const double c = std::cos(br.sigma), s = std::sin(br.sigma);
  FlowCoef F;
  F.emm = g + br.g_sh / 2;
  F.fmm = F.emm;
  F.ekm = (-g * c - b * s) / t;
  F.fekm = (b * c - g * s) / t;
  F.efkm = (g * s - b * c) / t;
  F.fkm = (-g * c - b * s) / t;
  return F;
}

FlowCoef qmk_coef(const BranchParams& br) {
  const double g = br.g, b = br.b, t = br.tau;
  const double c = std::cos(br.sigma), s = std::sin(br.sigma);
  FlowCoef F;
  F.emm = -(b + br.b_sh / 2);
  F.fmm = F.emm;
  F.ekm = (b * c - g * s) / t;
  F.efkm = -(g * c + b * s) / t;
  F.fekm = (g * c + b * s) / t;
  F.fkm = (b * c - g * s) / t;
  return F;
}

struct CircleCoef {
  double kp = 0, kq = 0;  // alpha = P - kp*V2, beta = Q - kq*V2
  double c = 0;           // alpha^2 + beta^2 <= c * V2_k * V2_m
};

CircleCoef circle_coef_km(const BranchParams& br) {
  double z2 = br.r * br.r + br.x * br.x;
  CircleCoef cc;
  cc.kp = (br.r / z2 + br.g_sh / 2) / (br.tau * br.tau);
  cc.kq = (br.x / z2 - br.b_sh / 2) / (br.tau * br.tau);
  cc.c = 1.0 / (br.tau * br.tau * z2);
  return cc;
}

CircleCoef circle_coef_mk(const BranchParams& br) {
  double z2 = br.r * br.r + br.x * br.x;
  CircleCoef cc;
  cc.kp = br.r / z2 + br.g_sh / 2;
  cc.kq = br.x / z2 - br.b_sh / 2;
  // the receiving circle's radius is |V_k||V_m|/(tau |z|): the far-end
  // voltage enters through the k1 point, so the tap stays in the cone
  // constant (with 1/z^2 alone the exact flows of a tau<1 branch would be
  // cut off)
  cc.c = 1.0 / (br.tau * br.tau * z2);
  return cc;
}

void add_flow_row(std::vector<LinearConstraint>& rows, const VarCatalog& cat,
                  int j, int flow_var, const FlowCoef& fc, std::string name) {
  const auto& be = cat.branches[j];
  RowBuilder rb;
  rb.add(flow_var, 1.0);
  rb.add(cat.ekk(be.from), -fc.ekk).add(cat.fkk(be.from), -fc.fkk).add(cat.xk(be.from), -fc.xk);
  rb.add(cat.ekk(be.to), -fc.emm).add(cat.fkk(be.to), -fc.fmm).add(cat.xk(be.to), -fc.xm);
  rb.add(cat.e_km(j), -fc.ekm).add(cat.ef_km(j), -fc.efkm);
  rb.add(cat.fe_km(j), -fc.fekm).add(cat.f_km(j), -fc.fkm);
  rows.push_back(rb.done(Sense::EQ, 0.0, std::move(name)));
}

double flow_bound(const FlowCoef& fc, Interval ekk, Interval fkk, Interval xk,
                  Interval emm, Interval fmm, Interval xm, Interval cross) {
  double m = 0;
  m += std::abs(fc.ekk) * max_abs(ekk) + std::abs(fc.fkk) * max_abs(fkk) +
       std::abs(fc.xk) * max_abs(xk);
  m += std::abs(fc.emm) * max_abs(emm) + std::abs(fc.fmm) * max_abs(fmm) +
       std::abs(fc.xm) * max_abs(xm);
  m += (std::abs(fc.ekm) + std::abs(fc.efkm) + std::abs(fc.fekm) +
        std::abs(fc.fkm)) * max_abs(cross);
  return m;
}

}  // namespace

static VarCatalog make_catalog(const Network& net) {
  VarCatalog cat;
  cat.nbus = (int)net.buses.size();

  // parallel branches share an unordered bus pair; suffix their tags
  std::map<std::pair<int, int>, int> pair_count;
  for (size_t i = 0; i < net.branches.size(); ++i) {
    const auto& br = net.branches[i];
    if (!br.in_service) continue;
    VarCatalog::BranchEntry be;
    be.net_index = (int)i;
    be.from = net.bus_index(br.from);
    be.to = net.bus_index(br.to);
    if (be.from < 0 || be.to < 0)
      throw std::invalid_argument("branch endpoint not in bus table: " +
                                  std::to_string(be.from < 0 ? br.from : br.to));
    auto key = std::minmax(br.from, br.to);
    int n = ++pair_count[{key.first, key.second}];
    std::string suffix = n > 1 ? "_" + std::to_string(n) : "";
    be.fwd = std::to_string(br.from) + "_" + std::to_string(br.to) + suffix;
    be.rev = std::to_string(br.to) + "_" + std::to_string(br.from) + suffix;
    cat.branches.push_back(std::move(be));
  }
  for (size_t i = 0; i < net.generators.size(); ++i) {
    if (!net.generators[i].in_service) continue;
    int bi = net.bus_index(net.generators[i].bus);
    if (bi < 0)
      throw std::invalid_argument("generator on unknown bus " +
                                  std::to_string(net.generators[i].bus));
    cat.gens.push_back({(int)i, bi});
  }

  cat.names.resize(6 * cat.nbus + 16 * cat.branches.size() + 3 * cat.gens.size());
  for (int i = 0; i < cat.nbus; ++i) {
    std::string id = std::to_string(net.buses[(size_t)i].id);
    cat.names[(size_t)cat.v2(i)] = "V2_" + id;
    cat.names[(size_t)cat.e(i)] = "e_" + id;
    cat.names[(size_t)cat.f(i)] = "f_" + id;
    cat.names[(size_t)cat.ekk(i)] = "Ekk_" + id;
    cat.names[(size_t)cat.fkk(i)] = "Fkk_" + id;
    cat.names[(size_t)cat.xk(i)] = "X_" + id;
  }
  for (int j = 0; j < (int)cat.branches.size(); ++j) {
    const auto& be = cat.branches[(size_t)j];
    cat.names[(size_t)cat.pkm(j)] = "P_" + be.fwd;
    cat.names[(size_t)cat.qkm(j)] = "Q_" + be.fwd;
    cat.names[(size_t)cat.pmk(j)] = "P_" + be.rev;
    cat.names[(size_t)cat.qmk(j)] = "Q_" + be.rev;
    cat.names[(size_t)cat.alpha_km(j)] = "al_" + be.fwd;
    cat.names[(size_t)cat.beta_km(j)] = "be_" + be.fwd;
    cat.names[(size_t)cat.alpha_mk(j)] = "al_" + be.rev;
    cat.names[(size_t)cat.beta_mk(j)] = "be_" + be.rev;
    cat.names[(size_t)cat.e_km(j)] = "E_" + be.fwd;
    cat.names[(size_t)cat.ef_km(j)] = "EF_" + be.fwd;
    cat.names[(size_t)cat.fe_km(j)] = "FE_" + be.fwd;
    cat.names[(size_t)cat.f_km(j)] = "F_" + be.fwd;
    cat.names[(size_t)cat.de_km(j)] = "dE_" + be.fwd;
    cat.names[(size_t)cat.df_km(j)] = "dF_" + be.fwd;
    cat.names[(size_t)cat.de_mk(j)] = "dE_" + be.rev;
    cat.names[(size_t)cat.df_mk(j)] = "dF_" + be.rev;
  }
  for (int j = 0; j < (int)cat.gens.size(); ++j) {
    std::string id = std::to_string(j + 1);
    cat.names[(size_t)cat.pg(j)] = "pg_" + id;
    cat.names[(size_t)cat.qg(j)] = "qg_" + id;
    cat.names[(size_t)cat.tg(j)] = "tg_" + id;
  }
  return cat;
}

ModelInstance build_base_model(const Network& net, const BuildOptions& opt) {
  ModelInstance m;
  m.cat = make_catalog(net);
  const VarCatalog& cat = m.cat;
  const int n = cat.nvars();
  m.lb.assign((size_t)n, -kInf);
  m.ub.assign((size_t)n, kInf);
  m.obj.assign((size_t)n, 0.0);

  // angle interval per bus index: the reference bus is always pinned
  std::vector<Interval> angle((size_t)cat.nbus, Interval{-kInf, kInf});
  std::vector<bool> has_angle((size_t)cat.nbus, false);
  int ref = net.bus_index(net.reference_bus);
  angle[(size_t)ref] = {opt.reference_angle, opt.reference_angle};
  has_angle[(size_t)ref] = true;
  for (const auto& ai : opt.angle_intervals) {
    int bi = net.bus_index(ai.bus);
    if (bi < 0) throw std::invalid_argument("angle interval for unknown bus " +
                                            std::to_string(ai.bus));
    if (ai.lo > ai.hi) throw std::invalid_argument("empty angle interval");
    Interval cur = has_angle[(size_t)bi] ? angle[(size_t)bi] : Interval{ai.lo, ai.hi};
    angle[(size_t)bi] = intersect(cur, {ai.lo, ai.hi});
    has_angle[(size_t)bi] = true;
    if (angle[(size_t)bi].lo > angle[(size_t)bi].hi)
      throw std::invalid_argument("contradictory angle intervals for bus " +
                                  std::to_string(ai.bus));
  }

  std::vector<Interval> ebox((size_t)cat.nbus), fbox((size_t)cat.nbus);
  for (int i = 0; i < cat.nbus; ++i) {
    const Bus& bus = net.buses[(size_t)i];
    Interval vmag{bus.Vmin, bus.Vmax};
    Interval e{-bus.Vmax, bus.Vmax}, f{-bus.Vmax, bus.Vmax};
    if (has_angle[(size_t)i]) {
      std::pair<double, double> cr, sr;
      if (angle[(size_t)i].lo == angle[(size_t)i].hi) {
        // exact trig keeps pinned angles (the reference fix in particular)
        // free of range-arithmetic dust
        double c = std::cos(angle[(size_t)i].lo), s = std::sin(angle[(size_t)i].lo);
        cr = {c, c};
        sr = {s, s};
      } else {
        cr = cos_range(angle[(size_t)i].lo, angle[(size_t)i].hi);
        sr = sin_range(angle[(size_t)i].lo, angle[(size_t)i].hi);
      }
      e = intersect(e, product_range(vmag, {cr.first, cr.second}));
      f = intersect(f, product_range(vmag, {sr.first, sr.second}));
    }
    ebox[(size_t)i] = e;
    fbox[(size_t)i] = f;

    m.lb[(size_t)cat.v2(i)] = bus.Vmin * bus.Vmin;
    m.ub[(size_t)cat.v2(i)] = bus.Vmax * bus.Vmax;
    m.lb[(size_t)cat.e(i)] = e.lo;
    m.ub[(size_t)cat.e(i)] = e.hi;
    m.lb[(size_t)cat.f(i)] = f.lo;
    m.ub[(size_t)cat.f(i)] = f.hi;
    Interval ekk = square_range(e), fkk = square_range(f), x = product_range(e, f);
    m.lb[(size_t)cat.ekk(i)] = ekk.lo;
    m.ub[(size_t)cat.ekk(i)] = ekk.hi;
    m.lb[(size_t)cat.fkk(i)] = fkk.lo;
    m.ub[(size_t)cat.fkk(i)] = fkk.hi;
    m.lb[(size_t)cat.xk(i)] = x.lo;
    m.ub[(size_t)cat.xk(i)] = x.hi;
  }

  // linking equalities V2 = Ekk + Fkk
  for (int i = 0; i < cat.nbus; ++i) {
    RowBuilder rb;
    rb.add(cat.v2(i), 1.0).add(cat.ekk(i), -1.0).add(cat.fkk(i), -1.0);
    m.rows.push_back(rb.done(Sense::EQ, 0.0,
                             "vlink_" + std::to_string(net.buses[(size_t)i].id)));
  }

  for (int j = 0; j < (int)cat.branches.size(); ++j) {
    const auto& be = cat.branches[(size_t)j];
    const BranchParams& br = net.branches[(size_t)be.net_index];
    const double t = br.tau;
    const double c = std::cos(br.sigma), s = std::sin(br.sigma);
    const Bus& busk = net.buses[(size_t)be.from];
    const Bus& busm = net.buses[(size_t)be.to];

    // cross products and their boxes
    Interval cross_bound{-busk.Vmax * busm.Vmax, busk.Vmax * busm.Vmax};
    Interval ekm = intersect(product_range(ebox[(size_t)be.from], ebox[(size_t)be.to]), cross_bound);
    Interval efkm = intersect(product_range(ebox[(size_t)be.from], fbox[(size_t)be.to]), cross_bound);
    Interval fekm = intersect(product_range(fbox[(size_t)be.from], ebox[(size_t)be.to]), cross_bound);
    Interval fkm = intersect(product_range(fbox[(size_t)be.from], fbox[(size_t)be.to]), cross_bound);
    m.lb[(size_t)cat.e_km(j)] = ekm.lo;
    m.ub[(size_t)cat.e_km(j)] = ekm.hi;
    m.lb[(size_t)cat.ef_km(j)] = efkm.lo;
    m.ub[(size_t)cat.ef_km(j)] = efkm.hi;
    m.lb[(size_t)cat.fe_km(j)] = fekm.lo;
    m.ub[(size_t)cat.fe_km(j)] = fekm.hi;
    m.lb[(size_t)cat.f_km(j)] = fkm.lo;
    m.ub[(size_t)cat.f_km(j)] = fkm.hi;

    double dmax = busk.Vmax / t + busm.Vmax;
    for (int dv : {cat.de_km(j), cat.df_km(j), cat.de_mk(j), cat.df_mk(j)}) {
      m.lb[(size_t)dv] = 0.0;
      m.ub[(size_t)dv] = dmax;
    }

    // flow definitions
    FlowCoef cp = pkm_coef(br), cq = qkm_coef(br);
    FlowCoef cpr = pmk_coef(br), cqr = qmk_coef(br);
    add_flow_row(m.rows, cat, j, cat.pkm(j), cp, "pdef_" + be.fwd);
    add_flow_row(m.rows, cat, j, cat.qkm(j), cq, "qdef_" + be.fwd);
    add_flow_row(m.rows, cat, j, cat.pmk(j), cpr, "pdef_" + be.rev);
    add_flow_row(m.rows, cat, j, cat.qmk(j), cqr, "qdef_" + be.rev);

    Interval ekkI{m.lb[(size_t)cat.ekk(be.from)], m.ub[(size_t)cat.ekk(be.from)]};
    Interval fkkI{m.lb[(size_t)cat.fkk(be.from)], m.ub[(size_t)cat.fkk(be.from)]};
    Interval xkI{m.lb[(size_t)cat.xk(be.from)], m.ub[(size_t)cat.xk(be.from)]};
    Interval emmI{m.lb[(size_t)cat.ekk(be.to)], m.ub[(size_t)cat.ekk(be.to)]};
    Interval fmmI{m.lb[(size_t)cat.fkk(be.to)], m.ub[(size_t)cat.fkk(be.to)]};
    Interval xmI{m.lb[(size_t)cat.xk(be.to)], m.ub[(size_t)cat.xk(be.to)]};
    double mp = flow_bound(cp, ekkI, fkkI, xkI, emmI, fmmI, xmI, cross_bound);
    double mq = flow_bound(cq, ekkI, fkkI, xkI, emmI, fmmI, xmI, cross_bound);
    double mpr = flow_bound(cpr, ekkI, fkkI, xkI, emmI, fmmI, xmI, cross_bound);
    double mqr = flow_bound(cqr, ekkI, fkkI, xkI, emmI, fmmI, xmI, cross_bound);
    m.lb[(size_t)cat.pkm(j)] = -mp;
    m.ub[(size_t)cat.pkm(j)] = mp;
    m.lb[(size_t)cat.qkm(j)] = -mq;
    m.ub[(size_t)cat.qkm(j)] = mq;
    m.lb[(size_t)cat.pmk(j)] = -mpr;
    m.ub[(size_t)cat.pmk(j)] = mpr;
    m.lb[(size_t)cat.qmk(j)] = -mqr;
    m.ub[(size_t)cat.qmk(j)] = mqr;

    // circle auxiliaries and their definitional equalities
    CircleCoef ck = circle_coef_km(br), cm = circle_coef_mk(br);
    double v2k_hi = busk.Vmax * busk.Vmax, v2m_hi = busm.Vmax * busm.Vmax;
    double akm_b = mp + std::abs(ck.kp) * v2k_hi;
    double bkm_b = mq + std::abs(ck.kq) * v2k_hi;
    double amk_b = mpr + std::abs(cm.kp) * v2m_hi;
    double bmk_b = mqr + std::abs(cm.kq) * v2m_hi;
    m.lb[(size_t)cat.alpha_km(j)] = -akm_b;
    m.ub[(size_t)cat.alpha_km(j)] = akm_b;
    m.lb[(size_t)cat.beta_km(j)] = -bkm_b;
    m.ub[(size_t)cat.beta_km(j)] = bkm_b;
    m.lb[(size_t)cat.alpha_mk(j)] = -amk_b;
    m.ub[(size_t)cat.alpha_mk(j)] = amk_b;
    m.lb[(size_t)cat.beta_mk(j)] = -bmk_b;
    m.ub[(size_t)cat.beta_mk(j)] = bmk_b;

    RowBuilder ra;
    ra.add(cat.alpha_km(j), 1.0).add(cat.pkm(j), -1.0).add(cat.v2(be.from), ck.kp);
    m.rows.push_back(ra.done(Sense::EQ, 0.0, "adef_" + be.fwd));
    RowBuilder rbta;
    rbta.add(cat.beta_km(j), 1.0).add(cat.qkm(j), -1.0).add(cat.v2(be.from), ck.kq);
    m.rows.push_back(rbta.done(Sense::EQ, 0.0, "bdef_" + be.fwd));
    RowBuilder ram;
    ram.add(cat.alpha_mk(j), 1.0).add(cat.pmk(j), -1.0).add(cat.v2(be.to), cm.kp);
    m.rows.push_back(ram.done(Sense::EQ, 0.0, "adef_" + be.rev));
    RowBuilder rbm;
    rbm.add(cat.beta_mk(j), 1.0).add(cat.qmk(j), -1.0).add(cat.v2(be.to), cm.kq);
    m.rows.push_back(rbm.done(Sense::EQ, 0.0, "bdef_" + be.rev));

    // absolute-difference lower-bounding pairs:
    //   dE_km >= +-(e_k/t - c e_m + s f_m)      dF_km >= +-(f_k/t - c f_m - s e_m)
    //   dE_mk >= +-(e_m - (c/t) e_k - (s/t) f_k) dF_mk >= +-(f_m - (c/t) f_k + (s/t) e_k)
    auto abs_pair = [&](int dvar, int v1, double c1, int v2, double c2, int v3,
                        double c3, const std::string& base) {
      RowBuilder rp;
      rp.add(dvar, 1.0).add(v1, -c1).add(v2, -c2).add(v3, -c3);
      m.rows.push_back(rp.done(Sense::GE, 0.0, base + "p"));
      RowBuilder rn;
      rn.add(dvar, 1.0).add(v1, c1).add(v2, c2).add(v3, c3);
      m.rows.push_back(rn.done(Sense::GE, 0.0, base + "n"));
    };
    abs_pair(cat.de_km(j), cat.e(be.from), 1.0 / t, cat.e(be.to), -c,
             cat.f(be.to), s, "dEdef_" + be.fwd + "_");
    abs_pair(cat.df_km(j), cat.f(be.from), 1.0 / t, cat.f(be.to), -c,
             cat.e(be.to), -s, "dFdef_" + be.fwd + "_");
    abs_pair(cat.de_mk(j), cat.e(be.to), 1.0, cat.e(be.from), -c / t,
             cat.f(be.from), -s / t, "dEdef_" + be.rev + "_");
    abs_pair(cat.df_mk(j), cat.f(be.to), 1.0, cat.f(be.from), -c / t,
             cat.e(be.from), s / t, "dFdef_" + be.rev + "_");
  }

  // bus balances
  for (int i = 0; i < cat.nbus; ++i) {
    const Bus& bus = net.buses[(size_t)i];
    RowBuilder rp, rq;
    for (int j = 0; j < (int)cat.branches.size(); ++j) {
      const auto& be = cat.branches[(size_t)j];
      if (be.from == i) {
        rp.add(cat.pkm(j), 1.0);
        rq.add(cat.qkm(j), 1.0);
      }
      if (be.to == i) {
        rp.add(cat.pmk(j), 1.0);
        rq.add(cat.qmk(j), 1.0);
      }
    }
    rp.add(cat.v2(i), bus.Gs);
    rq.add(cat.v2(i), -bus.Bs);
    for (int gj = 0; gj < (int)cat.gens.size(); ++gj) {
      if (cat.gens[(size_t)gj].bus != i) continue;
      rp.add(cat.pg(gj), -1.0);
      rq.add(cat.qg(gj), -1.0);
    }
    std::string id = std::to_string(bus.id);
    m.rows.push_back(rp.done(Sense::EQ, -bus.Pd, "pbal_" + id));
    m.rows.push_back(rq.done(Sense::EQ, -bus.Qd, "qbal_" + id));
  }

  // zero-width angle fixings with a nonzero angle need the direction row
  // f*cos(theta) = e*sin(theta); theta = 0 is already carried by the f box
  for (int i = 0; i < cat.nbus; ++i) {
    if (!has_angle[(size_t)i]) continue;
    const Interval& ai = angle[(size_t)i];
    if (ai.lo != ai.hi || std::sin(ai.lo) == 0.0) continue;
    RowBuilder rb;
    rb.add(cat.f(i), std::cos(ai.lo)).add(cat.e(i), -std::sin(ai.lo));
    m.rows.push_back(rb.done(Sense::EQ, 0.0,
                             "angfix_" + std::to_string(net.buses[(size_t)i].id)));
  }

  // generators: boxes, epigraph rows, objective
  for (int gj = 0; gj < (int)cat.gens.size(); ++gj) {
    const Generator& gen = net.generators[(size_t)cat.gens[(size_t)gj].net_index];
    m.lb[(size_t)cat.pg(gj)] = gen.Pmin;
    m.ub[(size_t)cat.pg(gj)] = gen.Pmax;
    m.lb[(size_t)cat.qg(gj)] = gen.Qmin;
    m.ub[(size_t)cat.qg(gj)] = gen.Qmax;

    const CostCurve& cc = gen.cost;
    auto cost_at = [&](double p) { return cc.c2 * p * p + cc.c1 * p + cc.c0; };
    double tmin, tmax;
    tmax = std::max(cost_at(gen.Pmin), cost_at(gen.Pmax));
    if (cc.c2 > 0) {
      double vertex = -cc.c1 / (2 * cc.c2);
      double pstar = std::clamp(vertex, gen.Pmin, gen.Pmax);
      tmin = cost_at(pstar);
    } else {
      tmin = std::min(cost_at(gen.Pmin), cost_at(gen.Pmax));
    }
    m.lb[(size_t)cat.tg(gj)] = tmin;
    m.ub[(size_t)cat.tg(gj)] = tmax;
    m.obj[(size_t)cat.tg(gj)] = 1.0;

    std::string id = std::to_string(gj + 1);
    m.rows.push_back(cost_epigraph_tangent(cc, 0.0, cat.pg(gj), cat.tg(gj),
                                           "cost0_" + id));
    if (cc.c2 > 0) {
      double mid = (gen.Pmin + gen.Pmax) / 2;
      m.rows.push_back(cost_epigraph_tangent(cc, mid, cat.pg(gj), cat.tg(gj),
                                             "cost1_" + id));
    }
  }

  for (int v = 0; v < n; ++v) {
    if (!std::isfinite(m.lb[(size_t)v]) || !std::isfinite(m.ub[(size_t)v]))
      throw std::logic_error("unbounded variable after bound assignment: " +
                             cat.names[(size_t)v]);
  }
  return m;
}

LinearConstraint cost_epigraph_tangent(const CostCurve& cost, double p_hat,
                                       int p_var, int t_var, std::string name) {
  // t >= (2 c2 p_hat + c1) p - c2 p_hat^2 + c0
  RowBuilder rb;
  rb.add(t_var, 1.0).add(p_var, -(2 * cost.c2 * p_hat + cost.c1));
  return rb.done(Sense::GE, cost.c0 - cost.c2 * p_hat * p_hat, std::move(name));
}

LiftedPoint embed_feasible_point(const Network& net, const ModelInstance& m,
                                 const std::vector<std::complex<double>>& voltages) {
  const VarCatalog& cat = m.cat;
  if ((int)voltages.size() != cat.nbus)
    throw std::invalid_argument("need one voltage per bus");
  LiftedPoint pt;
  pt.x.assign((size_t)cat.nvars(), 0.0);

  for (int i = 0; i < cat.nbus; ++i) {
    double e = voltages[(size_t)i].real(), f = voltages[(size_t)i].imag();
    pt.x[(size_t)cat.e(i)] = e;
    pt.x[(size_t)cat.f(i)] = f;
    pt.x[(size_t)cat.v2(i)] = e * e + f * f;
    pt.x[(size_t)cat.ekk(i)] = e * e;
    pt.x[(size_t)cat.fkk(i)] = f * f;
    pt.x[(size_t)cat.xk(i)] = e * f;
  }

  for (int j = 0; j < (int)cat.branches.size(); ++j) {
    const auto& be = cat.branches[(size_t)j];
    const BranchParams& br = net.branches[(size_t)be.net_index];
    double ek = voltages[(size_t)be.from].real(), fk = voltages[(size_t)be.from].imag();
    double em = voltages[(size_t)be.to].real(), fm = voltages[(size_t)be.to].imag();
    pt.x[(size_t)cat.e_km(j)] = ek * em;
    pt.x[(size_t)cat.ef_km(j)] = ek * fm;
    pt.x[(size_t)cat.fe_km(j)] = fk * em;
    pt.x[(size_t)cat.f_km(j)] = fk * fm;

    const double t = br.tau, c = std::cos(br.sigma), s = std::sin(br.sigma);
    pt.x[(size_t)cat.de_km(j)] = std::abs(ek / t - em * c + fm * s);
    pt.x[(size_t)cat.df_km(j)] = std::abs(fk / t - fm * c - em * s);
    pt.x[(size_t)cat.de_mk(j)] = std::abs(em - (c / t) * ek - (s / t) * fk);
    pt.x[(size_t)cat.df_mk(j)] = std::abs(fm - (c / t) * fk + (s / t) * ek);

    FlowQuad fl = flow_rect(br, {ek, fk, em, fm});
    pt.x[(size_t)cat.pkm(j)] = fl.Pkm;
    pt.x[(size_t)cat.qkm(j)] = fl.Qkm;
    pt.x[(size_t)cat.pmk(j)] = fl.Pmk;
    pt.x[(size_t)cat.qmk(j)] = fl.Qmk;

    CircleCoef ck = circle_coef_km(br), cm = circle_coef_mk(br);
    double v2k = pt.x[(size_t)cat.v2(be.from)], v2m = pt.x[(size_t)cat.v2(be.to)];
    pt.x[(size_t)cat.alpha_km(j)] = fl.Pkm - ck.kp * v2k;
    pt.x[(size_t)cat.beta_km(j)] = fl.Qkm - ck.kq * v2k;
    pt.x[(size_t)cat.alpha_mk(j)] = fl.Pmk - cm.kp * v2m;
    pt.x[(size_t)cat.beta_mk(j)] = fl.Qmk - cm.kq * v2m;
  }

  // generator outputs absorb the bus residuals
  std::vector<int> gens_at((size_t)cat.nbus, 0);
  for (const auto& ge : cat.gens) ++gens_at[(size_t)ge.bus];
  for (int i = 0; i < cat.nbus; ++i) {
    if (gens_at[(size_t)i] == 0) continue;
    const Bus& bus = net.buses[(size_t)i];
    double pres = bus.Pd + bus.Gs * pt.x[(size_t)cat.v2(i)];
    double qres = bus.Qd - bus.Bs * pt.x[(size_t)cat.v2(i)];
    for (int j = 0; j < (int)cat.branches.size(); ++j) {
      const auto& be = cat.branches[(size_t)j];
      if (be.from == i) {
        pres += pt.x[(size_t)cat.pkm(j)];
        qres += pt.x[(size_t)cat.qkm(j)];
      }
      if (be.to == i) {
        pres += pt.x[(size_t)cat.pmk(j)];
        qres += pt.x[(size_t)cat.qmk(j)];
      }
    }
    for (int gj = 0; gj < (int)cat.gens.size(); ++gj) {
      if (cat.gens[(size_t)gj].bus != i) continue;
      pt.x[(size_t)cat.pg(gj)] = pres / gens_at[(size_t)i];
      pt.x[(size_t)cat.qg(gj)] = qres / gens_at[(size_t)i];
    }
  }
  for (int gj = 0; gj < (int)cat.gens.size(); ++gj) {
    const CostCurve& cc = net.generators[(size_t)cat.gens[(size_t)gj].net_index].cost;
    double p = pt.x[(size_t)cat.pg(gj)];
    pt.x[(size_t)cat.tg(gj)] = cc.c2 * p * p + cc.c1 * p + cc.c0;
  }
  return pt;
}

LPModel to_lp_model(const ModelInstance& m) {
  LPModel lp;
  const int n = m.cat.nvars();
  lp.lb = m.lb;
  lp.ub = m.ub;
  lp.obj = m.obj;
  lp.col_names = m.cat.names;
  lp.kind.assign((size_t)n, LPModel::ColKind::Continuous);
  lp.rows = m.rows;
  int i = 0;
  for (const Cut& cut : m.cut_pool) {
    LinearConstraint row = cut.row;
    row.name = "cut_" + std::string(family_name(cut.family)) + "_" +
               std::to_string(i++) + "_" + cut.source;
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

void write_model_lp(const ModelInstance& m, const std::string& path) {
  write_lp_file(to_lp_model(m), path);
}

}  // namespace opfcut
