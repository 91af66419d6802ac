#include "opfcut/glover_milp.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace opfcut {

std::pair<std::vector<int>, double> binary_expansion(double u, int T) {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::domain_error("binary_expansion: u must lie in [0,1]");
  if (T < 1 || T > 30) throw std::domain_error("binary_expansion: T must be 1..30");
  std::vector<int> bits((size_t)T, 0);
  double rem = u;
  for (int j = 1; j <= T; ++j) {
    double w = std::ldexp(1.0, -j);
    if (rem >= w) {
      bits[(size_t)(j - 1)] = 1;
      rem -= w;
    }
  }
  return {bits, rem};
}

std::array<LinearConstraint, 4> mccormick_link(int y_var, int v_var, int w_var,
                                               const std::string& tag) {
  std::array<LinearConstraint, 4> rows;
  rows[0] = RowBuilder().add(w_var, 1.0).add(v_var, -1.0).done(Sense::LE, 0.0, "mcA_" + tag);
  rows[1] = RowBuilder().add(w_var, 1.0).add(y_var, -1.0).done(Sense::LE, 0.0, "mcB_" + tag);
  rows[2] = RowBuilder().add(w_var, 1.0).add(v_var, -1.0).add(y_var, -1.0)
                .done(Sense::GE, -1.0, "mcC_" + tag);
  rows[3] = RowBuilder().add(w_var, 1.0).done(Sense::GE, 0.0, "mcD_" + tag);
  return rows;
}

namespace {

struct Product {
  int var;      // product variable id
  int u, v;     // factor ids, u is the expanded (lexicographically first) one
};

}  // namespace

GloverBuild build_milp(const Network& net, int T) {
  if (T < 1 || T > 30) throw std::invalid_argument("build_milp: T must be 1..30");
  ModelInstance base = build_base_model(net);
  const VarCatalog& cat = base.cat;
  GloverBuild gb;
  gb.T = T;
  gb.milp = to_lp_model(base);
  LPModel& lp = gb.milp;

  auto lex_pair = [&](int a, int b) {
    return cat.names[(size_t)a] <= cat.names[(size_t)b] ? std::make_pair(a, b)
                                                        : std::make_pair(b, a);
  };

  std::vector<Product> products;
  for (int i = 0; i < cat.nbus; ++i) {
    auto [ue, ve] = lex_pair(cat.e(i), cat.e(i));
    products.push_back({cat.ekk(i), ue, ve});
    auto [uf, vf] = lex_pair(cat.f(i), cat.f(i));
    products.push_back({cat.fkk(i), uf, vf});
    auto [ux, vx] = lex_pair(cat.e(i), cat.f(i));
    products.push_back({cat.xk(i), ux, vx});
  }
  for (int j = 0; j < (int)cat.branches.size(); ++j) {
    const auto& be = cat.branches[(size_t)j];
    auto add = [&](int pvar, int a, int b) {
      auto [u, v] = lex_pair(a, b);
      products.push_back({pvar, u, v});
    };
    add(cat.e_km(j), cat.e(be.from), cat.e(be.to));
    add(cat.ef_km(j), cat.e(be.from), cat.f(be.to));
    add(cat.fe_km(j), cat.f(be.from), cat.e(be.to));
    add(cat.f_km(j), cat.f(be.from), cat.f(be.to));
  }

  // boxes this thin cannot be meaningfully normalized; treat as constants
  auto fixed = [&](int v) { return lp.ub[(size_t)v] - lp.lb[(size_t)v] <= 1e-12; };

  // normalized twin for every participating non-fixed coordinate
  std::map<int, int> nrm;  // coordinate id -> normalized var id
  auto normalized_of = [&](int z) {
    auto it = nrm.find(z);
    if (it != nrm.end()) return it->second;
    double lo = lp.lb[(size_t)z], hi = lp.ub[(size_t)z];
    if (!(hi > lo))
      throw std::logic_error("build_milp: cannot normalize coordinate " +
                             cat.names[(size_t)z]);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw std::logic_error("build_milp: unbounded factor variable " +
                             cat.names[(size_t)z]);
    int id = lp.add_col(0.0, 1.0, 0.0, "nrm_" + cat.names[(size_t)z]);
    // z = lo + (hi-lo) * nrm
    lp.rows.push_back(RowBuilder()
                          .add(z, 1.0)
                          .add(id, -(hi - lo))
                          .done(Sense::EQ, lo, "nrmdef_" + cat.names[(size_t)z]));
    nrm.emplace(z, id);
    return id;
  };

  // bits + delta for every expanded coordinate
  struct Bits {
    ExpansionSpec spec;
    int normalized_id = -1;
    std::vector<int> bit_ids;
  };
  std::map<int, Bits> expansions;
  auto expansion_of = [&](int u) -> Bits& {
    auto it = expansions.find(u);
    if (it != expansions.end()) return it->second;
    Bits bx;
    bx.spec.target = u;
    bx.spec.T = T;
    bx.spec.shift = lp.lb[(size_t)u];
    bx.spec.scale = lp.ub[(size_t)u] - lp.lb[(size_t)u];
    bx.spec.var = cat.names[(size_t)u];
    int nu = normalized_of(u);
    bx.normalized_id = nu;
    bx.spec.normalized = lp.col_names[(size_t)nu];
    RowBuilder expansion;
    expansion.add(nu, 1.0);
    for (int j = 1; j <= T; ++j) {
      int bit = lp.add_col(0.0, 1.0, 0.0,
                           "bit_" + cat.names[(size_t)u] + "_" + std::to_string(j),
                           LPModel::ColKind::Binary);
      bx.spec.bits.push_back(lp.col_names[(size_t)bit]);
      bx.bit_ids.push_back(bit);
      expansion.add(bit, -std::ldexp(1.0, -j));
    }
    int dlt = lp.add_col(0.0, std::ldexp(1.0, -T), 0.0,
                         "dlt_" + cat.names[(size_t)u]);
    bx.spec.delta = lp.col_names[(size_t)dlt];
    expansion.add(dlt, -1.0);
    lp.rows.push_back(expansion.done(Sense::EQ, 0.0,
                                     "expdef_" + cat.names[(size_t)u]));
    return expansions.emplace(u, std::move(bx)).first->second;
  };

  for (const Product& pr : products) {
    const std::string& xname = lp.col_names[(size_t)pr.var];
    if (fixed(pr.u) && fixed(pr.v)) {
      double val = lp.lb[(size_t)pr.u] * lp.lb[(size_t)pr.v];
      lp.rows.push_back(RowBuilder().add(pr.var, 1.0).done(Sense::EQ, val,
                                                           "fixprod_" + xname));
      continue;
    }
    if (fixed(pr.u) || fixed(pr.v)) {
      int fv = fixed(pr.u) ? pr.u : pr.v;
      int other = fixed(pr.u) ? pr.v : pr.u;
      lp.rows.push_back(RowBuilder()
                            .add(pr.var, 1.0)
                            .add(other, -lp.lb[(size_t)fv])
                            .done(Sense::EQ, 0.0, "fixprod_" + xname));
      continue;
    }

    // the v bounds must be read before expansion_of can extend the arrays
    const double c = lp.ub[(size_t)pr.v] - lp.lb[(size_t)pr.v];
    const double d = lp.lb[(size_t)pr.v];
    Bits& bx = expansion_of(pr.u);
    int nv = normalized_of(pr.v);
    int nu = bx.normalized_id;
    const double a = bx.spec.scale, b = bx.spec.shift;

    RowBuilder lo_row, hi_row;
    lo_row.add(pr.var, 1.0).add(nu, -a * d).add(nv, -b * c);
    hi_row.add(pr.var, 1.0).add(nu, -a * d).add(nv, -b * c);
    for (int j = 1; j <= T; ++j) {
      int w = lp.add_col(0.0, 1.0, 0.0, "w_" + xname + "_" + std::to_string(j));
      int y = bx.bit_ids[(size_t)(j - 1)];
      for (auto& row : mccormick_link(y, nv, w, xname + "_" + std::to_string(j)))
        lp.rows.push_back(std::move(row));
      double coef = a * c * std::ldexp(1.0, -j);
      lo_row.add(w, -coef);
      hi_row.add(w, -coef);
    }
    hi_row.add(nv, -a * c * std::ldexp(1.0, -T));
    lp.rows.push_back(lo_row.done(Sense::GE, b * d, "sw_lo_" + xname));
    lp.rows.push_back(hi_row.done(Sense::LE, b * d, "sw_hi_" + xname));
  }

  for (auto& [id, bx] : expansions) gb.expansions.push_back(bx.spec);
  return gb;
}

void export_milp(const LPModel& m, const std::string& path) {
  write_lp_file(m, path);
}

std::string glover_manifest_json(const GloverBuild& gb) {
  nlohmann::ordered_json j;
  j["schema"] = "glover_manifest_v1";
  j["bits_per_expansion"] = gb.T;
  j["expansions"] = nlohmann::ordered_json::array();
  for (const auto& ex : gb.expansions) {
    nlohmann::ordered_json e;
    e["var"] = ex.var;
    e["normalized"] = ex.normalized;
    e["delta"] = ex.delta;
    e["shift"] = ex.shift;
    e["scale"] = ex.scale;
    e["bits"] = ex.bits;
    j["expansions"].push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace opfcut
