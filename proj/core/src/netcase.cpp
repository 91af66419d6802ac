#include "opfcut/netcase.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace opfcut {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Strips '%' comments and MATLAB '...' line continuations.
std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_quote = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\'') in_quote = !in_quote;
    if (!in_quote && c == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
      out.push_back('\n');
      continue;
    }
    if (!in_quote && c == '.' && i + 2 < text.size() && text[i + 1] == '.' &&
        text[i + 2] == '.') {
      i += 2;
      while (i + 1 < text.size() && text[i + 1] != '\n') ++i;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

// Locates "<field> = [ ... ];" and splits the bracketed block into numeric
// rows. Rows are separated by ';' or newlines.
std::vector<std::vector<double>> find_matrix(const std::string& text,
                                             const std::string& field) {
  const std::string key = "." + field;
  size_t pos = 0;
  size_t start = std::string::npos;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    size_t after = pos + key.size();
    while (after < text.size() && std::isspace((unsigned char)text[after])) ++after;
    if (after < text.size() && text[after] == '=') {
      start = after + 1;
      break;
    }
    pos += key.size();
  }
  if (start == std::string::npos)
    throw ParseError("missing matrix block: " + field);
  while (start < text.size() && std::isspace((unsigned char)text[start])) ++start;
  if (start >= text.size() || text[start] != '[')
    throw ParseError("matrix block " + field + " is not a bracketed matrix");
  size_t end = text.find(']', start);
  if (end == std::string::npos)
    throw ParseError("unterminated matrix block: " + field);
  std::string body = text.substr(start + 1, end - start - 1);
  for (char& c : body)
    if (c == ';' || c == '\r') c = '\n';

  std::vector<std::vector<double>> rows;
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream toks(line);
    std::string tok;
    std::vector<double> row;
    while (toks >> tok) {
      if (tok == ",") continue;
      // allow trailing commas inside rows
      while (!tok.empty() && tok.back() == ',') tok.pop_back();
      if (tok.empty()) continue;
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("non-numeric token '" + tok + "' in matrix " + field);
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix block " + field + " is empty");
  return rows;
}

double find_scalar(const std::string& text, const std::string& field) {
  const std::string key = "." + field;
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    size_t after = pos + key.size();
    while (after < text.size() && std::isspace((unsigned char)text[after])) ++after;
    if (after < text.size() && text[after] == '=') {
      ++after;
      size_t used = 0;
      try {
        double v = std::stod(text.substr(after), &used);
        return v;
      } catch (const std::exception&) {
        throw ParseError("non-numeric value for " + field);
      }
    }
    pos += key.size();
  }
  throw ParseError("missing matrix block: " + field);
}

double col(const std::vector<double>& row, size_t idx, double fallback) {
  return idx < row.size() ? row[idx] : fallback;
}

bool neutral_angle_limit(double lo, double hi) {
  bool lo_free = (lo == 0.0) || (lo <= -360.0);
  bool hi_free = (hi == 0.0) || (hi >= 360.0);
  return lo_free && hi_free;
}

void validate(const Network& net) {
  std::unordered_set<int> ids;
  int refs = 0;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second)
      throw ParseError("duplicate bus id " + std::to_string(b.id));
    if (!(b.Vmin > 0))
      throw ParseError("bus " + std::to_string(b.id) + ": Vmin must be > 0");
    if (!(b.Vmin <= b.Vmax))
      throw ParseError("bus " + std::to_string(b.id) + ": Vmin > Vmax");
    if (b.kind == BusKind::Reference) ++refs;
  }
  if (refs == 0) throw ParseError("no reference bus");
  if (refs > 1) throw ParseError("multiple reference buses");
  for (const auto& g : net.generators) {
    if (!ids.count(g.bus))
      throw ParseError("generator on unknown bus " + std::to_string(g.bus));
    if (g.Pmin > g.Pmax || g.Qmin > g.Qmax)
      throw ParseError("generator on bus " + std::to_string(g.bus) +
                       ": inverted output limits");
    if (g.cost.c2 < 0)
      throw ParseError("generator on bus " + std::to_string(g.bus) +
                       ": negative quadratic cost coefficient");
  }
  for (const auto& br : net.branches) {
    if (!ids.count(br.from) || !ids.count(br.to))
      throw ParseError("branch references unknown bus " +
                       std::to_string(ids.count(br.from) ? br.to : br.from));
    if (br.in_service && br.r * br.r + br.x * br.x <= 0.0)
      throw ParseError("zero series impedance on in-service branch " +
                       std::to_string(br.from) + "-" + std::to_string(br.to));
    if (!(br.tau > 0))
      throw ParseError("branch " + std::to_string(br.from) + "-" +
                       std::to_string(br.to) + ": tap ratio must be > 0");
  }
}

}  // namespace

int Network::bus_index(int id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return (int)i;
  return -1;
}

const Bus& Network::bus(int id) const {
  int i = bus_index(id);
  if (i < 0) throw std::out_of_range("unknown bus " + std::to_string(id));
  return buses[i];
}

Network parse_case(const std::string& raw) {
  const std::string text = strip_comments(raw);

  Network net;
  net.baseMVA = find_scalar(text, "baseMVA");
  if (!(net.baseMVA > 0)) throw ParseError("baseMVA must be positive");
  const double base = net.baseMVA;

  for (const auto& row : find_matrix(text, "bus")) {
    if (row.size() < 13)
      throw ParseError("bus row with fewer than 13 columns");
    Bus b;
    b.id = (int)row[0];
    int type = (int)row[1];
    switch (type) {
      case 1: b.kind = BusKind::PQ; break;
      case 2: b.kind = BusKind::PV; break;
      case 3: b.kind = BusKind::Reference; break;
      default:
        throw ParseError("bus " + std::to_string(b.id) +
                         ": unsupported bus type " + std::to_string(type));
    }
    b.Pd = row[2] / base;
    b.Qd = row[3] / base;
    b.Gs = row[4] / base;
    b.Bs = row[5] / base;
    b.Vmax = row[11];
    b.Vmin = row[12];
    if (b.kind == BusKind::Reference) net.reference_bus = b.id;
    net.buses.push_back(b);
  }

  for (const auto& row : find_matrix(text, "gen")) {
    if (row.size() < 10)
      throw ParseError("gen row with fewer than 10 columns");
    Generator g;
    g.bus = (int)row[0];
    g.Qmax = row[3] / base;
    g.Qmin = row[4] / base;
    g.in_service = col(row, 7, 1.0) > 0;
    g.Pmax = row[8] / base;
    g.Pmin = row[9] / base;
    // Capability-curve and ramp columns (PC1..RAMP_Q) describe constraints
    // this model does not carry; reject them when active instead of
    // silently dropping them.  APF (col 21) is a dispatch hint, not a
    // constraint, and is ignored.
    for (size_t c = 10; c < std::min<size_t>(row.size(), 20); ++c) {
      if (row[c] != 0.0)
        throw ParseError("gen on bus " + std::to_string(g.bus) +
                         ": capability-curve/ramp column " +
                         std::to_string(c + 1) + " is nonzero (unsupported)");
    }
    net.generators.push_back(g);
  }

  for (const auto& row : find_matrix(text, "branch")) {
    if (row.size() < 11)
      throw ParseError("branch row with fewer than 11 columns");
    BranchParams br;
    br.from = (int)row[0];
    br.to = (int)row[1];
    br.r = row[2];
    br.x = row[3];
    br.b_sh = row[4];
    br.g_sh = 0.0;
    br.rateA = row[5] / base;  // MVA -> per-unit; 0 stays "unlimited"
    double tap = row[8];
    br.tau = (tap == 0.0) ? 1.0 : tap;
    br.sigma = row[9] * kPi / 180.0;
    br.in_service = row[10] > 0;
    double lo = col(row, 11, 0.0), hi = col(row, 12, 0.0);
    if (!neutral_angle_limit(lo, hi))
      throw ParseError("branch " + std::to_string(br.from) + "-" +
                       std::to_string(br.to) +
                       ": angle-difference limits are unsupported");
    double z2 = br.r * br.r + br.x * br.x;
    if (z2 > 0) {
      br.g = br.r / z2;
      br.b = -br.x / z2;
    }
    net.branches.push_back(br);
  }

  auto gencost = find_matrix(text, "gencost");
  if (gencost.size() != net.generators.size())
    throw ParseError("gencost has " + std::to_string(gencost.size()) +
                     " rows for " + std::to_string(net.generators.size()) +
                     " generators (reactive cost tables are unsupported)");
  for (size_t i = 0; i < gencost.size(); ++i) {
    const auto& row = gencost[i];
    if (row.size() < 4) throw ParseError("gencost row too short");
    int model = (int)row[0];
    if (model != 2)
      throw ParseError("gencost model " + std::to_string(model) +
                       " unsupported (piecewise-linear costs rejected)");
    int ncost = (int)row[3];
    if ((int)row.size() < 4 + ncost) throw ParseError("gencost row too short");
    std::vector<double> coef(row.begin() + 4, row.begin() + 4 + ncost);
    // coef is highest-degree first
    while ((int)coef.size() > 3) {
      if (coef.front() != 0.0)
        throw ParseError("polynomial cost of degree > 2 unsupported");
      coef.erase(coef.begin());
    }
    while (coef.size() < 3) coef.insert(coef.begin(), 0.0);
    CostCurve cc;
    // convert from $/MW^k to $/pu^k
    cc.c2 = coef[0] * base * base;
    cc.c1 = coef[1] * base;
    cc.c0 = coef[2];
    net.generators[i].cost = cc;
  }

  validate(net);
  return net;
}

Network parse_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

namespace {

using ojson = nlohmann::ordered_json;

const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::PQ: return "PQ";
    case BusKind::PV: return "PV";
    case BusKind::Reference: return "reference";
  }
  return "PQ";
}

BusKind kind_from(const std::string& s) {
  if (s == "PQ") return BusKind::PQ;
  if (s == "PV") return BusKind::PV;
  if (s == "reference") return BusKind::Reference;
  throw ParseError("unknown bus kind: " + s);
}

}  // namespace

std::string network_to_json(const Network& net) {
  ojson j;
  j["baseMVA"] = net.baseMVA;
  j["reference_bus"] = net.reference_bus;
  j["buses"] = ojson::array();
  for (const auto& b : net.buses) {
    ojson jb;
    jb["id"] = b.id;
    jb["kind"] = kind_name(b.kind);
    jb["Pd"] = b.Pd;
    jb["Qd"] = b.Qd;
    jb["Gs"] = b.Gs;
    jb["Bs"] = b.Bs;
    jb["Vmin"] = b.Vmin;
    jb["Vmax"] = b.Vmax;
    j["buses"].push_back(std::move(jb));
  }
  j["generators"] = ojson::array();
  for (const auto& g : net.generators) {
    ojson jg;
    jg["bus"] = g.bus;
    jg["Pmin"] = g.Pmin;
    jg["Pmax"] = g.Pmax;
    jg["Qmin"] = g.Qmin;
    jg["Qmax"] = g.Qmax;
    jg["cost"] = {{"c2", g.cost.c2}, {"c1", g.cost.c1}, {"c0", g.cost.c0}};
    jg["in_service"] = g.in_service;
    j["generators"].push_back(std::move(jg));
  }
  j["branches"] = ojson::array();
  for (const auto& br : net.branches) {
    ojson jb;
    jb["from"] = br.from;
    jb["to"] = br.to;
    jb["r"] = br.r;
    jb["x"] = br.x;
    jb["g"] = br.g;
    jb["b"] = br.b;
    jb["g_sh"] = br.g_sh;
    jb["b_sh"] = br.b_sh;
    jb["tau"] = br.tau;
    jb["sigma"] = br.sigma;
    jb["rateA"] = br.rateA;
    jb["in_service"] = br.in_service;
    j["branches"].push_back(std::move(jb));
  }
  return j.dump(2);
}

Network network_from_json(const std::string& text) {
  ojson j = ojson::parse(text);
  Network net;
  net.baseMVA = j.at("baseMVA").get<double>();
  net.reference_bus = j.at("reference_bus").get<int>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    b.kind = kind_from(jb.at("kind").get<std::string>());
    b.Pd = jb.at("Pd").get<double>();
    b.Qd = jb.at("Qd").get<double>();
    b.Gs = jb.at("Gs").get<double>();
    b.Bs = jb.at("Bs").get<double>();
    b.Vmin = jb.at("Vmin").get<double>();
    b.Vmax = jb.at("Vmax").get<double>();
    net.buses.push_back(b);
  }
  for (const auto& jg : j.at("generators")) {
    Generator g;
    g.bus = jg.at("bus").get<int>();
    g.Pmin = jg.at("Pmin").get<double>();
    g.Pmax = jg.at("Pmax").get<double>();
    g.Qmin = jg.at("Qmin").get<double>();
    g.Qmax = jg.at("Qmax").get<double>();
    g.cost.c2 = jg.at("cost").at("c2").get<double>();
    g.cost.c1 = jg.at("cost").at("c1").get<double>();
    g.cost.c0 = jg.at("cost").at("c0").get<double>();
    g.in_service = jg.at("in_service").get<bool>();
    net.generators.push_back(g);
  }
  for (const auto& jb : j.at("branches")) {
    BranchParams br;
    br.from = jb.at("from").get<int>();
    br.to = jb.at("to").get<int>();
    br.r = jb.at("r").get<double>();
    br.x = jb.at("x").get<double>();
    br.g = jb.at("g").get<double>();
    br.b = jb.at("b").get<double>();
    br.g_sh = jb.at("g_sh").get<double>();
    br.b_sh = jb.at("b_sh").get<double>();
    br.tau = jb.at("tau").get<double>();
    br.sigma = jb.at("sigma").get<double>();
    br.rateA = jb.at("rateA").get<double>();
    br.in_service = jb.at("in_service").get<bool>();
    net.branches.push_back(br);
  }
  validate(net);
  return net;
}

}  // namespace opfcut
