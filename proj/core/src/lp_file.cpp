#include <algorithm>
#include <cctype>
#include <cstring>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "opfcut/lp_backend.hpp"

namespace opfcut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string col_name(const LPModel& m, int j) {
  if (j < (int)m.col_names.size() && !m.col_names[(size_t)j].empty())
    return m.col_names[(size_t)j];
  return "x" + std::to_string(j);
}

void write_terms(std::ostream& out, const LPModel& m,
                 const std::vector<std::pair<int, double>>& terms) {
  int line_len = 0;
  bool first = true;
  for (auto [id, c] : terms) {
    std::string tok;
    if (c >= 0)
      tok = (first ? std::string() : std::string("+ ")) + fmt(c);
    else
      tok = "- " + fmt(-c);
    tok += " " + col_name(m, id);
    out << ' ' << tok;
    first = false;
    line_len += (int)tok.size() + 1;
    if (line_len > 180) {
      out << "\n   ";
      line_len = 0;
    }
  }
  if (first) out << " 0 " << (m.ncols() > 0 ? col_name(m, 0) : "x0");
}

}  // namespace

void write_lp_file(const LPModel& m, std::ostream& out) {
  out << "\\ LP model written by opfcut\n";
  out << "Minimize\n obj:";
  std::vector<std::pair<int, double>> objterms;
  for (int j = 0; j < m.ncols(); ++j)
    if (m.obj[(size_t)j] != 0.0) objterms.emplace_back(j, m.obj[(size_t)j]);
  if (!objterms.empty())
    write_terms(out, m, objterms);
  out << "\nSubject To\n";
  int anon = 0;
  for (const auto& row : m.rows) {
    std::string name = row.name.empty() ? "c" + std::to_string(anon) : row.name;
    ++anon;
    out << ' ' << name << ':';
    write_terms(out, m, row.terms);
    switch (row.sense) {
      case Sense::LE: out << " <= "; break;
      case Sense::GE: out << " >= "; break;
      case Sense::EQ: out << " = "; break;
    }
    out << fmt(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < m.ncols(); ++j) {
    double lb = m.lb[(size_t)j], ub = m.ub[(size_t)j];
    std::string nm = col_name(m, j);
    if (lb == 0.0 && ub == kInf) continue;  // LP-format default
    if (lb == -kInf && ub == kInf) {
      out << ' ' << nm << " free\n";
    } else if (lb == ub) {
      out << ' ' << nm << " = " << fmt(lb) << "\n";
    } else {
      out << ' ' << (lb == -kInf ? "-infinity" : fmt(lb)) << " <= " << nm
          << " <= " << (ub == kInf ? "+infinity" : fmt(ub)) << "\n";
    }
  }
  bool any_bin = false, any_int = false;
  for (auto k : m.kind) {
    any_bin |= k == LPModel::ColKind::Binary;
    any_int |= k == LPModel::ColKind::Integer;
  }
  if (any_bin) {
    out << "Binary\n";
    int line = 0;
    for (int j = 0; j < m.ncols(); ++j)
      if (m.kind[(size_t)j] == LPModel::ColKind::Binary) {
        out << ' ' << col_name(m, j);
        if (++line % 8 == 0) out << "\n";
      }
    if (line % 8 != 0) out << "\n";
  }
  if (any_int) {
    out << "General\n";
    int line = 0;
    for (int j = 0; j < m.ncols(); ++j)
      if (m.kind[(size_t)j] == LPModel::ColKind::Integer) {
        out << ' ' << col_name(m, j);
        if (++line % 8 == 0) out << "\n";
      }
    if (line % 8 != 0) out << "\n";
  }
  out << "End\n";
}

void write_lp_file(const LPModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_lp_file(m, out);
}

// ---------------------------------------------------------------------------
// Reader for the subset written above (plus juxtaposed coefficients).
// ---------------------------------------------------------------------------

namespace {

struct Tokenizer {
  std::vector<std::string> toks;
  size_t pos = 0;

  explicit Tokenizer(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      // strip comments
      size_t c = line.find('\\');
      if (c != std::string::npos) line.resize(c);
      size_t i = 0;
      while (i < line.size()) {
        char ch = line[i];
        if (std::isspace((unsigned char)ch)) {
          ++i;
          continue;
        }
        if (ch == '<' || ch == '>' || ch == '=') {
          std::string op(1, ch);
          if (i + 1 < line.size() && line[i + 1] == '=') {
            op += '=';
            ++i;
          }
          toks.push_back(op == "<" ? "<=" : op == ">" ? ">=" : op);
          ++i;
          continue;
        }
        if (ch == '+' || ch == '-' || ch == ':') {
          toks.push_back(std::string(1, ch));
          ++i;
          continue;
        }
        size_t j = i;
        while (j < line.size() && !std::isspace((unsigned char)line[j]) &&
               line[j] != '<' && line[j] != '>' && line[j] != '=' &&
               line[j] != '+' && line[j] != '-' && line[j] != ':')
          ++j;
        // keep exponents like 1e-5 together
        std::string tok = line.substr(i, j - i);
        while (j < line.size() && (line[j] == '+' || line[j] == '-') &&
               !tok.empty() &&
               (tok.back() == 'e' || tok.back() == 'E') &&
               std::isdigit((unsigned char)tok[0])) {
          tok += line[j];
          ++j;
          size_t k = j;
          while (k < line.size() && std::isdigit((unsigned char)line[k])) ++k;
          tok += line.substr(j, k - j);
          j = k;
        }
        toks.push_back(tok);
        i = j;
      }
    }
  }
  bool done() const { return pos >= toks.size(); }
  const std::string& peek() const { return toks[pos]; }
  std::string next() { return toks[pos++]; }
};

bool is_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::string low;
  for (char c : s) low += (char)std::tolower((unsigned char)c);
  if (low == "infinity" || low == "inf" || low == "1e30" || low == "1e+30") {
    *out = kInf;
    return true;
  }
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool is_keyword(const std::string& s, const char* kw) {
  if (s.size() != std::strlen(kw)) return false;
  for (size_t i = 0; i < s.size(); ++i)
    if (std::tolower((unsigned char)s[i]) != kw[i]) return false;
  return true;
}

bool section_start(const std::string& t) {
  return is_keyword(t, "subject") || is_keyword(t, "st") ||
         is_keyword(t, "s.t.") || is_keyword(t, "bounds") ||
         is_keyword(t, "binary") || is_keyword(t, "binaries") ||
         is_keyword(t, "general") || is_keyword(t, "generals") ||
         is_keyword(t, "end") || is_keyword(t, "minimize") ||
         is_keyword(t, "maximize") || is_keyword(t, "min") || is_keyword(t, "max");
}

// splits "2x1" into number and name when juxtaposed
bool split_coef(const std::string& t, double* coef, std::string* name) {
  size_t i = 0;
  while (i < t.size() &&
         (std::isdigit((unsigned char)t[i]) || t[i] == '.' ||
          ((t[i] == 'e' || t[i] == 'E') && i + 1 < t.size() &&
           (std::isdigit((unsigned char)t[i + 1])))))
    ++i;
  if (i == 0 || i == t.size()) return false;
  double v;
  if (!is_number(t.substr(0, i), &v)) return false;
  if (std::isdigit((unsigned char)t[i]) || t[i] == '.') return false;
  *coef = v;
  *name = t.substr(i);
  return true;
}

}  // namespace

LPModel read_lp_file(std::istream& in) {
  Tokenizer tz(in);
  LPModel m;
  std::unordered_map<std::string, int> vars;
  std::vector<bool> lb_set, ub_set;

  auto var_id = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it != vars.end()) return it->second;
    int id = m.add_col(0.0, kInf, 0.0, name);
    lb_set.push_back(false);
    ub_set.push_back(false);
    vars.emplace(name, id);
    return id;
  };

  // terms until a sense token, a section keyword, or end
  auto read_terms = [&](std::vector<std::pair<int, double>>& terms) {
    double sign = 1.0;
    bool have_coef = false;
    double coef = 1.0;
    while (!tz.done()) {
      const std::string& t = tz.peek();
      if (t == "<=" || t == ">=" || t == "=" || section_start(t)) break;
      if (t == "+") {
        tz.next();
        continue;
      }
      if (t == "-") {
        sign = -sign;
        tz.next();
        continue;
      }
      double num;
      std::string tok = tz.next();
      // a name followed by ':' is a row label, not a term
      if (!tz.done() && tz.peek() == ":") {
        tz.next();
        sign = 1.0;
        have_coef = false;
        coef = 1.0;
        terms.clear();
        continue;
      }
      if (is_number(tok, &num)) {
        coef = have_coef ? coef * num : num;
        have_coef = true;
        continue;
      }
      std::string name = tok;
      double juxta;
      std::string jn;
      if (split_coef(tok, &juxta, &jn)) {
        coef = have_coef ? coef * juxta : juxta;
        have_coef = true;
        name = jn;
      }
      terms.emplace_back(var_id(name), sign * coef);
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
  };

  enum class Sec { None, Objective, Rows, Bounds, Binary, General, End };
  Sec sec = Sec::None;
  double obj_sign = 1.0;

  while (!tz.done()) {
    const std::string& t = tz.peek();
    if (is_keyword(t, "minimize") || is_keyword(t, "min")) {
      sec = Sec::Objective;
      obj_sign = 1.0;
      tz.next();
      continue;
    }
    if (is_keyword(t, "maximize") || is_keyword(t, "max")) {
      sec = Sec::Objective;
      obj_sign = -1.0;
      tz.next();
      continue;
    }
    if (is_keyword(t, "subject") || is_keyword(t, "st") || is_keyword(t, "s.t.")) {
      tz.next();
      if (!tz.done() && is_keyword(tz.peek(), "to")) tz.next();
      sec = Sec::Rows;
      continue;
    }
    if (is_keyword(t, "bounds")) {
      sec = Sec::Bounds;
      tz.next();
      continue;
    }
    if (is_keyword(t, "binary") || is_keyword(t, "binaries")) {
      sec = Sec::Binary;
      tz.next();
      continue;
    }
    if (is_keyword(t, "general") || is_keyword(t, "generals")) {
      sec = Sec::General;
      tz.next();
      continue;
    }
    if (is_keyword(t, "end")) break;

    switch (sec) {
      case Sec::Objective: {
        std::vector<std::pair<int, double>> terms;
        read_terms(terms);
        for (auto [id, c] : terms) m.obj[(size_t)id] += obj_sign * c;
        break;
      }
      case Sec::Rows: {
        LinearConstraint row;
        std::vector<std::pair<int, double>> terms;
        read_terms(terms);
        if (tz.done()) throw std::runtime_error("LP file: row without sense");
        std::string op = tz.next();
        row.sense = op == "<=" ? Sense::LE : op == ">=" ? Sense::GE : Sense::EQ;
        double rhsv;
        double sgn = 1.0;
        if (!tz.done() && tz.peek() == "-") {
          sgn = -1.0;
          tz.next();
        } else if (!tz.done() && tz.peek() == "+") {
          tz.next();
        }
        if (tz.done() || !is_number(tz.next(), &rhsv))
          throw std::runtime_error("LP file: missing rhs");
        row.rhs = sgn * rhsv;
        // merge duplicate ids
        std::sort(terms.begin(), terms.end());
        for (auto [id, c] : terms) {
          if (!row.terms.empty() && row.terms.back().first == id)
            row.terms.back().second += c;
          else
            row.terms.emplace_back(id, c);
        }
        m.rows.push_back(std::move(row));
        break;
      }
      case Sec::Bounds: {
        // forms: a <= x <= b | x <= b | x >= a | x = a | x free
        double sgn = 1.0;
        if (tz.peek() == "-") {
          sgn = -1.0;
          tz.next();
        } else if (tz.peek() == "+") {
          tz.next();
        }
        double num;
        std::string first = tz.next();
        if (is_number(first, &num)) {
          num *= sgn;
          if (tz.done() || tz.next() != "<=")
            throw std::runtime_error("LP file: malformed bound");
          int id = var_id(tz.next());
          m.lb[(size_t)id] = num;
          lb_set[(size_t)id] = true;
          if (!tz.done() && tz.peek() == "<=") {
            tz.next();
            double s2 = 1.0;
            if (tz.peek() == "-") {
              s2 = -1.0;
              tz.next();
            } else if (tz.peek() == "+") {
              tz.next();
            }
            double ub;
            if (!is_number(tz.next(), &ub))
              throw std::runtime_error("LP file: malformed bound");
            m.ub[(size_t)id] = s2 * ub;
            ub_set[(size_t)id] = true;
          }
        } else {
          int id = var_id(first);
          if (tz.done()) throw std::runtime_error("LP file: malformed bound");
          std::string op = tz.next();
          if (is_keyword(op, "free")) {
            m.lb[(size_t)id] = -kInf;
            m.ub[(size_t)id] = kInf;
            lb_set[(size_t)id] = ub_set[(size_t)id] = true;
            break;
          }
          double s2 = 1.0;
          if (!tz.done() && tz.peek() == "-") {
            s2 = -1.0;
            tz.next();
          } else if (!tz.done() && tz.peek() == "+") {
            tz.next();
          }
          double v;
          if (tz.done() || !is_number(tz.next(), &v))
            throw std::runtime_error("LP file: malformed bound");
          v *= s2;
          if (op == "<=") {
            m.ub[(size_t)id] = v;
            ub_set[(size_t)id] = true;
          } else if (op == ">=") {
            m.lb[(size_t)id] = v;
            lb_set[(size_t)id] = true;
          } else if (op == "=") {
            m.lb[(size_t)id] = m.ub[(size_t)id] = v;
            lb_set[(size_t)id] = ub_set[(size_t)id] = true;
          } else {
            throw std::runtime_error("LP file: malformed bound op " + op);
          }
        }
        break;
      }
      case Sec::Binary: {
        int id = var_id(tz.next());
        m.kind[(size_t)id] = LPModel::ColKind::Binary;
        if (!lb_set[(size_t)id]) m.lb[(size_t)id] = 0.0;
        if (!ub_set[(size_t)id]) m.ub[(size_t)id] = 1.0;
        break;
      }
      case Sec::General: {
        int id = var_id(tz.next());
        m.kind[(size_t)id] = LPModel::ColKind::Integer;
        break;
      }
      default:
        throw std::runtime_error("LP file: unexpected token " + tz.next());
    }
  }
  return m;
}

LPModel read_lp_file_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LP file: " + path);
  return read_lp_file(in);
}

}  // namespace opfcut
