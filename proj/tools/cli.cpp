#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "opfcut/cuts.hpp"
#include "opfcut/cutting_plane.hpp"
#include "opfcut/glover_milp.hpp"
#include "opfcut/lifted_model.hpp"
#include "opfcut/netcase.hpp"

namespace opfcut::cli {

namespace {

using ojson = nlohmann::ordered_json;

ojson run_manifest(const std::string& command, const std::string& input,
                   const ojson& config) {
  ojson m;
  m["command"] = command;
  m["input"] = input;
  m["config"] = config;
  m["tool_version"] = kVersion;
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  m["timestamp"] = buf;
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

bool parse_cut_list(const std::string& spec, SolveConfig* cfg, std::string* err) {
  cfg->delta = cfg->loss = cfg->circle = cfg->sdp = cfg->rating = cfg->cost = false;
  if (spec == "all") {
    cfg->delta = cfg->loss = cfg->circle = cfg->sdp = cfg->rating = cfg->cost = true;
    return true;
  }
  if (spec == "none") return true;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "delta") cfg->delta = true;
    else if (tok == "loss") cfg->loss = true;
    else if (tok == "circle") cfg->circle = true;
    else if (tok == "sdp") cfg->sdp = true;
    else if (tok == "rating") cfg->rating = true;
    else if (tok == "cost") cfg->cost = true;
    else {
      *err = "unknown cut family: " + tok;
      return false;
    }
  }
  return true;
}

bool parse_interval(const std::string& s, AngleInterval* out, std::string* err) {
  // BUS:LO:HI, radians
  size_t a = s.find(':');
  size_t b = a == std::string::npos ? std::string::npos : s.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    *err = "expected BUS:LO:HI, got " + s;
    return false;
  }
  try {
    out->bus = std::stoi(s.substr(0, a));
    out->lo = std::stod(s.substr(a + 1, b - a - 1));
    out->hi = std::stod(s.substr(b + 1));
  } catch (const std::exception&) {
    *err = "malformed angle interval: " + s;
    return false;
  }
  if (out->lo > out->hi) {
    *err = "empty angle interval: " + s;
    return false;
  }
  return true;
}

ojson cut_log_json(const ModelInstance& model) {
  ojson arr = ojson::array();
  for (const Cut& c : model.cut_pool) {
    ojson jc;
    jc["family"] = family_name(c.family);
    jc["source"] = c.source;
    ojson terms = ojson::object();
    for (auto [id, coef] : c.row.terms)
      terms[model.cat.names[(size_t)id]] = coef;
    jc["coefficients"] = std::move(terms);
    jc["sense"] = c.row.sense == Sense::LE ? "<=" : c.row.sense == Sense::GE ? ">=" : "=";
    jc["rhs"] = c.row.rhs;
    jc["violation"] = c.violation;
    arr.push_back(std::move(jc));
  }
  return arr;
}

int cmd_relax(const std::string& case_path, const std::string& cuts_spec,
              int max_rounds, double tol,
              const std::vector<std::string>& interval_specs, bool sdp_with_one,
              std::optional<double> reference_obj, unsigned seed,
              const std::string& out_path, const std::string& cut_log_path,
              const std::string& csv_path, bool loss_both_ends) {
  Network net;
  try {
    net = parse_case_file(case_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }

  SolveConfig cfg;
  std::string err;
  if (!parse_cut_list(cuts_spec, &cfg, &err)) {
    std::cerr << "error: " << err << "\n";
    return kExitParse;
  }
  cfg.max_rounds = max_rounds;
  cfg.tol_violation = tol;
  cfg.sdp_with_one = sdp_with_one;
  cfg.seed = seed;
  cfg.loss_both_ends = loss_both_ends;
  for (const auto& s : interval_specs) {
    AngleInterval ai;
    if (!parse_interval(s, &ai, &err)) {
      std::cerr << "error: " << err << "\n";
      return kExitParse;
    }
    cfg.angle_intervals.push_back(ai);
  }

  RunArtifacts artifacts;
  SolveReport rep;
  try {
    rep = run(net, cfg, reference_obj, &artifacts);
  } catch (const std::exception& e) {
    std::cerr << "error: LP failure: " << e.what() << "\n";
    return kExitLpFailure;
  }

  std::printf("case: %s\n", case_path.c_str());
  std::printf("buses %zu  branches %zu  generators %zu\n", net.buses.size(),
              net.branches.size(), net.generators.size());
  std::printf("status: %s   rounds: %d\n", report_status_name(rep.status),
              rep.rounds);
  if (rep.status != SolveReport::Status::Infeasible) {
    std::printf("lower bound: %.6f\n", rep.final_bound);
    if (rep.reference_objective)
      std::printf("reference:   %.6f   gap: %.4f%%\n", *rep.reference_objective,
                  rep.gap ? *rep.gap * 100 : 0.0);
  }
  std::string cuts_line = "cuts:";
  for (const auto& [fam, cnt] : rep.cuts_per_family)
    cuts_line += " " + fam + " " + std::to_string(cnt);
  std::printf("%s\n", cuts_line.c_str());
  std::printf("time: %.2f s\n", rep.wall_seconds);

  if (!out_path.empty()) {
    ojson config;
    config["cuts"] = cuts_spec;
    config["max_rounds"] = max_rounds;
    config["tol_violation"] = tol;
    config["sdp_with_one"] = sdp_with_one;
    config["seed"] = seed;
    config["angle_intervals"] = interval_specs;
    if (reference_obj) config["reference_obj"] = *reference_obj;
    ojson doc;
    doc["manifest"] = run_manifest("relax", case_path, config);
    doc["report"] = ojson::parse(report_to_json(rep));
    write_text(out_path, doc.dump(2) + "\n");
  }
  if (!cut_log_path.empty())
    write_text(cut_log_path, cut_log_json(artifacts.model).dump(2) + "\n");
  if (!csv_path.empty()) write_text(csv_path, report_to_csv(rep));

  return rep.status == SolveReport::Status::Infeasible ? kExitInfeasible : kExitOk;
}

int cmd_export_milp(const std::string& case_path, int bits,
                    const std::string& out_path, std::string manifest_path) {
  Network net;
  try {
    net = parse_case_file(case_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  try {
    GloverBuild gb = build_milp(net, bits);
    export_milp(gb.milp, out_path);
    if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
    write_text(manifest_path, glover_manifest_json(gb) + "\n");
    int nbin = 0;
    for (auto k : gb.milp.kind)
      if (k == LPModel::ColKind::Binary) ++nbin;
    std::printf("wrote %s: %d columns (%d binary), %zu rows; manifest %s\n",
                out_path.c_str(), gb.milp.ncols(), nbin, gb.milp.rows.size(),
                manifest_path.c_str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLpFailure;
  }
  return kExitOk;
}

int cmd_validate(const std::string& case_path, const std::string& profile_path) {
  Network net;
  try {
    net = parse_case_file(case_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  std::vector<std::complex<double>> v((size_t)net.buses.size());
  try {
    std::ifstream in(profile_path);
    if (!in) throw std::runtime_error("cannot open " + profile_path);
    ojson j = ojson::parse(in);
    std::vector<bool> seen(net.buses.size(), false);
    for (const auto& jv : j.at("voltages")) {
      int bus = jv.at("bus").get<int>();
      int bi = net.bus_index(bus);
      if (bi < 0) throw std::runtime_error("profile references unknown bus " +
                                           std::to_string(bus));
      double e, f;
      if (jv.contains("e")) {
        e = jv.at("e").get<double>();
        f = jv.at("f").get<double>();
      } else {
        double vm = jv.at("vm").get<double>();
        double va = jv.contains("va") ? jv.at("va").get<double>()
                                      : jv.at("va_deg").get<double>() * M_PI / 180.0;
        e = vm * std::cos(va);
        f = vm * std::sin(va);
      }
      v[(size_t)bi] = {e, f};
      seen[(size_t)bi] = true;
    }
    for (size_t i = 0; i < seen.size(); ++i)
      if (!seen[i])
        throw std::runtime_error("profile is missing bus " +
                                 std::to_string(net.buses[i].id));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    ModelInstance model = build_base_model(net);
    LiftedPoint pt = embed_feasible_point(net, model, v);
    double worst = 0;
    std::string worst_what;
    for (const auto& row : model.rows) {
      double viol = -row.slack(pt.x);
      if (viol > worst) {
        worst = viol;
        worst_what = row.name;
      }
    }
    int ncuts = 0;
    for (int j = 0; j < (int)model.cat.branches.size(); ++j) {
      for (const Cut& c : supporting_cuts(net, model, j, pt)) {
        ++ncuts;
        double viol = -c.row.slack(pt.x);
        if (viol > worst) {
          worst = viol;
          worst_what = std::string("cut_") + family_name(c.family) + "_" + c.source;
        }
      }
    }
    std::printf("base rows: %zu   generated cuts: %d\n", model.rows.size(), ncuts);
    std::printf("max violation: %.3e%s%s\n", worst,
                worst_what.empty() ? "" : "   at: ",
                worst_what.c_str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLpFailure;
  }
  return kExitOk;
}

int cmd_info(const std::string& case_path) {
  Network net;
  try {
    net = parse_case_file(case_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  std::printf("%zu buses, %zu branches, %zu generators\n", net.buses.size(),
              net.branches.size(), net.generators.size());
  double pd = 0, qd = 0, pmax = 0;
  int off_br = 0, off_gen = 0, transformers = 0, rated = 0;
  for (const auto& b : net.buses) {
    pd += b.Pd;
    qd += b.Qd;
  }
  for (const auto& g : net.generators) {
    if (!g.in_service) ++off_gen;
    else pmax += g.Pmax;
  }
  for (const auto& br : net.branches) {
    if (!br.in_service) ++off_br;
    if (br.tau != 1.0 || br.sigma != 0.0) ++transformers;
    if (br.rateA > 0) ++rated;
  }
  std::printf("baseMVA %.1f, reference bus %d\n", net.baseMVA, net.reference_bus);
  std::printf("demand %.1f MW / %.1f MVAr, dispatchable capacity %.1f MW\n",
              pd * net.baseMVA, qd * net.baseMVA, pmax * net.baseMVA);
  std::printf("transformers %d, rated branches %d, out-of-service: %d branches, %d generators\n",
              transformers, rated, off_br, off_gen);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  std::vector<std::string> a = args;
  std::vector<char*> argv;
  std::string prog = "opfcut";
  argv.push_back(prog.data());
  for (auto& s : a) argv.push_back(s.data());
  return dispatch((int)argv.size(), argv.data());
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Lifted linear relaxations and cutting-plane lower bounds for AC optimal power flow"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // relax
  auto* relax = app.add_subcommand("relax", "run the cutting-plane lower bound");
  std::string case_path, cuts_spec = "all", out_path, cut_log_path, csv_path;
  std::vector<std::string> interval_specs;
  int max_rounds = 200;
  double tol = 1e-6;
  bool sdp_with_one = false, loss_both_ends = false;
  double reference = std::nan("");
  unsigned seed = 0;
  relax->add_option("case", case_path, "MATPOWER case file")->required();
  relax->add_option("--cuts", cuts_spec, "all, none, or comma list of delta,loss,circle,sdp,rating,cost");
  relax->add_option("--max-rounds", max_rounds, "cutting-plane round limit");
  relax->add_option("--tol", tol, "violation tolerance on normalized cuts");
  relax->add_option("--angle-interval", interval_specs,
                    "BUS:LO:HI (radians, repeatable) angle tightening");
  relax->add_flag("--sdp-with-one", sdp_with_one, "use (1,e,f,...) SDP subsets");
  relax->add_flag("--loss-both-ends", loss_both_ends, "also separate k-side loss tangents");
  relax->add_option("--reference-obj", reference, "known feasible objective for gap reporting");
  relax->add_option("--seed", seed, "echoed into the report");
  relax->add_option("--out", out_path, "write JSON report here");
  relax->add_option("--cut-log", cut_log_path, "write the cut pool as JSON");
  relax->add_option("--csv", csv_path, "write the bound trajectory as CSV");

  // export-milp
  auto* milp = app.add_subcommand("export-milp", "write the binary-expansion MILP");
  std::string milp_case, milp_out, milp_manifest;
  int bits = 8;
  milp->add_option("case", milp_case, "MATPOWER case file")->required();
  milp->add_option("--bits", bits, "bits per expanded coordinate (default 8)");
  milp->add_option("-o,--out", milp_out, "output LP-format path")->required();
  milp->add_option("--manifest", milp_manifest, "manifest JSON path (default <out>.manifest.json)");

  // validate
  auto* val = app.add_subcommand("validate", "embed a voltage profile and report violations");
  std::string val_case, val_profile;
  val->add_option("case", val_case, "MATPOWER case file")->required();
  val->add_option("profile", val_profile, "voltage profile JSON")->required();

  // info
  auto* info = app.add_subcommand("info", "print network statistics");
  std::string info_case;
  info->add_option("case", info_case, "MATPOWER case file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitParse;
  }

  if (relax->parsed())
    return cmd_relax(case_path, cuts_spec, max_rounds, tol, interval_specs,
                     sdp_with_one,
                     std::isnan(reference) ? std::nullopt
                                           : std::optional<double>(reference),
                     seed, out_path, cut_log_path, csv_path, loss_both_ends);
  if (milp->parsed()) return cmd_export_milp(milp_case, bits, milp_out, milp_manifest);
  if (val->parsed()) return cmd_validate(val_case, val_profile);
  if (info->parsed()) return cmd_info(info_case);
  return kExitParse;
}

}  // namespace opfcut::cli
