// tricorr: build correlation boxes, evaluate Bell-type inequalities, decide
// polytope membership, search dimension-bounded hidden-state decompositions,
// certify (genuine) super-bi-unsteerability, sweep visibilities, and emit the
// full reproduction report.
//
// Exit codes: 0 = analysis completed (whatever the verdict), 1 = execution
// failure, 2 = invalid input. `reproduce-paper` exits 1 when a claim fails.
// Timing goes to stderr so the data sections stay byte-stable.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tricorr/json_io.hpp"
#include "tricorr/reproduce.hpp"

namespace {

using namespace tricorr;
using nlohmann::json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

FamilyKind parse_kind(const std::string& name) {
  if (name == "mermin") return FamilyKind::mermin;
  if (name == "svetlichny") return FamilyKind::svetlichny;
  throw std::invalid_argument("unknown family '" + name + "' (mermin|svetlichny)");
}

Cut parse_cut(const std::string& name) {
  auto cut = cut_from_string(name);
  if (!cut) throw std::invalid_argument("unknown cut '" + name + "' (A|BC, B|AC, C|AB)");
  return *cut;
}

MeasurementPair parse_measurements(const std::string& name) {
  if (name == "sigma-pair") return sigma_pair();
  if (name == "qutrit-block") return qutrit_block_povm();
  throw std::invalid_argument("unknown measurement set '" + name +
                              "' (sigma-pair|qutrit-block)");
}

struct AnalyzeFlags {
  bool validate = false, corrs = false, mermin = false, svet = false, chsh = false,
       steering = false, mem_local = false, mem_two_way = false, str_mermin = false,
       str_svet = false, dimension = false, certify = false, genuine = false;
  int d = 4;
  std::string cut = "A|BC";
  int qdim = 2;
};

json run_tripartite_analyses(const TripartiteBox& box, const AnalyzeFlags& f,
                             double tol) {
  json a;
  if (f.validate) a["validate"] = io::to_json(validate_tripartite(box, tol));
  if (f.corrs) a["correlators"] = io::to_json(correlators(box));
  if (f.mermin) a["mermin"] = io::to_json(mermin_value(box, tol));
  if (f.svet) a["svetlichny"] = io::to_json(svetlichny_value(box, tol));
  if (f.mem_local)
    a["membership_local"] = io::to_json(lp_membership(box, Polytope::fully_local));
  if (f.mem_two_way)
    a["membership_two_way"] = io::to_json(lp_membership(box, Polytope::two_way_local));
  if (f.str_mermin)
    a["strength_mermin"] = io::to_json(strength(box, FamilyKind::mermin));
  if (f.str_svet)
    a["strength_svetlichny"] = io::to_json(strength(box, FamilyKind::svetlichny));
  if (f.dimension)
    a["dimension"] = io::to_json(search_dimension(box, parse_cut(f.cut), f.d, tol));
  if (f.certify)
    a["certify"] = io::to_json(certify_super_bi_unsteerable(
        box, parse_cut(f.cut), f.qdim, std::nullopt, std::nullopt, tol));
  if (f.genuine)
    a["certify_genuine"] =
        io::to_json(certify_genuine(box, {f.qdim, f.qdim, f.qdim}, std::nullopt, tol));
  return a;
}

json run_bipartite_analyses(const BipartiteBox& box, const AnalyzeFlags& f, double tol) {
  json a;
  if (f.validate) a["validate"] = io::to_json(validate_bipartite(box, tol));
  if (f.chsh) a["chsh"] = io::to_json(chsh_value(box, tol));
  if (f.steering) a["steering_chsh"] = io::to_json(steering_chsh_value(box, tol));
  if (f.dimension) a["dimension"] = io::to_json(bipartite_search_dimension(box, f.d, tol));
  if (f.certify)
    a["certify"] = io::to_json(certify_super_unsteerable(box, f.qdim, std::nullopt, tol));
  return a;
}

std::string flatten_csv(const json& analyses) {
  std::ostringstream os;
  os << "analysis,key,value\n";
  for (auto& [name, obj] : analyses.items())
    for (auto& [key, val] : obj.items()) {
      if (val.is_structured()) continue;
      os << name << "," << key << ","
         << (val.is_string() ? val.get<std::string>() : val.dump()) << "\n";
    }
  return os.str();
}

struct SweepColumn {
  std::string header;
  std::function<std::string(const TripartiteBox&)> eval;
};

std::vector<SweepColumn> sweep_columns(const std::vector<std::string>& names, int qdim) {
  std::vector<SweepColumn> cols;
  for (const std::string& n : names) {
    if (n == "mermin") {
      cols.push_back({"mermin_value",
                      [](const TripartiteBox& b) { return fmt(mermin_value(b).value); }});
      cols.push_back({"mermin_violated", [](const TripartiteBox& b) {
                        return std::string(mermin_value(b).violated ? "1" : "0");
                      }});
    } else if (n == "svetlichny") {
      cols.push_back({"svetlichny_value", [](const TripartiteBox& b) {
                        return fmt(svetlichny_value(b).value);
                      }});
      cols.push_back({"svetlichny_violated", [](const TripartiteBox& b) {
                        return std::string(svetlichny_value(b).violated ? "1" : "0");
                      }});
    } else if (n == "membership-local") {
      cols.push_back({"membership_local_feasible", [](const TripartiteBox& b) {
                        return std::string(
                            lp_membership(b, Polytope::fully_local).feasible ? "1" : "0");
                      }});
    } else if (n == "membership-two-way") {
      cols.push_back({"membership_two_way_feasible", [](const TripartiteBox& b) {
                        return std::string(
                            lp_membership(b, Polytope::two_way_local).feasible ? "1"
                                                                               : "0");
                      }});
    } else if (n == "strength-mermin") {
      cols.push_back({"strength_mermin", [](const TripartiteBox& b) {
                        return fmt(strength(b, FamilyKind::mermin).p);
                      }});
    } else if (n == "strength-svetlichny") {
      cols.push_back({"strength_svetlichny", [](const TripartiteBox& b) {
                        return fmt(strength(b, FamilyKind::svetlichny).p);
                      }});
    } else if (n == "dimension") {
      for (int d = 1; d <= 4; ++d)
        cols.push_back({"dimension_d" + std::to_string(d), [d](const TripartiteBox& b) {
                          return std::string(
                              to_string(search_dimension(b, Cut::AvsBC, d).status));
                        }});
    } else if (n == "certify-genuine") {
      cols.push_back({"certify_genuine", [qdim](const TripartiteBox& b) {
                        return std::string(conclusion_string(
                            certify_genuine(b, {qdim, qdim, qdim}).conclusion, true));
                      }});
    } else {
      throw std::invalid_argument("unknown sweep analysis '" + n +
                                  "' (mermin, svetlichny, membership-local, "
                                  "membership-two-way, strength-mermin, "
                                  "strength-svetlichny, dimension, certify-genuine)");
    }
  }
  return cols;
}

int cmd_reproduce(const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<reproduce::ClaimResult> results = reproduce::run_all();
  std::ostringstream table;
  int passed = 0;
  for (const auto& r : results) {
    table << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "\n        " << r.detail
          << "\n";
    passed += r.passed ? 1 : 0;
  }
  table << passed << "/" << results.size() << " claims pass\n";
  std::cout << table.str();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    json j = json::array();
    for (const auto& r : results)
      j.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    io::write_json(out_dir + "/claims.json", j);
    std::ofstream summary(out_dir + "/summary.txt");
    summary << table.str();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::cerr << "wall_time_ms=" << ms << "\n";
  for (const auto& r : results)
    if (!r.passed) {
      std::cerr << "failed claim: " << r.name << "\n";
      return 1;
    }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"tripartite correlation-box toolkit"};
  app.require_subcommand(1);

  auto* family = app.add_subcommand("family", "write a noisy family box as JSON");
  std::string family_kind;
  double family_v = 0.5;
  std::string family_out;
  family->add_option("kind", family_kind, "mermin|svetlichny")->required();
  family->add_option("--v", family_v, "visibility in (0,1]")->required();
  family->add_option("--out", family_out, "output file (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "run analyses on a box file");
  std::string analyze_file, analyze_out;
  double tol = kEpsProb;
  bool csv = false, json_flag = false;
  AnalyzeFlags flags;
  analyze->add_option("boxfile", analyze_file, "canonical JSON box")->required();
  analyze->add_flag("--validate", flags.validate, "validation report");
  analyze->add_flag("--correlators", flags.corrs, "expectation values");
  analyze->add_flag("--mermin", flags.mermin, "max Mermin variant");
  analyze->add_flag("--svetlichny", flags.svet, "max Svetlichny variant");
  analyze->add_flag("--chsh", flags.chsh, "max CHSH variant (2-party box)");
  analyze->add_flag("--steering-chsh", flags.steering, "steering form (2-party box)");
  analyze->add_flag("--membership-local", flags.mem_local, "fully-local LP");
  analyze->add_flag("--membership-two-way", flags.mem_two_way, "two-way-local LP");
  analyze->add_flag("--strength-mermin", flags.str_mermin, "Mermin strength");
  analyze->add_flag("--strength-svetlichny", flags.str_svet, "Svetlichny strength");
  analyze->add_flag("--dimension", flags.dimension, "dimension-d decomposition search");
  analyze->add_flag("--certify", flags.certify, "super-(bi-)unsteerability certificate");
  analyze->add_flag("--certify-genuine", flags.genuine, "all-cuts certificate");
  analyze->add_option("--d", flags.d, "hidden-variable dimension for --dimension");
  analyze->add_option("--cut", flags.cut, "bipartite cut (A|BC, B|AC, C|AB)");
  analyze->add_option("--qdim", flags.qdim, "untrusted-side Hilbert dimension");
  analyze->add_option("--tol", tol, "validation tolerance");
  analyze->add_flag("--csv", csv, "flat CSV output");
  analyze->add_flag("--json", json_flag, "JSON output (default)");
  analyze->add_option("--out", analyze_out, "output file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "analyze a family across visibilities");
  std::string sweep_kind = "mermin", sweep_analyses = "mermin", sweep_out;
  double v_from = 0.05, v_to = 1.0;
  int steps = 20, sweep_qdim = 2;
  bool sweep_csv = false, sweep_json = false;
  sweep->add_option("--family", sweep_kind, "mermin|svetlichny")->required();
  sweep->add_option("--from", v_from, "first visibility")->required();
  sweep->add_option("--to", v_to, "last visibility")->required();
  sweep->add_option("--steps", steps, "number of grid points (>= 2)")->required();
  sweep->add_option("--analyses", sweep_analyses, "comma-separated analysis names");
  sweep->add_option("--qdim", sweep_qdim, "untrusted-side Hilbert dimension");
  sweep->add_flag("--csv", sweep_csv, "CSV output");
  sweep->add_flag("--json", sweep_json, "JSON output (default)");
  sweep->add_option("--out", sweep_out, "output file (default stdout)");

  auto* quantum = app.add_subcommand("quantum", "states and Born-rule boxes");
  quantum->require_subcommand(1);
  auto* born = quantum->add_subcommand("born", "Born-rule box from a state file");
  std::string born_state, born_alice = "sigma-pair", born_bob = "sigma-pair",
                          born_charlie = "sigma-pair", born_out;
  born->add_option("--state", born_state, "density matrix JSON")->required();
  born->add_option("--alice", born_alice, "sigma-pair|qutrit-block");
  born->add_option("--bob", born_bob, "sigma-pair|qutrit-block");
  born->add_option("--charlie", born_charlie, "sigma-pair|qutrit-block");
  born->add_option("--out", born_out, "output file (default stdout)");

  auto* state = quantum->add_subcommand("state", "write a named state as JSON");
  std::string state_name, state_out, cq_spec_file;
  double state_v = 0.5;
  int state_lambda = 0;
  state->add_option("name", state_name, "ghz-mixed|qutrit-mixed|lhs-pair|lhs-qubit|cq")
      ->required();
  state->add_option("--v", state_v, "visibility");
  state->add_option("--lambda", state_lambda, "hidden-variable index (0..3)");
  state->add_option("--spec", cq_spec_file, "cq component spec JSON");
  state->add_option("--out", state_out, "output file (default stdout)");

  auto* repro = app.add_subcommand("reproduce-paper", "run the full claim suite");
  std::string out_dir;
  repro->add_option("--out-dir", out_dir, "directory for claims.json + summary.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad command line = invalid input
  }

  auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&] {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::cerr << "wall_time_ms=" << ms << "\n";
  };

  if (family->parsed()) {
    TripartiteBox box = family_box({parse_kind(family_kind), family_v});
    emit(io::to_json(box).dump(2), family_out);
    stamp();
    return 0;
  }

  if (analyze->parsed()) {
    io::AnyBox any = io::load_box(analyze_file);
    json report;
    report["input"] = {{"file", analyze_file}};
    report["tol"] = tol;
    if (auto* tri = std::get_if<TripartiteBox>(&any)) {
      if (!tri->label.empty()) report["input"]["label"] = tri->label;
      report["input"]["parties"] = 3;
      if (flags.chsh || flags.steering)
        throw std::invalid_argument("chsh/steering-chsh need a 2-party box");
      report["analyses"] = run_tripartite_analyses(*tri, flags, tol);
    } else {
      auto& bip = std::get<BipartiteBox>(any);
      if (!bip.label.empty()) report["input"]["label"] = bip.label;
      report["input"]["parties"] = 2;
      if (flags.mermin || flags.svet || flags.mem_local || flags.mem_two_way ||
          flags.str_mermin || flags.str_svet || flags.genuine)
        throw std::invalid_argument("requested analyses need a 3-party box");
      report["analyses"] = run_bipartite_analyses(bip, flags, tol);
    }
    emit(csv ? flatten_csv(report["analyses"]) : report.dump(2), analyze_out);
    stamp();
    return 0;
  }

  if (sweep->parsed()) {
    if (!(v_from < v_to) || steps < 2 || steps > 10000)
      throw std::invalid_argument("sweep needs v_from < v_to and 2 <= steps <= 10000");
    FamilyKind kind = parse_kind(sweep_kind);
    std::vector<std::string> names;
    std::stringstream ss(sweep_analyses);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) names.push_back(item);
    std::vector<SweepColumn> cols = sweep_columns(names, sweep_qdim);
    std::ostringstream out;
    json rows = json::array();
    if (sweep_csv) {
      out << "v";
      for (const auto& c : cols) out << "," << c.header;
      out << "\n";
    }
    for (int k = 0; k < steps; ++k) {
      double V = v_from + (v_to - v_from) * k / (steps - 1);
      TripartiteBox box = family_box({kind, V});
      if (sweep_csv) {
        out << fmt(V);
        for (const auto& c : cols) out << "," << c.eval(box);
        out << "\n";
      } else {
        json row;
        row["v"] = V;
        for (const auto& c : cols) row[c.header] = c.eval(box);
        rows.push_back(row);
      }
    }
    emit(sweep_csv ? out.str() : rows.dump(2), sweep_out);
    stamp();
    return 0;
  }

  if (born->parsed()) {
    DensityMatrix rho = io::load_density(born_state);
    MeasurementPair a = parse_measurements(born_alice);
    MeasurementPair b = parse_measurements(born_bob);
    MeasurementPair c = parse_measurements(born_charlie);
    long tri_dim = static_cast<long>(a[0].dim()) * b[0].dim() * c[0].dim();
    if (rho.dim() == tri_dim) {
      emit(io::to_json(born_tripartite(rho, a, b, c)).dump(2), born_out);
    } else if (rho.dim() == static_cast<long>(b[0].dim()) * c[0].dim()) {
      emit(io::to_json(born_bipartite(rho, b, c)).dump(2), born_out);
    } else {
      throw std::invalid_argument("state dimension matches neither the three-party "
                                  "nor the two-party measurement product");
    }
    stamp();
    return 0;
  }

  if (state->parsed()) {
    DensityMatrix rho = [&] {
      if (state_name == "ghz-mixed") return ghz_mixed(state_v);
      if (state_name == "qutrit-mixed") return qutrit_mixed(state_v);
      if (state_name == "lhs-pair") return lhs_pair(state_lambda, state_v);
      if (state_name == "lhs-qubit") return lhs_qubit(state_lambda, state_v);
      if (state_name == "cq") {
        if (cq_spec_file.empty()) throw std::invalid_argument("cq state needs --spec");
        std::ifstream in(cq_spec_file);
        if (!in) throw std::invalid_argument("cannot open " + cq_spec_file);
        json j;
        in >> j;
        CqSpec spec;
        spec.p = j.at("p").get<std::vector<double>>();
        for (const auto& m : j.at("rho_b")) spec.rho_b.push_back(io::cmatrix_from_json(m));
        for (const auto& m : j.at("rho_c")) spec.rho_c.push_back(io::cmatrix_from_json(m));
        return cq_state(spec);
      }
      throw std::invalid_argument("unknown state '" + state_name + "'");
    }();
    emit(io::to_json(rho).dump(2), state_out);
    stamp();
    return 0;
  }

  if (repro->parsed()) return cmd_reproduce(out_dir);

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError&) {
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
