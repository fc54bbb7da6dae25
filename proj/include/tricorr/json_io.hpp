#pragma once

// Canonical JSON wire formats. Boxes: {"parties":3,"settings":2,"outcomes":2,
// "p":[64 numbers in (x,y,z,a,b,c) row-major order],"label":...}; the
// bipartite analogue carries 16 numbers in (y,z,b,c) order. Density matrices:
// {"dim":n,"re":[n*n],"im":[n*n]} row-major.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "tricorr/box.hpp"
#include "tricorr/dimension_search.hpp"
#include "tricorr/inequalities.hpp"
#include "tricorr/membership.hpp"
#include "tricorr/quantum.hpp"

namespace tricorr::io {

using nlohmann::json;

inline json to_json(const TripartiteBox& box) {
  json j;
  j["parties"] = 3;
  j["settings"] = 2;
  j["outcomes"] = 2;
  j["p"] = std::vector<double>(box.p.begin(), box.p.end());
  if (!box.label.empty()) j["label"] = box.label;
  return j;
}

inline json to_json(const BipartiteBox& box) {
  json j;
  j["parties"] = 2;
  j["settings"] = 2;
  j["outcomes"] = 2;
  j["p"] = std::vector<double>(box.p.begin(), box.p.end());
  if (!box.label.empty()) j["label"] = box.label;
  return j;
}

using AnyBox = std::variant<TripartiteBox, BipartiteBox>;

inline AnyBox box_from_json(const json& j) {
  if (!j.contains("parties") || !j.contains("p"))
    throw std::invalid_argument("box JSON: missing 'parties' or 'p'");
  if (j.value("settings", 2) != 2 || j.value("outcomes", 2) != 2)
    throw std::invalid_argument("box JSON: only 2 settings / 2 outcomes supported");
  std::vector<double> p = j.at("p").get<std::vector<double>>();
  std::string label = j.value("label", std::string{});
  int parties = j.at("parties").get<int>();
  if (parties == 3) return TripartiteBox(p, label);
  if (parties == 2) return BipartiteBox(p, label);
  throw std::invalid_argument("box JSON: parties must be 2 or 3");
}

inline AnyBox load_box(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open box file: " + path);
  json j;
  in >> j;
  return box_from_json(j);
}

inline TripartiteBox load_tripartite(const std::string& path) {
  AnyBox b = load_box(path);
  if (auto* t = std::get_if<TripartiteBox>(&b)) return *t;
  throw std::invalid_argument("expected a 3-party box: " + path);
}

inline json to_json(const CMatrix& m) {
  json j;
  j["dim"] = m.rows();
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(m.size()));
  im.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline json to_json(const DensityMatrix& rho) {
  json j = to_json(rho.rho);
  if (!rho.label.empty()) j["label"] = rho.label;
  return j;
}

inline CMatrix cmatrix_from_json(const json& j) {
  int dim = j.at("dim").get<int>();
  auto re = j.at("re").get<std::vector<double>>();
  auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim) ||
      im.size() != re.size())
    throw std::invalid_argument("matrix JSON: length mismatch");
  CMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      std::size_t k = static_cast<std::size_t>(r * dim + c);
      m(r, c) = Complex(re[k], im[k]);
    }
  return m;
}

inline DensityMatrix density_from_json(const json& j) {
  return DensityMatrix(cmatrix_from_json(j), j.value("label", std::string{}));
}

inline DensityMatrix load_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file: " + path);
  json j;
  in >> j;
  return density_from_json(j);
}

inline json to_json(const ValidationReport& rep) {
  return json{{"ok", rep.ok()},
              {"nonneg", rep.nonneg},
              {"normalized", rep.normalized},
              {"no_signalling", rep.no_signalling},
              {"offending", rep.offending}};
}

inline json to_json(const InequalityResult& r) {
  return json{{"value", r.value},
              {"bound", r.bound},
              {"variant_index", r.variant_index},
              {"violated", r.violated},
              {"expression", r.expression}};
}

inline json to_json(const CorrelatorSet& cs) {
  json j;
  j["singles"] = {{"A", {cs.a(0), cs.a(1)}},
                  {"B", {cs.b(0), cs.b(1)}},
                  {"C", {cs.c(0), cs.c(1)}}};
  json ab = json::array(), ac = json::array(), bc = json::array(), abc = json::array();
  for (int s = 0; s < 4; ++s) {
    ab.push_back(cs.ab(s >> 1, s & 1));
    ac.push_back(cs.ac(s >> 1, s & 1));
    bc.push_back(cs.bc(s >> 1, s & 1));
  }
  for (int t = 0; t < 8; ++t) abc.push_back(cs.abc((t >> 2) & 1, (t >> 1) & 1, t & 1));
  j["pairs"] = {{"AB", ab}, {"AC", ac}, {"BC", bc}};
  j["triples"] = abc;
  return j;
}

inline json to_json(const MembershipResult& r) {
  json j;
  j["feasible"] = r.feasible;
  j["solver_status"] = r.solver_status == lp::SolveStatus::feasible      ? "optimal"
                       : r.solver_status == lp::SolveStatus::infeasible  ? "infeasible"
                                                                         : "iteration_limit";
  j["max_residual"] = r.max_residual;
  if (r.feasible) {
    json w = json::array();
    for (std::size_t i = 0; i < r.weights.size(); ++i)
      if (r.weights[i] > 1e-12)
        w.push_back({{"vertex", r.vertex_labels[i]}, {"weight", r.weights[i]}});
    j["weights"] = w;
  }
  return j;
}

inline json to_json(const StrengthResult& r) {
  json j;
  j["kind"] = r.kind == FamilyKind::svetlichny ? "svetlichny" : "mermin";
  j["decomposable"] = r.decomposable;
  j["p"] = r.p;
  j["dominant_vertex"] = r.dominant_label;
  j["degenerate"] = r.degenerate;
  j["max_residual"] = r.max_residual;
  j["residual_box"] = to_json(r.residual);
  return j;
}

inline json to_json(const CaseTrace& t) {
  return json{{"case", t.label},
              {"outcome", t.outcome},
              {"detail", t.detail},
              {"max_residual", t.max_residual}};
}

inline json to_json(const LhvLhsModel& m) {
  json j;
  j["cut"] = to_string(m.cut);
  j["dimension"] = m.dimension();
  j["weights"] = m.weights;
  json resp = json::array(), pieces = json::array();
  for (const auto& r : m.responders)
    resp.push_back(std::vector<double>(r.p.begin(), r.p.end()));
  for (const auto& piece : m.pieces) {
    json pj;
    pj["box"] = to_json(piece.box);
    pj["realizability"] = to_string(piece.realizability);
    pj["has_state"] = piece.state.has_value();
    if (piece.state) pj["state"] = to_json(*piece.state);
    pieces.push_back(pj);
  }
  j["responders"] = resp;
  j["pieces"] = pieces;
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

inline json to_json(const DimensionVerdict& v, bool include_witness = false) {
  json j;
  j["d"] = v.d;
  j["status"] = to_string(v.status);
  json trace = json::array();
  for (const auto& t : v.cases) trace.push_back(to_json(t));
  j["trace"] = trace;
  if (!v.note.empty()) j["note"] = v.note;
  if (include_witness && v.witness) j["witness"] = to_json(*v.witness);
  return j;
}

inline json to_json(const BipartiteDimensionVerdict& v) {
  json j;
  j["d"] = v.d;
  j["status"] = to_string(v.status);
  json trace = json::array();
  for (const auto& t : v.cases) trace.push_back(to_json(t));
  j["trace"] = trace;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline json to_json(const SuperCertificate& c, bool include_witness = false) {
  json j;
  j["cut"] = to_string(c.cut);
  j["quantum_dim"] = c.quantum_dim;
  json verdicts = json::array();
  for (const auto& v : c.verdicts) verdicts.push_back(to_json(v, include_witness));
  j["verdicts"] = verdicts;
  j["conclusion"] = conclusion_string(c.conclusion, true);
  j["notes"] = c.notes;
  return j;
}

inline json to_json(const BipartiteSuperCertificate& c) {
  json j;
  j["quantum_dim"] = c.quantum_dim;
  json verdicts = json::array();
  for (const auto& v : c.verdicts) verdicts.push_back(to_json(v));
  j["verdicts"] = verdicts;
  j["conclusion"] = conclusion_string(c.conclusion, false);
  j["notes"] = c.notes;
  if (c.steering) j["steering_chsh"] = to_json(*c.steering);
  return j;
}

inline json to_json(const GenuineCertificate& c) {
  json j;
  json per_cut = json::array();
  for (const auto& sc : c.per_cut) per_cut.push_back(to_json(sc));
  j["per_cut"] = per_cut;
  j["conclusion"] = conclusion_string(c.conclusion, true);
  j["symmetry_shortcut"] = c.symmetry_shortcut;
  j["notes"] = c.notes;
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tricorr::io
