#pragma once

// Dimension-bounded LHV-LHS decomposition search and certification.
//
// Across a bipartite cut, a tripartite box is decomposed as
//   P(abc|xyz) = sum_l r_l P_l(a|x) Q_l(bc|yz)
// with arbitrary responders P_l on the untrusted side and quantum pieces Q_l
// on the trusted pair. The search for hidden-variable dimension d follows the
// deterministic-strategy reduction: any model with d <= 4 splits into at most
// four deterministic responders, and for boxes with a uniform untrusted
// marginal the weights of the full canonical set are fixed to 1/4, so lower
// dimensions correspond to piece-merging patterns whose constrained linear
// systems are decided by rank/residual analysis. Quantum realizability of
// abstract pieces is certified by the arcsine condition (uniform marginals)
// or by explicit constructions.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tricorr/box.hpp"
#include "tricorr/inequalities.hpp"
#include "tricorr/quantum.hpp"
#include "tricorr/simplex.hpp"

namespace tricorr {

enum class FeasStatus { feasible_quantum, feasible_abstract, infeasible, unknown };

inline const char* to_string(FeasStatus s) {
  switch (s) {
    case FeasStatus::feasible_quantum: return "feasible_with_quantum_pieces";
    case FeasStatus::feasible_abstract: return "feasible_abstract_only";
    case FeasStatus::infeasible: return "infeasible";
    case FeasStatus::unknown: return "unknown";
  }
  return "?";
}

enum class Conclusion { super, not_super, undetermined };

struct CaseTrace {
  std::string label;    // e.g. "merge Q0=Q2", "deterministic pair {00,01}"
  std::string outcome;  // "ok" | "inconsistent" | "negative entry" |
                        // "signalling" | "realizability failure" | "undecided"
  std::string detail;
  double max_residual = 0;
};

// ---------------------------------------------------------------------------
// Models

struct TrustedPairPiece {
  BipartiteBox box;
  std::optional<DensityMatrix> state;
  // Trusted measurements producing box from state; sigma_pair on both sides
  // when absent.
  std::optional<std::array<MeasurementPair, 2>> measurements;
  TlmVerdict realizability = TlmVerdict::unknown;
};

struct LhvLhsModel {
  Cut cut = Cut::AvsBC;
  std::vector<double> weights;
  std::vector<SingleBox> responders;       // untrusted party, cut frame
  std::vector<TrustedPairPiece> pieces;    // trusted pair in original order
  std::string note;

  int dimension() const { return static_cast<int>(weights.size()); }

  // Reconstruction in the original party order.
  TripartiteBox reconstruct() const {
    TripartiteBox cutframe;
    for (std::size_t l = 0; l < weights.size(); ++l)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int z = 0; z < 2; ++z)
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                  cutframe.at(x, y, z, a, b, c) += weights[l] *
                                                   responders[l](x, a) *
                                                   pieces[l].box(y, z, b, c);
    PartyPermutation to_front = cut_to_front(cut);
    PartyPermutation inv{};
    for (int i = 0; i < 3; ++i) inv[to_front[i]] = i;
    return permute_parties(cutframe, inv);
  }
};

struct SingleSidePiece {
  SingleBox table;
  std::optional<DensityMatrix> state;
  std::optional<MeasurementPair> measurements;  // sigma_pair when absent
  TlmVerdict realizability = TlmVerdict::unknown;
};

struct BipartiteLhvLhsModel {
  std::vector<double> weights;
  std::vector<SingleBox> responders;      // first party of the pair
  std::vector<SingleSidePiece> pieces;    // second party

  int dimension() const { return static_cast<int>(weights.size()); }

  BipartiteBox reconstruct() const {
    BipartiteBox out;
    for (std::size_t l = 0; l < weights.size(); ++l)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
              out.at(y, z, b, c) +=
                  weights[l] * responders[l](y, b) * pieces[l].table(z, c);
    return out;
  }
};

struct VerifyReport {
  double reconstruction_residual = 0;
  double born_residual = 0;  // max deviation of quantum pieces from their tables
  std::vector<std::string> failures;
  bool ok(double tol = kEpsProb) const {
    return reconstruction_residual <= tol && born_residual <= tol && failures.empty();
  }
};

inline VerifyReport verify_model(const LhvLhsModel& model, const TripartiteBox& target,
                                 double tol = kEpsProb) {
  VerifyReport rep;
  double wsum = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > tol)
    rep.failures.push_back("weights sum to " + std::to_string(wsum));
  for (double w : model.weights)
    if (w < -tol) rep.failures.push_back("negative weight " + std::to_string(w));
  rep.reconstruction_residual = max_abs_diff(model.reconstruct(), target);
  if (rep.reconstruction_residual > tol) {
    // Locate the worst cell for the report.
    TripartiteBox recon = model.reconstruct();
    double worst = -1;
    std::size_t at = 0;
    for (std::size_t e = 0; e < 64; ++e)
      if (std::abs(recon.p[e] - target.p[e]) > worst) {
        worst = std::abs(recon.p[e] - target.p[e]);
        at = e;
      }
    rep.failures.push_back("reconstruction residual " + std::to_string(worst) +
                           " at flat index " + std::to_string(at));
  }
  MeasurementPair sp = sigma_pair();
  for (std::size_t l = 0; l < model.pieces.size(); ++l) {
    if (!model.pieces[l].state) continue;
    const auto& meas = model.pieces[l].measurements;
    BipartiteBox born = meas ? born_bipartite(*model.pieces[l].state, (*meas)[0], (*meas)[1])
                             : born_bipartite(*model.pieces[l].state, sp, sp);
    double d = max_abs_diff(born, model.pieces[l].box);
    rep.born_residual = std::max(rep.born_residual, d);
    if (d > tol)
      rep.failures.push_back("piece " + std::to_string(l) +
                             " Born table deviates by " + std::to_string(d));
  }
  return rep;
}

inline VerifyReport verify_model(const BipartiteLhvLhsModel& model,
                                 const BipartiteBox& target, double tol = kEpsProb) {
  VerifyReport rep;
  double wsum = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > tol)
    rep.failures.push_back("weights sum to " + std::to_string(wsum));
  rep.reconstruction_residual = max_abs_diff(model.reconstruct(), target);
  if (rep.reconstruction_residual > tol)
    rep.failures.push_back("reconstruction residual " +
                           std::to_string(rep.reconstruction_residual));
  MeasurementPair sp = sigma_pair();
  for (std::size_t l = 0; l < model.pieces.size(); ++l) {
    if (!model.pieces[l].state) continue;
    SingleBox born = born_single(*model.pieces[l].state,
                                 model.pieces[l].measurements.value_or(sp));
    double d = max_abs_diff(born, model.pieces[l].table);
    rep.born_residual = std::max(rep.born_residual, d);
    if (d > tol)
      rep.failures.push_back("piece " + std::to_string(l) +
                             " Born table deviates by " + std::to_string(d));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Constructive dimension-4 models for the noisy families

inline const std::vector<SingleBox>& canonical_responders() {
  static const std::vector<SingleBox> r = {
      deterministic_single(0, 0), deterministic_single(0, 1),
      deterministic_single(1, 0), deterministic_single(1, 1)};
  return r;
}

inline LhvLhsModel build_d4_model(const FamilyParam& family, Cut cut = Cut::AvsBC) {
  family.check();
  const double V = family.visibility;
  if (V > kInvSqrt2 + 1e-12)
    throw std::domain_error(
        "build_d4_model: no hidden-state construction for V > 1/sqrt(2) "
        "(sin 2theta = sqrt(2) V would exceed 1), got V = " +
        std::to_string(V));
  LhvLhsModel model;
  model.cut = cut;
  model.weights.assign(4, 0.25);
  model.responders = canonical_responders();
  MeasurementPair sp = sigma_pair();
  for (int l = 0; l < 4; ++l) {
    TrustedPairPiece piece;
    piece.state = family.kind == FamilyKind::mermin ? lhs_pair(l, V)
                                                    : svetlichny_lhs_pair(l, V);
    piece.box = born_bipartite(*piece.state, sp, sp);
    piece.realizability = TlmVerdict::realizable;
    model.pieces.push_back(std::move(piece));
  }
  model.note = family.kind == FamilyKind::mermin
                   ? "two-qubit hidden states with sin 2theta = sqrt(2) V"
                   : "two-qubit hidden states (phase set for the Svetlichny family)";
  return model;
}

// One level down: dimension-4 model of a conditional pair box with
// responders on the first party and qubit hidden states on the second.
// Valid for the conditional boxes of the noisy Mermin family (lambda = 0
// tables) at V <= 1/2.
inline BipartiteLhvLhsModel build_bipartite_d4_model(double V) {
  BipartiteLhvLhsModel model;
  model.weights.assign(4, 0.25);
  model.responders = canonical_responders();
  MeasurementPair sp = sigma_pair();
  for (int l = 0; l < 4; ++l) {
    SingleSidePiece piece;
    piece.state = lhs_qubit(l, V);
    piece.table = born_single(*piece.state, sp);
    piece.realizability = TlmVerdict::realizable;
    model.pieces.push_back(std::move(piece));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Constrained conditional solves
//
// With deterministic responder strategies and fixed weights, the
// reconstruction equations decouple over trusted-side cells; equality
// constraints between pieces merge unknowns. The solver reports rank: a
// unique solution, a minimum-norm representative of an underdetermined
// family, or an inconsistency residual.

enum class SolveStatus { unique, underdetermined, inconsistent };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::unique: return "unique";
    case SolveStatus::underdetermined: return "underdetermined";
    case SolveStatus::inconsistent: return "inconsistent";
  }
  return "?";
}

struct ConditionalSolution {
  SolveStatus status = SolveStatus::inconsistent;
  double max_residual = 0;
  int rank = 0;
  int unknowns = 0;
  std::vector<std::vector<int>> groups;       // partition of strategy indices
  std::vector<double> group_weights;
  std::vector<SingleBox> group_responders;    // weight-averaged over the group
  std::vector<BipartiteBox> pieces;           // one per group
  std::vector<std::string> negative_entries;  // flagged per (group, cell)
};

namespace detail {

inline std::vector<std::vector<int>> union_groups(
    std::size_t n, const std::vector<std::pair<int, int>>& equal_constraints) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  for (auto [i, j] : equal_constraints) {
    if (i < 0 || j < 0 || i >= static_cast<int>(n) || j >= static_cast<int>(n))
      throw std::invalid_argument("equal constraint index out of range");
    parent[static_cast<std::size_t>(find(i))] = find(j);
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> root_to_group(n, -1);
  for (int l = 0; l < static_cast<int>(n); ++l) {
    int r = find(l);
    if (root_to_group[static_cast<std::size_t>(r)] < 0) {
      root_to_group[static_cast<std::size_t>(r)] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(root_to_group[static_cast<std::size_t>(r)])].push_back(l);
  }
  return groups;
}

inline std::string group_label(const std::vector<std::vector<int>>& groups) {
  std::ostringstream os;
  bool outer_first = true;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    if (!outer_first) os << " & ";
    outer_first = false;
    for (std::size_t i = 0; i < g.size(); ++i) os << (i ? "=" : "") << "Q" << g[i];
  }
  return outer_first ? "canonical" : os.str();
}

}  // namespace detail

inline ConditionalSolution solve_conditionals(
    const TripartiteBox& box_in_cut_frame, const std::vector<SingleBox>& strategies,
    const std::vector<double>& weights,
    const std::vector<std::pair<int, int>>& equal_constraints, double tol = kEpsLp) {
  if (strategies.empty() || strategies.size() != weights.size())
    throw std::invalid_argument("solve_conditionals: strategies/weights mismatch");
  for (std::size_t i = 0; i < strategies.size(); ++i)
    for (std::size_t j = i + 1; j < strategies.size(); ++j)
      if (max_abs_diff(strategies[i], strategies[j]) < 1e-12)
        throw std::invalid_argument("solve_conditionals: strategies must be distinct");

  ConditionalSolution sol;
  sol.groups = detail::union_groups(strategies.size(), equal_constraints);
  const int ng = static_cast<int>(sol.groups.size());
  sol.unknowns = ng;

  // Responder mixture must reproduce the untrusted marginal.
  SingleBox marg = marginal_single(box_in_cut_frame, Party::A);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      double m = 0;
      for (std::size_t l = 0; l < strategies.size(); ++l)
        m += weights[l] * strategies[l](x, a);
      if (std::abs(m - marg(x, a)) > tol) {
        sol.status = SolveStatus::inconsistent;
        sol.max_residual = std::abs(m - marg(x, a));
        sol.negative_entries.push_back(
            "responder mixture does not reproduce the untrusted marginal at (x=" +
            std::to_string(x) + ",a=" + std::to_string(a) + ")");
        return sol;
      }
    }

  for (const auto& g : sol.groups) {
    double w = 0;
    SingleBox resp;
    resp.p.fill(0.0);
    for (int l : g) {
      w += weights[static_cast<std::size_t>(l)];
      for (std::size_t e = 0; e < 4; ++e)
        resp.p[e] += weights[static_cast<std::size_t>(l)] * strategies[static_cast<std::size_t>(l)].p[e];
    }
    for (std::size_t e = 0; e < 4; ++e) resp.p[e] /= w;
    sol.group_weights.push_back(w);
    sol.group_responders.push_back(resp);
  }

  // Shared 4 x ng coefficient matrix over (a, x) rows.
  Eigen::MatrixXd M(4, ng);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      int row = x * 2 + a;
      for (int g = 0; g < ng; ++g) {
        double coeff = 0;
        for (int l : sol.groups[static_cast<std::size_t>(g)])
          coeff += weights[static_cast<std::size_t>(l)] * strategies[static_cast<std::size_t>(l)](x, a);
        M(row, g) = coeff;
      }
    }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  cod.setThreshold(1e-10);
  sol.rank = static_cast<int>(cod.rank());

  sol.pieces.assign(static_cast<std::size_t>(ng), BipartiteBox{});
  double residual = 0;
  for (int yy = 0; yy < 2; ++yy)
    for (int zz = 0; zz < 2; ++zz)
      for (int bb = 0; bb < 2; ++bb)
        for (int cc = 0; cc < 2; ++cc) {
          Eigen::VectorXd rhs(4);
          for (int x = 0; x < 2; ++x)
            for (int a = 0; a < 2; ++a)
              rhs(x * 2 + a) = box_in_cut_frame(x, yy, zz, a, bb, cc);
          Eigen::VectorXd q = cod.solve(rhs);
          residual = std::max(residual, (M * q - rhs).cwiseAbs().maxCoeff());
          for (int g = 0; g < ng; ++g)
            sol.pieces[static_cast<std::size_t>(g)].at(yy, zz, bb, cc) = q(g);
        }
  sol.max_residual = residual;
  if (residual > tol) {
    sol.status = SolveStatus::inconsistent;
    return sol;
  }
  sol.status = sol.rank < ng ? SolveStatus::underdetermined : SolveStatus::unique;
  for (int g = 0; g < ng; ++g)
    for (int yy = 0; yy < 2; ++yy)
      for (int zz = 0; zz < 2; ++zz)
        for (int bb = 0; bb < 2; ++bb)
          for (int cc = 0; cc < 2; ++cc) {
            double v = sol.pieces[static_cast<std::size_t>(g)](yy, zz, bb, cc);
            if (v < -kEpsProb || v > 1 + kEpsProb) {
              std::ostringstream os;
              os << "group " << g << " entry (y,z,b,c)=(" << yy << zz << bb << cc
                 << ") = " << v;
              sol.negative_entries.push_back(os.str());
            }
          }
  return sol;
}

// Spec-facing overload: the box is given in the original frame together with
// the cut naming its untrusted party.
inline ConditionalSolution solve_conditionals(
    const TripartiteBox& box, Cut cut, const std::vector<SingleBox>& strategies,
    const std::vector<double>& weights,
    const std::vector<std::pair<int, int>>& equal_constraints, double tol = kEpsLp) {
  return solve_conditionals(permute_parties(box, cut_to_front(cut)), strategies,
                            weights, equal_constraints, tol);
}

// Bipartite analogue: responders on the first party of the pair, single-party
// pieces on the second.
struct BipartiteConditionalSolution {
  SolveStatus status = SolveStatus::inconsistent;
  double max_residual = 0;
  int rank = 0;
  int unknowns = 0;
  std::vector<std::vector<int>> groups;
  std::vector<double> group_weights;
  std::vector<SingleBox> group_responders;
  std::vector<SingleBox> pieces;
  std::vector<std::string> negative_entries;
};

inline BipartiteConditionalSolution solve_conditionals_bipartite(
    const BipartiteBox& box, const std::vector<SingleBox>& strategies,
    const std::vector<double>& weights,
    const std::vector<std::pair<int, int>>& equal_constraints, double tol = kEpsLp) {
  if (strategies.empty() || strategies.size() != weights.size())
    throw std::invalid_argument("solve_conditionals_bipartite: size mismatch");

  BipartiteConditionalSolution sol;
  sol.groups = detail::union_groups(strategies.size(), equal_constraints);
  const int ng = static_cast<int>(sol.groups.size());
  sol.unknowns = ng;

  SingleBox marg = marginal_of_pair(box, 0);
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) {
      double m = 0;
      for (std::size_t l = 0; l < strategies.size(); ++l)
        m += weights[l] * strategies[l](y, b);
      if (std::abs(m - marg(y, b)) > tol) {
        sol.status = SolveStatus::inconsistent;
        sol.max_residual = std::abs(m - marg(y, b));
        sol.negative_entries.push_back("responder mixture misses the first-party marginal");
        return sol;
      }
    }

  for (const auto& g : sol.groups) {
    double w = 0;
    SingleBox resp;
    resp.p.fill(0.0);
    for (int l : g) {
      w += weights[static_cast<std::size_t>(l)];
      for (std::size_t e = 0; e < 4; ++e)
        resp.p[e] += weights[static_cast<std::size_t>(l)] * strategies[static_cast<std::size_t>(l)].p[e];
    }
    for (std::size_t e = 0; e < 4; ++e) resp.p[e] /= w;
    sol.group_weights.push_back(w);
    sol.group_responders.push_back(resp);
  }

  Eigen::MatrixXd M(4, ng);
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) {
      int row = y * 2 + b;
      for (int g = 0; g < ng; ++g) {
        double coeff = 0;
        for (int l : sol.groups[static_cast<std::size_t>(g)])
          coeff += weights[static_cast<std::size_t>(l)] * strategies[static_cast<std::size_t>(l)](y, b);
        M(row, g) = coeff;
      }
    }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  cod.setThreshold(1e-10);
  sol.rank = static_cast<int>(cod.rank());

  sol.pieces.assign(static_cast<std::size_t>(ng), SingleBox{});
  double residual = 0;
  for (int zz = 0; zz < 2; ++zz)
    for (int cc = 0; cc < 2; ++cc) {
      Eigen::VectorXd rhs(4);
      for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b) rhs(y * 2 + b) = box(y, zz, b, cc);
      Eigen::VectorXd q = cod.solve(rhs);
      residual = std::max(residual, (M * q - rhs).cwiseAbs().maxCoeff());
      for (int g = 0; g < ng; ++g) sol.pieces[static_cast<std::size_t>(g)].at(zz, cc) = q(g);
    }
  sol.max_residual = residual;
  if (residual > tol) {
    sol.status = SolveStatus::inconsistent;
    return sol;
  }
  sol.status = sol.rank < ng ? SolveStatus::underdetermined : SolveStatus::unique;
  for (int g = 0; g < ng; ++g)
    for (std::size_t e = 0; e < 4; ++e) {
      double v = sol.pieces[static_cast<std::size_t>(g)].p[e];
      if (v < -kEpsProb || v > 1 + kEpsProb) {
        std::ostringstream os;
        os << "group " << g << " entry " << e << " = " << v;
        sol.negative_entries.push_back(os.str());
      }
    }
  return sol;
}

}  // namespace tricorr
