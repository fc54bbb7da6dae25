#pragma once

// Polytope membership by linear feasibility over the vertex catalogues, and
// the Svetlichny/Mermin strength decompositions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tricorr/box.hpp"
#include "tricorr/inequalities.hpp"
#include "tricorr/simplex.hpp"

namespace tricorr {

enum class Polytope { fully_local, two_way_local };

inline const char* to_string(Polytope p) {
  return p == Polytope::fully_local ? "fully_local" : "two_way_local";
}

struct MembershipResult {
  bool feasible = false;
  lp::SolveStatus solver_status = lp::SolveStatus::infeasible;
  std::vector<double> weights;        // per catalogue vertex, when feasible
  std::vector<std::string> vertex_labels;
  double max_residual = 0;            // reconstruction residual of the mixture
};

inline const std::vector<TripartiteBox>& membership_catalogue(Polytope polytope) {
  static const std::vector<TripartiteBox> two_way = [] {
    std::vector<TripartiteBox> v = deterministic_catalogue();
    const auto& tw = two_way_catalogue();
    v.insert(v.end(), tw.begin(), tw.end());
    return v;
  }();
  return polytope == Polytope::fully_local ? deterministic_catalogue() : two_way;
}

inline MembershipResult lp_membership(const TripartiteBox& box, Polytope polytope,
                                      double tol = kEpsLp) {
  const auto& verts = membership_catalogue(polytope);
  const std::size_t n = verts.size();

  // Equality system: 64 entry-matching rows plus the convexity row.
  std::vector<std::vector<double>> A(65, std::vector<double>(n, 0.0));
  std::vector<double> b(65, 0.0);
  for (std::size_t e = 0; e < 64; ++e) {
    for (std::size_t j = 0; j < n; ++j) A[e][j] = verts[j].p[e];
    b[e] = box.p[e];
  }
  for (std::size_t j = 0; j < n; ++j) A[64][j] = 1.0;
  b[64] = 1.0;

  auto lp_res = lp::solve_equality_feasibility(A, b);

  MembershipResult res;
  res.solver_status = lp_res.status;
  if (lp_res.status != lp::SolveStatus::feasible) return res;

  // Verify the certificate independently of the solver path.
  TripartiteBox recon;
  double wsum = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double w = lp_res.solution[j];
    if (w <= 0) continue;
    wsum += w;
    for (std::size_t e = 0; e < 64; ++e) recon.p[e] += w * verts[j].p[e];
  }
  double resid = std::abs(wsum - 1.0);
  for (std::size_t e = 0; e < 64; ++e)
    resid = std::max(resid, std::abs(recon.p[e] - box.p[e]));
  res.max_residual = resid;
  res.feasible = resid <= tol;
  if (res.feasible) {
    res.weights = lp_res.solution;
    res.vertex_labels.reserve(n);
    for (const auto& v : verts) res.vertex_labels.push_back(v.label);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Strength: maximal dominant-vertex fraction p such that box = p * vertex +
// (1-p) * residual with the residual inside the corresponding local region.
// With Q = box - p * vertex pinned by the reconstruction identity, every
// constraint is affine in p, so the optimum is an interval intersection.

struct StrengthResult {
  FamilyKind kind = FamilyKind::svetlichny;
  bool decomposable = true;     // false: no dominant-vertex decomposition exists
  double p = 0;
  int dominant_variant = -1;
  std::string dominant_label;
  TripartiteBox residual;       // normalized residual box (uniform when p = 1)
  double max_residual = 0;      // reconstruction identity residual
  bool degenerate = false;      // p == 1: residual unconstrained
};

namespace detail {

struct PInterval {
  double lo = 0.0, hi = 1.0;
  bool empty() const { return lo > hi; }
};

// Intersect with {p : c * p <= d}.
inline void intersect_halfline(PInterval& iv, double c, double d, double tol) {
  if (std::abs(c) <= tol) {
    if (d < -tol) iv.lo = 1.0, iv.hi = 0.0;
    return;
  }
  if (c > 0)
    iv.hi = std::min(iv.hi, d / c);
  else
    iv.lo = std::max(iv.lo, d / c);
}

inline double strength_against(const TripartiteBox& box, const TripartiteBox& vertex,
                               const std::vector<TripleCoeffs>& facets, double bound,
                               double tol) {
  PInterval iv;
  // Entrywise nonnegativity of Q = box - p * vertex.
  for (std::size_t e = 0; e < 64; ++e)
    intersect_halfline(iv, vertex.p[e], box.p[e], tol);
  // Facet constraints: I_k(box) - p I_k(vertex) <= bound (1 - p).
  CorrelatorSet cb = correlators(box);
  CorrelatorSet cv = correlators(vertex);
  for (const auto& f : facets) {
    double ib = 0, ivx = 0;
    for (int t = 0; t < 8; ++t) {
      double w = f[t];
      ib += w * cb.abc((t >> 2) & 1, (t >> 1) & 1, t & 1);
      ivx += w * cv.abc((t >> 2) & 1, (t >> 1) & 1, t & 1);
    }
    intersect_halfline(iv, bound - ivx, bound - ib, tol);
  }
  if (iv.empty() || iv.hi < -tol) return -1.0;
  return std::clamp(iv.hi, 0.0, 1.0);
}

}  // namespace detail

inline StrengthResult strength(const TripartiteBox& box, FamilyKind kind,
                               double tol = kEpsLp) {
  const auto& facets = kind == FamilyKind::svetlichny ? detail::svetlichny_coeffs()
                                                      : detail::mermin_coeffs();
  const double bound = kind == FamilyKind::svetlichny ? 4.0 : 2.0;
  const auto& dominants =
      kind == FamilyKind::svetlichny ? svetlichny_catalogue() : mermin_box_catalogue();

  StrengthResult res;
  res.kind = kind;
  double best = -1.0;
  for (std::size_t k = 0; k < dominants.size(); ++k) {
    double p = detail::strength_against(box, dominants[k], facets, bound, tol);
    if (p > best) {
      best = p;
      res.dominant_variant = static_cast<int>(k);
      res.dominant_label = dominants[k].label;
    }
  }
  if (best < 0.0) {
    res.decomposable = false;
    res.p = 0.0;
    res.residual = box;
    return res;
  }
  res.p = best;

  const TripartiteBox& vtx = dominants[static_cast<std::size_t>(res.dominant_variant)];
  if (res.p >= 1.0 - tol) {
    res.degenerate = true;
    res.p = 1.0;
    res.residual = TripartiteBox::uniform();
    res.max_residual = max_abs_diff(box, vtx);
  } else {
    for (std::size_t e = 0; e < 64; ++e)
      res.residual.p[e] = std::max(0.0, (box.p[e] - res.p * vtx.p[e]) / (1.0 - res.p));
    res.residual.label = "residual";
    TripartiteBox recon;
    for (std::size_t e = 0; e < 64; ++e)
      recon.p[e] = res.p * vtx.p[e] + (1.0 - res.p) * res.residual.p[e];
    res.max_residual = max_abs_diff(box, recon);
  }
  return res;
}

}  // namespace tricorr
