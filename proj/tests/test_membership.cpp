#include "doctest.h"

#include <cmath>
#include <random>

#include "tricorr/membership.hpp"
#include "tricorr/quantum.hpp"

using namespace tricorr;

namespace {

// Independent feasibility predicate for the strength decomposition, evaluated
// directly on box - p * vertex; the oracle locates the maximal feasible p by
// scan plus predicate bisection.
bool strength_feasible_at(const TripartiteBox& box, const TripartiteBox& vertex,
                          FamilyKind kind, double p) {
  TripartiteBox q;
  for (std::size_t e = 0; e < 64; ++e) {
    q.p[e] = box.p[e] - p * vertex.p[e];
    if (q.p[e] < -1e-9) return false;
  }
  double bound = kind == FamilyKind::svetlichny ? 4.0 : 2.0;
  const auto& facets = kind == FamilyKind::svetlichny ? detail::svetlichny_coeffs()
                                                      : detail::mermin_coeffs();
  CorrelatorSet cs = correlators(q);
  for (const auto& f : facets) {
    double val = 0;
    for (int t = 0; t < 8; ++t)
      val += f[t] * cs.abc((t >> 2) & 1, (t >> 1) & 1, t & 1);
    if (val > bound * (1 - p) + 1e-9) return false;
  }
  return true;
}

double strength_oracle(const TripartiteBox& box, FamilyKind kind) {
  // Feasible p form an interval that need not contain 0 (a violating box
  // forces a minimal vertex fraction): scan for a foothold, then bisect the
  // upper edge of the interval.
  const auto& dominants =
      kind == FamilyKind::svetlichny ? svetlichny_catalogue() : mermin_box_catalogue();
  double best = -1;
  for (const auto& v : dominants) {
    double foothold = -1;
    for (int k = 1000; k >= 0; --k) {
      double p = k / 1000.0;
      if (strength_feasible_at(box, v, kind, p)) {
        foothold = p;
        break;
      }
    }
    if (foothold < 0) continue;
    double lo = foothold, hi = std::min(1.0, foothold + 1e-3);
    if (strength_feasible_at(box, v, kind, 1.0)) {
      best = std::max(best, 1.0);
      continue;
    }
    for (int it = 0; it < 50; ++it) {
      double mid = (lo + hi) / 2;
      (strength_feasible_at(box, v, kind, mid) ? lo : hi) = mid;
    }
    best = std::max(best, lo);
  }
  return best;
}

}  // namespace

TEST_CASE("fully local membership") {
  MembershipResult loc = lp_membership(noisy_mermin(0.5), Polytope::fully_local);
  CHECK(loc.feasible);
  double wsum = 0;
  for (double w : loc.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(loc.max_residual < 1e-7);

  MembershipResult beyond = lp_membership(noisy_mermin(0.6), Polytope::fully_local);
  CHECK_FALSE(beyond.feasible);
  CHECK(lp_membership(noisy_mermin(0.6), Polytope::two_way_local).feasible);
}

TEST_CASE("two-way membership across the visibility grid") {
  for (int k = 1; k <= 20; ++k) {
    double V = 0.05 * k;
    CHECK(lp_membership(noisy_mermin(V), Polytope::two_way_local).feasible);
  }
  CHECK_FALSE(lp_membership(svetlichny_vertex(0, 0, 0, 0), Polytope::two_way_local).feasible);
}

TEST_CASE("membership against a brute-force mixture oracle") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<int> pick(0, 63);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const auto& cat = deterministic_catalogue();
  for (int trial = 0; trial < 20; ++trial) {
    int terms = 1 + trial % 5;
    std::vector<double> w(static_cast<std::size_t>(terms));
    double sum = 0;
    for (auto& v : w) {
      v = unit(rng);
      sum += v;
    }
    TripartiteBox box;
    for (double v : w) {
      const TripartiteBox& vert = cat[static_cast<std::size_t>(pick(rng))];
      for (std::size_t e = 0; e < 64; ++e) box.p[e] += (v / sum) * vert.p[e];
    }
    MembershipResult res = lp_membership(box, Polytope::fully_local);
    CHECK(res.feasible);
    CHECK(res.max_residual < 1e-7);
  }
}

TEST_CASE("born boxes of separable states are fully local") {
  // Mixtures of product pure states with random projective settings: the LP
  // must always find a deterministic-vertex decomposition.
  std::mt19937 rng(83);
  std::normal_distribution<double> g;
  auto rand_qubit = [&] {
    Eigen::Vector2cd v(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
    v.normalize();
    return v;
  };
  auto rand_obs = [&] {
    Eigen::Vector3d n(g(rng), g(rng), g(rng));
    n.normalize();
    return (n(0) * sigma_x() + n(1) * sigma_y() + n(2) * sigma_z()).eval();
  };
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix rho = CMatrix::Zero(8, 8);
    double weights[3] = {0.5, 0.3, 0.2};
    for (double w : weights) {
      CVector a(2), b(2), c(2);
      a = rand_qubit();
      b = rand_qubit();
      c = rand_qubit();
      CVector abc = tensor_vec(tensor_vec(a, b), c);
      rho += w * (abc * abc.adjoint());
    }
    MeasurementPair ma = {DichotomicMeasurement::from_observable(rand_obs()),
                          DichotomicMeasurement::from_observable(rand_obs())};
    MeasurementPair mb = {DichotomicMeasurement::from_observable(rand_obs()),
                          DichotomicMeasurement::from_observable(rand_obs())};
    MeasurementPair mc = {DichotomicMeasurement::from_observable(rand_obs()),
                          DichotomicMeasurement::from_observable(rand_obs())};
    TripartiteBox box = born_tripartite(DensityMatrix(rho, "separable"), ma, mb, mc);
    MembershipResult res = lp_membership(box, Polytope::fully_local);
    CHECK(res.feasible);
    CHECK(res.max_residual < 1e-7);
  }
}

TEST_CASE("svetlichny strength") {
  StrengthResult vertex = strength(svetlichny_vertex(0, 0, 0, 0), FamilyKind::svetlichny);
  CHECK(vertex.decomposable);
  CHECK(vertex.p == doctest::Approx(1.0));
  CHECK(vertex.degenerate);

  for (double V : {0.2, 0.6, 1.0}) {
    StrengthResult r = strength(noisy_svetlichny(V), FamilyKind::svetlichny);
    CHECK(r.decomposable);
    CHECK(r.p > 1e-6);
    double oracle = strength_oracle(noisy_svetlichny(V), FamilyKind::svetlichny);
    CHECK(std::abs(r.p - oracle) < 1e-6);
    if (!r.degenerate) {
      // Reconstruction identity and residual constraints.
      CHECK(r.max_residual < 1e-7);
      CHECK(svetlichny_value(r.residual).value <= 4.0 + 1e-6);
    }
  }
}

TEST_CASE("mermin strength") {
  for (double V : {0.1, 0.5, 0.9}) {
    StrengthResult r = strength(noisy_mermin(V), FamilyKind::mermin);
    CHECK(r.decomposable);
    CHECK(r.p > 1e-6);
    double oracle = strength_oracle(noisy_mermin(V), FamilyKind::mermin);
    CHECK(std::abs(r.p - oracle) < 1e-6);
    CHECK(r.max_residual < 1e-7);
    CHECK(mermin_value(r.residual).value <= 2.0 + 1e-6);
    // Closed form for this family: the binding constraints give (1+2V)/3.
    CHECK(r.p == doctest::Approx((1 + 2 * V) / 3).epsilon(1e-9));
  }
  // The uniform box still carries a dominant-vertex fraction of 1/3.
  CHECK(strength(TripartiteBox::uniform(), FamilyKind::mermin).p ==
        doctest::Approx(1.0 / 3.0));
}
