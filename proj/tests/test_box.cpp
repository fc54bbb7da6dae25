#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "tricorr/box.hpp"

using namespace tricorr;

namespace {

// Random valid NS box: mixture of deterministic vertices blended toward the
// uniform box.
TripartiteBox random_local_box(std::mt19937& rng, int terms = 5) {
  std::uniform_int_distribution<int> pick(0, 63);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& cat = deterministic_catalogue();
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
  double mix = 0.5 * unit(rng);
  for (std::size_t e = 0; e < 64; ++e) box.p[e] = (1 - mix) * box.p[e] + mix * 0.125;
  return box;
}

}  // namespace

TEST_CASE("deterministic boxes") {
  TripartiteBox all_zero = deterministic_box({0, 0, 0, 0, 0, 0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) CHECK(all_zero(x, y, z, 0, 0, 0) == 1.0);

  TripartiteBox a_eq_x = deterministic_box({1, 0, 0, 0, 0, 0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) CHECK(a_eq_x(x, y, z, x, 0, 0) == 1.0);

  const auto& cat = deterministic_catalogue();
  REQUIRE(cat.size() == 64);
  for (std::size_t i = 0; i < cat.size(); ++i)
    for (std::size_t j = i + 1; j < cat.size(); ++j)
      CHECK(max_abs_diff(cat[i], cat[j]) > 0.5);

  for (const auto& v : cat) {
    CHECK(validate_tripartite(v, 1e-12).ok());
    for (double e : v.p) CHECK((e == 0.0 || e == 1.0));
  }
}

TEST_CASE("tripartite validation") {
  CHECK(validate_tripartite(noisy_mermin(0.5)).ok());
  CHECK(validate_tripartite(TripartiteBox::uniform()).ok());

  // Make P(b|y) depend on z within the x=0 slice: move mass between b-values
  // at (y,z)=(0,1) only.
  TripartiteBox bad = TripartiteBox::uniform();
  bad.at(0, 0, 1, 0, 0, 0) += 0.1;
  bad.at(0, 0, 1, 0, 1, 0) -= 0.1;
  ValidationReport rep = validate_tripartite(bad);
  CHECK(rep.nonneg);
  CHECK(rep.normalized);
  CHECK_FALSE(rep.no_signalling);
  REQUIRE_FALSE(rep.offending.empty());
  bool names_ab_or_c = false;
  for (const auto& s : rep.offending)
    if (s.find("depends on") != std::string::npos) names_ab_or_c = true;
  CHECK(names_ab_or_c);

  CHECK_THROWS_AS(TripartiteBox(std::vector<double>(63, 0.0)), std::invalid_argument);
}

TEST_CASE("marginals") {
  // Any-V noisy Mermin: every single-party marginal is maximally mixed.
  for (double V : {0.2, 0.7, 1.0}) {
    TripartiteBox box = noisy_mermin(V);
    for (Party p : {Party::A, Party::B, Party::C})
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          SingleBox m = marginal_single(box, p, s1, s2);
          for (double e : m.p) CHECK(e == doctest::Approx(0.5).epsilon(1e-12));
        }
  }

  // Deterministic all-zero box: BC marginal is a point mass at (0,0).
  BipartiteBox bc = marginal_pair(deterministic_box({0, 0, 0, 0, 0, 0}), PartyPair::BC);
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      CHECK(bc(y, z, 0, 0) == 1.0);
      CHECK(bc(y, z, 0, 1) == 0.0);
    }

  // Mermin box at V=1: the BC marginal is uniform (triple terms average out).
  BipartiteBox m = marginal_pair(noisy_mermin(1.0), PartyPair::BC, 0);
  for (double e : m.p) CHECK(e == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(marginal(noisy_mermin(0.5), {}, {0, 0}), std::invalid_argument);
}

TEST_CASE("correlators and round trip") {
  CorrelatorSet u = correlators(TripartiteBox::uniform());
  CHECK(u.max_abs() == doctest::Approx(0.0));

  for (double V : {0.3, 0.8}) {
    CorrelatorSet cs = correlators(noisy_mermin(V));
    for (double s : cs.singles) CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
    for (double p : cs.pairs) CHECK(p == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cs.abc(0, 0, 1) == doctest::Approx(V));
    CHECK(cs.abc(0, 1, 0) == doctest::Approx(V));
    CHECK(cs.abc(1, 0, 0) == doctest::Approx(V));
    CHECK(cs.abc(1, 1, 1) == doctest::Approx(-V));
    CHECK(cs.abc(0, 0, 0) == doctest::Approx(0.0));
    CHECK(cs.abc(1, 1, 0) == doctest::Approx(0.0));
  }

  // Svetlichny vertex (0,0,0,0): all eight triples equal (-1)^{xy+yz+xz}.
  CorrelatorSet sv = correlators(svetlichny_vertex(0, 0, 0, 0));
  for (int t = 0; t < 8; ++t) {
    int x = (t >> 2) & 1, y = (t >> 1) & 1, z = t & 1;
    int sign = sign_bit((x & y) ^ (y & z) ^ (x & z));
    CHECK(sv.abc(x, y, z) == doctest::Approx(sign));
  }

  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    TripartiteBox box = random_local_box(rng);
    TripartiteBox back = box_from_correlators(correlators(box));
    CHECK(max_abs_diff(box, back) < 1e-12);
    // Reverse direction: the correlators of the reconstruction agree too.
    CorrelatorSet cs = correlators(box);
    CorrelatorSet cs2 = correlators(back);
    double dev = 0;
    for (std::size_t i = 0; i < 6; ++i)
      dev = std::max(dev, std::abs(cs.singles[i] - cs2.singles[i]));
    for (std::size_t i = 0; i < 12; ++i)
      dev = std::max(dev, std::abs(cs.pairs[i] - cs2.pairs[i]));
    for (std::size_t i = 0; i < 8; ++i)
      dev = std::max(dev, std::abs(cs.triples[i] - cs2.triples[i]));
    CHECK(dev < 1e-12);
  }

  CorrelatorSet out_of_range;
  out_of_range.abc(0, 0, 0) = 1.4;
  CHECK_THROWS_AS(box_from_correlators(out_of_range), std::domain_error);

  CorrelatorSet bad;
  bad.abc(0, 0, 0) = 1.0;
  bad.abc(0, 1, 1) = 1.0;
  bad.abc(1, 0, 1) = 1.0;
  bad.abc(1, 1, 0) = 1.0;  // Mermin expression value 4 on parity-0: not a box
  bad.a(0) = 0.9;          // push an entry negative
  bad.ab(0, 0) = -0.9;
  CHECK_THROWS_AS(box_from_correlators(bad), std::domain_error);
}

TEST_CASE("PR boxes and two-way vertices") {
  BipartiteBox pr = pr_box(0, 0, 0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(pr(x, y, a, b) == ((a ^ b) == (x & y) ? 0.5 : 0.0));

  // Factorization: marginal on the pair reproduces the PR box, third party
  // deterministic.
  TripartiteBox v = two_way_vertex(PartyPair::AB, 0, 0, 0, 0);
  CHECK(max_abs_diff(marginal_pair(v, PartyPair::AB), pr) < 1e-15);
  SingleBox c = marginal_single(v, Party::C);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(1, 0) == 1.0);

  const auto& cat = two_way_catalogue();
  REQUIRE(cat.size() == 96);
  for (std::size_t i = 0; i < cat.size(); ++i)
    for (std::size_t j = i + 1; j < cat.size(); ++j)
      CHECK(max_abs_diff(cat[i], cat[j]) > 0.2);
  for (const auto& b : cat) {
    CHECK(validate_tripartite(b, 1e-12).ok());
    for (double e : b.p) CHECK((e == 0.0 || e == 0.5));
  }

  // The paper's shared-bit family is a subset of the product catalogue.
  for (PartyPair pair : {PartyPair::AB, PartyPair::AC, PartyPair::BC})
    for (int bits = 0; bits < 16; ++bits) {
      TripartiteBox w = two_way_vertex(pair, (bits >> 3) & 1, (bits >> 2) & 1,
                                       (bits >> 1) & 1, bits & 1);
      double best = 1;
      for (const auto& b : cat) best = std::min(best, max_abs_diff(w, b));
      CHECK(best < 1e-15);
    }
}

TEST_CASE("svetlichny vertices") {
  const auto& cat = svetlichny_catalogue();
  REQUIRE(cat.size() == 16);
  for (std::size_t i = 0; i < cat.size(); ++i)
    for (std::size_t j = i + 1; j < cat.size(); ++j)
      CHECK(max_abs_diff(cat[i], cat[j]) > 0.2);
  for (const auto& b : cat) {
    CHECK(validate_tripartite(b, 1e-12).ok());
    for (double e : b.p) CHECK((e == 0.0 || e == 0.25));
  }
}

TEST_CASE("noisy families") {
  // Direct entry reads.
  CHECK(noisy_mermin(1.0)(0, 0, 1, 0, 0, 0) == doctest::Approx(0.25));
  CHECK(noisy_mermin(0.4)(0, 0, 0, 0, 0, 0) == doctest::Approx(0.125));
  CHECK(noisy_mermin(0.4)(0, 0, 0, 1, 1, 0) == doctest::Approx(0.125));
  CHECK(noisy_svetlichny(1.0)(0, 0, 0, 0, 0, 0) ==
        doctest::Approx((2.0 + std::sqrt(2.0)) / 16.0));

  CHECK_THROWS_AS(noisy_mermin(1.2), std::domain_error);
  CHECK_THROWS_AS(noisy_mermin(0.0), std::domain_error);
  CHECK_THROWS_AS(noisy_svetlichny(-0.1), std::domain_error);

  // No-signalling holds exactly for the families.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double V = unit(rng);
    TripartiteBox box = noisy_mermin(V);
    CHECK(validate_tripartite(box, 1e-12).ok());
    CorrelatorSet cs = correlators(box);
    for (double s : cs.singles) CHECK(std::abs(s) < 1e-12);
    for (double p : cs.pairs) CHECK(std::abs(p) < 1e-12);
    int nonzero = 0;
    for (double t : cs.triples)
      if (std::abs(t) > 1e-12) {
        ++nonzero;
        CHECK(std::abs(t) == doctest::Approx(V).epsilon(1e-12));
      }
    CHECK(nonzero == 4);
    CHECK(validate_tripartite(noisy_svetlichny(V), 1e-12).ok());
  }
}

TEST_CASE("party permutations") {
  CHECK(is_symmetric(noisy_mermin(0.6)));
  CHECK(is_symmetric(noisy_svetlichny(0.3)));
  CHECK(is_symmetric(TripartiteBox::uniform()));

  // A<->C swap maps an AB-pair vertex to a BC-pair vertex with matching bits.
  TripartiteBox ab = two_way_vertex(PartyPair::AB, 1, 0, 1, 1);
  TripartiteBox swapped = permute_parties(ab, {2, 1, 0});
  TripartiteBox bc = two_way_vertex(PartyPair::BC, 0, 1, 1, 1);
  CHECK(max_abs_diff(swapped, bc) < 1e-15);
  CHECK_FALSE(is_symmetric(ab));

  // Group action: permuting by a composition equals composing permutations.
  std::mt19937 rng(3);
  TripartiteBox box = random_local_box(rng);
  for (const auto& p : all_party_permutations())
    for (const auto& q : all_party_permutations()) {
      TripartiteBox lhs = permute_parties(permute_parties(box, p), q);
      TripartiteBox rhs = permute_parties(box, compose(p, q));
      CHECK(max_abs_diff(lhs, rhs) < 1e-15);
    }
}

TEST_CASE("product structure") {
  for (Cut cut : {Cut::AvsBC, Cut::BvsAC, Cut::CvsAB}) {
    CHECK(is_product(deterministic_box({1, 0, 1, 1, 0, 1}), cut));
    CHECK(is_product(TripartiteBox::uniform(), cut));
    CHECK_FALSE(is_product(noisy_mermin(0.3), cut));
  }
}
