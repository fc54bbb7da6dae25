#include "doctest.h"

#include <cmath>

#include "tricorr/inequalities.hpp"

using namespace tricorr;

TEST_CASE("mermin variants") {
  CHECK(mermin_variant_count() == 16);
  // The family's violated form <A0B0C1>+<A0B1C0>+<A1B0C0>-<A1B1C1> must be in
  // the orbit; so must the reference form and its negation.
  bool has_family_form = false, has_reference = false, has_neg_reference = false;
  for (const auto& v : detail::mermin_coeffs()) {
    if (v[0b001] == 1 && v[0b010] == 1 && v[0b100] == 1 && v[0b111] == -1 &&
        v[0b000] == 0 && v[0b011] == 0 && v[0b101] == 0 && v[0b110] == 0)
      has_family_form = true;
    if (v[0b000] == 1 && v[0b011] == -1 && v[0b101] == -1 && v[0b110] == -1 &&
        v[0b001] == 0)
      has_reference = true;
    if (v[0b000] == -1 && v[0b011] == 1 && v[0b101] == 1 && v[0b110] == 1 &&
        v[0b001] == 0)
      has_neg_reference = true;
  }
  CHECK(has_family_form);
  CHECK(has_reference);
  CHECK(has_neg_reference);
}

TEST_CASE("mermin evaluation") {
  InequalityResult r = mermin_value(noisy_mermin(0.75));
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.bound == 2.0);
  CHECK(r.violated);
  // Attaining variant is the family form.
  const auto& coeffs = detail::mermin_coeffs()[static_cast<std::size_t>(r.variant_index)];
  CHECK(coeffs[0b001] == 1);
  CHECK(coeffs[0b010] == 1);
  CHECK(coeffs[0b100] == 1);
  CHECK(coeffs[0b111] == -1);

  CHECK_FALSE(mermin_value(noisy_mermin(0.5)).violated);
  CHECK(mermin_value(noisy_mermin(0.5)).value == doctest::Approx(2.0));

  for (double V : {0.1, 0.4, 0.9})
    CHECK(mermin_value(noisy_mermin(V)).value == doctest::Approx(4 * V).epsilon(1e-12));
}

TEST_CASE("svetlichny evaluation") {
  CHECK(svetlichny_value(svetlichny_vertex(0, 0, 0, 0)).value == doctest::Approx(8.0));
  for (double V : {0.3, 0.7071, 0.9}) {
    InequalityResult r = svetlichny_value(noisy_svetlichny(V));
    CHECK(r.value == doctest::Approx(4 * std::sqrt(2.0) * V).epsilon(1e-12));
    CHECK(r.violated == (4 * std::sqrt(2.0) * V > 4 + kEpsProb));
  }
  CHECK_FALSE(svetlichny_value(noisy_svetlichny(kInvSqrt2)).violated);
  CHECK(svetlichny_value(noisy_svetlichny(0.72)).violated);
}

TEST_CASE("classical bounds on the vertex catalogues") {
  for (const auto& v : deterministic_catalogue()) {
    CHECK(mermin_value(v).value <= 2.0 + 1e-12);
    CHECK(svetlichny_value(v).value <= 4.0 + 1e-12);
  }
  for (const auto& v : two_way_catalogue())
    CHECK(svetlichny_value(v).value <= 4.0 + 1e-12);
}

TEST_CASE("mermin box catalogue") {
  const auto& cat = mermin_box_catalogue();
  REQUIRE(cat.size() == 16);
  for (const auto& b : cat) {
    CHECK(validate_tripartite(b, 1e-12).ok());
    CHECK(mermin_value(b).value == doctest::Approx(4.0));
  }
}

TEST_CASE("chsh") {
  CHECK(chsh_value(pr_box(0, 0, 0)).value == doctest::Approx(4.0));
  CHECK(chsh_value(pr_box(0, 0, 0)).violated);
  CHECK(chsh_value(BipartiteBox::uniform()).value == doctest::Approx(0.0));
  CHECK_FALSE(chsh_value(BipartiteBox::uniform()).violated);
}

TEST_CASE("steering form") {
  // Conditional pair box with correlators (V, V, V, -V): value 4V.
  for (double V : {0.3, 0.5, 0.6, 0.7}) {
    BipartiteBox q0;
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        double s = (y == 1 && z == 1) ? -V : V;
        q0.at(y, z, 0, 0) = q0.at(y, z, 1, 1) = (1 + s) / 4;
        q0.at(y, z, 0, 1) = q0.at(y, z, 1, 0) = (1 - s) / 4;
      }
    InequalityResult r = steering_chsh_value(q0);
    CHECK(r.value == doctest::Approx(4 * V).epsilon(1e-12));
    CHECK(r.violated == (V > 0.5));
    CHECK(!r.expression.empty());
  }
  CHECK(steering_chsh_value(BipartiteBox::uniform()).value == doctest::Approx(0.0));
}
