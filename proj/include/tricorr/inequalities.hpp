#pragma once

// Bell-type inequality evaluation for the 3x2x2 scenario: the 16 Mermin
// facets (generated from the reference form by local reversible operations),
// the 16 Svetlichny facets, the 8 CHSH sign forms and the steering analogue
// of CHSH for a bipartite box with a trusted two-setting party.

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tricorr/box.hpp"

namespace tricorr {

struct InequalityResult {
  double value = 0;
  double bound = 0;
  int variant_index = -1;
  bool violated = false;
  std::string expression;  // the variant attaining the maximum
};

namespace detail {

using TripleCoeffs = std::array<int, 8>;  // coefficient of <A_x B_y C_z>, t = x*4+y*2+z

inline std::string triple_expr(const TripleCoeffs& c) {
  std::ostringstream os;
  bool first = true;
  for (int t = 0; t < 8; ++t) {
    if (c[t] == 0) continue;
    os << (c[t] > 0 ? (first ? "" : " + ") : (first ? "-" : " - "));
    os << "<A" << ((t >> 2) & 1) << "B" << ((t >> 1) & 1) << "C" << (t & 1) << ">";
    first = false;
  }
  return os.str();
}

// Local reversible operations acting on full-correlation expressions:
// per-party input flips and per-party outcome relabelings conditioned on the
// input (which multiply <A_x B_y C_z> by a sign depending on the settings).
inline std::vector<TripleCoeffs> lro_orbit(const TripleCoeffs& base) {
  std::set<TripleCoeffs> seen{base};
  std::vector<TripleCoeffs> frontier{base};
  auto push = [&](const TripleCoeffs& c) {
    if (seen.insert(c).second) frontier.push_back(c);
  };
  auto bit_of = [](int t, int party) { return (t >> (2 - party)) & 1; };
  while (!frontier.empty()) {
    TripleCoeffs cur = frontier.back();
    frontier.pop_back();
    for (int party = 0; party < 3; ++party) {
      TripleCoeffs flipped{};
      for (int t = 0; t < 8; ++t) flipped[t ^ (1 << (2 - party))] = cur[t];
      push(flipped);
      for (int alpha = 0; alpha < 2; ++alpha)
        for (int beta = 0; beta < 2; ++beta) {
          if (alpha == 0 && beta == 0) continue;
          TripleCoeffs signed_c{};
          for (int t = 0; t < 8; ++t) {
            int s = (alpha & bit_of(t, party)) ^ beta;
            signed_c[t] = sign_bit(s) * cur[t];
          }
          push(signed_c);
        }
    }
  }
  return {seen.begin(), seen.end()};
}

inline const std::vector<TripleCoeffs>& mermin_coeffs() {
  static const std::vector<TripleCoeffs> variants = [] {
    // Reference form: <A0B0C0> - <A0B1C1> - <A1B0C1> - <A1B1C0>.
    TripleCoeffs base{};
    base[0b000] = 1;
    base[0b011] = -1;
    base[0b101] = -1;
    base[0b110] = -1;
    return lro_orbit(base);
  }();
  return variants;
}

inline const std::vector<TripleCoeffs>& svetlichny_coeffs() {
  static const std::vector<TripleCoeffs> variants = [] {
    std::vector<TripleCoeffs> v;
    for (int k = 0; k < 16; ++k) {
      int alpha = (k >> 3) & 1, beta = (k >> 2) & 1, gamma = (k >> 1) & 1, eps = k & 1;
      TripleCoeffs c{};
      for (int t = 0; t < 8; ++t) {
        int x = (t >> 2) & 1, y = (t >> 1) & 1, z = t & 1;
        int s = (x & y) ^ (x & z) ^ (y & z) ^ (alpha & x) ^ (beta & y) ^ (gamma & z) ^
                eps;
        c[t] = sign_bit(s);
      }
      v.push_back(c);
    }
    return v;
  }();
  return variants;
}

inline InequalityResult max_over_variants(const CorrelatorSet& cs,
                                          const std::vector<TripleCoeffs>& variants,
                                          double bound, double tol) {
  InequalityResult res;
  res.bound = bound;
  res.value = -1e300;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    double v = 0;
    for (int t = 0; t < 8; ++t)
      v += variants[k][t] * cs.abc((t >> 2) & 1, (t >> 1) & 1, t & 1);
    if (v > res.value) {
      res.value = v;
      res.variant_index = static_cast<int>(k);
    }
  }
  res.expression = triple_expr(variants[static_cast<std::size_t>(res.variant_index)]);
  res.violated = res.value > bound + tol;
  return res;
}

}  // namespace detail

inline InequalityResult mermin_value(const TripartiteBox& box, double tol = kEpsProb) {
  return detail::max_over_variants(correlators(box), detail::mermin_coeffs(), 2.0, tol);
}

inline InequalityResult svetlichny_value(const TripartiteBox& box,
                                         double tol = kEpsProb) {
  return detail::max_over_variants(correlators(box), detail::svetlichny_coeffs(), 4.0,
                                   tol);
}

inline std::size_t mermin_variant_count() { return detail::mermin_coeffs().size(); }

// The 16 boxes attaining value 4 on each Mermin facet (full-correlation boxes
// with the facet's coefficients as triple correlators). Used as dominant
// vertices in the Mermin-strength decomposition.
inline const std::vector<TripartiteBox>& mermin_box_catalogue() {
  static const std::vector<TripartiteBox> cat = [] {
    std::vector<TripartiteBox> v;
    const auto& variants = detail::mermin_coeffs();
    for (std::size_t k = 0; k < variants.size(); ++k) {
      CorrelatorSet cs;
      for (int t = 0; t < 8; ++t)
        cs.abc((t >> 2) & 1, (t >> 1) & 1, t & 1) = variants[k][t];
      TripartiteBox b = box_from_correlators(cs);
      b.label = "M[" + std::to_string(k) + "]";
      v.push_back(b);
    }
    return v;
  }();
  return cat;
}

// ---------------------------------------------------------------------------
// CHSH and its steering analogue on a bipartite box (first party's settings
// indexed y, second party's z).

inline InequalityResult chsh_value(const BipartiteBox& box, double tol = kEpsProb) {
  BipartiteCorrelators cs = bipartite_correlators(box);
  InequalityResult res;
  res.bound = 2.0;
  res.value = -1e300;
  for (int k = 0; k < 8; ++k) {
    int alpha = (k >> 2) & 1, beta = (k >> 1) & 1, eps = k & 1;
    double v = 0;
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        v += sign_bit((y & z) ^ (alpha & y) ^ (beta & z) ^ eps) * cs.bc(y, z);
    if (v > res.value) {
      res.value = v;
      res.variant_index = k;
      std::ostringstream os;
      bool first = true;
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) {
          int s = sign_bit((y & z) ^ (alpha & y) ^ (beta & z) ^ eps);
          os << (s > 0 ? (first ? "" : " + ") : (first ? "-" : " - "));
          os << "<B" << y << "C" << z << ">";
          first = false;
        }
      res.expression = os.str();
    }
  }
  res.violated = res.value > res.bound + tol;
  return res;
}

// sqrt(<(B0+B1)C0>^2 + <(B0+B1)C1>^2) + sqrt(<(B0-B1)C0>^2 + <(B0-B1)C1>^2) <= 2
// for boxes admitting a local-hidden-state model of the second party, when
// that party's two measurement settings are mutually unbiased.
inline InequalityResult steering_chsh_value(const BipartiteBox& box,
                                            double tol = kEpsProb) {
  BipartiteCorrelators cs = bipartite_correlators(box);
  double sum0 = cs.bc(0, 0) + cs.bc(1, 0);
  double sum1 = cs.bc(0, 1) + cs.bc(1, 1);
  double dif0 = cs.bc(0, 0) - cs.bc(1, 0);
  double dif1 = cs.bc(0, 1) - cs.bc(1, 1);
  InequalityResult res;
  res.bound = 2.0;
  res.value = std::sqrt(sum0 * sum0 + sum1 * sum1) + std::sqrt(dif0 * dif0 + dif1 * dif1);
  res.variant_index = 0;
  res.expression =
      "sqrt(<(B0+B1)C0>^2 + <(B0+B1)C1>^2) + sqrt(<(B0-B1)C0>^2 + <(B0-B1)C1>^2)";
  res.violated = res.value > res.bound + tol;
  return res;
}

}  // namespace tricorr
