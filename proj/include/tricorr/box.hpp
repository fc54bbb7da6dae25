#pragma once

// Conditional-probability boxes for the 3-party / 2-setting / 2-outcome Bell
// scenario: tables, validation, marginals, correlator coordinates, the vertex
// catalogues (deterministic, PR-product, Svetlichny) and the noisy
// Mermin/Svetlichny families.
//
// Index convention (fixed, used by the JSON wire format): tripartite entries
// are stored row-major in (x, y, z, a, b, c); bipartite in (y, z, b, c);
// single-party in (x, a). All types are immutable value objects.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tricorr {

inline constexpr double kEpsProb = 1e-9;  // probability-table validation slack
inline constexpr double kEpsMat = 1e-9;   // matrix validation slack
inline constexpr double kEpsLp = 1e-7;    // LP / linear-solve residual slack
inline constexpr double kEpsTlm = 1e-9;   // arcsine-condition slack

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
inline constexpr double kInvSqrt5 = 0.4472135954999579392818347337462553;

enum class Party { A = 0, B = 1, C = 2 };
enum class PartyPair { AB = 0, AC = 1, BC = 2 };
enum class Cut { AvsBC = 0, BvsAC = 1, CvsAB = 2 };

inline const char* to_string(Cut c) {
  switch (c) {
    case Cut::AvsBC: return "A|BC";
    case Cut::BvsAC: return "B|AC";
    case Cut::CvsAB: return "C|AB";
  }
  return "?";
}

inline std::optional<Cut> cut_from_string(const std::string& s) {
  if (s == "A|BC" || s == "A" || s == "a") return Cut::AvsBC;
  if (s == "B|AC" || s == "B" || s == "b") return Cut::BvsAC;
  if (s == "C|AB" || s == "C" || s == "c") return Cut::CvsAB;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tables

struct SingleBox {
  std::array<double, 4> p{};  // (x, a)

  static constexpr std::size_t index(int x, int a) {
    return static_cast<std::size_t>(x * 2 + a);
  }
  double operator()(int x, int a) const { return p[index(x, a)]; }
  double& at(int x, int a) { return p[index(x, a)]; }

  static SingleBox uniform() {
    SingleBox b;
    b.p.fill(0.5);
    return b;
  }
};

inline bool operator==(const SingleBox& l, const SingleBox& r) { return l.p == r.p; }

struct BipartiteBox {
  std::array<double, 16> p{};  // (y, z, b, c); axes follow original party order
  std::string label;

  BipartiteBox() = default;
  explicit BipartiteBox(const std::vector<double>& entries, std::string lbl = {}) {
    if (entries.size() != 16)
      throw std::invalid_argument("BipartiteBox: expected 16 entries, got " +
                                  std::to_string(entries.size()));
    std::copy(entries.begin(), entries.end(), p.begin());
    label = std::move(lbl);
  }

  static constexpr std::size_t index(int y, int z, int b, int c) {
    return static_cast<std::size_t>(((y * 2 + z) * 2 + b) * 2 + c);
  }
  double operator()(int y, int z, int b, int c) const { return p[index(y, z, b, c)]; }
  double& at(int y, int z, int b, int c) { return p[index(y, z, b, c)]; }

  static BipartiteBox uniform() {
    BipartiteBox b;
    b.p.fill(0.25);
    b.label = "uniform";
    return b;
  }
};

struct TripartiteBox {
  std::array<double, 64> p{};  // (x, y, z, a, b, c)
  std::string label;

  TripartiteBox() = default;
  explicit TripartiteBox(const std::vector<double>& entries, std::string lbl = {}) {
    if (entries.size() != 64)
      throw std::invalid_argument("TripartiteBox: expected 64 entries, got " +
                                  std::to_string(entries.size()));
    std::copy(entries.begin(), entries.end(), p.begin());
    label = std::move(lbl);
  }

  static constexpr std::size_t index(int x, int y, int z, int a, int b, int c) {
    return static_cast<std::size_t>(((((x * 2 + y) * 2 + z) * 2 + a) * 2 + b) * 2 + c);
  }
  double operator()(int x, int y, int z, int a, int b, int c) const {
    return p[index(x, y, z, a, b, c)];
  }
  double& at(int x, int y, int z, int a, int b, int c) {
    return p[index(x, y, z, a, b, c)];
  }

  static TripartiteBox uniform() {
    TripartiteBox b;
    b.p.fill(0.125);
    b.label = "uniform";
    return b;
  }
};

inline double max_abs_diff(const TripartiteBox& l, const TripartiteBox& r) {
  double m = 0;
  for (std::size_t i = 0; i < 64; ++i) m = std::max(m, std::abs(l.p[i] - r.p[i]));
  return m;
}

inline double max_abs_diff(const BipartiteBox& l, const BipartiteBox& r) {
  double m = 0;
  for (std::size_t i = 0; i < 16; ++i) m = std::max(m, std::abs(l.p[i] - r.p[i]));
  return m;
}

inline double max_abs_diff(const SingleBox& l, const SingleBox& r) {
  double m = 0;
  for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(l.p[i] - r.p[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Marginals

inline SingleBox marginal_single(const TripartiteBox& box, Party keep,
                                 int other1_setting = 0, int other2_setting = 0) {
  // Dropped parties' settings are given in original party order.
  SingleBox out;
  for (int s = 0; s < 2; ++s)
    for (int o = 0; o < 2; ++o) {
      double sum = 0;
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
          switch (keep) {
            case Party::A: sum += box(s, other1_setting, other2_setting, o, u, v); break;
            case Party::B: sum += box(other1_setting, s, other2_setting, u, o, v); break;
            case Party::C: sum += box(other1_setting, other2_setting, s, u, v, o); break;
          }
        }
      out.at(s, o) = sum;
    }
  return out;
}

inline BipartiteBox marginal_pair(const TripartiteBox& box, PartyPair keep,
                                  int dropped_setting = 0) {
  BipartiteBox out;
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2)
      for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2) {
          double sum = 0;
          for (int u = 0; u < 2; ++u) {
            switch (keep) {
              case PartyPair::BC: sum += box(dropped_setting, s1, s2, u, o1, o2); break;
              case PartyPair::AC: sum += box(s1, dropped_setting, s2, o1, u, o2); break;
              case PartyPair::AB: sum += box(s1, s2, dropped_setting, o1, o2, u); break;
            }
          }
          out.at(s1, s2, o1, o2) = sum;
        }
  return out;
}

// Generic entry point matching the one-operation contract: keep is a set of
// parties, settings_of_dropped are the dropped parties' settings in party
// order. Throws on an empty or full keep-set.
inline std::variant<SingleBox, BipartiteBox> marginal(
    const TripartiteBox& box, const std::set<Party>& keep,
    const std::vector<int>& settings_of_dropped) {
  if (keep.empty()) throw std::invalid_argument("marginal: empty keep-set");
  if (keep.size() >= 3) throw std::invalid_argument("marginal: keep-set must drop a party");
  if (keep.size() == 1) {
    if (settings_of_dropped.size() != 2)
      throw std::invalid_argument("marginal: need 2 dropped settings");
    return marginal_single(box, *keep.begin(), settings_of_dropped[0],
                           settings_of_dropped[1]);
  }
  if (settings_of_dropped.size() != 1)
    throw std::invalid_argument("marginal: need 1 dropped setting");
  PartyPair pp;
  if (!keep.count(Party::A)) pp = PartyPair::BC;
  else if (!keep.count(Party::B)) pp = PartyPair::AC;
  else pp = PartyPair::AB;
  return marginal_pair(box, pp, settings_of_dropped[0]);
}

inline SingleBox marginal_of_pair(const BipartiteBox& box, int which,
                                  int dropped_setting = 0) {
  // which = 0 keeps the first party, 1 the second.
  SingleBox out;
  for (int s = 0; s < 2; ++s)
    for (int o = 0; o < 2; ++o) {
      double sum = 0;
      for (int u = 0; u < 2; ++u)
        sum += which == 0 ? box(s, dropped_setting, o, u) : box(dropped_setting, s, u, o);
      out.at(s, o) = sum;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  bool structural = true;
  bool nonneg = true;
  bool normalized = true;
  bool no_signalling = true;
  std::vector<std::string> offending;

  bool ok() const { return structural && nonneg && normalized && no_signalling; }
};

inline ValidationReport validate_tripartite(const TripartiteBox& box,
                                            double tol = kEpsProb) {
  ValidationReport rep;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        double sum = 0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              double v = box(x, y, z, a, b, c);
              sum += v;
              if (v < -tol || v > 1 + tol) {
                rep.nonneg = false;
                std::ostringstream os;
                os << "entry out of [0,1] at (x,y,z,a,b,c)=(" << x << y << z << a << b
                   << c << "): " << v;
                rep.offending.push_back(os.str());
              }
            }
        if (std::abs(sum - 1.0) > tol) {
          rep.normalized = false;
          std::ostringstream os;
          os << "normalization off at (x,y,z)=(" << x << y << z << "): sum=" << sum;
          rep.offending.push_back(os.str());
        }
      }

  // No-signalling: every pair marginal must be independent of the dropped
  // party's setting (single-party independence follows).
  auto check_pair = [&](PartyPair keep, const char* dropped) {
    BipartiteBox m0 = marginal_pair(box, keep, 0);
    BipartiteBox m1 = marginal_pair(box, keep, 1);
    double d = max_abs_diff(m0, m1);
    if (d > tol) {
      rep.no_signalling = false;
      std::ostringstream os;
      os << "pair marginal depends on " << dropped << "'s setting (max dev " << d << ")";
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int o1 = 0; o1 < 2; ++o1)
            for (int o2 = 0; o2 < 2; ++o2)
              if (std::abs(m0(s1, s2, o1, o2) - m1(s1, s2, o1, o2)) > tol) {
                os << "; cell(s1,s2,o1,o2)=(" << s1 << s2 << o1 << o2 << ")";
                s1 = s2 = o1 = o2 = 2;  // report first offender only
              }
      rep.offending.push_back(os.str());
    }
  };
  check_pair(PartyPair::BC, "A");
  check_pair(PartyPair::AC, "B");
  check_pair(PartyPair::AB, "C");
  return rep;
}

inline ValidationReport validate_bipartite(const BipartiteBox& box,
                                           double tol = kEpsProb) {
  ValidationReport rep;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      double sum = 0;
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          double v = box(y, z, b, c);
          sum += v;
          if (v < -tol || v > 1 + tol) {
            rep.nonneg = false;
            std::ostringstream os;
            os << "entry out of [0,1] at (y,z,b,c)=(" << y << z << b << c << "): " << v;
            rep.offending.push_back(os.str());
          }
        }
      if (std::abs(sum - 1.0) > tol) {
        rep.normalized = false;
        std::ostringstream os;
        os << "normalization off at (y,z)=(" << y << z << "): sum=" << sum;
        rep.offending.push_back(os.str());
      }
    }
  for (int which = 0; which < 2; ++which) {
    SingleBox m0 = marginal_of_pair(box, which, 0);
    SingleBox m1 = marginal_of_pair(box, which, 1);
    if (max_abs_diff(m0, m1) > tol) {
      rep.no_signalling = false;
      std::ostringstream os;
      os << "marginal of party " << (which == 0 ? 1 : 2)
         << " depends on the other's setting (max dev " << max_abs_diff(m0, m1) << ")";
      rep.offending.push_back(os.str());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Correlator coordinates

struct CorrelatorSet {
  std::array<double, 6> singles{};   // A0 A1 B0 B1 C0 C1
  std::array<double, 12> pairs{};    // AB(x,y) x4, AC(x,z) x4, BC(y,z) x4
  std::array<double, 8> triples{};   // (x,y,z)

  double a(int x) const { return singles[x]; }
  double b(int y) const { return singles[2 + y]; }
  double c(int z) const { return singles[4 + z]; }
  double ab(int x, int y) const { return pairs[x * 2 + y]; }
  double ac(int x, int z) const { return pairs[4 + x * 2 + z]; }
  double bc(int y, int z) const { return pairs[8 + y * 2 + z]; }
  double abc(int x, int y, int z) const { return triples[(x * 2 + y) * 2 + z]; }

  double& a(int x) { return singles[x]; }
  double& b(int y) { return singles[2 + y]; }
  double& c(int z) { return singles[4 + z]; }
  double& ab(int x, int y) { return pairs[x * 2 + y]; }
  double& ac(int x, int z) { return pairs[4 + x * 2 + z]; }
  double& bc(int y, int z) { return pairs[8 + y * 2 + z]; }
  double& abc(int x, int y, int z) { return triples[(x * 2 + y) * 2 + z]; }

  double max_abs() const {
    double m = 0;
    for (double v : singles) m = std::max(m, std::abs(v));
    for (double v : pairs) m = std::max(m, std::abs(v));
    for (double v : triples) m = std::max(m, std::abs(v));
    return m;
  }
};

inline int sign_bit(int n) { return (n % 2 == 0) ? 1 : -1; }

inline CorrelatorSet correlators(const TripartiteBox& box) {
  CorrelatorSet cs;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              double v = box(x, y, z, a, b, c);
              // Single/pair expectations are independent of the remaining
              // settings for valid NS boxes; average over them so the map is
              // well-defined on near-valid tables too.
              cs.a(x) += sign_bit(a) * v / 4.0;
              cs.b(y) += sign_bit(b) * v / 4.0;
              cs.c(z) += sign_bit(c) * v / 4.0;
              cs.ab(x, y) += sign_bit(a + b) * v / 2.0;
              cs.ac(x, z) += sign_bit(a + c) * v / 2.0;
              cs.bc(y, z) += sign_bit(b + c) * v / 2.0;
              cs.abc(x, y, z) += sign_bit(a + b + c) * v;
            }
  return cs;
}

inline TripartiteBox box_from_correlators(const CorrelatorSet& cs,
                                          double tol = kEpsProb) {
  if (cs.max_abs() > 1.0 + tol)
    throw std::domain_error("box_from_correlators: expectation value outside [-1, 1]");
  TripartiteBox out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              double v = 1.0 + sign_bit(a) * cs.a(x) + sign_bit(b) * cs.b(y) +
                         sign_bit(c) * cs.c(z) + sign_bit(a + b) * cs.ab(x, y) +
                         sign_bit(a + c) * cs.ac(x, z) + sign_bit(b + c) * cs.bc(y, z) +
                         sign_bit(a + b + c) * cs.abc(x, y, z);
              v /= 8.0;
              if (v < -tol)
                throw std::domain_error(
                    "box_from_correlators: not a box (negative entry " +
                    std::to_string(v) + ")");
              out.at(x, y, z, a, b, c) = std::max(v, 0.0);
            }
  return out;
}

struct BipartiteCorrelators {
  std::array<double, 2> first{};   // <B_y>
  std::array<double, 2> second{};  // <C_z>
  std::array<double, 4> corr{};    // <B_y C_z>, (y,z) row-major

  double bc(int y, int z) const { return corr[y * 2 + z]; }
  double& bc(int y, int z) { return corr[y * 2 + z]; }
  bool unbiased(double tol = kEpsProb) const {
    return std::abs(first[0]) <= tol && std::abs(first[1]) <= tol &&
           std::abs(second[0]) <= tol && std::abs(second[1]) <= tol;
  }
};

inline BipartiteCorrelators bipartite_correlators(const BipartiteBox& box) {
  BipartiteCorrelators cs;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          double v = box(y, z, b, c);
          cs.first[y] += sign_bit(b) * v / 2.0;
          cs.second[z] += sign_bit(c) * v / 2.0;
          cs.bc(y, z) += sign_bit(b + c) * v;
        }
  return cs;
}

inline BipartiteBox box_from_bipartite_correlators(const BipartiteCorrelators& cs,
                                                   double tol = kEpsProb) {
  BipartiteBox out;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          double v = (1.0 + sign_bit(b) * cs.first[y] + sign_bit(c) * cs.second[z] +
                      sign_bit(b + c) * cs.bc(y, z)) /
                     4.0;
          if (v < -tol)
            throw std::domain_error("box_from_bipartite_correlators: not a box");
          out.at(y, z, b, c) = std::max(v, 0.0);
        }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic boxes and vertex catalogues

struct DeterministicSpec {
  int alpha = 0, beta = 0, gamma = 0, epsilon = 0, zeta = 0, eta = 0;

  void check() const {
    for (int v : {alpha, beta, gamma, epsilon, zeta, eta})
      if (v != 0 && v != 1)
        throw std::invalid_argument("DeterministicSpec: fields must be bits");
  }
};

inline SingleBox deterministic_single(int alpha, int beta) {
  SingleBox out;
  for (int x = 0; x < 2; ++x) out.at(x, (alpha & x) ^ beta) = 1.0;
  return out;
}

inline TripartiteBox deterministic_box(const DeterministicSpec& spec) {
  spec.check();
  TripartiteBox out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        out.at(x, y, z, (spec.alpha & x) ^ spec.beta, (spec.gamma & y) ^ spec.epsilon,
               (spec.zeta & z) ^ spec.eta) = 1.0;
  std::ostringstream os;
  os << "D[" << spec.alpha << spec.beta << spec.gamma << spec.epsilon << spec.zeta
     << spec.eta << "]";
  out.label = os.str();
  return out;
}

inline const std::vector<TripartiteBox>& deterministic_catalogue() {
  static const std::vector<TripartiteBox> cat = [] {
    std::vector<TripartiteBox> v;
    v.reserve(64);
    for (int bits = 0; bits < 64; ++bits)
      v.push_back(deterministic_box({(bits >> 5) & 1, (bits >> 4) & 1, (bits >> 3) & 1,
                                     (bits >> 2) & 1, (bits >> 1) & 1, bits & 1}));
    return v;
  }();
  return cat;
}

inline BipartiteBox pr_box(int alpha = 0, int beta = 0, int gamma = 0) {
  BipartiteBox out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma))
            out.at(x, y, a, b) = 0.5;
  std::ostringstream os;
  os << "PR[" << alpha << beta << gamma << "]";
  out.label = os.str();
  return out;
}

// Embed a bipartite box on the given pair and a single-party box on the
// remaining party into a tripartite product box.
inline TripartiteBox embed_pair_single(const BipartiteBox& pair_box,
                                       const SingleBox& single_box, PartyPair pair) {
  TripartiteBox out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              double v = 0;
              switch (pair) {
                case PartyPair::AB: v = pair_box(x, y, a, b) * single_box(z, c); break;
                case PartyPair::AC: v = pair_box(x, z, a, c) * single_box(y, b); break;
                case PartyPair::BC: v = pair_box(y, z, b, c) * single_box(x, a); break;
              }
              out.at(x, y, z, a, b, c) = v;
            }
  return out;
}

// Vertex with a PR box on `pair` and the paper's shared-bit deterministic
// third party (third outcome = gamma * setting + epsilon mod 2).
inline TripartiteBox two_way_vertex(PartyPair pair, int alpha, int beta, int gamma,
                                    int epsilon) {
  TripartiteBox out =
      embed_pair_single(pr_box(alpha, beta, gamma),
                        deterministic_single(gamma, epsilon), pair);
  std::ostringstream os;
  os << "P" << (pair == PartyPair::AB ? "12" : pair == PartyPair::AC ? "13" : "23")
     << "[" << alpha << beta << gamma << epsilon << "]";
  out.label = os.str();
  return out;
}

// Full product family PR(alpha,beta,gamma) x D(zeta,eta): the extremal
// nonlocal boxes of the two-way-local polytope (32 per pair).
inline TripartiteBox two_way_product_vertex(PartyPair pair, int alpha, int beta,
                                            int gamma, int zeta, int eta) {
  TripartiteBox out = embed_pair_single(pr_box(alpha, beta, gamma),
                                        deterministic_single(zeta, eta), pair);
  std::ostringstream os;
  os << "PRxD[" << static_cast<int>(pair) << ":" << alpha << beta << gamma << "|" << zeta
     << eta << "]";
  out.label = os.str();
  return out;
}

inline const std::vector<TripartiteBox>& two_way_catalogue() {
  static const std::vector<TripartiteBox> cat = [] {
    std::vector<TripartiteBox> v;
    v.reserve(96);
    for (PartyPair pair : {PartyPair::AB, PartyPair::AC, PartyPair::BC})
      for (int pr = 0; pr < 8; ++pr)
        for (int det = 0; det < 4; ++det)
          v.push_back(two_way_product_vertex(pair, (pr >> 2) & 1, (pr >> 1) & 1, pr & 1,
                                             (det >> 1) & 1, det & 1));
    return v;
  }();
  return cat;
}

inline TripartiteBox svetlichny_vertex(int alpha, int beta, int gamma, int epsilon) {
  TripartiteBox out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        int parity = (x & y) ^ (x & z) ^ (y & z) ^ (alpha & x) ^ (beta & y) ^
                     (gamma & z) ^ epsilon;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
              if ((a ^ b ^ c) == parity) out.at(x, y, z, a, b, c) = 0.25;
      }
  std::ostringstream os;
  os << "Sv[" << alpha << beta << gamma << epsilon << "]";
  out.label = os.str();
  return out;
}

inline const std::vector<TripartiteBox>& svetlichny_catalogue() {
  static const std::vector<TripartiteBox> cat = [] {
    std::vector<TripartiteBox> v;
    v.reserve(16);
    for (int k = 0; k < 16; ++k)
      v.push_back(svetlichny_vertex((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1));
    return v;
  }();
  return cat;
}

// ---------------------------------------------------------------------------
// Noisy families

enum class FamilyKind { mermin, svetlichny };

struct FamilyParam {
  FamilyKind kind = FamilyKind::mermin;
  double visibility = 1.0;

  void check() const {
    if (!(visibility > 0.0) || visibility > 1.0)
      throw std::domain_error("FamilyParam: visibility must lie in (0, 1], got " +
                              std::to_string(visibility));
  }
};

inline TripartiteBox family_box(const FamilyParam& param) {
  param.check();
  TripartiteBox out;
  const double V = param.visibility;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              int s = a ^ b ^ c ^ (x & y) ^ (y & z) ^ (x & z);
              if (param.kind == FamilyKind::mermin) {
                int delta = ((x ^ y ^ 1) == z) ? 1 : 0;
                out.at(x, y, z, a, b, c) = (1.0 + sign_bit(s) * delta * V) / 8.0;
              } else {
                out.at(x, y, z, a, b, c) =
                    (2.0 + sign_bit(s) * std::sqrt(2.0) * V) / 16.0;
              }
            }
  out.label = (param.kind == FamilyKind::mermin ? "mermin(V=" : "svetlichny(V=") +
              std::to_string(V) + ")";
  return out;
}

inline TripartiteBox noisy_mermin(double V) {
  return family_box({FamilyKind::mermin, V});
}
inline TripartiteBox noisy_svetlichny(double V) {
  return family_box({FamilyKind::svetlichny, V});
}

// ---------------------------------------------------------------------------
// Party permutations and product structure

using PartyPermutation = std::array<int, 3>;  // new slot i holds old party perm[i]

inline const std::array<PartyPermutation, 6>& all_party_permutations() {
  static const std::array<PartyPermutation, 6> perms = {
      PartyPermutation{0, 1, 2}, PartyPermutation{0, 2, 1}, PartyPermutation{1, 0, 2},
      PartyPermutation{1, 2, 0}, PartyPermutation{2, 0, 1}, PartyPermutation{2, 1, 0}};
  return perms;
}

inline TripartiteBox permute_parties(const TripartiteBox& box,
                                     const PartyPermutation& perm) {
  TripartiteBox out;
  out.label = box.label;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              int s_new[3] = {x, y, z};
              int o_new[3] = {a, b, c};
              int s_old[3], o_old[3];
              for (int i = 0; i < 3; ++i) {
                s_old[perm[i]] = s_new[i];
                o_old[perm[i]] = o_new[i];
              }
              out.at(x, y, z, a, b, c) =
                  box(s_old[0], s_old[1], s_old[2], o_old[0], o_old[1], o_old[2]);
            }
  return out;
}

inline PartyPermutation compose(const PartyPermutation& outer,
                                const PartyPermutation& inner) {
  // permute_parties(box, compose(outer, inner)) ==
  // permute_parties(permute_parties(box, outer), inner)
  PartyPermutation r;
  for (int i = 0; i < 3; ++i) r[i] = outer[inner[i]];
  return r;
}

inline bool is_symmetric(const TripartiteBox& box, double tol = kEpsProb) {
  for (const auto& perm : all_party_permutations())
    if (max_abs_diff(box, permute_parties(box, perm)) > tol) return false;
  return true;
}

// Permutation that brings the cut's untrusted party into slot A while keeping
// the trusted pair in original party order.
inline PartyPermutation cut_to_front(Cut cut) {
  switch (cut) {
    case Cut::AvsBC: return {0, 1, 2};
    case Cut::BvsAC: return {1, 0, 2};
    case Cut::CvsAB: return {2, 0, 1};
  }
  return {0, 1, 2};
}

inline bool is_product(const TripartiteBox& box, Cut cut, double tol = kEpsProb) {
  Party single = static_cast<Party>(static_cast<int>(cut));
  PartyPair pair = static_cast<PartyPair>(2 - static_cast<int>(cut));
  // Cut::AvsBC -> pair BC, Cut::BvsAC -> pair AC, Cut::CvsAB -> pair AB.
  SingleBox sm = marginal_single(box, single);
  BipartiteBox pm = marginal_pair(box, pair);
  TripartiteBox prod = embed_pair_single(pm, sm, pair);
  return max_abs_diff(box, prod) <= tol;
}

}  // namespace tricorr
