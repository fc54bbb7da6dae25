#pragma once

// Complex linear algebra kernels (tensor, dagger, partial trace), density
// matrices, dichotomic measurements, Born-rule box generation, assemblages,
// the explicit states and measurement sets used throughout the project, and
// the arcsine quantum-realizability test for unbiased bipartite correlators.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tricorr/box.hpp"

namespace tricorr {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

inline CMatrix sigma_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix sigma_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline CMatrix sigma_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix tensor(const CMatrix& a, const CMatrix& b, const CMatrix& c) {
  return tensor(tensor(a, b), c);
}

inline CVector tensor_vec(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline CMatrix dagger(const CMatrix& m) { return m.adjoint(); }

// Trace out the subsystems not listed in `keep`. `dims` are the subsystem
// dimensions in tensor order; `keep` holds subsystem indices (sorted output
// order follows tensor order of the kept subsystems).
inline CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims,
                             const std::vector<int>& keep) {
  long total = 1;
  for (int d : dims) total *= d;
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("partial_trace: dims do not match matrix size");

  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  long keep_dim = 1, drop_dim = 1;
  for (int k : keep) {
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: bad keep index");
    kept[static_cast<std::size_t>(k)] = true;
  }
  for (int i = 0; i < n; ++i)
    (kept[static_cast<std::size_t>(i)] ? keep_dim : drop_dim) *= dims[static_cast<std::size_t>(i)];

  // Map (kept multi-index, dropped multi-index) -> flat index.
  auto flat = [&](long kidx, long didx) {
    long idx = 0;
    long kw = keep_dim, dw = drop_dim;
    for (int i = 0; i < n; ++i) {
      int d = dims[static_cast<std::size_t>(i)];
      long digit;
      if (kept[static_cast<std::size_t>(i)]) {
        kw /= d;
        digit = (kidx / kw) % d;
      } else {
        dw /= d;
        digit = (didx / dw) % d;
      }
      idx = idx * d + digit;
    }
    return idx;
  };

  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  for (long r = 0; r < keep_dim; ++r)
    for (long c = 0; c < keep_dim; ++c)
      for (long d = 0; d < drop_dim; ++d) out(r, c) += m(flat(r, d), flat(c, d));
  return out;
}

// ---------------------------------------------------------------------------
// Density matrices and dichotomic measurements

struct MatrixValidation {
  bool hermitian = true;
  bool unit_trace = true;
  bool psd = true;
  double min_eigenvalue = 0;
  bool ok() const { return hermitian && unit_trace && psd; }
};

inline MatrixValidation validate_density(const CMatrix& m, double tol = kEpsMat) {
  MatrixValidation v;
  v.hermitian = (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
  v.unit_trace = std::abs(m.trace() - Complex(1, 0)) <= tol;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      ((m + m.adjoint()) / 2.0).eval(), Eigen::EigenvaluesOnly);
  v.min_eigenvalue = es.eigenvalues().minCoeff();
  v.psd = v.min_eigenvalue >= -tol;
  return v;
}

struct DensityMatrix {
  CMatrix rho;
  std::string label;

  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix m, std::string lbl = {}, double tol = kEpsMat)
      : rho(std::move(m)), label(std::move(lbl)) {
    if (rho.rows() != rho.cols())
      throw std::invalid_argument("DensityMatrix: matrix must be square");
    MatrixValidation v = validate_density(rho, tol);
    if (!v.ok())
      throw std::invalid_argument(
          "DensityMatrix: not a state (hermitian=" + std::to_string(v.hermitian) +
          " trace1=" + std::to_string(v.unit_trace) +
          " min_eig=" + std::to_string(v.min_eigenvalue) + ") " + label);
  }

  int dim() const { return static_cast<int>(rho.rows()); }

  static DensityMatrix pure(const CVector& psi, std::string lbl = {}) {
    CVector n = psi / psi.norm();
    return DensityMatrix((n * n.adjoint()).eval(), std::move(lbl));
  }
};

enum class MeasurementKind { projective_from_observable, povm };

struct DichotomicMeasurement {
  MeasurementKind kind = MeasurementKind::povm;
  std::array<CMatrix, 2> effects;  // outcome 0 first; 0 <-> eigenvalue +1
  std::string label;

  int dim() const { return static_cast<int>(effects[0].rows()); }

  void check(double tol = kEpsMat) const {
    if (effects[0].rows() != effects[1].rows())
      throw std::invalid_argument("DichotomicMeasurement: effect size mismatch");
    CMatrix sum = effects[0] + effects[1];
    if ((sum - identity(dim())).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("DichotomicMeasurement: effects do not sum to I (" +
                                  label + ")");
    for (const auto& e : effects) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(((e + e.adjoint()) / 2.0).eval(),
                                                Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -tol)
        throw std::invalid_argument("DichotomicMeasurement: effect not PSD (" + label +
                                    ")");
    }
    if (kind == MeasurementKind::projective_from_observable)
      for (const auto& e : effects)
        if ((e * e - e).cwiseAbs().maxCoeff() > 1e2 * tol)
          throw std::invalid_argument("DichotomicMeasurement: effect not a projector (" +
                                      label + ")");
  }

  // Outcome 0 is the +1 eigenspace of the dichotomic observable.
  static DichotomicMeasurement from_observable(const CMatrix& obs, std::string lbl = {}) {
    DichotomicMeasurement m;
    m.kind = MeasurementKind::projective_from_observable;
    int d = static_cast<int>(obs.rows());
    m.effects[0] = (identity(d) + obs) / 2.0;
    m.effects[1] = (identity(d) - obs) / 2.0;
    m.label = std::move(lbl);
    m.check();
    return m;
  }

  static DichotomicMeasurement from_effects(CMatrix e0, CMatrix e1, std::string lbl = {}) {
    DichotomicMeasurement m;
    m.kind = MeasurementKind::povm;
    m.effects[0] = std::move(e0);
    m.effects[1] = std::move(e1);
    m.label = std::move(lbl);
    m.check();
    return m;
  }
};

using MeasurementPair = std::array<DichotomicMeasurement, 2>;  // settings 0, 1

// True when both settings are projective rank-1-per-outcome qubit measurements
// whose bases are mutually unbiased (|<e0|f0>|^2 = 1/2).
inline bool mutually_unbiased_qubit_pair(const MeasurementPair& pair,
                                         double tol = 1e-6) {
  for (const auto& m : pair)
    if (m.dim() != 2) return false;
  const CMatrix& p = pair[0].effects[0];
  const CMatrix& q = pair[1].effects[0];
  double overlap = std::abs((p * q).trace());
  return std::abs(overlap - 0.5) <= tol;
}

// ---------------------------------------------------------------------------
// Born-rule boxes

inline TripartiteBox born_tripartite(const DensityMatrix& state,
                                     const MeasurementPair& alice,
                                     const MeasurementPair& bob,
                                     const MeasurementPair& charlie) {
  const long dim = static_cast<long>(alice[0].dim()) * bob[0].dim() * charlie[0].dim();
  if (state.dim() != dim)
    throw std::invalid_argument("born_tripartite: state dimension " +
                                std::to_string(state.dim()) + " != product " +
                                std::to_string(dim));
  TripartiteBox out;
  out.label = "born(" + state.label + ")";
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              CMatrix op = tensor(alice[static_cast<std::size_t>(x)].effects[static_cast<std::size_t>(a)],
                                  bob[static_cast<std::size_t>(y)].effects[static_cast<std::size_t>(b)],
                                  charlie[static_cast<std::size_t>(z)].effects[static_cast<std::size_t>(c)]);
              out.at(x, y, z, a, b, c) = std::real((state.rho * op).trace());
            }
  return out;
}

inline BipartiteBox born_bipartite(const DensityMatrix& state, const MeasurementPair& first,
                                   const MeasurementPair& second) {
  const long dim = static_cast<long>(first[0].dim()) * second[0].dim();
  if (state.dim() != dim)
    throw std::invalid_argument("born_bipartite: state dimension mismatch");
  BipartiteBox out;
  out.label = "born(" + state.label + ")";
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          CMatrix op = tensor(first[static_cast<std::size_t>(y)].effects[static_cast<std::size_t>(b)],
                              second[static_cast<std::size_t>(z)].effects[static_cast<std::size_t>(c)]);
          out.at(y, z, b, c) = std::real((state.rho * op).trace());
        }
  return out;
}

inline SingleBox born_single(const DensityMatrix& state, const MeasurementPair& meas) {
  if (state.dim() != meas[0].dim())
    throw std::invalid_argument("born_single: state dimension mismatch");
  SingleBox out;
  for (int z = 0; z < 2; ++z)
    for (int c = 0; c < 2; ++c)
      out.at(z, c) = std::real(
          (state.rho * meas[static_cast<std::size_t>(z)].effects[static_cast<std::size_t>(c)]).trace());
  return out;
}

// ---------------------------------------------------------------------------
// Named measurement sets

// (sigma_y, -sigma_x): the projective qubit pair used by every trusted party.
inline MeasurementPair sigma_pair() {
  return {DichotomicMeasurement::from_observable(sigma_y(), "sigma_y"),
          DichotomicMeasurement::from_observable(-sigma_x(), "-sigma_x")};
}

// The two dichotomic qutrit POVMs acting as (sigma_y, -sigma_x) on the
// {|0>,|1>} block and splitting |2> evenly.
inline MeasurementPair qutrit_block_povm() {
  CMatrix e01(3, 3), e11(3, 3), e02(3, 3), e12(3, 3);
  const Complex i(0, 1);
  e01 << 0.5, -0.5 * i, 0, 0.5 * i, 0.5, 0, 0, 0, 0.5;
  e11 << 0.5, 0.5 * i, 0, -0.5 * i, 0.5, 0, 0, 0, 0.5;
  e02 << 0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 0.5;
  e12 << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 0.5;
  return {DichotomicMeasurement::from_effects(e01, e11, "E1"),
          DichotomicMeasurement::from_effects(e02, e12, "E2")};
}

// ---------------------------------------------------------------------------
// Named states

inline CVector ghz_vector() {
  CVector v = CVector::Zero(8);
  v(0) = 1.0 / std::sqrt(2.0);
  v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

inline void check_visibility(double V, double hi, const char* what) {
  if (!(V > 0.0) || V > hi + 1e-12)
    throw std::domain_error(std::string(what) + ": visibility " + std::to_string(V) +
                            " outside (0, " + std::to_string(hi) + "]");
}

// V |GHZ><GHZ| + (1-V) I/8 on three qubits.
inline DensityMatrix ghz_mixed(double V) {
  check_visibility(V, 1.0, "ghz_mixed");
  CVector g = ghz_vector();
  CMatrix rho = V * (g * g.adjoint()) + (1.0 - V) * identity(8) / 8.0;
  return DensityMatrix(rho, "ghz_mixed(V=" + std::to_string(V) + ")");
}

// V |GHZ><GHZ| + (1-V) |2><2| x I/2 x I/2 on qutrit x qubit x qubit.
inline DensityMatrix qutrit_mixed(double V) {
  check_visibility(V, 1.0, "qutrit_mixed");
  CVector g = CVector::Zero(12);  // |0,0,0> and |1,1,1> in 3x2x2
  g(0) = 1.0 / std::sqrt(2.0);
  g(1 * 4 + 3) = 1.0 / std::sqrt(2.0);
  CMatrix two = CMatrix::Zero(3, 3);
  two(2, 2) = 1.0;
  CMatrix rho = V * (g * g.adjoint()) +
                (1.0 - V) * tensor(two, identity(2) / 2.0, identity(2) / 2.0);
  return DensityMatrix(rho, "qutrit_mixed(V=" + std::to_string(V) + ")");
}

inline double theta_from(double sin_two_theta, const char* what) {
  if (sin_two_theta > 1.0 + 1e-12)
    throw std::domain_error(std::string(what) + ": sin 2theta = " +
                            std::to_string(sin_two_theta) + " > 1, no such state");
  return 0.5 * std::asin(std::min(sin_two_theta, 1.0));
}

// Two-qubit hidden states for the dimension-4 decomposition of the noisy
// Mermin family: cos(t)|00> + w sin(t)|11>, sin 2t = sqrt(2) V,
// w in {-(1+i)/sqrt2, +(1+i)/sqrt2, +(1-i)/sqrt2, -(1-i)/sqrt2}.
inline DensityMatrix lhs_pair(int lambda, double V) {
  if (lambda < 0 || lambda > 3) throw std::invalid_argument("lhs_pair: lambda in 0..3");
  check_visibility(V, kInvSqrt2, "lhs_pair (sin 2theta = sqrt(2) V)");
  const double th = theta_from(std::sqrt(2.0) * V, "lhs_pair");
  const Complex d(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const Complex w = (lambda == 0) ? -d : (lambda == 1) ? d : (lambda == 2) ? std::conj(d)
                                                                           : -std::conj(d);
  CVector psi = CVector::Zero(4);
  psi(0) = std::cos(th);
  psi(3) = w * std::sin(th);
  return DensityMatrix::pure(psi, "lhs_pair(" + std::to_string(lambda) + ")");
}

// Single-qubit hidden states for the dimension-4 decomposition of the
// conditional pair boxes: cos(t)|0> + w sin(t)|1>, sin 2t = 2V,
// w in {+i, -i, -1, +1}.
inline DensityMatrix lhs_qubit(int lambda, double V) {
  if (lambda < 0 || lambda > 3) throw std::invalid_argument("lhs_qubit: lambda in 0..3");
  check_visibility(V, 0.5, "lhs_qubit (sin 2theta = 2 V)");
  const double th = theta_from(2.0 * V, "lhs_qubit");
  const Complex i(0, 1);
  const Complex w = (lambda == 0) ? i : (lambda == 1) ? -i : (lambda == 2) ? Complex(-1, 0)
                                                                           : Complex(1, 0);
  CVector psi = CVector::Zero(2);
  psi(0) = std::cos(th);
  psi(1) = w * std::sin(th);
  return DensityMatrix::pure(psi, "lhs_qubit(" + std::to_string(lambda) + ")");
}

// Two-qubit hidden states for the dimension-4 decomposition of the noisy
// Svetlichny family: cos(t)|00> + w sin(t)|11>, sin 2t = sqrt(2) V,
// w in {-1, +1, -i, +i}.
inline DensityMatrix svetlichny_lhs_pair(int lambda, double V) {
  if (lambda < 0 || lambda > 3)
    throw std::invalid_argument("svetlichny_lhs_pair: lambda in 0..3");
  check_visibility(V, kInvSqrt2, "svetlichny_lhs_pair (sin 2theta = sqrt(2) V)");
  const double th = theta_from(std::sqrt(2.0) * V, "svetlichny_lhs_pair");
  const Complex i(0, 1);
  const Complex w = (lambda == 0) ? Complex(-1, 0)
                    : (lambda == 1) ? Complex(1, 0)
                    : (lambda == 2) ? -i
                                    : i;
  CVector psi = CVector::Zero(4);
  psi(0) = std::cos(th);
  psi(3) = w * std::sin(th);
  return DensityMatrix::pure(psi, "svetlichny_lhs_pair(" + std::to_string(lambda) + ")");
}

// Classical-quantum state sum_i p_i |i><i| x rho_i^B x rho_i^C; |i> is the
// computational basis of an Alice space of dimension p.size().
struct CqSpec {
  std::vector<double> p;
  std::vector<CMatrix> rho_b;
  std::vector<CMatrix> rho_c;

  void check() const {
    if (p.empty() || p.size() != rho_b.size() || p.size() != rho_c.size())
      throw std::invalid_argument("CqSpec: component count mismatch");
    double sum = 0;
    for (double w : p) {
      if (w < -kEpsProb) throw std::invalid_argument("CqSpec: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("CqSpec: weights must sum to 1");
  }
};

inline DensityMatrix cq_state(const CqSpec& spec) {
  spec.check();
  const int da = static_cast<int>(spec.p.size());
  const int db = static_cast<int>(spec.rho_b[0].rows());
  const int dc = static_cast<int>(spec.rho_c[0].rows());
  CMatrix rho = CMatrix::Zero(da * db * dc, da * db * dc);
  for (int i = 0; i < da; ++i) {
    CMatrix basis = CMatrix::Zero(da, da);
    basis(i, i) = 1.0;
    rho += spec.p[static_cast<std::size_t>(i)] *
           tensor(basis, spec.rho_b[static_cast<std::size_t>(i)],
                  spec.rho_c[static_cast<std::size_t>(i)]);
  }
  return DensityMatrix(rho, "cq_state");
}

// ---------------------------------------------------------------------------
// Assemblages

struct Assemblage {
  // (x, a) -> unnormalized conditional state on the trusted side.
  std::map<std::pair<int, int>, CMatrix> elements;

  const CMatrix& at(int x, int a) const { return elements.at({x, a}); }
};

inline Assemblage assemblage(const DensityMatrix& state, const MeasurementPair& alice,
                             const std::vector<int>& dims) {
  long total = 1;
  for (int d : dims) total *= d;
  if (dims.size() < 2 || total != state.dim())
    throw std::invalid_argument("assemblage: inconsistent dims");
  if (dims[0] != alice[0].dim())
    throw std::invalid_argument("assemblage: Alice dimension mismatch");
  long rest = total / dims[0];
  std::vector<int> keep;
  for (int i = 1; i < static_cast<int>(dims.size()); ++i) keep.push_back(i);
  Assemblage out;
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      CMatrix op = tensor(alice[static_cast<std::size_t>(x)].effects[static_cast<std::size_t>(a)],
                          identity(static_cast<int>(rest)));
      out.elements[{x, a}] = partial_trace((op * state.rho).eval(), dims, keep);
    }
  return out;
}

struct AssemblageValidation {
  bool elements_psd = true;
  bool no_signalling = true;  // sum_a sigma_{a|x} independent of x
  double max_deviation = 0;
  std::vector<std::string> offending;
  bool ok() const { return elements_psd && no_signalling; }
};

inline AssemblageValidation validate_assemblage(const Assemblage& asm_, double tol = kEpsMat) {
  AssemblageValidation v;
  CMatrix reduced[2];
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      const CMatrix& e = asm_.at(x, a);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(((e + e.adjoint()) / 2.0).eval(),
                                                Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -tol) {
        v.elements_psd = false;
        v.offending.push_back("element (x=" + std::to_string(x) +
                              ",a=" + std::to_string(a) + ") not PSD");
      }
      if (a == 0)
        reduced[x] = e;
      else
        reduced[x] += e;
    }
  }
  v.max_deviation = (reduced[0] - reduced[1]).cwiseAbs().maxCoeff();
  if (v.max_deviation > tol) {
    v.no_signalling = false;
    v.offending.push_back("sum_a sigma_{a|x} depends on x (max dev " +
                          std::to_string(v.max_deviation) + ")");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Quantum realizability of unbiased bipartite correlators (arcsine condition):
// realizable iff |sum_yz asin c_yz - 2 asin c_y*z*| <= pi for every (y*,z*).

enum class TlmVerdict { realizable, not_realizable, unknown };

inline const char* to_string(TlmVerdict v) {
  switch (v) {
    case TlmVerdict::realizable: return "realizable";
    case TlmVerdict::not_realizable: return "not_realizable";
    case TlmVerdict::unknown: return "unknown";
  }
  return "?";
}

inline TlmVerdict tlm_realizable(const std::array<double, 4>& corr,
                                 bool marginals_unbiased, double tol = kEpsTlm) {
  for (double c : corr)
    if (std::abs(c) > 1.0 + tol)
      throw std::domain_error("tlm_realizable: correlator out of [-1,1]");
  if (!marginals_unbiased) return TlmVerdict::unknown;
  std::array<double, 4> as;
  double total = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    as[k] = std::asin(std::clamp(corr[k], -1.0, 1.0));
    total += as[k];
  }
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < 4; ++k)
    if (std::abs(total - 2.0 * as[k]) > pi + tol) return TlmVerdict::not_realizable;
  return TlmVerdict::realizable;
}

inline TlmVerdict tlm_realizable(const BipartiteBox& box, double tol = kEpsTlm,
                                 double marginal_tol = kEpsProb) {
  BipartiteCorrelators cs = bipartite_correlators(box);
  return tlm_realizable(cs.corr, cs.unbiased(marginal_tol), tol);
}

}  // namespace tricorr
