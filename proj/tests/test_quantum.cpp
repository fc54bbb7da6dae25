#include "doctest.h"

#include <cmath>
#include <random>

#include "tricorr/json_io.hpp"
#include "tricorr/quantum.hpp"

using namespace tricorr;

namespace {

// The four conditional pair boxes of the dimension-4 decomposition:
// sign[l][row] gives the sign of V in the diagonal entries per (y,z) row.
BipartiteBox conditional_pair_box(int lambda, double V) {
  static const int sign[4][4] = {
      {+1, +1, +1, -1},  // lambda 0
      {-1, -1, -1, +1},  // lambda 1
      {-1, +1, +1, +1},  // lambda 2
      {+1, -1, -1, -1}}; // lambda 3
  BipartiteBox out;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      double s = sign[lambda][y * 2 + z] * V;
      out.at(y, z, 0, 0) = (1 + s) / 4;
      out.at(y, z, 1, 1) = (1 + s) / 4;
      out.at(y, z, 0, 1) = (1 - s) / 4;
      out.at(y, z, 1, 0) = (1 - s) / 4;
    }
  return out;
}

// Single-qubit conditional tables of the one-level-down decomposition:
// row z=0 deviates by +-2V for lambda 0/1, row z=1 for lambda 2/3.
SingleBox conditional_qubit_table(int lambda, double V) {
  SingleBox out = SingleBox::uniform();
  int row = lambda < 2 ? 0 : 1;
  double s = (lambda % 2 == 0 ? +2 : -2) * V;
  out.at(row, 0) = (1 + s) / 2;
  out.at(row, 1) = (1 - s) / 2;
  return out;
}

DensityMatrix random_two_qubit_pure(std::mt19937& rng) {
  std::normal_distribution<double> g;
  CVector psi(4);
  for (int i = 0; i < 4; ++i) psi(i) = Complex(g(rng), g(rng));
  return DensityMatrix::pure(psi, "random");
}

MeasurementPair random_projective_pair(std::mt19937& rng) {
  std::normal_distribution<double> g;
  auto rand_obs = [&] {
    Eigen::Vector3d n(g(rng), g(rng), g(rng));
    n.normalize();
    return (n(0) * sigma_x() + n(1) * sigma_y() + n(2) * sigma_z()).eval();
  };
  return {DichotomicMeasurement::from_observable(rand_obs()),
          DichotomicMeasurement::from_observable(rand_obs())};
}

// Random local unitary as exp of a random anti-Hermitian matrix, applied to
// the maximally entangled state so the marginals stay maximally mixed.
DensityMatrix random_max_entangled(std::mt19937& rng) {
  std::normal_distribution<double> g;
  auto rand_unitary = [&] {
    CMatrix h(2, 2);
    h << Complex(g(rng), 0), Complex(g(rng), g(rng)), 0, Complex(g(rng), 0);
    h(1, 0) = std::conj(h(0, 1));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CMatrix d = CMatrix::Zero(2, 2);
    for (int k = 0; k < 2; ++k)
      d(k, k) = std::exp(Complex(0, es.eigenvalues()(k)));
    return (es.eigenvectors() * d * es.eigenvectors().adjoint()).eval();
  };
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  CVector psi = tensor(rand_unitary(), rand_unitary()) * phi;
  return DensityMatrix::pure(psi, "max_entangled");
}

}  // namespace

TEST_CASE("linear algebra kernels") {
  CHECK((tensor(identity(2), identity(2)) - identity(4)).norm() == doctest::Approx(0));
  CHECK((dagger(sigma_y()) - sigma_y()).norm() == doctest::Approx(0));

  // Partial trace of the GHZ projector onto the last two qubits.
  CVector g = ghz_vector();
  CMatrix ghz = g * g.adjoint();
  CMatrix bc = partial_trace(ghz, {2, 2, 2}, {1, 2});
  CMatrix expect = CMatrix::Zero(4, 4);
  expect(0, 0) = 0.5;
  expect(3, 3) = 0.5;
  CHECK((bc - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(partial_trace(ghz, {2, 2, 2}, {0}).trace() - Complex(1, 0)) < 1e-14);

  CHECK_THROWS_AS(partial_trace(ghz, {2, 2}, {0}), std::invalid_argument);
}

TEST_CASE("named measurements") {
  MeasurementPair sp = sigma_pair();
  CHECK((sp[0].effects[0] - (identity(2) + sigma_y()) / 2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((sp[1].effects[0] - (identity(2) - sigma_x()) / 2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(mutually_unbiased_qubit_pair(sp));

  MeasurementPair povm = qutrit_block_povm();
  CHECK(povm[0].effects[0](0, 1) == Complex(0, -0.5));
  for (const auto& m : povm)
    CHECK((m.effects[0] + m.effects[1] - identity(3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Born rule reproduces the noisy Mermin family") {
  MeasurementPair sp = sigma_pair();
  for (double V : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    TripartiteBox born = born_tripartite(ghz_mixed(V), sp, sp, sp);
    CHECK(max_abs_diff(born, noisy_mermin(V)) < 1e-12);
  }
  // 3x2x2 realization with the dichotomic POVMs on the first party.
  MeasurementPair povm = qutrit_block_povm();
  for (double V : {0.2, 0.5, 0.7}) {
    TripartiteBox born = born_tripartite(qutrit_mixed(V), povm, sp, sp);
    CHECK(max_abs_diff(born, noisy_mermin(V)) < 1e-12);
  }
  // Maximally mixed state: uniform box for any projective settings.
  DensityMatrix mixed(identity(8) / 8.0, "mixed");
  std::mt19937 rng(5);
  for (int t = 0; t < 5; ++t) {
    TripartiteBox born = born_tripartite(mixed, random_projective_pair(rng),
                                         random_projective_pair(rng),
                                         random_projective_pair(rng));
    CHECK(max_abs_diff(born, TripartiteBox::uniform()) < 1e-12);
  }
}

TEST_CASE("Born boxes are valid for random inputs") {
  std::mt19937 rng(17);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    CVector psi(8);
    for (int i = 0; i < 8; ++i) psi(i) = Complex(g(rng), g(rng));
    TripartiteBox born =
        born_tripartite(DensityMatrix::pure(psi), random_projective_pair(rng),
                        random_projective_pair(rng), random_projective_pair(rng));
    CHECK(validate_tripartite(born, 1e-9).ok());
  }
}

TEST_CASE("hidden pair states reproduce the conditional boxes") {
  MeasurementPair sp = sigma_pair();
  for (int lambda = 0; lambda < 4; ++lambda)
    for (int k = 1; k <= 20; ++k) {
      double V = kInvSqrt2 * k / 20.0;
      BipartiteBox born = born_bipartite(lhs_pair(lambda, V), sp, sp);
      CHECK(max_abs_diff(born, conditional_pair_box(lambda, V)) < 1e-12);
    }

  // Boundary: V = 1/sqrt(2) gives theta = pi/4, maximally entangled pieces.
  DensityMatrix boundary = lhs_pair(0, kInvSqrt2);
  CMatrix reduced = partial_trace(boundary.rho, {2, 2}, {0});
  CHECK((reduced - identity(2) / 2.0).cwiseAbs().maxCoeff() < 1e-12);

  // lhs_pair(0) at V = 1/sqrt(2): (|00> - (1+i)/sqrt2 |11>)/sqrt2.
  CVector expect = CVector::Zero(4);
  expect(0) = 1.0 / std::sqrt(2.0);
  expect(3) = -Complex(0.5, 0.5);
  CHECK((boundary.rho - expect * expect.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(lhs_pair(0, 0.8), std::domain_error);
  CHECK_THROWS_AS(lhs_pair(0, kInvSqrt2 + 1e-9), std::domain_error);
}

TEST_CASE("hidden qubit states reproduce the conditional tables") {
  MeasurementPair sp = sigma_pair();
  for (int lambda = 0; lambda < 4; ++lambda)
    for (int k = 1; k <= 20; ++k) {
      double V = 0.5 * k / 20.0;
      SingleBox born = born_single(lhs_qubit(lambda, V), sp);
      CHECK(max_abs_diff(born, conditional_qubit_table(lambda, V)) < 1e-12);
    }

  // lhs_qubit(0) at V = 1/2: theta = pi/4, (|0> + i|1>)/sqrt2.
  DensityMatrix q = lhs_qubit(0, 0.5);
  CVector expect(2);
  expect << 1.0 / std::sqrt(2.0), Complex(0, 1.0 / std::sqrt(2.0));
  CHECK((q.rho - expect * expect.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(lhs_qubit(0, 0.51), std::domain_error);
}

TEST_CASE("paper states are valid and pure where expected") {
  CHECK_THROWS_AS(ghz_mixed(1.5), std::domain_error);
  DensityMatrix pure = ghz_mixed(1.0);
  CHECK(std::abs((pure.rho * pure.rho).trace() - Complex(1, 0)) < 1e-12);
  CHECK(validate_density(qutrit_mixed(0.4).rho).ok());
}

TEST_CASE("assemblages") {
  // ghz_mixed with Alice measuring sigma_z: sigma_{0|x=0} =
  // V/2 |00><00| + (1-V)/8 I4.
  double V = 0.6;
  MeasurementPair alice_z = {DichotomicMeasurement::from_observable(sigma_z()),
                             DichotomicMeasurement::from_observable(sigma_x())};
  Assemblage asm_ = assemblage(ghz_mixed(V), alice_z, {2, 2, 2});
  CMatrix expect = CMatrix::Zero(4, 4);
  expect(0, 0) = V / 2;
  expect += (1 - V) / 8 * identity(4);
  CHECK((asm_.at(0, 0) - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(validate_assemblage(asm_).ok());

  // Product state: every element proportional to rho_BC.
  CMatrix rho_a = CMatrix::Zero(2, 2);
  rho_a(0, 0) = 0.7;
  rho_a(1, 1) = 0.3;
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  CMatrix rho_bc = phi * phi.adjoint();
  DensityMatrix product(tensor(rho_a, rho_bc), "product");
  Assemblage pa = assemblage(product, sigma_pair(), {2, 2, 2});
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      double weight = std::real(pa.at(x, a).trace());
      CHECK((pa.at(x, a) - weight * rho_bc).cwiseAbs().maxCoeff() < 1e-12);
    }

  // Setting-independence of the reduced state across random inputs.
  std::mt19937 rng(23);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    CVector psi(8);
    for (int i = 0; i < 8; ++i) psi(i) = Complex(g(rng), g(rng));
    Assemblage ra =
        assemblage(DensityMatrix::pure(psi), random_projective_pair(rng), {2, 2, 2});
    CHECK(validate_assemblage(ra).ok());
  }

  CHECK_THROWS_AS(assemblage(ghz_mixed(0.5), sigma_pair(), {2, 2}), std::invalid_argument);
}

TEST_CASE("density matrix JSON round trip") {
  // Serialization must invert exactly enough for the wire contract.
  for (const DensityMatrix& rho :
       {ghz_mixed(0.37), qutrit_mixed(0.8), lhs_pair(2, 0.5), lhs_qubit(1, 0.25)}) {
    auto j = tricorr::io::to_json(rho);
    DensityMatrix back = tricorr::io::density_from_json(j);
    CHECK((back.rho - rho.rho).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back.label == rho.label);
  }
}

TEST_CASE("arcsine realizability") {
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(tlm_realizable({s, s, s, -s}, true) == TlmVerdict::realizable);  // boundary
  CHECK(tlm_realizable({1, 1, 1, -1}, true) == TlmVerdict::not_realizable);  // PR
  CHECK(tlm_realizable({-2 * 0.5, -0.5, -0.5, 2 * 0.5}, true) ==
        TlmVerdict::not_realizable);
  CHECK(tlm_realizable({-2 * 0.4, -0.4, -0.4, 2 * 0.4}, true) == TlmVerdict::realizable);
  CHECK(tlm_realizable({0.9, 0.1, 0.3, 0.2}, false) == TlmVerdict::unknown);
  CHECK_THROWS_AS(tlm_realizable({1.5, 0, 0, 0}, true), std::domain_error);

  // Soundness: Born-rule correlations never flagged not_realizable.
  std::mt19937 rng(29);
  MeasurementPair sp = sigma_pair();
  for (int t = 0; t < 200; ++t) {
    DensityMatrix state =
        (t % 2 == 0) ? random_two_qubit_pure(rng) : random_max_entangled(rng);
    MeasurementPair mb = random_projective_pair(rng);
    MeasurementPair mc = random_projective_pair(rng);
    BipartiteBox box = born_bipartite(state, mb, mc);
    CHECK(tlm_realizable(box) != TlmVerdict::not_realizable);
  }

  // Bisection of the flip along c(V) = (-2V, -V, -V, 2V).
  double lo = 0.05, hi = 0.95;
  for (int it = 0; it < 60; ++it) {
    double mid = (lo + hi) / 2;
    if (tlm_realizable({-2 * mid, -mid, -mid, 2 * mid}, true) == TlmVerdict::realizable)
      lo = mid;
    else
      hi = mid;
  }
  CHECK(std::abs((lo + hi) / 2 - kInvSqrt5) < 1e-6);
}
