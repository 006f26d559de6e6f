#include <doctest.h>

#include <random>

#include "nvpulse/error.hpp"
#include "nvpulse/quantum.hpp"
#include "oracles.hpp"

using namespace nvpulse;
using namespace nvpulse::quantum;

TEST_CASE("Pauli algebra") {
  const Complex i(0.0, 1.0);
  CHECK(((sigma_x() * sigma_y()) - i * sigma_z()).norm() < 1e-15);
  CHECK(((sigma_y() * sigma_z()) - i * sigma_x()).norm() < 1e-15);
  CHECK(((sigma_z() * sigma_z()) - Operator::identity(2)).norm() < 1e-15);
  CHECK((spin_x() - 0.5 * sigma_x()).norm() < 1e-15);
}

TEST_CASE("tensor matches the Kronecker oracle") {
  std::mt19937 rng(7);
  const auto a = oracle::random_hermitian(2, rng);
  const auto b = oracle::random_hermitian(4, rng);
  CHECK((tensor(Operator(a), Operator(b)).matrix() - oracle::kron(a, b)).norm() < 1e-14);

  const std::vector<Operator> three{sigma_x(), sigma_y(), sigma_z()};
  const auto ref = oracle::kron(oracle::kron(sigma_x().matrix(), sigma_y().matrix()), sigma_z().matrix());
  CHECK((tensor(three).matrix() - ref).norm() < 1e-14);
}

TEST_CASE("embed places the operator in the requested slot") {
  const auto id = Operator::identity(2);
  CHECK((embed(sigma_z(), 0, 3) - tensor(std::vector{sigma_z(), id, id})).norm() < 1e-15);
  CHECK((embed(sigma_x(), 2, 3) - tensor(std::vector{id, id, sigma_x()})).norm() < 1e-15);
  CHECK_THROWS_AS(embed(sigma_x(), 3, 3), DimensionMismatch);
}

TEST_CASE("expm_hermitian agrees with the power series and is unitary") {
  std::mt19937 rng(11);
  for (int n : {2, 4, 8}) {
    const auto h = oracle::random_hermitian(n, rng, 3.0);
    for (double dt : {1e-3, 0.7, 5.0}) {
      const auto u = expm_hermitian(Operator(h), dt);
      CHECK((u.matrix() - oracle::expm_series(h, dt)).norm() < 1e-11);
      CHECK(u.unitarity_error() < 1e-12);
    }
  }
}

TEST_CASE("propagators compose: U(t) U(s) = U(t + s)") {
  std::mt19937 rng(3);
  const Operator h(oracle::random_hermitian(4, rng));
  CHECK((expm_hermitian(h, 0.3) * expm_hermitian(h, 1.1) - expm_hermitian(h, 1.4)).norm() < 1e-12);
}

TEST_CASE("non-Hermitian input is rejected") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_FALSE(Operator(m).is_hermitian());
  CHECK_THROWS_AS(eigen_hermitian(Operator(m)), NonHermitianInput);
  CHECK_THROWS_AS(expm_hermitian(Operator(m), 1.0), NonHermitianInput);
}

TEST_CASE("eigen_hermitian spread") {
  const auto eig = eigen_hermitian(2.0 * sigma_z());
  CHECK(eig.spread() == doctest::Approx(4.0));
}

TEST_CASE("State validation") {
  CHECK_NOTHROW(State(0.5 * Operator::identity(2)));
  CHECK_THROWS_AS(State(Operator::identity(2)), InvalidState);          // trace 2
  CHECK_THROWS_AS(State(0.5 * (Operator::identity(2) + 2.0 * sigma_z())), InvalidState);  // negative eigenvalue
  Matrix m = 0.5 * Matrix::Identity(2, 2);
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(State(Operator(m)), InvalidState);
  const auto mixed = State::maximally_mixed(4);
  CHECK(mixed.density().trace().real() == doctest::Approx(1.0));
  CHECK(mixed.min_eigenvalue() == doctest::Approx(0.25));
}

TEST_CASE("expectation values") {
  const State plus(0.5 * (Operator::identity(2) + sigma_x()));
  CHECK(expectation(plus, sigma_x()) == doctest::Approx(1.0));
  CHECK(expectation(plus, sigma_z()) == doctest::Approx(0.0));
  CHECK_THROWS_AS(expectation(plus, Operator::identity(4)), DimensionMismatch);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::complex<double>(0.0, 1.0);
  CHECK_THROWS_AS(expectation(plus, Operator(m)), NonHermitianInput);

  // Precession about z: <sigma_x>(t) = cos(w t).
  const double w = 2.3, t = 0.9;
  const auto rho = plus.evolved(expm_hermitian(0.5 * w * sigma_z(), t));
  CHECK(expectation(rho, sigma_x()) == doctest::Approx(std::cos(w * t)).epsilon(1e-13));
}

TEST_CASE("nearest_unitary removes small non-unitary noise") {
  std::mt19937 rng(5);
  const Operator u = expm_hermitian(Operator(oracle::random_hermitian(4, rng)), 1.0);
  Matrix noisy = u.matrix();
  noisy(1, 2) += 1e-9;
  const auto fixed = nearest_unitary(Operator(noisy));
  CHECK(fixed.unitarity_error() < 1e-14);
  CHECK((fixed - u).norm() < 2e-9);
}
