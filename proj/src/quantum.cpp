#include "nvpulse/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nvpulse::quantum {

namespace {

constexpr Complex kI(0.0, 1.0);

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw DimensionMismatch("operator must be a non-empty square matrix");
  }
}

Operator Operator::zero(std::size_t dim) {
  return Operator(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Operator Operator::identity(std::size_t dim) {
  return Operator(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

bool Operator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).norm() <= tol * std::max(m_.norm(), 1.0);
}

double Operator::unitarity_error() const {
  return (m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols())).norm();
}

Operator& Operator::operator+=(const Operator& o) {
  if (dim() != o.dim()) throw DimensionMismatch("operator sum: dimension mismatch");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  if (dim() != o.dim()) throw DimensionMismatch("operator difference: dimension mismatch");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator product: dimension mismatch");
  return Operator(a.m_ * b.m_);
}

State::State(Operator rho) : rho_(std::move(rho)) {
  if (!rho_.is_hermitian()) throw InvalidState("density matrix is not Hermitian");
  const double tr_err = std::abs(rho_.trace() - Complex(1.0, 0.0));
  if (tr_err > 1e-12) throw InvalidState("density matrix trace differs from 1 by " + std::to_string(tr_err));
  if (min_eigenvalue() < -1e-12) throw InvalidState("density matrix has a negative eigenvalue");
}

State State::maximally_mixed(std::size_t dim) {
  return State(Operator::identity(dim) * Complex(1.0 / static_cast<double>(dim), 0.0), Unchecked{});
}

double State::min_eigenvalue() const {
  return eigen_hermitian(rho_).values(0);
}

State State::evolved(const Operator& u) const {
  if (u.dim() != dim()) throw DimensionMismatch("propagator and state dimensions differ");
  Matrix r = u.matrix() * rho_.matrix() * u.matrix().adjoint();
  // Re-symmetrise; the product is Hermitian only up to rounding.
  r = 0.5 * (r + r.adjoint()).eval();
  return State(Operator(std::move(r)), Unchecked{});
}

Operator sigma_x() { return Operator(mat2(0.0, 1.0, 1.0, 0.0)); }
Operator sigma_y() { return Operator(mat2(0.0, -kI, kI, 0.0)); }
Operator sigma_z() { return Operator(mat2(1.0, 0.0, 0.0, -1.0)); }
Operator spin_x() { return 0.5 * sigma_x(); }
Operator spin_y() { return 0.5 * sigma_y(); }
Operator spin_z() { return 0.5 * sigma_z(); }

Operator tensor(const Operator& a, const Operator& b) {
  const Eigen::Index da = a.matrix().rows();
  const Eigen::Index db = b.matrix().rows();
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
    }
  }
  return Operator(std::move(out));
}

Operator tensor(std::span<const Operator> factors) {
  if (factors.empty()) throw DimensionMismatch("tensor of an empty factor list");
  Operator out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

Operator embed(const Operator& op, std::size_t slot, std::size_t n_slots) {
  if (slot >= n_slots) throw DimensionMismatch("embed: slot out of range");
  Operator out = slot == 0 ? op : Operator::identity(2);
  for (std::size_t s = 1; s < n_slots; ++s) {
    out = tensor(out, s == slot ? op : Operator::identity(2));
  }
  return out;
}

HermitianEigen eigen_hermitian(const Operator& h) {
  if (!h.is_hermitian()) throw NonHermitianInput("operator is not Hermitian");
  const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

Operator expm_from_eigen(const HermitianEigen& eig, double dt) {
  const Eigen::VectorXcd phases =
      (eig.values.cast<Complex>() * Complex(0.0, -dt)).array().exp().matrix();
  return Operator(eig.vectors * phases.asDiagonal() * eig.vectors.adjoint());
}

Operator expm_hermitian(const Operator& h, double dt) {
  return expm_from_eigen(eigen_hermitian(h), dt);
}

double expectation(const State& rho, const Operator& obs) {
  if (rho.dim() != obs.dim()) throw DimensionMismatch("expectation: state and observable dimensions differ");
  const Complex v = (rho.density().matrix() * obs.matrix()).trace();
  // The imaginary part is rounding noise for Hermitian observables.
  if (std::abs(v.imag()) > 1e-10) throw NonHermitianInput("expectation value has an imaginary part");
  return v.real();
}

Operator nearest_unitary(const Operator& u) {
  const Eigen::JacobiSVD<Matrix> svd(u.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Operator(svd.matrixU() * svd.matrixV().adjoint());
}

}  // namespace nvpulse::quantum
