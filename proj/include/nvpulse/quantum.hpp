#pragma once

// Dense complex linear algebra for the few-spin Hilbert spaces used here
// (dimension <= 16). Operators and states are immutable values.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "nvpulse/error.hpp"

namespace nvpulse::quantum {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m);

  static Operator zero(std::size_t dim);
  static Operator identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  Complex trace() const { return m_.trace(); }
  double norm() const { return m_.norm(); }  // Frobenius

  // ||H - H^dagger||_F <= tol * max(||H||_F, 1).
  bool is_hermitian(double tol = kHermitianTolerance) const;
  // ||U^dagger U - I||_F.
  double unitarity_error() const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= Complex(s, 0.0); }

 private:
  Matrix m_;
};

// Density matrix: trace one, positive semidefinite (checked at construction).
class State {
 public:
  explicit State(Operator rho);
  static State maximally_mixed(std::size_t dim);

  std::size_t dim() const noexcept { return rho_.dim(); }
  const Operator& density() const noexcept { return rho_; }
  double min_eigenvalue() const;

  // rho -> U rho U^dagger
  State evolved(const Operator& u) const;

 private:
  struct Unchecked {};
  State(Operator rho, Unchecked) : rho_(std::move(rho)) {}
  Operator rho_;
};

// Pauli matrices and spin-1/2 operators (I = sigma / 2).
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
Operator spin_x();
Operator spin_y();
Operator spin_z();

// Kronecker product.
Operator tensor(const Operator& a, const Operator& b);
Operator tensor(std::span<const Operator> factors);

// Places `op` on tensor slot `slot` of a register of spin-1/2 subsystems,
// identity elsewhere. Slot 0 is the most significant factor.
Operator embed(const Operator& op, std::size_t slot, std::size_t n_slots);

struct HermitianEigen {
  Eigen::VectorXd values;   // ascending
  Matrix vectors;           // columns
  double spread() const { return values.size() ? values(values.size() - 1) - values(0) : 0.0; }
};

// Throws NonHermitianInput.
HermitianEigen eigen_hermitian(const Operator& h);

// exp(-i h dt) via eigendecomposition of h.
Operator expm_hermitian(const Operator& h, double dt);
Operator expm_from_eigen(const HermitianEigen& eig, double dt);

// Closest unitary in Frobenius norm (polar factor). Used to strip roundoff
// accumulated over long products of exact exponentials.
Operator nearest_unitary(const Operator& u);

// Tr(rho * obs), real part. Throws DimensionMismatch.
double expectation(const State& rho, const Operator& obs);

// Time-dependent operator, e.g. H(t). `dim` is fixed for all t.
struct TimeDependentOperator {
  std::size_t dim = 0;
  std::function<Operator(double)> eval;

  Operator operator()(double t) const { return eval(t); }
};

}  // namespace nvpulse::quantum
