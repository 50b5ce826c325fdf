#include "fracfem/evolution.hpp"

#include "fracfem/summation.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>

namespace fracfem {

SpectralPropagator::SpectralPropagator(const SpectralBasis& basis, const SparseMatrix& mass,
                                       const FractionalOrder& order, const Vector& u0, Exec exec)
    : basis_(&basis), alpha_(order.alpha()), exec_(exec) {
  if (order.multi_term()) throw Unsupported("spectral propagation is single-term only; use the l1 path");
  if (u0.size() != basis.eigenvectors.rows()) throw InvalidParameter("initial vector does not match the basis");
  const Vector Mu = mass * u0;
  modes_ = basis.eigenvectors.transpose() * Mu;
}

Vector SpectralPropagator::modes_at(double t) const {
  if (!(t >= 0.0)) throw InvalidParameter("spectral propagation needs t >= 0");
  const int n = basis_->size();
  Vector d(n);
  const double ta = std::pow(t, alpha_);
  for_each_index(exec_, n, [&](int j) {
    d[j] = modes_[j] * mittag_leffler(alpha_, 1.0, -basis_->eigenvalues[j] * ta);
  });
  return d;
}

Vector SpectralPropagator::solve(double t) const {
  Vector out(basis_->eigenvectors.rows());
  modal_synthesis(exec_, basis_->eigenvectors, modes_at(t), out);
  return out;
}

Vector spectral_solve(const SpectralBasis& basis, const SparseMatrix& mass, const FractionalOrder& order,
                      const Vector& u0, double t, Exec exec) {
  return SpectralPropagator(basis, mass, order, u0, exec).solve(t);
}

namespace {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexSparse = Eigen::SparseMatrix<Complex>;

ComplexSparse shifted(const SparseMatrix& K, const SparseMatrix& M, Complex w) {
  ComplexSparse S = K.cast<Complex>() + w * M.cast<Complex>();
  S.makeCompressed();
  return S;
}

ComplexVector lu_solve(const ComplexSparse& S, const ComplexVector& rhs) {
  Eigen::SparseLU<ComplexSparse> lu;
  lu.compute(S);
  if (lu.info() != Eigen::Success) throw SolverError("contour node factorization failed");
  return lu.solve(rhs);
}

}  // namespace

ContourPropagator::ContourPropagator(const DiscreteEllipticPair& pair, const FractionalOrder& order, const Vector& u0,
                                     Exec exec, int nodes)
    : pair_(&pair), alpha_(order.alpha()), u0_(u0), exec_(exec), nodes_(nodes) {
  if (order.multi_term()) throw Unsupported("contour propagation is single-term only; use the l1 path");
  if (u0.size() != pair.size()) throw InvalidParameter("initial vector does not match the operator size");
  if (nodes < 4) throw InvalidParameter("contour needs at least 4 nodes");
  Mu0_ = pair.mass * u0;
}

ContourPropagator::ContourPropagator(const MixedSystem& sys, const FractionalOrder& order, const Vector& u0,
                                     Exec exec, int nodes)
    : mixed_(&sys), alpha_(order.alpha()), u0_(u0), exec_(exec), nodes_(nodes) {
  if (order.multi_term()) throw Unsupported("contour propagation is single-term only; use the l1 path");
  if (u0.size() != sys.scalar_size()) throw InvalidParameter("initial vector does not match the operator size");
  if (nodes < 4) throw InvalidParameter("contour needs at least 4 nodes");
  Mu0_ = sys.A * u0;
}

// u(t) = (1 / 2 pi i) int e^s s^{a-1} (s^a M + t^a K)^{-1} M u0 ds on s = mu (1 + iv)^2
Vector ContourPropagator::solve(double t, Vector* sigma) const {
  if (!(t >= 0.0)) throw InvalidParameter("contour propagation needs t >= 0");
  if (t == 0.0) {
    if (sigma) *sigma = mixed_ ? flux_from_scalar(*mixed_, u0_) : Vector();
    return u0_;
  }
  const int N = nodes_;
  const double h = 3.0 / N;
  const double mu = std::numbers::pi * N / 12.0;
  const double ta = std::pow(t, alpha_);
  const int ns = static_cast<int>(u0_.size());
  const int nf = mixed_ ? mixed_->flux_size() : 0;
  std::vector<ComplexVector> terms(N + 1);
  for_each_index(exec_, N + 1, [&](int k) {
    const Complex v(1.0, k * h);
    const Complex s = mu * v * v;
    const Complex ds = 2.0 * mu * Complex(0.0, 1.0) * v;
    const Complex sa = std::pow(s, alpha_);
    const Complex w = sa / ta;
    const Complex scale = std::exp(s) * ds * sa / s / ta;
    ComplexVector x;
    if (pair_) {
      x = lu_solve(shifted(pair_->stiffness, pair_->mass, w), Mu0_.cast<Complex>());
    } else {
      // [[D, B^T], [B, -w A]] (sigma, u) = (0, -A u0)
      std::vector<Eigen::Triplet<Complex>> trip;
      const SparseMatrix& D = mixed_->D;
      const SparseMatrix& B = mixed_->B;
      const SparseMatrix& A = mixed_->A;
      trip.reserve(D.nonZeros() + 2 * B.nonZeros() + A.nonZeros());
      for (int c = 0; c < D.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(D, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
      for (int c = 0; c < B.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(B, c); it; ++it) {
          trip.emplace_back(nf + it.row(), it.col(), it.value());
          trip.emplace_back(it.col(), nf + it.row(), it.value());
        }
      for (int c = 0; c < A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(A, c); it; ++it)
          trip.emplace_back(nf + it.row(), nf + it.col(), -w * it.value());
      ComplexSparse S(nf + ns, nf + ns);
      S.setFromTriplets(trip.begin(), trip.end());
      S.makeCompressed();
      ComplexVector rhs = ComplexVector::Zero(nf + ns);
      rhs.tail(ns) = -Mu0_.cast<Complex>();
      x = lu_solve(S, rhs);
    }
    terms[k] = scale * x;
  });
  Vector out = Vector::Zero(nf + ns);
  for (int k = 0; k <= N; ++k) {
    const double c = k == 0 ? 0.5 : 1.0;
    out += c * terms[k].imag();
  }
  out *= h / std::numbers::pi;
  if (!out.allFinite()) throw SolverError("contour propagation produced non-finite values");
  if (sigma) *sigma = mixed_ ? Vector(out.head(nf)) : Vector();
  return out.tail(ns);
}

EllipticStepping::EllipticStepping(const DiscreteEllipticPair& pair) : pair_(&pair) {}

void EllipticStepping::set_shift(double w) {
  if (w == shift_) return;
  SparseMatrix S = pair_->stiffness + w * pair_->mass;
  if (!analyzed_) {
    llt_.analyzePattern(S);
    analyzed_ = true;
  }
  llt_.factorize(S);
  if (llt_.info() != Eigen::Success) throw SolverError("step matrix Cholesky failed");
  shift_ = w;
}

Vector EllipticStepping::solve(const Vector& rhs) { return llt_.solve(rhs); }

MixedStepping::MixedStepping(const MixedSystem& sys) : sys_(&sys) {}

void MixedStepping::set_shift(double w) {
  if (!solver_)
    solver_ = std::make_unique<MixedSolver>(*sys_, w);
  else if (solver_->shift() != w)
    solver_->set_shift(w);
}

// B sigma - w A u = -rhs together with D sigma + B^T u = 0 gives (w A + B D^{-1} B^T) u = rhs
Vector MixedStepping::solve(const Vector& rhs) {
  MixedSolution s = solver_->solve(Vector::Zero(sys_->flux_size()), -rhs);
  sigma_ = std::move(s.sigma);
  return s.u;
}

EvolutionState::EvolutionState(SteppingOperator& op, const FractionalOrder& order, const TimeGrid& grid,
                               const Vector& u0, LoadFunction load, Exec exec)
    : op_(&op), grid_(grid), weights_(order, grid), load_(std::move(load)), exec_(exec) {
  if (u0.size() != op.size()) throw InvalidParameter("initial vector does not match the operator size");
  u_.reserve(grid.steps() + 1);
  increments_.reserve(grid.steps());
  u_.push_back(u0);
  row_.resize(grid.steps());
}

void EvolutionState::step() {
  if (done()) throw InvalidParameter("evolution already reached the final time");
  const int n = step_ + 1;
  weights_.row(n, row_);
  const double w = row_[n - 1];
  l1_history(exec_, std::span<const double>(row_.data(), n - 1), increments_, n - 1, history_);
  if (n == 1) history_.setZero(op_->size());
  Vector rhs = op_->mass() * (w * u_.back() - history_);
  if (load_) rhs += load_(grid_.t(n));
  op_->set_shift(w);
  Vector un = op_->solve(rhs);
  if (!un.allFinite()) throw SolverError("non-finite solution at time step " + std::to_string(n));
  increments_.push_back(un - u_.back());
  u_.push_back(std::move(un));
  Vector s = op_->last_flux();
  if (s.size() > 0) sigma_.push_back(std::move(s));
  step_ = n;
}

void EvolutionState::run() {
  while (!done()) step();
}

EvolutionState l1_evolve(SteppingOperator& op, const FractionalOrder& order, const TimeGrid& grid, const Vector& u0,
                         LoadFunction load, Exec exec) {
  EvolutionState state(op, order, grid, u0, std::move(load), exec);
  state.run();
  return state;
}

std::vector<double> scalar_l1_evolve(const FractionalOrder& order, const TimeGrid& grid, double lambda, double y0,
                                     const std::function<double(double)>& g) {
  L1Weights weights(order, grid);
  const int N = grid.steps();
  std::vector<double> y(N + 1), inc(N), row(N);
  y[0] = y0;
  for (int n = 1; n <= N; ++n) {
    weights.row(n, row);
    CompensatedSum h;
    for (int k = 0; k < n - 1; ++k) h.add(row[k] * inc[k]);
    const double w = row[n - 1];
    double rhs = w * y[n - 1] - h.value();
    if (g) rhs += g(grid.t(n));
    y[n] = rhs / (w + lambda);
    inc[n - 1] = y[n] - y[n - 1];
  }
  return y;
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& times, const std::vector<Vector>& u,
                          const std::vector<Vector>& sigma,
                          const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
  if (u.size() != times.size()) throw InvalidParameter("trajectory: times and states differ in length");
  if (!sigma.empty() && sigma.size() != times.size()) throw InvalidParameter("trajectory: flux history length");
  const int nu = u.empty() ? 0 : static_cast<int>(u[0].size());
  const int ns = sigma.empty() ? 0 : static_cast<int>(sigma[0].size());
  os << 't';
  for (int i = 0; i < nu; ++i) os << ",u" << i;
  for (int i = 0; i < ns; ++i) os << ",s" << i;
  for (const auto& [name, col] : extra) os << ',' << name;
  os << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < times.size(); ++n) {
    os << times[n];
    for (int i = 0; i < nu; ++i) os << ',' << u[n][i];
    for (int i = 0; i < ns; ++i) os << ',' << sigma[n][i];
    for (const auto& [name, col] : extra) os << ',' << col[n];
    os << '\n';
  }
}

}  // namespace fracfem
