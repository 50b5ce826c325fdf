#pragma once

#include "fracfem/dense_eigen.hpp"
#include "fracfem/elliptic.hpp"
#include "fracfem/fractional.hpp"
#include "fracfem/kernels.hpp"
#include "fracfem/mixed.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace fracfem {

// u_h(t) = sum_j E_alpha(-lambda_j t^alpha) (u0, v_j)_M v_j
class SpectralPropagator {
 public:
  SpectralPropagator(const SpectralBasis& basis, const SparseMatrix& mass, const FractionalOrder& order,
                     const Vector& u0, Exec exec = default_exec());

  const Vector& initial_modes() const { return modes_; }
  // sum_j c_j^2, equal to ||u0||_M^2 when u0 lies in the span of the basis
  double modal_energy() const { return modes_.squaredNorm(); }
  Vector modes_at(double t) const;
  Vector solve(double t) const;

 private:
  const SpectralBasis* basis_;
  double alpha_;
  Vector modes_;
  Exec exec_;
};

Vector spectral_solve(const SpectralBasis& basis, const SparseMatrix& mass, const FractionalOrder& order,
                      const Vector& u0, double t, Exec exec = default_exec());

// The same semidiscrete solution E_alpha(-t^alpha M^{-1} K) u0 by Laplace inversion on a parabolic contour:
// one complex sparse solve per node, no eigenbasis. Mixed systems also return the flux.
class ContourPropagator {
 public:
  ContourPropagator(const DiscreteEllipticPair& pair, const FractionalOrder& order, const Vector& u0,
                    Exec exec = default_exec(), int nodes = kDefaultNodes);
  ContourPropagator(const MixedSystem& sys, const FractionalOrder& order, const Vector& u0,
                    Exec exec = default_exec(), int nodes = kDefaultNodes);

  static constexpr int kDefaultNodes = 16;

  // scalar solution at t > 0; the flux of the mixed system is stored in *sigma when given
  Vector solve(double t, Vector* sigma = nullptr) const;

 private:
  const DiscreteEllipticPair* pair_ = nullptr;
  const MixedSystem* mixed_ = nullptr;
  double alpha_;
  Vector u0_;
  Vector Mu0_;
  Exec exec_;
  int nodes_;
};

// M P(d_t) u + K u = F(t), one implicit L1 step at a time: (w M + K) u = rhs
class SteppingOperator {
 public:
  virtual ~SteppingOperator() = default;
  virtual int size() const = 0;
  virtual const SparseMatrix& mass() const = 0;
  virtual void set_shift(double w) = 0;
  virtual Vector solve(const Vector& rhs) = 0;
  // flux belonging to the last solve, empty for primal flavors
  virtual Vector last_flux() const { return {}; }
};

class EllipticStepping : public SteppingOperator {
 public:
  explicit EllipticStepping(const DiscreteEllipticPair& pair);
  int size() const override { return pair_->size(); }
  const SparseMatrix& mass() const override { return pair_->mass; }
  void set_shift(double w) override;
  Vector solve(const Vector& rhs) override;

 private:
  const DiscreteEllipticPair* pair_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
  double shift_ = -1.0;
  bool analyzed_ = false;
};

// Scalar unknowns of the mixed system; the flux is recovered from the saddle-point solve.
class MixedStepping : public SteppingOperator {
 public:
  explicit MixedStepping(const MixedSystem& sys);
  int size() const override { return sys_->scalar_size(); }
  const SparseMatrix& mass() const override { return sys_->A; }
  void set_shift(double w) override;
  Vector solve(const Vector& rhs) override;
  Vector last_flux() const override { return sigma_; }

 private:
  const MixedSystem* sys_;
  std::unique_ptr<MixedSolver> solver_;
  Vector sigma_;
};

// load vector F(t)
using LoadFunction = std::function<Vector(double)>;

// Solution history u^0..u^n of the L1 scheme on a graded grid.
class EvolutionState {
 public:
  EvolutionState(SteppingOperator& op, const FractionalOrder& order, const TimeGrid& grid, const Vector& u0,
                 LoadFunction load = {}, Exec exec = default_exec());

  void step();
  void run();
  bool done() const { return step_ == grid_.steps(); }
  int step_index() const { return step_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<Vector>& history() const { return u_; }
  const Vector& current() const { return u_.back(); }
  // fluxes at steps 1..n for mixed operators
  const std::vector<Vector>& flux_history() const { return sigma_; }

 private:
  SteppingOperator* op_;
  TimeGrid grid_;
  L1Weights weights_;
  LoadFunction load_;
  Exec exec_;
  int step_ = 0;
  std::vector<Vector> u_;
  std::vector<Vector> increments_;
  std::vector<Vector> sigma_;
  std::vector<double> row_;
  Vector history_;
};

EvolutionState l1_evolve(SteppingOperator& op, const FractionalOrder& order, const TimeGrid& grid, const Vector& u0,
                         LoadFunction load = {}, Exec exec = default_exec());

// L1 solution of P(d_t) y + lambda y = g(t), y(0) = y0, at every grid node
std::vector<double> scalar_l1_evolve(const FractionalOrder& order, const TimeGrid& grid, double lambda, double y0,
                                     const std::function<double(double)>& g = {});

// t, u_0..u_{n-1}[, s_0..s_{m-1}][, error columns]
void write_trajectory_csv(std::ostream& os, const std::vector<double>& times, const std::vector<Vector>& u,
                          const std::vector<Vector>& sigma = {},
                          const std::vector<std::pair<std::string, std::vector<double>>>& extra = {});

}  // namespace fracfem
