#pragma once

#include "fracfem/dense_eigen.hpp"
#include "fracfem/elliptic.hpp"
#include "fracfem/piecewise_field.hpp"

#include <Eigen/SparseLU>

#include <iosfwd>
#include <memory>
#include <vector>

namespace fracfem {

// Raviart-Thomas RT_l x discontinuous P_l for -Laplace, l in {0, 1}.
//
// Flux DOFs: for every edge e, int_e sigma.n_e q_j ds with q_0 = 1, q_1 = 2s - 1,
// where s runs from the lower-index vertex; n_e points from the lower-index to the
// higher-index triangle (outward on the boundary). For l = 1 each triangle adds
// int_K sigma_x and int_K sigma_y. Scalar DOFs: cell value (l = 0) or the
// coefficients of the barycentric basis (l = 1).
class MixedSystem {
 public:
  MixedSystem(const Mesh& mesh, int index, Exec exec = default_exec());
  MixedSystem(Mesh&&, int, Exec = default_exec()) = delete;  // keeps a pointer to the mesh

  int index() const { return index_; }
  const Mesh& mesh() const { return *mesh_; }
  int flux_size() const { return static_cast<int>(D.rows()); }
  int scalar_size() const { return static_cast<int>(A.rows()); }
  int local_flux_size() const { return index_ == 0 ? 3 : 8; }
  int local_scalar_size() const { return index_ == 0 ? 1 : 3; }

  SparseMatrix D;  // (psi_i, psi_j)
  SparseMatrix B;  // (v_i, div psi_j), scalar x flux
  SparseMatrix A;  // (v_i, v_j)

  // global flux DOFs of triangle t in local order
  const std::vector<int>& local_flux_dofs(int t) const { return flux_dofs_[t]; }
  int scalar_dof(int t, int k) const { return local_scalar_size() * t + k; }

  // flux of coefficient vector sigma at barycentric point of triangle t
  Point flux_at(const Vector& sigma, int t, const std::array<double, 3>& bary) const;
  // divergence of the local basis function j on triangle t at a barycentric point
  double basis_divergence(int t, int j, const std::array<double, 3>& bary) const;
  Point basis_value(int t, int j, const std::array<double, 3>& bary) const;

  PiecewiseLinearField scalar_field(const Vector& u) const;
  PiecewiseLinearField divergence_field(const Vector& sigma) const;

  // (f, v_i) by degree-6 quadrature, or from exact element moments int_K lambda_k f
  Vector scalar_load(const ScalarFunction& f) const;
  Vector scalar_load_from_moments(const std::vector<std::array<double, 3>>& moments) const;
  // L2 projection onto the scalar space
  Vector scalar_project(const ScalarFunction& f) const;
  Vector scalar_project_from_moments(const std::vector<std::array<double, 3>>& moments) const;
  Vector solve_scalar_mass(const Vector& rhs) const;
  Vector solve_flux_mass(const Vector& rhs) const;

 private:
  Point prime(int m, Point xh) const;
  double prime_div(int m, Point xh) const;
  Point scaled(int t, Point x) const;

  const Mesh* mesh_;
  int index_;
  std::vector<std::vector<int>> flux_dofs_;
  std::vector<DenseMatrix> coeff_;  // prime -> nodal basis per triangle
  std::vector<Point> center_;
  std::vector<double> scale_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> d_llt_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> a_llt_;
};

struct MixedSolution {
  Vector u;
  Vector sigma;
};

// Saddle-point solver for [[D, B^T], [B, -w A]], factorized once per shift w.
class MixedSolver {
 public:
  explicit MixedSolver(const MixedSystem& sys, double shift = 0.0);
  // D sigma + B^T u = g, B sigma - w A u = d
  MixedSolution solve(const Vector& g, const Vector& d) const;
  double shift() const { return shift_; }
  // refactorizes with the symbolic analysis of the first shift
  void set_shift(double shift);

 private:
  void factorize();

  const MixedSystem* sys_;
  double shift_;
  std::vector<Triplet> fixed_;
  Eigen::SparseLU<SparseMatrix> lu_;
  bool analyzed_ = false;
};

// (T_h f, S_h f): -(div sigma, v) = (f, v), (sigma, w) + (u, div w) = 0
MixedSolution mixed_elliptic_solve(const MixedSystem& sys, const Vector& scalar_load);

// Block residuals of a mixed elliptic solution relative to the load norm.
double mixed_elliptic_residual(const MixedSystem& sys, const MixedSolution& s, const Vector& scalar_load);

// Intermediate mixed projection of (u, sigma)
MixedSolution mixed_projection(const MixedSystem& sys, const ScalarFunction& u, const VectorFunction& sigma);

// ||D sigma + B^T u|| / (||D sigma|| + ||B^T u||), the discrete relation (sigma, w) + (u, div w) = 0
double flux_relation_residual(const MixedSystem& sys, const Vector& u, const Vector& sigma);

// ||theta||_inf / (|ln h| ||z||) for z = -D^{-1} B^T theta; 0 when z = 0
double maxnorm_transfer_check(const MixedSystem& sys, const Vector& theta);

// h ||div xi|| / ||xi||; 0 for xi = 0
double inverse_estimate_check(const MixedSystem& sys, const Vector& xi);

// Schur complement S = B D^{-1} B^T against A; A is block diagonal.
SpectralBasis mixed_eigendecompose(const MixedSystem& sys, int cap = kDefaultEigenCap);

// flux from scalar coefficients through D sigma = -B^T u
Vector flux_from_scalar(const MixedSystem& sys, const Vector& u);

void export_mixed(std::ostream& os, const MixedSystem& sys);

}  // namespace fracfem
