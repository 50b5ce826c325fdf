#pragma once

#include "fracfem/dense_eigen.hpp"
#include "fracfem/elliptic.hpp"
#include "fracfem/mixed.hpp"
#include "fracfem/piecewise_field.hpp"

#include <array>
#include <vector>

namespace fracfem {

using ElementMoments = std::vector<std::array<double, 3>>;

// Quadrature route: element-wise integration of the squared difference.
double l2_error(const Mesh& mesh, const PiecewiseLinearField& uh, const ScalarFunction& u, int degree = 6);
double h1_seminorm_error(const Mesh& mesh, const PiecewiseLinearField& uh, const VectorFunction& grad, int degree = 6);
// max over a 15-point lattice per element (barycentric coordinates i/4, i + j + k = 4)
double maxnorm_error(const Mesh& mesh, const PiecewiseLinearField& uh, const ScalarFunction& u);
double flux_l2_error(const MixedSystem& sys, const Vector& sigma, const VectorFunction& grad, int degree = 6);

// Projection route, exact for series data: ||uh||^2 - 2 (uh, u) + ||u||^2 with the
// element moments int_K lambda_k u and the exact norm of u.
double l2_error_moments(const Mesh& mesh, const PiecewiseLinearField& uh, const ElementMoments& u_moments,
                        double u_norm_sq);
// Same for the gradient of an H^1_0-conforming field; needs the moments of -Laplace u.
double h1_error_moments(const Mesh& mesh, const PiecewiseLinearField& uh, const ElementMoments& lu_moments,
                        double grad_norm_sq);
// ||sigma_h||^2 + 2 (div sigma_h, u) + ||grad u||^2
double flux_error_moments(const MixedSystem& sys, const Vector& sigma, const ElementMoments& u_moments,
                          double grad_norm_sq);

double field_l2_norm(const Mesh& mesh, const PiecewiseLinearField& f);

// (sum_j lambda_j^r (v, v_j)_M^2)^{1/2}
double discrete_sobolev_norm(const SpectralBasis& basis, const SparseMatrix& mass, const Vector& v, double r);

}  // namespace fracfem
