#include "fracfem/errors.hpp"

#include "fracfem/quadrature.hpp"
#include "fracfem/summation.hpp"

#include <algorithm>
#include <cmath>

namespace fracfem {

namespace {

double checked_sqrt(double s) { return std::sqrt(std::max(0.0, s)); }

}  // namespace

double l2_error(const Mesh& mesh, const PiecewiseLinearField& uh, const ScalarFunction& u, int degree) {
  const QuadratureRule& q = element_quadrature(degree);
  CompensatedSum s;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    for (int i = 0; i < q.size(); ++i) {
      const double d = uh.eval(q.points[i], t) - u(mesh.map(t, q.points[i]));
      s.add(q.weights[i] * area * d * d);
    }
  }
  return checked_sqrt(s.value());
}

double h1_seminorm_error(const Mesh& mesh, const PiecewiseLinearField& uh, const VectorFunction& grad, int degree) {
  const QuadratureRule& q = element_quadrature(degree);
  CompensatedSum s;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    const Point gh = uh.gradient(mesh, t);
    for (int i = 0; i < q.size(); ++i) {
      const Point d = gh - grad(mesh.map(t, q.points[i]));
      s.add(q.weights[i] * area * dot(d, d));
    }
  }
  return checked_sqrt(s.value());
}

double maxnorm_error(const Mesh& mesh, const PiecewiseLinearField& uh, const ScalarFunction& u) {
  double m = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j) {
        const std::array<double, 3> l{i / 4.0, j / 4.0, (4 - i - j) / 4.0};
        m = std::max(m, std::abs(uh.eval(l, t) - u(mesh.map(t, l))));
      }
  return m;
}

double flux_l2_error(const MixedSystem& sys, const Vector& sigma, const VectorFunction& grad, int degree) {
  const Mesh& mesh = sys.mesh();
  const QuadratureRule& q = element_quadrature(degree);
  CompensatedSum s;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    for (int i = 0; i < q.size(); ++i) {
      const Point d = sys.flux_at(sigma, t, q.points[i]) - grad(mesh.map(t, q.points[i]));
      s.add(q.weights[i] * area * dot(d, d));
    }
  }
  return checked_sqrt(s.value());
}

double field_l2_norm(const Mesh& mesh, const PiecewiseLinearField& f) {
  CompensatedSum s;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = f.values[t];
    const double sum = v[0] + v[1] + v[2];
    s.add(mesh.area(t) / 12.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + sum * sum));
  }
  return checked_sqrt(s.value());
}

double l2_error_moments(const Mesh& mesh, const PiecewiseLinearField& uh, const ElementMoments& m, double u_norm_sq) {
  CompensatedSum s;
  s.add(u_norm_sq);
  const double nh = field_l2_norm(mesh, uh);
  s.add(nh * nh);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) s.add(-2.0 * uh.values[t][k] * m[t][k]);
  return checked_sqrt(s.value());
}

double h1_error_moments(const Mesh& mesh, const PiecewiseLinearField& uh, const ElementMoments& lu,
                        double grad_norm_sq) {
  CompensatedSum s;
  s.add(grad_norm_sq);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Point g = uh.gradient(mesh, t);
    s.add(mesh.area(t) * dot(g, g));
    for (int k = 0; k < 3; ++k) s.add(-2.0 * uh.values[t][k] * lu[t][k]);
  }
  return checked_sqrt(s.value());
}

double flux_error_moments(const MixedSystem& sys, const Vector& sigma, const ElementMoments& m, double grad_norm_sq) {
  CompensatedSum s;
  s.add(grad_norm_sq);
  s.add(sigma.dot(sys.D * sigma));
  // (sigma_h, grad u) = -(div sigma_h, u); div sigma_h is linear on each element
  const PiecewiseLinearField div = sys.divergence_field(sigma);
  for (int t = 0; t < sys.mesh().num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) s.add(2.0 * div.values[t][k] * m[t][k]);
  return checked_sqrt(s.value());
}

double discrete_sobolev_norm(const SpectralBasis& basis, const SparseMatrix& mass, const Vector& v, double r) {
  if (r < -1.0 || r > 2.0) throw InvalidParameter("discrete_sobolev_norm: r must lie in [-1, 2]");
  const Vector c = basis.eigenvectors.transpose() * (mass * v);
  CompensatedSum s;
  for (int j = 0; j < basis.size(); ++j) s.add(std::pow(basis.eigenvalues[j], r) * c[j] * c[j]);
  return checked_sqrt(s.value());
}

}  // namespace fracfem
