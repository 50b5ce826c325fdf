#include "fracfem/piecewise_field.hpp"

#include "fracfem/quadrature.hpp"

namespace fracfem {

Point PiecewiseLinearField::gradient(const Mesh& mesh, int t) const {
  auto g = mesh.barycentric_gradients(t);
  const auto& v = values[t];
  return {v[0] * g[0].x + v[1] * g[1].x + v[2] * g[2].x, v[0] * g[0].y + v[1] * g[1].y + v[2] * g[2].y};
}

PiecewiseLinearField PiecewiseLinearField::zero(const Mesh& mesh) {
  PiecewiseLinearField f;
  f.values.assign(mesh.num_triangles(), {0.0, 0.0, 0.0});
  return f;
}

PiecewiseLinearField PiecewiseLinearField::from_nodal(const Mesh& mesh, const Vector& full) {
  PiecewiseLinearField f;
  f.values.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) f.values[t][k] = full[mesh.triangle(t)[k]];
  return f;
}

PiecewiseLinearField PiecewiseLinearField::from_p1(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u) {
  return from_nodal(mesh, p1_full_nodal(mesh, pair, u));
}

PiecewiseLinearField PiecewiseLinearField::from_cr(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u) {
  PiecewiseLinearField f;
  f.values.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::array<double, 3> U;
    for (int k = 0; k < 3; ++k) {
      const int d = pair.entity_dof[mesh.triangle_edges(t)[k]];
      U[k] = d >= 0 ? u[d] : 0.0;
    }
    const double s = U[0] + U[1] + U[2];
    // psi_k = 1 - 2 lambda_k is -1 at vertex k and +1 at the other two
    for (int a = 0; a < 3; ++a) f.values[t][a] = s - 2.0 * U[a];
  }
  return f;
}

PiecewiseLinearField PiecewiseLinearField::from_pair(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u) {
  return pair.flavor == Flavor::conforming_p1 ? from_p1(mesh, pair, u) : from_cr(mesh, pair, u);
}

std::vector<std::array<double, 3>> element_moments(const Mesh& mesh, const ScalarFunction& f, int degree) {
  const QuadratureRule& q = element_quadrature(degree);
  std::vector<std::array<double, 3>> m(mesh.num_triangles(), {0.0, 0.0, 0.0});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    for (int i = 0; i < q.size(); ++i) {
      const double w = q.weights[i] * area * f(mesh.map(t, q.points[i]));
      for (int k = 0; k < 3; ++k) m[t][k] += w * q.points[i][k];
    }
  }
  return m;
}

}  // namespace fracfem
