#include "fracfem/elliptic.hpp"

#include "elliptic_detail.hpp"

namespace fracfem {
namespace {

using detail::Local;

double cr_shape(const std::array<double, 3>& l, int i, int j) { return (1.0 - 2.0 * l[i]) * (1.0 - 2.0 * l[j]); }

std::array<Point, 3> cr_gradients(const Mesh& mesh, int t) {
  auto g = mesh.barycentric_gradients(t);
  for (auto& p : g) p = -2.0 * p;
  return g;
}

}  // namespace

Local cr_local_stiffness(const Mesh& mesh, int t, const CoefficientField& coeffs) {
  Local out;
  if (!detail::local_operator(mesh, t, coeffs, cr_gradients(mesh, t), cr_shape, out))
    throw AssemblyError("coefficient A not positive definite or c negative", t);
  return out;
}

Local cr_local_mass(const Mesh& mesh, int t) {
  const double a = mesh.area(t) / 3.0;
  Local m{};
  for (int i = 0; i < 3; ++i) m[i][i] = a;
  return m;
}

DiscreteEllipticPair assemble_cr(const Mesh& mesh, const CoefficientField& coeffs, Exec exec) {
  DiscreteEllipticPair pair;
  pair.flavor = Flavor::crouzeix_raviart;
  pair.coeffs = coeffs;
  pair.entity_dof.assign(mesh.num_edges(), -1);
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.edge_on_boundary(e)) {
      pair.entity_dof[e] = pair.size();
      pair.dof_entity.push_back(e);
    }
  std::vector<std::array<int, 3>> ldofs(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) ldofs[t][k] = pair.entity_dof[mesh.triangle_edges(t)[k]];
  detail::scatter_pair(
      mesh, pair, ldofs,
      [&](int t, Local& K, Local& M) {
        if (!detail::local_operator(mesh, t, coeffs, cr_gradients(mesh, t), cr_shape, K)) return false;
        M = cr_local_mass(mesh, t);
        return true;
      },
      exec);
  return pair;
}

}  // namespace fracfem
