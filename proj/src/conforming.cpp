#include "fracfem/elliptic.hpp"

#include "elliptic_detail.hpp"
#include "fracfem/quadrature.hpp"

#include <iomanip>
#include <ostream>
#include <string>

namespace fracfem {

CoefficientField CoefficientField::constant_field(double a11, double a12, double a22, double c0) {
  CoefficientField f;
  f.A = [=](Point) { return std::array<double, 3>{a11, a12, a22}; };
  f.c = [=](Point) { return c0; };
  f.constant = true;
  return f;
}

bool CoefficientField::is_laplacian() const {
  if (!constant) return false;
  auto a = A({0.0, 0.0});
  return a[0] == 1.0 && a[1] == 0.0 && a[2] == 1.0 && c({0.0, 0.0}) == 0.0;
}

const char* to_string(Flavor f) { return f == Flavor::conforming_p1 ? "conforming" : "crouzeix_raviart"; }

using detail::Local;

namespace {

bool admissible(const std::array<double, 3>& a, double c) {
  return a[0] > 0.0 && a[2] > 0.0 && a[0] * a[2] - a[1] * a[1] > 0.0 && c >= 0.0;
}

double energy(const std::array<double, 3>& a, Point g, Point h) {
  return g.x * (a[0] * h.x + a[1] * h.y) + g.y * (a[1] * h.x + a[2] * h.y);
}

}  // namespace

bool detail::local_operator(const Mesh& mesh, int t, const CoefficientField& coeffs, const std::array<Point, 3>& grads,
                    const std::function<double(const std::array<double, 3>&, int, int)>& shape, Local& out) {
  const double area = mesh.area(t);
  for (auto& row : out) row.fill(0.0);
  if (coeffs.constant) {
    Point x0 = mesh.centroid(t);
    auto a = coeffs.A(x0);
    double c = coeffs.c(x0);
    if (!admissible(a, c)) return false;
    const QuadratureRule& q2 = element_quadrature(2);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double m = 0.0;
        if (c != 0.0)
          for (int q = 0; q < q2.size(); ++q) m += q2.weights[q] * shape(q2.points[q], i, j);
        out[i][j] = area * (energy(a, grads[i], grads[j]) + c * m);
      }
  } else {
    const QuadratureRule& q4 = element_quadrature(4);
    for (int q = 0; q < q4.size(); ++q) {
      Point x = mesh.map(t, q4.points[q]);
      auto a = coeffs.A(x);
      double c = coeffs.c(x);
      if (!admissible(a, c)) return false;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
          out[i][j] += q4.weights[q] * area * (energy(a, grads[i], grads[j]) + c * shape(q4.points[q], i, j));
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j) out[i][j] = out[j][i];
  return true;
}

namespace {

double p1_shape(const std::array<double, 3>& l, int i, int j) { return l[i] * l[j]; }

}  // namespace

Local p1_local_stiffness(const Mesh& mesh, int t, const CoefficientField& coeffs) {
  Local out;
  if (!detail::local_operator(mesh, t, coeffs, mesh.barycentric_gradients(t), p1_shape, out))
    throw AssemblyError("coefficient A not positive definite or c negative", t);
  return out;
}

Local p1_local_mass(const Mesh& mesh, int t) {
  const double a = mesh.area(t) / 12.0;
  Local m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (i == j ? 2.0 : 1.0) * a;
  return m;
}

// Local matrices in parallel, then serial scatter in element order.
void detail::scatter_pair(const Mesh& mesh, DiscreteEllipticPair& pair, const std::vector<std::array<int, 3>>& local_dofs,
                  const std::function<bool(int, Local&, Local&)>& local, Exec exec) {
  const int nt = mesh.num_triangles();
  std::vector<Local> Ks(nt), Ms(nt);
  std::vector<char> ok(nt, 1);
  for_each_index(exec, nt, [&](int t) { ok[t] = local(t, Ks[t], Ms[t]) ? 1 : 0; });
  for (int t = 0; t < nt; ++t)
    if (!ok[t]) throw AssemblyError("coefficient A not positive definite or c negative", t);

  std::vector<Triplet> kt, mt;
  kt.reserve(9 * nt);
  mt.reserve(9 * nt);
  for (int t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i) {
      const int I = local_dofs[t][i];
      if (I < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int J = local_dofs[t][j];
        if (J < 0) continue;
        kt.emplace_back(I, J, Ks[t][i][j]);
        mt.emplace_back(I, J, Ms[t][i][j]);
      }
    }
  const int n = pair.size();
  pair.stiffness.resize(n, n);
  pair.mass.resize(n, n);
  pair.stiffness.setFromTriplets(kt.begin(), kt.end());
  pair.mass.setFromTriplets(mt.begin(), mt.end());
}

DiscreteEllipticPair assemble(const Mesh& mesh, const CoefficientField& coeffs, Exec exec) {
  DiscreteEllipticPair pair;
  pair.flavor = Flavor::conforming_p1;
  pair.coeffs = coeffs;
  pair.entity_dof.assign(mesh.num_vertices(), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertex_on_boundary(v)) {
      pair.entity_dof[v] = pair.size();
      pair.dof_entity.push_back(v);
    }
  std::vector<std::array<int, 3>> ldofs(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) ldofs[t][k] = pair.entity_dof[mesh.triangle(t)[k]];
  detail::scatter_pair(
      mesh, pair, ldofs,
      [&](int t, Local& K, Local& M) {
        if (!detail::local_operator(mesh, t, coeffs, mesh.barycentric_gradients(t), p1_shape, K)) return false;
        M = p1_local_mass(mesh, t);
        return true;
      },
      exec);
  return pair;
}

namespace {

// basis value of local function k at barycentric point l
double basis_value(Flavor flavor, const std::array<double, 3>& l, int k) {
  return flavor == Flavor::conforming_p1 ? l[k] : 1.0 - 2.0 * l[k];
}

std::array<int, 3> local_dofs(const Mesh& mesh, const DiscreteEllipticPair& pair, int t) {
  std::array<int, 3> d;
  for (int k = 0; k < 3; ++k)
    d[k] = pair.flavor == Flavor::conforming_p1 ? pair.entity_dof[mesh.triangle(t)[k]]
                                                : pair.entity_dof[mesh.triangle_edges(t)[k]];
  return d;
}

}  // namespace

Vector load_vector(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& f) {
  const QuadratureRule& q4 = element_quadrature(4);
  Vector b = Vector::Zero(pair.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto d = local_dofs(mesh, pair, t);
    const double area = mesh.area(t);
    for (int q = 0; q < q4.size(); ++q) {
      const double fx = f(mesh.map(t, q4.points[q])) * q4.weights[q] * area;
      for (int k = 0; k < 3; ++k)
        if (d[k] >= 0) b[d[k]] += fx * basis_value(pair.flavor, q4.points[q], k);
    }
  }
  return b;
}

Vector load_from_moments(const Mesh& mesh, const DiscreteEllipticPair& pair,
                         const std::vector<std::array<double, 3>>& m) {
  Vector b = Vector::Zero(pair.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto d = local_dofs(mesh, pair, t);
    const double total = m[t][0] + m[t][1] + m[t][2];
    for (int k = 0; k < 3; ++k) {
      if (d[k] < 0) continue;
      b[d[k]] += pair.flavor == Flavor::conforming_p1 ? m[t][k] : total - 2.0 * m[t][k];
    }
  }
  return b;
}

EllipticSolver::EllipticSolver(const DiscreteEllipticPair& pair) : pair_(&pair) {
  stiff_.compute(pair.stiffness);
  if (stiff_.info() != Eigen::Success) throw SolverError("stiffness Cholesky failed (matrix not positive definite)");
  mass_.compute(pair.mass);
  if (mass_.info() != Eigen::Success) throw SolverError("mass Cholesky failed");
}

Vector EllipticSolver::solve_stiffness(const Vector& rhs) const { return stiff_.solve(rhs); }
Vector EllipticSolver::solve_mass(const Vector& rhs) const { return mass_.solve(rhs); }

Vector l2_project(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& data) {
  Vector b = load_vector(mesh, pair, data);
  Eigen::SimplicialLLT<SparseMatrix> llt(pair.mass);
  if (llt.info() != Eigen::Success) throw SolverError("mass Cholesky failed");
  return llt.solve(b);
}

Vector ritz_project(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& u,
                    const VectorFunction& grad) {
  if (pair.flavor != Flavor::conforming_p1) throw Unsupported("ritz_project is implemented for conforming P1 only");
  const QuadratureRule& q4 = element_quadrature(4);
  Vector b = Vector::Zero(pair.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto d = local_dofs(mesh, pair, t);
    auto g = mesh.barycentric_gradients(t);
    const double area = mesh.area(t);
    for (int q = 0; q < q4.size(); ++q) {
      Point x = mesh.map(t, q4.points[q]);
      auto a = pair.coeffs.A(x);
      const double c = pair.coeffs.c(x);
      Point gu = grad(x);
      const double ux = u(x);
      for (int k = 0; k < 3; ++k)
        if (d[k] >= 0)
          b[d[k]] += q4.weights[q] * area * (energy(a, gu, g[k]) + c * ux * q4.points[q][k]);
    }
  }
  Eigen::SimplicialLLT<SparseMatrix> llt(pair.stiffness);
  if (llt.info() != Eigen::Success) throw SolverError("stiffness Cholesky failed");
  return llt.solve(b);
}

Vector elliptic_solve(const DiscreteEllipticPair& pair, const Vector& load) {
  Eigen::SimplicialLLT<SparseMatrix> llt(pair.stiffness);
  if (llt.info() != Eigen::Success) throw SolverError("stiffness Cholesky failed (matrix not positive definite)");
  Vector u = llt.solve(load);
  if (!u.allFinite()) throw SolverError("elliptic solve produced non-finite values");
  return u;
}

SpectralBasis eigendecompose(const DiscreteEllipticPair& pair, int cap) {
  check_eigen_cap(pair.size(), cap);
  if (pair.flavor == Flavor::crouzeix_raviart) return block_diagonal_eigen(DenseMatrix(pair.stiffness), pair.mass, 1);
  return generalized_eigen(DenseMatrix(pair.stiffness), DenseMatrix(pair.mass));
}

Vector p1_full_nodal(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u) {
  Vector full = Vector::Zero(mesh.num_vertices());
  for (int i = 0; i < pair.size(); ++i) full[pair.dof_entity[i]] = u[i];
  return full;
}

void export_coordinate(std::ostream& os, const SparseMatrix& A) {
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace fracfem
