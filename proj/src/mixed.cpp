#include "fracfem/mixed.hpp"

#include "fracfem/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <iomanip>
#include <ostream>

namespace fracfem {

Point MixedSystem::prime(int m, Point p) const {
  if (index_ == 0) {
    switch (m) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      default: return p;
    }
  }
  switch (m) {
    case 0: return {1.0, 0.0};
    case 1: return {p.x, 0.0};
    case 2: return {p.y, 0.0};
    case 3: return {0.0, 1.0};
    case 4: return {0.0, p.x};
    case 5: return {0.0, p.y};
    case 6: return {p.x * p.x, p.x * p.y};
    default: return {p.x * p.y, p.y * p.y};
  }
}

// divergence in scaled coordinates; divide by the scale for physical units
double MixedSystem::prime_div(int m, Point p) const {
  if (index_ == 0) return m == 2 ? 2.0 : 0.0;
  switch (m) {
    case 1:
    case 5: return 1.0;
    case 6: return 3.0 * p.x;
    case 7: return 3.0 * p.y;
    default: return 0.0;
  }
}

Point MixedSystem::scaled(int t, Point x) const {
  const double s = 1.0 / scale_[t];
  return {(x.x - center_[t].x) * s, (x.y - center_[t].y) * s};
}

MixedSystem::MixedSystem(const Mesh& mesh, int index, Exec exec) : mesh_(&mesh), index_(index) {
  if (index != 0 && index != 1) throw InvalidParameter("Raviart-Thomas index must be 0 or 1");
  const int nt = mesh.num_triangles(), ne = mesh.num_edges();
  const int per_edge = index + 1;
  const int nflux = ne * per_edge + (index == 1 ? 2 * nt : 0);
  const int nloc = local_flux_size(), nsc = local_scalar_size();

  flux_dofs_.resize(nt);
  center_.resize(nt);
  scale_.resize(nt);
  coeff_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    auto& d = flux_dofs_[t];
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < per_edge; ++j) d.push_back(mesh.triangle_edges(t)[k] * per_edge + j);
    if (index == 1) {
      d.push_back(ne * per_edge + 2 * t);
      d.push_back(ne * per_edge + 2 * t + 1);
    }
    center_[t] = mesh.centroid(t);
    scale_[t] = mesh.diameter(t);
  }

  const LineRule gl = gauss_legendre(4);
  const QuadratureRule& q4 = element_quadrature(4);
  std::vector<DenseMatrix> Dl(nt), Bl(nt);
  for_each_index(exec, nt, [&](int t) {
    // DOF functionals applied to the prime basis
    DenseMatrix G = DenseMatrix::Zero(nloc, nloc);
    auto p = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges(t)[k];
      const Edge& E = mesh.edge(e);
      const Point a = p[(k + 1) % 3], b = p[(k + 2) % 3];
      const double len = std::sqrt(dot(b - a, b - a));
      Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
      if (E.tri[0] != t) n = -1.0 * n;
      const Point s0 = mesh.vertex(E.v[0]), s1 = mesh.vertex(E.v[1]);
      for (int q = 0; q < gl.size(); ++q) {
        const double s = gl.nodes[q];
        const Point x = s0 + s * (s1 - s0);
        const Point xh = scaled(t, x);
        for (int m = 0; m < nloc; ++m) {
          const double fn = dot(prime(m, xh), n) * gl.weights[q] * len;
          G(k * per_edge, m) += fn;
          if (index == 1) G(k * per_edge + 1, m) += fn * (2.0 * s - 1.0);
        }
      }
    }
    const double area = mesh.area(t);
    if (index == 1)
      for (int q = 0; q < q4.size(); ++q) {
        const Point xh = scaled(t, mesh.map(t, q4.points[q]));
        for (int m = 0; m < nloc; ++m) {
          const Point v = prime(m, xh);
          G(6, m) += q4.weights[q] * area * v.x;
          G(7, m) += q4.weights[q] * area * v.y;
        }
      }
    coeff_[t] = G.partialPivLu().inverse();

    DenseMatrix& Dt = Dl[t];
    DenseMatrix& Bt = Bl[t];
    Dt = DenseMatrix::Zero(nloc, nloc);
    Bt = DenseMatrix::Zero(nsc, nloc);
    std::vector<Point> val(nloc);
    std::vector<double> dv(nloc);
    for (int q = 0; q < q4.size(); ++q) {
      const Point xh = scaled(t, mesh.map(t, q4.points[q]));
      const double w = q4.weights[q] * area;
      for (int j = 0; j < nloc; ++j) {
        Point v{0.0, 0.0};
        double dj = 0.0;
        for (int m = 0; m < nloc; ++m) {
          const double c = coeff_[t](m, j);
          v = v + c * prime(m, xh);
          dj += c * prime_div(m, xh);
        }
        val[j] = v;
        dv[j] = dj / scale_[t];
      }
      for (int i = 0; i < nloc; ++i)
        for (int j = i; j < nloc; ++j) Dt(i, j) += w * dot(val[i], val[j]);
      for (int k = 0; k < nsc; ++k) {
        const double vk = index == 0 ? 1.0 : q4.points[q][k];
        for (int j = 0; j < nloc; ++j) Bt(k, j) += w * vk * dv[j];
      }
    }
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < i; ++j) Dt(i, j) = Dt(j, i);
  });

  std::vector<Triplet> dt, bt, at;
  for (int t = 0; t < nt; ++t) {
    const auto& d = flux_dofs_[t];
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) dt.emplace_back(d[i], d[j], Dl[t](i, j));
    for (int k = 0; k < nsc; ++k)
      for (int j = 0; j < nloc; ++j) bt.emplace_back(scalar_dof(t, k), d[j], Bl[t](k, j));
    const double area = mesh.area(t);
    for (int i = 0; i < nsc; ++i)
      for (int j = 0; j < nsc; ++j)
        at.emplace_back(scalar_dof(t, i), scalar_dof(t, j), index == 0 ? area : area / 12.0 * (i == j ? 2.0 : 1.0));
  }
  D.resize(nflux, nflux);
  B.resize(nsc * nt, nflux);
  A.resize(nsc * nt, nsc * nt);
  D.setFromTriplets(dt.begin(), dt.end());
  B.setFromTriplets(bt.begin(), bt.end());
  A.setFromTriplets(at.begin(), at.end());
  D.prune(0.0);
  B.prune(0.0);

  d_llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(D);
  if (d_llt_->info() != Eigen::Success) throw SolverError("flux mass matrix D is not positive definite");
  a_llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(A);
  if (a_llt_->info() != Eigen::Success) throw SolverError("scalar mass matrix A is not positive definite");
}

Point MixedSystem::basis_value(int t, int j, const std::array<double, 3>& bary) const {
  const Point xh = scaled(t, mesh_->map(t, bary));
  Point v{0.0, 0.0};
  for (int m = 0; m < local_flux_size(); ++m) v = v + coeff_[t](m, j) * prime(m, xh);
  return v;
}

double MixedSystem::basis_divergence(int t, int j, const std::array<double, 3>& bary) const {
  const Point xh = scaled(t, mesh_->map(t, bary));
  double d = 0.0;
  for (int m = 0; m < local_flux_size(); ++m) d += coeff_[t](m, j) * prime_div(m, xh);
  return d / scale_[t];
}

Point MixedSystem::flux_at(const Vector& sigma, int t, const std::array<double, 3>& bary) const {
  Point v{0.0, 0.0};
  const auto& d = flux_dofs_[t];
  for (int j = 0; j < local_flux_size(); ++j) v = v + sigma[d[j]] * basis_value(t, j, bary);
  return v;
}

PiecewiseLinearField MixedSystem::scalar_field(const Vector& u) const {
  PiecewiseLinearField f;
  f.values.resize(mesh_->num_triangles());
  for (int t = 0; t < mesh_->num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) f.values[t][k] = index_ == 0 ? u[t] : u[scalar_dof(t, k)];
  return f;
}

PiecewiseLinearField MixedSystem::divergence_field(const Vector& sigma) const {
  PiecewiseLinearField f;
  f.values.resize(mesh_->num_triangles());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    const auto& d = flux_dofs_[t];
    for (int k = 0; k < 3; ++k) {
      std::array<double, 3> vertex{0.0, 0.0, 0.0};
      vertex[k] = 1.0;
      double s = 0.0;
      for (int j = 0; j < local_flux_size(); ++j) s += sigma[d[j]] * basis_divergence(t, j, vertex);
      f.values[t][k] = s;
    }
  }
  return f;
}

Vector MixedSystem::scalar_load(const ScalarFunction& f) const {
  return scalar_load_from_moments(element_moments(*mesh_, f, 6));
}

Vector MixedSystem::scalar_load_from_moments(const std::vector<std::array<double, 3>>& m) const {
  Vector b(scalar_size());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (index_ == 0)
      b[t] = m[t][0] + m[t][1] + m[t][2];
    else
      for (int k = 0; k < 3; ++k) b[scalar_dof(t, k)] = m[t][k];
  }
  return b;
}

Vector MixedSystem::solve_scalar_mass(const Vector& rhs) const { return a_llt_->solve(rhs); }
Vector MixedSystem::solve_flux_mass(const Vector& rhs) const { return d_llt_->solve(rhs); }

Vector MixedSystem::scalar_project(const ScalarFunction& f) const { return solve_scalar_mass(scalar_load(f)); }

Vector MixedSystem::scalar_project_from_moments(const std::vector<std::array<double, 3>>& m) const {
  return solve_scalar_mass(scalar_load_from_moments(m));
}

MixedSolver::MixedSolver(const MixedSystem& sys, double shift) : sys_(&sys), shift_(shift) {
  const int nf = sys.flux_size();
  fixed_.reserve(sys.D.nonZeros() + 2 * sys.B.nonZeros());
  for (int k = 0; k < sys.D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.D, k); it; ++it) fixed_.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.B, k); it; ++it) {
      fixed_.emplace_back(nf + it.row(), it.col(), it.value());
      fixed_.emplace_back(it.col(), nf + it.row(), it.value());
    }
  factorize();
}

void MixedSolver::set_shift(double shift) {
  shift_ = shift;
  factorize();
}

void MixedSolver::factorize() {
  const int nf = sys_->flux_size(), ns = sys_->scalar_size();
  std::vector<Triplet> trip = fixed_;
  // the A block is always present so the sparsity pattern does not depend on the shift
  for (int k = 0; k < sys_->A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys_->A, k); it; ++it)
      trip.emplace_back(nf + it.row(), nf + it.col(), -shift_ * it.value());
  SparseMatrix K(nf + ns, nf + ns);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  if (!analyzed_) {
    lu_.analyzePattern(K);
    analyzed_ = true;
  }
  lu_.factorize(K);
  if (lu_.info() != Eigen::Success) throw SolverError("mixed saddle-point factorization failed: " + lu_.lastErrorMessage());
}

MixedSolution MixedSolver::solve(const Vector& g, const Vector& d) const {
  const int nf = sys_->flux_size(), ns = sys_->scalar_size();
  Vector rhs(nf + ns);
  rhs.head(nf) = g;
  rhs.tail(ns) = d;
  Vector x = lu_.solve(rhs);
  if (!x.allFinite()) throw SolverError("mixed solve produced non-finite values");
  return {x.tail(ns), x.head(nf)};
}

MixedSolution mixed_elliptic_solve(const MixedSystem& sys, const Vector& load) {
  MixedSolver solver(sys, 0.0);
  return solver.solve(Vector::Zero(sys.flux_size()), -load);
}

double mixed_elliptic_residual(const MixedSystem& sys, const MixedSolution& s, const Vector& load) {
  const double scale = std::max(load.norm(), 1e-300);
  const double r1 = (sys.D * s.sigma + sys.B.transpose() * s.u).norm();
  const double r2 = (sys.B * s.sigma + load).norm();
  return std::max(r1 / std::max((sys.D * s.sigma).norm(), scale), r2 / scale);
}

MixedSolution mixed_projection(const MixedSystem& sys, const ScalarFunction& u, const VectorFunction& sigma) {
  const Mesh& mesh = sys.mesh();
  const QuadratureRule& q6 = element_quadrature(6);
  const LineRule gl = gauss_legendre(6);
  const int nloc = sys.local_flux_size(), nsc = sys.local_scalar_size();
  Vector g = Vector::Zero(sys.flux_size());
  Vector d = Vector::Zero(sys.scalar_size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& dofs = sys.local_flux_dofs(t);
    const double area = mesh.area(t);
    auto grads = mesh.barycentric_gradients(t);
    for (int q = 0; q < q6.size(); ++q) {
      const auto& l = q6.points[q];
      const Point x = mesh.map(t, l);
      const double w = q6.weights[q] * area;
      const Point s = sigma(x);
      const double ux = u(x);
      for (int j = 0; j < nloc; ++j) g[dofs[j]] += w * (dot(s, sys.basis_value(t, j, l)) + ux * sys.basis_divergence(t, j, l));
      // -(sigma, grad v_k)
      if (nsc == 3)
        for (int k = 0; k < 3; ++k) d[sys.scalar_dof(t, k)] -= w * dot(s, grads[k]);
    }
    // boundary term of (div sigma, v_k) on the element
    auto p = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      const Point a = p[(k + 1) % 3], b = p[(k + 2) % 3];
      const double len = std::sqrt(dot(b - a, b - a));
      const Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
      for (int q = 0; q < gl.size(); ++q) {
        const double r = gl.nodes[q];
        const double fn = dot(sigma(a + r * (b - a)), n) * gl.weights[q] * len;
        if (nsc == 1) {
          d[t] += fn;
        } else {
          // along the edge lambda_{k+1} = 1 - r, lambda_{k+2} = r
          d[sys.scalar_dof(t, (k + 1) % 3)] += fn * (1.0 - r);
          d[sys.scalar_dof(t, (k + 2) % 3)] += fn * r;
        }
      }
    }
  }
  MixedSolver solver(sys, 0.0);
  return solver.solve(g, d);
}

double flux_relation_residual(const MixedSystem& sys, const Vector& u, const Vector& sigma) {
  const Vector a = sys.D * sigma, b = sys.B.transpose() * u;
  const double scale = a.norm() + b.norm();
  if (scale == 0.0) return 0.0;
  return (a + b).norm() / scale;
}

Vector flux_from_scalar(const MixedSystem& sys, const Vector& u) {
  Vector rhs = sys.B.transpose() * u;
  return -sys.solve_flux_mass(rhs);
}

double maxnorm_transfer_check(const MixedSystem& sys, const Vector& theta) {
  const Vector z = flux_from_scalar(sys, theta);
  const double zn = std::sqrt(std::max(0.0, z.dot(sys.D * z)));
  if (zn == 0.0) return 0.0;
  // theta is piecewise linear, so its maximum sits at element vertices
  const double tmax = theta.cwiseAbs().maxCoeff();
  const double h = sys.mesh().mesh_size();
  return tmax / (std::abs(std::log(h)) * zn);
}

double inverse_estimate_check(const MixedSystem& sys, const Vector& xi) {
  const double xn = std::sqrt(std::max(0.0, xi.dot(sys.D * xi)));
  if (xn == 0.0) return 0.0;
  const Vector b = sys.B * xi;
  const Vector d = sys.solve_scalar_mass(b);
  return sys.mesh().mesh_size() * std::sqrt(std::max(0.0, d.dot(b))) / xn;
}

SpectralBasis mixed_eigendecompose(const MixedSystem& sys, int cap) {
  const int ns = sys.scalar_size();
  check_eigen_cap(ns, cap);
  DenseMatrix S(ns, ns);
  const SparseMatrix Bt = sys.B.transpose();
  const int block = 256;
  for (int c0 = 0; c0 < ns; c0 += block) {
    const int nc = std::min(block, ns - c0);
    DenseMatrix rhs = DenseMatrix(Bt.middleCols(c0, nc));
    DenseMatrix X = DenseMatrix::Zero(sys.flux_size(), nc);
    for (int j = 0; j < nc; ++j) X.col(j) = sys.solve_flux_mass(rhs.col(j));
    S.middleCols(c0, nc) = sys.B * X;
  }
  DenseMatrix Ssym = 0.5 * (S + S.transpose());
  S.resize(0, 0);
  return block_diagonal_eigen(std::move(Ssym), sys.A, sys.local_scalar_size());
}

void export_mixed(std::ostream& os, const MixedSystem& sys) {
  os << "# mixed RT" << sys.index() << " flux " << sys.flux_size() << " scalar " << sys.scalar_size() << '\n';
  os << "# block D\n";
  export_coordinate(os, sys.D);
  os << "# block B\n";
  export_coordinate(os, sys.B);
  os << "# block A\n";
  export_coordinate(os, sys.A);
}

}  // namespace fracfem
