#include "fracfem/elliptic.hpp"
#include "fracfem/errors.hpp"
#include "fracfem/piecewise_field.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fracfem;

namespace {

constexpr double pi = std::numbers::pi;

double smooth(Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }
Point smooth_grad(Point p) {
  return {pi * std::cos(pi * p.x) * std::sin(pi * p.y), pi * std::sin(pi * p.x) * std::cos(pi * p.y)};
}

const Mesh& reference_triangle() {
  static const Mesh m({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{{0, 1, 2}}});
  return m;
}

double rate(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST_CASE("P1 element matrices on the reference triangle") {
  const auto K = p1_local_stiffness(reference_triangle(), 0, CoefficientField::laplacian());
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(K[i][j] - expect[i][j]) <= 1e-15);

  const auto M = p1_local_mass(reference_triangle(), 0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(M[i][j] == doctest::Approx(i == j ? 1.0 / 12.0 : 1.0 / 24.0).epsilon(1e-15));
}

TEST_CASE("two-division square has one interior node") {
  const Mesh m = Mesh::unit_square(2);
  const auto p = assemble(m);
  REQUIRE(p.size() == 1);
  CHECK(p.stiffness.coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(p.mass.coeff(0, 0) == doctest::Approx(0.125).epsilon(1e-15));
  const auto b = eigendecompose(p);
  CHECK(b.eigenvalues[0] == doctest::Approx(32.0).epsilon(1e-14));
}

TEST_CASE("global matrices are symmetric and stiffness rows away from the boundary sum to zero") {
  const Mesh m = Mesh::l_shape(8);
  for (const auto& p : {assemble(m), assemble(m, CoefficientField::constant_field(2.0, 0.3, 1.0, 0.5))}) {
    CHECK(SparseMatrix(p.stiffness - SparseMatrix(p.stiffness.transpose())).norm() == 0.0);
    CHECK(SparseMatrix(p.mass - SparseMatrix(p.mass.transpose())).norm() == 0.0);
  }
  const Mesh s = Mesh::unit_square(4);
  const auto p = assemble(s);
  const Vector ones = Vector::Ones(p.size());
  const Vector k1 = p.stiffness * ones;
  for (int i = 0; i < p.size(); ++i) {
    const Point x = s.vertex(p.dof_entity[i]);
    if (x.x > 0.3 && x.x < 0.7 && x.y > 0.3 && x.y < 0.7) CHECK(std::abs(k1[i]) <= 1e-13);
  }
}

TEST_CASE("discrete eigenpairs") {
  const auto p = assemble(Mesh::unit_square(8));
  const auto b = eigendecompose(p);
  CHECK(b.size() == p.size());
  CHECK(orthonormality_defect(p.mass, b) <= 1e-10);
  CHECK(eigen_residual(p.stiffness, p.mass, b) <= 1e-12);
  for (int i = 1; i < b.size(); ++i) CHECK(b.eigenvalues[i] >= b.eigenvalues[i - 1]);

  double prev = 1e300;
  for (int n : {4, 8, 16}) {
    const double l1 = eigendecompose(assemble(Mesh::unit_square(n))).eigenvalues[0];
    CHECK(l1 > 2.0 * pi * pi);
    CHECK(l1 < prev);
    prev = l1;
  }
  CHECK(prev - 2.0 * pi * pi < 0.2);

  CHECK_THROWS_AS(eigendecompose(p, 10), InvalidParameter);
}

TEST_CASE("projections converge at the expected rates") {
  std::vector<double> l2, h1;
  for (int n : {8, 16, 32}) {
    const Mesh m = Mesh::unit_square(n);
    const auto p = assemble(m);
    l2.push_back(l2_error(m, PiecewiseLinearField::from_p1(m, p, l2_project(m, p, smooth)), smooth));
    h1.push_back(h1_seminorm_error(m, PiecewiseLinearField::from_p1(m, p, ritz_project(m, p, smooth, smooth_grad)),
                                   smooth_grad));
  }
  CHECK(rate(l2[1], l2[2]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rate(h1[1], h1[2]) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("discrete solution operator") {
  const auto f = [](Point p) { return 2.0 * pi * pi * smooth(p); };
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const Mesh m = Mesh::unit_square(n);
    const auto p = assemble(m);
    const Vector b = load_vector(m, p, f);
    const Vector u = elliptic_solve(p, b);
    CHECK((p.stiffness * u - b).norm() <= 1e-11 * b.norm());
    err.push_back(l2_error(m, PiecewiseLinearField::from_p1(m, p, u), smooth));
  }
  CHECK(std::abs(rate(err[1], err[2]) - 2.0) <= 0.15);

  const Mesh m = Mesh::l_shape(8);
  const auto p = assemble(m);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int k = 0; k < 5; ++k) {
    Vector a(p.size()), b(p.size());
    for (int i = 0; i < p.size(); ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const double ab = a.dot(elliptic_solve(p, b)), ba = b.dot(elliptic_solve(p, a));
    CHECK(std::abs(ab - ba) <= 1e-12 * (std::abs(ab) + 1.0));
    CHECK(a.dot(elliptic_solve(p, a)) >= 0.0);
  }
  CHECK(elliptic_solve(p, Vector::Zero(p.size())).norm() == 0.0);
}

TEST_CASE("inadmissible coefficients name the offending element") {
  const Mesh m = Mesh::unit_square(4);
  CoefficientField cf;
  cf.constant = false;
  cf.A = [](Point) { return std::array<double, 3>{1.0, 0.0, 1.0}; };
  cf.c = [](Point x) { return x.x > 0.5 && x.y > 0.5 ? -1.0 : 0.0; };
  int first = -1;
  for (int t = 0; t < m.num_triangles() && first < 0; ++t) {
    const Point c = m.centroid(t);
    if (c.x > 0.5 && c.y > 0.5) first = t;
  }
  REQUIRE(first >= 0);
  for (Exec e : {Exec::serial, Exec::parallel}) {
    try {
      (void)assemble(m, cf, e);
      FAIL("assembly accepted a negative reaction coefficient");
    } catch (const AssemblyError& err) {
      CHECK(err.element() == first);
    }
  }
  CHECK_THROWS_AS(assemble(m, CoefficientField::constant_field(1.0, 2.0, 1.0, 0.0)), AssemblyError);
}

TEST_CASE("assembly is identical across execution policies") {
  const Mesh m = Mesh::l_shape(16);
  const auto cf = CoefficientField::constant_field(1.5, 0.2, 0.8, 0.1);
  const auto a = assemble(m, cf, Exec::serial);
  const auto b = assemble(m, cf, Exec::parallel);
  CHECK(SparseMatrix(a.stiffness - b.stiffness).norm() == 0.0);
  CHECK(SparseMatrix(a.mass - b.mass).norm() == 0.0);

  const auto f = [](Point p) { return std::exp(p.x) * std::cos(3.0 * p.y); };
  CHECK((load_vector(m, a, f) - load_vector(m, b, f)).norm() == 0.0);
}
