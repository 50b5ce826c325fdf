#include "fracfem/mesh.hpp"
#include "fracfem/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace fracfem;

TEST_CASE("structured unit square counts") {
  const Mesh m1 = Mesh::unit_square(1);
  CHECK(m1.num_triangles() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_interior_vertices() == 0);

  const Mesh m2 = Mesh::unit_square(2);
  CHECK(m2.num_triangles() == 8);
  CHECK(m2.num_vertices() == 9);
  CHECK(m2.num_interior_vertices() == 1);
  CHECK(m2.mesh_size() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("L-shape with two divisions covers area three") {
  const Mesh m = Mesh::l_shape(2);
  CHECK(m.num_triangles() == 6);
  double area = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) area += m.area(t);
  CHECK(area == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m.domain().reentrant_exponent() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("odd L-shape divisions are rejected") {
  CHECK_THROWS_AS(Mesh::l_shape(3), InvalidParameter);
  CHECK_THROWS_AS(Mesh::unit_square(0), InvalidParameter);
}

TEST_CASE("uniform refinement") {
  const Mesh m = Mesh::unit_square(1);
  const Mesh f = m.refine_uniform();
  CHECK(f.num_triangles() == 8);
  CHECK(f.mesh_size() == m.mesh_size() / 2.0);
  CHECK(std::abs(f.total_area() - m.total_area()) <= 1e-13);
  CHECK(f.shape_regularity() == doctest::Approx(m.shape_regularity()).epsilon(1e-12));

  const Mesh l = Mesh::l_shape(4);
  const Mesh lf = l.refine_uniform().refine_uniform();
  CHECK(std::abs(lf.total_area() - 3.0) <= 1e-13);
  CHECK(lf.shape_regularity() == doctest::Approx(l.shape_regularity()).epsilon(1e-12));
  lf.validate();
}

TEST_CASE("mesh invariants") {
  for (int n : {1, 2, 3, 8, 17}) {
    const Mesh m = Mesh::unit_square(n);
    m.validate();
    CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
    CHECK(m.num_boundary_vertices() == 4 * n);
    for (const auto& e : m.edges()) CHECK(e.v[0] < e.v[1]);
  }
  for (int n : {2, 4, 8}) {
    const Mesh m = Mesh::l_shape(n);
    m.validate();
    CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
    bool corner = false;
    for (const auto& p : m.vertices()) corner = corner || (p.x == 0.0 && p.y == 0.0);
    CHECK(corner);
    for (int t = 0; t < m.num_triangles(); ++t) {
      const Point c = m.centroid(t);
      CHECK_FALSE((c.x > 0.0 && c.y < 0.0));
    }
  }
}

TEST_CASE("refined meshes keep the corner vertex and parent lineage") {
  const Mesh m = Mesh::l_shape(2).refine_uniform();
  CHECK(m.vertex_parents().size() == static_cast<std::size_t>(m.num_vertices()));
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto [a, b] = m.vertex_parents()[v];
    const Mesh parent = Mesh::l_shape(2);
    const Point mid = 0.5 * (parent.vertex(a) + parent.vertex(b));
    CHECK(mid.x == m.vertex(v).x);
    CHECK(mid.y == m.vertex(v).y);
  }
}

TEST_CASE("mesh text round trip") {
  const Mesh m = Mesh::l_shape(4);
  std::stringstream ss;
  m.write(ss);
  const Mesh r = Mesh::read(ss);
  CHECK(r.num_vertices() == m.num_vertices());
  CHECK(r.num_triangles() == m.num_triangles());
  CHECK(r.num_edges() == m.num_edges());
  CHECK(r.total_area() == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("validate reports broken meshes") {
  // clockwise triangle
  CHECK_THROWS_AS(Mesh({{0, 0}, {0, 1}, {1, 0}}, {{{0, 1, 2}}}).validate(), InvalidParameter);
}

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// exact average of l0^i l1^j l2^k over a triangle
double barycentric_moment(int i, int j, int k) {
  return 2.0 * factorial(i) * factorial(j) * factorial(k) / factorial(i + j + k + 2);
}

double apply(const QuadratureRule& q, int i, int j, int k) {
  double s = 0.0;
  for (int p = 0; p < q.size(); ++p)
    s += q.weights[p] * std::pow(q.points[p][0], i) * std::pow(q.points[p][1], j) * std::pow(q.points[p][2], k);
  return s;
}

}  // namespace

TEST_CASE("element quadrature rules") {
  const QuadratureRule& q1 = element_quadrature(1);
  REQUIRE(q1.size() == 1);
  CHECK(q1.weights[0] == doctest::Approx(1.0));
  CHECK(q1.points[0][0] == doctest::Approx(1.0 / 3.0));

  const QuadratureRule& q2 = element_quadrature(2);
  REQUIRE(q2.size() == 3);
  for (int p = 0; p < 3; ++p) {
    CHECK(q2.weights[p] == doctest::Approx(1.0 / 3.0));
    int halves = 0;
    for (double l : q2.points[p]) halves += std::abs(l - 0.5) < 1e-15;
    CHECK(halves == 2);
  }

  for (int d = 1; d <= 6; ++d) {
    const QuadratureRule& q = element_quadrature(d);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; i + j <= d; ++j)
        for (int k = 0; i + j + k <= d; ++k) CHECK(std::abs(apply(q, i, j, k) - barycentric_moment(i, j, k)) <= 1e-15);
  }
  CHECK_THROWS_AS(element_quadrature(0), InvalidParameter);
  CHECK_THROWS_AS(element_quadrature(7), InvalidParameter);
}

TEST_CASE("x^2 y over the reference triangle is 1/60") {
  // reference triangle (0,0),(1,0),(0,1): x = l1, y = l2, area 1/2
  const QuadratureRule& q = element_quadrature(3);
  double s = 0.0;
  for (int p = 0; p < q.size(); ++p) s += q.weights[p] * q.points[p][1] * q.points[p][1] * q.points[p][2];
  CHECK(0.5 * s == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
}

TEST_CASE("collapsed Gauss and Gauss-Legendre exactness") {
  for (int q : {2, 4, 7}) {
    for (int apex : {0, 1, 2}) {
      const QuadratureRule r = collapsed_gauss(q, apex);
      const int d = 2 * q - 2;
      for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) CHECK(std::abs(apply(r, i, j, 0) - barycentric_moment(i, j, 0)) <= 1e-14);
    }
    const LineRule g = gauss_legendre(q);
    for (int k = 0; k <= 2 * q - 1; ++k) {
      double s = 0.0;
      for (int p = 0; p < g.size(); ++p) s += g.weights[p] * std::pow(g.nodes[p], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
}
