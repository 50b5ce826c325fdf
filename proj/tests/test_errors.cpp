#include "fracfem/convergence.hpp"
#include "fracfem/errors.hpp"
#include "fracfem/evolution.hpp"
#include "fracfem/initial_data.hpp"
#include "fracfem/reference.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fracfem;

namespace {

constexpr double pi = std::numbers::pi;

ExactSolutionSeries three_modes() {
  DenseMatrix c = DenseMatrix::Zero(3, 3);
  c(0, 0) = 1.0;
  c(1, 2) = -0.4;
  c(2, 1) = 0.25;
  return ExactSolutionSeries(c);
}

}  // namespace

TEST_CASE("error functionals vanish on exactly represented functions") {
  const Mesh m = Mesh::l_shape(4);
  const auto u = [](Point p) { return 1.0 + p.x - 2.0 * p.y; };
  Vector nodal(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) nodal[v] = u(m.vertex(v));
  const auto f = PiecewiseLinearField::from_nodal(m, nodal);
  CHECK(l2_error(m, f, u) <= 1e-14);
  CHECK(h1_seminorm_error(m, f, [](Point) { return Point{1.0, -2.0}; }) <= 1e-13);
  CHECK(maxnorm_error(m, f, u) <= 1e-14);
}

TEST_CASE("a zero field measures the exact norm") {
  const Mesh m = Mesh::unit_square(8);
  const auto s = ExactSolutionSeries::single_mode(1, 1);
  const auto z = PiecewiseLinearField::zero(m);
  CHECK(l2_error_moments(m, z, s.moments(m), s.sobolev_norm_sq(0.0)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(h1_error_moments(m, z, s.laplacian().moments(m), s.sobolev_norm_sq(1.0)) ==
        doctest::Approx(std::sqrt(2.0) * pi).epsilon(1e-13));
  CHECK(l2_error(m, z, s.function()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("moment route matches quadrature on a twice refined copy of the field") {
  const auto s = three_modes();
  for (int n : {8, 16}) {
    const Mesh m = Mesh::unit_square(n);
    const auto p = assemble(m);
    const Vector full = p1_full_nodal(m, p, l2_project(m, p, s.function()));
    const Mesh r1 = m.refine_uniform();
    const Mesh r = r1.refine_uniform();
    const Vector f1 = prolongate_nodal(r1, full);
    const Vector f2 = prolongate_nodal(r, f1);
    const auto f = PiecewiseLinearField::from_nodal(m, full);
    const double mom = l2_error_moments(m, f, s.moments(m), s.sobolev_norm_sq(0.0));
    CHECK(std::abs(l2_error(r, PiecewiseLinearField::from_nodal(r, f2), s.function()) - mom) <= 1e-10);
    CHECK(std::abs(l2_error(m, f, s.function()) - mom) <= 1e-5 * mom);

    const Vector gfull = p1_full_nodal(m, p, ritz_project(m, p, s.function(), s.flux()));
    const Vector g2 = prolongate_nodal(r, prolongate_nodal(r1, gfull));
    const auto g = PiecewiseLinearField::from_nodal(m, gfull);
    const double hm = h1_error_moments(m, g, s.laplacian().moments(m), s.sobolev_norm_sq(1.0));
    CHECK(std::abs(h1_seminorm_error(r, PiecewiseLinearField::from_nodal(r, g2), s.flux()) - hm) <= 1e-9);
  }
}

TEST_CASE("flux error routes converge to each other") {
  const auto s = three_modes();
  std::vector<double> e, gap;
  for (int n : {8, 16, 32}) {
    const Mesh m = Mesh::unit_square(n);
    const MixedSystem sys(m, 1);
    const auto r = mixed_projection(sys, s.function(), s.flux());
    const double q = flux_l2_error(sys, r.sigma, s.flux());
    gap.push_back(std::abs(q - flux_error_moments(sys, r.sigma, s.moments(m), s.sobolev_norm_sq(1.0))));
    CHECK(gap.back() <= 1e-3 * q);
    e.push_back(q);
  }
  CHECK(gap[1] <= gap[0] / 32.0);
  CHECK(std::abs(std::log2(e[1] / e[2]) - 2.0) <= 0.2);
}

TEST_CASE("discrete Sobolev norms") {
  const Mesh m = Mesh::l_shape(4);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Vector v(p.size());
  for (int i = 0; i < p.size(); ++i) v[i] = g(rng);
  CHECK(discrete_sobolev_norm(b, p.mass, v, 0.0) == doctest::Approx(std::sqrt(v.dot(p.mass * v))).epsilon(1e-12));
  CHECK(discrete_sobolev_norm(b, p.mass, v, 1.0) == doctest::Approx(std::sqrt(v.dot(p.stiffness * v))).epsilon(1e-12));
  const Vector w = EllipticSolver(p).solve_mass(p.stiffness * v);
  CHECK(discrete_sobolev_norm(b, p.mass, v, 2.0) == doctest::Approx(std::sqrt(w.dot(p.mass * w))).epsilon(1e-10));
  CHECK(discrete_sobolev_norm(b, p.mass, Vector::Zero(p.size()), 2.0) == 0.0);
}

TEST_CASE("rate fits") {
  const std::vector<double> h{0.125, 0.0625, 0.03125};
  std::vector<double> e2, e43;
  for (double x : h) {
    e2.push_back(x * x);
    e43.push_back(3.0 * std::pow(x, 4.0 / 3.0));
  }
  CHECK(fit_rate(h, e2).slope == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(fit_rate(h, e2).residual <= 1e-13);
  const auto f = fit_rate(h, e43);
  CHECK(std::abs(f.slope - 4.0 / 3.0) <= 1e-12);
  CHECK(std::abs(f.intercept - std::log(3.0)) <= 1e-12);

  const std::vector<double> h2{0.5, 0.25}, e{0.3, 0.1};
  CHECK(fit_rate(h2, e).slope == doctest::Approx(std::log2(3.0)).epsilon(1e-14));

  std::vector<double> scaled;
  for (double x : e43) scaled.push_back(17.0 * x);
  CHECK(std::abs(fit_rate(h, scaled).slope - f.slope) <= 1e-14);

  const std::vector<double> t{0.25, 0.125, 0.0625};
  std::vector<double> et;
  for (double x : t) et.push_back(2.0 / std::sqrt(x));
  CHECK(fit_time_exponent(t, et).slope == doctest::Approx(-0.5).epsilon(1e-13));

  CHECK_THROWS_AS(fit_rate(std::vector<double>{0.1}, std::vector<double>{1.0}), InvalidParameter);
  CHECK_THROWS_AS(fit_rate(h, std::vector<double>{1.0, 0.0, 1.0}), InvalidParameter);
}

TEST_CASE("smooth data gives a flat temporal error profile at small times") {
  // lambda_max t^alpha stays below 1e-2 on this mesh
  InitialDataSpec spec;
  spec.kind = InitialKind::delta_series;
  spec.delta = 2.0;
  spec.modes = 32;
  const auto s = ExactSolutionSeries::from_spec(spec);
  const Mesh m = Mesh::unit_square(16);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  const Vector u0 = l2_project(m, p, s.function());
  const FractionalOrder order(0.5);
  std::vector<double> t, e;
  for (double x : {1e-12, 5e-13, 2.5e-13, 1.25e-13}) {
    const auto f = PiecewiseLinearField::from_p1(m, p, spectral_solve(b, p.mass, order, u0, x));
    const auto ex = s.at_time(0.5, x);
    t.push_back(x);
    e.push_back(l2_error_moments(m, f, ex.moments(m), ex.sobolev_norm_sq(0.0)));
  }
  CHECK(std::abs(fit_time_exponent(t, e).slope) <= 0.05);
}

TEST_CASE("reference solutions") {
  const MeshHierarchy H(Mesh::unit_square(4), 5);
  CHECK(H.mesh(4).divisions() == 64);
  CHECK(H.level_of_divisions(16) == 2);
  CHECK_THROWS_AS(H.level_of_divisions(12), InvalidParameter);

  const auto u = [](Point q) { return std::sin(pi * q.x) * std::sin(pi * q.y); };
  auto nodal = [&](int level) {
    const Mesh& mesh = H.mesh(level);
    const auto p = assemble(mesh);
    return p1_full_nodal(mesh, p, l2_project(mesh, p, u));
  };
  const Vector fine = nodal(4);
  const ReferenceSolution ref(H, 4, fine, 2);
  CHECK(ref.l2_distance(4, fine) == 0.0);
  CHECK_THROWS_AS(ReferenceSolution(H, 4, fine, 3), InvalidParameter);
  CHECK_THROWS_AS(ReferenceSolution(H, 4, nodal(3), 1), InvalidParameter);

  const Mesh& fm = H.mesh(4);
  const double fine_err = l2_error(fm, PiecewiseLinearField::from_nodal(fm, fine), u);
  double prev = 1e300;
  for (int level : {0, 1, 2}) {
    const Vector c = nodal(level);
    const double d = ref.l2_distance(level, c);
    const double exact = l2_error(H.mesh(level), PiecewiseLinearField::from_nodal(H.mesh(level), c), u);
    CHECK(std::abs(d - exact) <= fine_err * (1.0 + 1e-9));
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("reference errors decrease on the L-shape") {
  const MeshHierarchy H(Mesh::l_shape(2), 6);
  const auto u0 = corner_singular_function(0.9);
  auto ritz = [&](int level) {
    const Mesh& mesh = H.mesh(level);
    const auto p = assemble(mesh);
    return p1_full_nodal(mesh, p, elliptic_solve(p, load_vector(mesh, p, u0)));
  };
  const ReferenceSolution ref(H, 5, ritz(5), 3);
  double prev = 1e300;
  for (int level : {1, 2, 3}) {
    const double d = ref.l2_distance(level, ritz(level));
    CHECK(d < prev);
    prev = d;
  }
}
