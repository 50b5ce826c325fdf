#include "fracfem/errors.hpp"
#include "fracfem/evolution.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

using namespace fracfem;

namespace {

constexpr double pi = std::numbers::pi;

double smooth(Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }

Vector random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

}  // namespace

TEST_CASE("spectral propagator on the single interior node") {
  const Mesh m = Mesh::unit_square(2);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  const Vector u0 = Vector::Constant(1, 2.0);
  const SpectralPropagator prop(b, p.mass, FractionalOrder(0.5), u0);
  // lambda = 32, so t = 1/4 gives E_{1/2}(-16)
  CHECK(std::abs(prop.solve(0.25)[0] - 2.0 * 0.035193377824930838) <= 1e-14);
  CHECK((prop.solve(0.0) - u0).norm() == 0.0);
  CHECK(prop.modal_energy() == doctest::Approx(u0.dot(p.mass * u0)).epsilon(1e-14));
}

TEST_CASE("order near one approaches the exponential") {
  const Mesh m = Mesh::unit_square(8);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  const Vector u0 = l2_project(m, p, smooth);
  double prev = 1e300;
  for (double alpha : {0.9, 0.99, 0.999}) {
    const Vector u = spectral_solve(b, p.mass, FractionalOrder(alpha), u0, 0.05);
    const Vector ref = b.eigenvectors * (b.eigenvalues.array() * -0.05).exp().matrix().cwiseProduct(
                                            b.eigenvectors.transpose() * (p.mass * u0));
    const double e = (u - ref).norm() / ref.norm();
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("scalar L1 matches the Mittag-Leffler solution") {
  const double lambda = 16.0, alpha = 0.5;
  const TimeGrid grid(1.0, 1024, 3.0);
  const auto y = scalar_l1_evolve(FractionalOrder(alpha), grid, lambda, 1.0);
  CHECK(std::abs(y.back() - mittag_leffler(alpha, 1.0, -lambda)) <= 1e-4);
  CHECK(y.front() == 1.0);

  const auto zero = scalar_l1_evolve(FractionalOrder(alpha), grid, lambda, 0.0);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("L1 temporal rate for a manufactured solution") {
  // y = t^2 solves P(d_t) y + y = g with g = 2 t^{2-alpha} / Gamma(3 - alpha) + t^2
  for (double alpha : {0.3, 0.5, 0.7}) {
    const auto g = [alpha](double t) { return 2.0 * std::pow(t, 2.0 - alpha) / std::tgamma(3.0 - alpha) + t * t; };
    std::vector<double> err;
    for (int n : {64, 128, 256}) {
      const TimeGrid grid = TimeGrid::uniform(1.0, n);
      const auto y = scalar_l1_evolve(FractionalOrder(alpha), grid, 1.0, 0.0, g);
      double e = 0.0;
      for (int k = 0; k <= n; ++k) e = std::max(e, std::abs(y[k] - grid.t(k) * grid.t(k)));
      err.push_back(e);
    }
    CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0 - alpha).epsilon(0.1));
  }
}

TEST_CASE("fully discrete L1 evolution agrees with the spectral solution") {
  const Mesh m = Mesh::unit_square(8);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  const Vector u0 = l2_project(m, p, smooth);
  const FractionalOrder order(0.5);
  const TimeGrid grid(1.0, 1024, default_grading(0.5));
  EllipticStepping op(p);
  const auto state = l1_evolve(op, order, grid, u0);
  REQUIRE(state.done());
  const Vector ref = spectral_solve(b, p.mass, order, u0, 1.0);
  CHECK((state.current() - ref).norm() <= 1e-4 * ref.norm());

  EllipticStepping z(p);
  const auto still = l1_evolve(z, order, TimeGrid(1.0, 16, 2.0), Vector::Zero(p.size()));
  CHECK(still.current().norm() == 0.0);
}

TEST_CASE("contour propagator agrees with the eigenbasis") {
  const Mesh m = Mesh::l_shape(8);
  const auto p = assemble(m);
  const auto b = eigendecompose(p);
  const Vector u0 = random_vector(p.size(), 4);
  for (double alpha : {0.3, 0.7}) {
    const FractionalOrder order(alpha);
    const ContourPropagator c(p, order, u0);
    for (double t : {1e-3, 0.1, 1.0}) {
      const Vector ref = spectral_solve(b, p.mass, order, u0, t);
      CHECK((c.solve(t) - ref).norm() <= 1e-9 * u0.norm());
    }
    CHECK((c.solve(0.0) - u0).norm() == 0.0);
  }
  CHECK_THROWS_AS(ContourPropagator(p, FractionalOrder(0.5, {{0.2, 1.0}}), u0), Unsupported);
  CHECK_THROWS_AS(ContourPropagator(p, FractionalOrder(0.5), u0, Exec::serial, 2), InvalidParameter);
}

TEST_CASE("mixed contour propagator keeps the flux relation") {
  const Mesh m = Mesh::unit_square(4);
  const MixedSystem sys(m, 1);
  const Vector u0 = sys.scalar_project(smooth);
  const auto b = mixed_eigendecompose(sys);
  const ContourPropagator c(sys, FractionalOrder(0.5), u0);
  Vector sigma;
  const Vector u = c.solve(0.2, &sigma);
  CHECK((u - spectral_solve(b, sys.A, FractionalOrder(0.5), u0, 0.2)).norm() <= 1e-9 * u0.norm());
  CHECK(flux_relation_residual(sys, u, sigma) <= 1e-9);
}

TEST_CASE("evolution reports non-finite states") {
  const Mesh m = Mesh::unit_square(4);
  const auto p = assemble(m);
  Vector u0 = Vector::Ones(p.size());
  u0[0] = std::numeric_limits<double>::quiet_NaN();
  EllipticStepping op(p);
  CHECK_THROWS(l1_evolve(op, FractionalOrder(0.5), TimeGrid(1.0, 4, 1.0), u0));
}

TEST_CASE("evolution is identical across execution policies") {
  const Mesh m = Mesh::l_shape(8);
  const auto p = assemble(m);
  const Vector u0 = random_vector(p.size(), 8);
  const FractionalOrder order(0.4, {{0.2, 0.5}});
  const TimeGrid grid(1.0, 40, 2.0);
  EllipticStepping a(p), b(p);
  const auto sa = l1_evolve(a, order, grid, u0, {}, Exec::serial);
  const auto sb = l1_evolve(b, order, grid, u0, {}, Exec::parallel);
  for (int k = 0; k <= grid.steps(); ++k) CHECK((sa.history()[k].array() == sb.history()[k].array()).all());

  const auto basis = eigendecompose(p);
  const SpectralPropagator ps(basis, p.mass, FractionalOrder(0.4), u0, Exec::serial);
  const SpectralPropagator pp(basis, p.mass, FractionalOrder(0.4), u0, Exec::parallel);
  CHECK((ps.solve(0.3).array() == pp.solve(0.3).array()).all());

  const ContourPropagator cs(p, FractionalOrder(0.4), u0, Exec::serial);
  const ContourPropagator cp(p, FractionalOrder(0.4), u0, Exec::parallel);
  CHECK((cs.solve(0.3).array() == cp.solve(0.3).array()).all());
}

TEST_CASE("trajectory CSV layout") {
  std::ostringstream os;
  const std::vector<Vector> u{Vector::Constant(2, 1.0), Vector::Constant(2, 0.5)};
  const std::vector<Vector> s{Vector::Constant(1, 3.0), Vector::Constant(1, 2.0)};
  write_trajectory_csv(os, {0.0, 0.5}, u, s, {{"l2", {0.0, 1e-3}}});
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,u0,u1,s0,l2");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 2);
}
