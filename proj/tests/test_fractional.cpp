#include "fracfem/fractional.hpp"
#include "fracfem/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fracfem;

TEST_CASE("omega kernel") {
  CHECK(omega(1.0, 2.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(omega(2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(omega(0.5, 1.0) == doctest::Approx(0.5641895835477563).epsilon(1e-14));
  CHECK_THROWS_AS(omega(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(omega(0.5, -1.0), DomainError);
}

TEST_CASE("reciprocal gamma vanishes at the poles") {
  CHECK(rgamma(0.0) == 0.0);
  CHECK(rgamma(-3.0) == 0.0);
  CHECK(rgamma(2.5) == doctest::Approx(1.0 / std::tgamma(2.5)).epsilon(1e-15));
  CHECK(rgamma(-0.5) == doctest::Approx(1.0 / std::tgamma(-0.5)).epsilon(1e-14));
}

TEST_CASE("Riemann-Liouville integral") {
  const TimeGrid grid(1.0, 40, 2.0);
  SUBCASE("constants are integrated exactly") {
    const std::vector<double> ones(grid.steps() + 1, 1.0);
    for (double nu : {0.2, 0.5, 0.9}) {
      const auto I = riemann_liouville_integral(grid, nu, ones);
      for (int n = 0; n <= grid.steps(); ++n)
        CHECK(std::abs(I[n] - std::pow(grid.t(n), nu) / std::tgamma(nu + 1.0)) <= 1e-14);
    }
  }
  SUBCASE("nu = 1 is the cumulative trapezoid") {
    std::vector<double> v;
    for (double t : grid.nodes()) v.push_back(std::cos(3.0 * t));
    const auto I = riemann_liouville_integral(grid, 1.0, v);
    double s = 0.0;
    for (int n = 1; n <= grid.steps(); ++n) {
      s += 0.5 * grid.tau(n) * (v[n - 1] + v[n]);
      CHECK(I[n] == doctest::Approx(s).epsilon(1e-13));
    }
  }
  SUBCASE("I^0.5 of t at t = 1") {
    std::vector<double> v(grid.nodes().begin(), grid.nodes().end());
    const auto I = riemann_liouville_integral(grid, 0.5, v);
    CHECK(I.back() == doctest::Approx(0.7522527780636750).epsilon(1e-13));
  }
  SUBCASE("semigroup I^mu I^nu = I^{mu+nu} on refining grids") {
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
      const TimeGrid g(1.0, n, 1.0);
      std::vector<double> v;
      for (double t : g.nodes()) v.push_back(t * t);
      const auto a = riemann_liouville_integral(g, 0.3, riemann_liouville_integral(g, 0.4, v));
      const auto b = riemann_liouville_integral(g, 0.7, v);
      err.push_back(std::abs(a.back() - b.back()));
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
    CHECK(err[2] < 1e-4);
  }
}

TEST_CASE("L1 weights on a uniform grid") {
  const TimeGrid grid = TimeGrid::uniform(2.0, 2);
  std::vector<double> row(2);
  l1_row_unscaled(grid, 0.5, 2, row);
  CHECK(row[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(row[0] == doctest::Approx(0.41421356237309505).epsilon(1e-15));
}

TEST_CASE("L1 Caputo of constants vanishes") {
  const TimeGrid grid(1.0, 50, 3.0);
  const std::vector<double> c(grid.steps() + 1, 4.2);
  for (const auto& order : {FractionalOrder(0.4), FractionalOrder(0.7, {{0.2, 2.0}})}) {
    const auto d = caputo_l1(order, grid, c);
    for (double x : d) CHECK(x == 0.0);
  }
}

TEST_CASE("L1 Caputo of powers converges at the scheme order") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (double sigma : {1.0, 1.0 + alpha}) {
      std::vector<double> err;
      for (int n : {64, 128, 256}) {
        const TimeGrid grid(1.0, n, default_grading(alpha));
        std::vector<double> v;
        for (double t : grid.nodes()) v.push_back(std::pow(t, sigma));
        const auto d = caputo_l1(FractionalOrder(alpha), grid, v);
        const double exact = std::tgamma(sigma + 1.0) / std::tgamma(sigma + 1.0 - alpha);
        err.push_back(std::abs(d.back() - exact));
      }
      if (sigma == 1.0) {
        for (double e : err) CHECK(e <= 1e-13);
      } else {
        const double rate = std::log2(err[1] / err[2]);
        CHECK(rate >= 2.0 - alpha - 0.2);
      }
    }
  }
}

TEST_CASE("Mittag-Leffler closed forms and oracle values") {
  CHECK(mittag_leffler(1.0, 1.0, -1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(mittag_leffler(0.5, 1.0, 0.0) == 1.0);
  CHECK(mittag_leffler(0.5, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(mittag_leffler(0.5, 1.0, -1.0) - 0.42758357615580700) <= 1e-15);
  CHECK(std::abs(mittag_leffler(0.5, 1.0, -16.0) - 0.035193377824930838) <= 1e-15);
  CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(mittag_leffler(1.5, 1.0, -1.0), InvalidParameter);
  CHECK_THROWS_AS(mittag_leffler(0.5, 0.0, -1.0), InvalidParameter);
}

TEST_CASE("Mittag-Leffler against the 50-digit table") {
  std::ifstream in(std::string(FRACFEM_TEST_DATA_DIR) + "/mittag_leffler_table.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double a, b, z, v;
    char c;
    ss >> a >> c >> b >> c >> z >> c >> v;
    REQUIRE_FALSE(ss.fail());
    worst = std::max(worst, std::abs(mittag_leffler(a, b, z) - v));
    ++rows;
  }
  CHECK(rows >= 500);
  CHECK(worst <= 1e-10);
}

TEST_CASE("Mittag-Leffler is completely monotone on the sampled axis") {
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    double prev = 1.0;
    for (int k = 1; k <= 1000; ++k) {
      const double z = -std::pow(10.0, -3.0 + 5.5 * k / 1000.0);
      const double v = mittag_leffler(alpha, 1.0, z);
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("positivity probe") {
  const TimeGrid grid = TimeGrid::uniform(1.0, 64);
  CHECK(positivity_probe(grid, 0.5, std::vector<double>(65, 0.0)) == 0.0);
  CHECK(positivity_probe(grid, 0.5, std::vector<double>(65, 1.0)) == doctest::Approx(0.7522527780636750).epsilon(1e-13));

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> sign(0, 1);
  for (double nu : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const TimeGrid g(1.0, 48, 2.5);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> v(49);
      for (auto& x : v) x = sign(rng) ? 1.0 : -1.0;
      CHECK(positivity_probe(g, nu, v) >= -1e-12);
    }
  }
}

TEST_CASE("positivity probe does not depend on how a piecewise-linear function is sampled") {
  const TimeGrid grid = TimeGrid::uniform(1.0, 8);
  const std::vector<double> v{0.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0};
  const double nu = 0.5;
  const TimeGrid fine = TimeGrid::uniform(1.0, 8 * 80);
  std::vector<double> fv;
  for (double t : fine.nodes()) {
    const int k = std::min(7, static_cast<int>(t * 8.0));
    const double s = t * 8.0 - k;
    fv.push_back((1.0 - s) * v[k] + s * v[k + 1]);
  }
  const double coarse = positivity_probe(grid, nu, v);
  const double dense = positivity_probe(fine, nu, fv);
  CHECK(coarse == doctest::Approx(dense).epsilon(1e-10));
  CHECK(coarse >= -1e-12);
}

TEST_CASE("Leibniz residual") {
  const TimeGrid grid = TimeGrid::uniform(1.0, 32);
  CHECK(leibniz_residual(grid, FractionalOrder(0.5), std::vector<double>(33, 0.0)) == 0.0);

  std::vector<double> bad(33, 1.0);
  CHECK_THROWS_AS(leibniz_residual(grid, FractionalOrder(0.5), bad), InvalidParameter);

  SUBCASE("phi = t, single term") {
    std::vector<double> r;
    for (int n : {32, 64, 128}) {
      const TimeGrid g = TimeGrid::uniform(1.0, n);
      r.push_back(leibniz_residual(g, FractionalOrder(0.5), g.nodes()));
    }
    CHECK(r[1] < r[0]);
    CHECK(r[2] < r[1]);
  }
  SUBCASE("phi = t^2, two terms: doubling N at least halves the residual") {
    std::vector<double> r;
    for (int n : {32, 64, 128, 256}) {
      const TimeGrid g = TimeGrid::uniform(1.0, n);
      std::vector<double> v;
      for (double t : g.nodes()) v.push_back(t * t);
      r.push_back(leibniz_residual(g, FractionalOrder(0.6, {{0.3, 1.5}}), v));
    }
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] <= 0.5 * r[i - 1]);
  }
}

TEST_CASE("graded grid") {
  const TimeGrid g(2.0, 10, 3.0);
  CHECK(g.t(0) == 0.0);
  CHECK(g.t(10) == 2.0);
  CHECK(g.t(5) == doctest::Approx(2.0 * 0.125));
  CHECK(default_grading(0.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(TimeGrid(1.0, 0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(TimeGrid(1.0, 4, 0.5), InvalidParameter);
}

TEST_CASE("L1 history kernel is identical across execution policies") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const int n = 1000, steps = 37;
  std::vector<Vector> inc(steps, Vector(n));
  std::vector<double> w(steps);
  for (auto& v : inc)
    for (int i = 0; i < n; ++i) v[i] = g(rng);
  for (auto& x : w) x = g(rng);
  Vector a(n), b(n);
  l1_history(Exec::serial, w, inc, steps, a);
  l1_history(Exec::parallel, w, inc, steps, b);
  CHECK((a.array() == b.array()).all());

  DenseMatrix V = DenseMatrix::Random(300, 200);
  Vector d = Vector::Random(200), x(300), y(300);
  modal_synthesis(Exec::serial, V, d, x);
  modal_synthesis(Exec::parallel, V, d, y);
  CHECK((x.array() == y.array()).all());
  CHECK((x - V * d).norm() <= 1e-12 * (V * d).norm());
}
