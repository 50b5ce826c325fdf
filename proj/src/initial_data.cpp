#include "fracfem/initial_data.hpp"

#include "fracfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace fracfem {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::single_mode: return "single_mode";
    case InitialKind::smooth_product: return "smooth_product";
    case InitialKind::indicator_half: return "indicator_half";
    case InitialKind::delta_series: return "prescribed_delta_series";
    case InitialKind::bump: return "bump";
    case InitialKind::corner_singular: return "corner_singular";
  }
  return "?";
}

InitialKind initial_kind_from_string(const std::string& name) {
  if (name == "single_mode") return InitialKind::single_mode;
  if (name == "smooth_product") return InitialKind::smooth_product;
  if (name == "indicator_half") return InitialKind::indicator_half;
  if (name == "prescribed_delta_series" || name == "delta_series") return InitialKind::delta_series;
  if (name == "bump") return InitialKind::bump;
  if (name == "corner_singular") return InitialKind::corner_singular;
  throw InvalidParameter("unknown initial data kind '" + name + "'");
}

ExactSolutionSeries::ExactSolutionSeries(DenseMatrix coefficients) : c_(std::move(coefficients)) {}

double ExactSolutionSeries::eigenvalue(int m, int n) { return kPi * kPi * (double(m) * m + double(n) * n); }

double ExactSolutionSeries::eigenfunction(int m, int n, Point p) {
  return 2.0 * std::sin(m * kPi * p.x) * std::sin(n * kPi * p.y);
}

ExactSolutionSeries ExactSolutionSeries::single_mode(int m, int n, double c) {
  if (m < 1 || n < 1) throw InvalidParameter("mode indices start at 1");
  DenseMatrix C = DenseMatrix::Zero(m, n);
  C(m - 1, n - 1) = c;
  return ExactSolutionSeries(std::move(C));
}

ExactSolutionSeries ExactSolutionSeries::from_spec(const InitialDataSpec& spec) {
  const int M = spec.modes;
  if (spec.kind != InitialKind::single_mode && M < 1) throw InvalidParameter("series needs at least one mode");
  DenseMatrix C;
  switch (spec.kind) {
    case InitialKind::single_mode:
      return single_mode(spec.mode_m, spec.mode_n);
    case InitialKind::smooth_product:
      C = DenseMatrix::Zero(M, M);
      for (int m = 1; m <= M; m += 2)
        for (int n = 1; n <= M; n += 2) C(m - 1, n - 1) = 32.0 / (std::pow(kPi, 6) * std::pow(double(m) * n, 3));
      break;
    case InitialKind::indicator_half:
      C = DenseMatrix::Zero(M, M);
      for (int m = 1; m <= M; ++m)
        for (int n = 1; n <= M; ++n) {
          const double cx = std::numbers::sqrt2 * (1.0 - std::cos(m * kPi / 2.0)) / (m * kPi);
          const double cy = n % 2 == 1 ? 2.0 * std::numbers::sqrt2 / (n * kPi) : 0.0;
          C(m - 1, n - 1) = cx * cy;
        }
      break;
    case InitialKind::delta_series: {
      if (spec.delta < 0.0 || spec.epsilon <= 0.0) throw InvalidParameter("delta series needs delta >= 0, epsilon > 0");
      C.resize(M, M);
      const double p = -(spec.delta + 1.0 + spec.epsilon) / 2.0;
      for (int m = 1; m <= M; ++m)
        for (int n = 1; n <= M; ++n) C(m - 1, n - 1) = std::pow(eigenvalue(m, n), p);
      C /= C.norm();
      break;
    }
    case InitialKind::bump:
    case InitialKind::corner_singular:
      throw InvalidParameter(std::string(to_string(spec.kind)) + " data has no sine series");
  }
  return ExactSolutionSeries(std::move(C));
}

double ExactSolutionSeries::sobolev_norm_sq(double r) const {
  double s = 0.0;
  for (int n = 1; n <= modes_y(); ++n)
    for (int m = 1; m <= modes_x(); ++m) {
      const double c = c_(m - 1, n - 1);
      if (c != 0.0) s += std::pow(eigenvalue(m, n), r) * c * c;
    }
  return s;
}

ExactSolutionSeries ExactSolutionSeries::map(const std::function<double(double)>& f) const {
  DenseMatrix C = c_;
  for (int n = 1; n <= modes_y(); ++n)
    for (int m = 1; m <= modes_x(); ++m)
      if (C(m - 1, n - 1) != 0.0) C(m - 1, n - 1) *= f(eigenvalue(m, n));
  return ExactSolutionSeries(std::move(C));
}

ExactSolutionSeries ExactSolutionSeries::at_time(double alpha, double t) const {
  const double ta = std::pow(t, alpha);
  // E depends on m^2 + n^2 only
  std::unordered_map<int, double> decay;
  DenseMatrix C = c_;
  for (int n = 1; n <= modes_y(); ++n)
    for (int m = 1; m <= modes_x(); ++m) {
      if (C(m - 1, n - 1) == 0.0) continue;
      const int key = m * m + n * n;
      auto it = decay.find(key);
      if (it == decay.end()) it = decay.emplace(key, mittag_leffler(alpha, 1.0, -eigenvalue(m, n) * ta)).first;
      C(m - 1, n - 1) *= it->second;
    }
  return ExactSolutionSeries(std::move(C));
}

double ExactSolutionSeries::value(Point p) const {
  Vector sx(modes_x()), sy(modes_y());
  for (int m = 0; m < modes_x(); ++m) sx[m] = std::sin((m + 1) * kPi * p.x);
  for (int n = 0; n < modes_y(); ++n) sy[n] = std::sin((n + 1) * kPi * p.y);
  return 2.0 * sx.dot(c_ * sy);
}

Point ExactSolutionSeries::gradient(Point p) const {
  Vector sx(modes_x()), cx(modes_x()), sy(modes_y()), cy(modes_y());
  for (int m = 0; m < modes_x(); ++m) {
    sx[m] = std::sin((m + 1) * kPi * p.x);
    cx[m] = (m + 1) * kPi * std::cos((m + 1) * kPi * p.x);
  }
  for (int n = 0; n < modes_y(); ++n) {
    sy[n] = std::sin((n + 1) * kPi * p.y);
    cy[n] = (n + 1) * kPi * std::cos((n + 1) * kPi * p.y);
  }
  return {2.0 * cx.dot(c_ * sy), 2.0 * sx.dot(c_ * cy)};
}

ScalarFunction ExactSolutionSeries::function() const {
  return [self = *this](Point p) { return self.value(p); };
}

VectorFunction ExactSolutionSeries::flux() const {
  return [self = *this](Point p) { return self.gradient(p); };
}

int ExactSolutionSeries::moment_points(double h) const {
  const int M = std::max(modes_x(), modes_y());
  return static_cast<int>(std::ceil(0.5 * kPi * M * h)) + 10;
}

namespace {

// sum_{n>=1} g[n-1] sin(n theta) by Clenshaw's recurrence
double sine_sum(const double* g, int count, double theta) {
  const double c2 = 2.0 * std::cos(theta);
  double b1 = 0.0, b2 = 0.0;
  for (int k = count - 1; k >= 0; --k) {
    const double b0 = g[k] + c2 * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return b1 * std::sin(theta);
}

int vertical_apex(const std::array<Point, 3>& p) {
  for (int k = 0; k < 3; ++k)
    if (p[(k + 1) % 3].x == p[(k + 2) % 3].x) return k;
  return -1;
}

}  // namespace

std::vector<std::array<double, 3>> ExactSolutionSeries::moments(const Mesh& mesh, Exec exec) const {
  const int nt = mesh.num_triangles();
  const int q = moment_points(mesh.mesh_size());
  const LineRule g = gauss_legendre(q);
  const int Mx = modes_x(), My = modes_y();

  // distinct abscissae of the vertical point columns
  std::vector<double> xs;
  std::vector<int> apex(nt);
  for (int t = 0; t < nt; ++t) {
    auto p = mesh.corners(t);
    apex[t] = vertical_apex(p);
    if (apex[t] < 0) continue;
    const double xa = p[apex[t]].x, xe = p[(apex[t] + 1) % 3].x;
    for (int i = 0; i < q; ++i) xs.push_back((1.0 - g.nodes[i]) * xa + g.nodes[i] * xe);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // G(:, j) = sum_m c(m, :) sin(m pi x_j)
  DenseMatrix G(My, static_cast<int>(xs.size()));
  for_each_index(exec, static_cast<int>(xs.size()), [&](int j) {
    Vector s(Mx);
    for (int m = 0; m < Mx; ++m) s[m] = std::sin((m + 1) * kPi * xs[j]);
    G.col(j) = c_.transpose() * s;
  });

  std::vector<std::array<double, 3>> out(nt, {0.0, 0.0, 0.0});
  for_each_index(exec, nt, [&](int t) {
    const double area = mesh.area(t);
    auto& o = out[t];
    if (apex[t] < 0) {
      const QuadratureRule r = collapsed_gauss(q, 0);
      for (int i = 0; i < r.size(); ++i) {
        const double w = r.weights[i] * area * value(mesh.map(t, r.points[i]));
        for (int k = 0; k < 3; ++k) o[k] += w * r.points[i][k];
      }
      return;
    }
    auto p = mesh.corners(t);
    const int a0 = apex[t], a1 = (a0 + 1) % 3, a2 = (a0 + 2) % 3;
    const double xa = p[a0].x, xe = p[a1].x;
    for (int i = 0; i < q; ++i) {
      const double a = g.nodes[i];
      const double x = (1.0 - a) * xa + a * xe;
      const int col = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
      const double* gc = G.data() + static_cast<std::ptrdiff_t>(col) * My;
      for (int j = 0; j < q; ++j) {
        const double b = g.nodes[j];
        std::array<double, 3> l{};
        l[a0] = 1.0 - a;
        l[a1] = a * (1.0 - b);
        l[a2] = a * b;
        const double y = l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y;
        const double u = 2.0 * sine_sum(gc, My, kPi * y);
        const double w = 2.0 * a * g.weights[i] * g.weights[j] * area * u;
        for (int k = 0; k < 3; ++k) o[k] += w * l[k];
      }
    }
  });
  return out;
}

ScalarFunction bump_function(Point center, double radius) {
  return [center, radius](Point p) {
    const double r2 = dot(p - center, p - center) / (radius * radius);
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
  };
}

ScalarFunction corner_singular_function(double radius) {
  const auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  return [radius, f](Point p) {
    const double r = std::hypot(p.x, p.y);
    if (r >= radius || r == 0.0) return 0.0;
    double theta = std::atan2(p.y, p.x);
    if (theta < 0.0) theta += 2.0 * kPi;
    const double x = 2.0 - 2.0 * r / radius;
    const double cut = f(x) / (f(x) + f(1.0 - x));
    return cut * std::pow(r, 2.0 / 3.0) * std::sin(2.0 * theta / 3.0);
  };
}

ScalarFunction initial_function(const InitialDataSpec& spec) {
  if (spec.kind == InitialKind::bump) return bump_function(spec.center, spec.radius);
  if (spec.kind == InitialKind::corner_singular) return corner_singular_function(spec.radius);
  return ExactSolutionSeries::from_spec(spec).function();
}

}  // namespace fracfem
