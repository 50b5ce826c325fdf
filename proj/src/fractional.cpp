#include "fracfem/fractional.hpp"

#include "fracfem/common.hpp"
#include "fracfem/quadrature.hpp"
#include "fracfem/summation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracfem {

FractionalOrder::FractionalOrder(double alpha, std::vector<FractionalTerm> terms)
    : alpha_(alpha), terms_(std::move(terms)) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("fractional order alpha must lie in (0,1)");
  std::sort(terms_.begin(), terms_.end(),
            [](const FractionalTerm& a, const FractionalTerm& b) { return a.alpha > b.alpha; });
  for (const auto& t : terms_) {
    if (!(t.alpha > 0.0 && t.alpha <= alpha))
      throw InvalidParameter("multi-term order " + std::to_string(t.alpha) + " must lie in (0, alpha]");
    if (!(t.b > 0.0)) throw InvalidParameter("multi-term coefficient b must be positive");
  }
}

double omega(double order, double t) {
  if (!(order > 0.0)) throw InvalidParameter("omega: order must be positive");
  if (!(t > 0.0)) throw DomainError("omega: t must be positive");
  return std::pow(t, order - 1.0) / std::tgamma(order);
}

TimeGrid::TimeGrid(double horizon, int steps, double grading)
    : horizon_(horizon), steps_(steps), grading_(grading) {
  if (!(horizon > 0.0)) throw InvalidParameter("time horizon must be positive");
  if (steps < 1) throw InvalidParameter("number of time steps must be >= 1");
  if (!(grading >= 1.0)) throw InvalidParameter("grading exponent must be >= 1");
  nodes_.resize(steps + 1);
  for (int n = 0; n <= steps; ++n)
    nodes_[n] = grading == 1.0 ? horizon * n / steps : horizon * std::pow(double(n) / steps, grading);
  nodes_[steps] = horizon;
}

double default_grading(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("default_grading: alpha must lie in (0,1)");
  return (2.0 - alpha) / alpha;
}

namespace {

// (b + tau)^p - b^p without cancellation
double power_difference(double b, double tau, double p) {
  if (b <= 0.0) return std::pow(tau, p);
  return std::pow(b, p) * std::expm1(p * std::log1p(tau / b));
}

}  // namespace

void l1_row_unscaled(const TimeGrid& grid, double p, int n, std::span<double> out) {
  const double tn = grid.t(n);
  for (int k = 1; k <= n; ++k) {
    const double tau = grid.tau(k);
    out[k - 1] = power_difference(tn - grid.t(k), tau, p) / tau;
  }
}

L1Weights::L1Weights(const FractionalOrder& order, const TimeGrid& grid) : order_(order), grid_(grid) {}

void L1Weights::row(int n, std::span<double> out) const {
  if (n < 1 || n > grid_.steps()) throw InvalidParameter("L1Weights::row: step out of range");
  const double a = order_.alpha();
  l1_row_unscaled(grid_, 1.0 - a, n, out);
  const double g = rgamma(2.0 - a);
  for (int k = 0; k < n; ++k) out[k] *= g;
  if (order_.terms().empty()) return;
  std::vector<double> tmp(n);
  for (const auto& term : order_.terms()) {
    l1_row_unscaled(grid_, 1.0 - term.alpha, n, tmp);
    const double s = term.b * rgamma(2.0 - term.alpha);
    for (int k = 0; k < n; ++k) out[k] += s * tmp[k];
  }
}

std::vector<double> L1Weights::row(int n) const {
  std::vector<double> out(n);
  row(n, out);
  return out;
}

double L1Weights::leading(int n) const {
  const double tau = grid_.tau(n);
  double w = std::pow(tau, -order_.alpha()) * rgamma(2.0 - order_.alpha());
  for (const auto& term : order_.terms()) w += term.b * std::pow(tau, -term.alpha) * rgamma(2.0 - term.alpha);
  return w;
}

std::vector<double> caputo_l1(const FractionalOrder& order, const TimeGrid& grid, std::span<const double> u) {
  const int N = grid.steps();
  if (static_cast<int>(u.size()) != N + 1) throw InvalidParameter("caputo_l1: sample count must be steps + 1");
  L1Weights w(order, grid);
  std::vector<double> out(N + 1, 0.0), row(N);
  for (int n = 1; n <= N; ++n) {
    w.row(n, row);
    CompensatedSum s;
    for (int k = 1; k <= n; ++k) s.add(row[k - 1] * (u[k] - u[k - 1]));
    out[n] = s.value();
  }
  return out;
}

namespace {

// int_B^{B+tau} u^{nu-1} du and int_B^{B+tau} u^{nu-1} (u - B) du
void rl_moments(double B, double tau, double nu, double& j0, double& j1) {
  j0 = power_difference(B, tau, nu) / nu;
  if (B > 10.0 * tau) {
    static const LineRule g = gauss_legendre(8);
    double s = 0.0;
    for (int q = 0; q < g.size(); ++q) {
      const double v = g.nodes[q];
      s += g.weights[q] * std::pow(B + tau * v, nu - 1.0) * v;
    }
    j1 = tau * tau * s;
  } else {
    const double A = B + tau;
    j1 = (std::pow(A, nu + 1.0) - std::pow(B, nu + 1.0)) / (nu + 1.0) - B * j0;
  }
}

}  // namespace

std::vector<double> riemann_liouville_integral(const TimeGrid& grid, double nu, std::span<const double> phi) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidParameter("riemann_liouville_integral: order must lie in (0,1]");
  const int N = grid.steps();
  if (static_cast<int>(phi.size()) != N + 1) throw InvalidParameter("riemann_liouville_integral: sample count must be steps + 1");
  const double g = rgamma(nu);
  std::vector<double> out(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) {
    const double tn = grid.t(n);
    CompensatedSum s;
    for (int k = 1; k <= n; ++k) {
      const double tau = grid.tau(k);
      double j0, j1;
      rl_moments(tn - grid.t(k), tau, nu, j0, j1);
      // phi(s) = phi_k + (phi_{k-1} - phi_k) (u - B) / tau with u = t_n - s
      s.add(phi[k] * j0 + (phi[k - 1] - phi[k]) * j1 / tau);
    }
    out[n] = g * s.value();
  }
  return out;
}

namespace {

// omega_{nu+j}(r), zero at r = 0
double K(double nu, int j, double r) {
  if (r <= 0.0) return 0.0;
  return std::pow(r, nu + j - 1.0) * rgamma(nu + j);
}

// int_{t0}^{t1} K_j(t - c) f(t) dt, f linear with values f0, f1
double H(double nu, int j, double c, double t0, double t1, double f0, double f1) {
  const double slope = (f1 - f0) / (t1 - t0);
  return K(nu, j + 1, t1 - c) * f1 - K(nu, j + 1, t0 - c) * f0 - slope * (K(nu, j + 2, t1 - c) - K(nu, j + 2, t0 - c));
}

// Gamma(nu)^{-1} int_A int_S (t-s)^{nu-1} f(t) g(s) ds dt for S entirely before A
double rectangle_exact(double nu, double t0, double t1, double f0, double f1, double s0, double s1, double g0, double g1) {
  const double gslope = (g1 - g0) / (s1 - s0);
  return g0 * H(nu, 1, s0, t0, t1, f0, f1) - g1 * H(nu, 1, s1, t0, t1, f0, f1) -
         gslope * (H(nu, 2, s1, t0, t1, f0, f1) - H(nu, 2, s0, t0, t1, f0, f1));
}

double rectangle_gauss(double nu, const LineRule& g, double t0, double t1, double f0, double f1, double s0, double s1,
                       double g0, double g1) {
  double sum = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.nodes[i];
    const double t = t0 + (t1 - t0) * x;
    const double f = f0 + (f1 - f0) * x;
    double inner = 0.0;
    for (int j = 0; j < g.size(); ++j) {
      const double y = g.nodes[j];
      inner += g.weights[j] * std::pow(t - (s0 + (s1 - s0) * y), nu - 1.0) * (g0 + (g1 - g0) * y);
    }
    sum += g.weights[i] * f * inner;
  }
  return sum * (t1 - t0) * (s1 - s0) * rgamma(nu);
}

}  // namespace

double positivity_probe(const TimeGrid& grid, double nu, std::span<const double> phi) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidParameter("positivity_probe: order must lie in (0,1]");
  const int N = grid.steps();
  if (static_cast<int>(phi.size()) != N + 1) throw InvalidParameter("positivity_probe: sample count must be steps + 1");
  const LineRule g12 = gauss_legendre(12), g6 = gauss_legendre(6);
  const double r1 = rgamma(nu + 1.0), r2 = rgamma(nu + 2.0);
  CompensatedSum sum;
  auto add = [&sum](double term) { sum.add(term); };
  for (int a = 1; a <= N; ++a) {
    const double t0 = grid.t(a - 1), t1 = grid.t(a), tau = t1 - t0;
    const double p0 = phi[a - 1], m = (phi[a] - phi[a - 1]) / tau;
    // s and t in the same interval
    add(p0 * p0 * std::pow(tau, nu + 1.0) * r1 / (nu + 1.0) +
        p0 * m * std::pow(tau, nu + 2.0) * (r1 + r2) / (nu + 2.0) + m * m * std::pow(tau, nu + 3.0) * r2 / (nu + 3.0));
    for (int k = 1; k < a; ++k) {
      const double s0 = grid.t(k - 1), s1 = grid.t(k);
      const double gap = t0 - s1, size = std::max(tau, s1 - s0);
      double v;
      if (gap < 2.0 * size)
        v = rectangle_exact(nu, t0, t1, phi[a - 1], phi[a], s0, s1, phi[k - 1], phi[k]);
      else
        v = rectangle_gauss(nu, gap < 8.0 * size ? g12 : g6, t0, t1, phi[a - 1], phi[a], s0, s1, phi[k - 1], phi[k]);
      add(v);
    }
  }
  return sum.value();
}

double leibniz_residual(const TimeGrid& grid, const FractionalOrder& order, std::span<const double> phi) {
  const int N = grid.steps();
  if (static_cast<int>(phi.size()) != N + 1) throw InvalidParameter("leibniz_residual: sample count must be steps + 1");
  if (phi[0] != 0.0) throw InvalidParameter("leibniz_residual: requires phi(0) = 0");
  std::vector<double> tphi(N + 1);
  for (int n = 0; n <= N; ++n) tphi[n] = grid.t(n) * phi[n];
  auto lhs = caputo_l1(order, grid, tphi);
  auto base = caputo_l1(order, grid, phi);
  std::vector<double> q = riemann_liouville_integral(grid, 1.0 - order.alpha(), phi);
  for (double& v : q) v *= order.alpha();
  for (const auto& term : order.terms()) {
    auto qi = riemann_liouville_integral(grid, 1.0 - term.alpha, phi);
    for (int n = 0; n <= N; ++n) q[n] += term.alpha * term.b * qi[n];
  }
  double worst = 0.0;
  for (int n = 1; n <= N; ++n) worst = std::max(worst, std::abs(lhs[n] - grid.t(n) * base[n] - q[n]));
  return worst;
}

}  // namespace fracfem
