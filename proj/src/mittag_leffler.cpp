#include "fracfem/common.hpp"
#include "fracfem/fractional.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace fracfem {
namespace {

constexpr double kSeriesRadius = 1.0;
constexpr double kAsymptoticRadius = 50.0;
constexpr int kContourNodes = 20;
// largest accepted truncation term of the asymptotic expansion
constexpr double kAsymptoticBound = 1e-14;

double sinpi(double x) {
  const double r = x - 2.0 * std::nearbyint(0.5 * x);  // r in [-1, 1]
  if (r == std::nearbyint(r)) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == -0.5) return -1.0;
  return std::sin(std::numbers::pi * r);
}

double ml_series(double a, double b, double z) {
  double sum = 0.0, zk = 1.0;
  for (int k = 0; k < 2000; ++k) {
    const double term = zk * rgamma(a * k + b);
    sum += term;
    if (k > 4 && std::abs(term) < 1e-18 && a * k + b > 2.0) break;
    zk *= z;
  }
  return sum;
}

// -sum_{k>=1} z^{-k} / Gamma(b - a k), truncated at the smallest term; `bound` receives
// the first omitted term
double ml_asymptotic(double a, double b, double z, double& bound) {
  const double logx = std::log(-z);
  double sum = 0.0, prev = INFINITY;
  bound = INFINITY;
  for (int k = 1; k < 400; ++k) {
    const double x = b - a * k;
    double term;
    if (x > 0.0) {
      term = std::exp(-k * logx - std::lgamma(x));
    } else {
      // 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
      const double s = sinpi(x);
      term = s == 0.0 ? 0.0 : std::exp(std::lgamma(1.0 - x) - k * logx) * s / std::numbers::pi;
    }
    if (k % 2 == 1) term = -term;  // z^{-k} with z < 0
    const double mag = std::abs(term);
    // pole of Gamma, also when b - a k misses the integer by rounding
    if (mag == 0.0 || (x <= 0.0 && std::abs(x - std::nearbyint(x)) < 1e-9)) continue;
    if (mag > prev) {
      bound = prev;
      break;
    }
    sum -= term;
    prev = mag;
    if (mag < 1e-20 * std::abs(sum)) {
      bound = mag;
      break;
    }
  }
  return sum;
}

// Laplace inversion of s^{a-b} / (s^a - z) at t = 1 on the parabola s = mu (1 + iu)^2
double ml_contour(double a, double b, double z) {
  const int N = kContourNodes;
  const double h = 3.0 / N;
  const double mu = std::numbers::pi * N / 12.0;
  double sum = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double u = k * h;
    const std::complex<double> w(1.0, u);
    const std::complex<double> s = mu * w * w;
    const std::complex<double> ds = 2.0 * mu * std::complex<double>(0.0, 1.0) * w;
    const std::complex<double> F = std::pow(s, a - b) / (std::pow(s, a) - z);
    const double v = (std::exp(s) * F * ds).imag();
    sum += k == 0 ? 0.5 * v : v;
  }
  // (h / 2 pi i) sum over k in Z; conjugate pairs double the real part
  return sum * h / std::numbers::pi;
}

}  // namespace

double rgamma(double x) {
  if (x <= 0.0 && x == std::nearbyint(x)) return 0.0;
  if (x > 171.0) return 0.0;
  if (x < 0.5) return sinpi(x) * std::tgamma(1.0 - x) / std::numbers::pi;
  return 1.0 / std::tgamma(x);
}

double mittag_leffler(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("mittag_leffler: alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw InvalidParameter("mittag_leffler: beta must be positive");
  if (std::isnan(z)) throw InvalidParameter("mittag_leffler: z is NaN");
  if (z > 0.0) throw DomainError("mittag_leffler: only z <= 0 is supported");
  if (z == 0.0) return rgamma(beta);
  if (alpha == 1.0 && beta == 1.0) return std::exp(z);
  const double x = -z;
  if (x <= kSeriesRadius) return ml_series(alpha, beta, z);
  if (x >= kAsymptoticRadius && alpha < 1.0) {
    double bound;
    const double v = ml_asymptotic(alpha, beta, z, bound);
    if (bound <= kAsymptoticBound) return v;
  }
  return ml_contour(alpha, beta, z);
}

}  // namespace fracfem
