#include "fracfem/quadrature.hpp"

#include "fracfem/common.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace fracfem {
namespace {

void add_orbit3(QuadratureRule& r, double w) {
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(w);
}

void add_orbit21(QuadratureRule& r, double w, double a) {
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({a, a, b});
  r.points.push_back({a, b, a});
  r.points.push_back({b, a, a});
  r.weights.insert(r.weights.end(), 3, w);
}

void add_orbit111(QuadratureRule& r, double w, double a, double b) {
  const double c = 1.0 - a - b;
  const double p[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
  for (auto& q : p) r.points.push_back({q[0], q[1], q[2]});
  r.weights.insert(r.weights.end(), 6, w);
}

std::array<QuadratureRule, 7> build_rules() {
  std::array<QuadratureRule, 7> rules;
  rules[1].degree = 1;
  add_orbit3(rules[1], 1.0);

  rules[2].degree = 2;
  for (int k = 0; k < 3; ++k) {
    std::array<double, 3> p{0.5, 0.5, 0.5};
    p[k] = 0.0;
    rules[2].points.push_back(p);
    rules[2].weights.push_back(1.0 / 3.0);
  }

  // Dunavant rules refined to full double precision (tests/oracle/quadrature_rules.py)
  rules[4].degree = 4;
  add_orbit21(rules[4], 0.2233815896780114656950, 0.4459484909159648863183);
  add_orbit21(rules[4], 0.1099517436553218676383, 0.09157621350977074345957);
  rules[3] = rules[4];
  rules[3].degree = 3;

  rules[5].degree = 5;
  add_orbit3(rules[5], 0.225);
  add_orbit21(rules[5], 0.1323941527885061807376, 0.4701420641051150897704);
  add_orbit21(rules[5], 0.1259391805448271525957, 0.1012865073234563388010);

  rules[6].degree = 6;
  add_orbit21(rules[6], 0.1167862757263793660253, 0.2492867451709104212916);
  add_orbit21(rules[6], 0.05084490637020681692094, 0.06308901449150222834033);
  add_orbit111(rules[6], 0.08285107561837357519355, 0.05314504984481694735325, 0.3103524510337844054166);
  return rules;
}

}  // namespace

const QuadratureRule& element_quadrature(int degree) {
  static const std::array<QuadratureRule, 7> rules = build_rules();
  if (degree < 1 || degree > 6) throw InvalidParameter("element_quadrature: degree must be in 1..6");
  return rules[degree];
}

LineRule gauss_legendre(int n) {
  if (n < 1) throw InvalidParameter("gauss_legendre: n must be positive");
  static std::mutex mu;
  static std::map<int, LineRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  LineRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = 0.5 * (1.0 - x);
    r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
  }
  cache.emplace(n, r);
  return r;
}

QuadratureRule collapsed_gauss(int q, int apex) {
  if (apex < 0 || apex > 2) throw InvalidParameter("collapsed_gauss: apex must be 0, 1 or 2");
  LineRule g = gauss_legendre(q);
  QuadratureRule r;
  r.degree = 2 * q - 2;
  const int p1 = (apex + 1) % 3, p2 = (apex + 2) % 3;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double a = g.nodes[i], b = g.nodes[j];
      std::array<double, 3> l{};
      l[apex] = 1.0 - a;
      l[p1] = a * (1.0 - b);
      l[p2] = a * b;
      r.points.push_back(l);
      r.weights.push_back(2.0 * a * g.weights[i] * g.weights[j]);
    }
  return r;
}

}  // namespace fracfem
