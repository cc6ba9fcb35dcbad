// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's fast paths.
#pragma once

#include "conical/geometry.hpp"
#include "conical/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using conical::Mat;
using conical::Plane;
using conical::Vec;

// 20-point Gauss-Legendre on [-1, 1].
inline const std::array<std::pair<double, double>, 10>& gauss20() {
  static const std::array<std::pair<double, double>, 10> nodes{{
      {0.0765265211334973, 0.1527533871307258}, {0.2277858511416451, 0.1491729864726037},
      {0.3737060887154195, 0.1420961093183820}, {0.5108670019508271, 0.1316886384491766},
      {0.6360536807265150, 0.1181945319615184}, {0.7463319064601508, 0.1019301198172404},
      {0.8391169718222188, 0.0832767415767048}, {0.9122344282513259, 0.0626720483341091},
      {0.9639719272779138, 0.0406014298003869}, {0.9931285991850949, 0.0176140071391521},
  }};
  return nodes;
}

template <class F>
double gauss(F f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (const auto& [x, w] : gauss20()) s += w * (f(c - h * x) + f(c + h * x));
  return s * h;
}

inline bool in_cone(const Vec& x, const Vec& y, const Plane& v, double alpha) {
  const Vec d = y - x;
  const double len = d.norm();
  if (len == 0.0) return false;
  const Vec off = d - v.basis() * (v.basis().transpose() * d);
  return off.norm() < alpha * len;
}

// int_lo^hi (mu(K(x, V, alpha, r)) / r^n)^p dr / r by quadrature in log r,
// split at the in-cone distances so each piece has a smooth integrand.
inline double energy(const conical::DiscreteMeasure& m, const Vec& x, const Plane& v, double alpha, double p,
                     double lo, double hi) {
  const int n = m.dim_param();
  std::vector<double> cuts{lo};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vec y = m.point_vec(i);
    const double r = (y - x).norm();
    if (in_cone(x, y, v, alpha) && r > lo && r < hi) cuts.push_back(r);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto mass_below = [&](double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const Vec y = m.point_vec(i);
      if (in_cone(x, y, v, alpha) && (y - x).norm() < r) s += m.weight(i);
    }
    return s;
  };
  double total = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = k + 1 < cuts.size() ? cuts[k + 1] : hi;
    if (a <= 0.0) continue;  // nothing below the first in-cone distance
    const double mass = std::isfinite(b) ? mass_below(std::sqrt(a * b)) : mass_below(2.0 * a);
    if (mass == 0.0) continue;
    if (std::isfinite(b)) {
      // substitute r = e^t and split into log-steps of at most 0.25
      const double ta = std::log(a), tb = std::log(b);
      const int steps = std::max(1, static_cast<int>(std::ceil((tb - ta) / 0.25)));
      for (int s = 0; s < steps; ++s) {
        const double u0 = ta + (tb - ta) * s / steps, u1 = ta + (tb - ta) * (s + 1) / steps;
        total += gauss([&](double t) { return std::pow(mass * std::exp(-n * t), p); }, u0, u1);
      }
    } else {
      // r = a e^s: integrand mass^p a^{-np} e^{-nps}, summed in 0.25-steps until negligible
      const double np = n * p;
      double tail = 0.0;
      for (double s0 = 0.0; s0 * np < 60.0; s0 += 0.25)
        tail += gauss([&](double t) { return std::exp(-np * t); }, s0, s0 + 0.25);
      total += std::pow(mass, p) * std::pow(a, -np) * tail;
    }
  }
  return total;
}

// min_r of the beta_2 objective over lines through points of B(x, r) by an
// angle grid; for each angle the best offset is the weighted mean of the
// normal coordinate (clamped so the line still meets the closed ball).
inline double beta_line_grid(const conical::DiscreteMeasure& m, const Vec& x, double r, int angles) {
  std::vector<std::size_t> in;
  for (std::size_t i = 0; i < m.size(); ++i)
    if ((m.point_vec(i) - x).norm() < r) in.push_back(i);
  double best = INFINITY;
  for (int a = 0; a < angles; ++a) {
    const double th = M_PI * a / angles;
    const double nx = -std::sin(th), ny = std::cos(th);
    double mass = 0.0, mean = 0.0;
    for (std::size_t i : in) {
      const double c = nx * m.point_vec(i)(0) + ny * m.point_vec(i)(1);
      mass += m.weight(i);
      mean += m.weight(i) * c;
    }
    mean /= mass;
    const double cx = nx * x(0) + ny * x(1);
    mean = std::clamp(mean, cx - r, cx + r);
    double s = 0.0;
    for (std::size_t i : in) {
      const double c = nx * m.point_vec(i)(0) + ny * m.point_vec(i)(1) - mean;
      s += m.weight(i) * c * c;
    }
    best = std::min(best, std::sqrt(s / std::pow(r, 3)));
  }
  return best;
}

}  // namespace oracle
