#include "sqb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sqb::quad {
namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

// Physicists' Gauss-Hermite nodes by Newton iteration on the orthonormal
// recurrence (weight e^{-x^2}); standard scheme, stable to ~2^14 nodes.
Rule compute_hermite_physicists(int n) {
  Rule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  // recurrence coefficients hoisted out of the Newton loop
  std::vector<double> ca(n), cb(n);
  for (int j = 0; j < n; ++j) {
    ca[j] = std::sqrt(2.0 / (j + 1));
    cb[j] = std::sqrt(static_cast<double>(j) / (j + 1));
  }
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * r.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * r.nodes[1];
    } else {
      z = 2.0 * z - r.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 24; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * ca[j] * p2 - cb[j] * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = 2.0 / (pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

}  // namespace

const Rule& gauss_hermite_prob(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_prob: node count must be positive");
  static std::map<int, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rule phys = compute_hermite_physicists(n);
    Rule prob;
    prob.nodes.resize(n);
    prob.weights.resize(n);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
      prob.nodes[i] = sqrt2 * phys.nodes[i];
      prob.weights[i] = phys.weights[i] * inv_sqrt_pi;
    }
    it = cache.emplace(n, std::move(prob)).first;
  }
  return it->second;
}

const Rule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: node count must be positive");
  static std::map<int, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rule r;
    r.nodes.assign(n, 0.0);
    r.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it2 = 0; it2 < 200; ++it2) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) <= 1e-16) break;
      }
      r.nodes[i] = -z;
      r.nodes[n - 1 - i] = z;
      r.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      r.weights[n - 1 - i] = r.weights[i];
    }
    it = cache.emplace(n, std::move(r)).first;
  }
  return it->second;
}

double integrate_segment(const std::function<double(double)>& f, double lo,
                         double hi, int segments, int points) {
  if (hi <= lo) return 0.0;
  const Rule& gl = gauss_legendre(points);
  const double h = (hi - lo) / segments;
  double total = 0.0;
  for (int s = 0; s < segments; ++s) {
    const double a = lo + s * h;
    const double mid = a + 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < points; ++i) {
      acc += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
    }
    total += 0.5 * h * acc;
  }
  return total;
}

double gaussian_expect_1d(const std::function<double(double)>& f,
                          const std::vector<double>& breakpoints, double radius,
                          int segments_per_unit, int points) {
  std::vector<double> cuts{-radius, radius};
  for (double b : breakpoints) {
    if (b > -radius && b < radius) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  const double norm = 1.0 / std::sqrt(2.0 * kPi);
  auto integrand = [&](double t) { return f(t) * norm * std::exp(-0.5 * t * t); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi - lo < 1e-15) continue;
    const int segs = std::max(1, static_cast<int>(std::ceil((hi - lo) * segments_per_unit)));
    total += integrate_segment(integrand, lo, hi, segs, points);
  }
  return total;
}

double gaussian_expect_2d_tensor(const std::function<double(double, double)>& f,
                                 int nodes_per_axis) {
  const Rule& gh = gauss_hermite_prob(nodes_per_axis);
  double total = 0.0;
  for (int i = 0; i < nodes_per_axis; ++i) {
    double row = 0.0;
    for (int j = 0; j < nodes_per_axis; ++j) {
      row += gh.weights[j] * f(gh.nodes[i], gh.nodes[j]);
    }
    total += gh.weights[i] * row;
  }
  return total;
}

double gaussian_expect_2d_polar(const std::function<double(double, double)>& f,
                                const std::vector<double>& kink_angles,
                                double r_max, int radial_segments,
                                int angular_segments_per_arc, int points) {
  const double two_pi = 2.0 * kPi;
  std::vector<double> angles;
  for (double a : kink_angles) {
    double v = std::fmod(a, two_pi);
    if (v < 0) v += two_pi;
    angles.push_back(v);
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               angles.end());
  if (angles.empty()) angles.push_back(0.0);

  const Rule& gl = gauss_legendre(points);
  // radial nodes with factor r * exp(-r^2/2), shared by every arc
  std::vector<double> rn, rw;
  const double hr = r_max / radial_segments;
  for (int s = 0; s < radial_segments; ++s) {
    const double mid = (s + 0.5) * hr;
    for (int i = 0; i < points; ++i) {
      const double r = mid + 0.5 * hr * gl.nodes[i];
      rn.push_back(r);
      rw.push_back(0.5 * hr * gl.weights[i] * r * std::exp(-0.5 * r * r));
    }
  }

  double total = 0.0;
  const std::size_t n_arcs = angles.size();
  for (std::size_t k = 0; k < n_arcs; ++k) {
    const double a0 = angles[k];
    const double a1 = (k + 1 < n_arcs) ? angles[k + 1] : angles[0] + two_pi;
    if (a1 - a0 < 1e-14) continue;
    const double ht = (a1 - a0) / angular_segments_per_arc;
    for (int s = 0; s < angular_segments_per_arc; ++s) {
      const double mid = a0 + (s + 0.5) * ht;
      for (int i = 0; i < points; ++i) {
        const double th = mid + 0.5 * ht * gl.nodes[i];
        const double wt = 0.5 * ht * gl.weights[i];
        const double c = std::cos(th), sn = std::sin(th);
        double radial = 0.0;
        for (std::size_t q = 0; q < rn.size(); ++q) {
          radial += rw[q] * f(rn[q] * c, rn[q] * sn);
        }
        total += wt * radial;
      }
    }
  }
  return total / two_pi;
}

double gaussian_expect_2d_split(const std::function<double(double, double)>& f,
                                const std::vector<double>& z1_breakpoints,
                                int z2_nodes, double radius,
                                int segments_per_unit, int points) {
  const Rule& gh = gauss_hermite_prob(z2_nodes);
  auto outer = [&](double z1) {
    double acc = 0.0;
    for (int j = 0; j < z2_nodes; ++j) acc += gh.weights[j] * f(z1, gh.nodes[j]);
    return acc;
  };
  return gaussian_expect_1d(outer, z1_breakpoints, radius, segments_per_unit, points);
}

}  // namespace sqb::quad
