#ifndef SQB_TESTS_TEST_UTIL_HPP
#define SQB_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "sqb/funcspace.hpp"
#include "sqb/rng.hpp"

namespace sqb::testing {

// Independent composite-Simpson integrator used as a test-side oracle; kept
// deliberately separate from the library quadrature path.
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int panels = 4000) {
  if (panels % 2 != 0) ++panels;
  const double h = (hi - lo) / panels;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// E_{t~N(0,1)}[f(t)] by Simpson on [-12, 12] split at the given points.
inline double simpson_gauss(const std::function<double(double)>& f,
                            const std::vector<double>& cuts_in = {}, double radius = 12.0) {
  std::vector<double> cuts{-radius};
  for (double c : cuts_in) {
    if (c > -radius && c < radius) cuts.push_back(c);
  }
  cuts.push_back(radius);
  std::sort(cuts.begin(), cuts.end());
  const double norm = 0.3989422804014327;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += simpson(
        [&](double t) { return f(t) * norm * std::exp(-0.5 * t * t); }, cuts[i], cuts[i + 1]);
  }
  return total;
}

// closed-form E[relu(<u,x>) relu(<v,x>)] for unit u, v at angle theta
inline double relu_kernel(double theta) {
  const double pi = 3.141592653589793238462643383279503;
  return (std::sin(theta) + (pi - theta) * std::cos(theta)) / (2.0 * pi);
}

inline Eigen::VectorXd unit2(double angle) {
  Eigen::VectorXd u(2);
  u << std::cos(angle), std::sin(angle);
  return u;
}

inline Eigen::VectorXd gaussian_point(RngStream& rng, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.next_gaussian();
  return x;
}

}  // namespace sqb::testing

#endif  // SQB_TESTS_TEST_UTIL_HPP
