#ifndef SQB_QUADRATURE_HPP
#define SQB_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace sqb::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule transformed to the probabilists' weight: sum w_i f(x_i)
// approximates E_{t~N(0,1)}[f(t)]. Rules are cached per node count.
const Rule& gauss_hermite_prob(int n);

// Gauss-Legendre on [-1, 1], cached.
const Rule& gauss_legendre(int n);

// Integral of f over [lo, hi] with a composite Gauss-Legendre rule
// (`segments` panels, `points` nodes each).
double integrate_segment(const std::function<double(double)>& f, double lo,
                         double hi, int segments = 16, int points = 24);

// E_{t~N(0,1)}[f(t)] for piecewise-smooth f: the real line is cut at the
// given breakpoints and each piece integrated by composite Gauss-Legendre
// against the Gaussian density. Exact to round-off for piecewise-polynomial
// integrands of moderate degree; plain Gauss-Hermite loses 8 digits on a kink.
double gaussian_expect_1d(const std::function<double(double)>& f,
                          const std::vector<double>& breakpoints,
                          double radius = 26.0, int segments_per_unit = 3,
                          int points = 24);

// E_{x~N(0,I2)}[F(x1, x2)] by tensor Gauss-Hermite (smooth integrands).
double gaussian_expect_2d_tensor(
    const std::function<double(double, double)>& f, int nodes_per_axis = 128);

// E_{x~N(0,I2)}[F(x1, x2)] in polar coordinates: the circle is cut at
// `kink_angles` (directions along which F is allowed to lose smoothness, e.g.
// perpendiculars of relu ridges); F must be smooth in r along every fixed ray.
double gaussian_expect_2d_polar(
    const std::function<double(double, double)>& f,
    const std::vector<double>& kink_angles, double r_max = 14.0,
    int radial_segments = 14, int angular_segments_per_arc = 3,
    int points = 24);

// E over N(0, I2) of F(z1, z2) where F is smooth in z2 but only
// piecewise-smooth in z1 with kinks at `z1_breakpoints`. Composite
// Gauss-Legendre in z1 crossed with Gauss-Hermite in z2.
double gaussian_expect_2d_split(
    const std::function<double(double, double)>& f,
    const std::vector<double>& z1_breakpoints, int z2_nodes = 64,
    double radius = 13.0, int segments_per_unit = 2, int points = 32);

}  // namespace sqb::quad

#endif  // SQB_QUADRATURE_HPP
