#ifndef SQB_HARD_INSTANCE_HPP
#define SQB_HARD_INSTANCE_HPP

#include <cstdint>

#include "sqb/funcspace.hpp"

namespace sqb {

// One-layer network instance on R^n built from 2m ridge units at equally
// spaced angles: g(x) = (1/2m) sum_i (-1)^i phi(<x, w_i>) with
// w_i = A^T (cos(i pi/m), sin(i pi/m)), and f = psi(g). A is 2 x n with
// A A^T = I_2 (identity embedding for n = 2).
struct HardInstance {
  int m = 2;  // even; k = 2m hidden units
  ActivationSpec phi = ActivationSpec::relu();
  ActivationSpec psi = ActivationSpec::tanh();
  Eigen::MatrixXd embedding;  // 2 x n
  std::uint64_t seed = 0;

  int hidden_units() const { return 2 * m; }
  int dimension() const { return static_cast<int>(embedding.cols()); }
  Eigen::VectorXd unit_weight(int i) const;  // w_i in R^n, unit norm
  FunctionHandle inner_handle() const;       // g
  FunctionHandle composed_handle() const;    // psi(g)
};

HardInstance make_instance(int m, ActivationSpec phi, ActivationSpec psi);

// Embeds the 2D core into R^n via two seeded Gaussian rows, orthonormalized.
HardInstance make_embedded_instance(const HardInstance& core, int n, std::uint64_t seed);

// Key-value descriptor block (m, phi, psi, n, seed), one pair per line in the
// same format the experiment configs use.
std::string describe_instance(const HardInstance& instance);

// T(a, m) = sum_{t=0}^{m-1} (-1)^t cos^a(t pi / m), by direct summation.
double trig_power_sum_direct(int a, int m);

// Same sum via the binomial closed form (log-gamma arithmetic), valid for
// even m; returns 0 for odd a, matching the full-period parity cancellation.
double trig_power_sum_closed(int a, int m);

// S(a, m) = 2m sum_{t=0}^{2m-1} (-1)^t cos^a(t pi/m) = 4m T(a, m) for even a,
// 0 for odd a. m must be even.
double s_coefficient(int a, int m);

struct SeriesResult {
  double value = 0.0;       // partial sum of (1/4m^2) sum_a phi_hat_a^2 S(a, m)
  double tail_bound = 0.0;  // bound on the dropped tail
  bool tail_certified = false;
};

// ||g||^2 from the Hermite series of phi, truncated at max_degree
// (default max(200, 100 m)). The tail bound is certified for closed-form
// coefficient activations; quadrature-sourced ones get a best-effort
// extrapolation with the certified flag cleared.
SeriesResult norm_squared_g(const HardInstance& instance, int max_degree = -1);

// Anti-concentration lower bound on ||f|| = ||psi(g)|| for psi = tanh and
// phi in {relu, sigmoid}: from ||g|| (truncated at level T = 5m for relu),
// Pr[|g| > t] >= (||g^T||^2 - t^2)/(B^2 - t^2) - union-bound slack, and
// ||f||^2 >= tanh(t)^2 Pr[|g| > t], maximized over t. Clamps to 0 when the
// probability bound carries no information.
double norm_lower_bound_f(const HardInstance& instance);

}  // namespace sqb

#endif  // SQB_HARD_INSTANCE_HPP
