#include "sqb/hard_instance.hpp"

#include <cmath>
#include <stdexcept>

#include "sqb/rng.hpp"

namespace sqb {

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;
}

Eigen::VectorXd HardInstance::unit_weight(int i) const {
  Eigen::Vector2d u(std::cos(i * kPi / m), std::sin(i * kPi / m));
  return embedding.transpose() * u;
}

FunctionHandle HardInstance::inner_handle() const {
  std::vector<FunctionHandle> parts;
  parts.reserve(2 * m);
  const double scale = 1.0 / (2.0 * m);
  for (int i = 1; i <= 2 * m; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    parts.push_back(
        FunctionHandle::scaled(sign * scale, FunctionHandle::ridge(phi, unit_weight(i))));
  }
  return FunctionHandle::sum(std::move(parts));
}

FunctionHandle HardInstance::composed_handle() const {
  return FunctionHandle::composed(psi, inner_handle());
}

HardInstance make_instance(int m, ActivationSpec phi, ActivationSpec psi) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("make_instance: m must be even and >= 2");
  HardInstance inst;
  inst.m = m;
  inst.phi = phi;
  inst.psi = psi;
  inst.embedding = Eigen::MatrixXd::Identity(2, 2);
  return inst;
}

HardInstance make_embedded_instance(const HardInstance& core, int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_embedded_instance: n must be >= 2");
  RngStream rng(substream_seed(seed, 0xa11ce));
  Eigen::MatrixXd a(2, n);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = rng.next_gaussian();
  }
  a.row(0).normalize();
  a.row(1) -= a.row(0).dot(a.row(1)) * a.row(0);
  a.row(1).normalize();
  HardInstance inst = core;
  inst.embedding = a;
  inst.seed = seed;
  return inst;
}

std::string describe_instance(const HardInstance& instance) {
  std::string out;
  out += "m = " + std::to_string(instance.m) + "\n";
  out += "phi = " + instance.phi.name() + "\n";
  out += "psi = " + instance.psi.name() + "\n";
  out += "n = " + std::to_string(instance.dimension()) + "\n";
  out += "seed = " + std::to_string(instance.seed) + "\n";
  return out;
}

double trig_power_sum_direct(int a, int m) {
  if (a < 0 || m < 1) throw std::invalid_argument("trig_power_sum_direct: need a >= 0, m >= 1");
  double total = 0.0;
  for (int t = 0; t < m; ++t) {
    const double c = std::cos(t * kPi / m);
    total += (t % 2 == 0 ? 1.0 : -1.0) * std::pow(c, a);
  }
  return total;
}

double trig_power_sum_closed(int a, int m) {
  if (a < 0 || m < 1) throw std::invalid_argument("trig_power_sum_closed: need a >= 0, m >= 1");
  if (m % 2 != 0) {
    throw std::invalid_argument("trig_power_sum_closed: binomial closed form requires even m");
  }
  if (a % 2 != 0) return 0.0;  // full-period parity cancellation
  if (a < m) return 0.0;
  // 2^{1-a} m sum over odd p <= a/m of C(a, a/2 - p m/2)
  const double log2 = std::log(2.0);
  double total = 0.0;
  for (int p = 1; p <= a / m; p += 2) {
    const int k = a / 2 - p * m / 2;
    const double lbinom = hermite::log_factorial(a) - hermite::log_factorial(k) -
                          hermite::log_factorial(a - k);
    total += std::exp(lbinom + (1 - a) * log2);
  }
  return m * total;
}

double s_coefficient(int a, int m) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("s_coefficient: m must be even");
  if (a % 2 != 0) return 0.0;
  return 4.0 * m * trig_power_sum_closed(a, m);
}

namespace {

// squared-coefficient tail of phi beyond degree D: second moment minus the
// partial sum, in extended precision
long double coefficient_tail(const ActivationSpec& phi, const std::vector<double>& coeffs,
                             int upto) {
  long double tail = phi.second_moment();
  for (int a = 0; a <= upto && a < static_cast<int>(coeffs.size()); ++a) {
    tail -= static_cast<long double>(coeffs[a]) * coeffs[a];
  }
  return std::max<long double>(tail, 0.0L);
}

}  // namespace

SeriesResult norm_squared_g(const HardInstance& instance, int max_degree) {
  const int m = instance.m;
  if (max_degree < 0) max_degree = std::max(200, 100 * m);

  std::vector<double> coeffs(max_degree + 1);
  const bool closed =
      instance.phi.coefficient_source() == ActivationSpec::CoefficientSource::closed_form;
  if (closed) {
    for (int a = 0; a <= max_degree; ++a) coeffs[a] = instance.phi.hermite_coefficient(a);
  } else {
    coeffs = hermite::hermite_coefficients_by_quadrature(instance.phi, max_degree).coeffs;
  }

  SeriesResult result;
  long double sum = 0.0L;
  const double inv = 1.0 / (4.0 * m * m);
  // the defining sum S = 4 m T is O(m) per degree, unlike the binomial closed
  // form whose term count grows with a/m; the two routes are cross-checked in
  // the trig power sum tests
  for (int a = 0; a <= max_degree; a += 2) {
    if (coeffs[a] == 0.0) continue;
    const double s_val = 4.0 * m * trig_power_sum_direct(a, m);
    sum += static_cast<long double>(coeffs[a]) * coeffs[a] * s_val * inv;
  }
  result.value = static_cast<double>(sum);

  // S(a, m) <= 4 m^2, so the dropped series mass is at most the squared
  // coefficient tail of phi
  if (closed) {
    result.tail_bound = static_cast<double>(coefficient_tail(instance.phi, coeffs, max_degree));
    result.tail_certified = true;
  } else {
    // extrapolate |c_a| ~ exp(alpha sqrt(a) + beta) from the computed range
    double alpha = 0.0, beta = 0.0;
    {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int cnt = 0;
      for (int a = max_degree / 2; a <= max_degree; ++a) {
        // coefficients at quadrature round-off carry no decay information
        if (std::abs(coeffs[a]) < 1e-14) continue;
        const double x = std::sqrt(static_cast<double>(a));
        const double y = std::log(std::abs(coeffs[a]));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
      }
      if (cnt >= 2) {
        alpha = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        beta = (sy - alpha * sx) / cnt;
      }
    }
    double tail = 0.0;
    if (alpha < 0) {
      for (int a = max_degree + 1; a <= 4 * max_degree; ++a) {
        tail += std::exp(2.0 * (alpha * std::sqrt(static_cast<double>(a)) + beta));
      }
    }
    result.tail_bound = tail;
    result.tail_certified = false;
  }
  return result;
}

double norm_lower_bound_f(const HardInstance& instance) {
  if (instance.psi.kind() != ActivationSpec::Kind::tanh) {
    throw std::invalid_argument("norm_lower_bound_f: outer activation must be tanh");
  }
  const auto kind = instance.phi.kind();
  if (kind != ActivationSpec::Kind::relu && kind != ActivationSpec::Kind::sigmoid) {
    throw std::invalid_argument("norm_lower_bound_f: inner activation must be relu or sigmoid");
  }
  const int m = instance.m;

  double g_core_norm = 0.0;  // ||g||, or ||g^T|| for the truncated relu chain
  double envelope = 0.0;     // B with |g (or g^T)| <= B
  double slack = 0.0;        // Pr[g != g^T] union bound
  if (kind == ActivationSpec::Kind::relu) {
    const double g_norm = std::sqrt(norm_squared_g(instance, 20000).value);
    const double t_level = 5.0 * m;
    const double trunc = hermite::relu_truncation_bound(t_level);
    g_core_norm = std::max(0.0, g_norm - trunc);
    envelope = t_level;  // |min(T, relu)| <= T and the outer weights average
    slack = 2.0 * m * std::exp(-0.5 * t_level * t_level);
  } else {
    g_core_norm = std::sqrt(norm_squared_g(instance).value);
    envelope = 1.0;  // sigmoid is bounded by 1
    slack = 0.0;
  }

  // maximize tanh(t)^2 (||g||^2 - t^2)/(B^2 - t^2) - slack-adjusted over t
  double best = 0.0;
  const int grid = 512;
  for (int i = 1; i < grid; ++i) {
    const double t = g_core_norm * i / grid;
    const double prob =
        (g_core_norm * g_core_norm - t * t) / (envelope * envelope - t * t) - slack;
    if (prob <= 0.0) continue;
    const double v = std::tanh(t) * std::tanh(t) * prob;
    best = std::max(best, v);
  }
  return std::sqrt(best);
}

}  // namespace sqb
