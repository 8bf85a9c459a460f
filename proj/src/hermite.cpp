#include "sqb/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqb/quadrature.hpp"

namespace sqb {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid_eval(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

ActivationSpec ActivationSpec::relu() { return ActivationSpec(Kind::relu, 0); }
ActivationSpec ActivationSpec::sigmoid() { return ActivationSpec(Kind::sigmoid, 0); }
ActivationSpec ActivationSpec::sign() { return ActivationSpec(Kind::sign, 0); }
ActivationSpec ActivationSpec::tanh() { return ActivationSpec(Kind::tanh, 0); }

ActivationSpec ActivationSpec::lsgn(int k) {
  if (k < 1) throw std::invalid_argument("lsgn: k must be a positive integer");
  return ActivationSpec(Kind::lsgn, k);
}

ActivationSpec ActivationSpec::monomial(int d) {
  if (d < 0) throw std::invalid_argument("monomial: degree must be nonnegative");
  return ActivationSpec(Kind::monomial, d);
}

std::string ActivationSpec::name() const {
  switch (kind_) {
    case Kind::relu: return "relu";
    case Kind::sigmoid: return "sigmoid";
    case Kind::sign: return "sign";
    case Kind::tanh: return "tanh";
    case Kind::lsgn: return "lsgn:" + std::to_string(param_);
    case Kind::monomial: return "monomial:" + std::to_string(param_);
  }
  return "?";
}

double ActivationSpec::operator()(double t) const {
  switch (kind_) {
    case Kind::relu: return t > 0 ? t : 0.0;
    case Kind::sigmoid: return sigmoid_eval(t);
    case Kind::sign: return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
    case Kind::tanh: return std::tanh(t);
    case Kind::lsgn: {
      const double kt = param_ * t;
      return kt <= -1.0 ? -1.0 : (kt >= 1.0 ? 1.0 : kt);
    }
    case Kind::monomial: return std::pow(t, param_);
  }
  return 0.0;
}

double ActivationSpec::lipschitz() const {
  switch (kind_) {
    case Kind::relu: return 1.0;
    case Kind::sigmoid: return 0.25;
    case Kind::sign: return kInf;
    case Kind::tanh: return 1.0;
    // slope of the linear piece between -1/k and 1/k
    case Kind::lsgn: return static_cast<double>(param_);
    case Kind::monomial: return param_ <= 1 ? static_cast<double>(param_) : kInf;
  }
  return kInf;
}

bool ActivationSpec::antiderivative_available() const {
  return kind_ != Kind::sign;
}

double ActivationSpec::antiderivative(double a) const {
  switch (kind_) {
    case Kind::relu: return a > 0 ? 0.5 * a * a : 0.0;
    case Kind::sigmoid:
      // softplus minus its value at 0
      return (a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a))) -
             0.6931471805599453;
    case Kind::tanh: {
      // log cosh, overflow-safe
      const double z = std::abs(a);
      return z + std::log1p(std::exp(-2.0 * z)) - 0.6931471805599453;
    }
    case Kind::lsgn: {
      const double b = 1.0 / param_;
      const double z = std::abs(a);
      if (z <= b) return 0.5 * param_ * a * a;
      return 0.5 * b + (z - b);  // quadratic core plus saturated tail
    }
    case Kind::monomial: return std::pow(a, param_ + 1) / (param_ + 1);
    case Kind::sign: throw std::logic_error("sign has no declared antiderivative");
  }
  return 0.0;
}

bool ActivationSpec::is_smooth() const {
  return kind_ == Kind::sigmoid || kind_ == Kind::tanh || kind_ == Kind::monomial;
}

std::vector<double> ActivationSpec::kinks() const {
  switch (kind_) {
    case Kind::relu: return {0.0};
    case Kind::sign: return {0.0};
    case Kind::lsgn: return {-1.0 / param_, 1.0 / param_};
    default: return {};
  }
}

bool ActivationSpec::is_bounded() const {
  return kind_ == Kind::sigmoid || kind_ == Kind::sign || kind_ == Kind::tanh ||
         kind_ == Kind::lsgn || (kind_ == Kind::monomial && param_ == 0);
}

double ActivationSpec::bound() const {
  if (!is_bounded()) throw std::logic_error("activation is unbounded");
  return 1.0;
}

int ActivationSpec::growth_degree() const {
  return kind_ == Kind::monomial ? param_ : 1;
}

ActivationSpec::CoefficientSource ActivationSpec::coefficient_source() const {
  switch (kind_) {
    case Kind::relu:
    case Kind::sign:
    case Kind::monomial:
      return CoefficientSource::closed_form;
    default:
      return CoefficientSource::quadrature;
  }
}

double ActivationSpec::hermite_coefficient(int a) const {
  if (a < 0) throw std::invalid_argument("hermite_coefficient: negative degree");
  switch (kind_) {
    case Kind::relu: return hermite::relu_hermite_coefficient(a);
    case Kind::sign: return hermite::sign_hermite_coefficient(a);
    case Kind::monomial: return hermite::monomial_hermite_coefficient(param_, a);
    default: {
      auto c = hermite::hermite_coefficients_by_quadrature(*this, a);
      return c.coeffs[a];
    }
  }
}

double ActivationSpec::second_moment() const {
  switch (kind_) {
    case Kind::relu: return 0.5;
    case Kind::sign: return 1.0;
    case Kind::monomial: {
      // E[t^{2d}] = (2d-1)!!
      const int d = param_;
      return std::exp(hermite::log_factorial(2 * d) - d * std::log(2.0) -
                      hermite::log_factorial(d));
    }
    default: {
      auto self = *this;
      return quad::gaussian_expect_1d(
          [&self](double t) {
            const double v = self(t);
            return v * v;
          },
          self.kinks());
    }
  }
}

namespace hermite {

double log_factorial(int a) { return std::lgamma(static_cast<double>(a) + 1.0); }

double eval_normalized(int a, double x) {
  if (a < 0) throw std::invalid_argument("eval_normalized: negative degree");
  double prev = 0.0;   // H_{-1}
  double curr = 1.0;   // H_0
  for (int j = 0; j < a; ++j) {
    const double next =
        (x * curr - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
    prev = curr;
    curr = next;
  }
  return curr;
}

double eval_monic(int a, double x) {
  if (a < 0) throw std::invalid_argument("eval_monic: negative degree");
  double prev = 0.0;  // H~_{-1}
  double curr = 1.0;  // H~_0
  for (int j = 0; j < a; ++j) {
    const double next = x * curr - j * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

double eval_hermite(const HermiteBasis& basis, int degree, double x) {
  if (degree < 0 || degree > basis.max_degree) {
    throw std::out_of_range("eval_hermite: degree outside [0, max_degree]");
  }
  return basis.normalization == Normalization::probabilists_monic
             ? eval_monic(degree, x)
             : eval_normalized(degree, x);
}

double monic_at_zero(int a) {
  if (a < 0) throw std::invalid_argument("monic_at_zero: negative degree");
  if (a % 2 == 1) return 0.0;
  const int b = a / 2;
  // H~_{2b}(0) = (-1)^b (2b)! / (b! 2^b)
  const double lv = log_factorial(2 * b) - log_factorial(b) - b * std::log(2.0);
  return (b % 2 == 0 ? 1.0 : -1.0) * std::exp(lv);
}

double relu_hermite_coefficient(int a) {
  if (a < 0) throw std::invalid_argument("relu_hermite_coefficient: negative degree");
  if (a == 0) return 1.0 / std::sqrt(kTwoPi);
  if (a == 1) return 0.5;
  if (a % 2 == 1) return 0.0;
  const int b = a / 2;
  // (-1)^{b+1} sqrt((2b)!) / (sqrt(2 pi) (2b-1) b! 2^b)
  const double lv = 0.5 * log_factorial(2 * b) - log_factorial(b) -
                    b * std::log(2.0) - 0.5 * std::log(kTwoPi) -
                    std::log(2.0 * b - 1.0);
  return (b % 2 == 0 ? -1.0 : 1.0) * std::exp(lv);
}

double sign_hermite_coefficient(int a) {
  if (a < 0) throw std::invalid_argument("sign_hermite_coefficient: negative degree");
  if (a % 2 == 0) return 0.0;
  const int c = (a - 1) / 2;
  // 2 H~_{a-1}(0) / sqrt(2 pi a!)
  const double lv = log_factorial(2 * c) - log_factorial(c) - c * std::log(2.0) -
                    0.5 * std::log(kTwoPi) - 0.5 * log_factorial(a);
  return 2.0 * (c % 2 == 0 ? 1.0 : -1.0) * std::exp(lv);
}

double monomial_hermite_coefficient(int d, int a) {
  if (d < 0 || a < 0) throw std::invalid_argument("monomial_hermite_coefficient: negative arg");
  if (a > d || (d - a) % 2 != 0) return 0.0;
  const int k = (d - a) / 2;
  // t^d = sum_k d!/(2^k k! (d-2k)!) H~_{d-2k}
  const double lv = log_factorial(d) - k * std::log(2.0) - log_factorial(k) -
                    0.5 * log_factorial(a);
  return std::exp(lv);
}

namespace {

std::vector<double> coeffs_on_rule(const ActivationSpec& act, int max_degree,
                                   const std::vector<double>& nodes,
                                   const std::vector<double>& weights) {
  std::vector<double> out(max_degree + 1, 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i];
    const double w = weights[i] * act(x);
    // far-tail nodes contribute below every tolerance in play but can push
    // the recurrence toward overflow; drop them
    if (std::abs(w) < 1e-200 || !std::isfinite(w)) continue;
    double prev = 0.0, curr = 1.0;
    for (int a = 0; a <= max_degree; ++a) {
      out[a] += w * curr;
      const double next =
          (x * curr - std::sqrt(static_cast<double>(a)) * prev) / std::sqrt(a + 1.0);
      prev = curr;
      curr = next;
    }
  }
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

HermiteCoefficients hermite_coefficients_by_quadrature(
    const ActivationSpec& activation, int max_degree, int quadrature_nodes) {
  if (max_degree < 0) throw std::invalid_argument("max_degree must be nonnegative");
  if (activation.growth_degree() > 60) {
    throw std::invalid_argument(
        "unsupported activation: growth degree too large for double-precision "
        "quadrature of its Hermite coefficients");
  }

  HermiteCoefficients result{activation, {}, {}, 0.0};
  const auto kinks = activation.kinks();

  if (activation.is_smooth()) {
    int n = quadrature_nodes > 0 ? quadrature_nodes : 4 * (max_degree + 1);
    n = std::max(n, max_degree + 1);
    const int cap = 1 << 14;
    n = std::min(n, cap);
    const auto& rule0 = quad::gauss_hermite_prob(n);
    std::vector<double> est = coeffs_on_rule(activation, max_degree, rule0.nodes, rule0.weights);
    double delta = kInf;
    while (n < cap) {
      n = std::min(2 * n, cap);
      const auto& rule = quad::gauss_hermite_prob(n);
      std::vector<double> next = coeffs_on_rule(activation, max_degree, rule.nodes, rule.weights);
      const double prev_delta = delta;
      delta = max_abs_diff(est, next);
      est = std::move(next);
      if (delta <= 1e-10) break;
      // once successive changes sit at the round-off plateau, doubling the
      // node count only reshuffles the last bits
      if (prev_delta < 1e-8 && delta >= 0.5 * prev_delta) break;
    }
    result.coeffs = std::move(est);
    result.convergence_delta = delta;
  } else {
    // kink-split composite Gauss-Legendre against the Gaussian density,
    // panel count doubled until stable
    const double radius = 26.0;
    auto run = [&](int segs_per_unit) {
      std::vector<double> cuts{-radius, radius};
      for (double k : kinks) cuts.push_back(k);
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> nodes, weights;
      const auto& gl = quad::gauss_legendre(24);
      const double norm = 1.0 / std::sqrt(kTwoPi);
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double lo = cuts[c], hi = cuts[c + 1];
        const int segs = std::max(1, static_cast<int>(std::ceil((hi - lo) * segs_per_unit)));
        const double h = (hi - lo) / segs;
        for (int s = 0; s < segs; ++s) {
          const double mid = lo + (s + 0.5) * h;
          for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double x = mid + 0.5 * h * gl.nodes[i];
            nodes.push_back(x);
            weights.push_back(0.5 * h * gl.weights[i] * norm * std::exp(-0.5 * x * x));
          }
        }
      }
      return coeffs_on_rule(activation, max_degree, nodes, weights);
    };
    int spu = 3;
    std::vector<double> est = run(spu);
    double delta = kInf;
    while (spu < 48) {
      spu *= 2;
      std::vector<double> next = run(spu);
      delta = max_abs_diff(est, next);
      est = std::move(next);
      if (delta <= 1e-12) break;
    }
    result.coeffs = std::move(est);
    result.convergence_delta = std::min(delta, 1e-12);
  }

  result.source.assign(max_degree + 1, ActivationSpec::CoefficientSource::quadrature);
  return result;
}

int approximate_degree(const ActivationSpec& activation, double delta,
                       int max_search_degree) {
  if (delta <= 0) throw std::invalid_argument("approximate_degree: delta must be positive");
  std::vector<double> coeffs;
  if (activation.coefficient_source() == ActivationSpec::CoefficientSource::closed_form) {
    coeffs.resize(max_search_degree + 1);
    for (int a = 0; a <= max_search_degree; ++a) coeffs[a] = activation.hermite_coefficient(a);
  } else {
    coeffs = hermite_coefficients_by_quadrature(activation, max_search_degree).coeffs;
  }
  const long double total = activation.second_moment();
  long double tail = total;
  const long double target = static_cast<long double>(delta) * delta;
  for (int d = 0; d <= max_search_degree; ++d) {
    tail -= static_cast<long double>(coeffs[d]) * coeffs[d];
    if (tail <= target) return d;
  }
  throw ApproximateDegreeError(
      "approximate_degree: tail stays above delta^2 up to degree " +
          std::to_string(max_search_degree),
      static_cast<double>(std::max<long double>(tail, 0.0L)));
}

double relu_truncation_bound(double T) {
  if (T <= 0) throw std::invalid_argument("relu_truncation_bound: T must be positive");
  return std::sqrt(std::exp(-0.5 * T * T) * (T * T + 1.0 - T / std::sqrt(kTwoPi)));
}

}  // namespace hermite
}  // namespace sqb
