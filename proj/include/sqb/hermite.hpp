#ifndef SQB_HERMITE_HPP
#define SQB_HERMITE_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqb {

// A scalar activation with everything the rest of the library needs from it:
// pointwise evaluation, Lipschitz constant, antiderivative (when available),
// kink locations for piecewise quadrature, and Hermite coefficient access.
class ActivationSpec {
 public:
  enum class Kind { relu, sigmoid, sign, tanh, lsgn, monomial };
  enum class CoefficientSource { closed_form, quadrature };

  static ActivationSpec relu();
  static ActivationSpec sigmoid();
  static ActivationSpec sign();
  static ActivationSpec tanh();
  static ActivationSpec lsgn(int k);      // -1 below -1/k, +1 above 1/k, linear between
  static ActivationSpec monomial(int d);  // t^d

  Kind kind() const { return kind_; }
  int parameter() const { return param_; }  // k for lsgn, d for monomial
  std::string name() const;

  double operator()(double t) const;

  // Lipschitz constant on the real line; +infinity for sign, and monomial(d)
  // with d >= 2 is only locally Lipschitz (also reported as +infinity).
  double lipschitz() const;

  bool antiderivative_available() const;
  // Psi(a) = integral of the activation from 0 to a
  double antiderivative(double a) const;

  bool is_smooth() const;               // no kinks or jumps anywhere
  std::vector<double> kinks() const;    // non-smooth points, empty if smooth
  bool is_bounded() const;
  double bound() const;                 // sup |phi| when bounded

  // |phi(t)| <= poly_growth_bound * (1 + |t|^growth_degree); used to certify
  // integrability of quadrature coefficients.
  int growth_degree() const;

  CoefficientSource coefficient_source() const;
  // Hermite coefficient in the normalized probabilists' basis. Closed form
  // where one exists (relu, sign, monomial); quadrature-backed otherwise.
  double hermite_coefficient(int a) const;
  // E[phi(t)^2] under N(0,1); closed form where available, else quadrature.
  double second_moment() const;

 private:
  ActivationSpec(Kind k, int p) : kind_(k), param_(p) {}
  Kind kind_;
  int param_;
};

namespace hermite {

enum class Normalization { probabilists_normalized, probabilists_monic };

struct HermiteBasis {
  int max_degree = 0;
  Normalization normalization = Normalization::probabilists_normalized;
};

// Stable three-term recurrences. eval_normalized keeps magnitudes O(1) in the
// oscillatory region and is safe for large degrees; the monic recurrence
// overflows past degree ~150 at large |x|.
double eval_normalized(int a, double x);
double eval_monic(int a, double x);
double eval_hermite(const HermiteBasis& basis, int degree, double x);

// H~_a(0) split into sign and log magnitude (zero for odd a).
double monic_at_zero(int a);
// log(a!) via lgamma
double log_factorial(int a);

// Closed forms for normalized-basis coefficients.
double relu_hermite_coefficient(int a);
double sign_hermite_coefficient(int a);
double monomial_hermite_coefficient(int d, int a);

struct HermiteCoefficients {
  ActivationSpec activation;
  std::vector<double> coeffs;  // index a = 0..max_degree
  std::vector<ActivationSpec::CoefficientSource> source;
  double convergence_delta = 0.0;  // max change in the last refinement step
};

// Coefficients up to max_degree by numerical integration. Smooth activations
// use Gauss-Hermite with node doubling (starting from quadrature_nodes,
// default 4*(max_degree+1), capped at 2^14) until successive estimates agree
// to 1e-10. Kinked activations (relu, sign, lsgn) are integrated by
// kink-split composite Gauss-Legendre, for which plain Gauss-Hermite would
// converge only at rate 1/N.
HermiteCoefficients hermite_coefficients_by_quadrature(
    const ActivationSpec& activation, int max_degree, int quadrature_nodes = 0);

class ApproximateDegreeError : public std::runtime_error {
 public:
  ApproximateDegreeError(const std::string& msg, double achieved_tail)
      : std::runtime_error(msg), achieved_tail(achieved_tail) {}
  double achieved_tail;
};

// Smallest d with sum_{a>d} phi_hat_a^2 <= delta^2 (the truncated expansion is
// the optimal L2 approximant). Throws ApproximateDegreeError, carrying the
// achieved tail, if no d <= max_search_degree works.
int approximate_degree(const ActivationSpec& activation, double delta,
                       int max_search_degree = 400);

// Upper bound on ||relu - min(relu, T)|| under N(0,1):
// sqrt(e^{-T^2/2} (T^2 + 1 - T/sqrt(2 pi))).
double relu_truncation_bound(double T);

}  // namespace hermite
}  // namespace sqb

#endif  // SQB_HERMITE_HPP
