#ifndef SQB_SDA_BOUNDS_HPP
#define SQB_SDA_BOUNDS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sqb/funcspace.hpp"

namespace sqb {

// Finite function class with its pairwise inner-product matrix.
struct FiniteClass {
  std::vector<FunctionHandle> members;
  Eigen::MatrixXd gram;         // symmetric, diagonal = squared norms
  Eigen::MatrixXd gram_stderr;  // zero where entries are exact
};

FiniteClass make_finite_class(std::vector<FunctionHandle> members,
                              Method method = Method::automatic,
                              const MonteCarloOptions& mc = {});

// rho over a subset: (1/s^2) sum over the s x s submatrix of |gram| entries.
double average_correlation(const FiniteClass& cls, std::span<const int> subset);

// Exact statistical dimension on average at threshold gamma: the largest d
// such that every subset of size at least floor(|C|/d) has average absolute
// correlation at most gamma (0 when even the full class fails; |C| when every
// subset passes). Full subset scan; class size capped at 20.
int sda_exact(const FiniteClass& cls, double gamma);

// Certified lower bound on sda_exact from a greedy envelope: the worst
// size-s subset is bounded by packing the s largest diagonal entries and the
// s(s-1) largest off-diagonal magnitudes. Never exceeds sda_exact.
int sda_greedy_lower(const FiniteClass& cls, double gamma);

// All C(n, d) degree-d multilinear monomials x_S (optionally tanh-composed).
// Plain monomial grams are exact (products of one-dimensional moments);
// tanh-composed grams are Monte Carlo with per-entry standard errors.
FiniteClass monomial_class(int n, int d, bool with_tanh, int cap = 128,
                           const MonteCarloOptions& mc = {});

// Paley-Zygmund lower bound on ||tanh(x_S)||^2 for |S| = d:
// tanh(1/2)^2 * (1/4) * 3^{-d}.
double monomial_norm_lower_bound(int d);

struct RegimeParams {
  double tau = 0.0;
  double epsilon = 0.0;
  double beta = 0.0;  // class norm floor
};

struct RegimeReport {
  struct Item {
    std::string constraint;
    bool pass;
    std::string reason;
  };
  std::vector<Item> items;
  bool valid = false;
};

// Checks the parameter regime needed by the SQ lower-bound reduction:
// tau <= eps^2, eps <= beta/3, and the information-theoretic floor tau < eps.
RegimeReport regime_check(const RegimeParams& params);

enum class BoundFamily { relu, sigmoid, halfspace, monomial, custom };

struct LowerBoundResult {
  double k = 0.0;            // hidden-unit parameter k(eps), unit constants
  double tau_exponent = 0.0; // tau = n^(exponent), i.e. -k by convention
  std::string query_bound;   // rendered description, order-only constants
};

// Pure arithmetic of the lower-bound parameter choices; constants inside
// Theta(.) are rendered as 1 and labeled order-only.
LowerBoundResult lower_bound_calculator(BoundFamily family, double epsilon,
                                        int monomial_degree = 1,
                                        const std::function<double(double)>& beta_of_k = {});

void write_gram_csv(const std::string& path, const FiniteClass& cls);

}  // namespace sqb

#endif  // SQB_SDA_BOUNDS_HPP
