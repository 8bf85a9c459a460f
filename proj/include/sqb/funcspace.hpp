#ifndef SQB_FUNCSPACE_HPP
#define SQB_FUNCSPACE_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sqb/hermite.hpp"

namespace sqb {

// Radius used when turning unbounded functions into [-1,1]-range statistical
// queries: sup bounds are taken over the ball ||x|| <= kBoundRadius, outside
// of which the Gaussian mass (< e^{-128}) is far below every tolerance in use.
inline constexpr double kBoundRadius = 16.0;

// Multi-indices I in N^n with |I| <= d, graded lexicographic order (total
// degree first, then ascending lexicographic comparison of the tuples).
class MultiIndexSet {
 public:
  MultiIndexSet(int dimension, int max_total_degree);
  int dimension() const { return dimension_; }
  int max_total_degree() const { return max_degree_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<int>& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<std::vector<int>>& indices() const { return indices_; }
  static std::size_t expected_count(int n, int d);  // C(n+d, d)

 private:
  int dimension_;
  int max_degree_;
  std::vector<std::vector<int>> indices_;
};

// An evaluable function on R^n with a declared structure. Immutable; copies
// share the underlying node. The structure tag is what lets inner products
// pick deterministic quadrature over Monte Carlo.
class FunctionHandle {
 public:
  static FunctionHandle zero(int arity);
  static FunctionHandle ridge(ActivationSpec act, Eigen::VectorXd weight);
  static FunctionHandle scaled(double factor, FunctionHandle inner);
  static FunctionHandle sum(std::vector<FunctionHandle> parts);
  static FunctionHandle composed(ActivationSpec outer, FunctionHandle inner);
  static FunctionHandle polynomial(MultiIndexSet set, Eigen::VectorXd coeffs);
  // single multivariate Hermite polynomial H_I
  static FunctionHandle hermite_indexed(int arity, std::vector<int> index);
  static FunctionHandle opaque(int arity,
                               std::function<double(const Eigen::VectorXd&)> fn,
                               std::optional<double> norm_hint = {});

  int arity() const;
  double operator()(const Eigen::VectorXd& x) const;
  std::optional<double> norm_hint() const;
  bool is(const FunctionHandle& other) const { return node_ == other.node_; }

  // sup|f| over the centered ball of the given radius (finite overestimate)
  double bound_on_ball(double radius) const;

  struct Scan {
    std::vector<Eigen::VectorXd> ridge_dirs;
    // leaf kink hyperplanes <w, x> = offset
    std::vector<std::pair<Eigen::VectorXd, double>> leaf_kinks;
    bool any_opaque = false;
    bool any_polynomial = false;
    bool nonsmooth_outer = false;     // kinked activation composed over a non-leaf
    bool kinks_at_origin_only = true; // every leaf kink sits on <w,x> = 0
    bool any_kinks = false;
  };
  void scan_structure(Scan& s) const;

  struct Node;  // internal

 private:
  explicit FunctionHandle(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Frank-Wolfe iterate: convex weights over atoms. Weights always sum to 1.
class ConvexCombination {
 public:
  explicit ConvexCombination(FunctionHandle initial_atom);
  ConvexCombination(std::vector<std::pair<double, FunctionHandle>> atoms);

  const std::vector<std::pair<double, FunctionHandle>>& atoms() const { return atoms_; }
  int arity() const;
  std::size_t support_size() const { return atoms_.size(); }
  double weight_sum() const;
  // weighted sum of atom evaluations, in stored order
  double operator()(const Eigen::VectorXd& x) const;
  FunctionHandle as_handle() const;

 private:
  std::vector<std::pair<double, FunctionHandle>> atoms_;
};

// z_{t+1} = (1 - gamma) z_t + gamma * atom. gamma outside [0,1] is a contract
// error; gamma == 0 returns the input, gamma == 1 collapses to the new atom.
ConvexCombination fw_step(const ConvexCombination& current,
                          const FunctionHandle& atom, double gamma);

struct EstimateResult {
  double estimate = 0.0;
  double std_error = 0.0;  // 0 for deterministic quadrature
};

enum class Method { automatic, quadrature, monte_carlo };

struct MonteCarloOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int streams = 64;  // per-stream substreams combined in index order
};

// E[f g] under N(0, I_n). `automatic` picks deterministic quadrature when the
// pair reduces to at most two effective dimensions with certifiable kink
// structure, Monte Carlo otherwise. Mismatched arities are a contract error;
// requesting quadrature on a structure it cannot certify is an unsupported
// error.
EstimateResult inner_product(const FunctionHandle& f, const FunctionHandle& g,
                             Method method = Method::automatic,
                             const MonteCarloOptions& mc = {});

EstimateResult norm(const FunctionHandle& f, Method method = Method::automatic,
                    const MonteCarloOptions& mc = {});

MultiIndexSet enumerate_multi_indices(int n, int d);

// CSV serialization of a coefficient vector over a multi-index set: one row
// per index (index entries, then coefficient), graded-lex order.
void write_coefficients_csv(const std::string& path, const MultiIndexSet& set,
                            const Eigen::VectorXd& coeffs);

}  // namespace sqb

#endif  // SQB_FUNCSPACE_HPP
