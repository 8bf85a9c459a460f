#ifndef SQB_SQ_ORACLE_HPP
#define SQB_SQ_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqb/funcspace.hpp"
#include "sqb/rng.hpp"

namespace sqb {

// Deterministic integration recipe a fixture attaches to its distribution.
// Oracles execute it when asked for quadrature-backed answers; queries must
// depend on x only through the declared basis columns.
struct QuadRecipe {
  enum class Mode { none, one_d, split2d, polar2d, tensor2d };
  Mode mode = Mode::none;
  Eigen::MatrixXd basis;               // n x dim, orthonormal columns
  std::vector<double> z1_breakpoints;  // one_d / split2d kink coordinates
  std::vector<double> kink_angles;     // polar2d
  int tensor_nodes = 128;
  int z2_nodes = 64;
};

// Joint distribution of (x, y): x ~ N(0, I_n), plus one of three label models.
//  - deterministic: y = f_cmf(x)
//  - pconcept:      y in {±1}, E[y|x] = f_cmf(x) (requires sup|f_cmf| <= 1)
//  - shifted:       y = y_base - shift(x) for (x, y_base) from a base model
class LabeledDistribution {
 public:
  enum class LabelModel { deterministic, pconcept, shifted };

  static LabeledDistribution deterministic(FunctionHandle cmf, double label_bound,
                                           QuadRecipe recipe = {});
  static LabeledDistribution pconcept(FunctionHandle cmf, QuadRecipe recipe = {});
  static LabeledDistribution shifted(LabeledDistribution base, FunctionHandle shift,
                                     std::optional<double> shift_bound = {});

  LabelModel label_model() const { return model_; }
  int dimension() const { return cmf_.arity(); }
  const FunctionHandle& conditional_mean() const { return cmf_; }
  double label_bound() const { return label_bound_; }
  const QuadRecipe& recipe() const { return recipe_; }

  // one labeled draw given x (Bernoulli for p-concepts; deterministic otherwise)
  double sample_label(const Eigen::VectorXd& x, RngStream& rng) const;
  // E_{y|x}[ f(y) ], exact over the label model
  double label_average(const Eigen::VectorXd& x, const std::function<double(double)>& f) const;

 private:
  LabeledDistribution() = default;
  LabelModel model_ = LabelModel::deterministic;
  FunctionHandle cmf_ = FunctionHandle::zero(1);
  double label_bound_ = 1.0;
  QuadRecipe recipe_;
  // shifted model keeps its parents
  std::shared_ptr<const LabeledDistribution> base_;
  std::optional<FunctionHandle> shift_;
};

// Query function phi: R^n x R -> [-1, 1], with a declared tolerance. Raw
// query values are divided by range_bound and clipped into [-1, 1], so
// unbounded payloads (h(x) y, y H_I(x), ...) become valid queries; answers and
// tolerances are in the normalized [-1, 1] units.
class StatQuery {
 public:
  StatQuery(std::function<double(const Eigen::VectorXd&, double)> raw, double tolerance,
            double range_bound = 1.0, std::vector<double> quad_breakpoints = {});

  double evaluate(const Eigen::VectorXd& x, double y) const;
  double tolerance() const { return tolerance_; }
  double range_bound() const { return range_bound_; }
  const std::vector<double>& quad_breakpoints() const { return quad_breakpoints_; }
  const std::function<double(const Eigen::VectorXd&, double)>& raw() const { return raw_; }

 private:
  std::function<double(const Eigen::VectorXd&, double)> raw_;
  double tolerance_;
  double range_bound_;
  std::vector<double> quad_breakpoints_;
};

enum class AdversaryMode { honest, seeded_uniform, grid_rounding };

enum class EstimationMethod { quadrature_when_possible, monte_carlo };

struct OracleConfig {
  AdversaryMode adversary = AdversaryMode::honest;
  EstimationMethod estimation = EstimationMethod::quadrature_when_possible;
  std::uint64_t seed = 0;
  std::int64_t mc_samples = 1'000'000;
  int mc_streams = 64;
};

struct QueryRecord {
  std::uint64_t ordinal;
  double tolerance;
  AdversaryMode mode;
  double answer;
  double est_stderr;
};

// Append-only, thread-safe accounting of every answered query.
class QueryLedger {
 public:
  std::uint64_t count() const;
  double min_tolerance_used() const;  // +inf when empty
  std::vector<QueryRecord> snapshot() const;
  void export_csv(const std::string& path) const;

  std::uint64_t reserve_ordinal();
  void append(QueryRecord rec);

 private:
  mutable std::mutex mu_;
  std::uint64_t next_ordinal_ = 0;
  std::vector<QueryRecord> log_;
};

// Sum over logged queries of 1/tau^2 (unit constant); 0 for an empty ledger.
double implied_sample_complexity(const QueryLedger& ledger);

// Estimation noise too coarse for the requested tolerance; retry with a
// larger sample budget.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E_x[g(x)] over N(0, I_n) executed with a fixture-declared recipe; breaks
// with std::logic_error when the recipe mode is none. extra_breakpoints are
// merged into the z1 cut set of one_d/split2d recipes.
double integrate_recipe(const QuadRecipe& recipe,
                        const std::function<double(const Eigen::VectorXd&)>& g,
                        const std::vector<double>& extra_breakpoints = {});

// Answer within tolerance of E[phi(x,y)]; p-concept labels are averaged
// exactly in quadrature mode and sampled in Monte Carlo mode. Monte Carlo
// standard error above tolerance/10 raises ResolutionError so estimation
// noise is never mistaken for adversarial slack.
double answer_query(const LabeledDistribution& dist, const StatQuery& query,
                    const OracleConfig& config, QueryLedger& ledger);

// phi'(x, y) = phi(x, y - psi(current_f(x))), re-clipped: querying the base
// distribution with phi' equals querying the residual distribution with phi.
StatQuery rewrite_query_for_residual(const StatQuery& query, const FunctionHandle& current_f,
                                     const ActivationSpec& psi);

// Appendix-style p-concept construction: Boolean labels b with
// E[b|a] = f_cmf(a)/C, so E[f(a) b] = (1/C) E[f(x) y] for every test f.
LabeledDistribution simulate_boolean_from_real(const LabeledDistribution& dist);

// Bundles a distribution with a config and a ledger, exposing *only* query
// answering: holders of a StatOracle have no channel to the conditional mean
// other than statistical queries.
class StatOracle {
 public:
  StatOracle(LabeledDistribution dist, OracleConfig config);
  double answer(const StatQuery& query);
  const QueryLedger& ledger() const { return ledger_; }
  int dimension() const { return dist_.dimension(); }
  double label_bound() const { return dist_.label_bound(); }

 private:
  LabeledDistribution dist_;
  OracleConfig config_;
  QueryLedger ledger_;
};

// E_P[phi(a, b)] for the induced Boolean p-concept P, computed through two
// real statistical queries:
//   (1/2) E[phi(x,1) + phi(x,-1)] + (1/(2C)) E[(phi(x,1) - phi(x,-1)) y].
double answer_boolean_query_two_term(
    StatOracle& real_oracle, const std::function<double(const Eigen::VectorXd&, int)>& phi,
    double tolerance);

}  // namespace sqb

#endif  // SQB_SQ_ORACLE_HPP
