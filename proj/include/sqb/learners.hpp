#ifndef SQB_LEARNERS_HPP
#define SQB_LEARNERS_HPP

#include <functional>
#include <string>
#include <vector>

#include "sqb/funcspace.hpp"
#include "sqb/sq_oracle.hpp"

namespace sqb {

// An agnostic base learner contract: output lies in the ball of radius
// diameter/2 and its correlation with the labels is within epsilon of the
// best class member's.
struct BaseLearnerSpec {
  enum class Hypothesis { relu_units, sigmoid_units, halfspaces, monomials, explicit_list };
  Hypothesis hypothesis = Hypothesis::relu_units;
  int monomial_degree = 1;
  double diameter = 2.0;
  double tau_floor = 0.0;       // low_degree_learn refuses tolerances below this
  int max_search_degree = 400;  // cap for the approximate-degree search
};

struct LearnerOutput {
  FunctionHandle hypothesis;
  double achieved_correlation = 0.0;
  double correlation_stderr = 0.0;
  std::vector<QueryRecord> query_log;
  // low-degree diagnostics
  int degree_used = 0;
  double tau_used = 0.0;
  bool gate_triggered = false;  // returned the zero function
};

class InfeasibleToleranceError : public std::runtime_error {
 public:
  InfeasibleToleranceError(const std::string& msg, double required_tau)
      : std::runtime_error(msg), required_tau(required_tau) {}
  double required_tau;
};

// Low-degree agnostic learner: estimates every Hermite coefficient of the
// conditional mean up to the class's (epsilon/2C)-approximate degree d, one
// statistical query per multi-index at tolerance eps^2/(8 R C n^{d/2}),
// rescales the estimated polynomial to norm R, and returns the zero function
// when the correlation certificate R||f~|| + C delta falls at or below
// epsilon.
LearnerOutput low_degree_learn(const LabeledDistribution& dist, const BaseLearnerSpec& spec,
                               double epsilon, const OracleConfig& oracle_config);

// Benchmark learner: picks the candidate with the largest estimated
// correlation, measured directly on the distribution (no oracle); slack is
// estimation error only.
LearnerOutput idealized_grid_learn(const LabeledDistribution& dist,
                                   const std::vector<FunctionHandle>& candidates,
                                   double diameter, const MonteCarloOptions& mc = {});

// Square-loss-to-correlation adapter for a norm-closed class (any member can
// be rescaled within the class): returns 0 when ||h|| <= eta = eps^2/4, else
// h/||h||. The square-loss run is expected at slack eps' = eps^3/8.
FunctionHandle correlation_from_square_loss(const FunctionHandle& h, double epsilon,
                                            double label_bound);

// A learner that consumes Boolean-label p-concept query access.
using BooleanQueryAnswerer =
    std::function<double(const std::function<double(const Eigen::VectorXd&, int)>& phi,
                         double tolerance)>;
using BooleanLearner = std::function<FunctionHandle(const BooleanQueryAnswerer&, int dimension)>;

// Runs a Boolean 0-1 learner against the induced p-concept (labels scaled to
// conditional mean f_cmf/C); its queries are answered through the two-term
// identity on the real distribution.
LearnerOutput boolean_zero_one_adapter(const BooleanLearner& learner,
                                       const LabeledDistribution& dist, double epsilon,
                                       const OracleConfig& oracle_config);

// Desk-scale Boolean learner: grid search over sign ridges through Boolean
// correlation queries.
BooleanLearner make_sign_grid_boolean_learner(std::vector<FunctionHandle> sign_candidates,
                                              double epsilon);

// One row of the learner-run CSV:
// (fixture_id, mode, epsilon, tau_used, queries, achieved_correlation, benchmark_correlation).
struct LearnerRunRow {
  std::string fixture_id;
  std::string mode;
  double epsilon = 0.0;
  double tau_used = 0.0;
  std::uint64_t queries = 0;
  double achieved_correlation = 0.0;
  double benchmark_correlation = 0.0;
};
void write_learner_runs_csv(const std::string& path, const std::vector<LearnerRunRow>& rows);

}  // namespace sqb

#endif  // SQB_LEARNERS_HPP
