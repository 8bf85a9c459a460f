#ifndef SQB_BOOSTING_HPP
#define SQB_BOOSTING_HPP

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "sqb/funcspace.hpp"
#include "sqb/sq_oracle.hpp"

namespace sqb {

// Loss functional over function space. squared: l(a,b) = (a-b)^2 (2-smooth).
// surrogate: l(a,b) = int_0^a (psi(u) - b) du for a nondecreasing
// lambda-Lipschitz psi (lambda-smooth); its gradient at f is psi(f) - psi(f*).
struct LossSpec {
  enum class Kind { squared, surrogate };
  Kind kind = Kind::squared;
  std::optional<ActivationSpec> psi;

  static LossSpec squared() { return LossSpec{Kind::squared, {}}; }
  static LossSpec surrogate(ActivationSpec psi_act) {
    return LossSpec{Kind::surrogate, std::move(psi_act)};
  }
  double smoothness() const {
    return kind == Kind::squared ? 2.0 : psi->lipschitz();
  }
};

struct FWConfig {
  int iterations = 50;    // T
  double delta = 1.0;     // subproblem slack multiplier
  double alpha = 1.0;     // approximation factor in (0, 1]
  double diameter = 2.0;  // diam of the atom class / ambient ball
  double smoothness = 1.0;

  double curvature() const { return smoothness * diameter * diameter; }  // C_p
  // gamma_t = 2/(alpha (t+2)), clipped into [0, 1]
  double gamma(int t) const {
    const double g = 2.0 / (alpha * (t + 2));
    return g > 1.0 ? 1.0 : g;
  }
};

struct FWIterationRecord {
  int t = 0;
  double gamma = 0.0;
  double gap_estimate = 0.0;  // NaN when no probe is attached
  double gap_bound = 0.0;
  double subproblem_correlation = 0.0;
  int atom_id = -1;
  double l2_to_target = 0.0;  // NaN when no probe is attached
};

struct FWTrace {
  std::vector<FWIterationRecord> records;  // t = 0..T step records, then a final probe row
  ConvexCombination final_combination;
  std::uint64_t queries_used = 0;
};

// Fixture-side measurement of an iterate: (surrogate gap, L2 distance of
// psi(f_t) to the target). Firewalled from the algorithm: its results are
// written to the trace and never read back.
using FWProbe =
    std::function<std::pair<double, double>(int t, const ConvexCombination& iterate)>;

// L_sur(f) = E[Psi(f(x)) - y f(x)] with Psi the antiderivative of psi.
// Evaluated against the distribution directly (test/driver side).
EstimateResult surrogate_loss(const FunctionHandle& f, const LabeledDistribution& dist,
                              const ActivationSpec& psi,
                              const MonteCarloOptions& mc = {});

// Handle evaluating psi(f(x)) - psi(f_star(x)); zero function at f = f_star.
FunctionHandle surrogate_gradient(const FunctionHandle& f, const FunctionHandle& f_star,
                                  const ActivationSpec& psi);

// Functional gradient of either loss against a deterministic target:
// squared -> 2 (f - f_star), surrogate -> psi(f) - psi(f_star).
FunctionHandle loss_gradient(const LossSpec& loss, const FunctionHandle& f,
                             const FunctionHandle& f_star);

// Frank-Wolfe on the surrogate loss through statistical queries only. Each of
// the T+1 iterations asks one rewritten residual-correlation query per
// candidate at tolerance eps_t/10, eps_t = (1/2) gamma_t delta C_p, and steps
// toward the best answer. The oracle is the sole label channel.
FWTrace run_fw_surrogate(StatOracle& oracle, const std::vector<FunctionHandle>& candidates,
                         const FWConfig& config, const ActivationSpec& psi,
                         const FWProbe& probe = {});

// Generic Frank-Wolfe over a finite-dimensional inner-product space given by
// a gram matrix; atoms are coordinate vectors spanning the feasible hull.
struct GenericObjective {
  Eigen::MatrixXd gram;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  double optimum_value = 0.0;  // fixture-known min over the hull
};

struct GenericFWResult {
  std::vector<FWIterationRecord> records;
  Eigen::VectorXd final_coords;
};

// The subproblem honors the relaxed guarantee
//   <s, -grad> >= alpha max_{s'} <s', -grad> - (1/2) delta gamma_t C_p
// adversarially: among qualifying atoms the worst is chosen, scaled by alpha.
GenericFWResult run_fw_generic(const GenericObjective& objective,
                               const std::vector<Eigen::VectorXd>& atoms,
                               const FWConfig& config);

// sqrt(2 lambda gap); negative gaps (estimation noise) clamp to zero.
double surrogate_gap_to_l2(double gap, double lambda, bool* clamped = nullptr);

// Trace CSV: (t, gamma, gap_estimate, gap_bound, subproblem_correlation, l2_to_target).
void write_trace_csv(const std::string& path, const FWTrace& trace);

}  // namespace sqb

#endif  // SQB_BOOSTING_HPP
