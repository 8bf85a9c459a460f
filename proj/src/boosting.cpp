#include "sqb/boosting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sqb/csv.hpp"
#include "sqb/quadrature.hpp"

namespace sqb {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

EstimateResult surrogate_loss(const FunctionHandle& f, const LabeledDistribution& dist,
                              const ActivationSpec& psi, const MonteCarloOptions& mc) {
  if (!psi.antiderivative_available()) {
    throw std::invalid_argument("surrogate_loss: psi has no antiderivative");
  }
  if (dist.recipe().mode != QuadRecipe::Mode::none) {
    // E_x[ Psi(f(x)) - E[y|x] f(x) ]
    EstimateResult r;
    r.estimate = integrate_recipe(dist.recipe(), [&](const Eigen::VectorXd& x) {
      return dist.label_average(x, [&](double y) { return psi.antiderivative(f(x)) - y * f(x); });
    });
    return r;
  }
  // Monte Carlo fallback
  const int n = f.arity();
  const int streams = std::max(1, mc.streams);
  const std::int64_t per = std::max<std::int64_t>(1, mc.samples / streams);
  const std::int64_t total = per * streams;
  long double sum = 0.0L, sumsq = 0.0L;
  Eigen::VectorXd x(n);
  for (int st = 0; st < streams; ++st) {
    RngStream rng(substream_seed(mc.seed, st));
    long double s1 = 0.0L, s2 = 0.0L;
    for (std::int64_t i = 0; i < per; ++i) {
      for (int j = 0; j < n; ++j) x[j] = rng.next_gaussian();
      const double y = dist.sample_label(x, rng);
      const double v = psi.antiderivative(f(x)) - y * f(x);
      s1 += v;
      s2 += static_cast<long double>(v) * v;
    }
    sum += s1;
    sumsq += s2;
  }
  EstimateResult r;
  r.estimate = static_cast<double>(sum / total);
  const double var = std::max(0.0, static_cast<double>(sumsq / total) - r.estimate * r.estimate);
  r.std_error = std::sqrt(var / static_cast<double>(total));
  return r;
}

FunctionHandle surrogate_gradient(const FunctionHandle& f, const FunctionHandle& f_star,
                                  const ActivationSpec& psi) {
  return FunctionHandle::sum({FunctionHandle::composed(psi, f),
                              FunctionHandle::scaled(-1.0, FunctionHandle::composed(psi, f_star))});
}

FunctionHandle loss_gradient(const LossSpec& loss, const FunctionHandle& f,
                             const FunctionHandle& f_star) {
  if (loss.kind == LossSpec::Kind::squared) {
    return FunctionHandle::scaled(
        2.0, FunctionHandle::sum({f, FunctionHandle::scaled(-1.0, f_star)}));
  }
  return surrogate_gradient(f, f_star, *loss.psi);
}

FWTrace run_fw_surrogate(StatOracle& oracle, const std::vector<FunctionHandle>& candidates,
                         const FWConfig& config, const ActivationSpec& psi,
                         const FWProbe& probe) {
  if (candidates.empty()) {
    throw std::invalid_argument("run_fw_surrogate: candidate list must be nonempty");
  }
  if (!psi.is_bounded()) {
    throw std::invalid_argument("run_fw_surrogate: psi must map into [-1, 1]");
  }
  const int n = oracle.dimension();
  const double lambda = config.smoothness;
  const double residual_bound = oracle.label_bound() + psi.bound();

  // range normalization per candidate, fixed across iterations
  std::vector<double> range_bounds(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    range_bounds[j] = candidates[j].bound_on_ball(kBoundRadius) * residual_bound;
  }

  FWTrace trace{{}, ConvexCombination(FunctionHandle::zero(n)), 0};
  ConvexCombination iterate(FunctionHandle::zero(n));

  for (int t = 0; t <= config.iterations; ++t) {
    const double gamma = config.gamma(t);
    const double eps_t = 0.5 * config.delta * gamma * lambda * config.diameter * config.diameter;
    const double tau_t = eps_t / 10.0;

    const FunctionHandle f_handle = iterate.as_handle();
    int best = -1;
    double best_corr = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const FunctionHandle& h = candidates[j];
      StatQuery base([h](const Eigen::VectorXd& x, double y) { return h(x) * y; },
                     tau_t / range_bounds[j], range_bounds[j]);
      StatQuery rewritten = rewrite_query_for_residual(base, f_handle, psi);
      const double corr = oracle.answer(rewritten) * range_bounds[j];
      if (corr > best_corr) {
        best_corr = corr;
        best = static_cast<int>(j);
      }
    }

    FWIterationRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.gap_bound = 2.0 * config.curvature() * (1.0 + config.delta) / (t + 2.0);
    rec.subproblem_correlation = best_corr;
    rec.atom_id = best;
    if (probe) {
      const auto [gap, l2] = probe(t, iterate);
      rec.gap_estimate = gap;
      rec.l2_to_target = l2;
    } else {
      rec.gap_estimate = kNan;
      rec.l2_to_target = kNan;
    }
    trace.records.push_back(rec);

    iterate = fw_step(iterate, candidates[best], gamma);
  }

  // final probe row for f_{T+1}
  FWIterationRecord fin;
  fin.t = config.iterations + 1;
  fin.gamma = kNan;
  fin.gap_bound = 2.0 * config.curvature() * (1.0 + config.delta) / (config.iterations + 3.0);
  fin.subproblem_correlation = kNan;
  fin.atom_id = -1;
  if (probe) {
    const auto [gap, l2] = probe(fin.t, iterate);
    fin.gap_estimate = gap;
    fin.l2_to_target = l2;
  } else {
    fin.gap_estimate = kNan;
    fin.l2_to_target = kNan;
  }
  trace.records.push_back(fin);

  trace.final_combination = iterate;
  trace.queries_used = oracle.ledger().count();
  return trace;
}

GenericFWResult run_fw_generic(const GenericObjective& objective,
                               const std::vector<Eigen::VectorXd>& atoms,
                               const FWConfig& config) {
  if (atoms.empty()) throw std::invalid_argument("run_fw_generic: atom list must be nonempty");
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("run_fw_generic: alpha must lie in (0, 1]");
  }
  const Eigen::Index dim = atoms.front().size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);

  GenericFWResult result;
  for (int t = 0; t <= config.iterations; ++t) {
    const double gamma = config.gamma(t);
    const Eigen::VectorXd neg_grad = -objective.gradient(z);
    // scores in the gram geometry
    double max_score = -std::numeric_limits<double>::infinity();
    std::vector<double> scores(atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      scores[j] = atoms[j].dot(objective.gram * neg_grad);
      max_score = std::max(max_score, scores[j]);
    }
    const double slack = 0.5 * config.delta * gamma * config.curvature();
    // adversarial pick: worst atom whose alpha-scaled score still qualifies
    int pick = -1;
    double pick_score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (config.alpha * scores[j] >= config.alpha * max_score - slack && scores[j] < pick_score) {
        pick_score = scores[j];
        pick = static_cast<int>(j);
      }
    }
    const Eigen::VectorXd s = config.alpha * atoms[pick];

    FWIterationRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.gap_estimate = objective.value(z) - objective.optimum_value;
    rec.gap_bound = 2.0 * config.curvature() * (1.0 + config.delta) /
                    (config.alpha * config.alpha * (t + 2.0));
    rec.subproblem_correlation = config.alpha * pick_score;
    rec.atom_id = pick;
    rec.l2_to_target = kNan;
    result.records.push_back(rec);

    z = (1.0 - gamma) * z + gamma * s;
  }
  FWIterationRecord fin;
  fin.t = config.iterations + 1;
  fin.gamma = kNan;
  fin.gap_estimate = objective.value(z) - objective.optimum_value;
  fin.gap_bound = 2.0 * config.curvature() * (1.0 + config.delta) /
                  (config.alpha * config.alpha * (config.iterations + 3.0));
  fin.subproblem_correlation = kNan;
  fin.atom_id = -1;
  fin.l2_to_target = kNan;
  result.records.push_back(fin);
  result.final_coords = z;
  return result;
}

double surrogate_gap_to_l2(double gap, double lambda, bool* clamped) {
  if (clamped) *clamped = gap < 0.0;
  if (gap < 0.0) gap = 0.0;
  return std::sqrt(2.0 * lambda * gap);
}

void write_trace_csv(const std::string& path, const FWTrace& trace) {
  csv::Writer w(path, {"t", "gamma", "gap_estimate", "gap_bound", "subproblem_correlation",
                       "l2_to_target"});
  for (const auto& r : trace.records) {
    w.write_row({std::to_string(r.t), csv::format_double(r.gamma),
                 csv::format_double(r.gap_estimate), csv::format_double(r.gap_bound),
                 csv::format_double(r.subproblem_correlation),
                 csv::format_double(r.l2_to_target)});
  }
}

}  // namespace sqb
