#include "sqb/sq_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqb/csv.hpp"
#include "sqb/quadrature.hpp"

namespace sqb {

namespace {
constexpr int kPConceptCheckPoints = 100000;

double clip01(double v) { return std::max(-1.0, std::min(1.0, v)); }
}  // namespace

// ---------------------------------------------------------------------------
// LabeledDistribution

LabeledDistribution LabeledDistribution::deterministic(FunctionHandle cmf, double label_bound,
                                                       QuadRecipe recipe) {
  if (label_bound <= 0) throw std::invalid_argument("deterministic: label bound must be positive");
  LabeledDistribution d;
  d.model_ = LabelModel::deterministic;
  d.cmf_ = std::move(cmf);
  d.label_bound_ = label_bound;
  d.recipe_ = std::move(recipe);
  return d;
}

LabeledDistribution LabeledDistribution::pconcept(FunctionHandle cmf, QuadRecipe recipe) {
  // E[y|x] must be a valid conditional mean of a ±1 label
  RngStream rng(0x9c0ffee123456789ULL);
  Eigen::VectorXd x(cmf.arity());
  for (int i = 0; i < kPConceptCheckPoints; ++i) {
    for (int j = 0; j < x.size(); ++j) x[j] = rng.next_gaussian();
    const double v = cmf(x);
    if (std::abs(v) > 1.0 + 1e-9) {
      throw std::invalid_argument("pconcept: |conditional mean| exceeds 1 at a sampled point");
    }
  }
  LabeledDistribution d;
  d.model_ = LabelModel::pconcept;
  d.cmf_ = std::move(cmf);
  d.label_bound_ = 1.0;
  d.recipe_ = std::move(recipe);
  return d;
}

LabeledDistribution LabeledDistribution::shifted(LabeledDistribution base, FunctionHandle shift,
                                                 std::optional<double> shift_bound) {
  if (shift.arity() != base.dimension()) {
    throw std::invalid_argument("shifted: shift arity does not match distribution dimension");
  }
  const double sb = shift_bound ? *shift_bound : shift.bound_on_ball(kBoundRadius);
  LabeledDistribution d;
  d.model_ = LabelModel::shifted;
  d.cmf_ = FunctionHandle::sum({base.conditional_mean(), FunctionHandle::scaled(-1.0, shift)});
  d.label_bound_ = base.label_bound() + sb;
  d.recipe_ = base.recipe();
  d.base_ = std::make_shared<LabeledDistribution>(std::move(base));
  d.shift_ = std::move(shift);
  return d;
}

double LabeledDistribution::sample_label(const Eigen::VectorXd& x, RngStream& rng) const {
  switch (model_) {
    case LabelModel::deterministic:
      return cmf_(x);
    case LabelModel::pconcept: {
      const double p_plus = 0.5 * (1.0 + std::max(-1.0, std::min(1.0, cmf_(x))));
      return rng.next_uniform01() <= p_plus ? 1.0 : -1.0;
    }
    case LabelModel::shifted:
      return base_->sample_label(x, rng) - (*shift_)(x);
  }
  return 0.0;
}

double LabeledDistribution::label_average(const Eigen::VectorXd& x,
                                          const std::function<double(double)>& f) const {
  switch (model_) {
    case LabelModel::deterministic:
      return f(cmf_(x));
    case LabelModel::pconcept: {
      const double m = std::max(-1.0, std::min(1.0, cmf_(x)));
      return 0.5 * (1.0 + m) * f(1.0) + 0.5 * (1.0 - m) * f(-1.0);
    }
    case LabelModel::shifted: {
      const double s = (*shift_)(x);
      return base_->label_average(x, [&](double yb) { return f(yb - s); });
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// StatQuery

StatQuery::StatQuery(std::function<double(const Eigen::VectorXd&, double)> raw, double tolerance,
                     double range_bound, std::vector<double> quad_breakpoints)
    : raw_(std::move(raw)),
      tolerance_(tolerance),
      range_bound_(range_bound),
      quad_breakpoints_(std::move(quad_breakpoints)) {
  if (tolerance_ <= 0) throw std::invalid_argument("StatQuery: tolerance must be positive");
  if (range_bound_ <= 0) throw std::invalid_argument("StatQuery: range bound must be positive");
}

double StatQuery::evaluate(const Eigen::VectorXd& x, double y) const {
  return clip01(raw_(x, y) / range_bound_);
}

// ---------------------------------------------------------------------------
// QueryLedger

std::uint64_t QueryLedger::count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_.size();
}

double QueryLedger::min_tolerance_used() const {
  std::lock_guard<std::mutex> lock(mu_);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : log_) m = std::min(m, r.tolerance);
  return m;
}

std::vector<QueryRecord> QueryLedger::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void QueryLedger::export_csv(const std::string& path) const {
  const auto records = snapshot();
  csv::Writer w(path, {"ordinal", "tolerance", "adversary_mode", "answer", "est_stderr"});
  for (const auto& r : records) {
    const char* mode = r.mode == AdversaryMode::honest ? "honest"
                       : r.mode == AdversaryMode::seeded_uniform ? "seeded_uniform"
                                                                 : "grid_rounding";
    w.write_row({std::to_string(r.ordinal), csv::format_double(r.tolerance), mode,
                 csv::format_double(r.answer), csv::format_double(r.est_stderr)});
  }
}

std::uint64_t QueryLedger::reserve_ordinal() {
  std::lock_guard<std::mutex> lock(mu_);
  return next_ordinal_++;
}

void QueryLedger::append(QueryRecord rec) {
  std::lock_guard<std::mutex> lock(mu_);
  log_.push_back(rec);
}

double implied_sample_complexity(const QueryLedger& ledger) {
  double total = 0.0;
  for (const auto& r : ledger.snapshot()) total += 1.0 / (r.tolerance * r.tolerance);
  return total;
}

// ---------------------------------------------------------------------------
// answer_query

double integrate_recipe(const QuadRecipe& recipe,
                        const std::function<double(const Eigen::VectorXd&)>& g,
                        const std::vector<double>& extra_breakpoints) {
  switch (recipe.mode) {
    case QuadRecipe::Mode::one_d: {
      const Eigen::VectorXd u =
          recipe.basis.size() ? Eigen::VectorXd(recipe.basis.col(0)) : Eigen::VectorXd::Ones(1);
      std::vector<double> cuts = recipe.z1_breakpoints;
      cuts.insert(cuts.end(), extra_breakpoints.begin(), extra_breakpoints.end());
      return quad::gaussian_expect_1d([&](double z) { return g(z * u); }, cuts);
    }
    case QuadRecipe::Mode::split2d: {
      const Eigen::VectorXd u = recipe.basis.col(0);
      const Eigen::VectorXd v = recipe.basis.col(1);
      std::vector<double> cuts = recipe.z1_breakpoints;
      cuts.insert(cuts.end(), extra_breakpoints.begin(), extra_breakpoints.end());
      return quad::gaussian_expect_2d_split(
          [&](double z1, double z2) { return g(z1 * u + z2 * v); }, cuts, recipe.z2_nodes);
    }
    case QuadRecipe::Mode::polar2d: {
      const Eigen::VectorXd u = recipe.basis.col(0);
      const Eigen::VectorXd v = recipe.basis.col(1);
      return quad::gaussian_expect_2d_polar(
          [&](double z1, double z2) { return g(z1 * u + z2 * v); }, recipe.kink_angles);
    }
    case QuadRecipe::Mode::tensor2d: {
      const Eigen::VectorXd u = recipe.basis.col(0);
      const Eigen::VectorXd v = recipe.basis.col(1);
      return quad::gaussian_expect_2d_tensor(
          [&](double z1, double z2) { return g(z1 * u + z2 * v); }, recipe.tensor_nodes);
    }
    case QuadRecipe::Mode::none:
      break;
  }
  throw std::logic_error("integrate_recipe: no quadrature recipe");
}

double answer_query(const LabeledDistribution& dist, const StatQuery& query,
                    const OracleConfig& config, QueryLedger& ledger) {
  const double tau = query.tolerance();
  const std::uint64_t ordinal = ledger.reserve_ordinal();

  double estimate = 0.0;
  double est_stderr = 0.0;

  const bool use_quadrature = config.estimation == EstimationMethod::quadrature_when_possible &&
                              dist.recipe().mode != QuadRecipe::Mode::none;
  if (use_quadrature) {
    estimate = integrate_recipe(
        dist.recipe(),
        [&](const Eigen::VectorXd& x) {
          return dist.label_average(x, [&](double y) { return query.evaluate(x, y); });
        },
        query.quad_breakpoints());
  } else {
    const int streams = std::max(1, config.mc_streams);
    const std::int64_t per = std::max<std::int64_t>(1, config.mc_samples / streams);
    const std::int64_t total = per * streams;
    long double sum = 0.0L, sumsq = 0.0L;
    Eigen::VectorXd x(dist.dimension());
    for (int st = 0; st < streams; ++st) {
      RngStream rng(substream_seed(config.seed ^ (0x51ab5ULL + ordinal), st));
      long double s1 = 0.0L, s2 = 0.0L;
      for (std::int64_t i = 0; i < per; ++i) {
        for (int j = 0; j < x.size(); ++j) x[j] = rng.next_gaussian();
        const double y = dist.sample_label(x, rng);
        const double v = query.evaluate(x, y);
        s1 += v;
        s2 += static_cast<long double>(v) * v;
      }
      sum += s1;
      sumsq += s2;
    }
    estimate = static_cast<double>(sum / total);
    const double var = std::max(0.0, static_cast<double>(sumsq / total) - estimate * estimate);
    est_stderr = std::sqrt(var / static_cast<double>(total));
    if (est_stderr > tau / 10.0) {
      throw ResolutionError(
          "answer_query: Monte Carlo standard error " + std::to_string(est_stderr) +
          " exceeds tolerance/10 = " + std::to_string(tau / 10.0) +
          "; raise the sample budget so estimation noise stays below adversarial slack");
    }
  }

  double answer = estimate;
  switch (config.adversary) {
    case AdversaryMode::honest:
      break;
    case AdversaryMode::seeded_uniform: {
      RngStream rng(substream_seed(config.seed ^ 0xadbead5eedULL, ordinal));
      answer += rng.next_uniform(-tau, tau);
      break;
    }
    case AdversaryMode::grid_rounding:
      answer = std::round(estimate / tau) * tau;
      break;
  }

  ledger.append(QueryRecord{ordinal, tau, config.adversary, answer, est_stderr});
  return answer;
}

StatQuery rewrite_query_for_residual(const StatQuery& query, const FunctionHandle& current_f,
                                     const ActivationSpec& psi) {
  auto raw = query.raw();
  auto f = current_f;
  auto p = psi;
  return StatQuery(
      [raw, f, p](const Eigen::VectorXd& x, double y) { return raw(x, y - p(f(x))); },
      query.tolerance(), query.range_bound(), query.quad_breakpoints());
}

LabeledDistribution simulate_boolean_from_real(const LabeledDistribution& dist) {
  const double c = dist.label_bound();
  if (!(c > 0) || !std::isfinite(c)) {
    throw std::invalid_argument("simulate_boolean_from_real: label bound must be finite and positive");
  }
  return LabeledDistribution::pconcept(
      FunctionHandle::scaled(1.0 / c, dist.conditional_mean()), dist.recipe());
}

// ---------------------------------------------------------------------------
// StatOracle

StatOracle::StatOracle(LabeledDistribution dist, OracleConfig config)
    : dist_(std::move(dist)), config_(config) {}

double StatOracle::answer(const StatQuery& query) {
  return answer_query(dist_, query, config_, ledger_);
}

double answer_boolean_query_two_term(
    StatOracle& real_oracle, const std::function<double(const Eigen::VectorXd&, int)>& phi,
    double tolerance) {
  const double c = real_oracle.label_bound();
  // (1/2) E[phi(x,1) + phi(x,-1)]: bounded by 1 already
  StatQuery q1([phi](const Eigen::VectorXd& x, double) { return 0.5 * (phi(x, 1) + phi(x, -1)); },
               tolerance / 2.0);
  // (1/(2C)) E[(phi(x,1) - phi(x,-1)) y]: raw bounded by 2C; the normalized
  // answer already carries the 1/(2C) prefactor
  StatQuery q2([phi](const Eigen::VectorXd& x, double y) { return (phi(x, 1) - phi(x, -1)) * y; },
               tolerance / 2.0, 2.0 * c);
  const double a1 = real_oracle.answer(q1);
  const double a2 = real_oracle.answer(q2);
  return a1 + a2;
}

}  // namespace sqb
