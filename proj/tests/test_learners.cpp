#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sqb/experiments.hpp"
#include "sqb/learners.hpp"
#include "test_util.hpp"

using namespace sqb;
using sqb::testing::relu_kernel;
using sqb::testing::unit2;

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;

// test-side grid search for the square-loss optimum over the norm-closed
// relu-ridge class {s * mu * sqrt(2) relu(<u, x>)}; everything in closed form
// through the arc-cosine kernel
struct GridSquareLoss {
  double best_angle = 0.0;
  double best_mu = 0.0;  // signed magnitude in [-1, 1]
  FunctionHandle hypothesis = FunctionHandle::zero(2);
  double norm = 0.0;
};

// f_cmf = c1 e(a1) + c2 e(a2) with e(a) = sqrt(2) relu(<u(a), x>)
GridSquareLoss grid_square_loss(double c1, double a1, double c2, double a2, int grid = 1024) {
  GridSquareLoss out;
  double best_val = 1e300;
  for (int j = 0; j < grid; ++j) {
    const double ang = 2.0 * kPi * j / grid;
    // <e(ang), f_cmf> via the relu kernel, with ||e|| = 1
    const double corr = 2.0 * (c1 * relu_kernel(std::abs(std::remainder(ang - a1, 2.0 * kPi))) +
                               c2 * relu_kernel(std::abs(std::remainder(ang - a2, 2.0 * kPi))));
    const double mu = std::clamp(corr, -1.0, 1.0);
    const double val = mu * mu - 2.0 * mu * corr;  // ||h||^2 - 2 <h, f_cmf>
    if (val < best_val) {
      best_val = val;
      out.best_angle = ang;
      out.best_mu = mu;
    }
  }
  out.norm = std::abs(out.best_mu);
  out.hypothesis = FunctionHandle::scaled(
      out.best_mu * std::sqrt(2.0),
      FunctionHandle::ridge(ActivationSpec::relu(), unit2(out.best_angle)));
  return out;
}

double corr_with(const FunctionHandle& h, double c1, double a1, double c2, double a2,
                 double angle_of_h, double signed_scale) {
  // <h, f_cmf> when h = signed_scale * e(angle_of_h)
  return signed_scale *
         2.0 * (c1 * relu_kernel(std::abs(std::remainder(angle_of_h - a1, 2.0 * kPi))) +
                c2 * relu_kernel(std::abs(std::remainder(angle_of_h - a2, 2.0 * kPi))));
}

}  // namespace

TEST_CASE("low-degree learner returns zero on uncorrelated labels") {
  QuadRecipe rec;
  rec.mode = QuadRecipe::Mode::tensor2d;
  rec.basis = Eigen::MatrixXd::Identity(2, 2);
  rec.tensor_nodes = 64;
  auto dist = LabeledDistribution::pconcept(FunctionHandle::zero(2), rec);
  BaseLearnerSpec spec;
  spec.hypothesis = BaseLearnerSpec::Hypothesis::relu_units;
  spec.diameter = 2.0;
  const auto out = low_degree_learn(dist, spec, 0.1, OracleConfig{});
  CHECK(out.gate_triggered);
  CHECK(out.achieved_correlation == 0.0);
  CHECK(norm(out.hypothesis).estimate == 0.0);
}

TEST_CASE("low-degree learner on a realizable clipped ridge") {
  auto fx = experiments::make_lowdeg_fixture(12345);
  BaseLearnerSpec spec;
  spec.hypothesis = BaseLearnerSpec::Hypothesis::relu_units;
  spec.diameter = 2.0;
  OracleConfig ocfg;
  ocfg.seed = 5;
  const double eps = 0.1;
  const auto out = low_degree_learn(fx.dist, spec, eps, ocfg);
  CHECK_FALSE(out.gate_triggered);
  CHECK(out.degree_used == 18);  // (eps/2C)-approximate degree of relu at C = 2
  // exactly one query per multi-index
  CHECK(out.query_log.size() == MultiIndexSet::expected_count(2, out.degree_used));
  // norm ceiling: output scaled to exactly R
  CHECK(norm(out.hypothesis).estimate == doctest::Approx(1.0).epsilon(1e-12));

  const auto bench = idealized_grid_learn(fx.dist, experiments::relu_ridge_grid(64), 2.0,
                                          {1000000, 99, 64});
  CHECK(out.achieved_correlation >=
        bench.achieved_correlation - eps -
            5.0 * (out.correlation_stderr + bench.correlation_stderr));

  // rescaling stability: || f~_cmf^{<= d} - p || <= 4 R n^{d/2} tau / eps,
  // with the exact low-degree component computed by direct quadrature
  const MultiIndexSet idx(2, out.degree_used);
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto h_i = FunctionHandle::hermite_indexed(2, idx[k]);
    alpha[static_cast<Eigen::Index>(k)] =
        integrate_recipe(fx.dist.recipe(), [&](const Eigen::VectorXd& x) {
          return fx.dist.conditional_mean()(x) * h_i(x);
        });
  }
  const double R = 1.0;
  Eigen::VectorXd ideal = alpha * (R / alpha.norm());
  // read the learner's coefficients back off its hypothesis via orthonormality
  Eigen::VectorXd got(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto h_i = FunctionHandle::hermite_indexed(2, idx[k]);
    got[static_cast<Eigen::Index>(k)] =
        inner_product(out.hypothesis, h_i, Method::quadrature).estimate;
  }
  const double bound = 4.0 * R * std::pow(2.0, out.degree_used / 2.0) * out.tau_used / eps;
  CHECK((ideal - got).norm() <= bound + 1e-9);
}

TEST_CASE("low-degree learner gates on a high-degree target") {
  // labels carry only degree-3 content; a degree-1 class sees nothing
  QuadRecipe rec;
  rec.mode = QuadRecipe::Mode::tensor2d;
  rec.basis = Eigen::MatrixXd::Identity(2, 2);
  rec.tensor_nodes = 64;
  auto h3 = FunctionHandle::hermite_indexed(2, {3, 0});
  auto dist = LabeledDistribution::deterministic(h3, h3.bound_on_ball(kBoundRadius), rec);

  BaseLearnerSpec spec;
  spec.hypothesis = BaseLearnerSpec::Hypothesis::monomials;
  spec.monomial_degree = 1;
  spec.diameter = 2.0;
  const auto out = low_degree_learn(dist, spec, 0.1, OracleConfig{});
  CHECK(out.degree_used == 1);
  CHECK(out.gate_triggered);
  CHECK(out.achieved_correlation == 0.0);
}

TEST_CASE("low-degree learner tracks the idealized benchmark on seeded fixtures") {
  const double eps = 0.1;
  for (int f = 0; f < 5; ++f) {
    auto fx = experiments::make_lowdeg_fixture(4600 + 7 * f);
    BaseLearnerSpec spec;
    spec.hypothesis = BaseLearnerSpec::Hypothesis::relu_units;
    spec.diameter = 2.0;
    OracleConfig ocfg;
    ocfg.seed = 40 + f;
    const auto low = low_degree_learn(fx.dist, spec, eps, ocfg);
    const auto bench = idealized_grid_learn(fx.dist, experiments::relu_ridge_grid(64), 2.0,
                                            {300000, static_cast<std::uint64_t>(60 + f), 64});
    CHECK(low.achieved_correlation >=
          bench.achieved_correlation - eps -
              5.0 * (low.correlation_stderr + bench.correlation_stderr));
  }
}

TEST_CASE("low-degree learner respects the tolerance floor") {
  auto fx = experiments::make_lowdeg_fixture(777);
  BaseLearnerSpec spec;
  spec.hypothesis = BaseLearnerSpec::Hypothesis::relu_units;
  spec.diameter = 2.0;
  spec.tau_floor = 1e-3;
  CHECK_THROWS_AS(low_degree_learn(fx.dist, spec, 0.1, OracleConfig{}),
                  InfeasibleToleranceError);
  try {
    low_degree_learn(fx.dist, spec, 0.1, OracleConfig{});
  } catch (const InfeasibleToleranceError& e) {
    CHECK(e.required_tau > 0.0);
    CHECK(e.required_tau < 1e-3);
  }
}

TEST_CASE("idealized grid learner") {
  QuadRecipe rec;
  rec.mode = QuadRecipe::Mode::tensor2d;
  rec.basis = Eigen::MatrixXd::Identity(2, 2);
  rec.tensor_nodes = 128;
  auto e0 = FunctionHandle::scaled(std::sqrt(2.0),
                                   FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.8)));
  auto dist = LabeledDistribution::deterministic(e0, 32.0, rec);

  // candidates {h, -h} with f_cmf = h: picks h
  const auto two = idealized_grid_learn(dist, {e0, FunctionHandle::scaled(-1.0, e0)}, 2.0);
  CHECK(two.achieved_correlation == doctest::Approx(1.0).epsilon(1e-9));

  // grid of 32 directions: recovers the nearest direction within the cosine gap
  const auto grid = idealized_grid_learn(dist, experiments::relu_ridge_grid(32), 2.0);
  const double gap = 1.0 - 2.0 * relu_kernel(2.0 * kPi / 64.0);
  CHECK(grid.achieved_correlation >= 1.0 - gap - 1e-9);

  // candidates orthogonal to the labels: correlation near zero
  auto dist_orth = LabeledDistribution::deterministic(
      FunctionHandle::hermite_indexed(2, {0, 2}), 400.0, rec);
  const auto orth = idealized_grid_learn(
      dist_orth, {FunctionHandle::hermite_indexed(2, {1, 0})}, 2.0);
  CHECK(std::abs(orth.achieved_correlation) < 1e-9);

  CHECK_THROWS_AS(idealized_grid_learn(dist, {}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(idealized_grid_learn(dist, {FunctionHandle::scaled(3.0, e0)}, 2.0),
                  std::invalid_argument);
}

TEST_CASE("square-loss projection: Eq-style identity on the cone section") {
  RngStream gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double a1 = gen.next_uniform(0, 2.0 * kPi);
    const double a2 = gen.next_uniform(0, 2.0 * kPi);
    const double c1 = gen.next_uniform(-0.7, 0.7);
    const double c2 = gen.next_uniform(-0.7, 0.7);
    const auto sq = grid_square_loss(c1, a1, c2, a2);
    if (sq.norm < 1e-6) continue;
    // ||h_sq|| = min(<h_sq/||h_sq||, f_cmf>, 1) within grid resolution
    const double dir_corr =
        corr_with(sq.hypothesis, c1, a1, c2, a2, sq.best_angle,
                  sq.best_mu >= 0 ? 1.0 : -1.0);
    CHECK(sq.norm == doctest::Approx(std::min(dir_corr, 1.0)).epsilon(2e-3));
  }
}

TEST_CASE("correlation_from_square_loss") {
  CHECK(norm(correlation_from_square_loss(FunctionHandle::zero(2), 0.4, 2.0)).estimate == 0.0);

  // exact square-loss optimum for a ridge target of norm 1/2
  const double target_angle = 1.3;
  const auto sq = grid_square_loss(0.5, target_angle, 0.0, 0.0);
  CHECK(sq.norm == doctest::Approx(0.5).epsilon(1e-3));
  auto scaled_up = correlation_from_square_loss(sq.hypothesis, 0.4, 2.0);
  CHECK(norm(scaled_up).estimate == doctest::Approx(1.0).epsilon(1e-9));
  // its correlation with f_cmf equals ||h_sq|| (projection identity)
  const double corr = corr_with(scaled_up, 0.5, target_angle, 0.0, 0.0, sq.best_angle,
                                sq.best_mu >= 0 ? 1.0 : -1.0);
  CHECK(corr == doctest::Approx(sq.norm).epsilon(2e-3));

  // below eta = eps^2/4 the adapter returns the zero function
  auto tiny = FunctionHandle::scaled(
      0.001, FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.0)));
  CHECK(norm(correlation_from_square_loss(tiny, 0.4, 2.0)).estimate == 0.0);

  // epsilon-chain: the rescaled output is eps-competitive with the best
  // idealized correlation
  const double eps = 0.4;
  double best = 0.0;
  for (int j = 0; j < 2048; ++j) {
    const double ang = 2.0 * kPi * j / 2048;
    best = std::max(best, corr_with(FunctionHandle::zero(2), 0.5, target_angle, 0.0, 0.0, ang, 1.0));
  }
  CHECK(corr >= best - eps);

  CHECK_THROWS_AS(correlation_from_square_loss(tiny, 9.0, 2.0), std::invalid_argument);
}

TEST_CASE("Boolean adapter on a damped halfspace") {
  // E[y|x] = 0.8 sign(<w, x>), Boolean labels, C = 1
  const double w_angle = 2.1;
  auto cmf = FunctionHandle::scaled(0.8, FunctionHandle::ridge(ActivationSpec::sign(), unit2(w_angle)));
  auto dist = LabeledDistribution::pconcept(cmf);  // Monte Carlo estimation path

  const double eps = 0.08;
  auto cands = experiments::sign_ridge_grid(64);
  auto learner = make_sign_grid_boolean_learner(cands, eps);
  OracleConfig ocfg;
  ocfg.seed = 4;
  ocfg.estimation = EstimationMethod::monte_carlo;
  ocfg.mc_samples = 2'000'000;
  const auto out = boolean_zero_one_adapter(learner, dist, eps, ocfg);

  // two queries per candidate through the two-term identity
  CHECK(out.query_log.size() == 2 * cands.size());

  const auto bench = idealized_grid_learn(dist, cands, 2.0, {1000000, 11, 64});
  CHECK(out.achieved_correlation >=
        bench.achieved_correlation - eps -
            5.0 * (out.correlation_stderr + bench.correlation_stderr));
  // identity adaptation: C = 1 leaves the conditional mean untouched
  auto p = simulate_boolean_from_real(dist);
  RngStream rng(3);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = sqb::testing::gaussian_point(rng, 2);
    CHECK(p.conditional_mean()(x) == doctest::Approx(cmf(x)).epsilon(1e-14));
  }
}

TEST_CASE("learner run CSV") {
  const std::string path = "learner_runs_test.csv";
  write_learner_runs_csv(path, {{"fx", "low_degree", 0.1, 1e-5, 100, 0.9, 0.95}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("fixture_id,mode,epsilon,tau_used,queries") == 0);
  std::getline(in, line);
  CHECK(line.find("fx,low_degree") == 0);
  std::remove(path.c_str());
}
