#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sqb/funcspace.hpp"
#include "test_util.hpp"

using namespace sqb;
using sqb::testing::unit2;

TEST_CASE("multi-index enumeration") {
  const MultiIndexSet a(1, 3);
  REQUIRE(a.size() == 4);
  for (int g = 0; g <= 3; ++g) CHECK(a[g] == std::vector<int>{g});

  const MultiIndexSet b(2, 2);
  REQUIRE(b.size() == 6);
  CHECK(b[0] == std::vector<int>{0, 0});
  CHECK(b[1] == std::vector<int>{0, 1});
  CHECK(b[2] == std::vector<int>{1, 0});
  CHECK(b[3] == std::vector<int>{0, 2});
  CHECK(b[4] == std::vector<int>{1, 1});
  CHECK(b[5] == std::vector<int>{2, 0});

  const MultiIndexSet c(3, 0);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == std::vector<int>{0, 0, 0});

  for (int n = 1; n <= 4; ++n) {
    for (int d = 0; d <= 5; ++d) {
      CHECK(MultiIndexSet(n, d).size() == MultiIndexSet::expected_count(n, d));
    }
  }
  CHECK(MultiIndexSet::expected_count(2, 2) == 6);
}

TEST_CASE("handle evaluation by structure") {
  Eigen::VectorXd w(3);
  w << 0.5, -1.0, 2.0;
  auto ridge = FunctionHandle::ridge(ActivationSpec::relu(), w);
  auto doubled = FunctionHandle::scaled(2.0, ridge);
  auto both = FunctionHandle::sum({ridge, doubled});
  auto squashed = FunctionHandle::composed(ActivationSpec::tanh(), both);

  RngStream rng(5);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd x = sqb::testing::gaussian_point(rng, 3);
    const double r = std::max(0.0, w.dot(x));
    CHECK(ridge(x) == r);
    CHECK(doubled(x) == 2.0 * r);
    CHECK(both(x) == 3.0 * r);
    CHECK(squashed(x) == doctest::Approx(std::tanh(3.0 * r)).epsilon(1e-15));
  }

  CHECK(FunctionHandle::zero(4)(Eigen::VectorXd::Zero(4)) == 0.0);
  Eigen::VectorXd bad(2);
  bad << 0, 0;
  CHECK_THROWS_AS(ridge(bad), std::invalid_argument);
}

TEST_CASE("norms of ridge handles") {
  // zero function
  CHECK(norm(FunctionHandle::zero(3)).estimate == 0.0);

  // sign ridge with unit weight has norm 1
  auto sgn = FunctionHandle::ridge(ActivationSpec::sign(), unit2(0.7));
  CHECK(norm(sgn).estimate == doctest::Approx(1.0));

  // relu ridge with half-unit weight: ||relu(<w,.>)|| = ||w||/sqrt(2)
  auto half = FunctionHandle::ridge(ActivationSpec::relu(), 0.5 * unit2(1.1));
  CHECK(norm(half).estimate == doctest::Approx(0.3535533905932738).epsilon(1e-12));
  // quadrature route agrees with the closed-form hint
  CHECK(norm(half, Method::quadrature).estimate ==
        doctest::Approx(0.3535533905932738).epsilon(1e-9));
}

TEST_CASE("inner products: quadrature and Monte Carlo") {
  // relu ridge against itself in R^5: E[relu^2] = 1/2
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1[0] = 1.0;
  auto f = FunctionHandle::ridge(ActivationSpec::relu(), e1);
  const auto quad = inner_product(f, f, Method::quadrature);
  CHECK(quad.std_error == 0.0);
  CHECK(quad.estimate == doctest::Approx(0.5).epsilon(1e-10));
  const auto mc = inner_product(f, f, Method::monte_carlo, {1000000, 77, 64});
  CHECK(std::abs(mc.estimate - 0.5) <= 4.0 * mc.std_error);

  // multivariate Hermite orthogonality in n = 2 (smooth, tensor quadrature)
  auto hi = FunctionHandle::hermite_indexed(2, {2, 1});
  auto hj = FunctionHandle::hermite_indexed(2, {1, 2});
  CHECK(std::abs(inner_product(hi, hj, Method::quadrature).estimate) < 1e-10);
  CHECK(inner_product(hi, hi, Method::quadrature).estimate == doctest::Approx(1.0).epsilon(1e-10));

  // tanh of disjoint monomials: zero correlation within Monte Carlo noise
  auto t12 = FunctionHandle::composed(ActivationSpec::tanh(),
                                      FunctionHandle::hermite_indexed(3, {1, 1, 0}));
  auto t13 = FunctionHandle::composed(ActivationSpec::tanh(),
                                      FunctionHandle::hermite_indexed(3, {1, 0, 1}));
  const auto r = inner_product(t12, t13, Method::monte_carlo, {1000000, 3, 64});
  CHECK(std::abs(r.estimate) <= 4.0 * r.std_error);

  // cross-direction relu pair via the 2D polar path against the closed form
  auto fa = FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.3));
  auto fb = FunctionHandle::ridge(ActivationSpec::relu(), unit2(1.4));
  const auto pq = inner_product(fa, fb, Method::quadrature);
  CHECK(pq.estimate == doctest::Approx(sqb::testing::relu_kernel(1.1)).epsilon(1e-9));
}

TEST_CASE("inner product error paths") {
  auto f2 = FunctionHandle::zero(2);
  auto f3 = FunctionHandle::zero(3);
  CHECK_THROWS_AS(inner_product(f2, f3), std::invalid_argument);

  auto opaque = FunctionHandle::opaque(2, [](const Eigen::VectorXd& x) { return x[0]; });
  CHECK_THROWS_AS(inner_product(opaque, opaque, Method::quadrature), std::invalid_argument);
  // automatic falls back to Monte Carlo for opaque structure
  const auto r = inner_product(opaque, opaque, Method::automatic, {200000, 9, 64});
  CHECK(std::abs(r.estimate - 1.0) <= 5.0 * r.std_error);
}

TEST_CASE("Monte Carlo consistency over seeded trials") {
  auto f = FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.9));
  const double closed = 1.0 / std::sqrt(2.0);
  int hits = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = norm(f, Method::monte_carlo, {1000000, 1000 + static_cast<std::uint64_t>(trial), 64});
    if (std::abs(r.estimate - closed) <= 4.0 * r.std_error) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("Monte Carlo estimates are bit-identical for a fixed seed") {
  auto f = FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.3));
  auto g = FunctionHandle::ridge(ActivationSpec::relu(), unit2(1.9));
  const auto a = inner_product(f, g, Method::monte_carlo, {300000, 424242, 64});
  const auto b = inner_product(f, g, Method::monte_carlo, {300000, 424242, 64});
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  const auto c = inner_product(f, g, Method::monte_carlo, {300000, 424243, 64});
  CHECK(a.estimate != c.estimate);
}

TEST_CASE("rotation invariance of ridge norms") {
  const double base = norm(FunctionHandle::ridge(ActivationSpec::relu(), 0.8 * unit2(0.0)),
                           Method::quadrature)
                          .estimate;
  for (double angle : {0.3, 1.0, 2.2, 3.9, 5.5}) {
    const double v = norm(FunctionHandle::ridge(ActivationSpec::relu(), 0.8 * unit2(angle)),
                          Method::quadrature)
                         .estimate;
    CHECK(v == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("convex combinations and fw_step") {
  auto a = FunctionHandle::ridge(ActivationSpec::relu(), unit2(0.0));
  auto b = FunctionHandle::ridge(ActivationSpec::relu(), unit2(1.0));

  ConvexCombination c(a);
  CHECK(c.support_size() == 1);
  CHECK(c.weight_sum() == 1.0);

  // gamma = 0: unchanged; gamma = 1: collapses to the new atom
  CHECK(fw_step(c, b, 0.0).support_size() == 1);
  auto collapsed = fw_step(c, b, 1.0);
  CHECK(collapsed.support_size() == 1);
  RngStream rng(2);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = sqb::testing::gaussian_point(rng, 2);
    CHECK(collapsed(x) == b(x));
  }

  auto stepped = fw_step(c, b, 2.0 / 3.0);
  REQUIRE(stepped.support_size() == 2);
  CHECK(stepped.atoms()[0].first == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(stepped.atoms()[1].first == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(stepped.weight_sum() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(fw_step(c, b, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(fw_step(c, b, -0.1), std::invalid_argument);

  // evaluation equals the weighted atom sum with the same arithmetic order
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = sqb::testing::gaussian_point(rng, 2);
    double manual = 0.0;
    for (const auto& [w, h] : stepped.atoms()) manual += w * h(x);
    CHECK(stepped(x) == manual);
  }

  // support after T steps stays at most T+1
  ConvexCombination it(FunctionHandle::zero(2));
  for (int t = 0; t < 7; ++t) it = fw_step(it, a, 2.0 / (t + 2.0));
  CHECK(it.support_size() <= 8);

  CHECK_THROWS_AS(ConvexCombination({{0.6, a}, {0.6, b}}), std::invalid_argument);
}

TEST_CASE("polynomial handles expose exact norms") {
  MultiIndexSet set(2, 2);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  coeffs[1] = 3.0;
  coeffs[4] = 4.0;
  auto p = FunctionHandle::polynomial(set, coeffs);
  CHECK(p.norm_hint().value() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm(p, Method::quadrature).estimate == doctest::Approx(5.0).epsilon(1e-10));

  // bound_on_ball grows with the radius and dominates samples
  RngStream rng(8);
  const double bound = p.bound_on_ball(3.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x = sqb::testing::gaussian_point(rng, 2);
    if (x.norm() <= 3.0) CHECK(std::abs(p(x)) <= bound);
  }
}

TEST_CASE("coefficient CSV round trip") {
  MultiIndexSet set(2, 1);
  Eigen::VectorXd coeffs(3);
  coeffs << 1.0 / 3.0, -2.5e-17, 3.141592653589793;
  const std::string path = "coeffs_test.csv";
  write_coefficients_csv(path, set, coeffs);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("i1,i2,coefficient") == 0);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const double parsed = std::stod(line.substr(c2 + 1));
    CHECK(parsed == coeffs[row]);  // 17 digits round-trip bit-exactly
    ++row;
  }
  CHECK(row == 3);
  std::remove(path.c_str());
}
