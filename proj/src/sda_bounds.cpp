#include "sqb/sda_bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sqb/csv.hpp"
#include "sqb/rng.hpp"

namespace sqb {

FiniteClass make_finite_class(std::vector<FunctionHandle> members, Method method,
                              const MonteCarloOptions& mc) {
  if (members.empty()) throw std::invalid_argument("make_finite_class: empty class");
  const int n = static_cast<int>(members.size());
  FiniteClass cls;
  cls.gram = Eigen::MatrixXd::Zero(n, n);
  cls.gram_stderr = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      MonteCarloOptions entry_mc = mc;
      entry_mc.seed = substream_seed(mc.seed, static_cast<std::uint64_t>(i) * 1315423911u + j);
      const auto r = inner_product(members[i], members[j], method, entry_mc);
      cls.gram(i, j) = cls.gram(j, i) = r.estimate;
      cls.gram_stderr(i, j) = cls.gram_stderr(j, i) = r.std_error;
    }
  }
  cls.members = std::move(members);
  return cls;
}

double average_correlation(const FiniteClass& cls, std::span<const int> subset) {
  if (subset.empty()) throw std::invalid_argument("average_correlation: empty subset");
  const double s = static_cast<double>(subset.size());
  double total = 0.0;
  for (int i : subset) {
    for (int j : subset) total += std::abs(cls.gram(i, j));
  }
  return total / (s * s);
}

namespace {

// worst (maximal) sum of |gram| over subsets of each size, by a full scan
// with an incremental subset-sum table
std::vector<double> worst_abs_sum_by_size(const Eigen::MatrixXd& gram) {
  const int n = static_cast<int>(gram.rows());
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> sum(full, 0.0);
  std::vector<double> worst(n + 1, 0.0);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const int i = std::countr_zero(mask);
    const std::size_t rest = mask & (mask - 1);
    double cross = 0.0;
    std::size_t r = rest;
    while (r) {
      const int j = std::countr_zero(r);
      cross += std::abs(gram(i, j));
      r &= r - 1;
    }
    sum[mask] = sum[rest] + 2.0 * cross + std::abs(gram(i, i));
    const int size = std::popcount(mask);
    worst[size] = std::max(worst[size], sum[mask]);
  }
  return worst;
}

// smallest subset size from which every size passes rho <= gamma; n+1 when
// even the full class fails
int passing_threshold(const std::vector<double>& worst_rho, double gamma) {
  const int n = static_cast<int>(worst_rho.size()) - 1;
  int s_star = n + 1;
  for (int s = n; s >= 1; --s) {
    if (worst_rho[s] <= gamma + 1e-12) {
      s_star = s;
    } else {
      break;
    }
  }
  return s_star;
}

}  // namespace

int sda_exact(const FiniteClass& cls, double gamma) {
  const int n = static_cast<int>(cls.gram.rows());
  if (n > 20) {
    throw std::invalid_argument(
        "sda_exact: class size exceeds 20 (2^20 subsets); use sda_greedy_lower");
  }
  const auto worst_sum = worst_abs_sum_by_size(cls.gram);
  std::vector<double> worst_rho(n + 1, 0.0);
  for (int s = 1; s <= n; ++s) worst_rho[s] = worst_sum[s] / (static_cast<double>(s) * s);
  const int s_star = passing_threshold(worst_rho, gamma);
  if (s_star > n) return 0;
  return n / s_star;
}

int sda_greedy_lower(const FiniteClass& cls, double gamma) {
  const int n = static_cast<int>(cls.gram.rows());
  std::vector<double> diags(n);
  std::vector<double> offs;
  offs.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    diags[i] = std::abs(cls.gram(i, i));
    for (int j = 0; j < n; ++j) {
      if (j != i) offs.push_back(std::abs(cls.gram(i, j)));
    }
  }
  std::sort(diags.rbegin(), diags.rend());
  std::sort(offs.rbegin(), offs.rend());
  std::vector<double> diag_prefix(n + 1, 0.0), off_prefix(offs.size() + 1, 0.0);
  for (int i = 0; i < n; ++i) diag_prefix[i + 1] = diag_prefix[i] + diags[i];
  for (std::size_t i = 0; i < offs.size(); ++i) off_prefix[i + 1] = off_prefix[i] + offs[i];

  // envelope: any size-s subset has sum <= (s largest diagonals) + (s(s-1)
  // largest off-diagonal magnitudes)
  std::vector<double> envelope_rho(n + 1, 0.0);
  for (int s = 1; s <= n; ++s) {
    const std::size_t k = std::min<std::size_t>(offs.size(), static_cast<std::size_t>(s) * (s - 1));
    envelope_rho[s] = (diag_prefix[s] + off_prefix[k]) / (static_cast<double>(s) * s);
  }
  const int s_star = passing_threshold(envelope_rho, gamma);
  if (s_star > n) return 0;
  return n / s_star;
}

FiniteClass monomial_class(int n, int d, bool with_tanh, int cap, const MonteCarloOptions& mc) {
  if (n < 1 || d < 1 || d > n) throw std::invalid_argument("monomial_class: need 1 <= d <= n");
  // count C(n, d)
  long double cnt = 1.0L;
  for (int i = 1; i <= d; ++i) cnt = cnt * (n - d + i) / i;
  if (cnt > cap) {
    throw std::invalid_argument("monomial_class: C(n,d) exceeds the configured cap");
  }

  // enumerate size-d subsets of [n] in lexicographic order
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur(d);
  for (int i = 0; i < d; ++i) cur[i] = i;
  while (true) {
    subsets.push_back(cur);
    int i = d - 1;
    while (i >= 0 && cur[i] == n - d + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < d; ++j) cur[j] = cur[j - 1] + 1;
  }

  std::vector<FunctionHandle> members;
  members.reserve(subsets.size());
  for (const auto& s : subsets) {
    std::vector<int> index(n, 0);
    for (int c : s) index[c] = 1;
    FunctionHandle mono = FunctionHandle::hermite_indexed(n, index);
    members.push_back(with_tanh ? FunctionHandle::composed(ActivationSpec::tanh(), mono) : mono);
  }

  FiniteClass cls;
  const int count = static_cast<int>(members.size());
  cls.gram = Eigen::MatrixXd::Zero(count, count);
  cls.gram_stderr = Eigen::MatrixXd::Zero(count, count);
  if (!with_tanh) {
    // exact: coordinatewise powers are 0, 1 or 2, with E[x^0]=E[x^2]=1 and
    // E[x^1]=0, so <x_S, x_T> = [S == T]
    cls.gram = Eigen::MatrixXd::Identity(count, count);
  } else {
    for (int i = 0; i < count; ++i) {
      for (int j = i; j < count; ++j) {
        MonteCarloOptions entry_mc = mc;
        entry_mc.seed = substream_seed(mc.seed, static_cast<std::uint64_t>(i) * 2654435761u + j);
        const auto r = inner_product(members[i], members[j], Method::monte_carlo, entry_mc);
        cls.gram(i, j) = cls.gram(j, i) = r.estimate;
        cls.gram_stderr(i, j) = cls.gram_stderr(j, i) = r.std_error;
      }
    }
  }
  cls.members = std::move(members);
  return cls;
}

double monomial_norm_lower_bound(int d) {
  if (d < 1) throw std::invalid_argument("monomial_norm_lower_bound: d must be >= 1");
  // Pr[x_S^2 >= theta] >= (1-theta)^2 E[x_S^2]^2/E[x_S^4] with theta = 1/2 and
  // E[x_S^4] = 3^d, then ||tanh(x_S)||^2 >= tanh(1/2)^2 Pr[|x_S| >= 1/2]
  const double t = std::tanh(0.5);
  return t * t * 0.25 * std::pow(3.0, -d);
}

RegimeReport regime_check(const RegimeParams& p) {
  RegimeReport report;
  report.items.push_back(
      {"tau <= eps^2", p.tau <= p.epsilon * p.epsilon + 1e-15,
       "the distinguishing-to-learning reduction needs tolerance at most eps^2"});
  report.items.push_back(
      {"eps <= beta/3", p.epsilon <= p.beta / 3.0 + 1e-15,
       "the zero function is eps-accurate once eps reaches the class norm floor"});
  report.items.push_back(
      {"tau < eps", p.tau < p.epsilon,
       "queries of tolerance tau cannot separate functions closer than tau"});
  report.valid = true;
  for (const auto& item : report.items) report.valid = report.valid && item.pass;
  return report;
}

LowerBoundResult lower_bound_calculator(BoundFamily family, double epsilon, int monomial_degree,
                                        const std::function<double(double)>& beta_of_k) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("lower_bound_calculator: epsilon must lie in (0, 1)");
  }
  LowerBoundResult r;
  switch (family) {
    case BoundFamily::relu:
      r.k = std::pow(epsilon, -1.0 / 12.0);
      r.tau_exponent = -r.k;
      r.query_bound = "q >= 2^(n^c) * eps (order-only constants, 0 < c < 1/2)";
      break;
    case BoundFamily::sigmoid: {
      const double l = std::log(1.0 / epsilon);
      r.k = l * l;
      r.tau_exponent = -r.k;
      r.query_bound = "q >= 2^(n^c) * eps (order-only constants, 0 < c < 1/2)";
      break;
    }
    case BoundFamily::halfspace:
      r.k = 1.0 / epsilon;
      r.tau_exponent = -r.k;
      r.query_bound = "q >= 2^(n^c) * eps^3 (order-only constants, 0 < c < 1/2)";
      break;
    case BoundFamily::monomial:
      if (monomial_degree < 1) {
        throw std::invalid_argument("lower_bound_calculator: monomial degree must be >= 1");
      }
      r.k = monomial_degree;
      r.tau_exponent = 0.0;  // the tolerance constraint is tau <= eps^2, not an n-power
      r.query_bound = "q >= n^Theta(d) * tau^(5/2), valid for eps <= exp(-Theta(d)), tau <= eps^2";
      break;
    case BoundFamily::custom: {
      if (!beta_of_k) {
        throw std::invalid_argument("lower_bound_calculator: custom family needs beta_of_k");
      }
      // largest even k with beta(k) >= 3 eps (norm floor still above 3 eps)
      double k = 0.0;
      for (int cand = 2; cand <= 1 << 20; cand += 2) {
        if (beta_of_k(cand) >= 3.0 * epsilon) {
          k = cand;
        } else if (k > 0.0) {
          break;
        }
      }
      if (k == 0.0) {
        throw std::invalid_argument(
            "lower_bound_calculator: beta(k) < 3 eps for all even k; epsilon too large");
      }
      r.k = k;
      r.tau_exponent = -k;
      r.query_bound = "q >= 2^(n^c) * eps / R^2 (order-only constants, 0 < c < 1/2)";
      break;
    }
  }
  return r;
}

void write_gram_csv(const std::string& path, const FiniteClass& cls) {
  const int n = static_cast<int>(cls.gram.rows());
  csv::Writer w(path, {"i", "j", "inner_product", "std_error"});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      w.write_row({std::to_string(i), std::to_string(j), csv::format_double(cls.gram(i, j)),
                   csv::format_double(cls.gram_stderr(i, j))});
    }
  }
}

}  // namespace sqb
