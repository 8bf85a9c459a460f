#ifndef SQB_EXPERIMENTS_HPP
#define SQB_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqb/boosting.hpp"
#include "sqb/funcspace.hpp"
#include "sqb/learners.hpp"
#include "sqb/sq_oracle.hpp"

namespace sqb::experiments {

// ---------------------------------------------------------------------------
// Fixtures

// 2*directions relu ridge atoms on R^2: +-sqrt(2) relu(<u_j, x>) with u_j
// equally spaced on the circle; every atom has unit norm.
std::vector<FunctionHandle> relu_ridge_grid(int directions = 32);

// sign ridge atoms (unit norm, Boolean output).
std::vector<FunctionHandle> sign_ridge_grid(int directions = 64);

struct FWFixture {
  std::string name;
  LabeledDistribution dist;  // p-concept with E[y|x] = tanh(f_star(x))
  FunctionHandle f_star;
  std::vector<FunctionHandle> candidates;
  double diameter = 2.0;
  // fixture-side probe measuring (surrogate gap, ||tanh f_t - tanh f*||)
  FWProbe probe;
};

// which in {0, 1, 2}: single atom, midpoint of two atoms, three-atom mix.
FWFixture make_fw_fixture(int which, int directions = 32);

struct LowDegFixture {
  std::string name;
  LabeledDistribution dist;  // deterministic labels min(sqrt(2) relu(<u,x>), C)
  Eigen::VectorXd direction;
  double label_bound = 2.0;
};

LowDegFixture make_lowdeg_fixture(std::uint64_t seed, double label_bound = 2.0);

// ---------------------------------------------------------------------------
// Experiment driver

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

// Flat key=value configuration; unknown keys are rejected at parse time.
struct ExperimentConfig {
  std::string preset;  // hermite_table, norm_check, fw_convergence, lowdeg_bench,
                       // sda_report, bound_table
  std::uint64_t seed = 0;
  std::int64_t samples = 1'000'000;
  std::string out_dir = ".";
  int max_degree = 20;
  int iterations = 50;
  std::string fixture = "realizable";
  std::string psi = "tanh";
  std::string base = "grid";
  double epsilon = 0.1;
  double gamma = 0.25;
  std::string cls = "monomials:n=4,d=2";
  std::string mode = "exact";
  int m = 2;
  std::string phi = "relu";

  void set(const std::string& key, const std::string& value);  // throws on unknown key
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

// Parses a flat key=value file (one pair per line, '#' comments).
void load_config_file(const std::string& path, ExperimentConfig& config);

ExperimentResult run_hermite_table(const ExperimentConfig&);
ExperimentResult run_norm_check(const ExperimentConfig&);
ExperimentResult run_fw_convergence(const ExperimentConfig&);
ExperimentResult run_lowdeg_bench(const ExperimentConfig&);
ExperimentResult run_sda_report(const ExperimentConfig&);
ExperimentResult run_bound_table(const ExperimentConfig&);
ExperimentResult run_verify_all(const ExperimentConfig&);

ExperimentResult run_experiment(const ExperimentConfig&);  // dispatch on preset

}  // namespace sqb::experiments

#endif  // SQB_EXPERIMENTS_HPP
