#include "sqb/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sqb/csv.hpp"
#include "sqb/quadrature.hpp"
#include "sqb/rng.hpp"

namespace sqb {

// ---------------------------------------------------------------------------
// MultiIndexSet

namespace {
void enumerate_rec(int dim, int remaining, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == dim - 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur.push_back(v);
    enumerate_rec(dim, remaining - v, cur, out);
    cur.pop_back();
  }
}
}  // namespace

MultiIndexSet::MultiIndexSet(int dimension, int max_total_degree)
    : dimension_(dimension), max_degree_(max_total_degree) {
  if (dimension < 1) throw std::invalid_argument("MultiIndexSet: dimension must be >= 1");
  if (max_total_degree < 0) throw std::invalid_argument("MultiIndexSet: degree must be >= 0");
  for (int g = 0; g <= max_total_degree; ++g) {
    std::vector<std::vector<int>> level;
    std::vector<int> cur;
    enumerate_rec(dimension, g, cur, level);
    std::sort(level.begin(), level.end());
    for (auto& v : level) indices_.push_back(std::move(v));
  }
}

std::size_t MultiIndexSet::expected_count(int n, int d) {
  // C(n+d, d)
  long double r = 1.0L;
  for (int i = 1; i <= d; ++i) r = r * (n + i) / i;
  return static_cast<std::size_t>(r + 0.5L);
}

MultiIndexSet enumerate_multi_indices(int n, int d) { return MultiIndexSet(n, d); }

// ---------------------------------------------------------------------------
// FunctionHandle

struct RidgeNode {
  ActivationSpec act;
  Eigen::VectorXd weight;
};
struct ScaledNode {
  double factor;
  std::shared_ptr<const FunctionHandle::Node> inner;
};
struct SumNode {
  std::vector<std::shared_ptr<const FunctionHandle::Node>> parts;
};
struct ComposedNode {
  ActivationSpec outer;
  std::shared_ptr<const FunctionHandle::Node> inner;
};
struct PolynomialNode {
  MultiIndexSet set;
  Eigen::VectorXd coeffs;
};
struct OpaqueNode {
  std::function<double(const Eigen::VectorXd&)> fn;
};
struct ZeroNode {};

struct FunctionHandle::Node {
  int arity;
  std::optional<double> norm_hint;
  std::variant<ZeroNode, RidgeNode, ScaledNode, SumNode, ComposedNode,
               PolynomialNode, OpaqueNode>
      v;
};

namespace {

double eval_node(const FunctionHandle::Node& n, const Eigen::VectorXd& x);

double eval_poly(const PolynomialNode& p, const Eigen::VectorXd& x) {
  // per-coordinate Hermite values up to the set's max degree
  const int n = p.set.dimension();
  const int d = p.set.max_total_degree();
  Eigen::MatrixXd H(d + 1, n);
  for (int j = 0; j < n; ++j) {
    double prev = 0.0, curr = 1.0;
    for (int a = 0; a <= d; ++a) {
      H(a, j) = curr;
      const double next = (x[j] * curr - std::sqrt(static_cast<double>(a)) * prev) /
                          std::sqrt(a + 1.0);
      prev = curr;
      curr = next;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < p.set.size(); ++k) {
    if (p.coeffs[static_cast<Eigen::Index>(k)] == 0.0) continue;
    double prod = 1.0;
    const auto& idx = p.set[k];
    for (int j = 0; j < n; ++j) prod *= H(idx[j], j);
    total += p.coeffs[static_cast<Eigen::Index>(k)] * prod;
  }
  return total;
}

double eval_node(const FunctionHandle::Node& n, const Eigen::VectorXd& x) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ZeroNode>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, RidgeNode>) {
          return node.act(node.weight.dot(x));
        } else if constexpr (std::is_same_v<T, ScaledNode>) {
          return node.factor * eval_node(*node.inner, x);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          double s = 0.0;
          for (const auto& p : node.parts) s += eval_node(*p, x);
          return s;
        } else if constexpr (std::is_same_v<T, ComposedNode>) {
          return node.outer(eval_node(*node.inner, x));
        } else if constexpr (std::is_same_v<T, PolynomialNode>) {
          return eval_poly(node, x);
        } else {
          return node.fn(x);
        }
      },
      n.v);
}

// sup |H_a| over [-r, r]; exact endpoint value once r is beyond the largest
// root (~2 sqrt(a)), padded otherwise
double hermite_sup(int a, double r) {
  const double endpoint = std::abs(sqb::hermite::eval_normalized(a, r));
  if (r >= 2.0 * std::sqrt(static_cast<double>(a)) + 1.0) return endpoint;
  return std::max(endpoint, 4.0 * std::exp(0.25 * r * r));
}

double activation_sup(const ActivationSpec& act, double b) {
  // sup |act| over [-b, b]
  switch (act.kind()) {
    case ActivationSpec::Kind::relu: return b;
    case ActivationSpec::Kind::monomial: return std::pow(b, act.parameter());
    default: return 1.0;  // sigmoid, sign, tanh, lsgn are bounded by 1
  }
}

double bound_node(const FunctionHandle::Node& n, double r) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ZeroNode>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, RidgeNode>) {
          return activation_sup(node.act, node.weight.norm() * r);
        } else if constexpr (std::is_same_v<T, ScaledNode>) {
          return std::abs(node.factor) * bound_node(*node.inner, r);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          double s = 0.0;
          for (const auto& p : node.parts) s += bound_node(*p, r);
          return s;
        } else if constexpr (std::is_same_v<T, ComposedNode>) {
          return activation_sup(node.outer, bound_node(*node.inner, r));
        } else if constexpr (std::is_same_v<T, PolynomialNode>) {
          double s = 0.0;
          for (std::size_t k = 0; k < node.set.size(); ++k) {
            const double c = node.coeffs[static_cast<Eigen::Index>(k)];
            if (c == 0.0) continue;
            double prod = 1.0;
            for (int j = 0; j < node.set.dimension(); ++j) {
              prod *= hermite_sup(node.set[k][j], r);
            }
            s += std::abs(c) * prod;
          }
          return s;
        } else {
          throw std::logic_error("bound_on_ball: opaque handle has no declared bound");
        }
      },
      n.v);
}

void scan_node(const FunctionHandle::Node& n, FunctionHandle::Scan& s, bool under_composition) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, RidgeNode>) {
          s.ridge_dirs.push_back(node.weight);
          for (double k : node.act.kinks()) {
            s.any_kinks = true;
            s.leaf_kinks.emplace_back(node.weight, k);
            if (k != 0.0) s.kinks_at_origin_only = false;
          }
        } else if constexpr (std::is_same_v<T, ScaledNode>) {
          scan_node(*node.inner, s, under_composition);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          for (const auto& p : node.parts) scan_node(*p, s, under_composition);
        } else if constexpr (std::is_same_v<T, ComposedNode>) {
          if (!node.outer.is_smooth()) {
            s.nonsmooth_outer = true;
            s.any_kinks = true;
          }
          scan_node(*node.inner, s, true);
        } else if constexpr (std::is_same_v<T, PolynomialNode>) {
          s.any_polynomial = true;
        } else if constexpr (std::is_same_v<T, OpaqueNode>) {
          s.any_opaque = true;
        }
      },
      n.v);
  (void)under_composition;
}

}  // namespace

FunctionHandle::FunctionHandle(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

FunctionHandle FunctionHandle::zero(int arity) {
  auto n = std::make_shared<Node>();
  n->arity = arity;
  n->norm_hint = 0.0;
  n->v = ZeroNode{};
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::ridge(ActivationSpec act, Eigen::VectorXd weight) {
  if (weight.size() < 1) throw std::invalid_argument("ridge: empty weight vector");
  auto n = std::make_shared<Node>();
  n->arity = static_cast<int>(weight.size());
  const double wn = weight.norm();
  switch (act.kind()) {
    case ActivationSpec::Kind::relu:
      n->norm_hint = wn / std::sqrt(2.0);  // ||relu(<w,x>)|| = ||w||/sqrt(2)
      break;
    case ActivationSpec::Kind::sign:
      if (wn > 0) n->norm_hint = 1.0;
      break;
    default:
      break;
  }
  n->v = RidgeNode{act, std::move(weight)};
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::scaled(double factor, FunctionHandle inner) {
  auto n = std::make_shared<Node>();
  n->arity = inner.arity();
  if (auto h = inner.norm_hint()) n->norm_hint = std::abs(factor) * *h;
  n->v = ScaledNode{factor, inner.node_};
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::sum(std::vector<FunctionHandle> parts) {
  if (parts.empty()) throw std::invalid_argument("sum: needs at least one part");
  auto n = std::make_shared<Node>();
  n->arity = parts.front().arity();
  SumNode sn;
  for (auto& p : parts) {
    if (p.arity() != n->arity) throw std::invalid_argument("sum: arity mismatch");
    sn.parts.push_back(p.node_);
  }
  n->v = std::move(sn);
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::composed(ActivationSpec outer, FunctionHandle inner) {
  auto n = std::make_shared<Node>();
  n->arity = inner.arity();
  n->v = ComposedNode{outer, inner.node_};
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::polynomial(MultiIndexSet set, Eigen::VectorXd coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != set.size()) {
    throw std::invalid_argument("polynomial: coefficient count does not match index set");
  }
  auto n = std::make_shared<Node>();
  n->arity = set.dimension();
  n->norm_hint = coeffs.norm();  // orthonormal basis
  n->v = PolynomialNode{std::move(set), std::move(coeffs)};
  return FunctionHandle(n);
}

FunctionHandle FunctionHandle::hermite_indexed(int arity, std::vector<int> index) {
  if (static_cast<int>(index.size()) != arity) {
    throw std::invalid_argument("hermite_indexed: index length must equal arity");
  }
  int total = 0;
  for (int v : index) total += v;
  MultiIndexSet set(arity, total);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k] == index) {
      coeffs[static_cast<Eigen::Index>(k)] = 1.0;
      break;
    }
  }
  return polynomial(std::move(set), std::move(coeffs));
}

FunctionHandle FunctionHandle::opaque(int arity,
                                      std::function<double(const Eigen::VectorXd&)> fn,
                                      std::optional<double> norm_hint) {
  auto n = std::make_shared<Node>();
  n->arity = arity;
  n->norm_hint = norm_hint;
  n->v = OpaqueNode{std::move(fn)};
  return FunctionHandle(n);
}

int FunctionHandle::arity() const { return node_->arity; }

double FunctionHandle::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != node_->arity) throw std::invalid_argument("FunctionHandle: point has wrong arity");
  return eval_node(*node_, x);
}

std::optional<double> FunctionHandle::norm_hint() const { return node_->norm_hint; }

double FunctionHandle::bound_on_ball(double radius) const {
  return bound_node(*node_, radius);
}

void FunctionHandle::scan_structure(Scan& s) const { scan_node(*node_, s, false); }

// ---------------------------------------------------------------------------
// ConvexCombination

ConvexCombination::ConvexCombination(FunctionHandle initial_atom) {
  atoms_.emplace_back(1.0, std::move(initial_atom));
}

ConvexCombination::ConvexCombination(std::vector<std::pair<double, FunctionHandle>> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("ConvexCombination: needs at least one atom");
  if (std::abs(weight_sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("ConvexCombination: weights must sum to 1");
  }
}

int ConvexCombination::arity() const { return atoms_.front().second.arity(); }

double ConvexCombination::weight_sum() const {
  double s = 0.0;
  for (const auto& [w, h] : atoms_) s += w;
  return s;
}

double ConvexCombination::operator()(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& [w, h] : atoms_) s += w * h(x);
  return s;
}

FunctionHandle ConvexCombination::as_handle() const {
  std::vector<FunctionHandle> parts;
  parts.reserve(atoms_.size());
  for (const auto& [w, h] : atoms_) parts.push_back(FunctionHandle::scaled(w, h));
  return FunctionHandle::sum(std::move(parts));
}

ConvexCombination fw_step(const ConvexCombination& current, const FunctionHandle& atom,
                          double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("fw_step: gamma must lie in [0,1]");
  }
  if (gamma == 0.0) return current;
  if (gamma == 1.0) return ConvexCombination(atom);
  std::vector<std::pair<double, FunctionHandle>> next;
  next.reserve(current.atoms().size() + 1);
  for (const auto& [w, h] : current.atoms()) next.emplace_back((1.0 - gamma) * w, h);
  next.emplace_back(gamma, atom);
  return ConvexCombination(std::move(next));
}

// ---------------------------------------------------------------------------
// Expectations

namespace {

struct QuadPlan {
  enum class Mode { point, one_d, polar2d, tensor2d, monte_carlo } mode;
  Eigen::MatrixXd basis;               // n x dim, orthonormal columns
  std::vector<double> breakpoints_1d;  // for one_d
  std::vector<double> kink_angles;     // for polar2d
};

// Orthonormalize the collected ridge directions; rank capped at `cap`.
Eigen::MatrixXd orthonormal_span(const std::vector<Eigen::VectorXd>& dirs, int n, int cap) {
  Eigen::MatrixXd basis(n, 0);
  for (const auto& d : dirs) {
    if (d.norm() < 1e-14) continue;
    Eigen::VectorXd v = d;
    for (int c = 0; c < basis.cols(); ++c) v -= basis.col(c).dot(v) * basis.col(c);
    if (v.norm() > 1e-10 * d.norm()) {
      if (basis.cols() == cap) return Eigen::MatrixXd(n, cap + 1);  // over cap
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v.normalized();
    }
  }
  return basis;
}

QuadPlan make_plan(const FunctionHandle& f, const FunctionHandle& g) {
  const int n = f.arity();
  FunctionHandle::Scan s;
  f.scan_structure(s);
  g.scan_structure(s);

  QuadPlan plan;
  if (s.any_opaque) {
    plan.mode = QuadPlan::Mode::monte_carlo;
    return plan;
  }
  if (s.any_polynomial) {
    // polynomials span all coordinates; only full low-dimensional quadrature applies
    if (n == 1) {
      plan.mode = QuadPlan::Mode::one_d;
      plan.basis = Eigen::MatrixXd::Identity(1, 1);
    } else if (n == 2 && !s.any_kinks) {
      plan.mode = QuadPlan::Mode::tensor2d;
      plan.basis = Eigen::MatrixXd::Identity(2, 2);
    } else {
      plan.mode = QuadPlan::Mode::monte_carlo;
      return plan;
    }
  } else {
    Eigen::MatrixXd basis = orthonormal_span(s.ridge_dirs, n, 2);
    if (basis.cols() > 2) {
      plan.mode = QuadPlan::Mode::monte_carlo;
      return plan;
    }
    plan.basis = basis;
    if (basis.cols() == 0) {
      plan.mode = QuadPlan::Mode::point;
      return plan;
    }
    if (basis.cols() == 1) {
      plan.mode = QuadPlan::Mode::one_d;
    } else {
      plan.mode = QuadPlan::Mode::polar2d;
    }
  }

  if (s.nonsmooth_outer) {
    // kinks at unknown positions; no certified deterministic rule
    plan.mode = QuadPlan::Mode::monte_carlo;
    return plan;
  }

  if (plan.mode == QuadPlan::Mode::one_d) {
    // leaf kink <w, z u> = k maps to the breakpoint z = k / <w, u>
    const Eigen::VectorXd u = plan.basis.col(0);
    for (const auto& [w, k] : s.leaf_kinks) {
      const double c = w.dot(u);
      if (std::abs(c) > 1e-14) plan.breakpoints_1d.push_back(k / c);
    }
  } else if (plan.mode == QuadPlan::Mode::polar2d) {
    if (!s.kinks_at_origin_only) {
      plan.mode = QuadPlan::Mode::monte_carlo;
      return plan;
    }
    const Eigen::VectorXd u = plan.basis.col(0);
    const Eigen::VectorXd v = plan.basis.col(1);
    for (const auto& d : s.ridge_dirs) {
      const double a = std::atan2(d.dot(v), d.dot(u));
      plan.kink_angles.push_back(a + 1.5707963267948966);
      plan.kink_angles.push_back(a - 1.5707963267948966);
    }
  }
  return plan;
}

EstimateResult mc_expect_product(const FunctionHandle& f, const FunctionHandle& g,
                                 const MonteCarloOptions& mc) {
  const int n = f.arity();
  const bool square = f.is(g);
  const int streams = std::max(1, mc.streams);
  const std::int64_t per = std::max<std::int64_t>(1, mc.samples / streams);
  const std::int64_t total = per * streams;
  long double sum = 0.0L, sumsq = 0.0L;
  Eigen::VectorXd x(n);
  for (int st = 0; st < streams; ++st) {
    RngStream rng(substream_seed(mc.seed, static_cast<std::uint64_t>(st)));
    long double s1 = 0.0L, s2 = 0.0L;
    for (std::int64_t i = 0; i < per; ++i) {
      for (int j = 0; j < n; ++j) x[j] = rng.next_gaussian();
      const double fx = f(x);
      const double v = square ? fx * fx : fx * g(x);
      s1 += v;
      s2 += static_cast<long double>(v) * v;
    }
    sum += s1;
    sumsq += s2;
  }
  const double mean = static_cast<double>(sum / total);
  const double var = std::max(0.0, static_cast<double>(sumsq / total) - mean * mean);
  EstimateResult r;
  r.estimate = mean;
  r.std_error = std::sqrt(var / static_cast<double>(total));
  return r;
}

}  // namespace

EstimateResult inner_product(const FunctionHandle& f, const FunctionHandle& g,
                             Method method, const MonteCarloOptions& mc) {
  if (f.arity() != g.arity()) {
    throw std::invalid_argument("inner_product: arity mismatch");
  }
  QuadPlan plan = make_plan(f, g);
  if (method == Method::monte_carlo ||
      (method == Method::automatic && plan.mode == QuadPlan::Mode::monte_carlo)) {
    return mc_expect_product(f, g, mc);
  }
  if (plan.mode == QuadPlan::Mode::monte_carlo) {
    throw std::invalid_argument(
        "inner_product: quadrature unsupported for this structure (no certified "
        "low-dimensional reduction)");
  }

  const int n = f.arity();
  EstimateResult r;
  r.std_error = 0.0;
  switch (plan.mode) {
    case QuadPlan::Mode::point: {
      Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
      r.estimate = f(origin) * g(origin);
      break;
    }
    case QuadPlan::Mode::one_d: {
      Eigen::VectorXd u = plan.basis.col(0);
      r.estimate = quad::gaussian_expect_1d(
          [&](double z) {
            Eigen::VectorXd x = z * u;
            return f(x) * g(x);
          },
          plan.breakpoints_1d);
      break;
    }
    case QuadPlan::Mode::polar2d: {
      Eigen::VectorXd u = plan.basis.col(0), v = plan.basis.col(1);
      r.estimate = quad::gaussian_expect_2d_polar(
          [&](double z1, double z2) {
            Eigen::VectorXd x = z1 * u + z2 * v;
            return f(x) * g(x);
          },
          plan.kink_angles);
      break;
    }
    case QuadPlan::Mode::tensor2d: {
      r.estimate = quad::gaussian_expect_2d_tensor(
          [&](double z1, double z2) {
            Eigen::VectorXd x(2);
            x << z1, z2;
            return f(x) * g(x);
          },
          128);
      break;
    }
    default:
      break;
  }
  return r;
}

EstimateResult norm(const FunctionHandle& f, Method method, const MonteCarloOptions& mc) {
  if (method == Method::automatic && f.norm_hint()) {
    return EstimateResult{*f.norm_hint(), 0.0};
  }
  EstimateResult sq = inner_product(f, f, method, mc);
  EstimateResult r;
  r.estimate = std::sqrt(std::max(0.0, sq.estimate));
  if (sq.std_error > 0.0) {
    r.std_error = r.estimate > 1e-12 ? sq.std_error / (2.0 * r.estimate)
                                     : std::sqrt(sq.std_error);
  }
  return r;
}

void write_coefficients_csv(const std::string& path, const MultiIndexSet& set,
                            const Eigen::VectorXd& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != set.size()) {
    throw std::invalid_argument("write_coefficients_csv: size mismatch");
  }
  std::vector<std::string> header;
  for (int j = 0; j < set.dimension(); ++j) header.push_back("i" + std::to_string(j + 1));
  header.push_back("coefficient");
  csv::Writer w(path, header);
  for (std::size_t k = 0; k < set.size(); ++k) {
    std::vector<std::string> row;
    for (int j = 0; j < set.dimension(); ++j) row.push_back(std::to_string(set[k][j]));
    row.push_back(csv::format_double(coeffs[static_cast<Eigen::Index>(k)]));
    w.write_row(row);
  }
}

}  // namespace sqb
