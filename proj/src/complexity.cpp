#include "barron/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "barron/error.hpp"
#include "barron/parallel.hpp"
#include "barron/rng.hpp"
#include "barron/train.hpp"

namespace barron {

namespace {

constexpr std::uint64_t kStartStream = 0x5eed5eed5eedULL;

void project_l1_ball(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  if (s <= 1.0) return;
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cs = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cs += u[j];
    const double t = (cs - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::copysign(std::max(std::abs(x) - theta, 0.0), x);
}

// Points transposed to d x N for the inner loops.
std::vector<double> transpose(std::span<const double> points, std::size_t d) {
  const std::size_t n = points.size() / d;
  std::vector<double> xt(points.size());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t j = 0; j < d; ++j) xt[j * n + p] = points[p * d + j];
  return xt;
}

// (1/N) sum xi_i relu(w.x_i + b) with theta = (w, b); gradient written to g when non-null.
double correlation(const std::vector<double>& xt, std::size_t d, std::size_t n, std::span<const double> xi,
                   const std::vector<double>& theta, std::vector<double>* g, std::vector<double>& z) {
  std::fill(z.begin(), z.end(), theta[d]);
  for (std::size_t j = 0; j < d; ++j) {
    const double wj = theta[j];
    const double* xj = xt.data() + j * n;
    for (std::size_t p = 0; p < n; ++p) z[p] += wj * xj[p];
  }
  double value = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double act = z[p] > 0.0 ? xi[p] : 0.0;
    value += act * z[p];
    z[p] = act;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (g) {
    double gb = 0.0;
    for (std::size_t p = 0; p < n; ++p) gb += z[p];
    (*g)[d] = gb * inv_n;
    for (std::size_t j = 0; j < d; ++j) {
      const double* xj = xt.data() + j * n;
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += z[p] * xj[p];
      (*g)[j] = acc * inv_n;
    }
  }
  return value * inv_n;
}

double max_abs(std::span<const double> points) {
  double r = 0.0;
  for (double v : points) r = std::max(r, std::abs(v));
  return r;
}

RademacherEstimate summarize(std::span<const double> points, std::size_t d, double Q, std::vector<double> unit,
                             std::string solver, std::size_t restarts) {
  RademacherEstimate est;
  est.n = points.size() / d;
  est.d = d;
  est.trials = unit.size();
  est.q = Q;
  est.radius = max_abs(points);
  est.solver = std::move(solver);
  est.restarts = restarts;
  double s = 0.0;
  for (double v : unit) s += v;
  const double mean_unit = unit.empty() ? 0.0 : s / static_cast<double>(unit.size());
  double var = 0.0;
  for (double v : unit) var += (v - mean_unit) * (v - mean_unit);
  const double t = static_cast<double>(unit.size());
  const double sd_unit = unit.size() > 1 ? std::sqrt(var / (t - 1.0)) : 0.0;
  est.mean = Q * mean_unit;
  est.std_error = Q * sd_unit / std::sqrt(std::max(t, 1.0));
  for (double& v : unit) v *= Q;
  est.per_trial = std::move(unit);
  est.bound = rademacher_bound(Q, est.radius, d, est.n);
  return est;
}

void check_points(std::span<const double> points, std::size_t d) {
  require(d >= 1, "rademacher: dimension must be positive");
  require(!points.empty() && points.size() % d == 0, "rademacher: point set is empty or malformed");
}

}  // namespace

double rademacher_bound(double Q, double R, std::size_t d, std::size_t N) {
  require(N >= 1 && d >= 1, "rademacher_bound: need N >= 1 and d >= 1");
  return 2.0 * Q * std::max(1.0, R) * std::sqrt(std::log(2.0 * static_cast<double>(d) + 2.0) / static_cast<double>(N));
}

std::vector<double> rademacher_signs(std::size_t n, std::uint64_t seed, std::size_t trial) {
  Rng rng(derive_seed(seed, trial));
  std::vector<double> xi(n);
  for (double& v : xi) v = rademacher_sign(rng);
  return xi;
}

double single_neuron_sup(std::span<const double> points, std::size_t d, std::span<const double> xi,
                         std::uint64_t seed, const PgaConfig& cfg) {
  check_points(points, d);
  const std::size_t n = points.size() / d;
  require(xi.size() == n, "single_neuron_sup: sign vector has wrong length");
  const auto xt = transpose(points, d);
  Rng rng(seed);
  std::vector<double> z(n), theta(d + 1), g(d + 1);
  std::exponential_distribution<double> expo(1.0);
  const std::size_t per_sign = std::max<std::size_t>(1, cfg.restarts / 2);
  double best = 0.0;
  for (int s : {1, -1}) {
    for (std::size_t r = 0; r < per_sign; ++r) {
      std::fill(theta.begin(), theta.end(), 0.0);
      if (r < 2 * (d + 1)) {
        theta[r / 2] = r % 2 == 0 ? 1.0 : -1.0;
      } else {
        double tot = 0.0;
        for (double& v : theta) {
          v = expo(rng);
          tot += v;
        }
        for (double& v : theta) v = rademacher_sign(rng) * v / tot;
      }
      double eta = cfg.step;
      for (std::size_t t = 0; t <= cfg.steps; ++t) {
        if (t > 0 && cfg.decay_every > 0 && t % cfg.decay_every == 0) eta *= cfg.decay;
        const double v = s * correlation(xt, d, n, xi, theta, &g, z);
        best = std::max(best, v);
        if (t == cfg.steps) break;
        double gn = 0.0;
        for (double& x : g) {
          x *= s;
          gn += x * x;
        }
        gn = std::sqrt(gn);
        if (gn == 0.0) break;
        for (std::size_t j = 0; j <= d; ++j) theta[j] += eta * g[j] / gn;
        project_l1_ball(theta);
      }
    }
  }
  return best;
}

double single_neuron_sup_grid(std::span<const double> points, std::size_t d, std::span<const double> xi,
                              std::size_t nodes) {
  check_points(points, d);
  require(d == 1 || d == 2, "single_neuron_sup_grid: only d = 1 or d = 2");
  require(nodes >= 2, "single_neuron_sup_grid: need at least two nodes");
  const std::size_t n = points.size() / d;
  require(xi.size() == n, "single_neuron_sup_grid: sign vector has wrong length");
  const auto xt = transpose(points, d);
  std::vector<double> z(n), theta(d + 1);
  double best = 0.0;
  const double G = static_cast<double>(nodes - 1);
  auto visit = [&] { best = std::max(best, std::abs(correlation(xt, d, n, xi, theta, nullptr, z))); };
  if (d == 1) {
    for (int sw : {1, -1})
      for (int sb : {1, -1})
        for (std::size_t i = 0; i < nodes; ++i) {
          const double t = static_cast<double>(i) / G;
          theta = {sw * t, sb * (1.0 - t)};
          visit();
        }
    return best;
  }
  for (int s1 : {1, -1})
    for (int s2 : {1, -1})
      for (int s3 : {1, -1})
        for (std::size_t i = 0; i < nodes; ++i)
          for (std::size_t j = 0; i + j < nodes; ++j) {
            const double a = static_cast<double>(i) / G;
            const double b = static_cast<double>(j) / G;
            theta = {s1 * a, s2 * b, s3 * std::max(0.0, 1.0 - a - b)};
            visit();
          }
  return best;
}

RademacherEstimate rademacher_estimate(std::span<const double> points, std::size_t d, double Q,
                                       std::size_t trials, std::uint64_t seed, const PgaConfig& cfg,
                                       std::size_t jobs) {
  check_points(points, d);
  require(Q >= 0.0, "rademacher_estimate: Q must be nonnegative");
  require(trials >= 1, "rademacher_estimate: trials must be positive");
  const std::size_t n = points.size() / d;
  auto unit = parallel_map(trials, jobs, [&](std::size_t t) {
    const auto xi = rademacher_signs(n, seed, t);
    return single_neuron_sup(points, d, xi, derive_seed(seed ^ kStartStream, t), cfg);
  });
  return summarize(points, d, Q, std::move(unit), "projected-ascent", cfg.restarts);
}

RademacherEstimate rademacher_brute_1d(std::span<const double> points, double Q, std::size_t trials,
                                       std::uint64_t seed, std::size_t nodes) {
  check_points(points, 1);
  require(trials >= 1, "rademacher_brute_1d: trials must be positive");
  std::vector<double> unit(trials);
  for (std::size_t t = 0; t < trials; ++t)
    unit[t] = single_neuron_sup_grid(points, 1, rademacher_signs(points.size(), seed, t), nodes);
  return summarize(points, 1, Q, std::move(unit), "grid", 0);
}

RademacherEstimate rademacher_brute_2d(std::span<const double> points, double Q, std::size_t trials,
                                       std::uint64_t seed, std::size_t nodes) {
  check_points(points, 2);
  require(trials >= 1, "rademacher_brute_2d: trials must be positive");
  std::vector<double> unit(trials);
  for (std::size_t t = 0; t < trials; ++t)
    unit[t] = single_neuron_sup_grid(points, 2, rademacher_signs(points.size() / 2, seed, t), nodes);
  return summarize(points, 2, Q, std::move(unit), "grid", 0);
}

double grid_lower_bound_formula(double delta, std::size_t d) {
  require(delta > 0.0, "grid_lower_bound: delta must be positive");
  return std::pow((2.0 + delta) / delta, static_cast<double>(d) / 2.0);
}

double grid_lower_bound(int N, std::size_t d, double delta) {
  require(N >= 1 && d >= 1, "grid_lower_bound: need N >= 1 and d >= 1");
  require(std::abs(delta - 1.0 / N) <= 1e-12, "grid_lower_bound: delta must equal 1/N");
  return grid_lower_bound_formula(delta, d);
}

double complexity_lower_separation(const Problem& problem) {
  require(!problem.regression(), "complexity_lower_separation: regression problem has no classes");
  if (problem.num_classes() < 2 || problem.delta == std::numeric_limits<double>::infinity()) return 0.0;
  require(problem.delta > 0.0 && std::isfinite(problem.delta), "complexity_lower_separation: positive separation required");
  if (problem.binary()) return 2.0 / problem.delta;
  return 2.0 / (problem.delta * min_label_gap(problem.labels));
}

ComplexityEstimate complexity_upper_trained(const Problem& problem, const Dataset& sample, std::size_t m,
                                            const UpperBudget& budget, std::uint64_t seed) {
  require(!problem.regression(), "complexity_upper_trained: classification problem required");
  require(problem.delta > 0.0, "complexity_upper_trained: separated problem required");
  require(sample.size() > 0 && sample.d == problem.d, "complexity_upper_trained: sample does not match problem");
  ComplexityEstimate est;
  est.lower = complexity_lower_separation(problem);
  est.lower_source = "lipschitz-separation";

  const Dataset audit = problem.sample(budget.audit_n, derive_seed(seed, 0xa0d17));
  TrainConfig cfg;
  cfg.m = m;
  cfg.penalty = Penalty::linear;
  cfg.objective = problem.binary() ? Objective::margin : Objective::cross_entropy;
  cfg.loss = Loss::sqhinge();
  cfg.steps = budget.steps;
  cfg.restarts = budget.restarts;
  cfg.jobs = budget.jobs;
  cfg.trace_every = budget.steps;
  double lambda = budget.lambda0;
  for (std::size_t stage = 0; stage < budget.stages; ++stage, lambda *= budget.lambda_ratio) {
    cfg.lambda = lambda;
    cfg.seed = derive_seed(seed, stage);
    const auto res = minimize_regularized(sample, cfg);
    cfg.init = res.net;
    const double gamma = std::min(min_margin(res.net, sample), min_margin(res.net, audit));
    if (!(gamma > 0.0)) {
      est.diagnostics.push_back("stage " + std::to_string(stage) + ": audit margin " + std::to_string(gamma));
      continue;
    }
    const TwoLayerNet scaled = scale_outer(res.net, 1.0 / gamma);
    const double upper = path_norm(scaled);
    if (!est.upper || upper < *est.upper) {
      est.upper = upper;
      est.witness = scaled;
      est.audit_margin = std::min(min_margin(scaled, sample), min_margin(scaled, audit));
    }
  }
  if (est.upper)
    est.upper_source = "trained-classifier";
  else
    est.diagnostics.push_back("budget exhausted without a positive audit margin");
  return est;
}

}  // namespace barron
