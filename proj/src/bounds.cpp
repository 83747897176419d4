#include "barron/bounds.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "barron/error.hpp"
#include "barron/measure.hpp"
#include "barron/rng.hpp"

namespace barron {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  BoundKind kind;
  const char* token;
};

constexpr std::array<KindName, 9> kKinds{{{BoundKind::hinge, "hinge"},
                                          {BoundKind::hinge_squared, "hinge-squared"},
                                          {BoundKind::logloss1, "logloss1"},
                                          {BoundKind::logloss2, "logloss2"},
                                          {BoundKind::xent_lip, "xent-lip"},
                                          {BoundKind::xent_smooth, "xent-smooth"},
                                          {BoundKind::mostly_correct, "mostly-correct"},
                                          {BoundKind::unrealizable, "unrealizable"},
                                          {BoundKind::regression, "regression"}}};

double need(const std::optional<double>& v, const char* name, BoundKind kind) {
  require(v.has_value(), "bound_rhs(" + to_string(kind) + "): missing parameter " + name);
  return *v;
}

struct Common {
  double Q, R, m, n, d, conf;
};

Common common(const BoundParams& p, BoundKind kind, bool with_sample = true) {
  Common c{};
  c.Q = need(p.Q, "Q", kind);
  c.R = std::max(1.0, need(p.R, "R", kind));
  c.m = need(p.m, "m", kind);
  require(c.Q > 0 && c.m > 0, "bound_rhs: Q and m must be positive");
  require(p.R.value() >= 0, "bound_rhs: R must be nonnegative");
  if (with_sample) {
    c.n = need(p.n, "n", kind);
    c.d = need(p.d, "d", kind);
    c.conf = need(p.conf, "conf", kind);
    require(c.n > 0 && c.d > 0, "bound_rhs: n and d must be positive");
    require(c.conf > 0 && c.conf < 1, "bound_rhs: conf must lie in (0,1)");
  }
  return c;
}

// inf_Q [c Q^-g + b Q] for b > 0.
double inf_power_plus_linear(double c, double g, double b) {
  if (c <= 0) return 0.0;
  const double q = std::pow(c * g / b, 1.0 / (g + 1.0));
  return c * std::pow(q, -g) + b * q;
}

BoundValue make(std::vector<BoundTerm> terms) {
  BoundValue v;
  for (const auto& t : terms) v.value += t.value;
  v.terms = std::move(terms);
  return v;
}

double mean_se(const std::vector<double>& v, double& se) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - mean) * (x - mean);
  se = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  return mean;
}

// Per-point loss of the configured objective.
std::vector<double> point_losses(const TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg) {
  const std::size_t n = data.size();
  std::vector<double> out(n * net.k);
  eval_batch(net, data.x, out);
  std::vector<double> loss(n);
  if (cfg.objective == Objective::least_squares) {
    for (std::size_t i = 0; i < n; ++i) loss[i] = (out[i] - data.target[i]) * (out[i] - data.target[i]);
  } else if (cfg.objective == Objective::cross_entropy) {
    MultiClassLoss xent(data.labels);
    for (std::size_t i = 0; i < n; ++i) loss[i] = xent.value({out.data() + i * net.k, net.k}, data.cls[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) loss[i] = cfg.loss.value(-data.binary_label(i) * out[i]);
  }
  return loss;
}

double proxy_scale(const TrainConfig& cfg) {
  return cfg.objective == Objective::cross_entropy ? std::log(2.0) : cfg.loss.value(0.0);
}

struct KindSetup {
  Loss loss;
  Penalty penalty;
  Objective objective;
};

KindSetup setup_for(BoundKind kind, const Problem& problem, const Loss& configured) {
  switch (kind) {
    case BoundKind::hinge: return {Loss::hinge(), Penalty::linear, Objective::margin};
    case BoundKind::hinge_squared: return {Loss::hinge(), Penalty::squared, Objective::margin};
    case BoundKind::logloss1: return {Loss::logistic(), Penalty::linear, Objective::margin};
    case BoundKind::logloss2: return {Loss::logistic(), Penalty::squared, Objective::margin};
    case BoundKind::xent_lip: return {Loss::logistic(), Penalty::linear, Objective::cross_entropy};
    case BoundKind::xent_smooth: return {Loss::logistic(), Penalty::squared, Objective::cross_entropy};
    case BoundKind::unrealizable: return {configured, Penalty::linear, Objective::margin};
    default: break;
  }
  (void)problem;
  throw ContractError("verify_apriori: no training setup for kind " + to_string(kind));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest c with rho_i <= c q_i^-g on every point, g from the log-log fit.
std::pair<double, double> envelope_fit(const std::vector<double>& qs, const std::vector<double>& rho, double floor,
                                       std::vector<std::string>& diag) {
  std::size_t used = 0;
  auto [slope, icpt] = loglog_fit(qs, rho, floor, &used);
  double g = -slope;
  if (used < 2 || !(g > 0.05)) {
    diag.push_back("rho fit degenerate (" + std::to_string(used) + " points above floor); exponent clamped to 0.05");
    g = std::max(0.05, std::isfinite(g) ? g : 0.05);
  }
  double c = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) c = std::max(c, rho[i] * std::pow(qs[i], g));
  c = std::max(c, floor * std::pow(qs.back(), g));
  (void)icpt;
  return {c, g};
}

}  // namespace

std::string to_string(BoundKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.token;
  return "unknown";
}

BoundKind parse_bound_kind(std::string_view token) {
  for (const auto& k : kKinds)
    if (token == k.token) return k.kind;
  throw ContractError("unknown bound kind: " + std::string(token));
}

double regression_constant(double alpha, double c) {
  require(alpha > 0 && c >= 0, "regression_constant: need alpha > 0, c >= 0");
  const double e = 2.0 + alpha;
  return 2.0 * (std::pow(2.0 / alpha, alpha / e) + std::pow(alpha / 2.0, 2.0 / e)) * std::pow(c, 2.0 / e);
}

double mostly_correct_optimal_q(double c, double gamma, double R, double m) {
  require(c > 0 && gamma > 0 && m > 0, "mostly_correct_budget: need c, gamma, m > 0");
  const double r2 = std::max(1.0, R) * std::max(1.0, R);
  return std::pow(c * gamma * m / (2.0 * r2), 1.0 / (gamma + 2.0));
}

double mostly_correct_budget(double c, double gamma, double R, double m) {
  require(c > 0 && gamma > 0 && m > 0, "mostly_correct_budget: need c, gamma, m > 0");
  const double r2 = std::max(1.0, R) * std::max(1.0, R);
  const double e = gamma + 2.0;
  const double bracket = std::pow(2.0 * r2 / gamma, gamma / e) + r2 * std::pow(gamma / (2.0 * r2), 2.0 / e);
  return 2.0 * bracket * std::pow(c, 2.0 / e) * std::pow(m, -gamma / e);
}

BoundValue bound_rhs(BoundKind kind, const BoundParams& p) {
  switch (kind) {
    case BoundKind::hinge: {
      auto c = common(p, kind);
      return make({{"approximation", 2 * c.Q * c.R / std::sqrt(c.m)},
                   {"rademacher", 2 * c.R * std::sqrt(std::log(2 * c.d + 2) / c.n)},
                   {"confidence", 2 * c.Q * c.R * std::sqrt(std::log(2 / c.conf) / c.n)}});
    }
    case BoundKind::hinge_squared: {
      auto c = common(p, kind);
      const double q2 = c.Q * c.Q * c.R * c.R;
      return make({{"approximation", 4 * q2 / c.m},
                   {"rademacher", 2 * c.R * std::sqrt(std::log(2 * c.d + 2) / c.n)},
                   {"confidence", 4 * q2 * std::sqrt(std::log(2 / c.conf) / c.n)}});
    }
    case BoundKind::logloss1: {
      auto c = common(p, kind);
      const double x = 2 * c.Q * c.R;
      const double f = x * (1 + std::abs(std::log(x / std::sqrt(c.m))));
      return make({{"approximation", f / std::sqrt(c.m)},
                   {"confidence", f * std::sqrt(2 * std::log(2 / c.conf) / c.n)},
                   {"rademacher", 2 * c.R * std::sqrt(2 * std::log(2 * c.d + 2) / c.n)}});
    }
    case BoundKind::logloss2: {
      auto c = common(p, kind);
      const double q2 = c.Q * c.Q * c.R * c.R;
      const double l1 = std::abs(std::log(q2 / (4 * c.m)));
      const double l2 = std::abs(std::log(4 * q2 / c.m));
      return make({{"approximation", (1 + 2 * l1 * l1) * q2 / (4 * c.m)},
                   {"confidence", 2 * c.Q * c.R * (1 + l2) * std::sqrt(2 * std::log(2 / c.conf) / c.n)},
                   {"rademacher", 2 * c.R * std::sqrt(2 * std::log(2 * c.d + 2) / c.n)}});
    }
    case BoundKind::xent_lip: {
      auto c = common(p, kind);
      const double Y = need(p.Y, "Y", kind), k = need(p.k, "k", kind);
      const double x = 2 * c.Q * c.R * Y;
      const double f = x * (1 + std::abs(std::log(x / std::sqrt(c.m))));
      return make({{"approximation", f / std::sqrt(c.m)},
                   {"confidence", f * std::sqrt(2 * std::log(2 / c.conf) / c.n)},
                   {"rademacher", 4 * k * Y * c.R * std::sqrt(2 * std::log(2 * c.d + 2) / c.n)}});
    }
    case BoundKind::xent_smooth: {
      auto c = common(p, kind);
      const double Y = need(p.Y, "Y", kind), k = need(p.k, "k", kind);
      const double q2 = c.Q * c.Q * c.R * c.R * Y * Y;
      const double l1 = std::abs(std::log(q2 / c.m));
      const double l2 = std::abs(std::log(4 * q2 / c.m));
      return make({{"approximation", 2 * (1 + 2 * l1 * l1) * q2 / c.m},
                   {"confidence", 2 * c.Q * c.R * Y * (1 + l2) * std::sqrt(2 * std::log(2 / c.conf) / c.n)},
                   {"rademacher", 4 * k * c.R * Y * std::sqrt(2 * std::log(2 * c.d + 2) / c.n)}});
    }
    case BoundKind::mostly_correct: {
      auto c = common(p, kind, false);
      const double q2 = c.Q * c.Q * c.R * c.R;
      BoundValue v;
      v.value = q2 / c.m;
      v.terms = {{"misclassified", q2 / c.m}, {"margin_below_half", 4 * q2 / c.m}};
      if (p.d) v.terms.push_back({"neuron_threshold", q2 * (*p.d + 1)});
      return v;
    }
    case BoundKind::unrealizable: {
      const double R = std::max(1.0, need(p.R, "R", kind));
      const double m = need(p.m, "m", kind), n = need(p.n, "n", kind), d = need(p.d, "d", kind);
      const double conf = need(p.conf, "conf", kind);
      const double cr = need(p.rho_c, "rho_c", kind), g = need(p.rho_exponent, "rho_exponent", kind);
      const double l0 = need(p.loss_at_zero, "loss_at_zero", kind);
      const double lip = need(p.loss_lipschitz, "loss_lipschitz", kind);
      require(m > 0 && n > 0 && d > 0 && g > 0 && cr >= 0, "bound_rhs(unrealizable): invalid parameters");
      require(conf > 0 && conf < 1, "bound_rhs: conf must lie in (0,1)");
      const double approx = inf_power_plus_linear(cr, g, 2 * R / std::sqrt(m));
      const double norm = std::sqrt(m) / R * approx;
      return make({{"approximation", approx},
                   {"rademacher", 2 * R * std::sqrt(std::log(2 * d + 2) / n)},
                   {"confidence", (l0 + lip * norm) * std::sqrt(std::log(2 / conf) / n)}});
    }
    case BoundKind::regression: {
      const double R = std::max(1.0, need(p.R, "R", kind));
      const double m = need(p.m, "m", kind), n = need(p.n, "n", kind), d = need(p.d, "d", kind);
      const double conf = need(p.conf, "conf", kind);
      const double cr = need(p.rho_c, "rho_c", kind);
      const double a = need(p.rho_exponent, "rho_exponent", kind);
      require(m > 0 && n > 0 && d > 0 && a > 0 && cr >= 0, "bound_rhs(regression): invalid parameters");
      require(conf > 0 && conf < 1, "bound_rhs: conf must lie in (0,1)");
      const double C = regression_constant(a, cr);
      const double e = 2.0 + a;
      const double qstar = std::pow(m * a * cr / (2 * R * R), 1.0 / e);
      return make({{"approximation", 2 * C * std::pow(R * R / m, a / e)},
                   {"rademacher", 4 * C * qstar * std::sqrt(std::log(2 * d + 2) / n)},
                   {"confidence", 4 * C * C * qstar * qstar * R * R * std::sqrt(std::log(2 / conf) / n)}});
    }
  }
  throw ContractError("bound_rhs: unknown kind");
}

double competitor_objective(BoundKind kind, const BoundParams& p) {
  switch (kind) {
    case BoundKind::hinge:
    case BoundKind::hinge_squared:
    case BoundKind::logloss1:
    case BoundKind::logloss2:
    case BoundKind::xent_lip:
    case BoundKind::xent_smooth:
    case BoundKind::regression: {
      for (const auto& t : bound_rhs(kind, p).terms)
        if (t.name == "approximation") return t.value;
      break;
    }
    case BoundKind::unrealizable: {
      const double R = std::max(1.0, need(p.R, "R", kind));
      return inf_power_plus_linear(need(p.rho_c, "rho_c", kind), need(p.rho_exponent, "rho_exponent", kind),
                                   2 * R / std::sqrt(need(p.m, "m", kind)));
    }
    default: break;
  }
  throw ContractError("competitor_objective: no competitor for kind " + to_string(kind));
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y, double floor,
                                     std::size_t* used) {
  require(x.size() == y.size(), "loglog_fit: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > floor) || !(x[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++k;
  }
  if (used) *used = k;
  if (k < 2) return {kNaN, kNaN};
  const double kk = static_cast<double>(k);
  const double den = kk * sxx - sx * sx;
  if (den <= 0) return {kNaN, kNaN};
  const double slope = (kk * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / kk};
}

BoundReport verify_apriori(const Problem& problem, const VerifyConfig& vc) {
  const auto t0 = std::chrono::steady_clock::now();
  require(!problem.regression(), "verify_apriori: classification problem required (use regression_harness)");
  require(vc.n_train > 0 && vc.n_eval > 1, "verify_apriori: sample sizes must be positive");
  require(vc.conf > 0 && vc.conf < 1, "verify_apriori: conf must lie in (0,1)");
  const BoundKind kind = vc.kind;
  const bool multiclass = !problem.binary();
  const bool xent_kind = kind == BoundKind::xent_lip || kind == BoundKind::xent_smooth;
  require(xent_kind == multiclass || kind == BoundKind::mostly_correct,
          "verify_apriori: kind " + to_string(kind) + " does not match the problem's label structure");

  BoundReport rep;
  rep.kind = kind;
  rep.problem = problem.name;
  rep.paper_claimed_q = problem.paper_claimed_q;

  const std::size_t m = vc.train.m;
  BoundParams& p = rep.params;
  p.R = problem.radius;
  p.m = static_cast<double>(m);
  p.n = static_cast<double>(vc.n_train);
  p.d = static_cast<double>(problem.d);
  p.conf = vc.conf;
  p.k = static_cast<double>(problem.num_classes());
  p.Y = MultiClassLoss(problem.labels).max_label_norm();

  const Dataset train = problem.sample(vc.n_train, derive_seed(vc.seed, 1));
  const Dataset eval = problem.sample(vc.n_eval, derive_seed(vc.seed, 2));

  if (kind != BoundKind::unrealizable && kind != BoundKind::mostly_correct) {
    require(problem.known_q.upper.has_value(), "verify_apriori: problem has no known complexity upper bound");
    p.Q = *problem.known_q.upper;
  }

  if (kind == BoundKind::mostly_correct) {
    require(problem.binary(), "verify_apriori(mostly-correct): binary problem required");
    require(problem.witness.has_value() && problem.known_q.upper.has_value(),
            "verify_apriori(mostly-correct): problem has no witness measure");
    p.Q = barron_norm_upper(*problem.witness);
    auto sampled = sample_network(*problem.witness, m, derive_seed(vc.seed, 3), vc.best_of, train.x, ApproxMode::l2,
                                  problem.radius, vc.train.jobs);
    const auto z = negative_margins(sampled.net, eval);
    std::size_t wrong = 0;
    for (double v : z) wrong += v > 0.0 ? 1 : 0;
    const double nn = static_cast<double>(z.size());
    rep.misclass = static_cast<double>(wrong) / nn;
    rep.measured = rep.misclass;
    rep.std_error = std::sqrt(std::max(rep.misclass * (1 - rep.misclass), 1.0 / nn) / nn);
    rep.path_norm = path_norm(sampled.net);
    auto v = bound_rhs(kind, p);
    rep.rhs = v.value;
    rep.terms = v.terms;
    rep.pass = rep.measured <= rep.rhs + 2 * rep.std_error;
    rep.wall_seconds = seconds_since(t0);
    return rep;
  }

  TrainConfig cfg = vc.train;
  const KindSetup s = setup_for(kind, problem, vc.train.loss);
  cfg.loss = s.loss;
  cfg.penalty = s.penalty;
  cfg.objective = s.objective;
  cfg.radius = problem.radius;
  cfg.lambda = std::max(1.0, problem.radius) / std::sqrt(static_cast<double>(m));
  rep.lambda = *cfg.lambda;

  if (kind == BoundKind::unrealizable) {
    require(cfg.loss.kind() != LossKind::sqhinge && cfg.loss.kind() != LossKind::exp,
            "verify_apriori(unrealizable): loss must be globally Lipschitz");
    p.loss_at_zero = cfg.loss.value(0.0);
    p.loss_lipschitz = cfg.loss.lipschitz();
    if (vc.rho_model) {
      p.rho_c = vc.rho_model->first;
      p.rho_exponent = vc.rho_model->second;
    } else {
      // Fit min-risk decay of the configured loss on the training sample.
      TrainConfig rc = cfg;
      rc.penalty = Penalty::none;
      rc.init.reset();
      std::vector<double> qs{1, 2, 4, 8, 16}, rho;
      for (double q : qs) {
        auto r = minimize_constrained(train, q, rc);
        rho.push_back(empirical_loss(r.net, eval, rc));
        rc.init = r.net;
      }
      auto [c, g] = envelope_fit(qs, rho, 1e-4, rep.diagnostics);
      p.rho_c = c;
      p.rho_exponent = g;
      for (std::size_t i = 0; i < qs.size(); ++i) rep.rho_points.emplace_back(qs[i], rho[i]);
    }
  }

  auto fit = minimize_regularized(train, cfg);
  const TwoLayerNet& net = fit.net;
  rep.path_norm = path_norm(net);
  rep.train_loss = empirical_loss(net, train, cfg);
  rep.objective = penalized_objective(net, train, cfg, rep.lambda);
  for (const auto& d : fit.trace.diagnostics) rep.diagnostics.push_back(d);

  const auto losses = point_losses(net, eval, cfg);
  rep.measured = mean_se(losses, rep.std_error);
  rep.misclass = misclass_probability(net, eval);
  rep.misclass_proxy = rep.measured / proxy_scale(cfg);
  rep.misclass_ok = rep.misclass <= rep.misclass_proxy + 1e-12;

  auto v = bound_rhs(kind, p);
  rep.rhs = v.value;
  rep.terms = v.terms;
  rep.competitor = competitor_objective(kind, p);
  rep.slack = rep.objective - rep.competitor;
  rep.optimizer_limited = rep.slack > 0.25 * rep.competitor;
  rep.pass = rep.measured <= rep.rhs + 2 * rep.std_error;
  if (rep.optimizer_limited) rep.diagnostics.push_back("optimizer-limited: objective exceeds competitor by >25%");
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

double touching_1d_oracle(double Q, double alpha) {
  require(Q > 0 && alpha >= 0, "touching_1d_oracle: need Q > 0, alpha >= 0");
  const double a1 = alpha + 1.0;
  const double h = Q / 2.0;
  if (h >= 1.0) return 2.0 * std::pow(1.0 / h, a1) / ((alpha + 2.0) * (alpha + 3.0));
  return 1.0 - 2.0 * a1 * h / (alpha + 2.0) + a1 * h * h / (alpha + 3.0);
}

double touching_1d_population_risk(const TwoLayerNet& net, double alpha, const Loss& loss, std::size_t panels) {
  require(net.d == 1 && net.k == 1, "touching_1d_population_risk: scalar net on R required");
  require(alpha >= 0 && panels > 0, "touching_1d_population_risk: need alpha >= 0 and panels > 0");
  static constexpr std::array<double, 5> nodes{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                               0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                 0.2369268850561891, 0.2369268850561891};
  double x[1];
  auto f = [&](double t) {
    x[0] = t;
    return eval_scalar(net, x);
  };
  // Density (a+1)/2 |x|^a; fold x < 0 onto (0,1) with the label flipped.
  auto integrand = [&](double t) { return std::pow(t, alpha) * (loss.value(-f(t)) + loss.value(f(-t))); };

  // Both branches are linear between kinks; split further where they cross the loss kinks.
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 0; i < net.m; ++i) {
    if (net.w[i] == 0.0) continue;
    const double z = -net.b[i] / net.w[i];
    if (std::abs(z) < 1.0 && z != 0.0) cuts.push_back(std::abs(z));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const std::array<double, 5> levels{0.0, 1.0, -1.0, loss.mu_cut(), -loss.mu_cut()};
  std::vector<double> all = cuts;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double p = cuts[s], q = cuts[s + 1];
    for (double sign : {1.0, -1.0}) {
      const double fp = f(sign * p), fq = f(sign * q);
      for (double level : levels) {
        if ((fp - level) * (fq - level) < 0.0) all.push_back(p + (q - p) * (level - fp) / (fq - fp));
      }
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  auto gauss = [&](double lo, double hi) {
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) s += weights[q] * integrand(0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes[q]);
    return 0.5 * (hi - lo) * s;
  };
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < all.size(); ++s) {
    double lo = all[s];
    const double hi = all[s + 1];
    if (lo == 0.0 && std::floor(alpha) != alpha) {
      // geometric grading towards the t^a singularity
      double top = hi;
      for (int j = 0; j < 60; ++j) {
        total += gauss(0.5 * top, top);
        top *= 0.5;
      }
      total += gauss(0.0, top);
      continue;
    }
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t j = 0; j < panels; ++j) total += gauss(lo + j * width, lo + (j + 1) * width);
  }
  return 0.5 * (alpha + 1.0) * total;
}

RhoCurve rho_curve(const Problem& problem, const std::vector<double>& qs, const TrainConfig& cfg_in, std::size_t n,
                   std::uint64_t seed, std::size_t n_eval) {
  require(!qs.empty(), "rho_curve: empty Q list");
  for (std::size_t i = 0; i < qs.size(); ++i)
    require(qs[i] > 0 && (i == 0 || qs[i] > qs[i - 1]), "rho_curve: Q list must be positive and increasing");
  require(problem.binary(), "rho_curve: binary problem required");
  TrainConfig cfg = cfg_in;
  cfg.objective = Objective::margin;
  cfg.penalty = Penalty::none;
  const bool quadrature = problem.density_alpha.has_value() && problem.d == 1 && problem.name.rfind("touching", 0) == 0;

  const Dataset train = problem.sample(n, derive_seed(seed, 1));
  Dataset eval;
  if (!quadrature) eval = problem.sample(n_eval, derive_seed(seed, 2));

  RhoCurve out;
  std::vector<double> q_fit, r_fit;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    TrainConfig c = cfg;
    c.seed = derive_seed(seed, 100 + i);
    auto r = minimize_constrained(train, qs[i], c);
    cfg.init = r.net;
    RhoPoint pt;
    pt.q = qs[i];
    pt.rho = empirical_loss(r.net, train, c);
    pt.path_norm = path_norm(r.net);
    if (quadrature) {
      pt.population = touching_1d_population_risk(r.net, *problem.density_alpha, c.loss);
      pt.oracle = c.loss.kind() == LossKind::sqhinge ? touching_1d_oracle(qs[i], *problem.density_alpha) : kNaN;
    } else {
      pt.population = empirical_loss(r.net, eval, c);
      pt.oracle = kNaN;
    }
    for (const auto& d : r.trace.diagnostics) out.diagnostics.push_back("Q=" + std::to_string(qs[i]) + ": " + d);
    out.points.push_back(pt);
  }
  double best = std::numeric_limits<double>::infinity();
  for (auto& pt : out.points) {
    pt.noisy = pt.rho > best * (1 + 1e-9) + 1e-12;
    best = std::min(best, pt.rho);
    q_fit.push_back(pt.q);
    r_fit.push_back(pt.rho);
  }
  auto [slope, icpt] = loglog_fit(q_fit, r_fit, 1e-10, &out.fitted);
  out.exponent = slope;
  out.intercept = icpt;
  if (out.fitted < 2) out.diagnostics.push_back("fewer than two points above the floor; exponent undefined");
  return out;
}

BoundReport regression_harness(const Problem& problem, std::size_t m, std::size_t n, std::uint64_t seed,
                               const RegressionConfig& rc) {
  const auto t0 = std::chrono::steady_clock::now();
  require(problem.regression(), "regression_harness: regression problem required");
  require(m > 0 && n > 0 && !rc.qs.empty(), "regression_harness: need m, n > 0 and a Q list");
  BoundReport rep;
  rep.kind = BoundKind::regression;
  rep.problem = problem.name;

  const Dataset train = problem.sample(n, derive_seed(seed, 1));
  const Dataset eval = problem.sample(rc.n_eval, derive_seed(seed, 2));
  const double R = std::max(1.0, problem.radius);

  TrainConfig cfg = rc.train;
  cfg.m = m;
  cfg.objective = Objective::least_squares;
  cfg.radius = problem.radius;

  // Constrained least squares per Q, warm-started along the list.
  TrainConfig cc = cfg;
  cc.penalty = Penalty::none;
  cc.init.reset();
  std::vector<double> rho;
  double best_err = std::numeric_limits<double>::infinity();
  double small = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rc.qs.size(); ++i) {
    cc.seed = derive_seed(seed, 100 + i);
    auto r = minimize_constrained(train, rc.qs[i], cc);
    cc.init = r.net;
    const double err = empirical_loss(r.net, eval, cc);
    rho.push_back(err);
    rep.rho_points.emplace_back(rc.qs[i], err);
    best_err = std::min(best_err, err);
    small = std::min(small, 2.0 * (err + rc.qs[i] * rc.qs[i] * R * R / static_cast<double>(m)));
    if (i > 0 && err > rho[i - 1] * (1 + 1e-9) + 1e-12)
      rep.diagnostics.push_back("rho noise at Q=" + std::to_string(rc.qs[i]));
  }
  auto [c, g] = envelope_fit(rc.qs, rho, rc.rho_floor, rep.diagnostics);

  BoundParams& p = rep.params;
  p.R = problem.radius;
  p.m = static_cast<double>(m);
  p.n = static_cast<double>(n);
  p.d = static_cast<double>(problem.d);
  p.conf = rc.conf;
  p.rho_c = c;
  p.rho_exponent = g;

  cfg.penalty = Penalty::squared;
  cfg.lambda = R / std::sqrt(static_cast<double>(m));
  cfg.seed = derive_seed(seed, 3);
  rep.lambda = *cfg.lambda;
  auto fit = minimize_regularized(train, cfg);
  for (const auto& d : fit.trace.diagnostics) rep.diagnostics.push_back(d);
  rep.path_norm = path_norm(fit.net);
  rep.train_loss = empirical_loss(fit.net, train, cfg);
  rep.objective = penalized_objective(fit.net, train, cfg, rep.lambda);
  const auto losses = point_losses(fit.net, eval, cfg);
  rep.measured = mean_se(losses, rep.std_error);
  best_err = std::min(best_err, rep.measured);

  auto v = bound_rhs(BoundKind::regression, p);
  rep.rhs = v.value;
  rep.terms = v.terms;
  rep.competitor = competitor_objective(BoundKind::regression, p);
  rep.slack = rep.objective - rep.competitor;
  rep.optimizer_limited = rep.slack > 0.25 * rep.competitor;
  rep.pass = rep.measured <= rep.rhs + 2 * rep.std_error;
  rep.small_network_bound = small;
  rep.best_net_error = best_err;
  rep.small_network_ok = best_err <= small;
  rep.misclass = kNaN;
  rep.misclass_proxy = kNaN;
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

}  // namespace barron
