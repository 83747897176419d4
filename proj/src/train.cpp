#include "barron/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "barron/error.hpp"
#include "barron/parallel.hpp"

namespace barron {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_objective(const Dataset& data, const TrainConfig& cfg) {
  require(data.size() > 0, "train: empty sample");
  switch (cfg.objective) {
    case Objective::margin: require(data.binary(), "train: margin objective needs binary labels"); break;
    case Objective::cross_entropy: require(!data.regression() && data.labels.size() >= 2, "train: cross-entropy needs class labels"); break;
    case Objective::least_squares: require(data.regression(), "train: least squares needs regression targets"); break;
  }
}

std::size_t out_dim(const Dataset& data, const TrainConfig& cfg) {
  return cfg.objective == Objective::cross_entropy ? data.out_dim() : 1;
}

// Full-batch forward/backward over a fixed sample.
class Workspace {
 public:
  Workspace(const Dataset& data, const TrainConfig& cfg)
      : data_(data), cfg_(cfg), n_(data.size()), d_(data.d), k_(out_dim(data, cfg)) {
    xt_.resize(d_ * n_);
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t j = 0; j < d_; ++j) xt_[j * n_ + p] = data.x[p * d_ + j];
    if (cfg.objective == Objective::margin) {
      y_.resize(n_);
      for (std::size_t p = 0; p < n_; ++p) y_[p] = data.binary_label(p);
    }
    f_.resize(n_ * k_);
    gf_.resize(n_ * k_);
    s_.resize(n_);
    logits_.resize(data.labels.size());
  }

  // Returns the empirical loss and fills gf_ with d loss / d f.
  double forward(const TwoLayerNet& net) {
    const std::size_t m = net.m;
    z_.resize(m * n_);
    std::fill(f_.begin(), f_.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double* zi = z_.data() + i * n_;
      std::fill(zi, zi + n_, net.b[i]);
      for (std::size_t j = 0; j < d_; ++j) {
        const double wij = net.w[i * d_ + j];
        if (wij == 0.0) continue;
        const double* xj = xt_.data() + j * n_;
        for (std::size_t p = 0; p < n_; ++p) zi[p] += wij * xj[p];
      }
      if (k_ == 1) {
        const double ai = net.a[i];
        if (ai == 0.0) continue;
        for (std::size_t p = 0; p < n_; ++p) f_[p] += ai * (zi[p] > 0.0 ? zi[p] : 0.0);
      } else {
        const double* ai = net.a.data() + i * k_;
        for (std::size_t p = 0; p < n_; ++p) {
          if (zi[p] <= 0.0) continue;
          for (std::size_t c = 0; c < k_; ++c) f_[p * k_ + c] += ai[c] * zi[p];
        }
      }
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (double& v : f_) v *= inv_m;
    return evaluate_loss();
  }

  // Loss of s f at the last forward point, without touching the stored state.
  double scaled_loss(double s) const {
    const double inv_n = 1.0 / static_cast<double>(n_);
    double total = 0.0;
    switch (cfg_.objective) {
      case Objective::margin:
        for (std::size_t p = 0; p < n_; ++p) total += cfg_.loss.value(-y_[p] * s * f_[p]);
        break;
      case Objective::least_squares:
        for (std::size_t p = 0; p < n_; ++p) {
          const double e = s * f_[p] - data_.target[p];
          total += e * e;
        }
        break;
      case Objective::cross_entropy: {
        const auto& labels = data_.labels;
        std::vector<double> logits(labels.size());
        for (std::size_t p = 0; p < n_; ++p) {
          const double* fp = f_.data() + p * k_;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            double v = 0.0;
            for (std::size_t c = 0; c < k_; ++c) v += s * fp[c] * labels[i][c];
            logits[i] = v;
          }
          total += log_sum_exp(logits) - logits[data_.cls[p]];
        }
        break;
      }
    }
    return total * inv_n;
  }

  // d/ds of scaled_loss at s = 1.
  double radial_derivative() const {
    double s = 0.0;
    for (std::size_t p = 0; p < f_.size(); ++p) s += gf_[p] * f_[p];
    return s;
  }

 private:
  double evaluate_loss() {
    const double inv_n = 1.0 / static_cast<double>(n_);
    double total = 0.0;
    switch (cfg_.objective) {
      case Objective::margin:
        for (std::size_t p = 0; p < n_; ++p) {
          const double zz = -y_[p] * f_[p];
          total += cfg_.loss.value(zz);
          gf_[p] = -y_[p] * cfg_.loss.derivative(zz) * inv_n;
        }
        break;
      case Objective::least_squares:
        for (std::size_t p = 0; p < n_; ++p) {
          const double e = f_[p] - data_.target[p];
          total += e * e;
          gf_[p] = 2.0 * e * inv_n;
        }
        break;
      case Objective::cross_entropy: {
        const auto& labels = data_.labels;
        for (std::size_t p = 0; p < n_; ++p) {
          const double* fp = f_.data() + p * k_;
          double mx = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < labels.size(); ++i) {
            double v = 0.0;
            for (std::size_t c = 0; c < k_; ++c) v += fp[c] * labels[i][c];
            logits_[i] = v;
            mx = std::max(mx, v);
          }
          double se = 0.0;
          for (double v : logits_) se += std::exp(v - mx);
          const double lse = mx + std::log(se);
          const int j = data_.cls[p];
          total += lse - logits_[j];
          double* gp = gf_.data() + p * k_;
          for (std::size_t c = 0; c < k_; ++c) gp[c] = -labels[j][c];
          for (std::size_t i = 0; i < labels.size(); ++i) {
            const double pr = std::exp(logits_[i] - lse);
            for (std::size_t c = 0; c < k_; ++c) gp[c] += pr * labels[i][c];
          }
          for (std::size_t c = 0; c < k_; ++c) gp[c] *= inv_n;
        }
        break;
      }
    }
    return total * inv_n;
  }

 public:
  double min_margin() const {
    double best = std::numeric_limits<double>::infinity();
    switch (cfg_.objective) {
      case Objective::margin:
        for (std::size_t p = 0; p < n_; ++p) best = std::min(best, y_[p] * f_[p]);
        return best;
      case Objective::cross_entropy:
        for (std::size_t p = 0; p < n_; ++p)
          best = std::min(best, multiclass_margin({f_.data() + p * k_, k_}, data_.cls[p], data_.labels));
        return best;
      case Objective::least_squares: return kNaN;
    }
    return kNaN;
  }

  // Data gradient at the last forward point.
  void backward(const TwoLayerNet& net, NetGradient& g) {
    const std::size_t m = net.m;
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double* zi = z_.data() + i * n_;
      const double* ai = net.a.data() + i * k_;
      for (std::size_t c = 0; c < k_; ++c) {
        double acc = 0.0;
        for (std::size_t p = 0; p < n_; ++p) acc += (zi[p] > 0.0 ? zi[p] : 0.0) * gf_[p * k_ + c];
        g.a[i * k_ + c] = acc * inv_m;
      }
      double sb = 0.0;
      if (k_ == 1) {
        for (std::size_t p = 0; p < n_; ++p) {
          s_[p] = zi[p] > 0.0 ? ai[0] * gf_[p] : 0.0;
          sb += s_[p];
        }
      } else {
        for (std::size_t p = 0; p < n_; ++p) {
          double v = 0.0;
          if (zi[p] > 0.0)
            for (std::size_t c = 0; c < k_; ++c) v += ai[c] * gf_[p * k_ + c];
          s_[p] = v;
          sb += v;
        }
      }
      g.b[i] = sb * inv_m;
      for (std::size_t j = 0; j < d_; ++j) {
        const double* xj = xt_.data() + j * n_;
        double acc = 0.0;
        for (std::size_t p = 0; p < n_; ++p) acc += s_[p] * xj[p];
        g.w[i * d_ + j] = acc * inv_m;
      }
    }
  }

  std::size_t k() const { return k_; }

 private:
  const Dataset& data_;
  const TrainConfig& cfg_;
  std::size_t n_, d_, k_;
  std::vector<double> xt_, y_, z_, f_, gf_, s_, logits_;
};

double penalty_value(Penalty p, double lambda, double norm) {
  switch (p) {
    case Penalty::none: return 0.0;
    case Penalty::linear: return lambda * norm;
    case Penalty::squared: return (lambda * norm) * (lambda * norm);
  }
  return 0.0;
}

// Adds the gradient of the penalty applied to the surrogate.
void add_penalty_gradient(const TwoLayerNet& net, const TrainConfig& cfg, double lambda, NetGradient& g) {
  if (cfg.penalty == Penalty::none) return;
  double scale = lambda;
  if (cfg.penalty == Penalty::squared) scale = 2.0 * lambda * lambda * l2_surrogate(net, cfg.norm);
  const double inv_m = 1.0 / static_cast<double>(net.m);
  for (std::size_t i = 0; i < net.m; ++i) {
    for (std::size_t c = 0; c < net.k; ++c) g.a[i * net.k + c] += scale * net.a[i * net.k + c] * inv_m;
    const auto wi = net.inner(i);
    const double r = inner_norm(wi, net.b[i], cfg.norm);
    if (r == 0.0) continue;
    double l2 = 0.0;
    if (cfg.norm == WeightNorm::l2)
      for (double v : wi) l2 += v * v;
    l2 = std::sqrt(l2);
    for (std::size_t j = 0; j < net.d; ++j) {
      double dj = 0.0;
      if (cfg.norm == WeightNorm::l1)
        dj = wi[j] > 0.0 ? 1.0 : (wi[j] < 0.0 ? -1.0 : 0.0);
      else if (l2 > 0.0)
        dj = wi[j] / l2;
      g.w[i * net.d + j] += scale * r * dj * inv_m;
    }
    const double db = net.b[i] > 0.0 ? 1.0 : (net.b[i] < 0.0 ? -1.0 : 0.0);
    g.b[i] += scale * r * db * inv_m;
  }
}

TwoLayerNet random_init(std::size_t m, std::size_t d, std::size_t k, double scale, Rng& rng) {
  TwoLayerNet net = TwoLayerNet::zeros(m, d, k);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> e(d + 1);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (double& v : e) {
      v = expo(rng);
      s += v;
    }
    for (std::size_t j = 0; j < d; ++j) net.w[i * d + j] = scale * rademacher_sign(rng) * e[j] / s;
    net.b[i] = scale * rademacher_sign(rng) * e[d] / s;
  }
  return net;
}

struct RestartOutcome {
  TwoLayerNet best;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> rows;
  std::string diagnostic;
  bool still_improving = false;
};

TwoLayerNet initial_net(const Dataset& data, const TrainConfig& cfg, std::size_t restart, Rng& rng) {
  const std::size_t k = out_dim(data, cfg);
  TwoLayerNet net = (restart == 0 && cfg.init) ? *cfg.init : random_init(cfg.m, data.d, k, cfg.init_scale, rng);
  require(net.m == cfg.m && net.d == data.d && net.k == k, "train: initial net has the wrong shape");
  return net;
}

// Penalized descent on the surrogate, best iterate by the exact objective.
RestartOutcome run_restart(const Dataset& data, const TrainConfig& cfg, double lambda, std::size_t restart) {
  Rng rng(derive_seed(cfg.seed, restart));
  TwoLayerNet net = initial_net(data, cfg, restart, rng);

  Workspace ws(data, cfg);
  NetGradient g{std::vector<double>(net.a.size()), std::vector<double>(net.w.size()), std::vector<double>(net.b.size())};
  RestartOutcome out;
  out.best = net;
  const std::size_t tail_start = cfg.steps - cfg.steps / 10;
  double value_at_tail = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t <= cfg.steps; ++t) {
    const bool checkpoint = t % cfg.rebalance_every == 0 || t == cfg.steps;
    if (checkpoint) net = rebalance(net, cfg.norm);
    const double loss = ws.forward(net);
    if (checkpoint) {
      const double pn = path_norm(net, cfg.norm);
      const double obj = loss + penalty_value(cfg.penalty, lambda, pn);
      if (!std::isfinite(obj) || obj > cfg.divergence_limit) {
        out.diagnostic = "restart " + std::to_string(restart) + " diverged at epoch " + std::to_string(t);
        break;
      }
      if (obj < out.best_value) {
        out.best_value = obj;
        out.best = net;
      }
      if (t == tail_start) value_at_tail = out.best_value;
      if (t % cfg.trace_every == 0 || t == cfg.steps)
        out.rows.push_back({restart, t, obj, loss, pn, ws.min_margin()});
    }
    if (t == cfg.steps) break;
    ws.backward(net, g);
    add_penalty_gradient(net, cfg, lambda, g);
    const double step = cfg.lr / (1.0 + static_cast<double>(t) / cfg.lr_decay_epochs) * static_cast<double>(net.m);
    for (std::size_t i = 0; i < net.a.size(); ++i) net.a[i] -= step * g.a[i];
    for (std::size_t i = 0; i < net.w.size(); ++i) net.w[i] -= step * g.w[i];
    for (std::size_t i = 0; i < net.b.size(); ++i) net.b[i] -= step * g.b[i];
  }
  if (std::isfinite(value_at_tail) && value_at_tail - out.best_value > 1e-3 * std::max(out.best_value, 1e-12))
    out.still_improving = true;
  return out;
}

// Minimizes phi(s) = loss(s f) over [lo, hi]; phi is convex for every objective here.
double radial_search(const Workspace& ws, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = ws.scaled_loss(c), fd = ws.scaled_loss(d);
  for (int it = 0; it < 40 && b - a > 1e-9 * hi; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = ws.scaled_loss(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = ws.scaled_loss(d);
    }
  }
  return fc <= fd ? c : d;
}

// Projected descent with backtracking on {path_norm <= Q}, each step followed by an exact search along the ray
// s -> s f inside the ball. Best iterate by empirical loss.
RestartOutcome run_constrained(const Dataset& data, const TrainConfig& cfg, double Q, std::size_t restart) {
  Rng rng(derive_seed(cfg.seed, restart));
  TwoLayerNet net = project_to_ball(rebalance(initial_net(data, cfg, restart, rng), cfg.norm), Q, cfg.norm);
  Workspace ws(data, cfg);
  NetGradient g{std::vector<double>(net.a.size()), std::vector<double>(net.w.size()), std::vector<double>(net.b.size())};
  RestartOutcome out;
  const std::size_t tail_start = cfg.steps - cfg.steps / 10;
  double value_at_tail = std::numeric_limits<double>::infinity();
  double eta = cfg.lr * static_cast<double>(net.m);
  const double eta_floor = eta * 1e-12;
  double loss = ws.forward(net);

  auto radial = [&]() {
    const double pn = path_norm(net, cfg.norm);
    if (pn == 0.0) return;
    const double slope = ws.radial_derivative();
    double s = 1.0;
    if (slope < 0.0 && pn < Q * (1.0 - 1e-12))
      s = radial_search(ws, 1.0, Q / pn);
    else if (slope > 0.0)
      s = radial_search(ws, 0.0, 1.0);
    if (s == 1.0 || ws.scaled_loss(s) >= loss) return;
    net = scale_outer(net, s);
    loss = ws.forward(net);
  };
  radial();

  for (std::size_t t = 0; t <= cfg.steps; ++t) {
    if (!std::isfinite(loss) || loss > cfg.divergence_limit) {
      out.diagnostic = "restart " + std::to_string(restart) + " diverged at epoch " + std::to_string(t);
      break;
    }
    if (loss < out.best_value) {
      out.best_value = loss;
      out.best = net;
    }
    if (t == tail_start) value_at_tail = out.best_value;
    if (t % cfg.trace_every == 0 || t == cfg.steps)
      out.rows.push_back({restart, t, loss, loss, path_norm(net, cfg.norm), ws.min_margin()});
    if (t == cfg.steps || eta < eta_floor) break;

    ws.backward(net, g);
    TwoLayerNet trial;
    double trial_loss = loss;
    while (eta >= eta_floor) {
      trial = net;
      for (std::size_t i = 0; i < trial.a.size(); ++i) trial.a[i] -= eta * g.a[i];
      for (std::size_t i = 0; i < trial.w.size(); ++i) trial.w[i] -= eta * g.w[i];
      for (std::size_t i = 0; i < trial.b.size(); ++i) trial.b[i] -= eta * g.b[i];
      trial = project_to_ball(rebalance(trial, cfg.norm), Q, cfg.norm);
      trial_loss = ws.forward(trial);
      if (trial_loss < loss) break;
      eta *= 0.5;
    }
    if (trial_loss < loss) {
      net = std::move(trial);
      loss = trial_loss;
      eta *= 1.5;
      radial();
    } else {
      loss = ws.forward(net);
    }
  }
  if (out.best.m == 0) out.best = net;
  if (std::isfinite(value_at_tail) && value_at_tail - out.best_value > 1e-3 * std::max(out.best_value, 1e-12))
    out.still_improving = true;
  return out;
}

TrainResult finish(const Dataset& data, const TrainConfig& cfg, double lambda, std::vector<RestartOutcome> runs,
                   double seconds) {
  TrainResult res;
  auto& tr = res.trace;
  tr.lambda = lambda;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].best_value < runs[best].best_value) best = r;
    tr.rows.insert(tr.rows.end(), runs[r].rows.begin(), runs[r].rows.end());
    if (!runs[r].diagnostic.empty()) tr.diagnostics.push_back(runs[r].diagnostic);
  }
  tr.best_restart = best;
  tr.budget_exhausted = runs[best].still_improving;
  if (tr.budget_exhausted) tr.diagnostics.push_back("best restart was still improving at the end of the budget");
  res.net = runs[best].best;
  tr.net = res.net;
  tr.risk = empirical_loss(res.net, data, cfg);
  tr.path_norm = path_norm(res.net, cfg.norm);
  tr.objective = tr.risk + penalty_value(cfg.penalty, lambda, tr.path_norm);
  tr.min_margin = min_margin(res.net, data);
  tr.wall_seconds = seconds;
  return res;
}

void check_config(const TrainConfig& cfg) {
  require(cfg.m >= 1, "train: m must be positive");
  require(cfg.restarts >= 1, "train: restarts must be positive");
  require(cfg.rebalance_every >= 1 && cfg.trace_every >= 1, "train: periods must be positive");
  require(cfg.lr > 0.0 && cfg.lr_decay_epochs > 0.0, "train: step size schedule must be positive");
}

}  // namespace

double default_lambda(const TrainConfig& cfg, const Dataset& data) {
  if (cfg.lambda) return *cfg.lambda;
  const double R = cfg.radius ? *cfg.radius : data.radius(cfg.norm);
  return std::max(1.0, R) / std::sqrt(static_cast<double>(cfg.m));
}

double empirical_loss(const TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg) {
  check_objective(data, cfg);
  switch (cfg.objective) {
    case Objective::margin: return risk(net, cfg.loss, data);
    case Objective::cross_entropy: return xent_risk(net, data);
    case Objective::least_squares: {
      double s = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = eval(net, data.point(i))[0] - data.target[i];
        s += e * e;
      }
      return s / static_cast<double>(data.size());
    }
  }
  return kNaN;
}

double penalized_objective(const TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg, double lambda) {
  return empirical_loss(net, data, cfg) + penalty_value(cfg.penalty, lambda, path_norm(net, cfg.norm));
}

double min_margin(const TwoLayerNet& net, const Dataset& data) {
  if (data.regression()) return kNaN;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto h = eval(net, data.point(i));
    best = std::min(best, data.binary() ? data.binary_label(i) * h[0] : multiclass_margin(h, data.cls[i], data.labels));
  }
  return best;
}

TwoLayerNet project_to_ball(const TwoLayerNet& net, double Q, WeightNorm norm) {
  require(Q >= 0.0, "project_to_ball: Q must be nonnegative");
  const double pn = path_norm(net, norm);
  if (pn <= Q) return net;
  return scale_outer(net, Q / pn);
}

TrainResult minimize_regularized(const Dataset& data, const TrainConfig& cfg) {
  check_config(cfg);
  check_objective(data, cfg);
  const double lambda = cfg.penalty == Penalty::none ? 0.0 : default_lambda(cfg, data);
  require(cfg.penalty == Penalty::none || lambda > 0.0, "train: lambda must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  auto runs = parallel_map(cfg.restarts, cfg.jobs, [&](std::size_t r) { return run_restart(data, cfg, lambda, r); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(data, cfg, lambda, std::move(runs), secs);
}

TrainResult minimize_constrained(const Dataset& data, double Q, const TrainConfig& cfg) {
  check_config(cfg);
  check_objective(data, cfg);
  require(Q >= 0.0, "minimize_constrained: Q must be nonnegative");
  TrainConfig plain = cfg;
  plain.penalty = Penalty::none;
  const auto t0 = std::chrono::steady_clock::now();
  auto runs = parallel_map(plain.restarts, plain.jobs, [&](std::size_t r) { return run_constrained(data, plain, Q, r); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(data, plain, 0.0, std::move(runs), secs);
}

}  // namespace barron
