// One line per acceptance criterion: "[PASS|FAIL] <n> <name>: <details> (<seconds> s)".
// Arguments: criterion numbers to run (default all). Exit status 1 if any selected criterion fails.
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "barron/bounds.hpp"
#include "barron/complexity.hpp"
#include "barron/experiments.hpp"
#include "barron/io.hpp"
#include "barron/losses.hpp"
#include "barron/measure.hpp"
#include "barron/net.hpp"
#include "barron/problems.hpp"
#include "barron/rng.hpp"
#include "barron/train.hpp"

#ifndef ORACLE_TABLE
#define ORACLE_TABLE "tests/oracles/bound_oracle.json"
#endif

using namespace barron;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::uint64_t seed_base() {
  if (const char* s = std::getenv("BARRON_BOUNDS_SEED")) return std::stoull(s);
  return 20240607;
}

Outcome direct_rate() {
  const Problem p = separated_halfspaces(0.5, 1.0, 4);
  std::vector<std::size_t> ms;
  for (std::size_t m = 8; m <= 512; m *= 2) ms.push_back(m);
  const auto s = approx_sweep(p, ms, 20, 10000, ApproxMode::l2, seed_base() + 1);
  double worst = 0.0;
  for (const auto& r : s.rows) worst = std::max(worst, r.best_error / r.bound);
  const bool slope_ok = std::abs(s.slope_rms + 0.5) <= 0.15;
  return {s.all_pass && slope_ok,
          "max error/bound " + num(worst) + ", slope " + num(s.slope_rms) + " (target -0.5 +- 0.15)"};
}

Outcome rademacher() {
  bool ok = true;
  std::ostringstream os;
  for (std::size_t d : {1u, 3u}) {
    const auto rows = rademacher_sweep(d, {64, 256, 1024}, 1.0, 200, seed_base() + 2 + d, d == 1);
    for (const auto& r : rows) {
      ok = ok && r.estimate.mean <= r.estimate.bound;
      if (r.oracle) ok = ok && r.rel_diff <= 0.01;
      os << "d" << d << "/N" << r.estimate.n << " " << num(r.estimate.mean) << "<=" << num(r.estimate.bound);
      if (r.oracle) os << " (oracle " << num(r.rel_diff * 100) << "%)";
      os << "; ";
    }
  }
  return {ok, os.str()};
}

Outcome margins() {
  const Problem p = separated_halfspaces(0.5, 1.0, 2);
  const auto ex = margin_sweep(p, Loss::exponential(), 256, {1, 10, 100}, 20, 16, seed_base() + 3);
  const auto lg = margin_sweep(p, Loss::logistic(), 256, {100}, 20, 16, seed_base() + 3);
  const auto pw = margin_sweep(p, Loss::power(2.0, 1.0), 256, {100, 1000, 10000}, 20, 16, seed_base() + 3);
  double worst_exp = 0, worst_log = 0, worst_pow = 0;
  std::size_t pow_checked = 0;
  for (const auto& r : ex.rows) worst_exp = std::max(worst_exp, r.gap / r.allowed);
  for (const auto& r : lg.rows) worst_log = std::max(worst_log, r.gap / r.allowed);
  for (const auto& r : pw.rows)
    if (std::isfinite(r.allowed)) worst_pow = std::max(worst_pow, r.gap / std::abs(r.limit)), ++pow_checked;
  return {ex.all_pass && lg.all_pass && pw.all_pass && pow_checked > 0,
          "exp gap/allowed " + num(worst_exp) + ", logistic " + num(worst_log) + ", power rel drift " +
              num(worst_pow) + " over " + std::to_string(pow_checked) + " rows"};
}

Outcome risk_decay() {
  bool ok = true;
  std::ostringstream os;
  const Json table = Json::parse(read_text(TOUCHING_TABLE)).at("table");
  for (double alpha : {0.0, 1.0}) {
    TrainConfig cfg;
    cfg.m = 8;
    cfg.loss = Loss::sqhinge();
    cfg.restarts = 1;
    cfg.steps = 3000;
    const auto c = rho_curve(touching_1d(alpha), {4, 8, 16, 32}, cfg, 100000, seed_base() + 4);
    const Json& ref = table.at(alpha == 0.0 ? "alpha=0" : "alpha=1");
    double worst = 0, worst_convex = 0;
    bool bracketed = true;
    for (const auto& pt : c.points) {
      worst = std::max(worst, std::abs(pt.population - pt.oracle) / pt.oracle);
      const double convex = ref.at("rho").at(std::to_string(static_cast<int>(pt.q))).get<double>();
      worst_convex = std::max(worst_convex, std::abs(pt.population - convex) / convex);
      // Lipschitz constant <= Q forces |f(x)| <= Q|x| for the odd optimum
      bracketed = bracketed && pt.population >= touching_1d_oracle(2 * pt.q, alpha) && pt.population <= pt.oracle;
    }
    const bool exp_ok = std::abs(c.exponent + alpha + 1) <= 0.15;
    ok = ok && exp_ok && worst <= 0.05;
    os << "alpha=" << alpha << ": exponent " << num(c.exponent) << " (convex program "
       << num(ref.at("loglog_slope").get<double>()) << "), max rel err " << num(worst * 100)
       << "% vs closed form, " << num(worst_convex * 100) << "% vs convex program, "
       << (bracketed ? "inside" : "outside") << " [rho_cf(2Q), rho_cf(Q)]; ";
  }
  return {ok, os.str()};
}

Outcome apriori() {
  bool ok = true;
  std::ostringstream os;
  const Problem half = separated_halfspaces(0.5, 1.0, 2);
  const Problem sect = multiclass_sectors(3, 20.0, 1.0);
  const std::vector<std::pair<const Problem*, BoundKind>> runs{{&half, BoundKind::hinge},
                                                               {&half, BoundKind::logloss1},
                                                               {&half, BoundKind::logloss2},
                                                               {&sect, BoundKind::xent_lip},
                                                               {&sect, BoundKind::xent_smooth}};
  std::size_t limited = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    VerifyConfig vc;
    vc.kind = runs[i].second;
    vc.train.m = 64;
    vc.n_train = 4096;
    vc.n_eval = 100000;
    vc.conf = 0.1;
    vc.seed = derive_seed(seed_base() + 5, i);
    vc.train.seed = derive_seed(seed_base() + 50, i);
    const auto r = verify_apriori(*runs[i].first, vc);
    limited += r.optimizer_limited ? 1 : 0;
    ok = ok && r.pass && r.misclass_ok && !r.optimizer_limited;
    os << to_string(r.kind) << " " << num(r.measured) << "<=" << num(r.rhs) << (r.misclass_ok ? "" : " MISCLASS")
       << (r.optimizer_limited ? " LIMITED" : "") << "; ";
  }
  os << limited << " optimizer-limited";
  return {ok, os.str()};
}

Outcome radial() {
  const std::size_t d = 10;
  const Problem p = concentric_spheres(2.0, 1.0, d);
  const ParamMeasure pi = radial_classifier(2.0, 1.0, d);
  Rng rng(seed_base() + 6);
  std::vector<double> pts;
  std::vector<double> target;
  for (double r : {2.0, 1.0}) {
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> g(d);
      double s = 0;
      for (double& v : g) v = gaussian(rng), s += v * v;
      s = std::sqrt(s);
      for (double v : g) pts.push_back(r * v / s);
      target.push_back(r > 1.5 ? 1.0 : -1.0);
    }
  }
  const auto sampled = sample_network(pi, 2000, seed_base() + 7, 1, pts, ApproxMode::sup, 2.0);
  double worst = 0;
  for (std::size_t i = 0; i < target.size(); ++i)
    worst = std::max(worst, std::abs(eval_scalar(sampled.net, {pts.data() + i * d, d}) - target[i]));
  const double formula = 1 + 2 * 2.0 / 1.0 + 4 * std::sqrt(2 * M_PI * d + 1) / 1.0;
  const double norm = barron_norm_upper(pi);
  const bool ok = worst <= sampled.report.bound && norm <= formula + 1e-9 && p.known_q.upper &&
                  *p.known_q.upper <= formula + 1e-9 && path_norm(sampled.net, WeightNorm::l2) <= norm + 1e-9;
  return {ok, "sup |f -+ 1| " + num(worst) + " <= " + num(sampled.report.bound) + ", norm " + num(norm) +
                  " <= " + num(formula)};
}

Outcome formulas() {
  std::ifstream is(ORACLE_TABLE);
  if (!is) return {false, std::string("cannot open ") + ORACLE_TABLE};
  const Json t = Json::parse(is);
  auto val = [&](const char* k) { return std::stod(t.at(k).at("value").get<std::string>()); };
  BoundParams p;
  p.Q = 4, p.R = 1, p.m = 64, p.n = 4096, p.conf = 0.1, p.d = 2;
  const double h = bound_rhs(BoundKind::hinge, p).value;
  const double l = bound_rhs(BoundKind::logloss1, p).value;
  const double c = regression_constant(1.0, 1.0);
  const double eh = std::abs(h / val("hinge") - 1), el = std::abs(l / val("logloss1") - 1),
               ec = std::abs(c / val("regression_constant") - 1);
  return {eh <= 1e-3 && el <= 1e-3 && ec <= 1e-3,
          "hinge " + num(h) + ", logloss1 " + num(l) + ", C1 " + num(c) + "; max rel err " +
              num(std::max({eh, el, ec}))};
}

Outcome numerics() {
  Rng rng(seed_base() + 8);
  // Gradients against central differences.
  double worst_grad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 6, d = 3, k = 2;
    TwoLayerNet net = TwoLayerNet::zeros(m, d, k);
    for (double& v : net.a) v = gaussian(rng);
    for (double& v : net.w) v = gaussian(rng);
    for (double& v : net.b) v = gaussian(rng);
    std::vector<double> x(d), up(k);
    for (double& v : x) v = uniform(rng, -1, 1);
    for (double& v : up) v = gaussian(rng);
    bool near_kink = false;
    for (std::size_t i = 0; i < m; ++i) {
      double z = net.b[i];
      for (std::size_t j = 0; j < d; ++j) z += net.w[i * d + j] * x[j];
      near_kink = near_kink || std::abs(z) < 1e-3;
    }
    if (near_kink) continue;
    const NetGradient g = grad(net, x, up);
    auto f = [&](const TwoLayerNet& n) {
      const auto o = eval(n, x);
      return o[0] * up[0] + o[1] * up[1];
    };
    auto check = [&](std::vector<double> TwoLayerNet::*field, const std::vector<double>& an) {
      for (std::size_t i = 0; i < an.size(); ++i) {
        TwoLayerNet p = net, q = net;
        const double h = 1e-6;
        (p.*field)[i] += h;
        (q.*field)[i] -= h;
        const double fd = (f(p) - f(q)) / (2 * h);
        worst_grad = std::max(worst_grad, std::abs(fd - an[i]) / std::max(1.0, std::abs(an[i])));
      }
    };
    check(&TwoLayerNet::a, g.a);
    check(&TwoLayerNet::w, g.w);
    check(&TwoLayerNet::b, g.b);
  }
  // Rebalance preserves the function.
  double worst_rebalance = 0;
  for (int trial = 0; trial < 50; ++trial) {
    TwoLayerNet net = TwoLayerNet::zeros(8, 3, 1);
    for (double& v : net.a) v = 3 * gaussian(rng);
    for (double& v : net.w) v = 0.2 * gaussian(rng);
    for (double& v : net.b) v = gaussian(rng);
    const TwoLayerNet r = rebalance(net);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> x(3);
      for (double& v : x) v = uniform(rng, -2, 2);
      const double a = eval_scalar(net, x), b = eval_scalar(r, x);
      worst_rebalance = std::max(worst_rebalance, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
  }
  // Cross-entropy gradient and Hessian bounds.
  double worst_gnorm = 0, worst_eig = 0, worst_diam = 0;
  for (int probe = 0; probe < 1000; ++probe) {
    const std::size_t k = 2 + probe % 4;
    std::vector<std::vector<double>> labels(k, std::vector<double>(k));
    for (auto& y : labels)
      for (double& v : y) v = gaussian(rng);
    MultiClassLoss loss(labels);
    const double Y = loss.max_label_norm();
    std::vector<double> z(k);
    for (double& v : z) v = 3 * gaussian(rng);
    const int j = static_cast<int>(probe % k);
    const auto g = loss.gradient(z, j);
    double gn = 0;
    for (double v : g) gn += v * v;
    worst_gnorm = std::max(worst_gnorm, std::sqrt(gn) / Y);
    double diam = 0;
    for (const auto& yi : labels)
      for (const auto& yj : labels) {
        double s = 0;
        for (std::size_t c = 0; c < k; ++c) s += (yi[c] - yj[c]) * (yi[c] - yj[c]);
        diam = std::max(diam, std::sqrt(s));
      }
    worst_diam = std::max(worst_diam, std::sqrt(gn) / diam);
    const auto h = loss.hessian(z);
    Eigen::MatrixXd H(k, k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) H(static_cast<long>(r), static_cast<long>(c)) = h[r * k + c];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    worst_eig = std::max(worst_eig, es.eigenvalues().maxCoeff() / (2 * Y * Y));
  }
  // Margin-1 witnesses never beat the separation lower bound.
  double worst_witness = std::numeric_limits<double>::infinity();
  std::size_t witnesses = 0;
  auto witness = [&](const Problem& p, const TwoLayerNet& net) {
    const double lower = complexity_lower_separation(p);
    const Dataset s = p.sample(2000, derive_seed(seed_base(), 99 + witnesses));
    const double mm = min_margin(net, s);
    if (!(mm > 0)) return;
    const TwoLayerNet scaled = scale_outer(net, 1.0 / mm);
    worst_witness = std::min(worst_witness, path_norm(scaled, WeightNorm::l1) - (lower - 1e-6));
    ++witnesses;
  };
  for (double delta : {0.25, 0.5, 1.0}) {
    const Problem p = separated_halfspaces(delta, 1.0, 2);
    witness(p, draw_network(*p.witness, 64, rng));
    witness(p, draw_network(*p.witness, 512, rng));
  }
  {
    const Problem p = multiclass_sectors(3, 20.0, 1.0);
    witness(p, draw_network(*p.witness, 256, rng));
  }
  {
    const Problem p = separated_halfspaces(0.5, 1.0, 2);
    const Dataset s = p.sample(2000, seed_base() + 9);
    UpperBudget b;
    b.stages = 2;
    b.steps = 400;
    b.restarts = 1;
    b.audit_n = 20000;
    const auto est = complexity_upper_trained(p, s, 32, b, seed_base() + 10);
    if (est.witness) witness(p, *est.witness);
  }
  const bool ok = worst_grad <= 1e-5 && worst_rebalance <= 1e-9 && worst_gnorm <= 1 + 1e-12 &&
                  worst_eig <= 1 + 1e-12 && witnesses > 0 && worst_witness >= 0;
  return {ok, "grad rel err " + num(worst_grad) + ", rebalance " + num(worst_rebalance) + ", |grad|/Y " +
                  num(worst_gnorm) + " (label diameter ratio " + num(worst_diam) + "), eig/(2Y^2) " + num(worst_eig) + ", witness slack " + num(worst_witness) +
                  " over " + std::to_string(witnesses)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all{{1, "direct approximation rate", 60, direct_rate},
                                   {2, "Rademacher bound", 120, rademacher},
                                   {3, "margin functional convergence", 10, margins},
                                   {4, "risk decay law", 300, risk_decay},
                                   {5, "a priori bound harness", 600, apriori},
                                   {6, "radial construction", 60, radial},
                                   {7, "exact formula spot checks", 60, formulas},
                                   {8, "numerical analysis suite", 60, numerics}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all_ok = true;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget;
    const bool pass = o.pass && in_time;
    all_ok = all_ok && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.details << " ("
              << num(secs) << " s of " << num(c.budget) << (in_time ? ")" : ", over budget)") << std::endl;
  }
  return all_ok ? 0 : 1;
}
