#include "barron/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barron/bounds.hpp"
#include "barron/error.hpp"
#include "barron/parallel.hpp"
#include "barron/rng.hpp"

namespace barron {

ApproxSweep approx_sweep(const Problem& problem, const std::vector<std::size_t>& ms, std::size_t best_of,
                         std::size_t n_validation, ApproxMode mode, std::uint64_t seed, std::size_t jobs) {
  require(problem.witness.has_value(), "approx_sweep: problem " + problem.name + " has no witness measure");
  require(!ms.empty() && best_of > 0 && n_validation > 0, "approx_sweep: empty sweep");
  const Dataset val = problem.sample(n_validation, derive_seed(seed, 0));
  ApproxSweep out;
  out.all_pass = true;
  std::vector<double> x, rms, best;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    auto s = sample_network(*problem.witness, ms[i], derive_seed(seed, 1 + i), best_of, val.x, mode, problem.radius,
                            jobs);
    out.all_pass = out.all_pass && s.report.pass;
    x.push_back(static_cast<double>(ms[i]));
    rms.push_back(s.report.rms_error);
    best.push_back(s.report.best_error);
    out.rows.push_back(std::move(s.report));
  }
  out.slope_rms = loglog_fit(x, rms).first;
  out.slope_best = loglog_fit(x, best).first;
  return out;
}

std::vector<RademacherRow> rademacher_sweep(std::size_t d, const std::vector<std::size_t>& ns, double Q,
                                            std::size_t trials, std::uint64_t seed, bool with_oracle,
                                            const PgaConfig& pga, std::size_t jobs) {
  require(d > 0 && !ns.empty() && trials > 0, "rademacher_sweep: empty sweep");
  require(!with_oracle || d <= 2, "rademacher_sweep: grid oracle needs d <= 2");
  std::vector<RademacherRow> rows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    Rng rng(derive_seed(seed, 1000 + i));
    std::vector<double> pts(ns[i] * d);
    for (double& v : pts) v = uniform(rng, -1.0, 1.0);
    const std::uint64_t s = derive_seed(seed, i);
    RademacherRow row;
    row.estimate = rademacher_estimate(pts, d, Q, trials, s, pga, jobs);
    if (with_oracle) {
      row.oracle = d == 1 ? rademacher_brute_1d(pts, Q, trials, s) : rademacher_brute_2d(pts, Q, trials, s);
      row.rel_diff = std::abs(row.estimate.mean - row.oracle->mean) / row.oracle->mean;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MarginSweep margin_sweep(const Problem& problem, const Loss& loss, std::size_t n, const std::vector<double>& lambdas,
                         std::size_t nets, std::size_t m, std::uint64_t seed, double min_abs) {
  require(loss.invertible(), "margin_sweep: loss must be invertible");
  require(n > 0 && nets > 0 && m > 0 && !lambdas.empty(), "margin_sweep: empty sweep");
  require(min_abs > 0 && min_abs < 1, "margin_sweep: min_abs must lie in (0,1)");
  MarginSweep out;
  out.all_pass = true;
  const std::size_t d = problem.d;
  for (std::size_t t = 0; t < nets; ++t) {
    Rng rng(derive_seed(seed, t));
    TwoLayerNet net = TwoLayerNet::zeros(m, d, 1);
    for (double& v : net.a) v = gaussian(rng);
    for (double& v : net.w) v = gaussian(rng);
    for (double& v : net.b) v = 0.5 * gaussian(rng);

    const Dataset pool = problem.sample(4 * n, derive_seed(seed, 10000 + t));
    std::vector<double> f(pool.size());
    eval_batch(net, pool.x, f);
    std::vector<double> mag(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) mag[i] = std::abs(f[i]);
    std::nth_element(mag.begin(), mag.begin() + static_cast<long>(mag.size() / 2), mag.end());
    const double median = mag[mag.size() / 2];
    require(median > 0, "margin_sweep: degenerate random net");
    net = scale_outer(net, 1.0 / median);

    Dataset data;
    data.d = d;
    data.labels = {{1.0}, {-1.0}};
    for (std::size_t i = 0; i < pool.size() && data.size() < n; ++i) {
      const double v = f[i] / median;
      if (std::abs(v) < min_abs) continue;
      auto p = pool.point(i);
      data.x.insert(data.x.end(), p.begin(), p.end());
      data.cls.push_back(v > 0 ? 0 : 1);
    }
    require(data.size() == n, "margin_sweep: too few points with |f| >= min_abs");

    const auto z = negative_margins(net, data);
    const double limit = *std::max_element(z.begin(), z.end());
    const double lognn = std::log(static_cast<double>(n));
    std::optional<double> reference;
    for (double lam : lambdas) {
      MarginRow row;
      row.net = t;
      row.lambda = lam;
      row.functional = margin_functional(loss, z, lam);
      row.limit = limit;
      switch (loss.kind()) {
        case LossKind::exp:
          row.gap = std::abs(row.functional - limit);
          row.allowed = lognn / lam;
          row.pass = row.gap <= row.allowed;
          break;
        case LossKind::logistic:
          row.gap = std::abs(row.functional - limit);
          row.allowed = lognn / lam + 1e-3;
          row.pass = lam < 100 || row.gap <= row.allowed;
          break;
        case LossKind::power:
          if (lam * -limit > loss.mu_cut()) {
            if (!reference) reference = row.functional;
            row.limit = *reference;
            row.gap = std::abs(row.functional - *reference);
            row.allowed = 1e-12 * std::abs(*reference);
          } else {
            row.limit = row.functional;
            row.allowed = std::numeric_limits<double>::infinity();
          }
          row.pass = row.gap <= row.allowed;
          break;
        default: throw ContractError("margin_sweep: unsupported loss " + loss.token());
      }
      out.all_pass = out.all_pass && row.pass;
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace barron
