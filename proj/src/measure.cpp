#include "barron/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "barron/error.hpp"
#include "barron/parallel.hpp"

namespace barron {

namespace {

double dual_norm(std::span<const double> x, WeightNorm norm) {
  double s = 0.0;
  if (norm == WeightNorm::l1) {
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
  }
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double atom_norm(const Atom& at, WeightNorm norm) { return outer_norm(at.a) * inner_norm(at.w, at.b, norm); }

struct AtomTable {
  std::vector<double> cumulative;
  std::vector<Atom> atoms;  // rescaled so each carries the total norm
};

AtomTable normalized_atoms(const DiscreteMeasure& mu) {
  double total = 0.0;
  for (const auto& at : mu.atoms) total += at.weight * atom_norm(at, mu.norm);
  AtomTable table;
  if (total <= 0.0) return table;
  double acc = 0.0;
  for (const auto& at : mu.atoms) {
    const double n = atom_norm(at, mu.norm);
    if (at.weight <= 0.0 || n <= 0.0) continue;
    Atom scaled = at;
    for (double& v : scaled.a) v *= total / n;
    acc += at.weight * n / total;
    table.cumulative.push_back(acc);
    table.atoms.push_back(std::move(scaled));
  }
  table.cumulative.back() = 1.0;
  return table;
}

}  // namespace

double c_d(std::size_t d) {
  require(d >= 1, "c_d: dimension must be positive");
  const double h = static_cast<double>(d);
  return std::sqrt(std::numbers::pi) * h * std::exp(std::lgamma(h / 2.0) - std::lgamma((h + 1.0) / 2.0));
}

double sphere_relu_normalizer(std::size_t d) {
  require(d >= 1, "sphere_relu_normalizer: dimension must be positive");
  const double h = static_cast<double>(d);
  return 2.0 * std::sqrt(std::numbers::pi) * std::exp(std::lgamma((h + 1.0) / 2.0) - std::lgamma(h / 2.0));
}

void validate(const ParamMeasure& pi) {
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) {
    require(!mu->atoms.empty(), "measure: no atoms");
    require(mu->k >= 1, "measure: output dimension must be positive");
    double total = 0.0;
    for (const auto& at : mu->atoms) {
      require(at.weight >= 0.0, "measure: negative atom weight");
      require(at.a.size() == mu->k && at.w.size() == mu->d, "measure: atom shape mismatch");
      total += at.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "measure: atom weights must sum to 1");
  } else {
    const auto& r = std::get<RadialMeasure>(pi);
    require(r.d >= 1, "measure: radial dimension must be positive");
    require(std::isfinite(r.alpha) && std::isfinite(r.beta), "measure: radial parameters must be finite");
  }
}

std::size_t input_dim(const ParamMeasure& pi) {
  return std::visit([](const auto& mu) { return mu.d; }, pi);
}

std::size_t output_dim(const ParamMeasure& pi) {
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) return mu->k;
  return 1;
}

WeightNorm weight_norm(const ParamMeasure& pi) {
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) return mu->norm;
  return WeightNorm::l2;
}

double barron_norm_upper(const ParamMeasure& pi) {
  validate(pi);
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) {
    double s = 0.0;
    for (const auto& at : mu->atoms) s += at.weight * atom_norm(at, mu->norm);
    return s;
  }
  const auto& r = std::get<RadialMeasure>(pi);
  return std::abs(r.alpha) + sphere_relu_normalizer(r.d) * std::abs(r.beta);
}

std::vector<double> measure_eval(const ParamMeasure& pi, std::span<const double> x) {
  require(x.size() == input_dim(pi), "measure_eval: input dimension mismatch");
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) {
    std::vector<double> out(mu->k, 0.0);
    for (const auto& at : mu->atoms) {
      double z = at.b;
      for (std::size_t j = 0; j < mu->d; ++j) z += at.w[j] * x[j];
      if (z <= 0.0) continue;
      for (std::size_t c = 0; c < mu->k; ++c) out[c] += at.weight * at.a[c] * z;
    }
    return out;
  }
  const auto& r = std::get<RadialMeasure>(pi);
  return {r.alpha + r.beta * dual_norm(x, WeightNorm::l2)};
}

ParamMeasure halfspace_classifier(double delta, std::size_t d) {
  require(delta > 0.0, "halfspace_classifier: delta must be positive");
  require(d >= 1, "halfspace_classifier: dimension must be positive");
  DiscreteMeasure mu;
  mu.d = d;
  mu.k = 1;
  Atom plus{0.5, {4.0 / delta}, std::vector<double>(d, 0.0), 0.0};
  Atom minus{0.5, {-4.0 / delta}, std::vector<double>(d, 0.0), 0.0};
  plus.w[0] = 1.0;
  minus.w[0] = -1.0;
  mu.atoms = {plus, minus};
  return mu;
}

ParamMeasure radial_classifier(double outer, double inner, std::size_t d) {
  require(inner > 0.0 && outer > inner, "radial_classifier: need outer > inner > 0");
  const double gap = outer - inner;
  return RadialMeasure{1.0 - 2.0 * outer / gap, 2.0 / gap, d};
}

ParamMeasure linear_map_measure(std::span<const double> A, std::size_t k, std::size_t d) {
  require(k >= 1 && d >= 1 && A.size() == k * d, "linear_map_measure: shape mismatch");
  DiscreteMeasure mu;
  mu.d = d;
  mu.k = k;
  const double p = 1.0 / static_cast<double>(2 * d);
  for (std::size_t l = 0; l < d; ++l) {
    for (int s : {1, -1}) {
      Atom at{p, std::vector<double>(k), std::vector<double>(d, 0.0), 0.0};
      at.w[l] = s;
      for (std::size_t c = 0; c < k; ++c) at.a[c] = s * static_cast<double>(2 * d) * A[c * d + l];
      mu.atoms.push_back(std::move(at));
    }
  }
  return mu;
}

TwoLayerNet draw_network(const ParamMeasure& pi, std::size_t m, Rng& rng) {
  require(m >= 1, "draw_network: m must be positive");
  validate(pi);
  const std::size_t d = input_dim(pi);
  TwoLayerNet net = TwoLayerNet::zeros(m, d, output_dim(pi));
  if (const auto* mu = std::get_if<DiscreteMeasure>(&pi)) {
    const AtomTable table = normalized_atoms(*mu);
    if (table.atoms.empty()) return net;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = uniform01(rng);
      const auto it = std::upper_bound(table.cumulative.begin(), table.cumulative.end(), u);
      const std::size_t idx = std::min<std::size_t>(it - table.cumulative.begin(), table.atoms.size() - 1);
      const Atom& at = table.atoms[idx];
      std::copy(at.a.begin(), at.a.end(), net.outer(i).begin());
      std::copy(at.w.begin(), at.w.end(), net.inner(i).begin());
      net.b[i] = at.b;
    }
    return net;
  }
  const auto& r = std::get<RadialMeasure>(pi);
  const double sphere_mass = sphere_relu_normalizer(d) * std::abs(r.beta);
  const double total = std::abs(r.alpha) + sphere_mass;
  if (total <= 0.0) return net;
  const double p_const = std::abs(r.alpha) / total;
  for (std::size_t i = 0; i < m; ++i) {
    if (uniform01(rng) < p_const) {
      net.a[i] = std::copysign(total, r.alpha);
      net.b[i] = 1.0;
      continue;
    }
    net.a[i] = std::copysign(total, r.beta);
    auto wi = net.inner(i);
    double s = 0.0;
    do {
      s = 0.0;
      for (double& v : wi) {
        v = gaussian(rng);
        s += v * v;
      }
    } while (s == 0.0);
    s = std::sqrt(s);
    for (double& v : wi) v /= s;
  }
  return net;
}

SampledNetwork sample_network(const ParamMeasure& pi, std::size_t m, std::uint64_t seed, std::size_t best_of,
                              std::span<const double> validation, ApproxMode mode, std::optional<double> radius,
                              std::size_t jobs) {
  require(m >= 1, "sample_network: m must be positive");
  require(best_of >= 1, "sample_network: best_of must be positive");
  validate(pi);
  const std::size_t d = input_dim(pi);
  const std::size_t k = output_dim(pi);
  require(!validation.empty() && validation.size() % d == 0, "sample_network: validation sample is empty or malformed");
  const std::size_t n = validation.size() / d;
  const WeightNorm norm = weight_norm(pi);

  std::vector<double> target(n * k);
  double r_max = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto x = validation.subspan(p * d, d);
    const auto v = measure_eval(pi, x);
    std::copy(v.begin(), v.end(), target.begin() + p * k);
    r_max = std::max(r_max, dual_norm(x, norm));
  }

  struct Trial {
    TwoLayerNet net;
    double error;
  };
  auto run_trial = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    Trial trial{draw_network(pi, m, rng), 0.0};
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const auto f = eval(trial.net, validation.subspan(p * d, d));
      double e2 = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double e = f[c] - target[p * k + c];
        e2 += e * e;
      }
      acc = mode == ApproxMode::l2 ? acc + e2 : std::max(acc, std::sqrt(e2));
    }
    trial.error = mode == ApproxMode::l2 ? std::sqrt(acc / static_cast<double>(n)) : acc;
    return trial;
  };
  auto trials = parallel_map(best_of, jobs, run_trial);

  SampledNetwork out;
  auto& rep = out.report;
  rep.m = m;
  rep.trials = best_of;
  rep.mode = mode;
  rep.best_error = std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    rep.trial_errors.push_back(trials[t].error);
    sq += trials[t].error * trials[t].error;
    if (trials[t].error < rep.best_error) {
      rep.best_error = trials[t].error;
      rep.best_trial = t;
    }
  }
  rep.rms_error = std::sqrt(sq / static_cast<double>(trials.size()));
  rep.source_norm = barron_norm_upper(pi);
  rep.radius = radius.value_or(r_max);
  const double scale = rep.source_norm * std::max(1.0, rep.radius);
  const double md = static_cast<double>(m);
  rep.bound = mode == ApproxMode::l2 ? scale / std::sqrt(md)
                                     : scale * std::sqrt(static_cast<double>(k * (d + 1)) / md);
  out.net = std::move(trials[rep.best_trial].net);
  rep.net_path_norm = path_norm(out.net, norm);
  rep.pass = rep.best_error <= rep.bound;
  return out;
}

}  // namespace barron
