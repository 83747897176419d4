#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barron/losses.hpp"
#include "barron/net.hpp"
#include "barron/problems.hpp"

namespace barron {

enum class Penalty { none, linear, squared };
// margin: binary loss of -y f(x); cross_entropy: softmax over label logits; least_squares: (f - target)^2.
enum class Objective { margin, cross_entropy, least_squares };

struct TrainConfig {
  std::size_t m = 64;
  Penalty penalty = Penalty::linear;
  // Defaults to max{1,R}/sqrt(m).
  std::optional<double> lambda;
  // R for the default lambda; the data radius when absent.
  std::optional<double> radius;
  Objective objective = Objective::margin;
  Loss loss = Loss::hinge();
  std::size_t steps = 2000;
  double lr = 0.1;
  double lr_decay_epochs = 200.0;
  std::size_t restarts = 8;
  std::size_t rebalance_every = 10;
  std::size_t trace_every = 50;
  double init_scale = 1.0;
  WeightNorm norm = WeightNorm::l1;
  double divergence_limit = 1e8;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // Starting point for restart 0.
  std::optional<TwoLayerNet> init;
};

struct TraceRow {
  std::size_t restart = 0;
  std::size_t epoch = 0;
  double objective = 0.0;
  double risk = 0.0;
  double path_norm = 0.0;
  double min_margin = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  TwoLayerNet net;
  std::size_t best_restart = 0;
  double lambda = 0.0;
  double objective = 0.0;
  double risk = 0.0;
  double path_norm = 0.0;
  double min_margin = 0.0;
  double wall_seconds = 0.0;
  bool budget_exhausted = false;
  std::vector<std::string> diagnostics;
};

struct TrainResult {
  TwoLayerNet net;
  TrainTrace trace;
};

double default_lambda(const TrainConfig& cfg, const Dataset& data);

// Empirical loss of the configured objective.
double empirical_loss(const TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg);
// Loss plus lambda * path_norm (linear) or (lambda * path_norm)^2 (squared), exact path norm.
double penalized_objective(const TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg, double lambda);
// min y f (binary), min multiclass margin, NaN for regression.
double min_margin(const TwoLayerNet& net, const Dataset& data);

TrainResult minimize_regularized(const Dataset& data, const TrainConfig& cfg);

// Projected descent onto {path_norm <= Q}; returns the best feasible iterate by empirical loss.
TrainResult minimize_constrained(const Dataset& data, double Q, const TrainConfig& cfg);

// a -> a * Q / path_norm when path_norm > Q.
TwoLayerNet project_to_ball(const TwoLayerNet& net, double Q, WeightNorm norm = WeightNorm::l1);

}  // namespace barron
