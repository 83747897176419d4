#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "barron/losses.hpp"
#include "barron/problems.hpp"
#include "barron/train.hpp"

namespace barron {

enum class BoundKind { hinge, hinge_squared, logloss1, logloss2, xent_lip, xent_smooth, mostly_correct, unrealizable, regression };

std::string to_string(BoundKind kind);
// hinge | hinge-squared | logloss1 | logloss2 | xent-lip | xent-smooth | mostly-correct | unrealizable | regression
BoundKind parse_bound_kind(std::string_view token);

// R is the l_inf support radius; every formula uses max{1,R}.
struct BoundParams {
  std::optional<double> Q, R, m, n, d, conf, k, Y;
  std::optional<double> rho_c, rho_exponent;
  std::optional<double> loss_at_zero, loss_lipschitz;
  // Density exponent of the problem, informational.
  std::optional<double> alpha;
};

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundValue {
  double value = 0.0;
  std::vector<BoundTerm> terms;
};

BoundValue bound_rhs(BoundKind kind, const BoundParams& params);

// Upper bound on the regularized empirical objective of the exact minimizer (the proofs' competitor).
double competitor_objective(BoundKind kind, const BoundParams& params);

// 2 inf_Q [c Q^-gamma + Q^2 max{1,R}^2 / m], closed form.
double mostly_correct_budget(double c, double gamma, double R, double m);
double mostly_correct_optimal_q(double c, double gamma, double R, double m);

// 2 [(2/a)^(a/(2+a)) + (a/2)^(2/(2+a))] c^(2/(2+a)).
double regression_constant(double alpha, double c);

struct BoundReport {
  BoundKind kind = BoundKind::hinge;
  std::string problem;
  BoundParams params;
  double rhs = 0.0;
  std::vector<BoundTerm> terms;
  double measured = 0.0;
  double std_error = 0.0;
  double train_loss = 0.0;
  double misclass = 0.0;
  double misclass_proxy = 0.0;  // risk / L(0), or risk / log 2 for cross-entropy
  bool misclass_ok = true;
  double lambda = 0.0;
  double objective = 0.0;
  double competitor = 0.0;
  double slack = 0.0;
  bool optimizer_limited = false;
  bool pass = false;
  double path_norm = 0.0;
  std::optional<double> paper_claimed_q;
  // Regression and risk-decay fits.
  std::vector<std::pair<double, double>> rho_points;
  double small_network_bound = 0.0;
  double best_net_error = 0.0;
  bool small_network_ok = true;
  std::vector<std::string> diagnostics;
  double wall_seconds = 0.0;
};

struct VerifyConfig {
  BoundKind kind = BoundKind::hinge;
  TrainConfig train;
  std::size_t n_train = 4096;
  std::size_t n_eval = 100000;
  double conf = 0.1;
  std::uint64_t seed = 0;
  // Loss for the unrealizable kind and its risk decay model (c, exponent).
  std::optional<std::pair<double, double>> rho_model;
  std::size_t best_of = 20;  // mostly-correct: sampled networks
};

// Trains with the theorem's functional and lambda = max{1,R}/sqrt(m), measures on a fresh sample.
BoundReport verify_apriori(const Problem& problem, const VerifyConfig& cfg);

struct RhoPoint {
  double q = 0.0;
  double rho = 0.0;         // empirical risk of the constrained net
  double population = 0.0;  // quadrature (touching_1d) or held-out estimate
  double oracle = 0.0;      // closed form when known, else NaN
  bool noisy = false;       // larger than the value at a smaller Q
  double path_norm = 0.0;
};

struct RhoCurve {
  std::vector<RhoPoint> points;
  double exponent = 0.0;   // slope of log rho against log Q
  double intercept = 0.0;  // log c
  std::size_t fitted = 0;
  std::vector<std::string> diagnostics;
};

// Slope and intercept of log y on log x over points with y > floor.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0,
                                     std::size_t* used = nullptr);

RhoCurve rho_curve(const Problem& problem, const std::vector<double>& qs, const TrainConfig& cfg, std::size_t n,
                   std::uint64_t seed, std::size_t n_eval = 100000);

// Squared-hinge risk of the best classifier in the radius-Q ball for touching_1d(alpha).
double touching_1d_oracle(double Q, double alpha);
// Population risk of a scalar net on touching_1d(alpha); Gauss-Legendre between the kinks of the integrand.
double touching_1d_population_risk(const TwoLayerNet& net, double alpha, const Loss& loss, std::size_t panels = 16);

struct RegressionConfig {
  TrainConfig train;
  std::vector<double> qs{1, 2, 4, 8, 16};
  std::size_t n_eval = 20000;
  double conf = 0.1;
  double rho_floor = 1e-4;
};

BoundReport regression_harness(const Problem& problem, std::size_t m, std::size_t n, std::uint64_t seed,
                               const RegressionConfig& cfg = {});

}  // namespace barron
