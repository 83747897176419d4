#include <doctest.h>

#include <cmath>
#include <vector>

#include "barron/train.hpp"

using namespace barron;

namespace {

TrainConfig quick(std::size_t m, std::size_t steps, std::size_t restarts) {
  TrainConfig cfg;
  cfg.m = m;
  cfg.steps = steps;
  cfg.restarts = restarts;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("default lambda") {
  auto p = separated_halfspaces(0.5, 1.0, 2);
  auto data = p.sample(64, 1);
  auto cfg = quick(64, 1, 1);
  CHECK(default_lambda(cfg, data) == doctest::Approx(1.0 / 8));
  cfg.radius = 2.0;
  CHECK(default_lambda(cfg, data) == doctest::Approx(2.0 / 8));
  cfg.lambda = 0.3;
  CHECK(default_lambda(cfg, data) == 0.3);
}

TEST_CASE("hinge objective on separated halfspaces reaches the competitor") {
  auto p = separated_halfspaces(0.5, 1.0, 2);
  auto data = p.sample(1024, 3);
  auto cfg = quick(64, 1500, 2);
  auto res = minimize_regularized(data, cfg);
  const double lambda = res.trace.lambda;
  CHECK(lambda == doctest::Approx(1.0 / 8));
  CHECK(res.trace.objective <= 2 * lambda * 8.0 * 1.1);
  CHECK(penalized_objective(res.net, data, cfg, lambda) == doctest::Approx(res.trace.objective).epsilon(1e-9));
  CHECK(res.trace.path_norm == doctest::Approx(path_norm(res.net)).epsilon(1e-12));
  // neurons with a = 0 keep their inner weights, so only the inequality survives
  CHECK(l2_surrogate(res.net) >= path_norm(res.net) - 1e-12);
}

TEST_CASE("training is deterministic in the seed") {
  auto p = separated_halfspaces(0.5, 1.0, 2);
  auto data = p.sample(200, 5);
  auto cfg = quick(8, 200, 3);
  auto a = minimize_regularized(data, cfg);
  auto b = minimize_regularized(data, cfg);
  CHECK(a.net.a == b.net.a);
  CHECK(a.net.w == b.net.w);
  CHECK(a.trace.best_restart == b.trace.best_restart);
}

TEST_CASE("one point logistic: risk falls, norm grows") {
  Dataset data;
  data.d = 1;
  data.labels = {{1.0}, {-1.0}};
  data.x = {0.5};
  data.cls = {0};
  auto cfg = quick(4, 600, 1);
  cfg.loss = Loss::logistic();
  cfg.penalty = Penalty::none;
  cfg.trace_every = 50;
  auto res = minimize_regularized(data, cfg);
  REQUIRE(res.trace.rows.size() >= 3);
  for (std::size_t i = 1; i < res.trace.rows.size(); ++i) {
    CHECK(res.trace.rows[i].risk <= res.trace.rows[i - 1].risk + 1e-12);
    CHECK(res.trace.rows[i].path_norm >= res.trace.rows[i - 1].path_norm - 1e-12);
  }
  CHECK(res.trace.rows.back().risk < res.trace.rows.front().risk);
}

TEST_CASE("first step from zero outer weights moves only a") {
  auto p = separated_halfspaces(0.5, 1.0, 2);
  auto data = p.sample(100, 2);
  auto net = TwoLayerNet::zeros(6, 2);
  Rng rng(1);
  for (auto& v : net.w) v = uniform(rng, -0.5, 0.5);
  for (auto& v : net.b) v = uniform(rng, -0.5, 0.5);
  const auto loss = Loss::logistic();
  NetGradient total{std::vector<double>(6), std::vector<double>(12), std::vector<double>(6)};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.binary_label(i);
    std::vector<double> up{-y * loss.derivative(-y * eval_scalar(net, data.point(i)))};
    auto g = grad(net, data.point(i), up);
    for (std::size_t j = 0; j < 6; ++j) total.a[j] += g.a[j];
    for (std::size_t j = 0; j < 12; ++j) total.w[j] += g.w[j];
    for (std::size_t j = 0; j < 6; ++j) total.b[j] += g.b[j];
  }
  for (double v : total.w) CHECK(v == 0.0);
  for (double v : total.b) CHECK(v == 0.0);
  bool moved = false;
  for (double v : total.a) moved = moved || v != 0.0;
  CHECK(moved);
}

TEST_CASE("projection onto the path-norm ball") {
  Rng rng(3);
  auto net = TwoLayerNet::zeros(5, 2);
  for (auto& v : net.a) v = 4 * gaussian(rng);
  for (auto& v : net.w) v = gaussian(rng);
  for (auto& v : net.b) v = gaussian(rng);
  const double Q = 0.5 * path_norm(net);
  auto proj = project_to_ball(net, Q);
  CHECK(path_norm(proj) <= Q * (1 + 1e-12));
  std::vector<double> x{0.2, -0.6};
  CHECK(eval_scalar(proj, x) == doctest::Approx(0.5 * eval_scalar(net, x)).epsilon(1e-12));
  auto same = project_to_ball(net, 10 * Q);
  CHECK(same.a == net.a);
}

TEST_CASE("constrained training") {
  SUBCASE("Q below the separation bound keeps the margin under 1") {
    auto p = separated_halfspaces(0.5, 1.0, 2);
    auto data = p.sample(400, 8);
    auto cfg = quick(16, 400, 1);
    cfg.loss = Loss::sqhinge();
    auto res = minimize_constrained(data, 3.0, cfg);
    CHECK(path_norm(res.net) <= 3.0 * (1 + 1e-9));
    CHECK(min_margin(res.net, data) < 1.0);
  }
  SUBCASE("Q = 0 gives the zero net") {
    auto p = touching_1d(0.0);
    auto data = p.sample(300, 2);
    auto cfg = quick(8, 50, 1);
    cfg.loss = Loss::sqhinge();
    auto res = minimize_constrained(data, 0.0, cfg);
    CHECK(path_norm(res.net) == 0.0);
    CHECK(empirical_loss(res.net, data, cfg) == doctest::Approx(1.0));
  }
}

TEST_CASE("cross-entropy objective reduces the risk") {
  auto p = multiclass_sectors(3, 20.0, 1.0);
  auto data = p.sample(300, 4);
  auto cfg = quick(16, 300, 1);
  cfg.objective = Objective::cross_entropy;
  auto res = minimize_regularized(data, cfg);
  CHECK(empirical_loss(res.net, data, cfg) < std::log(3.0));
  CHECK(res.trace.objective <= std::log(3.0) + 1e-12);
}
