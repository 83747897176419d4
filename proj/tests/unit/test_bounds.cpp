#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "barron/bounds.hpp"
#include "barron/error.hpp"
#include "barron/io.hpp"

using namespace barron;

namespace {

Json oracle_table() { return Json::parse(read_text(ORACLE_TABLE)); }

BoundParams params_from(const Json& j) {
  BoundParams p;
  p.Q = j.at("Q").get<double>();
  p.R = j.at("R").get<double>();
  p.m = j.at("m").get<double>();
  p.n = j.at("n").get<double>();
  p.conf = j.at("conf").get<double>();
  p.d = j.at("d").get<double>();
  return p;
}

BoundParams full_params() {
  BoundParams p;
  p.Q = 4;
  p.R = 1;
  p.m = 64;
  p.n = 4096;
  p.conf = 0.1;
  p.d = 2;
  p.k = 3;
  p.Y = 1;
  p.rho_c = 0.5;
  p.rho_exponent = 1.0;
  p.loss_at_zero = 1.0;
  p.loss_lipschitz = 2.0;
  return p;
}

double rhs(BoundKind kind, const BoundParams& p) { return bound_rhs(kind, p).value; }

double simpson(auto f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("frozen formula values") {
  auto table = oracle_table();
  for (auto [key, kind] : {std::pair{"hinge", BoundKind::hinge}, std::pair{"hinge_q8", BoundKind::hinge},
                           std::pair{"logloss1", BoundKind::logloss1}}) {
    CAPTURE(key);
    const auto& row = table.at(key);
    const double expected = std::stod(row.at("value").get<std::string>());
    CHECK(rhs(kind, params_from(row.at("params"))) == doctest::Approx(expected).epsilon(1e-12));
  }
  const auto& reg = table.at("regression_constant");
  CHECK(regression_constant(reg.at("params").at("alpha").get<double>(), reg.at("params").at("c").get<double>()) ==
        doctest::Approx(std::stod(reg.at("value").get<std::string>())).epsilon(1e-12));
}

TEST_CASE("hinge terms") {
  auto v = bound_rhs(BoundKind::hinge, full_params());
  REQUIRE(v.terms.size() == 3);
  CHECK(v.terms[0].name == "approximation");
  CHECK(v.terms[0].value == doctest::Approx(1.0));
  CHECK(v.terms[1].value == doctest::Approx(2 * std::sqrt(std::log(6.0) / 4096)));
  CHECK(v.terms[2].value == doctest::Approx(8 * std::sqrt(std::log(20.0) / 4096)));
  double total = 0.0;
  for (const auto& t : v.terms) total += t.value;
  CHECK(total == doctest::Approx(v.value));
}

TEST_CASE("mostly correct terms") {
  auto v = bound_rhs(BoundKind::mostly_correct, full_params());
  CHECK(v.value == doctest::Approx(0.25));
  bool seen = false;
  for (const auto& t : v.terms)
    if (t.name == "neuron_threshold") {
      CHECK(t.value == doctest::Approx(48.0));
      seen = true;
    }
  CHECK(seen);
}

TEST_CASE("missing parameters are reported") {
  BoundParams p;
  p.Q = 4;
  CHECK_THROWS_AS(bound_rhs(BoundKind::hinge, p), ContractError);
  auto q = full_params();
  q.Y.reset();
  CHECK_THROWS_AS(bound_rhs(BoundKind::xent_lip, q), ContractError);
  CHECK_THROWS_AS(parse_bound_kind("hinge2"), ContractError);
  for (auto kind : {BoundKind::hinge, BoundKind::hinge_squared, BoundKind::logloss1, BoundKind::logloss2,
                    BoundKind::xent_lip, BoundKind::xent_smooth, BoundKind::mostly_correct, BoundKind::unrealizable,
                    BoundKind::regression})
    CHECK(parse_bound_kind(to_string(kind)) == kind);
}

TEST_CASE("bounds shrink with more data") {
  for (auto kind : {BoundKind::hinge, BoundKind::hinge_squared, BoundKind::logloss1, BoundKind::logloss2,
                    BoundKind::xent_lip, BoundKind::xent_smooth, BoundKind::unrealizable, BoundKind::regression}) {
    CAPTURE(to_string(kind));
    auto p = full_params();
    double prev = std::numeric_limits<double>::infinity();
    for (double n : {64.0, 256.0, 1024.0, 4096.0, 16384.0, 1e6}) {
      p.n = n;
      double v = rhs(kind, p);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("bounds grow with Q and Y, shrink with m where the formula is monotone") {
  for (auto kind : {BoundKind::hinge, BoundKind::hinge_squared, BoundKind::logloss1, BoundKind::xent_lip,
                    BoundKind::mostly_correct}) {
    CAPTURE(to_string(kind));
    auto p = full_params();
    double prev = 0.0;
    for (double Q = 0.5; Q < 64; Q *= 1.3) {
      p.Q = Q;
      double v = rhs(kind, p);
      CHECK(v >= prev);
      prev = v;
    }
  }
  for (auto kind : {BoundKind::hinge, BoundKind::hinge_squared, BoundKind::mostly_correct}) {
    CAPTURE(to_string(kind));
    auto p = full_params();
    double prev = std::numeric_limits<double>::infinity();
    for (double m = 4; m < 1e6; m *= 2) {
      p.m = m;
      double v = rhs(kind, p);
      CHECK(v <= prev);
      prev = v;
    }
  }
  // the competitor norm grows with m, so at fixed n only the approximation term falls
  for (auto kind : {BoundKind::unrealizable, BoundKind::regression}) {
    CAPTURE(to_string(kind));
    auto p = full_params();
    double prev = std::numeric_limits<double>::infinity();
    for (double m = 4; m < 1e6; m *= 2) {
      p.m = m;
      double v = bound_rhs(kind, p).terms[0].value;
      CHECK(v <= prev);
      prev = v;
    }
    p.m = 1e5;
    const double small_n = rhs(kind, p);
    p.m = 1e3;
    CHECK(rhs(kind, p) < small_n);
  }
  for (auto kind : {BoundKind::hinge, BoundKind::hinge_squared, BoundKind::logloss1, BoundKind::mostly_correct}) {
    CAPTURE(to_string(kind));
    auto p = full_params();
    double prev = 0.0;
    for (double R = 0.5; R < 20; R *= 1.4) {
      p.R = R;
      double v = rhs(kind, p);
      CHECK(v >= prev);
      prev = v;
    }
  }
  auto p = full_params();
  double prev = 0.0;
  for (double Y = 0.5; Y < 20; Y *= 1.4) {
    p.Y = Y;
    double v = rhs(BoundKind::xent_lip, p);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("competitor matches the approximation term") {
  auto p = full_params();
  for (auto kind : {BoundKind::hinge, BoundKind::logloss1, BoundKind::xent_lip}) {
    auto v = bound_rhs(kind, p);
    CHECK(competitor_objective(kind, p) == doctest::Approx(v.terms[0].value));
  }
}

TEST_CASE("mostly correct budget against a grid search") {
  const double c = 1, gamma = 2, R = 1, m = 100;
  double best = std::numeric_limits<double>::infinity();
  for (double Q = 0.01; Q < 50; Q *= 1.0005) best = std::min(best, 2 * (c * std::pow(Q, -gamma) + Q * Q * R * R / m));
  CHECK(mostly_correct_budget(c, gamma, R, m) == doctest::Approx(best).epsilon(0.005));
  const double q = mostly_correct_optimal_q(c, gamma, R, m);
  CHECK(2 * (c * std::pow(q, -gamma) + q * q / m) == doctest::Approx(mostly_correct_budget(c, gamma, R, m)));

  const double slope =
      std::log(mostly_correct_budget(1, 100, 1, 1e6) / mostly_correct_budget(1, 100, 1, 1e4)) / std::log(100.0);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.02));

  double prev = std::numeric_limits<double>::infinity();
  for (double mm = 10; mm < 1e7; mm *= 3) {
    double v = mostly_correct_budget(0.7, 1.5, 2.0, mm);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("regression constant") {
  CHECK(regression_constant(1, 1) == doctest::Approx(2 * (std::cbrt(2.0) + std::pow(0.5, 2.0 / 3))));
  CHECK(regression_constant(1, 8) == doctest::Approx(4 * regression_constant(1, 1)));
}

TEST_CASE("touching oracle: closed form, quadrature and a realizing net") {
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    for (double Q : {1.0, 3.0, 8.0, 32.0}) {
      CAPTURE(alpha);
      CAPTURE(Q);
      const double half = Q / 2;
      const double upper = std::min(half, 1.0);
      const double direct = (alpha + 1) * std::pow(half, -(1 + alpha)) *
                            simpson([&](double z) { return (1 - z) * (1 - z) * std::pow(z, alpha); }, 0.0, upper);
      CHECK(touching_1d_oracle(Q, alpha) == doctest::Approx(direct).epsilon(1e-5));

      auto net = TwoLayerNet::zeros(2, 1);
      net.a = {Q, -Q};
      net.w = {1.0, -1.0};
      CHECK(path_norm(net) == doctest::Approx(Q));
      CHECK(touching_1d_population_risk(net, alpha, Loss::sqhinge()) ==
            doctest::Approx(touching_1d_oracle(Q, alpha)).epsilon(1e-7));
    }
  }
  CHECK(touching_1d_oracle(8, 0) == doctest::Approx(1.0 / 12));
}

TEST_CASE("log-log fit") {
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3 * std::pow(v, -1.5));
  std::size_t used = 0;
  auto [slope, icpt] = loglog_fit(x, y, 0.0, &used);
  CHECK(slope == doctest::Approx(-1.5));
  CHECK(icpt == doctest::Approx(std::log(3.0)));
  CHECK(used == 5);
  y[4] = 0.0;
  loglog_fit(x, y, 1e-12, &used);
  CHECK(used == 4);
}

TEST_CASE("verify_apriori on a small halfspace run") {
  auto p = separated_halfspaces(0.5, 1.0, 2);
  VerifyConfig cfg;
  cfg.kind = BoundKind::hinge;
  cfg.train.m = 32;
  cfg.train.steps = 800;
  cfg.train.restarts = 1;
  cfg.n_train = 1024;
  cfg.n_eval = 20000;
  cfg.seed = 3;
  auto rep = verify_apriori(p, cfg);
  CHECK(rep.rhs == doctest::Approx(rhs(BoundKind::hinge, rep.params)));
  CHECK(rep.lambda == doctest::Approx(1 / std::sqrt(32.0)));
  CHECK(rep.pass);
  CHECK(rep.misclass_ok);
  CHECK(rep.misclass <= rep.misclass_proxy + 1e-12);
}
