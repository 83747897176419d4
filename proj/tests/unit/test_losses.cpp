#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "barron/error.hpp"
#include "barron/losses.hpp"
#include "barron/rng.hpp"

using namespace barron;

namespace {

Dataset binary_data(const std::vector<double>& xs, const std::vector<int>& signs) {
  Dataset data;
  data.d = 1;
  data.labels = {{1.0}, {-1.0}};
  data.x = xs;
  for (int s : signs) data.cls.push_back(s > 0 ? 0 : 1);
  return data;
}

// f(x) = c x in d = 1
TwoLayerNet linear_net(double c) {
  auto net = TwoLayerNet::zeros(2, 1);
  net.a = {2 * c, -2 * c};
  net.w = {1.0, -1.0};
  return net;
}

std::vector<Loss> all_losses() {
  return {Loss::hinge(), Loss::sqhinge(), Loss::logistic(), Loss::exponential(), Loss::power(2.0, 1.0)};
}

}  // namespace

TEST_CASE("loss values at zero") {
  CHECK(Loss::hinge().value(0.0) == 1.0);
  CHECK(Loss::sqhinge().value(0.0) == 1.0);
  CHECK(Loss::logistic().value(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(Loss::exponential().value(0.0) == 1.0);
}

TEST_CASE("loss monotone, decaying and with matching derivatives") {
  for (const auto& loss : all_losses()) {
    CAPTURE(loss.token());
    double prev = -1.0;
    for (double z = -30.0; z <= 5.0; z += 0.01) {
      double v = loss.value(z);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    CHECK(loss.value(-1e4) < 1e-6);
    for (double z : {-3.3, -1.7, -0.4, 0.35, 1.9}) {
      const double h = 1e-6;
      double fd = (loss.value(z + h) - loss.value(z - h)) / (2 * h);
      CHECK(loss.derivative(z) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    CHECK(Loss::parse(loss.token()).kind() == loss.kind());
  }
  CHECK_THROWS_AS(Loss::parse("cubic"), ContractError);
}

TEST_CASE("log value agrees and does not overflow") {
  for (auto loss : {Loss::logistic(), Loss::exponential()}) {
    for (double z : {-5.0, 0.0, 3.0}) CHECK(loss.log_value(z) == doctest::Approx(std::log(loss.value(z))));
    CHECK(std::isfinite(loss.log_value(5000.0)));
  }
}

TEST_CASE("inverse") {
  for (auto loss : {Loss::logistic(), Loss::exponential(), Loss::power(1.5, 1.0)}) {
    CHECK(loss.invertible());
    for (double z : {-4.0, -1.5, -0.2}) CHECK(loss.inverse(loss.value(z)) == doctest::Approx(z).epsilon(1e-9));
  }
  CHECK_FALSE(Loss::hinge().invertible());
}

TEST_CASE("risk examples") {
  auto data = binary_data({0.5, -0.2, 0.9, -1.0}, {1, -1, 1, -1});
  auto zero = TwoLayerNet::zeros(3, 1);
  CHECK(risk(zero, Loss::hinge(), data) == 1.0);
  CHECK(risk(zero, Loss::logistic(), data) == doctest::Approx(std::log(2.0)));
  CHECK(risk(linear_net(5.0), Loss::hinge(), data) == 0.0);
  CHECK(misclass_probability(linear_net(5.0), data) == 0.0);
  CHECK(misclass_probability(zero, data) == 1.0);
  CHECK(max_margin(linear_net(5.0), data) == doctest::Approx(-1.0));
  CHECK(max_margin(zero, data) == 0.0);
}

TEST_CASE("constant classifier misclassifies the negative labels") {
  Rng rng(2);
  std::vector<double> xs;
  std::vector<int> ys;
  int neg = 0;
  for (int i = 0; i < 500; ++i) {
    xs.push_back(uniform(rng, -1, 1));
    ys.push_back(rademacher_sign(rng));
    neg += ys.back() < 0;
  }
  auto data = binary_data(xs, ys);
  auto net = TwoLayerNet::zeros(1, 1);
  net.a = {1.0};
  net.b = {1.0};
  CHECK(misclass_probability(net, data) == doctest::Approx(neg / 500.0));
}

TEST_CASE("misclassification is controlled by the risk") {
  Rng rng(8);
  std::vector<double> xs;
  std::vector<int> ys;
  for (int i = 0; i < 300; ++i) {
    xs.push_back(uniform(rng, -1, 1));
    ys.push_back(rademacher_sign(rng));
  }
  auto data = binary_data(xs, ys);
  for (int rep = 0; rep < 20; ++rep) {
    auto net = TwoLayerNet::zeros(4, 1);
    for (auto& v : net.a) v = 3 * gaussian(rng);
    for (auto& v : net.w) v = gaussian(rng);
    for (auto& v : net.b) v = gaussian(rng);
    double mc = misclass_probability(net, data);
    for (const auto& loss : all_losses())
      if (loss.value(0.0) > 0) CHECK(mc <= risk(net, loss, data) / loss.value(0.0) + 1e-12);
  }
}

TEST_CASE("margin functional sandwich") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> z(256);
    for (auto& v : z) v = gaussian(rng);
    const double M = *std::max_element(z.begin(), z.end());
    const double lo = *std::min_element(z.begin(), z.end());
    double prev = -1e300;
    for (double lambda : {1.0, 10.0, 100.0}) {
      double F = margin_functional(Loss::exponential(), z, lambda);
      CHECK(F <= M + 1e-12);
      CHECK(F >= M - std::log(256.0) / lambda - 1e-12);
      CHECK(F >= prev - 1e-12);
      prev = F;
      for (auto loss : {Loss::logistic(), Loss::power(2.0, 1.0)}) {
        double G = margin_functional(loss, z, lambda);
        CHECK(G <= M + 1e-9);
        CHECK(G >= lo - 1e-9);
      }
    }
  }
  std::vector<double> one{-0.37};
  for (double lambda : {0.5, 3.0, 40.0}) CHECK(margin_functional(Loss::exponential(), one, lambda) == doctest::Approx(-0.37));
  CHECK_THROWS_AS(margin_functional(Loss::hinge(), one, 1.0), ContractError);
}

TEST_CASE("power-law margin functional is homogeneous") {
  std::vector<double> z{-0.5, -0.8, -1.3, -0.25};
  const double beta = 2.0;
  double mean = 0.0;
  for (double v : z) mean += std::pow(-v, -beta);
  mean /= z.size();
  const double expected = -std::pow(mean, -1.0 / beta);
  for (double lambda : {10.0, 100.0, 1000.0})
    CHECK(margin_functional(Loss::power(beta, 1.0), z, lambda) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("multiclass margin") {
  std::vector<std::vector<double>> e{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<double> h{2, 0, 0}, zero{0, 0, 0}, tie{1, 1, 0};
  CHECK(multiclass_margin(h, 0, e) == 2.0);
  CHECK(multiclass_margin(zero, 0, e) == 0.0);
  CHECK(multiclass_margin(tie, 0, e) == 0.0);
}

TEST_CASE("cross-entropy") {
  std::vector<std::vector<double>> e{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  MultiClassLoss xent(e);
  std::vector<double> zero{0, 0, 0};
  CHECK(xent.value(zero, 2) == doctest::Approx(std::log(3.0)));
  CHECK(xent.max_label_norm() == 1.0);

  SUBCASE("margin bound") {
    const double gamma = 1.7;
    std::vector<double> z{gamma, 0.0, -0.4};
    CHECK(xent.value(z, 0) <= std::log(1 + 2 * std::exp(-gamma)) + 1e-12);
  }
  SUBCASE("gradient matches finite differences") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> z{3 * gaussian(rng), 3 * gaussian(rng), 3 * gaussian(rng)};
      int j = rep % 3;
      auto g = xent.gradient(z, j);
      for (int c = 0; c < 3; ++c) {
        auto p = z, q = z;
        p[c] += 1e-6;
        q[c] -= 1e-6;
        CHECK(g[c] == doctest::Approx((xent.value(p, j) - xent.value(q, j)) / 2e-6).epsilon(1e-6).scale(1.0));
      }
    }
  }
  SUBCASE("gradient can exceed the largest label norm") {
    // grad = sum p_i y_i - y_j tends to y_2 - y_1, of length sqrt 2
    std::vector<double> z{0.0, 10.0, 0.0};
    auto g = xent.gradient(z, 0);
    double nrm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    CHECK(nrm > xent.max_label_norm());
    CHECK(nrm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(nrm <= 2 * xent.max_label_norm());
  }
  SUBCASE("Hessian is symmetric with rows summing to zero for orthonormal labels") {
    std::vector<double> z{0.3, -1.0, 2.0};
    auto H = xent.hessian(z);
    for (int r = 0; r < 3; ++r) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        CHECK(H[3 * r + c] == doctest::Approx(H[3 * c + r]));
        s += H[3 * r + c];
      }
      CHECK(std::abs(s) < 1e-12);
    }
  }
}

TEST_CASE("cross-entropy risk and margin functional at zero") {
  Dataset data;
  data.d = 1;
  data.labels = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  data.x = {0.1, 0.2, 0.3, 0.4};
  data.cls = {0, 1, 2, 0};
  auto zero = TwoLayerNet::zeros(2, 1, 3);
  CHECK(xent_risk(zero, data) == doctest::Approx(std::log(3.0)));
  CHECK(misclass_probability(zero, data) == 1.0);
  for (double lambda : {1.0, 10.0}) {
    auto [r, lr] = multiclass_margin_functional(zero, data, lambda);
    CHECK(r == doctest::Approx(std::log(3.0) / lambda));
    CHECK(lr == doctest::Approx(std::log(std::log(3.0)) / lambda));
  }
}

TEST_CASE("log-sum-exp helpers") {
  std::vector<double> v{1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_mean_exp(v) == doctest::Approx(1000.0));
}
