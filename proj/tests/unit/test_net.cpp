#include <doctest.h>

#include <cmath>
#include <vector>

#include "barron/error.hpp"
#include "barron/net.hpp"
#include "barron/rng.hpp"

using namespace barron;

namespace {

TwoLayerNet two_sided(std::size_t d) {
  auto net = TwoLayerNet::zeros(2, d);
  net.a = {4.0, -4.0};
  net.w[0] = 1.0;
  net.w[d] = -1.0;
  return net;
}

TwoLayerNet random_net(std::size_t m, std::size_t d, std::size_t k, Rng& rng) {
  auto net = TwoLayerNet::zeros(m, d, k);
  for (auto& v : net.a) v = gaussian(rng);
  for (auto& v : net.w) v = gaussian(rng);
  for (auto& v : net.b) v = gaussian(rng);
  return net;
}

std::vector<double> random_point(std::size_t d, Rng& rng, double R = 1.0) {
  std::vector<double> x(d);
  for (auto& v : x) v = uniform(rng, -R, R);
  return x;
}

}  // namespace

TEST_CASE("zero network evaluates to zero") {
  auto net = TwoLayerNet::zeros(5, 3, 2);
  std::vector<double> x{0.1, -0.7, 2.0};
  auto y = eval(net, x);
  REQUIRE(y.size() == 2);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(path_norm(net) == 0.0);
  CHECK(l2_surrogate(net) == 0.0);
}

TEST_CASE("two-term hand evaluation") {
  auto net = two_sided(3);
  std::vector<double> x{0.5, 9.0, -9.0};
  CHECK(eval_scalar(net, x) == doctest::Approx(1.0));
  CHECK(path_norm(net) == doctest::Approx(4.0));
  CHECK(path_norm(scale_outer(net, -2.5)) == doctest::Approx(10.0));
}

TEST_CASE("dimension mismatch is a contract error") {
  auto net = two_sided(3);
  std::vector<double> x{0.5, 1.0};
  CHECK_THROWS_AS(eval(net, x), ContractError);
  net.b.pop_back();
  CHECK_THROWS_AS(net.validate(), ContractError);
}

TEST_CASE("batch evaluation matches pointwise") {
  Rng rng(3);
  auto net = random_net(7, 2, 3, rng);
  std::vector<double> xs;
  for (int i = 0; i < 5; ++i) {
    auto x = random_point(2, rng);
    xs.insert(xs.end(), x.begin(), x.end());
  }
  std::vector<double> out(15);
  eval_batch(net, xs, out);
  for (std::size_t i = 0; i < 5; ++i) {
    auto y = eval(net, std::span<const double>(xs.data() + 2 * i, 2));
    for (std::size_t c = 0; c < 3; ++c) CHECK(out[3 * i + c] == doctest::Approx(y[c]).epsilon(1e-14));
  }
}

TEST_CASE("rebalance keeps outputs and path norm, surrogate meets it") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    auto net = random_net(9, 3, 2, rng);
    auto bal = rebalance(net);
    CHECK(l2_surrogate(net) >= path_norm(net) - 1e-12);
    CHECK(path_norm(bal) == doctest::Approx(path_norm(net)).epsilon(1e-9));
    CHECK(l2_surrogate(bal) == doctest::Approx(path_norm(bal)).epsilon(1e-9));
    for (int p = 0; p < 100; ++p) {
      auto x = random_point(3, rng, 2.0);
      auto y0 = eval(net, x);
      auto y1 = eval(bal, x);
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(y0[c] - y1[c]) <= 1e-9 * (1.0 + std::abs(y0[c])));
    }
    for (std::size_t i = 0; i < bal.m; ++i) {
      double inner = inner_norm(bal.inner(i), bal.b[i], WeightNorm::l1);
      CHECK(outer_norm(bal.outer(i)) == doctest::Approx(inner).epsilon(1e-12));
    }
  }
}

TEST_CASE("rebalance leaves dead neurons alone") {
  auto net = TwoLayerNet::zeros(2, 1);
  net.a = {0.0, 3.0};
  net.w = {5.0, 0.0};
  net.b = {1.0, 0.0};
  auto bal = rebalance(net);
  CHECK(bal.a == net.a);
  CHECK(bal.w == net.w);
  CHECK(bal.b == net.b);
  CHECK(rebalance(TwoLayerNet::zeros(3, 2)).a == std::vector<double>(3, 0.0));
}

TEST_CASE("single neuron rebalance") {
  auto net = TwoLayerNet::zeros(1, 1);
  net.a = {8.0};
  net.w = {1.0};
  auto bal = rebalance(net);
  CHECK(std::abs(bal.a[0]) == doctest::Approx(std::abs(bal.w[0]) + std::abs(bal.b[0])));
  CHECK(l2_surrogate(bal) == doctest::Approx(path_norm(bal)).epsilon(1e-9));
  CHECK(path_norm(bal) == doctest::Approx(8.0));
}

TEST_CASE("positive homogeneity per neuron") {
  Rng rng(5);
  auto net = random_net(6, 2, 1, rng);
  auto x = random_point(2, rng);
  double y = eval_scalar(net, x);
  for (int t = 0; t < 10; ++t) {
    double c = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
    auto s = net;
    std::size_t i = t % s.m;
    s.a[i] *= c;
    s.w[2 * i] /= c;
    s.w[2 * i + 1] /= c;
    s.b[i] /= c;
    CHECK(eval_scalar(s, x) == doctest::Approx(y).epsilon(1e-9));
  }
}

TEST_CASE("Lipschitz and sup bounds from the path norm") {
  Rng rng(17);
  const double R = 1.5;
  for (int rep = 0; rep < 5; ++rep) {
    auto net = random_net(12, 3, 1, rng);
    double pn = path_norm(net);
    for (int p = 0; p < 200; ++p) {
      auto x = random_point(3, rng, R);
      auto x2 = random_point(3, rng, R);
      double dist = 0.0;
      for (std::size_t j = 0; j < 3; ++j) dist = std::max(dist, std::abs(x[j] - x2[j]));
      double fx = eval_scalar(net, x);
      CHECK(std::abs(fx - eval_scalar(net, x2)) <= pn * dist + 1e-12);
      CHECK(std::abs(fx) <= pn * std::max(1.0, R) + 1e-12);
    }
  }
}

TEST_CASE("gradient: closed form and finite differences") {
  SUBCASE("zero upstream") {
    Rng rng(1);
    auto net = random_net(4, 2, 2, rng);
    std::vector<double> x{0.3, -0.2}, up{0.0, 0.0};
    auto g = grad(net, x, up);
    for (double v : g.a) CHECK(v == 0.0);
    for (double v : g.w) CHECK(v == 0.0);
    for (double v : g.b) CHECK(v == 0.0);
  }
  SUBCASE("active single neuron") {
    auto net = TwoLayerNet::zeros(1, 1);
    net.a = {3.0};
    net.w = {2.0};
    net.b = {0.5};
    std::vector<double> x{0.25}, up{1.0};
    auto g = grad(net, x, up);
    CHECK(g.a[0] == doctest::Approx(1.0));
    CHECK(g.b[0] == doctest::Approx(3.0));
    CHECK(g.w[0] == doctest::Approx(0.75));
  }
  SUBCASE("finite differences") {
    Rng rng(23);
    const double h = 1e-5;
    int checked = 0;
    while (checked < 20) {
      auto net = random_net(5, 3, 2, rng);
      auto x = random_point(3, rng);
      bool near_kink = false;
      for (std::size_t i = 0; i < net.m; ++i) {
        double z = net.b[i];
        for (std::size_t j = 0; j < 3; ++j) z += net.w[3 * i + j] * x[j];
        if (std::abs(z) < 1e-4) near_kink = true;
      }
      if (near_kink) continue;
      std::vector<double> up{gaussian(rng), gaussian(rng)};
      auto f = [&](const TwoLayerNet& n) {
        auto y = eval(n, x);
        return up[0] * y[0] + up[1] * y[1];
      };
      auto g = grad(net, x, up);
      auto check = [&](std::vector<double> TwoLayerNet::*field, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < analytic.size(); ++i) {
          auto p = net, q = net;
          (p.*field)[i] += h;
          (q.*field)[i] -= h;
          double fd = (f(p) - f(q)) / (2 * h);
          CHECK(std::abs(fd - analytic[i]) <= 1e-5 * std::max(1.0, std::abs(analytic[i])));
        }
      };
      check(&TwoLayerNet::a, g.a);
      check(&TwoLayerNet::w, g.w);
      check(&TwoLayerNet::b, g.b);
      ++checked;
    }
  }
}
