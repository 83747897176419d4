#include "barron/net.hpp"

#include <cmath>

#include "barron/error.hpp"

namespace barron {

TwoLayerNet TwoLayerNet::zeros(std::size_t m, std::size_t d, std::size_t k) {
  require(k >= 1, "net: output dimension must be positive");
  TwoLayerNet net;
  net.m = m;
  net.d = d;
  net.k = k;
  net.a.assign(m * k, 0.0);
  net.w.assign(m * d, 0.0);
  net.b.assign(m, 0.0);
  return net;
}

void TwoLayerNet::validate() const {
  require(k >= 1, "net: output dimension must be positive");
  require(a.size() == m * k, "net: a has wrong size");
  require(w.size() == m * d, "net: w has wrong size");
  require(b.size() == m, "net: b has wrong size");
}

std::vector<double> eval(const TwoLayerNet& net, std::span<const double> x) {
  require(x.size() == net.d, "eval: input dimension mismatch");
  std::vector<double> out(net.k, 0.0);
  if (net.m == 0) return out;
  for (std::size_t i = 0; i < net.m; ++i) {
    const double* wi = net.w.data() + i * net.d;
    double z = net.b[i];
    for (std::size_t j = 0; j < net.d; ++j) z += wi[j] * x[j];
    if (z <= 0.0) continue;
    const double* ai = net.a.data() + i * net.k;
    for (std::size_t c = 0; c < net.k; ++c) out[c] += ai[c] * z;
  }
  const double inv_m = 1.0 / static_cast<double>(net.m);
  for (double& v : out) v *= inv_m;
  return out;
}

double eval_scalar(const TwoLayerNet& net, std::span<const double> x) {
  require(net.k == 1, "eval_scalar: net has vector output");
  return eval(net, x)[0];
}

void eval_batch(const TwoLayerNet& net, std::span<const double> xs, std::span<double> out) {
  require(net.d > 0 && xs.size() % net.d == 0, "eval_batch: input size is not a multiple of d");
  const std::size_t n = xs.size() / net.d;
  require(out.size() == n * net.k, "eval_batch: output size mismatch");
  for (std::size_t p = 0; p < n; ++p) {
    auto v = eval(net, xs.subspan(p * net.d, net.d));
    for (std::size_t c = 0; c < net.k; ++c) out[p * net.k + c] = v[c];
  }
}

double inner_norm(std::span<const double> w, double b, WeightNorm norm) {
  double s = 0.0;
  if (norm == WeightNorm::l1) {
    for (double v : w) s += std::abs(v);
  } else {
    for (double v : w) s += v * v;
    s = std::sqrt(s);
  }
  return s + std::abs(b);
}

double outer_norm(std::span<const double> a) {
  if (a.size() == 1) return std::abs(a[0]);
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double path_norm(const TwoLayerNet& net, WeightNorm norm) {
  net.validate();
  if (net.m == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < net.m; ++i)
    s += outer_norm(net.outer(i)) * inner_norm(net.inner(i), net.b[i], norm);
  return s / static_cast<double>(net.m);
}

double l2_surrogate(const TwoLayerNet& net, WeightNorm norm) {
  net.validate();
  if (net.m == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < net.m; ++i) {
    const double ao = outer_norm(net.outer(i));
    const double wi = inner_norm(net.inner(i), net.b[i], norm);
    s += 0.5 * (ao * ao + wi * wi);
  }
  return s / static_cast<double>(net.m);
}

TwoLayerNet rebalance(const TwoLayerNet& net, WeightNorm norm) {
  net.validate();
  TwoLayerNet out = net;
  for (std::size_t i = 0; i < net.m; ++i) {
    const double ao = outer_norm(net.outer(i));
    const double wi = inner_norm(net.inner(i), net.b[i], norm);
    if (ao == 0.0 || wi == 0.0) continue;
    const double c = std::sqrt(wi / ao);
    for (double& v : out.outer(i)) v *= c;
    for (double& v : out.inner(i)) v /= c;
    out.b[i] /= c;
  }
  return out;
}

TwoLayerNet scale_outer(const TwoLayerNet& net, double c) {
  TwoLayerNet out = net;
  for (double& v : out.a) v *= c;
  return out;
}

NetGradient grad(const TwoLayerNet& net, std::span<const double> x, std::span<const double> upstream) {
  net.validate();
  require(x.size() == net.d, "grad: input dimension mismatch");
  require(upstream.size() == net.k, "grad: upstream dimension mismatch");
  NetGradient g{std::vector<double>(net.a.size(), 0.0), std::vector<double>(net.w.size(), 0.0),
                std::vector<double>(net.b.size(), 0.0)};
  if (net.m == 0) return g;
  const double inv_m = 1.0 / static_cast<double>(net.m);
  for (std::size_t i = 0; i < net.m; ++i) {
    const double* wi = net.w.data() + i * net.d;
    double z = net.b[i];
    for (std::size_t j = 0; j < net.d; ++j) z += wi[j] * x[j];
    if (z <= 0.0) continue;
    const double* ai = net.a.data() + i * net.k;
    double ua = 0.0;
    for (std::size_t c = 0; c < net.k; ++c) {
      g.a[i * net.k + c] = upstream[c] * z * inv_m;
      ua += upstream[c] * ai[c];
    }
    ua *= inv_m;
    for (std::size_t j = 0; j < net.d; ++j) g.w[i * net.d + j] = ua * x[j];
    g.b[i] = ua;
  }
  return g;
}

}  // namespace barron
