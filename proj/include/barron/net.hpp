#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace barron {

// Norm on the inner weights w. The input space carries the dual norm.
enum class WeightNorm { l1, l2 };

// f(x) = (1/m) sum_i a_i relu(w_i . x + b_i), a_i in R^k, w_i in R^d.
// a and w are stored row-major (m x k and m x d).
struct TwoLayerNet {
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t k = 1;
  std::vector<double> a;
  std::vector<double> w;
  std::vector<double> b;

  static TwoLayerNet zeros(std::size_t m, std::size_t d, std::size_t k = 1);

  std::span<double> outer(std::size_t i) { return {a.data() + i * k, k}; }
  std::span<const double> outer(std::size_t i) const { return {a.data() + i * k, k}; }
  std::span<double> inner(std::size_t i) { return {w.data() + i * d, d}; }
  std::span<const double> inner(std::size_t i) const { return {w.data() + i * d, d}; }

  // Throws ContractError if the arrays disagree with (m, d, k).
  void validate() const;
};

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

std::vector<double> eval(const TwoLayerNet& net, std::span<const double> x);
double eval_scalar(const TwoLayerNet& net, std::span<const double> x);

// Evaluates at n points stored row-major in xs; out is n x k.
void eval_batch(const TwoLayerNet& net, std::span<const double> xs, std::span<double> out);

double inner_norm(std::span<const double> w, double b, WeightNorm norm);
double outer_norm(std::span<const double> a);

double path_norm(const TwoLayerNet& net, WeightNorm norm = WeightNorm::l1);

// (1/m) sum_i (|a_i|^2 + (|w_i| + |b_i|)^2) / 2; >= path_norm, equal after rebalance.
double l2_surrogate(const TwoLayerNet& net, WeightNorm norm = WeightNorm::l1);

TwoLayerNet rebalance(const TwoLayerNet& net, WeightNorm norm = WeightNorm::l1);

// a_i -> c a_i for all i.
TwoLayerNet scale_outer(const TwoLayerNet& net, double c);

struct NetGradient {
  std::vector<double> a;
  std::vector<double> w;
  std::vector<double> b;
};

// Gradient of upstream . f(x) with respect to (a, w, b); relu'(0) = 0.
NetGradient grad(const TwoLayerNet& net, std::span<const double> x, std::span<const double> upstream);

}  // namespace barron
