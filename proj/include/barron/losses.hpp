#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "barron/net.hpp"
#include "barron/problems.hpp"

namespace barron {

enum class LossKind { hinge, sqhinge, logistic, exp, power };

// Nondecreasing scalar loss applied to z = -y f(x).
class Loss {
 public:
  static Loss hinge() { return Loss(LossKind::hinge); }
  static Loss sqhinge() { return Loss(LossKind::sqhinge); }
  static Loss logistic() { return Loss(LossKind::logistic); }
  static Loss exponential() { return Loss(LossKind::exp); }
  // |z|^-beta for z <= -mu_cut, continued C^1 by a line above -mu_cut.
  static Loss power(double beta, double mu_cut = 1.0);
  // hinge | sqhinge | logistic | exp | pow:<beta>
  static Loss parse(std::string_view token);

  LossKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double mu_cut() const { return mu_cut_; }
  std::string token() const;

  double value(double z) const;
  double derivative(double z) const;
  // log value(z) without overflow for exp and logistic.
  double log_value(double z) const;

  double lipschitz() const;
  double curvature_bound() const;
  // max |L'(xi)| over xi < -lambda.
  double tail_derivative_bound(double lambda) const;

  bool invertible() const;
  double inverse(double y) const;

 private:
  explicit Loss(LossKind kind) : kind_(kind) {}
  LossKind kind_;
  double beta_ = 0.0;
  double mu_cut_ = 1.0;
};

// Softmax cross-entropy over logits <z, y_i>.
class MultiClassLoss {
 public:
  explicit MultiClassLoss(std::vector<std::vector<double>> labels);
  const std::vector<std::vector<double>>& labels() const { return labels_; }
  double value(std::span<const double> z, int j) const;
  std::vector<double> gradient(std::span<const double> z, int j) const;
  // k x k Hessian in z, row-major.
  std::vector<double> hessian(std::span<const double> z) const;
  double max_label_norm() const;

 private:
  std::vector<std::vector<double>> labels_;
};

double risk(const TwoLayerNet& net, const Loss& loss, const Dataset& data);
// Fraction with y f(x) <= 0 (binary) or multiclass margin <= 0.
double misclass_probability(const TwoLayerNet& net, const Dataset& data);

// -y_i f(x_i) for a binary dataset.
std::vector<double> negative_margins(const TwoLayerNet& net, const Dataset& data);

// L^{-1}(mean L(lambda z_i)) / lambda.
double margin_functional(const Loss& loss, std::span<const double> z, double lambda);
double margin_functional(const TwoLayerNet& net, const Loss& loss, const Dataset& data, double lambda);
double max_margin(const TwoLayerNet& net, const Dataset& data);

double multiclass_margin(std::span<const double> h, int j, const std::vector<std::vector<double>>& labels);
double xent_risk(const TwoLayerNet& net, const Dataset& data);
// (R(lambda h) / lambda, log R(lambda h) / lambda).
std::pair<double, double> multiclass_margin_functional(const TwoLayerNet& net, const Dataset& data, double lambda);

// Stable log(exp(a) + exp(b)) style helpers.
double log_sum_exp(std::span<const double> v);
double log_mean_exp(std::span<const double> v);

}  // namespace barron
