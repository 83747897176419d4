#include "barron/losses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "barron/error.hpp"

namespace barron {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double log_softplus(double z) {
  if (z < -30.0) return z + std::log1p(-0.5 * std::exp(z));
  return std::log(softplus(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(e^y - 1) given log y.
double log_expm1_from_log(double log_y) {
  const double y = std::exp(log_y);
  if (y < 1e-8) return log_y + std::log1p(y / 2.0);
  if (y > 30.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

void require_binary(const Dataset& data, const char* who) {
  require(data.binary(), std::string(who) + ": binary labels required");
}

}  // namespace

Loss Loss::power(double beta, double mu_cut) {
  require(beta > 0.0, "Loss::power: beta must be positive");
  require(mu_cut > 0.0, "Loss::power: mu_cut must be positive");
  Loss l(LossKind::power);
  l.beta_ = beta;
  l.mu_cut_ = mu_cut;
  return l;
}

Loss Loss::parse(std::string_view token) {
  if (token == "hinge") return hinge();
  if (token == "sqhinge") return sqhinge();
  if (token == "logistic") return logistic();
  if (token == "exp") return exponential();
  if (token.rfind("pow:", 0) == 0) {
    const auto s = token.substr(4);
    double beta = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), beta);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "loss: bad power exponent '" + std::string(s) + "'");
    return power(beta);
  }
  throw ContractError("loss: unknown kind '" + std::string(token) + "'");
}

std::string Loss::token() const {
  switch (kind_) {
    case LossKind::hinge: return "hinge";
    case LossKind::sqhinge: return "sqhinge";
    case LossKind::logistic: return "logistic";
    case LossKind::exp: return "exp";
    case LossKind::power: {
      std::string s = std::to_string(beta_);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return "pow:" + s;
    }
  }
  return "";
}

double Loss::value(double z) const {
  switch (kind_) {
    case LossKind::hinge: return std::max(0.0, 1.0 + z);
    case LossKind::sqhinge: {
      const double h = std::max(0.0, 1.0 + z);
      return h * h;
    }
    case LossKind::logistic: return softplus(z);
    case LossKind::exp: return std::exp(z);
    case LossKind::power: {
      if (z <= -mu_cut_) return std::pow(-z, -beta_);
      const double base = std::pow(mu_cut_, -beta_);
      return base + beta_ * base / mu_cut_ * (z + mu_cut_);
    }
  }
  return 0.0;
}

double Loss::derivative(double z) const {
  switch (kind_) {
    case LossKind::hinge: return z > -1.0 ? 1.0 : 0.0;
    case LossKind::sqhinge: return 2.0 * std::max(0.0, 1.0 + z);
    case LossKind::logistic: return sigmoid(z);
    case LossKind::exp: return std::exp(z);
    case LossKind::power:
      if (z <= -mu_cut_) return beta_ * std::pow(-z, -beta_ - 1.0);
      return beta_ * std::pow(mu_cut_, -beta_ - 1.0);
  }
  return 0.0;
}

double Loss::log_value(double z) const {
  switch (kind_) {
    case LossKind::exp: return z;
    case LossKind::logistic: return log_softplus(z);
    default: return std::log(value(z));
  }
}

double Loss::lipschitz() const {
  switch (kind_) {
    case LossKind::hinge: return 1.0;
    case LossKind::sqhinge: return kInf;
    case LossKind::logistic: return 1.0;
    case LossKind::exp: return kInf;
    case LossKind::power: return beta_ * std::pow(mu_cut_, -beta_ - 1.0);
  }
  return kInf;
}

double Loss::curvature_bound() const {
  switch (kind_) {
    case LossKind::hinge: return 0.0;
    case LossKind::sqhinge: return 2.0;
    case LossKind::logistic: return 0.25;
    case LossKind::exp: return kInf;
    case LossKind::power: return beta_ * (beta_ + 1.0) * std::pow(mu_cut_, -beta_ - 2.0);
  }
  return kInf;
}

double Loss::tail_derivative_bound(double lambda) const {
  switch (kind_) {
    case LossKind::hinge: return lambda >= 1.0 ? 0.0 : 1.0;
    case LossKind::sqhinge: return lambda >= 1.0 ? 0.0 : 2.0 * (1.0 - lambda);
    case LossKind::logistic: return sigmoid(-lambda);
    case LossKind::exp: return std::exp(-lambda);
    case LossKind::power: return derivative(std::min(-lambda, -mu_cut_));
  }
  return kInf;
}

bool Loss::invertible() const {
  return kind_ == LossKind::logistic || kind_ == LossKind::exp || kind_ == LossKind::power;
}

double Loss::inverse(double y) const {
  require(invertible(), "Loss::inverse: " + token() + " is not invertible");
  require(y > 0.0, "Loss::inverse: argument must be positive");
  switch (kind_) {
    case LossKind::logistic: return log_expm1_from_log(std::log(y));
    case LossKind::exp: return std::log(y);
    case LossKind::power: {
      const double base = std::pow(mu_cut_, -beta_);
      if (y <= base) return -std::pow(y, -1.0 / beta_);
      return -mu_cut_ + (y - base) / (beta_ * base / mu_cut_);
    }
    default: break;
  }
  return 0.0;
}

MultiClassLoss::MultiClassLoss(std::vector<std::vector<double>> labels) : labels_(std::move(labels)) {
  require(labels_.size() >= 2, "MultiClassLoss: need at least two labels");
  for (const auto& y : labels_) require(y.size() == labels_[0].size(), "MultiClassLoss: labels differ in length");
}

double MultiClassLoss::value(std::span<const double> z, int j) const {
  require(j >= 0 && static_cast<std::size_t>(j) < labels_.size(), "xent: class index out of range");
  require(z.size() == labels_[0].size(), "xent: logit dimension mismatch");
  std::vector<double> s(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double v = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) v += z[c] * labels_[i][c];
    s[i] = v;
  }
  std::vector<double> others;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (static_cast<int>(i) != j) others.push_back(s[i] - s[j]);
  return softplus(log_sum_exp(others));
}

std::vector<double> MultiClassLoss::gradient(std::span<const double> z, int j) const {
  require(j >= 0 && static_cast<std::size_t>(j) < labels_.size(), "xent: class index out of range");
  const std::size_t k = z.size();
  std::vector<double> s(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double v = 0.0;
    for (std::size_t c = 0; c < k; ++c) v += z[c] * labels_[i][c];
    s[i] = v;
  }
  const double lse = log_sum_exp(s);
  std::vector<double> g(k, 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double p = std::exp(s[i] - lse);
    for (std::size_t c = 0; c < k; ++c) g[c] += p * labels_[i][c];
  }
  for (std::size_t c = 0; c < k; ++c) g[c] -= labels_[j][c];
  return g;
}

std::vector<double> MultiClassLoss::hessian(std::span<const double> z) const {
  const std::size_t k = z.size();
  std::vector<double> s(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double v = 0.0;
    for (std::size_t c = 0; c < k; ++c) v += z[c] * labels_[i][c];
    s[i] = v;
  }
  const double lse = log_sum_exp(s);
  std::vector<double> mean(k, 0.0), h(k * k, 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double p = std::exp(s[i] - lse);
    for (std::size_t r = 0; r < k; ++r) {
      mean[r] += p * labels_[i][r];
      for (std::size_t c = 0; c < k; ++c) h[r * k + c] += p * labels_[i][r] * labels_[i][c];
    }
  }
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) h[r * k + c] -= mean[r] * mean[c];
  return h;
}

double MultiClassLoss::max_label_norm() const {
  double best = 0.0;
  for (const auto& y : labels_) {
    double s = 0.0;
    for (double v : y) s += v * v;
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -kInf;
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double log_mean_exp(std::span<const double> v) {
  require(!v.empty(), "log_mean_exp: empty input");
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

std::vector<double> negative_margins(const TwoLayerNet& net, const Dataset& data) {
  require_binary(data, "negative_margins");
  require(net.d == data.d && net.k == 1, "negative_margins: net shape does not match data");
  std::vector<double> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) z[i] = -data.binary_label(i) * eval(net, data.point(i))[0];
  return z;
}

double risk(const TwoLayerNet& net, const Loss& loss, const Dataset& data) {
  require(data.size() > 0, "risk: empty sample");
  const auto z = negative_margins(net, data);
  if (loss.kind() == LossKind::exp) return std::exp(log_mean_exp(z));
  double s = 0.0;
  for (double v : z) s += loss.value(v);
  return s / static_cast<double>(z.size());
}

double misclass_probability(const TwoLayerNet& net, const Dataset& data) {
  require(data.size() > 0, "misclass_probability: empty sample");
  require(!data.regression(), "misclass_probability: regression data has no classes");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto h = eval(net, data.point(i));
    if (data.binary()) {
      if (data.binary_label(i) * h[0] <= 0.0) ++wrong;
    } else if (multiclass_margin(h, data.cls[i], data.labels) <= 0.0) {
      ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

double margin_functional(const Loss& loss, std::span<const double> z, double lambda) {
  require(loss.invertible(), "margin_functional: " + loss.token() + " loss is not invertible");
  require(lambda > 0.0, "margin_functional: lambda must be positive");
  require(!z.empty(), "margin_functional: empty sample");
  std::vector<double> scaled(z.size());
  switch (loss.kind()) {
    case LossKind::exp:
      for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = lambda * z[i];
      return log_mean_exp(scaled) / lambda;
    case LossKind::logistic:
      for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = loss.log_value(lambda * z[i]);
      return log_expm1_from_log(log_mean_exp(scaled)) / lambda;
    default: {
      double s = 0.0;
      for (double v : z) s += loss.value(lambda * v);
      return loss.inverse(s / static_cast<double>(z.size())) / lambda;
    }
  }
}

double margin_functional(const TwoLayerNet& net, const Loss& loss, const Dataset& data, double lambda) {
  return margin_functional(loss, negative_margins(net, data), lambda);
}

double max_margin(const TwoLayerNet& net, const Dataset& data) {
  const auto z = negative_margins(net, data);
  require(!z.empty(), "max_margin: empty sample");
  return *std::max_element(z.begin(), z.end());
}

double multiclass_margin(std::span<const double> h, int j, const std::vector<std::vector<double>>& labels) {
  require(labels.size() >= 2, "multiclass_margin: need at least two labels");
  require(j >= 0 && static_cast<std::size_t>(j) < labels.size(), "multiclass_margin: class index out of range");
  double own = 0.0;
  double other = -kInf;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i].size() == h.size(), "multiclass_margin: dimension mismatch");
    double v = 0.0;
    for (std::size_t c = 0; c < h.size(); ++c) v += h[c] * labels[i][c];
    if (static_cast<int>(i) == j)
      own = v;
    else
      other = std::max(other, v);
  }
  return own - other;
}

double xent_risk(const TwoLayerNet& net, const Dataset& data) {
  require(data.size() > 0, "xent_risk: empty sample");
  const MultiClassLoss loss(data.labels);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += loss.value(eval(net, data.point(i)), data.cls[i]);
  return s / static_cast<double>(data.size());
}

std::pair<double, double> multiclass_margin_functional(const TwoLayerNet& net, const Dataset& data, double lambda) {
  require(lambda > 0.0, "multiclass_margin_functional: lambda must be positive");
  require(data.size() > 0 && !data.regression(), "multiclass_margin_functional: need a labeled sample");
  const auto& labels = data.labels;
  std::vector<double> log_terms(data.size());
  std::vector<double> s(labels.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto h = eval(net, data.point(p));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      double v = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) v += h[c] * labels[i][c];
      s[i] = v;
    }
    const int j = data.cls[p];
    std::vector<double> others;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (static_cast<int>(i) != j) others.push_back(lambda * (s[i] - s[j]));
    log_terms[p] = log_softplus(log_sum_exp(others));
  }
  const double log_r = log_mean_exp(log_terms);
  return {std::exp(log_r) / lambda, log_r / lambda};
}

}  // namespace barron
