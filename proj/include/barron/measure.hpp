#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "barron/net.hpp"
#include "barron/rng.hpp"

namespace barron {

struct Atom {
  double weight = 0.0;
  std::vector<double> a;
  std::vector<double> w;
  double b = 0.0;
};

// Finitely supported parameter measure.
struct DiscreteMeasure {
  std::size_t d = 0;
  std::size_t k = 1;
  std::vector<Atom> atoms;
  WeightNorm norm = WeightNorm::l1;
};

// alpha + beta |x|_2, realized as a constant atom plus beta times the uniform
// measure on the unit sphere. Measured in the l2 convention.
struct RadialMeasure {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t d = 1;
};

using ParamMeasure = std::variant<DiscreteMeasure, RadialMeasure>;

// sqrt(pi) d Gamma(d/2) / Gamma((d+1)/2), the normalizing constant as printed.
double c_d(std::size_t d);

// 1 / E_u relu(u_1) for u uniform on the unit sphere: 2 sqrt(pi) Gamma((d+1)/2) / Gamma(d/2).
double sphere_relu_normalizer(std::size_t d);

void validate(const ParamMeasure& pi);
std::size_t input_dim(const ParamMeasure& pi);
std::size_t output_dim(const ParamMeasure& pi);
WeightNorm weight_norm(const ParamMeasure& pi);

double barron_norm_upper(const ParamMeasure& pi);
std::vector<double> measure_eval(const ParamMeasure& pi, std::span<const double> x);

// 2 x_1 / delta from two atoms; norm 4 / delta.
ParamMeasure halfspace_classifier(double delta, std::size_t d);
// +1 on the radius-outer sphere, -1 on the radius-inner sphere.
ParamMeasure radial_classifier(double outer, double inner, std::size_t d);
// x -> A x with A given row-major k x d, through relu(x_l) - relu(-x_l).
ParamMeasure linear_map_measure(std::span<const double> A, std::size_t k, std::size_t d);

enum class ApproxMode { l2, sup };

struct DirectApproxReport {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t best_trial = 0;
  ApproxMode mode = ApproxMode::l2;
  double best_error = 0.0;
  double rms_error = 0.0;  // root mean square of the per-trial errors
  double bound = 0.0;
  double source_norm = 0.0;
  double net_path_norm = 0.0;
  double radius = 0.0;
  bool pass = false;
  std::vector<double> trial_errors;
};

struct SampledNetwork {
  TwoLayerNet net;
  DirectApproxReport report;
};

// One m-atom draw from pi after normalizing atoms to equal norm.
TwoLayerNet draw_network(const ParamMeasure& pi, std::size_t m, Rng& rng);

// Best of `best_of` draws, scored on the validation points (row-major n x d).
// radius defaults to the max dual norm over the validation points.
SampledNetwork sample_network(const ParamMeasure& pi, std::size_t m, std::uint64_t seed,
                              std::size_t best_of, std::span<const double> validation,
                              ApproxMode mode = ApproxMode::l2,
                              std::optional<double> radius = std::nullopt, std::size_t jobs = 1);

}  // namespace barron
