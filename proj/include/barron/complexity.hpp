#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "barron/net.hpp"
#include "barron/problems.hpp"

namespace barron {

struct PgaConfig {
  std::size_t restarts = 32;  // split evenly between the two output signs
  std::size_t steps = 500;
  double step = 0.05;
  std::size_t decay_every = 100;
  double decay = 0.5;
};

struct RademacherEstimate {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trials = 0;
  double q = 0.0;
  double radius = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::string solver;
  std::size_t restarts = 0;
  std::vector<double> per_trial;
};

// 2 Q max{1,R} sqrt(log(2d+2)/N).
double rademacher_bound(double Q, double R, std::size_t d, std::size_t N);

// Sign vector for one trial; shared by the solver and the oracles.
std::vector<double> rademacher_signs(std::size_t n, std::uint64_t seed, std::size_t trial);

// sup over |w|_1 + |b| <= 1 and s = +-1 of s (1/N) sum xi_i relu(w.x_i + b), by projected ascent.
double single_neuron_sup(std::span<const double> points, std::size_t d, std::span<const double> xi,
                         std::uint64_t seed, const PgaConfig& cfg = {});
// Same sup by grids on the faces of the l1 sphere; d = 1 (nodes per edge) or d = 2 (nodes per face edge).
double single_neuron_sup_grid(std::span<const double> points, std::size_t d, std::span<const double> xi,
                              std::size_t nodes);

RademacherEstimate rademacher_estimate(std::span<const double> points, std::size_t d, double Q,
                                       std::size_t trials, std::uint64_t seed, const PgaConfig& cfg = {},
                                       std::size_t jobs = 1);
RademacherEstimate rademacher_brute_1d(std::span<const double> points, double Q, std::size_t trials,
                                       std::uint64_t seed, std::size_t nodes = 2001);
RademacherEstimate rademacher_brute_2d(std::span<const double> points, double Q, std::size_t trials,
                                       std::uint64_t seed, std::size_t nodes = 201);

// ((2 + delta) / delta)^(d/2).
double grid_lower_bound_formula(double delta, std::size_t d);
// Same, with delta checked against the grid spacing 1/N.
double grid_lower_bound(int N, std::size_t d, double delta);

// 2/delta (binary) or 2 / (delta min_{i != j} |y_i - y_j|); 0 for a single class.
double complexity_lower_separation(const Problem& problem);

struct UpperBudget {
  std::size_t stages = 4;
  std::size_t steps = 1500;
  std::size_t restarts = 2;
  double lambda0 = 0.02;
  double lambda_ratio = 0.5;
  std::size_t audit_n = 100000;
  std::size_t jobs = 1;
};

struct ComplexityEstimate {
  std::optional<double> lower;
  std::string lower_source;
  std::optional<double> upper;
  std::string upper_source;
  std::optional<TwoLayerNet> witness;
  double audit_margin = 0.0;
  std::vector<std::string> diagnostics;
};

// Squared hinge (binary) or cross-entropy (multiclass) under a decreasing path-norm penalty,
// then the smallest rescaling with audit margin >= 1.
ComplexityEstimate complexity_upper_trained(const Problem& problem, const Dataset& sample, std::size_t m,
                                            const UpperBudget& budget, std::uint64_t seed);

}  // namespace barron
