#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "barron/measure.hpp"
#include "barron/rng.hpp"

namespace barron {

// Labeled points. Classification: cls[i] indexes labels. Regression: labels
// empty and target holds the values.
struct Dataset {
  std::size_t d = 0;
  std::vector<std::vector<double>> labels;
  std::vector<double> x;
  std::vector<int> cls;
  std::vector<double> target;

  std::size_t size() const { return d == 0 ? 0 : x.size() / d; }
  std::span<const double> point(std::size_t i) const { return {x.data() + i * d, d}; }
  bool regression() const { return labels.empty(); }
  bool binary() const { return labels.size() == 2 && labels[0].size() == 1; }
  std::size_t out_dim() const { return labels.empty() ? 1 : labels[0].size(); }
  double binary_label(std::size_t i) const { return labels[cls[i]][0]; }
  // Largest dual norm of a point; the radius R used by the bounds.
  double radius(WeightNorm norm = WeightNorm::l1) const;
};

enum class DistanceNorm { linf, l2 };

struct ComplexityBounds {
  std::optional<double> lower;
  std::string lower_source;
  std::optional<double> upper;
  std::string upper_source;
};

enum class RegressionTarget { abs_max, two_bump, coordinate };

struct Problem {
  std::string name;
  std::size_t d = 0;
  // Binary problems use {+1} for class 0 and {-1} for class 1. Empty in regression mode.
  std::vector<std::vector<double>> labels;
  double radius = 1.0;
  // Class separation; 0 if classes touch, infinity with a single class.
  double delta = 0.0;
  DistanceNorm delta_norm = DistanceNorm::linf;
  std::optional<double> density_alpha;
  ComplexityBounds known_q;
  std::optional<double> paper_claimed_q;
  std::optional<double> grid_worst_partition_q;
  std::optional<ParamMeasure> witness;
  std::optional<double> lipschitz;

  // Writes a point into x and returns its class index (-1 in regression mode).
  std::function<int(Rng&, std::span<double>)> draw;
  std::function<int(std::span<const double>)> category;
  std::function<double(std::span<const double>)> target;

  bool regression() const { return labels.empty(); }
  bool binary() const { return labels.size() == 2 && labels[0].size() == 1; }
  std::size_t num_classes() const { return labels.size(); }
  std::size_t out_dim() const { return labels.empty() ? 1 : labels[0].size(); }

  Dataset sample(std::size_t n, std::uint64_t seed) const;
};

Problem separated_halfspaces(double delta, double R, std::size_t d);
Problem concentric_spheres(double outer, double inner, std::size_t d);
// labeling holds +-1 per grid point in lexicographic order of (i_1, ..., i_d), i_j in -N..N.
Problem grid_problem(int N, std::size_t d, std::vector<int> labeling);
Problem touching_1d(double alpha);
Problem multiclass_sectors(std::size_t k, double gap_degrees, double R);
Problem lipschitz_regression(RegressionTarget target, std::size_t d);

std::vector<double> grid_points(int N, std::size_t d);
std::vector<int> alternating_labeling(int N, std::size_t d);
// Calls fn for every labeling; requires (2N+1)^d <= 20.
void for_each_grid_labeling(int N, std::size_t d, const std::function<void(const std::vector<int>&)>& fn);

// min over i != j of |y_i - y_j|_2.
double min_label_gap(const std::vector<std::vector<double>>& labels);

// Label vectors of the classes other than j.
std::vector<std::vector<double>> excluded_categories(const std::vector<std::vector<double>>& labels, int j);

// Exact O(n^2) scan; infinity when all points share a class.
double min_cross_class_distance(const Dataset& data, DistanceNorm norm = DistanceNorm::linf);

// Parses "halfspace:delta=0.5,d=4", "spheres:outer=2,inner=1,d=5", "grid:N=2,d=1,labeling=alternating",
// "touching:alpha=1", "sectors:k=3,gap=20,R=1", "regression:target=absmax,d=2", "csv:path=points.csv".
Problem parse_problem(std::string_view spec);

void write_dataset_csv(std::ostream& os, const Dataset& data, const std::string& comment = "");
Dataset read_dataset_csv(std::istream& is);
// Empirical distribution over a labeled point cloud.
Problem problem_from_dataset(const Dataset& data, std::string name = "csv");

}  // namespace barron
