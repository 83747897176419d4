#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "barron/complexity.hpp"
#include "barron/losses.hpp"
#include "barron/measure.hpp"
#include "barron/problems.hpp"

namespace barron {

struct ApproxSweep {
  std::vector<DirectApproxReport> rows;
  double slope_rms = 0.0;   // log-log slope of the RMS trial error against m
  double slope_best = 0.0;  // same for the best-of error
  bool all_pass = false;
};

// Direct sampling from the problem's witness measure for each m.
ApproxSweep approx_sweep(const Problem& problem, const std::vector<std::size_t>& ms, std::size_t best_of,
                         std::size_t n_validation, ApproxMode mode, std::uint64_t seed, std::size_t jobs = 1);

struct RademacherRow {
  RademacherEstimate estimate;
  std::optional<RademacherEstimate> oracle;  // grid oracle in d = 1, 2
  double rel_diff = 0.0;
};

// S uniform in [-1,1]^d with N points per row; one sample per N.
std::vector<RademacherRow> rademacher_sweep(std::size_t d, const std::vector<std::size_t>& ns, double Q,
                                            std::size_t trials, std::uint64_t seed, bool with_oracle,
                                            const PgaConfig& pga = {}, std::size_t jobs = 1);

struct MarginRow {
  std::size_t net = 0;
  double lambda = 0.0;
  double functional = 0.0;
  double limit = 0.0;  // max_i -y_i f(x_i)
  double gap = 0.0;
  double allowed = 0.0;
  bool pass = false;
};

struct MarginSweep {
  std::vector<MarginRow> rows;
  bool all_pass = false;
};

// Random nets labelled by their own sign on n points with |f| >= min_abs (after scaling the median |f| to 1).
// exp: |F - limit| <= log(n)/lambda; logistic: same plus tol at every lambda >= 100 (exponential-tail regime);
// power: |F_lambda - F_lambda0| <= tol relative once lambda min|z| > mu_cut.
MarginSweep margin_sweep(const Problem& problem, const Loss& loss, std::size_t n, const std::vector<double>& lambdas,
                         std::size_t nets, std::size_t m, std::uint64_t seed, double min_abs = 0.05);

}  // namespace barron
