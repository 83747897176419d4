#include "barron/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "barron/error.hpp"

namespace barron {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> binary_labels() { return {{1.0}, {-1.0}}; }

std::vector<std::vector<double>> one_hot_labels(std::size_t k) {
  std::vector<std::vector<double>> labels(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) labels[i][i] = 1.0;
  return labels;
}

double distance(std::span<const double> x, std::span<const double> y, DistanceNorm norm) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double e = std::abs(x[j] - y[j]);
    s = norm == DistanceNorm::linf ? std::max(s, e) : s + e * e;
  }
  return norm == DistanceNorm::linf ? s : std::sqrt(s);
}

void set_separation_lower(Problem& p) {
  if (p.delta > 0.0 && std::isfinite(p.delta))
    p.known_q.lower = p.binary() ? 2.0 / p.delta : 2.0 / (p.delta * min_label_gap(p.labels));
  else if (p.delta == kInf)
    p.known_q.lower = 0.0;
  if (p.known_q.lower) p.known_q.lower_source = "lipschitz-separation";
}

std::size_t grid_size(int N, std::size_t d) {
  std::size_t s = 1;
  for (std::size_t j = 0; j < d; ++j) s *= static_cast<std::size_t>(2 * N + 1);
  return s;
}

std::map<std::string, std::string> parse_params(std::string_view body) {
  std::map<std::string, std::string> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const auto item = body.substr(0, comma);
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    require(eq != std::string_view::npos, "problem spec: expected key=value, got '" + std::string(item) + "'");
    out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
  }
  return out;
}

double to_number(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  require(res.ec == std::errc() && res.ptr == end, "problem spec: bad number for " + key + ": '" + s + "'");
  return v;
}

}  // namespace

double Dataset::radius(WeightNorm norm) const {
  double r = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (double v : point(i)) s = norm == WeightNorm::l1 ? std::max(s, std::abs(v)) : s + v * v;
    r = std::max(r, norm == WeightNorm::l1 ? s : std::sqrt(s));
  }
  return r;
}

Dataset Problem::sample(std::size_t n, std::uint64_t seed) const {
  require(static_cast<bool>(draw), "problem: no sampler");
  Dataset data;
  data.d = d;
  data.labels = labels;
  data.x.resize(n * d);
  if (regression())
    data.target.resize(n);
  else
    data.cls.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> x(data.x.data() + i * d, d);
    const int c = draw(rng, x);
    if (regression())
      data.target[i] = target(x);
    else
      data.cls[i] = c;
  }
  return data;
}

double min_label_gap(const std::vector<std::vector<double>>& labels) {
  double gap = kInf;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < labels[i].size(); ++c) s += (labels[i][c] - labels[j][c]) * (labels[i][c] - labels[j][c]);
      gap = std::min(gap, std::sqrt(s));
    }
  return gap;
}

std::vector<std::vector<double>> excluded_categories(const std::vector<std::vector<double>>& labels, int j) {
  require(j >= 0 && static_cast<std::size_t>(j) < labels.size(), "excluded_categories: class index out of range");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (static_cast<int>(i) != j) out.push_back(labels[i]);
  return out;
}

double min_cross_class_distance(const Dataset& data, DistanceNorm norm) {
  require(!data.regression(), "min_cross_class_distance: regression data has no classes");
  double best = kInf;
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (data.cls[i] != data.cls[j]) best = std::min(best, distance(data.point(i), data.point(j), norm));
  return best;
}

Problem separated_halfspaces(double delta, double R, std::size_t d) {
  require(d >= 1, "separated_halfspaces: dimension must be positive");
  require(delta > 0.0 && delta < 2.0 * R, "separated_halfspaces: need 0 < delta < 2R");
  Problem p;
  p.name = "halfspace";
  p.d = d;
  p.labels = binary_labels();
  p.radius = R;
  p.delta = delta;
  p.witness = halfspace_classifier(delta, d);
  p.known_q.upper = 4.0 / delta;
  p.known_q.upper_source = "analytic-classifier";
  p.paper_claimed_q = 2.0 / delta;
  set_separation_lower(p);
  p.category = [](std::span<const double> x) { return x[0] > 0.0 ? 0 : 1; };
  p.draw = [delta, R](Rng& rng, std::span<double> x) {
    const double mag = uniform(rng, delta / 2.0, R);
    const int s = rademacher_sign(rng);
    x[0] = s * mag;
    for (std::size_t j = 1; j < x.size(); ++j) x[j] = uniform(rng, -R, R);
    return s > 0 ? 0 : 1;
  };
  return p;
}

Problem concentric_spheres(double outer, double inner, std::size_t d) {
  require(d >= 1, "concentric_spheres: dimension must be positive");
  require(inner > 0.0 && outer > inner, "concentric_spheres: need outer > inner > 0");
  Problem p;
  p.name = "spheres";
  p.d = d;
  p.labels = binary_labels();
  p.radius = outer;
  p.delta = outer - inner;
  p.delta_norm = DistanceNorm::l2;
  p.witness = radial_classifier(outer, inner, d);
  p.known_q.upper = 1.0 + 2.0 * outer / p.delta + 4.0 * std::sqrt(2.0 * std::numbers::pi * d + 1.0) / p.delta;
  p.known_q.upper_source = "analytic-classifier";
  set_separation_lower(p);
  const double mid = 0.5 * (outer + inner);
  p.category = [mid](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s) >= mid ? 0 : 1;
  };
  p.draw = [outer, inner](Rng& rng, std::span<double> x) {
    const int c = rademacher_sign(rng) > 0 ? 0 : 1;
    double s = 0.0;
    do {
      s = 0.0;
      for (double& v : x) {
        v = gaussian(rng);
        s += v * v;
      }
    } while (s == 0.0);
    const double r = (c == 0 ? outer : inner) / std::sqrt(s);
    for (double& v : x) v *= r;
    return c;
  };
  return p;
}

std::vector<double> grid_points(int N, std::size_t d) {
  require(N >= 1 && d >= 1, "grid_points: need N >= 1 and d >= 1");
  const std::size_t count = grid_size(N, d);
  std::vector<double> pts(count * d);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    for (std::size_t j = d; j-- > 0;) {
      const int i = static_cast<int>(rem % (2 * N + 1)) - N;
      rem /= (2 * N + 1);
      pts[idx * d + j] = static_cast<double>(i) / N;
    }
  }
  return pts;
}

std::vector<int> alternating_labeling(int N, std::size_t d) {
  const auto pts = grid_points(N, d);
  const std::size_t count = pts.size() / d;
  std::vector<int> labels(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    long sum = 0;
    for (std::size_t j = 0; j < d; ++j) sum += std::lround(pts[idx * d + j] * N);
    labels[idx] = (sum % 2 == 0) ? 1 : -1;
  }
  return labels;
}

void for_each_grid_labeling(int N, std::size_t d, const std::function<void(const std::vector<int>&)>& fn) {
  require(N >= 1 && d >= 1, "for_each_grid_labeling: need N >= 1 and d >= 1");
  const std::size_t count = grid_size(N, d);
  require(count <= 20, "for_each_grid_labeling: more than 20 grid points");
  std::vector<int> labels(count);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << count); ++mask) {
    for (std::size_t i = 0; i < count; ++i) labels[i] = (mask >> i) & 1 ? -1 : 1;
    fn(labels);
  }
}

Problem grid_problem(int N, std::size_t d, std::vector<int> labeling) {
  require(N >= 1 && d >= 1, "grid_problem: need N >= 1 and d >= 1");
  const std::size_t count = grid_size(N, d);
  require(labeling.size() == count, "grid_problem: labeling size must be (2N+1)^d");
  for (int v : labeling) require(v == 1 || v == -1, "grid_problem: labels must be +1 or -1");
  Problem p;
  p.name = "grid";
  p.d = d;
  p.labels = binary_labels();
  p.radius = 1.0;
  auto pts = std::make_shared<std::vector<double>>(grid_points(N, d));
  auto labs = std::make_shared<std::vector<int>>(std::move(labeling));
  Dataset all;
  all.d = d;
  all.labels = p.labels;
  all.x = *pts;
  for (int v : *labs) all.cls.push_back(v > 0 ? 0 : 1);
  p.delta = min_cross_class_distance(all, DistanceNorm::linf);
  set_separation_lower(p);
  const double step = 1.0 / N;
  p.grid_worst_partition_q = std::pow((2.0 + step) / step, static_cast<double>(d) / 2.0);
  p.category = [pts, labs, N, d](std::span<const double> x) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const long i = std::clamp<long>(std::lround(x[j] * N), -N, N);
      idx = idx * (2 * N + 1) + static_cast<std::size_t>(i + N);
    }
    return (*labs)[idx] > 0 ? 0 : 1;
  };
  p.draw = [pts, labs, count, d](Rng& rng, std::span<double> x) {
    const std::size_t idx = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
    std::copy(pts->begin() + idx * d, pts->begin() + (idx + 1) * d, x.begin());
    return (*labs)[idx] > 0 ? 0 : 1;
  };
  return p;
}

Problem touching_1d(double alpha) {
  require(alpha > -1.0, "touching_1d: alpha must exceed -1");
  Problem p;
  p.name = "touching";
  p.d = 1;
  p.labels = binary_labels();
  p.radius = 1.0;
  p.delta = 0.0;
  p.density_alpha = alpha;
  p.category = [](std::span<const double> x) { return x[0] >= 0.0 ? 0 : 1; };
  const double expo = 1.0 / (alpha + 1.0);
  p.draw = [expo](Rng& rng, std::span<double> x) {
    const double u = uniform(rng, -1.0, 1.0);
    x[0] = std::copysign(std::pow(std::abs(u), expo), u);
    return x[0] >= 0.0 ? 0 : 1;
  };
  return p;
}

Problem multiclass_sectors(std::size_t k, double gap_degrees, double R) {
  require(k >= 3, "multiclass_sectors: need k >= 3");
  require(R > 0.0, "multiclass_sectors: radius must be positive");
  const double width = 2.0 * std::numbers::pi / static_cast<double>(k);
  const double gap = gap_degrees * std::numbers::pi / 180.0;
  require(gap > 0.0 && gap < width, "multiclass_sectors: gap must lie in (0, 360/k) degrees");
  Problem p;
  p.name = "sectors";
  p.d = 2;
  p.labels = one_hot_labels(k);
  p.radius = R;
  p.delta = 2.0 * (R / 2.0) * std::sin(gap / 2.0);
  p.delta_norm = DistanceNorm::l2;
  set_separation_lower(p);

  // h(x) = c U x with U rows the sector centre directions; c makes the worst margin exactly 1.
  const double half = (width - gap) / 2.0;
  const double c = 1.0 / ((R / 2.0) * (std::cos(half) - std::cos(half + gap)));
  std::vector<double> A(k * 2);
  for (std::size_t j = 0; j < k; ++j) {
    const double theta = (static_cast<double>(j) + 0.5) * width;
    A[j * 2] = c * std::cos(theta);
    A[j * 2 + 1] = c * std::sin(theta);
  }
  p.witness = linear_map_measure(A, k, 2);
  p.known_q.upper = barron_norm_upper(*p.witness);
  p.known_q.upper_source = "analytic-classifier";

  p.category = [k, width](std::span<const double> x) {
    double phi = std::atan2(x[1], x[0]);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(phi / width), k - 1));
  };
  p.draw = [k, width, gap, R](Rng& rng, std::span<double> x) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    const double phi = static_cast<double>(j) * width + gap / 2.0 + uniform01(rng) * (width - gap);
    const double r = uniform(rng, R / 2.0, R);
    x[0] = r * std::cos(phi);
    x[1] = r * std::sin(phi);
    return static_cast<int>(j);
  };
  return p;
}

Problem lipschitz_regression(RegressionTarget target, std::size_t d) {
  require(d >= 1, "lipschitz_regression: dimension must be positive");
  Problem p;
  p.d = d;
  p.radius = 1.0;
  p.lipschitz = 1.0;
  switch (target) {
    case RegressionTarget::abs_max:
      p.name = "regression:absmax";
      p.target = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s = std::max(s, std::abs(v));
        return s;
      };
      break;
    case RegressionTarget::two_bump:
      p.name = "regression:twobump";
      p.target = [](std::span<const double> x) {
        double out = 0.0;
        for (double centre : {-0.5, 0.5}) {
          double s = std::abs(x[0] - centre);
          for (std::size_t j = 1; j < x.size(); ++j) s = std::max(s, std::abs(x[j]));
          out += std::max(0.0, 0.5 - s);
        }
        return out;
      };
      break;
    case RegressionTarget::coordinate:
      p.name = "regression:coordinate";
      p.target = [](std::span<const double> x) { return x[0]; };
      p.known_q.upper = 2.0;
      p.known_q.upper_source = "analytic-classifier";
      break;
  }
  p.draw = [](Rng& rng, std::span<double> x) {
    for (double& v : x) v = uniform(rng, -1.0, 1.0);
    return -1;
  };
  return p;
}

void write_dataset_csv(std::ostream& os, const Dataset& data, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
  for (std::size_t j = 0; j < data.d; ++j) os << 'x' << j << ',';
  os << (data.regression() ? "target" : "class") << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.point(i)) os << v << ',';
    if (data.regression())
      os << data.target[i] << '\n';
    else
      os << data.cls[i] << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
    break;
  }
  require(header.size() >= 2, "csv: header needs at least one x column and a class or target column");
  const bool regression = header.back() == "target";
  require(regression || header.back() == "class", "csv: last column must be 'class' or 'target'");
  Dataset data;
  data.d = header.size() - 1;
  int max_class = -1;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(to_number("csv row " + std::to_string(row), cell));
    require(vals.size() == header.size(), "csv: row " + std::to_string(row) + " has wrong column count");
    data.x.insert(data.x.end(), vals.begin(), vals.end() - 1);
    if (regression) {
      data.target.push_back(vals.back());
    } else {
      const double c = vals.back();
      require(c >= 0.0 && c == std::floor(c), "csv: class must be a nonnegative integer");
      data.cls.push_back(static_cast<int>(c));
      max_class = std::max(max_class, static_cast<int>(c));
    }
  }
  require(row > 0, "csv: no data rows");
  if (!regression) {
    require(max_class >= 1, "csv: need at least two classes");
    data.labels = max_class == 1 ? binary_labels() : one_hot_labels(static_cast<std::size_t>(max_class) + 1);
  }
  return data;
}

Problem problem_from_dataset(const Dataset& data, std::string name) {
  require(data.size() > 0, "problem_from_dataset: empty dataset");
  Problem p;
  p.name = std::move(name);
  p.d = data.d;
  p.labels = data.labels;
  p.radius = data.radius();
  auto shared = std::make_shared<Dataset>(data);
  if (data.regression()) {
    p.delta = 0.0;
  } else if (data.size() <= 20000) {
    p.delta = min_cross_class_distance(data);
    set_separation_lower(p);
  } else {
    p.delta = std::numeric_limits<double>::quiet_NaN();
  }
  p.draw = [shared](Rng& rng, std::span<double> x) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, shared->size() - 1)(rng);
    const auto pt = shared->point(i);
    std::copy(pt.begin(), pt.end(), x.begin());
    return shared->regression() ? -1 : shared->cls[i];
  };
  // Nearest stored point decides; exact on the support.
  auto nearest = [shared](std::span<const double> x) {
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < shared->size(); ++i) {
      const double dist = distance(shared->point(i), x, DistanceNorm::l2);
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    return best;
  };
  if (data.regression())
    p.target = [shared, nearest](std::span<const double> x) { return shared->target[nearest(x)]; };
  else
    p.category = [shared, nearest](std::span<const double> x) { return shared->cls[nearest(x)]; };
  return p;
}

Problem parse_problem(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  const auto params = parse_params(colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1));
  auto num = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
    const auto it = params.find(key);
    if (it == params.end()) {
      require(fallback.has_value(), "problem spec '" + std::string(spec) + "': missing " + key);
      return *fallback;
    }
    return to_number(key, it->second);
  };
  auto count = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double v = num(key, fallback);
    require(v >= 1 && v == std::floor(v), "problem spec: " + key + " must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      require(ok, "problem spec '" + std::string(spec) + "': unknown key " + key);
    }
  };
  if (kind == "halfspace") {
    check_keys({"delta", "R", "d"});
    return separated_halfspaces(num("delta"), num("R", 1.0), count("d", 2));
  }
  if (kind == "spheres") {
    check_keys({"outer", "inner", "lambda", "mu", "d"});
    const double outer = params.count("lambda") ? num("lambda") : num("outer", 2.0);
    const double inner = params.count("mu") ? num("mu") : num("inner", 1.0);
    return concentric_spheres(outer, inner, count("d", 2));
  }
  if (kind == "grid") {
    check_keys({"N", "d", "labeling"});
    const int N = static_cast<int>(count("N"));
    const std::size_t d = count("d", 1);
    const auto it = params.find("labeling");
    const std::string labeling = it == params.end() ? "alternating" : it->second;
    if (labeling == "alternating") return grid_problem(N, d, alternating_labeling(N, d));
    if (labeling == "halfspace") {
      const auto pts = grid_points(N, d);
      std::vector<int> labs(pts.size() / d);
      for (std::size_t i = 0; i < labs.size(); ++i) labs[i] = pts[i * d] >= 0.0 ? 1 : -1;
      return grid_problem(N, d, labs);
    }
    if (labeling.rfind("random", 0) == 0) {
      const auto sep = labeling.find('@');
      const std::uint64_t seed = sep == std::string::npos ? 0 : static_cast<std::uint64_t>(to_number("labeling", labeling.substr(sep + 1)));
      Rng rng(seed);
      std::vector<int> labs(grid_points(N, d).size() / d);
      for (int& v : labs) v = rademacher_sign(rng);
      return grid_problem(N, d, labs);
    }
    throw ContractError("problem spec: unknown grid labeling '" + labeling + "'");
  }
  if (kind == "touching") {
    check_keys({"alpha"});
    return touching_1d(num("alpha", 0.0));
  }
  if (kind == "sectors") {
    check_keys({"k", "gap", "R"});
    return multiclass_sectors(count("k", 3), num("gap", 20.0), num("R", 1.0));
  }
  if (kind == "regression") {
    check_keys({"target", "d"});
    const auto it = params.find("target");
    const std::string t = it == params.end() ? "absmax" : it->second;
    RegressionTarget target;
    if (t == "absmax" || t == "abs-max")
      target = RegressionTarget::abs_max;
    else if (t == "twobump" || t == "two-bump")
      target = RegressionTarget::two_bump;
    else if (t == "coordinate")
      target = RegressionTarget::coordinate;
    else
      throw ContractError("problem spec: unknown regression target '" + t + "'");
    return lipschitz_regression(target, count("d", 2));
  }
  if (kind == "csv") {
    check_keys({"path"});
    const auto it = params.find("path");
    require(it != params.end(), "problem spec: csv needs path=");
    std::ifstream in(it->second);
    require(static_cast<bool>(in), "problem spec: cannot open " + it->second);
    return problem_from_dataset(read_dataset_csv(in), "csv");
  }
  throw ContractError("problem spec: unknown problem kind '" + kind + "'");
}

}  // namespace barron
