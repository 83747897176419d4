#include "barron/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "barron/error.hpp"

namespace barron {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json opt(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

Json terms_json(const std::vector<BoundTerm>& terms) {
  Json j = Json::object();
  for (const auto& t : terms) j[t.name] = num(t.value);
  return j;
}

std::vector<double> doubles(const Json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_array(), std::string("net json: missing array ") + key);
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const TwoLayerNet& net) {
  return Json{{"m", net.m}, {"d", net.d}, {"k", net.k}, {"a", net.a}, {"w", net.w}, {"b", net.b}};
}

TwoLayerNet net_from_json(const Json& j) {
  TwoLayerNet net;
  net.m = j.at("m").get<std::size_t>();
  net.d = j.at("d").get<std::size_t>();
  net.k = j.value("k", std::size_t{1});
  net.a = doubles(j, "a");
  net.w = doubles(j, "w");
  net.b = doubles(j, "b");
  net.validate();
  return net;
}

Json to_json(const ParamMeasure& pi) {
  if (const auto* r = std::get_if<RadialMeasure>(&pi))
    return Json{{"type", "radial"}, {"alpha", r->alpha}, {"beta", r->beta}, {"d", r->d},
                {"norm_upper", num(barron_norm_upper(pi))}};
  const auto& dm = std::get<DiscreteMeasure>(pi);
  Json atoms = Json::array();
  for (const auto& a : dm.atoms) atoms.push_back(Json{{"weight", a.weight}, {"a", a.a}, {"w", a.w}, {"b", a.b}});
  return Json{{"type", "discrete"},
              {"d", dm.d},
              {"k", dm.k},
              {"norm", dm.norm == WeightNorm::l1 ? "l1" : "l2"},
              {"atoms", atoms},
              {"norm_upper", num(barron_norm_upper(pi))}};
}

Json to_json(const BoundParams& p) {
  return Json{{"Q", opt(p.Q)},
              {"R", opt(p.R)},
              {"m", opt(p.m)},
              {"n", opt(p.n)},
              {"d", opt(p.d)},
              {"conf", opt(p.conf)},
              {"k", opt(p.k)},
              {"Y", opt(p.Y)},
              {"rho_c", opt(p.rho_c)},
              {"rho_exponent", opt(p.rho_exponent)},
              {"loss_at_zero", opt(p.loss_at_zero)},
              {"loss_lipschitz", opt(p.loss_lipschitz)},
              {"alpha", opt(p.alpha)}};
}

Json to_json(const BoundReport& r) {
  Json j{{"kind", to_string(r.kind)},
         {"problem", r.problem},
         {"params", to_json(r.params)},
         {"rhs", num(r.rhs)},
         {"terms", terms_json(r.terms)},
         {"measured", num(r.measured)},
         {"std_error", num(r.std_error)},
         {"train_loss", num(r.train_loss)},
         {"misclassification", num(r.misclass)},
         {"misclassification_proxy", num(r.misclass_proxy)},
         {"misclassification_ok", r.misclass_ok},
         {"lambda", num(r.lambda)},
         {"objective", num(r.objective)},
         {"competitor", num(r.competitor)},
         {"slack", num(r.slack)},
         {"optimizer_limited", r.optimizer_limited},
         {"path_norm", num(r.path_norm)},
         {"paper_claimed_q", opt(r.paper_claimed_q)},
         {"pass", r.pass}};
  if (!r.rho_points.empty()) {
    Json pts = Json::array();
    for (const auto& [q, v] : r.rho_points) pts.push_back(Json{{"Q", q}, {"rho", num(v)}});
    j["rho_points"] = pts;
  }
  if (r.kind == BoundKind::regression) {
    j["small_network_bound"] = num(r.small_network_bound);
    j["best_net_error"] = num(r.best_net_error);
    j["small_network_ok"] = r.small_network_ok;
  }
  j["diagnostics"] = r.diagnostics;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

Json to_json(const RhoCurve& c) {
  Json pts = Json::array();
  for (const auto& p : c.points)
    pts.push_back(Json{{"Q", p.q},
                       {"rho", num(p.rho)},
                       {"population", num(p.population)},
                       {"oracle", num(p.oracle)},
                       {"noisy", p.noisy},
                       {"path_norm", num(p.path_norm)}});
  return Json{{"points", pts},
              {"exponent", num(c.exponent)},
              {"intercept", num(c.intercept)},
              {"fitted", c.fitted},
              {"diagnostics", c.diagnostics}};
}

Json to_json(const DirectApproxReport& r) {
  return Json{{"m", r.m},
              {"trials", r.trials},
              {"best_trial", r.best_trial},
              {"mode", r.mode == ApproxMode::l2 ? "l2" : "sup"},
              {"best_error", num(r.best_error)},
              {"rms_error", num(r.rms_error)},
              {"bound", num(r.bound)},
              {"source_norm", num(r.source_norm)},
              {"net_path_norm", num(r.net_path_norm)},
              {"radius", num(r.radius)},
              {"pass", r.pass}};
}

Json to_json(const RademacherEstimate& r) {
  return Json{{"n", r.n},
              {"d", r.d},
              {"trials", r.trials},
              {"Q", r.q},
              {"radius", num(r.radius)},
              {"mean", num(r.mean)},
              {"std_error", num(r.std_error)},
              {"bound", num(r.bound)},
              {"solver", r.solver},
              {"restarts", r.restarts},
              {"pass", r.mean <= r.bound}};
}

Json to_json(const TrainTrace& t) {
  return Json{{"best_restart", t.best_restart},
              {"lambda", num(t.lambda)},
              {"objective", num(t.objective)},
              {"risk", num(t.risk)},
              {"path_norm", num(t.path_norm)},
              {"min_margin", num(t.min_margin)},
              {"wall_seconds", t.wall_seconds},
              {"budget_exhausted", t.budget_exhausted},
              {"diagnostics", t.diagnostics}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(std::ostream& os, const std::string& comment, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  require(!header.empty(), "csv: empty header");
  if (!comment.empty()) os_ << "# " << comment << "\r\n";
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << csv_escape(header[i]);
  os_ << "\r\n";
}

void CsvWriter::cell(const std::string& text) {
  require(filled_ < columns_, "csv: too many cells in row");
  os_ << (filled_ ? "," : "") << csv_escape(text);
  ++filled_;
}

CsvWriter& CsvWriter::operator<<(double v) {
  cell(format_double(v));
  return *this;
}
CsvWriter& CsvWriter::operator<<(long long v) {
  cell(std::to_string(v));
  return *this;
}
CsvWriter& CsvWriter::operator<<(std::size_t v) {
  cell(std::to_string(v));
  return *this;
}
CsvWriter& CsvWriter::operator<<(const std::string& v) {
  cell(v);
  return *this;
}

void CsvWriter::end_row() {
  require(filled_ == columns_, "csv: row has " + std::to_string(filled_) + " cells, header has " +
                                   std::to_string(columns_));
  os_ << "\r\n";
  filled_ = 0;
}

std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    require(!quoted, "csv: unterminated quote");
    row.push_back(std::move(cur));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot open " + path.string() + " for writing");
  os << text;
  require(static_cast<bool>(os), "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace barron
