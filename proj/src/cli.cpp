#include "barron/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "barron/bounds.hpp"
#include "barron/error.hpp"
#include "barron/experiments.hpp"
#include "barron/io.hpp"
#include "barron/parallel.hpp"
#include "barron/svg.hpp"

#ifndef BARRON_VERSION
#define BARRON_VERSION "0.0.0"
#endif
#ifndef BARRON_GIT_DESCRIBE
#define BARRON_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;

namespace barron::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == s.size() && !s.empty(), "not a number: '" + s + "'");
  return v;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BARRON_BOUNDS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ContractError(std::string("BARRON_BOUNDS_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

struct Globals {
  std::string out_dir = "out";
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  bool svg = false;
  bool assert_ = false;
  std::string config;
};

// Files are collected here and written once at the end.
struct Outputs {
  std::vector<std::pair<fs::path, std::string>> files;
  std::vector<std::string> inputs;
  void add(const Globals& g, const std::string& name, std::string text) {
    files.emplace_back(fs::path(g.out_dir) / name, std::move(text));
  }
};

struct TrainFlags {
  std::size_t steps = 2000;
  double lr = 0.1;
  std::size_t restarts = 8;
  double lr_decay_epochs = 200;

  void attach(CLI::App* app) {
    app->add_option("--steps", steps, "gradient steps per restart")->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "base step size")->check(CLI::PositiveNumber);
    app->add_option("--restarts", restarts, "random restarts")->check(CLI::PositiveNumber);
    app->add_option("--lr-decay", lr_decay_epochs, "step size halves after this many steps")
        ->check(CLI::PositiveNumber);
  }
  void apply(TrainConfig& cfg) const {
    cfg.steps = steps;
    cfg.lr = lr;
    cfg.restarts = restarts;
    cfg.lr_decay_epochs = lr_decay_epochs;
  }
};

Penalty parse_penalty(const std::string& s) {
  if (s == "none") return Penalty::none;
  if (s == "linear") return Penalty::linear;
  if (s == "squared") return Penalty::squared;
  throw ContractError("unknown penalty: " + s);
}

Objective parse_objective(const std::string& s, const Problem& p) {
  if (s == "auto") {
    if (p.regression()) return Objective::least_squares;
    return p.binary() ? Objective::margin : Objective::cross_entropy;
  }
  if (s == "margin") return Objective::margin;
  if (s == "xent") return Objective::cross_entropy;
  if (s == "lsq") return Objective::least_squares;
  throw ContractError("unknown objective: " + s);
}

ApproxMode parse_mode(const std::string& s) {
  if (s == "l2") return ApproxMode::l2;
  if (s == "sup") return ApproxMode::sup;
  throw ContractError("unknown approximation mode: " + s);
}

std::string to_text(const Json& j) { return j.dump(2) + "\n"; }

std::string chart(const std::vector<Series>& s, ChartOptions o) { return line_chart(s, o); }

// ---- approx-sweep

struct ApproxCmd {
  std::string problem = "halfspace:delta=0.5,d=4";
  std::string ms = "8..512";
  std::size_t best_of = 20;
  std::size_t validation = 10000;
  std::string mode = "l2";
  double slope_target = -0.5;
  double slope_tol = 0.15;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "problem spec with a witness measure");
    app->add_option("--m", ms, "widths: lo..hi (doubling) or a comma list");
    app->add_option("--best-of", best_of, "draws per width")->check(CLI::PositiveNumber);
    app->add_option("--validation", validation, "validation points")->check(CLI::PositiveNumber);
    app->add_option("--mode", mode, "l2 | sup");
    app->add_option("--slope-target", slope_target, "expected log-log slope (assert)");
    app->add_option("--slope-tol", slope_tol, "slope tolerance (assert)");
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    const auto sweep = approx_sweep(p, parse_size_list(ms), best_of, validation, parse_mode(mode), g.seed, g.jobs);
    std::ostringstream csv;
    CsvWriter w(csv, "direct approximation: error <= Q max{1,R}/sqrt(m) (l2) or times sqrt(k(d+1)/m) (sup)",
                {"m", "best_error", "rms_error", "bound", "source_norm", "net_path_norm", "pass"});
    Series best{"best-of error", {}, {}}, rms{"rms error", {}, {}}, bound{"bound", {}, {}, true, false};
    for (const auto& r : sweep.rows) {
      w << r.m << r.best_error << r.rms_error << r.bound << r.source_norm << r.net_path_norm << r.pass;
      w.end_row();
      const double m = static_cast<double>(r.m);
      best.x.push_back(m), best.y.push_back(r.best_error);
      rms.x.push_back(m), rms.y.push_back(r.rms_error);
      bound.x.push_back(m), bound.y.push_back(r.bound);
    }
    o.add(g, "approx_sweep.csv", csv.str());
    const bool slope_ok = std::abs(sweep.slope_rms - slope_target) <= slope_tol;
    Json summary{{"problem", p.name},
                 {"slope_rms", sweep.slope_rms},
                 {"slope_best", sweep.slope_best},
                 {"slope_ok", slope_ok},
                 {"all_within_bound", sweep.all_pass}};
    o.add(g, "approx_sweep.json", to_text(summary));
    if (g.svg)
      o.add(g, "approx_sweep.svg",
            chart({best, rms, bound}, {"direct approximation", "m", "L2 error", true, true}));
    out << "approx-sweep: slope " << format_double(sweep.slope_rms) << (sweep.all_pass ? ", all within bound\n"
                                                                                        : ", bound violated\n");
    return sweep.all_pass && slope_ok;
  }
};

// ---- rademacher

struct RademacherCmd {
  std::size_t d = 1;
  std::string ns = "64,256,1024";
  double q = 1.0;
  std::size_t trials = 200;
  std::size_t restarts = 32;
  std::size_t pga_steps = 500;
  bool oracle = false;
  double oracle_tol = 0.01;

  void attach(CLI::App* app) {
    app->add_option("--d", d, "input dimension")->check(CLI::PositiveNumber);
    app->add_option("--n", ns, "sample sizes");
    app->add_option("--q", q, "ball radius")->check(CLI::PositiveNumber);
    app->add_option("--trials", trials, "sign draws")->check(CLI::PositiveNumber);
    app->add_option("--restarts", restarts, "ascent restarts per sup")->check(CLI::PositiveNumber);
    app->add_option("--pga-steps", pga_steps, "ascent steps per restart")->check(CLI::PositiveNumber);
    app->add_flag("--oracle", oracle, "grid oracle (d <= 2)");
    app->add_option("--oracle-tol", oracle_tol, "relative tolerance against the oracle (assert)");
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    PgaConfig pga;
    pga.restarts = restarts;
    pga.steps = pga_steps;
    const auto rows = rademacher_sweep(d, parse_size_list(ns), q, trials, g.seed, oracle, pga, g.jobs);
    std::ostringstream csv;
    CsvWriter w(csv, "Rademacher complexity of the path-norm ball: Rad <= 2 Q max{1,R} sqrt(log(2d+2)/N)",
                {"n", "d", "trials", "Q", "mean", "std_error", "bound", "pass", "oracle_mean", "rel_diff"});
    bool ok = true;
    Series est{"estimate", {}, {}}, bnd{"bound", {}, {}, true, false};
    for (const auto& r : rows) {
      const auto& e = r.estimate;
      const bool pass = e.mean <= e.bound;
      ok = ok && pass && (!r.oracle || r.rel_diff <= oracle_tol);
      w << e.n << e.d << e.trials << e.q << e.mean << e.std_error << e.bound << pass
        << (r.oracle ? r.oracle->mean : std::nan("")) << (r.oracle ? r.rel_diff : std::nan(""));
      w.end_row();
      est.x.push_back(static_cast<double>(e.n)), est.y.push_back(e.mean);
      bnd.x.push_back(static_cast<double>(e.n)), bnd.y.push_back(e.bound);
    }
    o.add(g, "rademacher.csv", csv.str());
    if (g.svg)
      o.add(g, "rademacher.svg", chart({est, bnd}, {"Rademacher complexity", "N", "Rad", true, true}));
    out << "rademacher: " << rows.size() << " rows, " << (ok ? "all pass\n" : "failures\n");
    return ok;
  }
};

// ---- margin-sweep

struct MarginCmd {
  std::string problem = "halfspace:delta=0.5,d=2";
  std::string loss = "exp";
  std::size_t n = 256;
  std::string lambdas = "1,10,100";
  std::size_t nets = 20;
  std::size_t m = 16;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "point distribution");
    app->add_option("--loss", loss, "exp | logistic | pow:<beta>");
    app->add_option("--n", n, "points per sample")->check(CLI::PositiveNumber);
    app->add_option("--lambdas", lambdas, "lambda values");
    app->add_option("--nets", nets, "random nets")->check(CLI::PositiveNumber);
    app->add_option("--m", m, "width of the random nets")->check(CLI::PositiveNumber);
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    const Loss l = Loss::parse(loss);
    const auto sweep = margin_sweep(p, l, n, parse_double_list(lambdas), nets, m, g.seed);
    std::ostringstream csv;
    CsvWriter w(csv, "margin functional F_lambda = L^-1(mean L(lambda z))/lambda against max_i z_i, z = -y f(x)",
                {"net", "loss", "lambda", "functional", "limit", "gap", "allowed", "pass"});
    for (const auto& r : sweep.rows) {
      w << r.net << l.token() << r.lambda << r.functional << r.limit << r.gap << r.allowed << r.pass;
      w.end_row();
    }
    o.add(g, "margin_sweep_" + l.token() + ".csv", csv.str());
    out << "margin-sweep (" << l.token() << "): " << (sweep.all_pass ? "all pass\n" : "failures\n");
    return sweep.all_pass;
  }
};

// ---- train

struct TrainCmd {
  std::string problem = "halfspace:delta=0.5,d=2";
  std::size_t n = 4096;
  std::size_t n_eval = 20000;
  std::size_t m = 64;
  std::string penalty = "linear";
  std::optional<double> lambda;
  std::optional<double> constrained_q;
  std::string objective = "auto";
  std::string loss = "hinge";
  std::string init;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "problem spec");
    app->add_option("--n", n, "training points")->check(CLI::PositiveNumber);
    app->add_option("--n-eval", n_eval, "evaluation points")->check(CLI::PositiveNumber);
    app->add_option("--m", m, "width")->check(CLI::PositiveNumber);
    app->add_option("--penalty", penalty, "none | linear | squared");
    app->add_option("--lambda", lambda, "penalty weight (default max{1,R}/sqrt(m))");
    app->add_option("--constrained-q", constrained_q, "projected descent onto path norm <= Q instead");
    app->add_option("--objective", objective, "auto | margin | xent | lsq");
    app->add_option("--loss", loss, "binary loss for the margin objective");
    app->add_option("--init", init, "starting net (JSON)");
    flags.attach(app);
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    TrainConfig cfg;
    cfg.m = m;
    cfg.penalty = parse_penalty(penalty);
    cfg.lambda = lambda;
    cfg.objective = parse_objective(objective, p);
    cfg.loss = Loss::parse(loss);
    cfg.seed = g.seed;
    cfg.jobs = g.jobs;
    cfg.radius = p.radius;
    flags.apply(cfg);
    if (!init.empty()) {
      cfg.init = net_from_json(Json::parse(read_text(init)));
      o.inputs.push_back(init);
    }
    const Dataset train = p.sample(n, derive_seed(g.seed, 1));
    const Dataset eval = p.sample(n_eval, derive_seed(g.seed, 2));
    const TrainResult res = constrained_q ? minimize_constrained(train, *constrained_q, cfg)
                                          : minimize_regularized(train, cfg);
    const double lam = res.trace.lambda;
    const TwoLayerNet zero = TwoLayerNet::zeros(m, p.d, p.out_dim());
    const double obj = constrained_q ? empirical_loss(res.net, train, cfg) : penalized_objective(res.net, train, cfg, lam);
    const double obj0 = constrained_q ? empirical_loss(zero, train, cfg) : penalized_objective(zero, train, cfg, lam);

    std::ostringstream csv;
    CsvWriter w(csv, "training trace: penalized empirical objective, loss and exact path norm",
                {"restart", "epoch", "objective", "risk", "path_norm", "min_margin"});
    for (const auto& r : res.trace.rows) {
      w << r.restart << r.epoch << r.objective << r.risk << r.path_norm << r.min_margin;
      w.end_row();
    }
    Json summary{{"problem", p.name},
                 {"trace", to_json(res.trace)},
                 {"eval_loss", empirical_loss(res.net, eval, cfg)},
                 {"eval_misclassification", p.regression() ? std::nan("") : misclass_probability(res.net, eval)},
                 {"objective", obj},
                 {"zero_net_objective", obj0}};
    if (constrained_q) summary["constraint_q"] = *constrained_q;
    o.add(g, "net.json", to_text(to_json(res.net)));
    o.add(g, "trace.csv", csv.str());
    o.add(g, "train.json", to_text(summary));
    out << "train: objective " << format_double(obj) << ", path norm " << format_double(res.trace.path_norm) << "\n";
    return std::isfinite(obj) && obj <= obj0;
  }
};

// ---- rho-curve

struct RhoCmd {
  std::string problem = "touching:alpha=0";
  std::string qs = "4,8,16,32";
  std::size_t n = 100000;
  std::size_t m = 64;
  std::string loss = "sqhinge";
  double oracle_tol = 0.05;
  double exponent_tol = 0.15;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "binary problem spec");
    app->add_option("--q", qs, "increasing radii");
    app->add_option("--n", n, "training points")->check(CLI::PositiveNumber);
    app->add_option("--m", m, "width")->check(CLI::PositiveNumber);
    app->add_option("--loss", loss, "loss (squared hinge defines rho)");
    app->add_option("--oracle-tol", oracle_tol, "relative tolerance against the quadrature oracle (assert)");
    app->add_option("--exponent-tol", exponent_tol, "tolerance on the fitted exponent (assert)");
    flags.restarts = 2;
    flags.steps = 1500;
    flags.attach(app);
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    TrainConfig cfg;
    cfg.m = m;
    cfg.loss = Loss::parse(loss);
    cfg.jobs = g.jobs;
    flags.apply(cfg);
    const RhoCurve c = rho_curve(p, parse_double_list(qs), cfg, n, g.seed);
    std::ostringstream csv;
    CsvWriter w(csv, "risk decay: rho(Q) = inf over the radius-Q ball of the squared-hinge risk",
                {"Q", "rho", "population", "oracle", "rel_err", "noisy", "path_norm"});
    bool ok = true;
    Series emp{"rho (train)", {}, {}}, pop{"population", {}, {}}, orc{"oracle", {}, {}, true, false};
    for (const auto& pt : c.points) {
      const double rel = std::isfinite(pt.oracle) ? std::abs(pt.population - pt.oracle) / pt.oracle : std::nan("");
      if (std::isfinite(rel)) ok = ok && rel <= oracle_tol;
      w << pt.q << pt.rho << pt.population << pt.oracle << rel << pt.noisy << pt.path_norm;
      w.end_row();
      emp.x.push_back(pt.q), emp.y.push_back(pt.rho);
      pop.x.push_back(pt.q), pop.y.push_back(pt.population);
      orc.x.push_back(pt.q), orc.y.push_back(pt.oracle);
    }
    Json summary = to_json(c);
    summary["problem"] = p.name;
    if (p.density_alpha && p.name.rfind("touching", 0) == 0) {
      const double expected = -(*p.density_alpha + 1.0);
      summary["expected_exponent"] = expected;
      ok = ok && std::abs(c.exponent - expected) <= exponent_tol;
    }
    summary["pass"] = ok;
    o.add(g, "rho_curve.csv", csv.str());
    o.add(g, "rho_curve.json", to_text(summary));
    if (g.svg) o.add(g, "rho_curve.svg", chart({emp, pop, orc}, {"risk decay", "Q", "rho(Q)", true, true}));
    out << "rho-curve: exponent " << format_double(c.exponent) << (ok ? ", pass\n" : ", fail\n");
    return ok;
  }
};

// ---- verify-bounds

struct VerifyCmd {
  std::string kinds = "hinge";
  std::string problem = "halfspace:delta=0.5,d=2";
  std::string ms = "64";
  std::string ns = "4096";
  double conf = 0.1;
  std::size_t n_eval = 100000;
  std::string loss = "hinge";
  std::optional<double> rho_c, rho_exponent;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--kind", kinds, "bound kinds, comma separated");
    app->add_option("--problem", problem, "problem spec");
    app->add_option("--m", ms, "widths");
    app->add_option("--n", ns, "training sample sizes");
    app->add_option("--conf", conf, "confidence delta in (0,1)");
    app->add_option("--n-eval", n_eval, "Monte-Carlo evaluation points")->check(CLI::PositiveNumber);
    app->add_option("--loss", loss, "Lipschitz loss for the unrealizable kind");
    app->add_option("--rho-c", rho_c, "risk decay constant (unrealizable; fitted when absent)");
    app->add_option("--rho-exponent", rho_exponent, "risk decay exponent (unrealizable)");
    flags.attach(app);
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    struct Job {
      BoundKind kind;
      std::size_t m, n;
    };
    std::vector<Job> jobs;
    for (const auto& k : split(kinds, ','))
      for (auto m : parse_size_list(ms))
        for (auto n : parse_size_list(ns)) jobs.push_back({parse_bound_kind(k), m, n});
    require(rho_c.has_value() == rho_exponent.has_value(), "--rho-c and --rho-exponent go together");
    const auto reports = parallel_map(jobs.size(), g.jobs, [&](std::size_t i) {
      VerifyConfig vc;
      vc.kind = jobs[i].kind;
      vc.train.m = jobs[i].m;
      vc.train.loss = Loss::parse(loss);
      vc.train.seed = derive_seed(g.seed, 10 + i);
      flags.apply(vc.train);
      vc.n_train = jobs[i].n;
      vc.n_eval = n_eval;
      vc.conf = conf;
      vc.seed = derive_seed(g.seed, i);
      if (rho_c) vc.rho_model = std::make_pair(*rho_c, *rho_exponent);
      return verify_apriori(p, vc);
    });
    std::ostringstream csv;
    CsvWriter w(csv, "a priori bounds: measured population risk against the closed-form right-hand side",
                {"kind", "m", "n", "measured", "std_error", "rhs", "misclassification", "misclassification_proxy",
                 "optimizer_limited", "pass"});
    Json all = Json::array();
    bool ok = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      ok = ok && r.pass && r.misclass_ok && !r.optimizer_limited;
      w << to_string(r.kind) << jobs[i].m << jobs[i].n << r.measured << r.std_error << r.rhs << r.misclass
        << r.misclass_proxy << r.optimizer_limited << r.pass;
      w.end_row();
      all.push_back(to_json(r));
      if (reports.size() > 1)
        out << to_string(r.kind) << " m=" << jobs[i].m << " n=" << jobs[i].n << ": measured "
            << format_double(r.measured) << " rhs " << format_double(r.rhs) << (r.pass ? " pass" : " FAIL")
            << (r.optimizer_limited ? " (optimizer-limited)" : "") << "\n";
    }
    // a single run prints the report itself
    if (reports.size() == 1) out << to_json(reports[0]).dump(2) << "\n";
    o.add(g, "bounds.csv", csv.str());
    o.add(g, "bounds.json", to_text(reports.size() == 1 ? all[0] : all));
    return ok;
  }
};

// ---- regression

struct RegressionCmd {
  std::string problem = "regression:target=absmax,d=2";
  std::size_t m = 64;
  std::size_t n = 4096;
  std::string qs = "1,2,4,8,16";
  std::size_t n_eval = 20000;
  double conf = 0.1;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--problem", problem, "regression problem spec");
    app->add_option("--m", m, "width")->check(CLI::PositiveNumber);
    app->add_option("--n", n, "training points")->check(CLI::PositiveNumber);
    app->add_option("--q", qs, "radii for the decay fit");
    app->add_option("--n-eval", n_eval, "evaluation points")->check(CLI::PositiveNumber);
    app->add_option("--conf", conf, "confidence delta in (0,1)");
    flags.restarts = 2;
    flags.attach(app);
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const Problem p = parse_problem(problem);
    RegressionConfig rc;
    rc.qs = parse_double_list(qs);
    rc.n_eval = n_eval;
    rc.conf = conf;
    rc.train.jobs = g.jobs;
    flags.apply(rc.train);
    const BoundReport r = regression_harness(p, m, n, g.seed, rc);
    std::ostringstream csv;
    CsvWriter w(csv, "L2 regression: rho(Q) = inf over the radius-Q ball of the squared L2 error",
                {"Q", "rho"});
    for (const auto& [q, v] : r.rho_points) {
      w << q << v;
      w.end_row();
    }
    o.add(g, "regression_rho.csv", csv.str());
    o.add(g, "regression.json", to_text(to_json(r)));
    out << "regression: measured " << format_double(r.measured) << " rhs " << format_double(r.rhs)
        << ", small-network bound " << (r.small_network_ok ? "met\n" : "missed\n");
    return r.pass && r.small_network_ok;
  }
};

// ---- report

struct ReportCmd {
  std::string in_dir;

  void attach(CLI::App* app) { app->add_option("--in", in_dir, "directory with CSV outputs (default: --out)"); }

  static std::vector<double> column(const std::vector<std::vector<std::string>>& rows, const std::string& name,
                                    const std::string& file) {
    require(!rows.empty(), file + ": empty");
    const auto& h = rows[0];
    const auto it = std::find(h.begin(), h.end(), name);
    require(it != h.end(), file + ": missing column " + name);
    const auto c = static_cast<std::size_t>(it - h.begin());
    std::vector<double> out;
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(c < rows[i].size() ? to_double(rows[i][c]) : NAN);
    return out;
  }

  bool run(const Globals& g, Outputs& o, std::ostream& out) const {
    const fs::path dir = in_dir.empty() ? fs::path(g.out_dir) : fs::path(in_dir);
    require(fs::is_directory(dir), "report: no such directory: " + dir.string());
    std::size_t figures = 0;
    auto load = [&](const std::string& name) -> std::optional<std::vector<std::vector<std::string>>> {
      const fs::path f = dir / name;
      if (!fs::exists(f)) return std::nullopt;
      o.inputs.push_back(f.string());
      std::istringstream is(read_text(f));
      return read_csv(is);
    };
    if (auto rows = load("approx_sweep.csv")) {
      const auto m = column(*rows, "m", "approx_sweep.csv");
      o.add(g, "fig_approx.svg",
            chart({{"best-of error", m, column(*rows, "best_error", "approx_sweep.csv")},
                   {"rms error", m, column(*rows, "rms_error", "approx_sweep.csv")},
                   {"bound", m, column(*rows, "bound", "approx_sweep.csv"), true, false}},
                  {"direct approximation", "m", "L2 error", true, true}));
      ++figures;
    }
    if (auto rows = load("rademacher.csv")) {
      const auto n = column(*rows, "n", "rademacher.csv");
      o.add(g, "fig_rademacher.svg",
            chart({{"estimate", n, column(*rows, "mean", "rademacher.csv")},
                   {"bound", n, column(*rows, "bound", "rademacher.csv"), true, false}},
                  {"Rademacher complexity", "N", "Rad", true, true}));
      ++figures;
    }
    if (auto rows = load("rho_curve.csv")) {
      const auto q = column(*rows, "Q", "rho_curve.csv");
      o.add(g, "fig_rho.svg",
            chart({{"rho (train)", q, column(*rows, "rho", "rho_curve.csv")},
                   {"population", q, column(*rows, "population", "rho_curve.csv")},
                   {"oracle", q, column(*rows, "oracle", "rho_curve.csv"), true, false}},
                  {"risk decay", "Q", "rho(Q)", true, true}));
      ++figures;
    }
    if (auto rows = load("bounds.csv")) {
      const auto m = column(*rows, "m", "bounds.csv");
      const auto n = column(*rows, "n", "bounds.csv");
      const auto meas = column(*rows, "measured", "bounds.csv");
      const auto rhs = column(*rows, "rhs", "bounds.csv");
      std::map<std::string, std::vector<std::size_t>> by_kind;
      for (std::size_t i = 1; i < rows->size(); ++i) by_kind[(*rows)[i][0]].push_back(i - 1);
      for (const auto& [kind, idx] : by_kind) {
        for (const bool vs_m : {true, false}) {
          const auto& xs = vs_m ? m : n;
          std::vector<double> xv;
          for (auto i : idx) xv.push_back(xs[i]);
          std::sort(xv.begin(), xv.end());
          if (std::unique(xv.begin(), xv.end()) - xv.begin() < 2) continue;
          Series a{"measured", {}, {}}, b{"rhs", {}, {}, true, false};
          for (auto i : idx) {
            a.x.push_back(xs[i]), a.y.push_back(meas[i]);
            b.x.push_back(xs[i]), b.y.push_back(rhs[i]);
          }
          o.add(g, "fig_bounds_" + kind + (vs_m ? "_vs_m.svg" : "_vs_n.svg"),
                chart({a, b}, {kind + " bound", vs_m ? "m" : "n", "risk", true, true}));
          ++figures;
        }
      }
    }
    out << "report: " << figures << " figures\n";
    return figures > 0;
  }
};

Json option_values(const CLI::App* app) {
  Json j = Json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      j[name] = res.empty() ? std::string("true") : res.back();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

}  // namespace

std::vector<std::string> config_file_args(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos && eq > 0,
            "config line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    out.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_size = [](const std::string& s) {
    const double v = to_double(s);
    require(v >= 1 && v == std::floor(v), "expected a positive integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::size_t lo = to_size(trim(text.substr(0, dots))), hi = to_size(trim(text.substr(dots + 2)));
    require(lo <= hi, "range " + text + " is empty");
    for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  for (const auto& s : split(text, ',')) out.push_back(to_size(s));
  require(!out.empty(), "empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(to_double(s));
  require(!out.empty(), "empty list");
  return out;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Globals g;
  std::vector<std::string> args = args_in;
  try {
    g.seed = default_seed();
    // Config values go right after the subcommand so later flags win.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      const auto extra = config_file_args(read_text(config_path));
      static const std::vector<std::string> names{"approx-sweep", "rademacher",    "margin-sweep", "train",
                                                  "rho-curve",    "verify-bounds", "regression",   "report"};
      std::size_t at = 0;
      while (at < args.size() && std::find(names.begin(), names.end(), args[at]) == names.end()) ++at;
      at = std::min(at + 1, args.size());
      args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  }

  CLI::App app{"Two-layer ReLU network bounds: approximation, complexity, a priori estimates"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed (default $BARRON_BOUNDS_SEED or 0)");
  app.add_flag("--svg", g.svg, "write SVG figures");
  app.add_flag("--assert", g.assert_, "exit 3 when an acceptance check fails");
  app.add_option("--config", g.config, "key=value file; flags override it");

  ApproxCmd approx;
  RademacherCmd rad;
  MarginCmd margin;
  TrainCmd train;
  RhoCmd rho;
  VerifyCmd verify;
  RegressionCmd regression;
  ReportCmd report;
  std::vector<std::pair<CLI::App*, std::function<bool(const Globals&, Outputs&, std::ostream&)>>> subs;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    subs.emplace_back(sub, [&cmd](const Globals& gg, Outputs& o, std::ostream& os) { return cmd.run(gg, o, os); });
  };
  add("approx-sweep", "direct approximation error against width", approx);
  add("rademacher", "Rademacher complexity of the path-norm ball", rad);
  add("margin-sweep", "margin functional against the maximum margin", margin);
  add("train", "train a regularized or norm-constrained network", train);
  add("rho-curve", "risk decay function over a list of radii", rho);
  add("verify-bounds", "a priori bounds against measured risk", verify);
  add("regression", "L2 regression a priori estimate", regression);
  add("report", "SVG figures from CSV outputs", report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : validation_error;
  }

  try {
    Outputs o;
    bool passed = true;
    CLI::App* used = nullptr;
    for (auto& [sub, fn] : subs) {
      if (!sub->parsed()) continue;
      used = sub;
      passed = fn(g, o, out);
    }
    Json manifest{{"subcommand", used->get_name()},
                  {"config", option_values(used)},
                  {"globals", option_values(&app)},
                  {"seed", g.seed},
                  {"version", BARRON_VERSION},
                  {"git_describe", BARRON_GIT_DESCRIBE},
                  {"inputs", o.inputs},
                  {"outputs", Json::array()},
                  {"checks_passed", passed}};
    if (!g.config.empty()) manifest["inputs"].push_back(g.config);
    for (const auto& f : o.files) manifest["outputs"].push_back(f.first.string());
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.add(g, "manifest_" + used->get_name() + ".json", to_text(manifest));
    for (const auto& [path, text] : o.files) write_text(path, text);
    if (g.assert_ && !passed) {
      err << used->get_name() << ": acceptance check failed\n";
      return assertion_failed;
    }
    return ok;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return internal_error;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace barron::cli
