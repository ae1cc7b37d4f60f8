// Command-line front end: run | grid | rate-fit | verify | solve-opt.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smg/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSynthPrefix = "synth:";

struct ProblemBundle {
  std::shared_ptr<smg::FiniteSumProblem> problem;
  std::optional<smg::Dataset> dataset;  // present for file-backed problems
  std::string default_cache;            // minimizer cache path, when sensible
};

// "n=1000,d=20,seed=7,cond=3,center=1,spread=1" -> keyword map
std::map<std::string, double> parse_kv(const std::string& spec) {
  std::map<std::string, double> kv;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key=value in '" + item + "'");
    kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return kv;
}

double kv_get(const std::map<std::string, double>& kv, const std::string& key,
              double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

ProblemBundle build_synth_problem(const std::map<std::string, double>& kv) {
  for (const auto& [key, value] : kv) {
    (void)value;
    static const std::set<std::string> known = {"n",    "d",      "seed",
                                                "cond", "center", "spread"};
    if (!known.count(key))
      throw std::invalid_argument("unknown synth parameter '" + key + "'");
  }
  int n = static_cast<int>(kv_get(kv, "n", 1000));
  int d = static_cast<int>(kv_get(kv, "d", 20));
  auto seed = static_cast<std::uint64_t>(kv_get(kv, "seed", 1));
  double cond = kv_get(kv, "cond", 3.0);
  double center = kv_get(kv, "center", 1.0);
  double spread = kv_get(kv, "spread", 1.0);
  ProblemBundle out;
  out.problem = smg::synth_quadratic_dataset(n, d, seed, cond, center, spread);
  return out;
}

ProblemBundle build_problem(const std::string& data_spec, double lambda,
                            int min_dim) {
  if (data_spec.rfind(kSynthPrefix, 0) == 0)
    return build_synth_problem(parse_kv(data_spec.substr(strlen(kSynthPrefix))));
  ProblemBundle out;
  out.dataset = smg::parse_libsvm_file(data_spec, min_dim);
  out.problem = smg::logistic_problem(out.dataset->features, out.dataset->labels,
                                      out.dataset->dim, lambda);
  out.default_cache = data_spec + ".wstar.json";
  return out;
}

ProblemBundle build_problem_json(const json& spec) {
  if (spec.contains("synth")) {
    const json& s = spec.at("synth");
    std::map<std::string, double> kv;
    for (auto it = s.begin(); it != s.end(); ++it)
      kv[it.key()] = it.value().get<double>();
    return build_synth_problem(kv);
  }
  return build_problem(spec.at("data").get<std::string>(),
                       spec.value("lambda", 0.0), spec.value("min_dim", 0));
}

// Resolves w* per the --wstar flag: "none", "auto", or an explicit cache path.
std::optional<smg::Vector> resolve_wstar(const ProblemBundle& bundle,
                                         const std::string& mode,
                                         const smg::Vector& w0) {
  if (mode == "none") return std::nullopt;
  const auto& problem = *bundle.problem;
  if (mode == "auto") {
    if (auto w = problem.known_minimizer()) return *w;
    if (!bundle.default_cache.empty())
      return smg::load_or_solve_minimizer(problem, bundle.default_cache, w0);
    return smg::solve_minimizer(problem, w0);
  }
  return smg::load_or_solve_minimizer(problem, mode, w0);
}

smg::BuiltSchedule build_schedule(const std::string& kind, int T, int n,
                                  double gamma, double rho, double L, double beta,
                                  double mu) {
  if (kind == "constant_convex")
    return smg::build_feasible_constant_convex(T, n, gamma, L, beta);
  if (kind == "constant_strongly_convex") {
    if (!(mu > 0.0))
      throw std::invalid_argument(
          "constant_strongly_convex schedule needs a strongly convex problem");
    return smg::build_feasible_constant_strongly_convex(T, n, gamma, L, beta, mu);
  }
  if (kind == "exponential")
    return smg::build_feasible_exponential(T, gamma, rho, L, beta, mu);
  if (kind == "constant") {
    if (!(gamma > 0.0))
      throw std::invalid_argument("constant schedule needs --gamma > 0");
    smg::BuiltSchedule out;
    out.schedule = smg::constant_schedule(T, gamma);
    out.gamma_requested = out.gamma_effective = gamma;
    return out;
  }
  throw std::invalid_argument("unknown schedule '" + kind + "'");
}

std::string format_opt(double v) { return smg::format_double(v); }

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string optimizer = "smg";
  std::string data;
  double lambda = 0.0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string schedule = "constant_convex";
  double gamma = -1.0;
  double rho = 0.1;
  double lr = 0.0;  // per inner step; overrides the schedule for smg/ssgd
  int epochs = 20;
  std::uint64_t seed = 1;
  std::string strategy = "rr";
  std::string wstar = "auto";
  std::string out = "run";
};

int cmd_run(const RunArgs& args) {
  ProblemBundle bundle = build_problem(args.data, args.lambda, 0);
  const auto& problem = *bundle.problem;
  const int n = problem.n();
  smg::Vector w0 = smg::Vector::Zero(problem.dim());
  smg::PermutationSource perms{smg::strategy_from_name(args.strategy), args.seed,
                               n};
  smg::RunOptions opts;
  opts.w_star = resolve_wstar(bundle, args.wstar, w0);

  smg::RunTrace trace;
  double beta = args.beta;
  if (args.optimizer == "smg" || args.optimizer == "ssgd") {
    if (std::isnan(beta)) beta = 0.5;
    smg::BuiltSchedule built;
    if (args.lr > 0.0) {
      built.schedule = smg::constant_schedule(args.epochs, args.lr * n);
      built.gamma_requested = built.gamma_effective = args.lr * n;
    } else {
      built = build_schedule(args.schedule, args.epochs, n, args.gamma, args.rho,
                             problem.smoothness(), args.optimizer == "smg" ? beta : 0.0,
                             problem.strong_convexity());
      if (built.scaled)
        std::cout << "note: gamma scaled to largest feasible value "
                  << format_opt(built.gamma_effective) << "\n";
    }
    trace = args.optimizer == "smg"
                ? smg::smg_run(problem, built.schedule, beta, perms, w0, opts)
                : smg::shuffling_sgd_run(problem, built.schedule, perms, w0, opts);
  } else if (args.optimizer == "sgdm") {
    if (!(args.lr > 0.0)) throw std::invalid_argument("sgdm needs --lr > 0");
    if (std::isnan(beta)) beta = 0.9;
    trace = smg::sgdm_run(problem, args.lr, beta, args.epochs, perms, w0, opts);
  } else if (args.optimizer == "adam") {
    if (!(args.lr > 0.0)) throw std::invalid_argument("adam needs --lr > 0");
    smg::AdamParams params;
    params.lr = args.lr;
    trace = smg::adam_run(problem, params, args.epochs, perms, w0, opts);
  } else if (args.optimizer == "sgd") {
    if (!(args.lr > 0.0)) throw std::invalid_argument("sgd needs --lr > 0");
    trace = smg::iid_sgd_run(problem, args.lr, args.epochs, args.seed, w0, opts);
  } else {
    throw std::invalid_argument("unknown optimizer '" + args.optimizer + "'");
  }

  smg::write_run_csv(args.out + ".csv", trace);
  smg::write_run_jsonl(args.out + ".jsonl", trace);
  const auto& last = trace.records.back();
  std::cout << "epochs " << last.t << ", start loss "
            << format_opt(trace.loss_start) << ", final loss "
            << format_opt(last.loss);
  if (!std::isnan(last.dist_sq))
    std::cout << ", final dist_sq " << format_opt(last.dist_sq);
  std::cout << "\nwrote " << args.out << ".csv and " << args.out << ".jsonl\n";
  return 0;
}

// ---- grid ------------------------------------------------------------------

int cmd_grid(const std::string& config_path, const std::string& out_dir,
             int workers) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config: " + config_path);
  json cfg;
  in >> cfg;

  std::vector<std::uint64_t> seeds;
  for (const auto& s : cfg.at("seeds")) seeds.push_back(s.get<std::uint64_t>());
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("config: seeds must be distinct");
  const int epochs = cfg.at("epochs").get<int>();
  smg::Strategy strategy =
      smg::strategy_from_name(cfg.value("strategy", std::string("rr")));

  // Problem plus optional held-out accuracy data: an explicit test file, a
  // companion "<data>.t" file, or a seeded split of the training file.
  const json& pspec = cfg.at("problem");
  ProblemBundle bundle = build_problem_json(pspec);
  std::optional<smg::Dataset> test;
  if (bundle.dataset) {
    std::string data_path = pspec.at("data").get<std::string>();
    std::string test_path = cfg.value("test_data", std::string());
    if (test_path.empty() && fs::exists(data_path + ".t"))
      test_path = data_path + ".t";
    if (!test_path.empty()) {
      test = smg::parse_libsvm_file(test_path, bundle.dataset->dim);
      if (test->dim > bundle.dataset->dim) {
        // test split introduces higher feature indices: re-pad the train side
        bundle = build_problem(data_path, pspec.value("lambda", 0.0), test->dim);
      }
    } else if (cfg.value("holdout_fraction", 0.0) > 0.0) {
      auto split =
          smg::split_dataset(*bundle.dataset, cfg.at("holdout_fraction").get<double>(),
                             cfg.value("holdout_seed", std::uint64_t{1}));
      test = std::move(split.test);
      bundle.dataset = std::move(split.train);
      bundle.problem =
          smg::logistic_problem(bundle.dataset->features, bundle.dataset->labels,
                                bundle.dataset->dim, pspec.value("lambda", 0.0));
    }
  }

  std::vector<smg::GridCell> cells;
  for (const auto& c : cfg.at("cells")) {
    smg::GridCell cell;
    cell.optimizer = c.at("optimizer").get<std::string>();
    if (c.contains("beta")) cell.beta = c.at("beta").get<double>();
    for (const auto& lr : c.at("lrs")) {
      cell.lr = lr.get<double>();
      cells.push_back(cell);
    }
  }

  smg::Vector w0 = smg::Vector::Zero(bundle.problem->dim());
  smg::GridOutcome grid =
      smg::run_grid(*bundle.problem, test ? &*test : nullptr, cells, epochs, seeds,
                    strategy, w0, workers);

  fs::create_directories(out_dir);
  smg::write_grid_summary_csv((fs::path(out_dir) / "summary.csv").string(), grid);
  for (const auto& cell : grid.cells) {
    if (cell.curve.empty()) continue;
    std::string name =
        "curve_" + cell.cell.optimizer + "_" + format_opt(cell.cell.lr) + ".csv";
    smg::write_curve_csv((fs::path(out_dir) / name).string(), cell.curve);
  }

  std::cout << "optimizer  lr          final_loss      accuracy   diverged  best\n";
  for (const auto& cell : grid.cells) {
    std::ostringstream line;
    line << cell.cell.optimizer << " lr=" << format_opt(cell.cell.lr)
         << " final_loss="
         << (std::isnan(cell.final_loss_mean) ? "-"
                                              : format_opt(cell.final_loss_mean))
         << " accuracy="
         << (std::isnan(cell.accuracy_mean) ? "-" : format_opt(cell.accuracy_mean))
         << " diverged=" << cell.diverged_seeds << "/" << cell.seeds_run
         << (cell.best ? " best" : "");
    if (!cell.divergence_note.empty()) line << "  (" << cell.divergence_note << ")";
    std::cout << line.str() << "\n";
  }
  std::cout << "wrote " << out_dir << "/summary.csv\n";
  return 0;
}

// ---- rate-fit ---------------------------------------------------------------

int cmd_rate_fit(const std::string& in_path, const std::string& x_col,
                 const std::string& y_col, const std::string& correction,
                 double n_for_correction, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot read csv: " + in_path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty csv: " + in_path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
  };
  auto cols = split(header);
  int xi = -1, yi = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == x_col) xi = static_cast<int>(i);
    if (cols[i] == y_col) yi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0)
    throw std::invalid_argument("columns '" + x_col + "'/'" + y_col +
                                "' not found in header: " + header);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    xs.push_back(std::stod(fields.at(static_cast<std::size_t>(xi))));
    ys.push_back(std::stod(fields.at(static_cast<std::size_t>(yi))));
  }

  std::function<double(double)> corr;
  if (correction == "sc-log") {
    if (!(n_for_correction > 0.0))
      throw std::invalid_argument("--correction sc-log needs --n > 0");
    double root_n = std::sqrt(n_for_correction);
    corr = [root_n](double x) {
      double lg = std::log(root_n * x);
      return lg * lg;
    };
  } else if (correction != "none") {
    throw std::invalid_argument("unknown correction '" + correction + "'");
  }

  smg::RateFit fit = smg::rate_fit(xs, ys, corr);
  std::cout << "points " << xs.size() << ", slope " << format_opt(fit.slope)
            << ", intercept " << format_opt(fit.intercept) << ", residual_rms "
            << format_opt(fit.residual_rms) << "\n";
  if (!out_path.empty()) {
    nlohmann::ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["residual_rms"] = fit.residual_rms;
    j["x"] = fit.xs;
    j["y"] = fit.ys;
    j["y_corrected"] = fit.ys_corrected;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + out_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

// ---- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string data;
  double lambda = 0.0;
  double beta = 0.5;
  std::string schedule = "constant_convex";
  double gamma = -1.0;
  double rho = 0.1;
  int epochs = 20;
  int seeds = 20;
  std::uint64_t base_seed = 1;
  double K = 0.0;
  bool no_lemmas = false;
  bool no_theorem1 = false;
  bool no_theorem2 = false;
  std::string wstar = "auto";
  std::string out = "report.csv";
  int workers = 0;
};

int cmd_verify(const VerifyArgs& args) {
  ProblemBundle bundle = build_problem(args.data, args.lambda, 0);
  const auto& problem = *bundle.problem;
  smg::Vector w0 = smg::Vector::Zero(problem.dim());

  smg::BuiltSchedule built =
      build_schedule(args.schedule, args.epochs, problem.n(), args.gamma, args.rho,
                     problem.smoothness(), args.beta, problem.strong_convexity());
  if (built.scaled)
    std::cout << "note: gamma scaled to largest feasible value "
              << format_opt(built.gamma_effective) << "\n";

  smg::VerifySetup setup;
  setup.problem = &problem;
  setup.schedule = built.schedule;
  setup.beta = args.beta;
  setup.seeds = args.seeds;
  setup.base_seed = args.base_seed;
  setup.w0 = w0;
  setup.w_star = resolve_wstar(bundle, args.wstar, w0);
  setup.K = args.K;
  setup.lemma_rows = !args.no_lemmas;
  setup.theorem1_row = !args.no_theorem1;
  setup.theorem2_rows = !args.no_theorem2;
  setup.workers = args.workers;

  smg::VerifyOutcome outcome = smg::verify_bounds(setup);
  smg::write_check_csv(args.out, outcome.rows);

  int failed = 0;
  for (const auto& row : outcome.rows)
    if (!row.ok) {
      ++failed;
      std::cout << "FAILED " << row.name << " t=" << row.t << " lhs "
                << format_opt(row.lhs) << " > threshold "
                << format_opt(row.threshold) << "\n";
    }
  std::cout << outcome.rows.size() << " checks, " << failed << " failed; wrote "
            << args.out << "\n";
  return failed == 0 ? 0 : 1;
}

// ---- solve-opt ----------------------------------------------------------------

int cmd_solve_opt(const std::string& data, double lambda, double tol,
                  std::string out_path) {
  ProblemBundle bundle = build_problem(data, lambda, 0);
  const auto& problem = *bundle.problem;
  if (out_path.empty()) out_path = bundle.default_cache;
  if (out_path.empty())
    throw std::invalid_argument("synthetic problem: pass --out for the cache path");
  smg::Vector w0 = smg::Vector::Zero(problem.dim());
  smg::Vector w = smg::load_or_solve_minimizer(problem, out_path, w0, tol);
  std::cout << "grad norm " << format_opt(problem.full_gradient(w).norm())
            << ", objective " << format_opt(problem.full_value(w)) << ", cached at "
            << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shuffling-momentum optimization runs, grids, and bound checks"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "single optimizer run -> CSV + JSONL");
  run->add_option("--optimizer", run_args.optimizer,
                  "smg | ssgd | sgdm | adam | sgd");
  run->add_option("--data", run_args.data,
                  "libsvm path or synth:n=..,d=..,seed=..,cond=..,center=..,spread=..")
      ->required();
  run->add_option("--lambda", run_args.lambda, "l2 regularization (file data)");
  run->add_option("--beta", run_args.beta, "momentum (default smg 0.5, sgdm 0.9)");
  run->add_option("--schedule", run_args.schedule,
                  "constant_convex | constant_strongly_convex | exponential | constant");
  run->add_option("--gamma", run_args.gamma,
                  "schedule scale; <= 0 picks the largest feasible");
  run->add_option("--rho", run_args.rho, "exponential schedule total decay");
  run->add_option("--lr", run_args.lr,
                  "per-step rate; required for sgdm/adam/sgd, overrides the "
                  "schedule for smg/ssgd");
  run->add_option("--epochs", run_args.epochs, "epoch count")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_args.seed, "permutation seed");
  run->add_option("--strategy", run_args.strategy, "rr | ss | ig");
  run->add_option("--wstar", run_args.wstar, "auto | none | cache path");
  run->add_option("--out", run_args.out, "output prefix");

  std::string grid_config, grid_out = "grid_out";
  int grid_workers = 0;
  auto* grid = app.add_subcommand("grid", "learning-rate grid from a JSON config");
  grid->add_option("--config", grid_config, "JSON config path")->required();
  grid->add_option("--out-dir", grid_out, "output directory");
  grid->add_option("--workers", grid_workers, "worker threads (0 = hardware)");

  std::string fit_in, fit_x = "x", fit_y = "y", fit_corr = "none", fit_out;
  double fit_n = 0.0;
  auto* fit = app.add_subcommand("rate-fit", "log-log slope of a points CSV");
  fit->add_option("--in", fit_in, "points CSV with a header row")->required();
  fit->add_option("--x-col", fit_x, "x column name");
  fit->add_option("--y-col", fit_y, "y column name");
  fit->add_option("--correction", fit_corr,
                  "none | sc-log (divides y by log^2(sqrt(n) x))");
  fit->add_option("--n", fit_n, "sample count for sc-log correction");
  fit->add_option("--out", fit_out, "optional JSON output path");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "multi-seed bound checks -> CSV");
  verify->add_option("--data", verify_args.data, "libsvm path or synth:...")
      ->required();
  verify->add_option("--lambda", verify_args.lambda, "l2 regularization");
  verify->add_option("--beta", verify_args.beta, "momentum");
  verify->add_option("--schedule", verify_args.schedule, "schedule kind");
  verify->add_option("--gamma", verify_args.gamma,
                     "schedule scale; <= 0 picks the largest feasible");
  verify->add_option("--rho", verify_args.rho, "exponential schedule total decay");
  verify->add_option("--epochs", verify_args.epochs, "epoch count")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seeds", verify_args.seeds, "number of seeds")
      ->check(CLI::PositiveNumber);
  verify->add_option("--base-seed", verify_args.base_seed, "first seed value");
  verify->add_option("--K", verify_args.K, "override K (0 = 1 + alpha*beta)");
  verify->add_flag("--no-lemmas", verify_args.no_lemmas, "skip per-epoch lemma rows");
  verify->add_flag("--no-theorem1", verify_args.no_theorem1,
                   "skip the convex output bound row");
  verify->add_flag("--no-theorem2", verify_args.no_theorem2,
                   "skip strongly convex distance rows");
  verify->add_option("--wstar", verify_args.wstar, "auto | cache path");
  verify->add_option("--out", verify_args.out, "report CSV path");
  verify->add_option("--workers", verify_args.workers, "worker threads");

  std::string opt_data, opt_out;
  double opt_lambda = 0.0, opt_tol = 1e-10;
  auto* solve = app.add_subcommand("solve-opt", "solve and cache the minimizer");
  solve->add_option("--data", opt_data, "libsvm path or synth:...")->required();
  solve->add_option("--lambda", opt_lambda, "l2 regularization");
  solve->add_option("--tol", opt_tol, "gradient norm tolerance");
  solve->add_option("--out", opt_out, "cache path (default <data>.wstar.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (grid->parsed()) return cmd_grid(grid_config, grid_out, grid_workers);
    if (fit->parsed())
      return cmd_rate_fit(fit_in, fit_x, fit_y, fit_corr, fit_n, fit_out);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (solve->parsed()) return cmd_solve_opt(opt_data, opt_lambda, opt_tol, opt_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
