// Command-line front end: generate, validate, stats, solve-extensive,
// solve-admm, compare. Exit codes: 0 ok, 2 invalid input, 3 solver limit,
// 4 internal error. STRATINV_LOG sets the log level (trace..off, default info).

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "stratinv/admm.hpp"
#include "stratinv/extensive.hpp"
#include "stratinv/generator.hpp"
#include "stratinv/instance_io.hpp"
#include "stratinv/report.hpp"

using namespace stratinv;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kLimit = 3, kInternal = 4 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
    case ErrorKind::Validation: return kInvalid;
    case ErrorKind::SolverLimit: return kLimit;
    case ErrorKind::SolverFailure:
    case ErrorKind::Internal: return kInternal;
  }
  return kInternal;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("stratinv");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("STRATINV_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
  spdlog::info("wrote {}", path.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct AdmmFlags {
  double rho = 100.0;
  double epsilon = 0.5;
  int max_iters = 500;
  std::string anchor = "consensus";
  int pwl_segments = 100;
  int bound_cadence = 0;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  void attach(CLI::App* app, bool with_rho) {
    if (with_rho) app->add_option("--rho", rho, "penalty factor ($/MW^2)")->capture_default_str();
    app->add_option("--epsilon-mw", epsilon, "convergence tolerance on |X - Xbar| (MW)")->capture_default_str();
    app->add_option("--max-iters", max_iters, "iteration budget")->capture_default_str();
    app->add_option("--anchor", anchor, "proximal anchor")
        ->check(CLI::IsMember({"local", "consensus"}))
        ->capture_default_str();
    app->add_option("--pwl-segments", pwl_segments, "tangent cuts per proximal term")->capture_default_str();
    app->add_option("--bound-cadence", bound_cadence, "bounds every n iterations (0 = automatic)");
    app->add_option("--workers", workers, "subproblem threads")->capture_default_str();
  }

  AdmmConfig config(double r) const {
    AdmmConfig c;
    c.rho = r;
    c.epsilon_mw = epsilon;
    c.max_iters = max_iters;
    c.anchor = anchor == "consensus" ? AnchorMode::Consensus : AnchorMode::Local;
    c.pwl_segments = pwl_segments;
    c.bound_cadence = bound_cadence;
    c.workers = workers;
    c.validate();
    return c;
  }
};

ExtensiveMethod parse_method(const std::string& s) {
  return s == "direct" ? ExtensiveMethod::Direct : ExtensiveMethod::ScenarioBoxes;
}

std::vector<double> first_stage(const Instance& in, const Table3<double>& x) {
  if (in.num_stages() == 0 || x.empty() || x[0].empty()) return std::vector<double>(in.num_candidates(), 0.0);
  return x[0][0];
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Strategic generation investment under short- and long-term uncertainty"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write an instance file");
  std::string preset = "sec4", gen_out;
  GeneratorParams gp;
  gen->add_option("--preset", preset, "sec4 | single | random")
      ->check(CLI::IsMember({"sec4", "single", "random"}))
      ->capture_default_str();
  gen->add_option("--seed", gp.seed, "random preset seed")->capture_default_str();
  gen->add_option("--stages", gp.stages)->capture_default_str();
  gen->add_option("--long-term", gp.long_term)->capture_default_str();
  gen->add_option("--short-term", gp.short_term)->capture_default_str();
  gen->add_option("--conditions", gp.conditions)->capture_default_str();
  gen->add_option("--candidates", gp.candidates)->capture_default_str();
  gen->add_option("--rivals", gp.rivals)->capture_default_str();
  gen->add_option("--existing", gp.existing)->capture_default_str();
  gen->add_option("--demands", gp.demands)->capture_default_str();
  gen->add_option("--hours-per-stage", gp.hours_per_stage)->capture_default_str();
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // validate / stats
  std::string instance_path;
  auto* val = app.add_subcommand("validate", "parse and validate an instance");
  val->add_option("instance", instance_path)->required();
  auto* stats = app.add_subcommand("stats", "model sizes of the extensive form and the subproblems");
  stats->add_option("instance", instance_path)->required();

  // solve-extensive
  auto* ext = app.add_subcommand("solve-extensive", "solve the extensive form to global optimality");
  ext->add_option("instance", instance_path)->required();
  double time_limit = 3600.0;
  std::string method = "scenario-boxes", out_dir = "out";
  bool timings = false;
  ext->add_option("--time-limit", time_limit, "seconds")->capture_default_str();
  ext->add_option("--method", method, "direct | scenario-boxes")
      ->check(CLI::IsMember({"direct", "scenario-boxes"}))
      ->capture_default_str();
  ext->add_option("--out-dir", out_dir)->capture_default_str();
  ext->add_flag("--timings", timings, "include wall-clock times in the outputs");

  // solve-admm
  auto* admm = app.add_subcommand("solve-admm", "consensus decomposition over both scenario trees");
  admm->add_option("instance", instance_path)->required();
  AdmmFlags af;
  af.attach(admm, true);
  admm->add_option("--out-dir", out_dir)->capture_default_str();
  admm->add_flag("--timings", timings, "include wall-clock times in the outputs");

  // compare
  auto* cmp = app.add_subcommand("compare", "extensive form against decomposition runs over a rho sweep");
  cmp->add_option("instance", instance_path)->required();
  std::vector<double> rhos = {1e2, 1e3, 1e5};
  AdmmFlags cf;
  cf.attach(cmp, false);
  cmp->add_option("--rho", rhos, "penalty factors")->delimiter(',')->capture_default_str();
  cmp->add_option("--time-limit", time_limit, "extensive-form seconds")->capture_default_str();
  cmp->add_option("--method", method, "extensive-form method")
      ->check(CLI::IsMember({"direct", "scenario-boxes"}))
      ->capture_default_str();
  cmp->add_option("--out-dir", out_dir)->capture_default_str();
  cmp->add_flag("--timings", timings, "include wall-clock times in the outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (gen->parsed()) {
      const Instance in = preset == "sec4" ? generate_sec4() : preset == "single" ? generate_single() : generate_random(gp);
      const std::string text = instance_to_text(in);
      if (gen_out.empty()) std::cout << text;
      else write_file(gen_out, text);
      return kOk;
    }

    const Instance in = parse_instance(instance_path);
    spdlog::debug("instance {} fingerprint {}", instance_path, fingerprint(in));

    if (val->parsed()) {
      const auto report = validate_instance(in);
      for (const auto& w : report.warnings) spdlog::warn("{}: {}", w.path, w.message);
      std::cout << "ok " << fingerprint(in) << "\n";
      return kOk;
    }

    if (stats->parsed()) {
      const auto rows = model_statistics(in);
      std::cout << statistics_csv(rows);
      const double ext_pairs = rows[0].stats.complementarity_pairs;
      if (rows.size() > 1 && ext_pairs > 0)
        std::cout << "# per-subproblem pairs / extensive pairs = "
                  << format_number(rows[1].stats.complementarity_pairs / ext_pairs) << "\n";
      return kOk;
    }

    if (ext->parsed()) {
      ExtensiveOptions opt;
      opt.method = parse_method(method);
      opt.time_limit_s = time_limit;
      const auto r = solve_extensive(in, opt);
      const Json j = extensive_report_json(in, opt, r, timings);
      write_file(fs::path(out_dir) / "solution.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      if (r.status == BnbStatus::NodeLimit || r.status == BnbStatus::GapLimit) return kLimit;
      if (r.status == BnbStatus::Infeasible) return kInternal;
      return kOk;
    }

    if (admm->parsed()) {
      const AdmmConfig cfg = af.config(af.rho);
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = admm_solve(in, cfg, [](const AdmmIteration& it) {
        if (it.has_bounds)
          spdlog::info("iter {} residual {:.6g} MW gub {:.10g} ub {:.10g}", it.iter, it.max_residual_mw, it.gub, it.ub);
        else
          spdlog::debug("iter {} residual {:.6g} MW", it.iter, it.max_residual_mw);
      });
      const double wall = seconds_since(t0);
      write_file(fs::path(out_dir) / "iterations.csv", iterations_csv(r.state, timings));
      const Json j = admm_report_json(in, cfg, r, timings, wall);
      write_file(fs::path(out_dir) / "solution.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (cmp->parsed()) {
      std::vector<CompareRow> rows;
      ExtensiveOptions opt;
      opt.method = parse_method(method);
      opt.time_limit_s = time_limit;
      const auto e = solve_extensive(in, opt);
      rows.push_back({"extensive", 0.0, to_string(e.status), 0, e.objective, e.best_bound, 0.0, first_stage(in, e.x),
                      e.seconds});
      for (double rho : rhos) {
        const AdmmConfig cfg = cf.config(rho);
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = admm_solve(in, cfg);
        const double wall = seconds_since(t0);
        spdlog::info("rho {} {} after {} iterations", rho, to_string(r.status), r.iterations);
        rows.push_back({"admm", rho, to_string(r.status), r.iterations, r.profit_estimate, r.gub, r.ub,
                        first_stage(in, r.consensus), wall});
        const std::string tag = "rho_" + format_number(rho);
        write_file(fs::path(out_dir) / tag / "iterations.csv", iterations_csv(r.state, timings));
      }
      const std::string csv = compare_csv(in, rows, timings);
      write_file(fs::path(out_dir) / "compare.csv", csv);
      std::cout << csv;
      return e.status == BnbStatus::Optimal ? kOk : kLimit;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kInternal;
  }
  return kOk;
}
