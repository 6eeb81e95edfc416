// tsbreak: simulate break-VAR data, fit the group fused lasso over a lambda
// grid, and re-threshold stored fits.

#include "tsbreak/admm.hpp"
#include "tsbreak/io.hpp"
#include "tsbreak/segment.hpp"
#include "tsbreak/simulate.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tsbreak;

namespace {

struct FitFlags {
  std::string data;
  std::string config;
  std::string out;
  std::vector<double> lambdas;
  std::optional<Index> lag;
  std::optional<double> rho;
  std::optional<double> eps_abs;
  std::optional<double> eps_rel;
  std::optional<Index> max_iter;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  bool adaptive_rho = false;
  std::optional<unsigned> threads;
  bool quiet = false;
};

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TSBREAK_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw ConfigError("TSBREAK_THREADS must be a non-negative integer");
    }
  }
  return 0;
}

fs::path sidecar_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".truth.json");
  return p;
}

int run_simulate(const std::string& spec_path, const std::string& out_path) {
  const io::json doc = [&] {
    try {
      return io::json::parse(io::read_text(spec_path));
    } catch (const io::json::parse_error& e) {
      throw io::ParseError(spec_path + ": invalid JSON: " + e.what());
    }
  }();
  const simulate::BreakVarSpec spec = io::parse_simulation_spec(doc);
  const TimeSeries series = simulate::simulate_break_var(spec);
  io::write_text(out_path, io::format_csv(series));

  io::json meta;
  meta["schema"] = "tsbreak.simulation";
  meta["schema_version"] = io::kReportSchemaVersion;
  meta["data"] = fs::path(out_path).filename().string();
  meta["break_times"] = spec.break_times;
  meta["seed"] = spec.seed;
  meta["rng"] = "mt19937_64 + std::normal_distribution";
  meta["spec"] = io::spec_to_json(spec);
  io::write_text(sidecar_path(out_path), meta.dump(2) + "\n");
  return 0;
}

int run_fit(const FitFlags& flags) {
  io::FitSettings settings;
  if (!flags.config.empty()) {
    io::json doc;
    try {
      doc = io::json::parse(io::read_text(flags.config));
    } catch (const io::json::parse_error& e) {
      throw io::ParseError(flags.config + ": invalid JSON: " + e.what());
    }
    settings = io::parse_fit_config(doc);
  }
  SolverConfig& config = settings.config;
  if (!flags.lambdas.empty()) settings.lambdas = flags.lambdas;
  if (flags.lag) config.lag = *flags.lag;
  if (flags.rho) config.rho = *flags.rho;
  if (flags.eps_abs) config.eps_abs = *flags.eps_abs;
  if (flags.eps_rel) config.eps_rel = *flags.eps_rel;
  if (flags.max_iter) config.max_iter = *flags.max_iter;
  if (flags.threshold) config.detect_threshold = *flags.threshold;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.adaptive_rho) config.adaptive_rho = true;
  for (double lam : settings.lambdas) {
    SolverConfig probe = config;
    probe.lambda = lam;
    probe.validate();
  }

  const TimeSeries series = io::read_csv(flags.data);
  const LaggedDesign design = build_lagged_design(series, config.lag);
  const unsigned threads = resolve_threads(flags.threads);

  io::json report;
  report["schema"] = "tsbreak.fit-report";
  report["schema_version"] = io::kReportSchemaVersion;
  report["data"] = {{"path", flags.data}, {"n_times", series.n_times()}, {"dim", series.dim()}};
  report["config"] = io::config_to_json(settings);
  report["config"]["threads"] = threads;
  report["time_convention"] =
      "1-based observation index; a breakpoint b means the coefficients change between b-1 and b";
  report["fits"] = io::json::array();

  for (double lam : settings.lambdas) {
    SolverConfig run = config;
    run.lambda = lam;
    admm::SolveOptions options;
    options.threads = threads;
    if (!flags.quiet) {
      options.progress = [lam](const admm::Progress& p) {
        std::cerr << "lambda=" << lam << " iter=" << p.iteration << " primal=" << p.primal
                  << " dual=" << p.dual << " rho=" << p.rho << '\n';
      };
    }
    const admm::SolveResult solved = admm::solve(design, run, options);
    const auto breaks = segment::detect_changepoints(solved.estimate, run.detect_threshold);
    const auto segments = segment::refit_segments(series, breaks, diff_to_coeff(solved.estimate));
    if (!flags.quiet) {
      std::cerr << "lambda=" << lam << (solved.converged ? " converged" : " NOT converged")
                << " after " << solved.state.iteration << " iterations, " << breaks.size()
                << " breakpoints\n";
    }
    report["fits"].push_back(io::fit_entry(lam, solved, breaks, segments));
  }

  const std::string text = report.dump(2) + "\n";
  if (flags.out.empty() || flags.out == "-") {
    std::cout << text;
  } else {
    io::write_text(flags.out, text);
  }
  return 0;
}

int run_detect(const std::string& report_path, double threshold) {
  io::json report;
  try {
    report = io::json::parse(io::read_text(report_path));
  } catch (const io::json::parse_error& e) {
    throw io::ParseError(report_path + ": invalid JSON: " + e.what());
  }
  std::cout << io::format_detect_table(io::detect_from_report(report, threshold));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point segmentation of VAR time series with the group fused lasso"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Simulate a structural-break VAR series");
  sim->add_option("--spec", spec_path, "Simulation spec JSON")->required();
  sim->add_option("--out", sim_out, "Output CSV (sidecar <name>.truth.json is written too)")
      ->required();

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit over one or more lambda values");
  fit->add_option("--data", fit_flags.data, "Input CSV")->required();
  fit->add_option("--config", fit_flags.config, "Fit config JSON");
  fit->add_option("--lambda", fit_flags.lambdas, "Penalty values, e.g. 1,3,5")->delimiter(',');
  fit->add_option("--lag", fit_flags.lag, "VAR lag order K");
  fit->add_option("--rho", fit_flags.rho, "ADMM penalty parameter");
  fit->add_option("--eps-abs", fit_flags.eps_abs, "Absolute tolerance");
  fit->add_option("--eps-rel", fit_flags.eps_rel, "Relative tolerance");
  fit->add_option("--max-iter", fit_flags.max_iter, "Iteration cap");
  fit->add_option("--threshold", fit_flags.threshold, "Detection threshold on ||W^t||_F");
  fit->add_option("--seed", fit_flags.seed, "Recorded in the report");
  fit->add_flag("--adaptive-rho", fit_flags.adaptive_rho, "Residual-balancing rho updates");
  fit->add_option("--threads", fit_flags.threads, "Worker threads (0 = auto; env TSBREAK_THREADS)");
  fit->add_option("--out", fit_flags.out, "Report JSON (default: stdout)");
  fit->add_flag("--quiet", fit_flags.quiet, "No progress output");

  std::string report_path;
  double detect_threshold = 0.005;
  auto* detect = app.add_subcommand("detect", "Re-threshold a fit report");
  detect->add_option("--report", report_path, "Report JSON from `fit`")->required();
  detect->add_option("--threshold", detect_threshold, "Threshold on ||W^t||_F")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(spec_path, sim_out);
    if (*fit) return run_fit(fit_flags);
    if (*detect) return run_detect(report_path, detect_threshold);
  } catch (const std::exception& e) {
    std::cerr << "tsbreak: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
