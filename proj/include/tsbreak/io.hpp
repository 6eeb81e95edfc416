#ifndef TSBREAK_IO_HPP
#define TSBREAK_IO_HPP

#include "tsbreak/admm.hpp"
#include "tsbreak/core.hpp"
#include "tsbreak/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tsbreak::io {

using json = nlohmann::json;

/// Malformed input file. The message names the location (row/column or
/// JSON field path).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

// CSV --------------------------------------------------------------------------

/// Comma-separated, '.' decimal, one header line, no index column.
TimeSeries parse_csv(const std::string& text);
TimeSeries read_csv(const std::filesystem::path& path);
/// Header x1..xp; values printed with 17 significant digits.
std::string format_csv(const TimeSeries& series);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Simulation spec ---------------------------------------------------------------

/// Builds a spec from JSON. Required: dim, n_times, seed. Optional: lag (1),
/// break_times ([]), noise_sd, burn_in, radius_cap, min_regime_distance,
/// segment_coeffs (drawn at random when absent), initial_state.
simulate::BreakVarSpec parse_simulation_spec(const json& doc);
json spec_to_json(const simulate::BreakVarSpec& spec);

// Fit configuration --------------------------------------------------------------

struct FitSettings {
  SolverConfig config;
  std::vector<double> lambdas{1.0};
};

/// Keys: lambda (number or array), rho, lag, eps_abs, eps_rel, max_iter,
/// detect_threshold, seed, adaptive_rho. Missing keys keep `base` values.
FitSettings parse_fit_config(const json& doc, FitSettings base = {});
json config_to_json(const FitSettings& settings);

// Reports --------------------------------------------------------------------------

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& doc, const std::string& path);

/// One fitted lambda, ready for the report.
json fit_entry(double lambda, const admm::SolveResult& solved,
               const std::vector<Index>& breakpoints, const std::vector<SegmentFit>& segments);

struct DetectRow {
  double lambda;
  Index breakpoint;
};

/// Re-applies `threshold` to the stored ||W^t||_F traces of a report.
std::vector<DetectRow> detect_from_report(const json& report, double threshold);

std::string format_detect_table(const std::vector<DetectRow>& rows);

}  // namespace tsbreak::io

#endif  // TSBREAK_IO_HPP
