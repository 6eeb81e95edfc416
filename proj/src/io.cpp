#include "tsbreak/io.hpp"

#include "tsbreak/segment.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tsbreak::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json* find(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

double number_at(const json& value, const std::string& path) {
  if (!value.is_number()) field_error(path, "expected a number");
  return value.get<double>();
}

Index integer_at(const json& value, const std::string& path) {
  if (!value.is_number_integer()) field_error(path, "expected an integer");
  return value.get<Index>();
}

std::vector<Index> integer_list_at(const json& value, const std::string& path) {
  if (!value.is_array()) field_error(path, "expected an array of integers");
  std::vector<Index> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(integer_at(value[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::uint64_t seed_at(const json& value, const std::string& path) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
    field_error(path, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

}  // namespace

// CSV ---------------------------------------------------------------------------

TimeSeries parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw ParseError("csv: missing header line");
  }
  const std::size_t cols = split_commas(line).size();

  std::vector<double> values;
  Index rows = 0;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != cols) {
      std::ostringstream msg;
      msg << "csv: line " << line_no << " has " << fields.size() << " fields, header has "
          << cols;
      throw ParseError(msg.str());
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& f = fields[c];
      char* end = nullptr;
      errno = 0;
      const double v = f.empty() ? std::nan("") : std::strtod(f.c_str(), &end);
      const bool consumed = !f.empty() && end == f.c_str() + f.size();
      if (!consumed || errno == ERANGE || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "csv: data row " << rows + 1 << " (line " << line_no << "), column " << c + 1
            << ": '" << f << "' is not a finite number";
        throw ParseError(msg.str());
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows");

  Matrix data(rows, static_cast<Index>(cols));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < data.cols(); ++c) {
      data(r, c) = values[static_cast<std::size_t>(r * data.cols() + c)];
    }
  }
  return TimeSeries(std::move(data));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

TimeSeries read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const TimeSeries& series) {
  std::string out;
  for (Index c = 0; c < series.dim(); ++c) {
    if (c > 0) out += ',';
    out += "x" + std::to_string(c + 1);
  }
  out += '\n';
  for (Index r = 0; r < series.n_times(); ++r) {
    for (Index c = 0; c < series.dim(); ++c) {
      if (c > 0) out += ',';
      out += format_double(series.data()(r, c));
    }
    out += '\n';
  }
  return out;
}

// Matrices ---------------------------------------------------------------------------

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& doc, const std::string& path) {
  if (!doc.is_array() || doc.empty()) field_error(path, "expected a non-empty array of rows");
  const std::size_t cols = doc[0].is_array() ? doc[0].size() : 0;
  if (cols == 0) field_error(path + "/0", "expected a non-empty array of numbers");
  Matrix m(static_cast<Index>(doc.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const std::string row_path = path + "/" + std::to_string(r);
    if (!doc[r].is_array() || doc[r].size() != cols) {
      field_error(row_path, "expected " + std::to_string(cols) + " numbers");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          number_at(doc[r][c], row_path + "/" + std::to_string(c));
    }
  }
  return m;
}

// Simulation spec ---------------------------------------------------------------------

simulate::BreakVarSpec parse_simulation_spec(const json& doc) {
  if (!doc.is_object()) field_error("", "simulation spec must be a JSON object");
  auto required = [&](const std::string& key) -> const json& {
    const json* v = find(doc, key);
    if (!v) field_error("/" + key, "required field missing");
    return *v;
  };

  const Index dim = integer_at(required("dim"), "/dim");
  const Index n_times = integer_at(required("n_times"), "/n_times");
  const std::uint64_t seed = seed_at(required("seed"), "/seed");
  if (dim < 1) field_error("/dim", "must be >= 1");
  if (n_times < 1) field_error("/n_times", "must be >= 1");

  Index lag = 1;
  if (const json* v = find(doc, "lag")) lag = integer_at(*v, "/lag");
  if (lag < 1) field_error("/lag", "must be >= 1");

  std::vector<Index> breaks;
  if (const json* v = find(doc, "break_times")) breaks = integer_list_at(*v, "/break_times");

  simulate::RegimeDefaults defaults;
  if (const json* v = find(doc, "noise_sd")) defaults.noise_sd = number_at(*v, "/noise_sd");
  if (const json* v = find(doc, "burn_in")) defaults.burn_in = integer_at(*v, "/burn_in");
  if (const json* v = find(doc, "radius_cap")) defaults.radius_cap = number_at(*v, "/radius_cap");
  if (const json* v = find(doc, "min_regime_distance")) {
    defaults.min_regime_distance = number_at(*v, "/min_regime_distance");
  }

  simulate::BreakVarSpec spec;
  try {
    if (const json* v = find(doc, "segment_coeffs")) {
      if (!v->is_array()) field_error("/segment_coeffs", "expected an array of matrices");
      spec.dim = dim;
      spec.lag = lag;
      spec.n_times = n_times;
      spec.break_times = breaks;
      spec.noise_sd = defaults.noise_sd;
      spec.burn_in = defaults.burn_in;
      spec.seed = seed;
      for (std::size_t i = 0; i < v->size(); ++i) {
        spec.segment_coeffs.push_back(
            matrix_from_json((*v)[i], "/segment_coeffs/" + std::to_string(i)));
      }
    } else {
      // Draw regimes only after the cheap checks pass.
      simulate::BreakVarSpec probe;
      probe.dim = dim;
      probe.lag = lag;
      probe.n_times = n_times;
      probe.break_times = breaks;
      probe.noise_sd = defaults.noise_sd;
      probe.burn_in = defaults.burn_in;
      probe.segment_coeffs.assign(breaks.size() + 1, Matrix::Zero(dim, dim * lag));
      probe.validate();
      spec = simulate::random_break_spec(dim, lag, n_times, breaks, seed, defaults);
    }
    if (const json* v = find(doc, "initial_state")) {
      spec.initial_state = matrix_from_json(*v, "/initial_state");
    }
    spec.validate();
  } catch (const ConfigError& e) {
    // "spec.field[i]: rule" -> "/field/i: rule"
    std::string msg = e.what();
    if (msg.rfind("spec.", 0) == 0) {
      msg = "/" + msg.substr(5);
      for (char& ch : msg) {
        if (ch == '[') ch = '/';
      }
      std::string cleaned;
      for (char ch : msg) {
        if (ch != ']') cleaned += ch;
      }
      msg = cleaned;
    }
    throw ParseError(msg);
  }
  return spec;
}

json spec_to_json(const simulate::BreakVarSpec& spec) {
  json doc;
  doc["dim"] = spec.dim;
  doc["lag"] = spec.lag;
  doc["n_times"] = spec.n_times;
  doc["break_times"] = spec.break_times;
  doc["noise_sd"] = spec.noise_sd;
  doc["burn_in"] = spec.burn_in;
  doc["seed"] = spec.seed;
  json coeffs = json::array();
  for (const Matrix& a : spec.segment_coeffs) coeffs.push_back(matrix_to_json(a));
  doc["segment_coeffs"] = std::move(coeffs);
  if (spec.initial_state) doc["initial_state"] = matrix_to_json(*spec.initial_state);
  return doc;
}

// Fit configuration ---------------------------------------------------------------------

FitSettings parse_fit_config(const json& doc, FitSettings base) {
  if (!doc.is_object()) field_error("", "fit config must be a JSON object");
  SolverConfig& c = base.config;
  if (const json* v = find(doc, "lambda")) {
    if (v->is_array()) {
      if (v->empty()) field_error("/lambda", "expected at least one value");
      base.lambdas.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        base.lambdas.push_back(number_at((*v)[i], "/lambda/" + std::to_string(i)));
      }
    } else {
      base.lambdas = {number_at(*v, "/lambda")};
    }
  }
  if (const json* v = find(doc, "rho")) c.rho = number_at(*v, "/rho");
  if (const json* v = find(doc, "lag")) c.lag = integer_at(*v, "/lag");
  if (const json* v = find(doc, "eps_abs")) c.eps_abs = number_at(*v, "/eps_abs");
  if (const json* v = find(doc, "eps_rel")) c.eps_rel = number_at(*v, "/eps_rel");
  if (const json* v = find(doc, "max_iter")) c.max_iter = integer_at(*v, "/max_iter");
  if (const json* v = find(doc, "detect_threshold")) {
    c.detect_threshold = number_at(*v, "/detect_threshold");
  }
  if (const json* v = find(doc, "seed")) c.seed = seed_at(*v, "/seed");
  if (const json* v = find(doc, "adaptive_rho")) {
    if (!v->is_boolean()) field_error("/adaptive_rho", "expected a boolean");
    c.adaptive_rho = v->get<bool>();
  }
  return base;
}

json config_to_json(const FitSettings& settings) {
  const SolverConfig& c = settings.config;
  json doc;
  doc["lambda"] = settings.lambdas;
  doc["rho"] = c.rho;
  doc["lag"] = c.lag;
  doc["eps_abs"] = c.eps_abs;
  doc["eps_rel"] = c.eps_rel;
  doc["max_iter"] = c.max_iter;
  doc["detect_threshold"] = c.detect_threshold;
  doc["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  doc["adaptive_rho"] = c.adaptive_rho;
  return doc;
}

// Reports ---------------------------------------------------------------------------------

json fit_entry(double lambda, const admm::SolveResult& solved,
               const std::vector<Index>& breakpoints, const std::vector<SegmentFit>& segments) {
  json entry;
  entry["lambda"] = lambda;
  entry["converged"] = solved.converged;
  entry["iterations"] = solved.state.iteration;
  entry["objective"] = solved.objective;
  entry["final_rho"] = solved.state.rho;
  entry["breakpoints"] = breakpoints;

  const std::vector<double> norms = block_norms(solved.estimate);
  entry["w_norms"] = {{"first_time", solved.design.t_offset + 2},
                      {"values", std::vector<double>(norms.begin() + (norms.empty() ? 0 : 1),
                                                     norms.end())}};

  json segs = json::array();
  for (const SegmentFit& s : segments) {
    json seg;
    seg["start"] = s.start;
    seg["end"] = s.end;
    seg["rows"] = s.rows;
    seg["coeffs"] = s.coeffs ? matrix_to_json(*s.coeffs) : json(nullptr);
    seg["fused"] = s.fused ? matrix_to_json(*s.fused) : json(nullptr);
    seg["warning"] = s.warning;
    segs.push_back(std::move(seg));
  }
  entry["segments"] = std::move(segs);
  entry["primal_residuals"] = solved.primal_residuals;
  entry["dual_residuals"] = solved.dual_residuals;
  return entry;
}

std::vector<DetectRow> detect_from_report(const json& report, double threshold) {
  const json* fits = report.is_object() ? find(report, "fits") : nullptr;
  if (!fits || !fits->is_array()) field_error("/fits", "report has no fits array");
  std::vector<DetectRow> rows;
  for (std::size_t i = 0; i < fits->size(); ++i) {
    const std::string path = "/fits/" + std::to_string(i);
    const json& fit = (*fits)[i];
    const json* lambda = fit.is_object() ? find(fit, "lambda") : nullptr;
    if (!lambda) field_error(path + "/lambda", "missing");
    const json* trace = find(fit, "w_norms");
    if (!trace || !trace->is_object()) field_error(path + "/w_norms", "missing ||W^t|| trace");
    const json* first = find(*trace, "first_time");
    const json* values = find(*trace, "values");
    if (!first) field_error(path + "/w_norms/first_time", "missing");
    if (!values || !values->is_array()) field_error(path + "/w_norms/values", "missing");

    const Index first_time = integer_at(*first, path + "/w_norms/first_time");
    // Slot 0 stands for the unpenalized first block.
    std::vector<double> norms{0.0};
    for (std::size_t k = 0; k < values->size(); ++k) {
      norms.push_back(number_at((*values)[k], path + "/w_norms/values/" + std::to_string(k)));
    }
    const double lam = number_at(*lambda, path + "/lambda");
    for (Index b : segment::detect_changepoints(norms, first_time - 2, threshold)) {
      rows.push_back({lam, b});
    }
  }
  return rows;
}

std::string format_detect_table(const std::vector<DetectRow>& rows) {
  std::string out = "lambda\tbreakpoint\n";
  for (const DetectRow& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", r.lambda);
    out += buf;
    out += '\t';
    out += std::to_string(r.breakpoint);
    out += '\n';
  }
  return out;
}

}  // namespace tsbreak::io
