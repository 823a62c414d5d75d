#pragma once

#include "nlhconv/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlhconv {

// The named experiments reproducible from the command line and the bindings.
enum class ExperimentKind { verify, means1d, homog1d, hlimit3d, bcgap, conv, maxwell, divcurl };

// Throws ConfigError for unknown names.
ExperimentKind experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentKind kind);

// Run configuration.  Zero / empty values mean "use the experiment default";
// the effective values are echoed into the resulting table so outputs are
// self-describing.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::verify;
  int grid = 0;      // 1D cell count or 3D edge length, experiment-specific
  int n_max = 0;     // largest sequence index (or trial count for `verify`)
  int probe_k = 0;   // probe modes per family
  double tol = 0.0;  // gate tolerance where the experiment admits one
  unsigned long long seed = 0;
  std::string out;             // output path; empty = stdout only
  std::string format = "csv";  // csv | json
};

// Parse a config from the documented JSON object.  Missing keys keep their
// defaults; unknown keys and wrong types are ConfigErrors.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct ReportRow {
  int n = 0;             // sequence index, trial count, or 0 for scalars
  std::string quantity;  // dotted name, e.g. "dirichlet.v_block"
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;  // |value - reference| unless noted otherwise
};

struct ReportTable {
  std::string experiment;
  std::vector<ReportRow> rows;
  bool verdict = false;    // acceptance thresholds met
  bool converged = true;   // false maps to the not-converged exit code
  unsigned long long seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // effective settings
  std::string notes;
};

// Header "n,quantity,value,reference,error"; one row per line; '.' decimal
// separator, UTF-8, %.17g doubles.  Empty tables emit the header only.
std::string to_csv(const ReportTable& table);

// The documented JSON schema (see docs/formats.md); key order is fixed, so
// equal tables serialize to identical bytes.
std::string to_json(const ReportTable& table);

// Parse and validate a report against the schema; throws IoError on schema
// violations.  Round-trips to_json exactly.
ReportTable table_from_json(const std::string& text);

// Serialize `table` in `format` ("csv" | "json") and write it to `path`.
// I/O failures and unknown formats are surfaced as IoError / ConfigError.
void emit(const ReportTable& table, const std::string& format, const std::string& path);

}  // namespace nlhconv
