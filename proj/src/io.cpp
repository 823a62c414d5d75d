#include "nlhconv/reporting.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace nlhconv {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr const char* kSchemaTag = "nlhconv-report-v1";

const std::vector<std::pair<ExperimentKind, const char*>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, const char*>> names = {
      {ExperimentKind::verify, "verify"},     {ExperimentKind::means1d, "means1d"},
      {ExperimentKind::homog1d, "homog1d"},   {ExperimentKind::hlimit3d, "hlimit3d"},
      {ExperimentKind::bcgap, "bcgap"},       {ExperimentKind::conv, "conv"},
      {ExperimentKind::maxwell, "maxwell"},   {ExperimentKind::divcurl, "divcurl"},
  };
  return names;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void bad_report(const std::string& what) {
  throw IoError("report JSON does not match the schema: " + what);
}

void require_keys(const OrderedJson& obj, const std::vector<std::string>& keys,
                  const std::string& where) {
  if (!obj.is_object()) bad_report(where + " is not an object");
  for (const std::string& k : keys)
    if (!obj.contains(k)) bad_report(where + " is missing key '" + k + "'");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const std::string& k : keys) known = known || it.key() == k;
    if (!known) bad_report(where + " has unknown key '" + it.key() + "'");
  }
}

}  // namespace

ExperimentKind experiment_from_name(const std::string& name) {
  for (const auto& [kind, text] : kind_names())
    if (name == text) return kind;
  std::string known;
  for (const auto& [kind, text] : kind_names()) {
    if (!known.empty()) known += ", ";
    known += text;
  }
  throw ConfigError("unknown experiment '" + name + "' (known: " + known + ")");
}

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, text] : kind_names())
    if (k == kind) return text;
  throw ConfigError("unknown experiment enumerator");
}

ExperimentConfig config_from_json(const std::string& text) {
  OrderedJson parsed;
  try {
    parsed = OrderedJson::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!parsed.is_object()) throw ConfigError("config JSON must be an object");

  ExperimentConfig cfg;
  try {
    for (auto it = parsed.begin(); it != parsed.end(); ++it) {
      const std::string& key = it.key();
      if (key == "experiment") {
        cfg.experiment = experiment_from_name(it.value().get<std::string>());
      } else if (key == "grid") {
        cfg.grid = it.value().get<int>();
      } else if (key == "n_max") {
        cfg.n_max = it.value().get<int>();
      } else if (key == "probe_k") {
        cfg.probe_k = it.value().get<int>();
      } else if (key == "tol") {
        cfg.tol = it.value().get<double>();
      } else if (key == "seed") {
        cfg.seed = it.value().get<unsigned long long>();
      } else if (key == "out") {
        cfg.out = it.value().get<std::string>();
      } else if (key == "format") {
        cfg.format = it.value().get<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be 'csv' or 'json', got '" + cfg.format + "'");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  OrderedJson j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["grid"] = cfg.grid;
  j["n_max"] = cfg.n_max;
  j["probe_k"] = cfg.probe_k;
  j["tol"] = cfg.tol;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["format"] = cfg.format;
  return j.dump(2) + "\n";
}

std::string to_csv(const ReportTable& table) {
  std::string out = "n,quantity,value,reference,error\n";
  for (const ReportRow& row : table.rows) {
    out += std::to_string(row.n);
    out += ',';
    out += row.quantity;
    out += ',';
    out += format_double(row.value);
    out += ',';
    out += format_double(row.reference);
    out += ',';
    out += format_double(row.error);
    out += '\n';
  }
  return out;
}

std::string to_json(const ReportTable& table) {
  OrderedJson j;
  j["schema"] = kSchemaTag;
  j["experiment"] = table.experiment;
  j["seed"] = table.seed;
  OrderedJson cfg = OrderedJson::object();
  for (const auto& [key, value] : table.config) cfg[key] = value;
  j["config"] = cfg;
  j["verdict"] = table.verdict;
  j["converged"] = table.converged;
  j["notes"] = table.notes;
  OrderedJson rows = OrderedJson::array();
  for (const ReportRow& row : table.rows) {
    OrderedJson r;
    r["n"] = row.n;
    r["quantity"] = row.quantity;
    r["value"] = row.value;
    r["reference"] = row.reference;
    r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

ReportTable table_from_json(const std::string& text) {
  OrderedJson parsed;
  try {
    parsed = OrderedJson::parse(text);
  } catch (const std::exception& e) {
    bad_report(std::string("not valid JSON: ") + e.what());
  }
  require_keys(parsed,
               {"schema", "experiment", "seed", "config", "verdict", "converged", "notes", "rows"},
               "report");
  try {
    if (parsed["schema"].get<std::string>() != kSchemaTag)
      bad_report("unsupported schema tag '" + parsed["schema"].get<std::string>() + "'");
    ReportTable table;
    table.experiment = parsed["experiment"].get<std::string>();
    table.seed = parsed["seed"].get<unsigned long long>();
    if (!parsed["config"].is_object()) bad_report("config is not an object");
    for (auto it = parsed["config"].begin(); it != parsed["config"].end(); ++it)
      table.config.emplace_back(it.key(), it.value().get<std::string>());
    table.verdict = parsed["verdict"].get<bool>();
    table.converged = parsed["converged"].get<bool>();
    table.notes = parsed["notes"].get<std::string>();
    if (!parsed["rows"].is_array()) bad_report("rows is not an array");
    for (const OrderedJson& r : parsed["rows"]) {
      require_keys(r, {"n", "quantity", "value", "reference", "error"}, "row");
      ReportRow row;
      row.n = r["n"].get<int>();
      row.quantity = r["quantity"].get<std::string>();
      row.value = r["value"].get<double>();
      row.reference = r["reference"].get<double>();
      row.error = r["error"].get<double>();
      table.rows.push_back(std::move(row));
    }
    return table;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    bad_report(std::string("field has the wrong type: ") + e.what());
  }
}

void emit(const ReportTable& table, const std::string& format, const std::string& path) {
  std::string payload;
  if (format == "csv") {
    payload = to_csv(table);
  } else if (format == "json") {
    payload = to_json(table);
  } else {
    throw ConfigError("format must be 'csv' or 'json', got '" + format + "'");
  }
  if (path.empty()) throw IoError("emit requires a non-empty output path");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  file.flush();
  if (!file) throw IoError("write to '" + path + "' failed: " + std::strerror(errno));
}

}  // namespace nlhconv
