#pragma once

// Run configuration and result-document plumbing behind the command-line
// tool.  Output is deterministic by construction: objects keep insertion
// order, every floating-point value prints at 17 significant digits, and
// sweep rows assemble by grid index no matter how the work interleaves.
// Identical config + seed therefore reproduce byte-identical documents,
// runtime_seconds aside.

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quditbus/fock_oracle.hpp"
#include "quditbus/protocols.hpp"

namespace quditbus::cli {

using ordered_json = nlohmann::ordered_json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_simulation_error = 1;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_tail_mass = 3;

// Relative output paths resolve against this directory when it is set.
inline constexpr const char* output_dir_env = "QUDITBUS_OUTPUT_DIR";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Protocol { qutrit, qudit, cascade, loss_report, oracle_check };
enum class OutputFormat { json, csv };

struct SweepGrid {
  std::vector<double> alpha;
  std::vector<double> theta;
  std::vector<int> dim;

  bool defined() const {
    return !alpha.empty() || !theta.empty() || !dim.empty();
  }
};

struct RunConfig {
  Protocol protocol = Protocol::qutrit;
  int dim = 0;  // 0 infers from the coefficients, else the protocol default
  std::vector<cx> coeffs_a;  // empty means maximal 1/sqrt(dim) everywhere
  std::vector<cx> coeffs_b;
  cx alpha{2.0, 0.0};
  double theta = 0.3;
  RunMode mode = RunMode::enumerate;
  long long trials = 10000;
  std::uint64_t seed = 0;
  int n_max = -1;
  int loss_m = 1;               // photons lost per qudit in loss reports
  int cutoff = 40;              // bus truncation for the dense cross-check
  double oracle_tolerance = 1e-8;
  double branch_floor = 1e-12;
  double tail_tolerance = default_tail_tolerance;
  bool experimental_qudit_cascade = false;
  SweepGrid sweep;
  std::string output;  // empty writes to stdout
  OutputFormat format = OutputFormat::json;
};

namespace detail {

inline std::string normalize_token(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '-') c = '_';
  }
  return s;
}

inline Protocol parse_protocol(const std::string& raw) {
  const std::string s = normalize_token(raw);
  if (s == "qutrit") return Protocol::qutrit;
  if (s == "qudit") return Protocol::qudit;
  if (s == "cascade") return Protocol::cascade;
  if (s == "loss_report") return Protocol::loss_report;
  if (s == "oracle_check") return Protocol::oracle_check;
  throw ConfigError("unknown protocol: " + raw);
}

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::qutrit: return "qutrit";
    case Protocol::qudit: return "qudit";
    case Protocol::cascade: return "cascade";
    case Protocol::loss_report: return "loss_report";
    case Protocol::oracle_check: return "oracle_check";
  }
  return "?";
}

inline RunMode parse_mode(const std::string& raw) {
  const std::string s = normalize_token(raw);
  if (s == "enumerate") return RunMode::enumerate;
  if (s == "trajectory") return RunMode::trajectory;
  throw ConfigError("unknown mode: " + raw + " (want enumerate|trajectory)");
}

inline OutputFormat parse_format(const std::string& raw) {
  const std::string s = normalize_token(raw);
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw ConfigError("unknown format: " + raw + " (want json|csv)");
}

inline cx parse_complex(const nlohmann::ordered_json& v, const std::string& key) {
  if (v.is_number()) return cx{v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return cx{v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(key + ": expected a number or an [re, im] pair");
}

// "maximal" comes back as an empty list; anything else must be a non-empty
// array of numbers or [re, im] pairs.
inline std::vector<cx> parse_coeffs(const nlohmann::ordered_json& v,
                                    const std::string& key) {
  if (v.is_string()) {
    if (normalize_token(v.get<std::string>()) == "maximal") return {};
    throw ConfigError(key + ": only the string \"maximal\" is accepted");
  }
  if (!v.is_array() || v.empty())
    throw ConfigError(key + ": expected \"maximal\" or a non-empty array");
  std::vector<cx> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(parse_complex(e, key));
  return out;
}

inline double require_number(const nlohmann::ordered_json& v,
                             const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

inline long long require_integer(const nlohmann::ordered_json& v,
                                 const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return v.get<long long>();
}

inline bool require_bool(const nlohmann::ordered_json& v,
                         const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key + ": expected a boolean");
  return v.get<bool>();
}

inline std::string require_string(const nlohmann::ordered_json& v,
                                  const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

inline SweepGrid parse_sweep(const nlohmann::ordered_json& v) {
  if (!v.is_object()) throw ConfigError("sweep: expected an object");
  SweepGrid grid;
  for (const auto& [key, val] : v.items()) {
    if (key == "alpha" || key == "theta") {
      if (!val.is_array()) throw ConfigError("sweep." + key + ": expected an array");
      auto& dst = key == "alpha" ? grid.alpha : grid.theta;
      for (const auto& e : val) dst.push_back(require_number(e, "sweep." + key));
    } else if (key == "dim") {
      if (!val.is_array()) throw ConfigError("sweep.dim: expected an array");
      for (const auto& e : val)
        grid.dim.push_back(static_cast<int>(require_integer(e, "sweep.dim")));
    } else {
      throw ConfigError("sweep: unknown key " + key);
    }
  }
  return grid;
}

}  // namespace detail

// Applies one config document on top of cfg; later sources (flags) win by
// calling this first and assigning afterwards.  Unknown keys are errors.
inline void apply_config_json(RunConfig& cfg, const ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "protocol")
      cfg.protocol = detail::parse_protocol(detail::require_string(v, key));
    else if (key == "dim")
      cfg.dim = static_cast<int>(detail::require_integer(v, key));
    else if (key == "coeffs_a")
      cfg.coeffs_a = detail::parse_coeffs(v, key);
    else if (key == "coeffs_b")
      cfg.coeffs_b = detail::parse_coeffs(v, key);
    else if (key == "alpha")
      cfg.alpha = detail::parse_complex(v, key);
    else if (key == "theta")
      cfg.theta = detail::require_number(v, key);
    else if (key == "mode")
      cfg.mode = detail::parse_mode(detail::require_string(v, key));
    else if (key == "trials")
      cfg.trials = detail::require_integer(v, key);
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(detail::require_integer(v, key));
    else if (key == "n_max")
      cfg.n_max = static_cast<int>(detail::require_integer(v, key));
    else if (key == "loss_m")
      cfg.loss_m = static_cast<int>(detail::require_integer(v, key));
    else if (key == "cutoff")
      cfg.cutoff = static_cast<int>(detail::require_integer(v, key));
    else if (key == "oracle_tolerance")
      cfg.oracle_tolerance = detail::require_number(v, key);
    else if (key == "branch_floor")
      cfg.branch_floor = detail::require_number(v, key);
    else if (key == "tail_tolerance")
      cfg.tail_tolerance = detail::require_number(v, key);
    else if (key == "experimental_qudit_cascade")
      cfg.experimental_qudit_cascade = detail::require_bool(v, key);
    else if (key == "sweep")
      cfg.sweep = detail::parse_sweep(v);
    else if (key == "output")
      cfg.output = detail::require_string(v, key);
    else if (key == "format")
      cfg.format = detail::parse_format(detail::require_string(v, key));
    else
      throw ConfigError("config: unknown key " + key);
  }
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  RunConfig cfg;
  apply_config_json(cfg, doc);
  return cfg;
}

struct ResolvedInput {
  QuditSpec a;
  QuditSpec b;
  ProtocolParams params;
};

// Turns the raw config into validated protocol inputs.  All validation
// failures surface as ConfigError so the driver can map them to exit 2.
inline ResolvedInput resolve(const RunConfig& cfg) {
  int dim = cfg.dim;
  if (dim == 0) {
    if (!cfg.coeffs_a.empty())
      dim = static_cast<int>(cfg.coeffs_a.size());
    else if (!cfg.coeffs_b.empty())
      dim = static_cast<int>(cfg.coeffs_b.size());
    else
      dim = 3;
  }
  if (cfg.protocol == Protocol::qutrit && dim != 3)
    throw ConfigError("qutrit: dimension is fixed at 3");
  auto check_size = [dim](const std::vector<cx>& c, const char* key) {
    if (!c.empty() && static_cast<int>(c.size()) != dim)
      throw ConfigError(std::string(key) + ": got " +
                        std::to_string(c.size()) + " coefficients for dim " +
                        std::to_string(dim));
  };
  check_size(cfg.coeffs_a, "coeffs_a");
  check_size(cfg.coeffs_b, "coeffs_b");
  try {
    QuditSpec a = cfg.coeffs_a.empty() ? QuditSpec::maximal(dim)
                                       : QuditSpec::normalized(cfg.coeffs_a);
    QuditSpec b = cfg.coeffs_b.empty() ? QuditSpec::maximal(dim)
                                       : QuditSpec::normalized(cfg.coeffs_b);
    ProtocolParams params;
    params.alpha = cfg.alpha;
    params.theta = XpmTheta{cfg.theta};
    params.n_max = cfg.n_max;
    params.mode = cfg.mode;
    params.rng_seed = cfg.seed;
    params.trials = cfg.trials;
    params.tail_tolerance = cfg.tail_tolerance;
    params.branch_floor = cfg.branch_floor;
    params.experimental_qudit_cascade = cfg.experimental_qudit_cascade;
    quditbus::detail::check_params(params, "config");
    return {std::move(a), std::move(b), std::move(params)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace detail {

inline ordered_json complex_json(cx v) {
  return ordered_json::array({v.real(), v.imag()});
}

inline ordered_json coeffs_json(const std::vector<cx>& cs) {
  ordered_json out = ordered_json::array();
  for (cx c : cs) out.push_back(complex_json(c));
  return out;
}

inline ordered_json state_json(const HybridState& s) {
  ordered_json terms = ordered_json::array();
  for (const auto& t : s.terms()) {
    ordered_json bus = ordered_json::array();
    for (cx b : t.bus) bus.push_back(complex_json(b));
    ordered_json term;
    term["coeff"] = complex_json(t.coeff);
    term["ket_a"] = t.ket_a.index;
    term["ket_b"] = t.ket_b.index;
    term["bus"] = std::move(bus);
    terms.push_back(std::move(term));
  }
  ordered_json out;
  out["dim_a"] = s.dim_a();
  out["dim_b"] = s.dim_b();
  out["bus_modes"] = s.bus_modes();
  out["terms"] = std::move(terms);
  return out;
}

inline ordered_json branch_json(const BranchRecord& rec,
                                const HybridState* target, long long trials) {
  ordered_json b;
  b["label"] = rec.label;
  b["outcomes"] = rec.outcomes;
  b["probability"] = rec.probability;
  if (trials > 0) {
    b["sampled_count"] = rec.sampled_count;
    b["empirical_frequency"] =
        static_cast<double>(rec.sampled_count) / static_cast<double>(trials);
  }
  ordered_json corr = ordered_json::array();
  for (const auto& c : rec.corrections) corr.push_back(to_string(c));
  b["corrections"] = std::move(corr);
  if (target != nullptr && !rec.state.empty())
    b["target_fidelity"] = fidelity(rec.state, *target);
  else
    b["target_fidelity"] = nullptr;
  if (!rec.state.empty())
    b["entanglement_spectrum"] = entanglement_spectrum(rec.state);
  else
    b["entanglement_spectrum"] = ordered_json::array();
  b["state"] = state_json(rec.state);
  return b;
}

inline ordered_json input_echo(const RunConfig& cfg, const ResolvedInput& in) {
  ordered_json doc;
  doc["protocol"] = protocol_name(cfg.protocol);
  doc["dim"] = in.a.dim;
  doc["coeffs_a"] = coeffs_json(in.a.coeffs);
  doc["coeffs_b"] = coeffs_json(in.b.coeffs);
  doc["alpha"] = complex_json(in.params.alpha);
  doc["theta"] = in.params.theta.radians;
  doc["mode"] =
      in.params.mode == RunMode::trajectory ? "trajectory" : "enumerate";
  if (in.params.mode == RunMode::trajectory) doc["trials"] = in.params.trials;
  doc["seed"] = in.params.rng_seed;
  doc["n_max"] = in.params.n_max;
  doc["branch_floor"] = in.params.branch_floor;
  doc["tail_tolerance"] = in.params.tail_tolerance;
  if (cfg.protocol == Protocol::loss_report) doc["loss_m"] = cfg.loss_m;
  if (cfg.protocol == Protocol::oracle_check) {
    doc["cutoff"] = cfg.cutoff;
    doc["oracle_tolerance"] = cfg.oracle_tolerance;
  }
  if (cfg.experimental_qudit_cascade)
    doc["experimental_qudit_cascade"] = true;
  return doc;
}

inline void append_summary(ordered_json& doc, const ProtocolResult& r,
                           bool herald_diagnostics) {
  doc["total_probability"] = r.total_probability;
  doc["tail_mass"] = r.tail_mass;
  doc["tail_warning"] = r.tail_warning;
  doc["discarded_mass"] = r.discarded_mass;
  if (r.trials > 0) {
    doc["trials"] = r.trials;
    doc["unrecorded_samples"] = r.unrecorded_samples;
  }
  if (herald_diagnostics) {
    doc["ideal_success_probability"] = r.ideal_success_probability;
    doc["error_probability_computed"] = r.error_probability_computed;
    doc["error_probability_closed_form"] = r.error_probability_closed_form;
    doc["error_probability_reference"] = r.error_probability_reference;
  }
}

}  // namespace detail

// Builds the full result document (everything but runtime_seconds).
inline ordered_json build_result(const RunConfig& cfg) {
  const ResolvedInput in = resolve(cfg);
  ordered_json doc;
  doc["tool"] = "quditbus";
  doc["version"] = "0.1.0";
  doc["input"] = detail::input_echo(cfg, in);

  switch (cfg.protocol) {
    case Protocol::qutrit:
    case Protocol::qudit: {
      const ProtocolResult r = generate_entangled(in.a, in.b, in.params);
      // Degenerate inputs with no surviving diagonal product have no named
      // target; the branch then reports a null fidelity instead of failing.
      std::optional<HybridState> target;
      try {
        target = ideal_herald_target(in.a, in.b);
      } catch (const std::runtime_error&) {
      }
      ordered_json branches = ordered_json::array();
      for (const auto& rec : r.branches)
        branches.push_back(detail::branch_json(
            rec, rec.label == "success" && target ? &*target : nullptr,
            r.trials));
      doc["branches"] = std::move(branches);
      detail::append_summary(doc, r, true);
      break;
    }
    case Protocol::cascade: {
      const ProtocolResult r = cascade(in.a, in.b, in.params);
      ordered_json branches = ordered_json::array();
      for (const auto& rec : r.branches) {
        const auto target = cascade_branch_target(in.a, in.b, rec.label);
        branches.push_back(detail::branch_json(
            rec, target ? &*target : nullptr, r.trials));
      }
      doc["branches"] = std::move(branches);
      detail::append_summary(doc, r, false);
      break;
    }
    case Protocol::loss_report: {
      const LossReport rep =
          loss_robustness_report(in.a, in.b, cfg.loss_m, in.params);
      ordered_json rows = ordered_json::array();
      for (const auto& row : rep.rows) {
        ordered_json r;
        r["v_losses_a"] = row.pattern.v_losses_a;
        r["h_losses_a"] = row.pattern.h_losses_a;
        r["v_losses_b"] = row.pattern.v_losses_b;
        r["h_losses_b"] = row.pattern.h_losses_b;
        r["destroyed"] = row.destroyed;
        r["branch_weight"] = row.branch_weight;
        r["herald_probability"] = row.herald_probability;
        r["schmidt_rank"] = row.schmidt_rank;
        r["reaches_reduced_rank"] = row.reaches_reduced_rank;
        r["spectrum"] = row.spectrum;
        rows.push_back(std::move(r));
      }
      ordered_json rep_doc;
      rep_doc["m"] = rep.m;
      rep_doc["reduced_dim"] = rep.reduced_dim;
      rep_doc["rows"] = std::move(rows);
      doc["loss_report"] = std::move(rep_doc);
      break;
    }
    case Protocol::oracle_check: {
      fock::OracleOptions opts;
      opts.bus_cutoff = cfg.cutoff;
      if (cfg.n_max >= 0) opts.n_limit = cfg.n_max;
      const fock::OracleReport rep =
          fock::oracle_check(in.a, in.b, in.params.alpha, in.params.theta, opts);
      ordered_json rows = ordered_json::array();
      for (const auto& row : rep.rows) {
        ordered_json r;
        r["quantity"] = row.quantity;
        r["symbolic"] = row.symbolic;
        r["oracle"] = row.oracle;
        r["deviation"] = row.deviation;
        rows.push_back(std::move(r));
      }
      ordered_json rep_doc;
      rep_doc["bus_cutoff"] = opts.bus_cutoff;
      rep_doc["n_limit"] = opts.n_limit;
      rep_doc["tolerance"] = cfg.oracle_tolerance;
      rep_doc["max_deviation"] = rep.max_deviation;
      rep_doc["passed"] = rep.max_deviation <= cfg.oracle_tolerance;
      rep_doc["rows"] = std::move(rows);
      doc["oracle"] = std::move(rep_doc);
      break;
    }
  }
  doc["seed"] = in.params.rng_seed;
  return doc;
}

namespace detail {

inline void format_double(double v, std::string& out) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) {
    // canonical zero: "-0" would not survive a parse/dump round trip
    out += "0";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline bool array_is_flat(const ordered_json& v) {
  for (const auto& e : v)
    if (e.is_object() || (e.is_array() && !array_is_flat(e))) return false;
  return true;
}

inline void dump_value(const ordered_json& v, std::string& out, int indent) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out.append(2 * (indent + 1), ' ');
        out += ordered_json(key).dump();
        out += ": ";
        dump_value(val, out, indent + 1);
      }
      out += "\n";
      out.append(2 * indent, ' ');
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      if (array_is_flat(v)) {
        out += "[";
        bool first = true;
        for (const auto& e : v) {
          if (!first) out += ", ";
          first = false;
          dump_value(e, out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ",\n";
        first = false;
        out.append(2 * (indent + 1), ' ');
        dump_value(e, out, indent + 1);
      }
      out += "\n";
      out.append(2 * indent, ' ');
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      format_double(v.get<double>(), out);
      return;
    default:
      // strings, integers, booleans, null: nlohmann's dump is already
      // canonical and locale-independent
      out += v.dump();
      return;
  }
}

}  // namespace detail

inline std::string dump_deterministic(const ordered_json& doc) {
  std::string out;
  detail::dump_value(doc, out, 0);
  out += "\n";
  return out;
}

// Resolves the output target; relative paths land under $QUDITBUS_OUTPUT_DIR
// when that is set.
inline std::filesystem::path resolve_output_path(const std::string& output) {
  std::filesystem::path p(output);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(output_dir_env); dir != nullptr && *dir)
      p = std::filesystem::path(dir) / p;
  }
  return p;
}

inline void write_output(const RunConfig& cfg, const std::string& text,
                         std::ostream& fallback) {
  if (cfg.output.empty()) {
    fallback << text;
    fallback.flush();
    return;
  }
  const std::filesystem::path path = resolve_output_path(cfg.output);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Sweeps: one herald or cascade evaluation per grid point, emitted as CSV
// with a fixed header.  Grid points run concurrently; rows are written by
// index so the bytes never depend on scheduling.

struct SweepPoint {
  double alpha = 0.0;
  double theta = 0.0;
  int dim = 0;
};

inline std::vector<SweepPoint> sweep_points(const RunConfig& cfg) {
  if (cfg.protocol != Protocol::qutrit && cfg.protocol != Protocol::qudit &&
      cfg.protocol != Protocol::cascade)
    throw ConfigError("sweep: protocol must be qutrit, qudit, or cascade");
  if (!cfg.sweep.defined())
    throw ConfigError("sweep: grid is empty; set sweep.alpha/theta/dim");
  if (cfg.mode == RunMode::trajectory)
    throw ConfigError("sweep: runs in enumerate mode only");
  if (!cfg.sweep.dim.empty() &&
      (!cfg.coeffs_a.empty() || !cfg.coeffs_b.empty()))
    throw ConfigError("sweep: cannot sweep dim with explicit coefficients");

  std::vector<double> alphas = cfg.sweep.alpha;
  if (alphas.empty()) {
    if (cfg.alpha.imag() != 0.0)
      throw ConfigError("sweep: complex alpha cannot seed a real grid");
    alphas.push_back(cfg.alpha.real());
  }
  std::vector<double> thetas = cfg.sweep.theta;
  if (thetas.empty()) thetas.push_back(cfg.theta);
  std::vector<int> dims = cfg.sweep.dim;
  if (dims.empty()) {
    // same inference as resolve(): coefficients, else 3
    int dim = cfg.dim;
    if (dim == 0)
      dim = !cfg.coeffs_a.empty()   ? static_cast<int>(cfg.coeffs_a.size())
            : !cfg.coeffs_b.empty() ? static_cast<int>(cfg.coeffs_b.size())
                                    : 3;
    dims.push_back(dim);
  }

  std::vector<SweepPoint> points;
  points.reserve(alphas.size() * thetas.size() * dims.size());
  for (int d : dims)
    for (double a : alphas)
      for (double t : thetas) points.push_back({a, t, d});
  return points;
}

inline constexpr const char* sweep_csv_header =
    "alpha,theta,dim,success_probability,error_probability_computed,"
    "error_probability_reference,branch_entropy";

namespace detail {

inline std::string sweep_row(const RunConfig& base, const SweepPoint& pt) {
  RunConfig cfg = base;
  cfg.alpha = cx{pt.alpha, 0.0};
  cfg.theta = pt.theta;
  cfg.dim = pt.dim;
  const ResolvedInput in = resolve(cfg);

  std::string row;
  format_double(pt.alpha, row);
  row += ',';
  format_double(pt.theta, row);
  row += ',';
  row += std::to_string(pt.dim);
  row += ',';
  if (cfg.protocol == Protocol::cascade) {
    const ProtocolResult r = cascade(in.a, in.b, in.params);
    // Deterministic scheme: the success column carries the recorded total.
    format_double(r.total_probability, row);
    row += ",,,";  // herald-only error diagnostics stay empty
    double entropy = 0.0;
    for (const auto& rec : r.branches)
      if (rec.probability > 0.0)
        entropy -= rec.probability * std::log(rec.probability);
    format_double(entropy, row);
  } else {
    const ProtocolResult r = generate_entangled(in.a, in.b, in.params);
    format_double(r.branches[0].probability, row);
    row += ',';
    format_double(r.error_probability_computed, row);
    row += ',';
    format_double(r.error_probability_reference, row);
    row += ',';  // branch entropy applies to the cascade only
  }
  return row;
}

}  // namespace detail

inline std::string sweep_csv(const RunConfig& cfg) {
  const std::vector<SweepPoint> points = sweep_points(cfg);
  std::vector<std::string> rows(points.size());

  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(points.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next.fetch_add(1); i < points.size();
           i = next.fetch_add(1)) {
        try {
          rows[i] = detail::sweep_row(cfg, points[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    }));
  for (auto& t : tasks) t.get();
  if (failure) std::rethrow_exception(failure);

  std::string out = sweep_csv_header;
  out += "\r\n";
  for (const std::string& row : rows) {
    out += row;
    out += "\r\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Drivers: run one protocol or one sweep, write the document, map errors to
// exit codes (0 ok, 1 simulation, 2 config, 3 tail mass).

inline int run(const RunConfig& cfg, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  try {
    if (cfg.format == OutputFormat::csv)
      throw ConfigError("run: csv output is reserved for sweeps");
    const auto t0 = std::chrono::steady_clock::now();
    ordered_json doc = build_result(cfg);
    const std::chrono::duration<double> dt =
        std::chrono::steady_clock::now() - t0;
    doc["runtime_seconds"] = dt.count();
    write_output(cfg, dump_deterministic(doc), out);
    if (cfg.protocol == Protocol::oracle_check &&
        !doc["oracle"]["passed"].get<bool>()) {
      err << "oracle deviation "
          << doc["oracle"]["max_deviation"].get<double>()
          << " exceeds tolerance\n";
      return exit_simulation_error;
    }
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const TailMassError& e) {
    err << "tail mass error: " << e.what() << "\n";
    return exit_tail_mass;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_simulation_error;
  }
}

inline int sweep(const RunConfig& cfg, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr) {
  try {
    write_output(cfg, sweep_csv(cfg), out);
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const TailMassError& e) {
    err << "tail mass error: " << e.what() << "\n";
    return exit_tail_mass;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_simulation_error;
  }
}

}  // namespace quditbus::cli
