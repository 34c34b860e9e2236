// Command-line front end.  Subcommands pick the protocol; every option can
// also come from a JSON config file (--config), with flags taking
// precedence.  Exit codes: 0 ok, 1 simulation error, 2 config error,
// 3 tail-mass violation.

#include <complex>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quditbus/cli.hpp"

namespace {

using quditbus::cx;
namespace qcli = quditbus::cli;

// "1.5" or "re:im", e.g. "0.5:-0.5".
cx parse_complex_token(const std::string& tok) {
  const auto colon = tok.find(':');
  try {
    if (colon == std::string::npos) return cx{std::stod(tok), 0.0};
    return cx{std::stod(tok.substr(0, colon)),
              std::stod(tok.substr(colon + 1))};
  } catch (const std::exception&) {
    throw qcli::ConfigError("cannot parse complex value: " + tok);
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<cx> parse_coeff_flag(const std::string& s) {
  std::vector<cx> out;
  for (const std::string& tok : split_commas(s))
    out.push_back(parse_complex_token(tok));
  return out;
}

std::vector<double> parse_real_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& tok : split_commas(s)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw qcli::ConfigError(std::string("cannot parse ") + what + ": " + tok);
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const std::string& tok : split_commas(s)) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw qcli::ConfigError(std::string("cannot parse ") + what + ": " + tok);
    }
  }
  return out;
}

struct Flags {
  std::string config_path;
  int dim = 0;
  bool maximal = false;
  std::string coeffs_a;
  std::string coeffs_b;
  std::string alpha;
  double theta = 0.0;
  std::string mode;
  long long trials = 0;
  std::uint64_t seed = 0;
  int n_max = -1;
  int loss_m = 0;
  int cutoff = 0;
  double oracle_tolerance = 0.0;
  double branch_floor = 0.0;
  double tail_tolerance = 0.0;
  bool experimental = false;
  std::string output;
  std::string format;
  // sweep only
  std::string protocol;
  std::string alphas;
  std::string thetas;
  std::string dims;
};

void add_common_options(CLI::App* sub, Flags& f, bool sweep) {
  sub->add_option("--config", f.config_path,
                  "JSON config file; flags override its values");
  sub->add_option("--dim", f.dim, "qudit dimension");
  sub->add_flag("--maximal", f.maximal,
                "use 1/sqrt(dim) coefficients on both qudits");
  sub->add_option("--coeffs-a", f.coeffs_a,
                  "comma list of coefficients for qudit a (re or re:im); "
                  "normalized automatically");
  sub->add_option("--coeffs-b", f.coeffs_b, "same for qudit b");
  sub->add_option("--alpha", f.alpha, "bus amplitude (re or re:im)");
  sub->add_option("--theta", f.theta, "cross-Kerr phase per photon, radians");
  sub->add_option("--mode", f.mode, "enumerate|trajectory");
  sub->add_option("--trials", f.trials, "trajectory sample count");
  sub->add_option("--seed", f.seed, "base RNG seed");
  sub->add_option("--n-max", f.n_max, "QND enumeration cutoff (-1 = auto)");
  sub->add_option("--branch-floor", f.branch_floor,
                  "drop cascade branches below this probability");
  sub->add_option("--tail-tolerance", f.tail_tolerance,
                  "unresolved QND tail allowed before warnings/errors");
  sub->add_flag("--experimental-qudit-cascade", f.experimental,
                "run the cascade circuit above dimension 3");
  sub->add_option("-o,--output", f.output,
                  "output path (default stdout); relative paths resolve "
                  "against $QUDITBUS_OUTPUT_DIR");
  sub->add_option("--format", f.format, "json|csv");
  if (sweep) {
    sub->add_option("--protocol", f.protocol,
                    "swept protocol: qutrit|qudit|cascade");
    sub->add_option("--alphas", f.alphas, "comma list of bus amplitudes");
    sub->add_option("--thetas", f.thetas, "comma list of phases");
    sub->add_option("--dims", f.dims, "comma list of dimensions");
  }
}

// count() throws for options not registered on this subcommand.
bool has(CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

int dispatch(CLI::App* sub, qcli::Protocol protocol, const Flags& f,
             bool is_sweep) {
  qcli::RunConfig cfg;
  if (has(sub, "--config")) cfg = qcli::parse_config_file(f.config_path);
  if (!is_sweep)
    cfg.protocol = protocol;  // the subcommand decides
  else if (has(sub, "--protocol"))
    cfg.protocol = qcli::detail::parse_protocol(f.protocol);
  // sweep without --protocol keeps the config-file protocol (default qutrit)

  if (has(sub, "--dim")) cfg.dim = f.dim;
  if (f.maximal) {
    cfg.coeffs_a.clear();
    cfg.coeffs_b.clear();
  }
  if (has(sub, "--coeffs-a")) cfg.coeffs_a = parse_coeff_flag(f.coeffs_a);
  if (has(sub, "--coeffs-b")) cfg.coeffs_b = parse_coeff_flag(f.coeffs_b);
  if (has(sub, "--alpha")) cfg.alpha = parse_complex_token(f.alpha);
  if (has(sub, "--theta")) cfg.theta = f.theta;
  if (has(sub, "--mode")) cfg.mode = qcli::detail::parse_mode(f.mode);
  if (has(sub, "--trials")) cfg.trials = f.trials;
  if (has(sub, "--seed")) cfg.seed = f.seed;
  if (has(sub, "--n-max")) cfg.n_max = f.n_max;
  if (has(sub, "--loss-m")) cfg.loss_m = f.loss_m;
  if (has(sub, "--cutoff")) cfg.cutoff = f.cutoff;
  if (has(sub, "--oracle-tolerance")) cfg.oracle_tolerance = f.oracle_tolerance;
  if (has(sub, "--branch-floor")) cfg.branch_floor = f.branch_floor;
  if (has(sub, "--tail-tolerance")) cfg.tail_tolerance = f.tail_tolerance;
  if (f.experimental) cfg.experimental_qudit_cascade = true;
  if (has(sub, "--output")) cfg.output = f.output;
  if (has(sub, "--format")) cfg.format = qcli::detail::parse_format(f.format);
  if (is_sweep) {
    if (has(sub, "--alphas"))
      cfg.sweep.alpha = parse_real_list(f.alphas, "--alphas");
    if (has(sub, "--thetas"))
      cfg.sweep.theta = parse_real_list(f.thetas, "--thetas");
    if (has(sub, "--dims")) cfg.sweep.dim = parse_int_list(f.dims, "--dims");
    return qcli::sweep(cfg);
  }
  return qcli::run(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "quditbus: entangled-qudit generation on a weak cross-Kerr coherent "
      "bus (heralded module, deterministic cascade, loss and cross-check "
      "reports)"};
  app.require_subcommand(1);

  Flags f;
  CLI::App* qutrit =
      app.add_subcommand("qutrit", "heralded generation at dimension 3");
  CLI::App* qudit =
      app.add_subcommand("qudit", "heralded generation at any dimension");
  CLI::App* casc =
      app.add_subcommand("cascade", "two-stage deterministic cascade");
  CLI::App* loss = app.add_subcommand(
      "loss-report", "herald quality under per-qudit photon loss");
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "symbolic engine vs dense Fock cross-check");
  CLI::App* sweep =
      app.add_subcommand("sweep", "CSV table over an alpha/theta/dim grid");

  for (CLI::App* sub : {qutrit, qudit, casc, loss, oracle})
    add_common_options(sub, f, false);
  add_common_options(sweep, f, true);
  loss->add_option("--loss-m", f.loss_m, "photons lost per qudit");
  oracle->add_option("--cutoff", f.cutoff, "bus Fock truncation");
  oracle->add_option("--oracle-tolerance", f.oracle_tolerance,
                     "max deviation tolerated before exit 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qcli::exit_config_error;
  }

  try {
    if (qutrit->parsed())
      return dispatch(qutrit, qcli::Protocol::qutrit, f, false);
    if (qudit->parsed()) return dispatch(qudit, qcli::Protocol::qudit, f, false);
    if (casc->parsed()) return dispatch(casc, qcli::Protocol::cascade, f, false);
    if (loss->parsed())
      return dispatch(loss, qcli::Protocol::loss_report, f, false);
    if (oracle->parsed())
      return dispatch(oracle, qcli::Protocol::oracle_check, f, false);
    if (sweep->parsed()) return dispatch(sweep, qcli::Protocol::qutrit, f, true);
  } catch (const qcli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qcli::exit_config_error;
  }
  return qcli::exit_config_error;
}
