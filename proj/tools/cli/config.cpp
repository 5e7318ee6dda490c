#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli/format.hpp"

namespace nonmarkov::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError("invalid number for '" + key + "': '" + text + "'");
  }
  return value;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size()) {
    throw ConfigError("invalid integer for '" + key + "': '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream is(normalized);
  std::vector<std::string> items;
  for (std::string item; is >> item;) items.push_back(item);
  return items;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_int<int>(key, item));
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

// Round to 12 significant digits so grid values print cleanly.
double tidy(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return std::stod(os.str());
}

std::string model_name(ModelKind m) { return m == ModelKind::kChain ? "chain" : "dephasing"; }
std::string disorder_name(DisorderMode d) { return d == DisorderMode::kEnsemble ? "ensemble" : "frozen"; }
std::string environment_name(EnvironmentState e) { return e == EnvironmentState::kZero ? "zero" : "plus"; }
std::string fd_pair_name(FdPair p) { return p == FdPair::kHaar ? "haar" : "plus-minus"; }

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kMeasure: return "measure";
    case Experiment::kSweepMu: return "sweep-mu";
    case Experiment::kSweepSigma: return "sweep-sigma";
    case Experiment::kFdConvergence: return "fd-convergence";
    case Experiment::kToyScaling: return "toy-scaling";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  const std::string n = lower(trim(name));
  for (auto e : {Experiment::kMeasure, Experiment::kSweepMu, Experiment::kSweepSigma,
                 Experiment::kFdConvergence, Experiment::kToyScaling}) {
    if (n == to_string(e)) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults_for(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::kMeasure:
      break;
    case Experiment::kSweepMu:
      for (double mu : linspace(0.1, 1.0, 10)) c.mu_values.push_back(tidy(mu));
      break;
    case Experiment::kSweepSigma:
      c.coupling_mean = 0.8;
      for (double s : linspace(0.0, 0.8, 9)) c.sigma_values.push_back(tidy(s));
      break;
    case Experiment::kFdConvergence:
      c.model = ModelKind::kDephasing;
      c.environment = EnvironmentState::kPlus;
      c.fd_pair = FdPair::kPlusMinus;
      c.t_probe = 0.4;
      for (int k = 0; k <= 12; ++k) c.h_over_tau.push_back(tidy(std::pow(10.0, -3.0 + 0.25 * k)));
      break;
    case Experiment::kToyScaling:
      c.model = ModelKind::kDephasing;
      c.environment = EnvironmentState::kPlus;
      c.t_max = std::numbers::pi;
      c.n_points = 201;
      c.spectator_values = {0, 1, 2, 3, 4};
      break;
  }
  return c;
}

void ExperimentConfig::apply(const std::string& raw_key, const std::string& value) {
  const std::string key = lower(trim(raw_key));
  const std::string v = trim(value);
  if (key == "experiment") {
    experiment = parse_experiment(v);
  } else if (key == "model") {
    const auto m = lower(v);
    if (m == "chain") model = ModelKind::kChain;
    else if (m == "dephasing") model = ModelKind::kDephasing;
    else throw ConfigError("model must be 'chain' or 'dephasing', got '" + v + "'");
  } else if (key == "n_system") {
    n_system = parse_int<int>(key, v);
  } else if (key == "omega_mean") {
    omega_mean = parse_double(key, v);
  } else if (key == "omega_std") {
    omega_std = parse_double(key, v);
  } else if (key == "coupling_mean" || key == "mu") {
    coupling_mean = parse_double(key, v);
  } else if (key == "coupling_std" || key == "sigma_j") {
    coupling_std = parse_double(key, v);
  } else if (key == "disorder") {
    const auto d = lower(v);
    if (d == "ensemble") disorder = DisorderMode::kEnsemble;
    else if (d == "frozen") disorder = DisorderMode::kFrozen;
    else throw ConfigError("disorder must be 'ensemble' or 'frozen', got '" + v + "'");
  } else if (key == "omegas") {
    omegas = parse_double_list(key, v);
  } else if (key == "couplings") {
    couplings = parse_double_list(key, v);
  } else if (key == "environment") {
    const auto e = lower(v);
    if (e == "zero") environment = EnvironmentState::kZero;
    else if (e == "plus") environment = EnvironmentState::kPlus;
    else throw ConfigError("environment must be 'zero' or 'plus', got '" + v + "'");
  } else if (key == "dephasing_coupling") {
    dephasing_coupling = parse_double(key, v);
  } else if (key == "spectators") {
    spectator_values = parse_int_list(key, v);
    if (spectator_values.size() == 1) spectators = spectator_values.front();
  } else if (key == "mu_values") {
    mu_values = parse_double_list(key, v);
  } else if (key == "sigma_values") {
    sigma_values = parse_double_list(key, v);
  } else if (key == "t_max") {
    t_max = parse_double(key, v);
  } else if (key == "n_points") {
    n_points = parse_int<int>(key, v);
  } else if (key == "fd_step") {
    if (lower(v) == "auto") fd_step.reset();
    else fd_step = parse_double(key, v);
  } else if (key == "enforce_step_bound") {
    enforce_step_bound = parse_bool(key, v);
  } else if (key == "t_probe") {
    t_probe = parse_double(key, v);
  } else if (key == "h_over_tau") {
    h_over_tau = parse_double_list(key, v);
  } else if (key == "fd_pair") {
    const auto p = lower(v);
    if (p == "haar") fd_pair = FdPair::kHaar;
    else if (p == "plus-minus") fd_pair = FdPair::kPlusMinus;
    else throw ConfigError("fd_pair must be 'haar' or 'plus-minus', got '" + v + "'");
  } else if (key == "n_pairs" || key == "pairs") {
    n_pairs = parse_int<int>(key, v);
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, v);
  } else if (key == "bootstrap_resamples") {
    bootstrap_resamples = parse_int<int>(key, v);
  } else if (key == "ci_level") {
    ci_level = parse_double(key, v);
  } else if (key == "workers") {
    workers = parse_int<int>(key, v);
  } else if (key == "max_qubits") {
    max_qubits = parse_int<int>(key, v);
  } else if (key == "out") {
    out = v;
  } else {
    throw ConfigError("unknown config key '" + raw_key + "'");
  }
}

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(n_system >= 1, "n_system must be >= 1");
  require(omega_std >= 0.0 && coupling_std >= 0.0, "standard deviations must be >= 0");
  require(t_max > 0.0, "t_max must be > 0");
  require(n_points >= 2, "n_points must be >= 2");
  require(!fd_step || *fd_step > 0.0, "fd_step must be > 0 or 'auto'");
  require(n_pairs >= 2, "n_pairs must be >= 2");
  require(bootstrap_resamples >= 1, "bootstrap_resamples must be >= 1");
  require(ci_level > 0.0 && ci_level < 1.0, "ci_level must lie in (0, 1)");
  require(workers >= 1, "workers must be >= 1");
  require(max_qubits >= 1 && max_qubits <= 30, "max_qubits must lie in [1, 30]");
  require(spectators >= 0, "spectators must be >= 0");
  for (int s : spectator_values) require(s >= 0, "spectators must be >= 0");
  if (uses_fixed_chain()) {
    require(omegas.size() == static_cast<std::size_t>(2 * n_system + 1),
            "omegas needs 2 * n_system + 1 entries");
    require(couplings.size() == static_cast<std::size_t>(2 * n_system),
            "couplings needs 2 * n_system entries");
  }
  switch (experiment) {
    case Experiment::kSweepMu:
      require(!mu_values.empty(), "sweep-mu needs mu_values");
      require(model == ModelKind::kChain, "sweep-mu needs model = chain");
      require(!uses_fixed_chain(), "sweep-mu samples its couplings; remove omegas/couplings");
      break;
    case Experiment::kSweepSigma:
      require(!sigma_values.empty(), "sweep-sigma needs sigma_values");
      require(model == ModelKind::kChain, "sweep-sigma needs model = chain");
      require(!uses_fixed_chain(), "sweep-sigma samples its couplings; remove omegas/couplings");
      for (double s : sigma_values) require(s >= 0.0, "sigma_values must be >= 0");
      break;
    case Experiment::kFdConvergence:
      require(!h_over_tau.empty(), "fd-convergence needs h_over_tau");
      for (double h : h_over_tau) require(h > 0.0, "h_over_tau entries must be > 0");
      break;
    case Experiment::kToyScaling:
      require(!spectator_values.empty(), "toy-scaling needs spectators");
      require(model == ModelKind::kDephasing, "toy-scaling needs model = dephasing");
      break;
    case Experiment::kMeasure:
      break;
  }
}

std::vector<Setting> ExperimentConfig::echo(bool include_execution) const {
  std::vector<Setting> s{
      {"experiment", to_string(experiment)},
      {"model", model_name(model)},
      {"n_system", std::to_string(n_system)},
      {"omega_mean", format_double(omega_mean)},
      {"omega_std", format_double(omega_std)},
      {"coupling_mean", format_double(coupling_mean)},
      {"coupling_std", format_double(coupling_std)},
      {"disorder", disorder_name(disorder)},
      {"omegas", join<double>(omegas)},
      {"couplings", join<double>(couplings)},
      {"environment", environment_name(environment)},
      {"dephasing_coupling", format_double(dephasing_coupling)},
      {"spectators", experiment == Experiment::kToyScaling ? join<int>(spectator_values)
                                                           : std::to_string(spectators)},
      {"mu_values", join<double>(mu_values)},
      {"sigma_values", join<double>(sigma_values)},
      {"t_max", format_double(t_max)},
      {"n_points", std::to_string(n_points)},
      {"fd_step", fd_step ? format_double(*fd_step) : "auto"},
      {"enforce_step_bound", enforce_step_bound ? "true" : "false"},
      {"t_probe", format_double(t_probe)},
      {"h_over_tau", join<double>(h_over_tau)},
      {"fd_pair", fd_pair_name(fd_pair)},
      {"n_pairs", std::to_string(n_pairs)},
      {"seed", std::to_string(seed)},
      {"bootstrap_resamples", std::to_string(bootstrap_resamples)},
      {"ci_level", format_double(ci_level)},
      {"max_qubits", std::to_string(max_qubits)},
  };
  if (include_execution) {
    s.emplace_back("workers", std::to_string(workers));
    s.emplace_back("out", out);
  }
  return s;
}

std::vector<Setting> parse_settings(const std::string& text) {
  std::vector<Setting> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<Setting> read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_settings(os.str());
}

ExperimentConfig resolve_config(const std::vector<Setting>& settings,
                                std::optional<Experiment> experiment) {
  if (!experiment) {
    for (const auto& [k, v] : settings) {
      if (lower(trim(k)) == "experiment") experiment = parse_experiment(v);
    }
  }
  if (!experiment) throw ConfigError("no experiment selected");
  ExperimentConfig config = ExperimentConfig::defaults_for(*experiment);
  for (const auto& [k, v] : settings) {
    if (lower(trim(k)) == "experiment") {
      if (parse_experiment(v) != *experiment) {
        throw ConfigError("config file is for experiment '" + v + "' but '" +
                          to_string(*experiment) + "' was requested");
      }
      continue;
    }
    config.apply(k, v);
  }
  config.validate();
  return config;
}

}  // namespace nonmarkov::cli
