#include "ffrx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ffrx/core.hpp"
#include "ffrx/feedforward.hpp"
#include "ffrx/montecarlo.hpp"
#include "ffrx/single_channel.hpp"

namespace ffrx {

namespace {

using nlohmann::json;

/// Invalid flag values or combinations; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File system failures; mapped to exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric/budget failures surfaced with guidance; mapped to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scientific notation with 12 significant digits; round-trips through
/// parse-and-reformat byte-for-byte.
std::string fmt_sci(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.11e", value);
  return buffer;
}

std::string fmt_plain(double value) {
  std::ostringstream stream;
  stream << value;
  return stream.str();
}

double parse_double(const std::string& text, const std::string& flag) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw UsageError("invalid " + flag + ": '" + text + "' is not a number");
  }
}

long parse_int(const std::string& text, const std::string& flag) {
  try {
    std::size_t consumed = 0;
    const long value = std::stol(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw UsageError("invalid " + flag + ": '" + text + "' is not an integer");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream stream(text);
  while (std::getline(stream, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

/// Accepts either a single value or an inclusive lo:hi:count grid.
std::vector<double> parse_grid(const std::string& text, const std::string& flag) {
  if (text.find(':') == std::string::npos) {
    return {parse_double(text, flag)};
  }
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 3) {
    throw UsageError("invalid " + flag + ": '" + text + "' must be a value or lo:hi:count");
  }
  const double lo = parse_double(parts[0], flag);
  const double hi = parse_double(parts[1], flag);
  const long count = parse_int(parts[2], flag);
  if (count < 1) throw UsageError("invalid " + flag + ": grid count must be at least 1");
  if (count == 1) {
    if (lo != hi) throw UsageError("invalid " + flag + ": a 1-point grid needs lo == hi");
    return {lo};
  }
  if (!(lo < hi)) throw UsageError("invalid " + flag + ": grid needs lo < hi");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (long i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + step * i;
  grid.back() = hi;
  return grid;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  for (const std::string& part : split(text, ',')) values.push_back(parse_double(part, flag));
  if (values.empty()) throw UsageError("invalid " + flag + ": empty list");
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(static_cast<int>(parse_int(part, flag)));
  }
  if (values.empty()) throw UsageError("invalid " + flag + ": empty list");
  return values;
}

void check_prior(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    throw UsageError("invalid --p1: " + fmt_plain(p1) + " is outside [0, 1]");
  }
}

void check_mean_photons(double m, bool positive) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw UsageError("invalid --m: " + fmt_plain(m) + " must be finite and nonnegative");
  }
  if (positive && m == 0.0) {
    throw UsageError("invalid --m: identical signal states (m = 0) admit no optimization");
  }
}

DetectorModel make_detector(const std::string& kind, double efficiency, double dark) {
  DetectorModel det;
  if (kind == "onoff") {
    det.kind = DetectorKind::on_off;
  } else if (kind == "pnr") {
    det.kind = DetectorKind::photon_number;
  } else {
    throw UsageError("invalid --detector: '" + kind + "' is neither 'onoff' nor 'pnr'");
  }
  det.efficiency = efficiency;
  det.dark_mean = dark;
  try {
    det.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(std::string("invalid detector flags: ") + e.what());
  }
  return det;
}

Strategy make_strategy(const std::string& name) {
  if (name == "onoff") return Strategy::on_off;
  if (name == "pnr") return Strategy::pnr;
  throw UsageError("invalid --strategy: '" + name + "' is neither 'onoff' nor 'pnr'");
}

std::string join_sci(const std::vector<double>& values, char sep) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) joined.push_back(sep);
    joined += fmt_sci(values[i]);
  }
  return joined;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
  std::string m_spec;
  double p1 = 0.5;
  bool json_lines = false;
};

void cmd_bounds(const BoundsArgs& args, std::ostream& out) {
  check_prior(args.p1);
  const std::vector<double> grid = parse_grid(args.m_spec, "--m");
  for (double m : grid) check_mean_photons(m, false);

  if (!args.json_lines) out << "m,helstrom,kennedy,homodyne\n";
  for (double m : grid) {
    const BinaryEnsemble ensemble = BinaryEnsemble::bpsk(std::sqrt(m), args.p1);
    const double helstrom = helstrom_bound(ensemble);
    const double kennedy = kennedy_error(m, args.p1);
    const bool symmetric = args.p1 == 0.5;
    if (args.json_lines) {
      json row;
      row["m"] = m;
      row["p1"] = args.p1;
      row["helstrom"] = helstrom;
      row["kennedy"] = kennedy;
      if (symmetric) {
        row["homodyne"] = homodyne_error(m);
      } else {
        row["homodyne"] = nullptr;
      }
      out << row.dump() << "\n";
    } else {
      out << fmt_sci(m) << ',' << fmt_sci(helstrom) << ',' << fmt_sci(kennedy) << ','
          << (symmetric ? fmt_sci(homodyne_error(m)) : std::string()) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// sweep-beta

struct SweepArgs {
  double m = 0.0;
  double p1 = 0.5;
  std::string strategy = "pnr";
  double beta_min = 0.0;
  double beta_max = 3.0;
  long points = 601;
  bool json_lines = false;
};

void cmd_sweep_beta(const SweepArgs& args, std::ostream& out) {
  check_prior(args.p1);
  check_mean_photons(args.m, false);
  if (args.points < 2) {
    throw UsageError("invalid --points: " + std::to_string(args.points) +
                     "; a sweep needs at least 2 points");
  }
  if (!(args.beta_min >= 0.0)) {
    throw UsageError("invalid --beta-min: " + fmt_plain(args.beta_min) + " must be nonnegative");
  }
  if (!(args.beta_max > args.beta_min)) {
    throw UsageError("invalid --beta-max: must exceed --beta-min");
  }
  const Strategy strategy = make_strategy(args.strategy);
  const BinaryEnsemble ensemble = BinaryEnsemble::bpsk(std::sqrt(args.m), args.p1);

  if (!args.json_lines) out << "beta,error_rate\n";
  const double step = (args.beta_max - args.beta_min) / static_cast<double>(args.points - 1);
  for (long i = 0; i < args.points; ++i) {
    const double beta =
        i + 1 == args.points ? args.beta_max : args.beta_min + step * static_cast<double>(i);
    const double error = single_channel_error(ensemble, beta, strategy);
    if (args.json_lines) {
      json row;
      row["beta"] = beta;
      row["error_rate"] = error;
      out << row.dump() << "\n";
    } else {
      out << fmt_sci(beta) << ',' << fmt_sci(error) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
  std::string m_spec;
  double p1 = 0.5;
  int n_channels = 1;
  std::string detector = "onoff";
  double efficiency = 1.0;
  double dark = 0.0;
  bool inhomogeneous = false;
  bool monte_carlo = false;
  std::uint64_t mc_trials = 200000;
  std::uint64_t mc_seed = 1;
  bool json_lines = false;
};

int default_shards() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

void cmd_optimize(const OptimizeArgs& args, std::ostream& out) {
  check_prior(args.p1);
  if (args.n_channels < 1) {
    throw UsageError("invalid --n: " + std::to_string(args.n_channels) +
                     "; at least one channel is required");
  }
  if (args.monte_carlo && args.mc_trials < 1) {
    throw UsageError("invalid --mc-trials: must be at least 1");
  }
  const std::vector<double> grid = parse_grid(args.m_spec, "--m");
  for (double m : grid) check_mean_photons(m, true);
  const DetectorModel det = make_detector(args.detector, args.efficiency, args.dark);

  if (!args.json_lines) {
    out << "m,n_channels,method,error_rate,beta_opt,beta_schedule,energy_fractions\n";
  }
  const int shards = default_shards();
  for (double m : grid) {
    const BinaryEnsemble ensemble = BinaryEnsemble::bpsk(std::sqrt(m), args.p1);
    PlanOptimum optimum;
    if (args.monte_carlo) {
      const SimConfig sim{args.mc_trials, args.mc_seed, shards};
      optimum = optimize_plan_with(args.n_channels, ensemble, det, !args.inhomogeneous,
                                   [&](const ChannelPlan& plan) {
                                     return simulate(plan, ensemble, sim).error_rate;
                                   });
    } else {
      try {
        optimum = optimize_plan(args.n_channels, ensemble, det, !args.inhomogeneous);
      } catch (const BranchBudgetError& e) {
        throw NumericError(std::string(e.what()) +
                           "; rerun with --mc to optimize the Monte Carlo estimate");
      }
    }
    const bool single = args.n_channels == 1;
    if (args.json_lines) {
      json row;
      row["m"] = m;
      row["n_channels"] = args.n_channels;
      row["method"] = args.monte_carlo ? "monte_carlo" : "exact";
      row["error_rate"] = optimum.error_rate;
      if (single) {
        row["beta_opt"] = optimum.plan.beta_schedule.front();
      } else {
        row["beta_opt"] = nullptr;
      }
      row["beta_schedule"] = optimum.plan.beta_schedule;
      row["energy_fractions"] = optimum.plan.energy_fractions;
      row["converged"] = optimum.converged;
      out << row.dump() << "\n";
    } else {
      out << fmt_sci(m) << ',' << args.n_channels << ','
          << (args.monte_carlo ? "monte_carlo" : "exact") << ',' << fmt_sci(optimum.error_rate)
          << ',' << (single ? fmt_sci(optimum.plan.beta_schedule.front()) : std::string()) << ','
          << join_sci(optimum.plan.beta_schedule, ';') << ','
          << join_sci(optimum.plan.energy_fractions, ';') << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  double m = 0.0;
  double p1 = 0.5;
  int n_channels = 1;
  std::string beta_list;
  std::string fraction_list;
  std::string detector = "onoff";
  double efficiency = 1.0;
  double dark = 0.0;
  std::string plan_path;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  int shards = 1;
};

DetectorModel detector_from_json(const json& node) {
  DetectorModel det = DetectorModel::ideal_on_off();
  if (node.contains("kind")) {
    const std::string kind = node.at("kind").get<std::string>();
    if (kind == "onoff") {
      det.kind = DetectorKind::on_off;
    } else if (kind == "pnr") {
      det.kind = DetectorKind::photon_number;
    } else {
      throw UsageError("plan file: detector kind '" + kind + "' is neither 'onoff' nor 'pnr'");
    }
  }
  if (node.contains("efficiency")) det.efficiency = node.at("efficiency").get<double>();
  if (node.contains("dark_mean")) det.dark_mean = node.at("dark_mean").get<double>();
  if (node.contains("n_max")) det.n_max = node.at("n_max").get<int>();
  return det;
}

ChannelPlan plan_from_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot read plan file '" + path + "'");
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::exception& e) {
    throw IoError("plan file '" + path + "' is not valid JSON: " + e.what());
  }
  ChannelPlan plan;
  try {
    plan.n_channels = doc.at("n_channels").get<int>();
    plan.beta_schedule = doc.at("beta_schedule").get<std::vector<double>>();
    if (doc.contains("energy_fractions")) {
      plan.energy_fractions = doc.at("energy_fractions").get<std::vector<double>>();
    } else if (plan.n_channels >= 1) {
      plan.energy_fractions.assign(static_cast<std::size_t>(plan.n_channels),
                                   1.0 / plan.n_channels);
    }
    if (doc.contains("detector")) plan.detector = detector_from_json(doc.at("detector"));
  } catch (const json::exception& e) {
    throw IoError("plan file '" + path + "' is missing fields: " + e.what());
  }
  return plan;
}

ChannelPlan plan_from_flags(const SimulateArgs& args, double m) {
  const DetectorModel det = make_detector(args.detector, args.efficiency, args.dark);
  if (args.n_channels < 1) {
    throw UsageError("invalid --n: " + std::to_string(args.n_channels) +
                     "; at least one channel is required");
  }
  ChannelPlan plan;
  plan.n_channels = args.n_channels;
  plan.detector = det;
  if (args.fraction_list.empty()) {
    plan.energy_fractions.assign(static_cast<std::size_t>(args.n_channels),
                                 1.0 / args.n_channels);
  } else {
    plan.energy_fractions = parse_double_list(args.fraction_list, "--fractions");
    if (static_cast<int>(plan.energy_fractions.size()) != args.n_channels) {
      throw UsageError("invalid --fractions: expected " + std::to_string(args.n_channels) +
                       " entries, got " + std::to_string(plan.energy_fractions.size()));
    }
  }
  if (args.beta_list.empty()) {
    if (m == 0.0) {
      plan.beta_schedule.assign(static_cast<std::size_t>(args.n_channels), 0.0);
    } else {
      plan.beta_schedule = ChannelPlan::asymptotic(args.n_channels, m, det).beta_schedule;
    }
  } else {
    plan.beta_schedule = parse_double_list(args.beta_list, "--beta");
    if (static_cast<int>(plan.beta_schedule.size()) != args.n_channels) {
      throw UsageError("invalid --beta: expected " + std::to_string(args.n_channels) +
                       " entries, got " + std::to_string(plan.beta_schedule.size()));
    }
  }
  return plan;
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  check_prior(args.p1);
  check_mean_photons(args.m, false);
  if (args.trials < 1) throw UsageError("invalid --trials: must be at least 1");
  if (args.shards < 1) {
    throw UsageError("invalid --shards: " + std::to_string(args.shards) +
                     " must be at least 1");
  }

  ChannelPlan plan =
      args.plan_path.empty() ? plan_from_flags(args, args.m) : plan_from_file(args.plan_path);
  try {
    plan.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(std::string("invalid plan: ") + e.what());
  }

  const BinaryEnsemble ensemble = BinaryEnsemble::bpsk(std::sqrt(args.m), args.p1);
  const SimConfig config{args.trials, args.seed, args.shards};
  const ErrorReport report = simulate(plan, ensemble, config);

  // Shard count deliberately stays out of the report: it cannot affect the
  // estimate, and the output must not depend on it.
  json doc;
  doc["error_rate"] = report.error_rate;
  doc["m"] = args.m;
  doc["method"] = "monte_carlo";
  doc["n_channels"] = plan.n_channels;
  doc["p1"] = args.p1;
  doc["seed"] = report.seed.value();
  doc["std_error"] = report.std_error;
  doc["trials"] = report.trials;
  out << doc.dump() << "\n";
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
  std::string m_spec = "0.05:1.5:30";
  std::string n_list = "1,2,4,8";
  double p1 = 0.5;
  std::string detector = "onoff";
  double efficiency = 1.0;
  double dark = 0.0;
  bool inhomogeneous = false;
  std::string out_dir = "curves";
  bool json_lines = false;
};

constexpr const char* kSeriesHeader = "m,receiver,error_rate,beta_opt,N,std_error,seed";

void write_series(const std::filesystem::path& path, const std::vector<std::string>& rows) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  file << kSeriesHeader << "\n";
  for (const std::string& row : rows) file << row << "\n";
  file.flush();
  if (!file) throw IoError("failed while writing '" + path.string() + "'");
}

void cmd_curves(const CurvesArgs& args, std::ostream& out) {
  check_prior(args.p1);
  const std::vector<double> grid = parse_grid(args.m_spec, "--m");
  for (double m : grid) check_mean_photons(m, true);
  std::vector<int> channel_counts = parse_int_list(args.n_list, "--n");
  for (int n : channel_counts) {
    if (n < 1) throw UsageError("invalid --n: every channel count must be at least 1");
  }
  const DetectorModel det = make_detector(args.detector, args.efficiency, args.dark);

  const std::filesystem::path dir(args.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  std::vector<std::string> written;
  const auto baseline_row = [](double m, const char* receiver, double error) {
    return fmt_sci(m) + "," + receiver + "," + fmt_sci(error) + ",,,,";
  };

  std::vector<std::string> rows;
  for (double m : grid) {
    rows.push_back(baseline_row(m, "helstrom", helstrom_bound(BinaryEnsemble::bpsk(std::sqrt(m), args.p1))));
  }
  write_series(dir / "helstrom.csv", rows);
  written.push_back((dir / "helstrom.csv").string());

  rows.clear();
  for (double m : grid) rows.push_back(baseline_row(m, "kennedy", kennedy_error(m, args.p1)));
  write_series(dir / "kennedy.csv", rows);
  written.push_back((dir / "kennedy.csv").string());

  if (args.p1 == 0.5) {
    rows.clear();
    for (double m : grid) rows.push_back(baseline_row(m, "homodyne", homodyne_error(m)));
    write_series(dir / "homodyne.csv", rows);
    written.push_back((dir / "homodyne.csv").string());
  }

  for (int n : channel_counts) {
    rows.clear();
    for (double m : grid) {
      const BinaryEnsemble ensemble = BinaryEnsemble::bpsk(std::sqrt(m), args.p1);
      PlanOptimum optimum;
      try {
        optimum = optimize_plan(n, ensemble, det, !args.inhomogeneous);
      } catch (const BranchBudgetError& e) {
        throw NumericError(std::string(e.what()) + "; reduce --n or use the simulate command");
      }
      std::string beta_cell = n == 1 ? fmt_sci(optimum.plan.beta_schedule.front()) : std::string();
      rows.push_back(fmt_sci(m) + ",feedforward," + fmt_sci(optimum.error_rate) + "," + beta_cell +
                     "," + std::to_string(n) + ",,");
    }
    const std::filesystem::path path = dir / ("feedforward_n" + std::to_string(n) + ".csv");
    write_series(path, rows);
    written.push_back(path.string());
  }

  json manifest;
  manifest["command"] = "curves";
  manifest["flags"] = {{"m", args.m_spec},          {"n", args.n_list},
                       {"p1", args.p1},             {"detector", args.detector},
                       {"efficiency", args.efficiency}, {"dark", args.dark},
                       {"inhomogeneous", args.inhomogeneous}, {"out", args.out_dir}};
  manifest["grid"] = grid;
  manifest["seed"] = nullptr;
  manifest["version"] = kCliVersion;
  manifest["tolerances"] = {{"plan_tol", 1e-9}, {"beta_tol", 1e-8}};
  const std::filesystem::path manifest_path = dir / "manifest.json";
  std::ofstream manifest_file(manifest_path);
  if (!manifest_file) throw IoError("cannot open '" + manifest_path.string() + "' for writing");
  manifest_file << manifest.dump(2) << "\n";
  manifest_file.flush();
  if (!manifest_file) throw IoError("failed while writing '" + manifest_path.string() + "'");
  written.push_back(manifest_path.string());

  if (args.json_lines) {
    json summary;
    summary["written"] = written;
    out << summary.dump() << "\n";
  } else {
    for (const std::string& path : written) out << path << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feed-forward displacement receiver toolkit for binary coherent signals"};
  app.set_version_flag("--version", kCliVersion);
  app.require_subcommand(1);

  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Closed-form baseline error rates (quantum limit, nulling, homodyne)");
  bounds->add_option("--m", bounds_args.m_spec, "mean photon number: value or lo:hi:count")
      ->required();
  bounds->add_option("--p1", bounds_args.p1, "prior probability of hypothesis 1");
  bounds->add_flag("--json", bounds_args.json_lines, "emit line-delimited JSON instead of CSV");
  bounds->callback([&] { cmd_bounds(bounds_args, out); });

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep-beta", "Single-channel error rate vs overshoot");
  sweep->add_option("--m", sweep_args.m, "mean photon number")->required();
  sweep->add_option("--p1", sweep_args.p1, "prior probability of hypothesis 1");
  sweep->add_option("--strategy", sweep_args.strategy, "detection strategy: onoff or pnr");
  sweep->add_option("--beta-min", sweep_args.beta_min, "sweep start");
  sweep->add_option("--beta-max", sweep_args.beta_max, "sweep end");
  sweep->add_option("--points", sweep_args.points, "number of sweep points (>= 2)");
  sweep->add_flag("--json", sweep_args.json_lines, "emit line-delimited JSON instead of CSV");
  sweep->callback([&] { cmd_sweep_beta(sweep_args, out); });

  OptimizeArgs optimize_args;
  CLI::App* optimize =
      app.add_subcommand("optimize", "Optimize the displacement plan over an m grid");
  optimize->add_option("--m", optimize_args.m_spec, "mean photon number: value or lo:hi:count")
      ->required();
  optimize->add_option("--p1", optimize_args.p1, "prior probability of hypothesis 1");
  optimize->add_option("--n", optimize_args.n_channels, "number of channels");
  optimize->add_option("--detector", optimize_args.detector, "detector kind: onoff or pnr");
  optimize->add_option("--efficiency", optimize_args.efficiency, "detector quantum efficiency");
  optimize->add_option("--dark", optimize_args.dark, "mean dark counts per channel window");
  optimize->add_flag("--inhomogeneous", optimize_args.inhomogeneous,
                     "also optimize the energy split");
  optimize->add_flag("--mc", optimize_args.monte_carlo,
                     "optimize the Monte Carlo estimate instead of the exact error");
  optimize->add_option("--mc-trials", optimize_args.mc_trials, "trials per Monte Carlo estimate");
  optimize->add_option("--mc-seed", optimize_args.mc_seed, "seed for the Monte Carlo objective");
  optimize->add_flag("--json", optimize_args.json_lines,
                     "emit line-delimited JSON instead of CSV");
  optimize->callback([&] { cmd_optimize(optimize_args, out); });

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of a plan's error");
  simulate->add_option("--m", simulate_args.m, "mean photon number")->required();
  simulate->add_option("--p1", simulate_args.p1, "prior probability of hypothesis 1");
  simulate->add_option("--n", simulate_args.n_channels, "number of channels");
  simulate->add_option("--beta", simulate_args.beta_list,
                       "comma-separated overshoots (default: asymptotic schedule)");
  simulate->add_option("--fractions", simulate_args.fraction_list,
                       "comma-separated energy fractions (default: equal)");
  simulate->add_option("--detector", simulate_args.detector, "detector kind: onoff or pnr");
  simulate->add_option("--efficiency", simulate_args.efficiency, "detector quantum efficiency");
  simulate->add_option("--dark", simulate_args.dark, "mean dark counts per channel window");
  simulate->add_option("--plan", simulate_args.plan_path, "JSON plan file overriding plan flags");
  simulate->add_option("--trials", simulate_args.trials, "number of Monte Carlo trials")
      ->required();
  simulate->add_option("--seed", simulate_args.seed, "simulation seed");
  simulate->add_option("--shards", simulate_args.shards,
                       "worker threads (never changes the result)");
  simulate->callback([&] { cmd_simulate(simulate_args, out); });

  CurvesArgs curves_args;
  CLI::App* curves =
      app.add_subcommand("curves", "Write baseline and feed-forward error curves to CSV files");
  curves->add_option("--m", curves_args.m_spec, "mean photon grid: value or lo:hi:count");
  curves->add_option("--n", curves_args.n_list, "comma-separated channel counts");
  curves->add_option("--p1", curves_args.p1, "prior probability of hypothesis 1");
  curves->add_option("--detector", curves_args.detector, "detector kind: onoff or pnr");
  curves->add_option("--efficiency", curves_args.efficiency, "detector quantum efficiency");
  curves->add_option("--dark", curves_args.dark, "mean dark counts per channel window");
  curves->add_flag("--inhomogeneous", curves_args.inhomogeneous,
                   "also optimize the energy split");
  curves->add_option("--out", curves_args.out_dir, "output directory");
  curves->add_flag("--json", curves_args.json_lines, "emit the file list as JSON");
  curves->callback([&] { cmd_curves(curves_args, out); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    return 0;
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const BranchBudgetError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ffrx
