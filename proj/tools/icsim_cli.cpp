// icsim: predict, simulate and fit delay scans of the two-crystal
// induced-coherence interferometer.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "icsim/config.hpp"
#include "icsim/fock_oracle.hpp"
#include "icsim/report.hpp"
#include "icsim/scan_analysis.hpp"
#include "icsim/scan_io.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kFit = 5,
  kOracleMismatch = 6,
  kCounting = 7,
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_path;
  std::string in_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> axis;
  std::string channel = "a";
  bool quiet = false;
};

icsim::ExperimentConfig load(const Options& opt) {
  icsim::ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + opt.config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    cfg = icsim::parse_config(buf.str());
  }
  if (opt.seed) cfg.detectors.seed = *opt.seed;
  if (opt.axis) cfg.scan.axis = icsim::parse_axis(*opt.axis);
  return cfg;
}

// Writes to --out, or stdout when no path is given.
void emit(const Options& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + opt.out_path);
  out << text;
  if (!out.flush()) throw IoError("write failed: " + opt.out_path);
}

void note(const Options& opt, const std::string& text) {
  if (!opt.quiet) std::cerr << text << '\n';
}

int run_scan_command(const Options& opt, bool with_samples) {
  const icsim::ExperimentConfig cfg = load(opt);
  const icsim::ScanRecord rec = icsim::run_scan(cfg);
  for (const auto& w : rec.warnings) note(opt, "warning: " + w);
  std::ostringstream csv;
  icsim::write_scan_csv(csv, rec, with_samples);
  emit(opt, csv.str());
  note(opt, std::to_string(rec.size()) + " points, " + icsim::to_string(rec.axis) + " axis");
  return kOk;
}

int run_fit(const Options& opt) {
  if (opt.in_path.empty()) throw CLI::ValidationError("fit requires --in <csv>");
  std::ifstream in(opt.in_path, std::ios::binary);
  if (!in) throw IoError("cannot open scan file " + opt.in_path);
  icsim::ScanRecord rec = icsim::read_scan_csv(in);

  icsim::FitOptions fo;
  fo.channel = icsim::parse_channel(opt.channel);
  double dwell = 1.0;
  if (icsim::has_counts(rec)) {
    fo.source = icsim::FitSource::Counts;
    dwell = opt.config_path.empty() ? icsim::implied_dwell(rec) : load(opt).detectors.dwell;
  } else {
    fo.source = icsim::FitSource::Predicted;
  }
  const icsim::FringeFit fit = icsim::fit_fringe(rec, fo);
  emit(opt, icsim::fringe_fit_json(fit, dwell).dump(2) + "\n");
  note(opt, "period " + std::to_string(fit.period * 1e9) + " nm, visibility " + std::to_string(fit.visibility));
  return kOk;
}

int run_oracle_check(const Options& opt) {
  const icsim::ExperimentConfig cfg = load(opt);
  const icsim::OracleCheck check = icsim::oracle_check(cfg);
  emit(opt, icsim::oracle_check_json(cfg, check).dump(2) + "\n");
  note(opt, "max relative deviation " + std::to_string(check.max_deviation) + " (bound " +
                std::to_string(check.bound) + ")");
  return check.passed() ? kOk : kOracleMismatch;
}

int run_report(const Options& opt) {
  emit(opt, icsim::report(load(opt)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induced-coherence interferometer simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Scenario config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_path, "Output path (default stdout)");
    sub->add_option("--seed", opt.seed, "RNG seed, overrides the config");
    sub->add_option("--axis", opt.axis, "Scan axis, overrides the config")->check(CLI::IsMember({"signal", "pump"}));
    sub->add_flag("--quiet", opt.quiet, "Suppress progress messages");
  };

  auto* predict = app.add_subcommand("predict", "Noiseless CSV of modulated rates");
  auto* simulate = app.add_subcommand("simulate", "CSV with Poisson-sampled counts");
  auto* fit = app.add_subcommand("fit", "Fit a fringe to a scan CSV, JSON summary");
  auto* oracle = app.add_subcommand("oracle-check", "Compare operator engine with the Fock-space oracle");
  auto* rep = app.add_subcommand("report", "Human-readable summary of a configuration");
  for (auto* sub : {predict, simulate, fit, oracle, rep}) add_common(sub);
  fit->add_option("--in", opt.in_path, "Scan CSV to fit")->check(CLI::ExistingFile);
  fit->add_option("--channel", opt.channel, "Column to fit: a (singles) or coinc")
      ->check(CLI::IsMember({"a", "coinc"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*predict) return run_scan_command(opt, false);
    if (*simulate) return run_scan_command(opt, true);
    if (*fit) return run_fit(opt);
    if (*oracle) return run_oracle_check(opt);
    if (*rep) return run_report(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const icsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const icsim::FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const icsim::NoFringeError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const icsim::CountingError& e) {
    std::cerr << "counting error: " << e.what() << '\n';
    return kCounting;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
