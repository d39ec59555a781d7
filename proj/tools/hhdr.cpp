#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hhdr/config.hpp"
#include "hhdr/errors.hpp"
#include "hhdr/runner.hpp"
#include "hhdr/version.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir = ".";
  unsigned long long seed = 0;
  int threads = 0;
  bool contrast_factor = false;
  std::string t1rho;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hartmann-Hahn double-resonance simulator for an NV electron spin "
               "coupled to 13C nuclei"};
  app.set_version_flag("--version", std::string("hhdr ") + hhdr::version);
  app.require_subcommand(1);

  const std::map<std::string, std::function<void(const hhdr::ExperimentConfig&,
                                                 const hhdr::RunOptions&)>>
      commands = {
          {"spectroscopy", hhdr::cmd_spectroscopy}, {"fourier-map", hhdr::cmd_fourier_map},
          {"invert", hhdr::cmd_invert},             {"polarize", hhdr::cmd_polarize},
          {"bias-scan", hhdr::cmd_bias_scan},       {"sensitivity", hhdr::cmd_sensitivity},
      };
  const std::map<std::string, std::string> blurbs = {
      {"spectroscopy", "simulate a (Rabi frequency, lock duration) population map"},
      {"fourier-map", "temporal spectrum of a spectroscopy map with model overlays"},
      {"invert", "recover hyperfine magnitude and angle from (omega_opt, J)"},
      {"polarize", "run polarization sweeps and track linewidth narrowing"},
      {"bias-scan", "T2* versus the +/- sweep-sign bias"},
      {"sensitivity", "minimum resolvable coupling for an interrogation time"},
  };

  CliArgs args;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
    sub->add_option("--config", args.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the [bath] seed");
    sub->add_option("--threads", args.threads, "worker threads (default: HHDR_THREADS or 1)");
    sub->add_flag("--contrast-factor", args.contrast_factor,
                  "scale populations by the host nitrogen factor");
    sub->add_option("--t1rho", args.t1rho, "lock-frame relaxation time, e.g. '500 us'");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage counts as a config error
  }

  try {
    hhdr::ExperimentConfig cfg = hhdr::load_config(args.config_path);
    hhdr::RunOptions opt;
    opt.out_dir = args.out_dir;
    opt.threads = args.threads;
    opt.contrast_factor = args.contrast_factor;
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = args.seed;
    if (!args.t1rho.empty())
      opt.t1rho = hhdr::parse_quantity(args.t1rho, hhdr::Dimension::time);
    commands.at(sub->get_name())(cfg, opt);
    return 0;
  } catch (const hhdr::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const hhdr::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 3;
  }
}
