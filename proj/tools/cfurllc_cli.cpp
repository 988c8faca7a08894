#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cfurllc/config.hpp"
#include "cfurllc/errors.hpp"
#include "cfurllc/experiments.hpp"
#include "cfurllc/selftest.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 1;
  std::string profile = "desk";
  std::string out;
  int trials = 0;
  int deployments = 0;
  int threads = 1;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "scenario config file (key = value lines)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--profile", f.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--out", f.out, "output directory (default: stdout)");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials per point")->check(CLI::NonNegativeNumber);
  cmd->add_option("--deployments", f.deployments, "random deployments per point")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

cfurllc::ExperimentOptions make_options(const Flags& f) {
  cfurllc::ExperimentOptions o;
  if (!f.config.empty()) o.config = cfurllc::load_config(f.config);
  o.profile = cfurllc::parse_profile(f.profile);
  o.seed = f.seed;
  o.trials = f.trials;
  o.deployments = f.deployments;
  o.threads = f.threads;
  return o;
}

void emit(const Flags& f, const std::string& name, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(f.out);
  const std::filesystem::path path = std::filesystem::path(f.out) / (name + ".csv");
  std::ofstream file(path, std::ios::binary);
  if (!file) throw cfurllc::ConfigError("cannot write " + path.string());
  file << text;
  std::cerr << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink cell-free massive MIMO URLLC power allocation experiments"};
  app.require_subcommand(1);

  using Runner = std::string (*)(const cfurllc::ExperimentOptions&);
  const std::pair<const char*, Runner> experiments[] = {
      {"tightness", cfurllc::run_tightness},
      {"converge", cfurllc::run_converge},
      {"threshold-sweep", cfurllc::run_threshold_sweep},
      {"energy-compare", cfurllc::run_energy_compare},
      {"devices-sweep", cfurllc::run_devices_sweep},
  };
  Flags flags;
  for (const auto& [name, run] : experiments) {
    CLI::App* cmd = app.add_subcommand(name, std::string("run the ") + name + " study");
    add_flags(cmd, flags);
    cmd->callback([&flags, name = std::string(name), run = run] {
      emit(flags, name, run(make_options(flags)));
    });
  }

  CLI::App* selftest = app.add_subcommand("gp-selftest", "GP solver and tangent-bound self checks");
  add_flags(selftest, flags);
  int exit_code = 0;
  selftest->callback([&] {
    std::ostringstream dump;
    const cfurllc::SelftestReport r = cfurllc::run_gp_selftest(flags.seed, &dump);
    for (const auto& c : r.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
    if (flags.out.empty()) {
      std::cout << dump.str();
    } else {
      std::filesystem::create_directories(flags.out);
      std::ofstream(std::filesystem::path(flags.out) / "gp-selftest.sexp") << dump.str();
    }
    exit_code = r.ok() ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cfurllc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
