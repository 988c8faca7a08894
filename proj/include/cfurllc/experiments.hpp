#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cfurllc/config.hpp"
#include "cfurllc/optimizer.hpp"
#include "cfurllc/scenario.hpp"

namespace cfurllc {

enum class Profile { kDesk, kPaper };
const char* profile_name(Profile p);
Profile parse_profile(const std::string& name);

// Scale knobs that distinguish a quick desk run from the full study.
struct ProfileSettings {
  int num_devices = 5;
  int total_antennas = 48;               // MN for the M in {1, 4} studies
  std::vector<int> ap_counts{1, 4};      // M values of the scheme comparisons
  std::vector<int> tightness_totals{36, 72, 108};
  int converge_total = 72;
  int threshold_aps = 4;
  int trials = 1000;
  int deployments = 30;
  int tightness_deployments = 3;
  std::vector<double> energy_db{10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<int> device_counts{2, 4, 6, 8, 10};
  std::vector<double> thresholds{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00};
};

ProfileSettings profile_settings(Profile p);

struct ExperimentOptions {
  SystemConfig config;          // physical constants; K, M, N come from the profile
  Profile profile = Profile::kDesk;
  std::uint64_t seed = 1;
  int trials = 0;               // 0: profile default
  int deployments = 0;          // 0: profile default
  int threads = 1;

  ProfileSettings settings() const;
};

// Seed of deployment `index` derived from the master seed.
std::uint64_t deployment_seed(std::uint64_t master, int index);

// Runs fn(0..n-1) on `threads` workers; fn must only write its own slot.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

struct TightnessRow {
  Decoder decoder;
  int M, N, MN;
  double lb_rate;        // device-average, bit/s
  double ergodic_rate;   // device-average, bit/s
  double ci;             // 95 % half-width of the ergodic estimate
};

struct ConvergeRow {
  Decoder decoder;
  int M, N, deployment, iteration;
  double objective;      // bit/s
  bool converged;
};

struct ThresholdRow {
  Decoder decoder;
  int M, N;
  double threshold;
  double avg_rate;           // zero on infeasible deployments, bit/s
  double avg_rate_feasible;  // over feasible deployments only
  double feasible_fraction;
};

enum class Scheme { kProposed, kUpperBound, kConventional, kFixedPilot };
const char* scheme_name(Scheme s);

struct SchemeRow {
  Decoder decoder;
  int M, N, K;
  double energy_db;
  Scheme scheme;
  double avg_rate;
  double avg_rate_feasible;
  double feasible_fraction;
};

// Objectives of all four schemes on one deployment (0 when infeasible).
struct SchemeObjectives {
  double proposed = 0.0, upper_bound = 0.0, conventional = 0.0, fixed_pilot = 0.0;
  bool proposed_feasible = false, upper_feasible = false, conventional_feasible = false,
       fixed_feasible = false;
};
SchemeObjectives evaluate_schemes(const LargeScaleModel& model, const OptimizerParams& params,
                                  Decoder decoder);

// Scenario config of one study point (K devices, M APs of N antennas).
SystemConfig point_config(const ExperimentOptions& o, int M, int N, int K);

std::vector<TightnessRow> tightness_rows(const ExperimentOptions& o);
std::vector<ConvergeRow> converge_rows(const ExperimentOptions& o);
std::vector<ThresholdRow> threshold_rows(const ExperimentOptions& o);
std::vector<SchemeRow> energy_rows(const ExperimentOptions& o);
std::vector<SchemeRow> devices_rows(const ExperimentOptions& o);

// CSV text: '#' preamble with experiment, profile, config hash and master
// seed, then a header row and one line per result row.
std::string run_tightness(const ExperimentOptions& o);
std::string run_converge(const ExperimentOptions& o);
std::string run_threshold_sweep(const ExperimentOptions& o);
std::string run_energy_compare(const ExperimentOptions& o);
std::string run_devices_sweep(const ExperimentOptions& o);

}  // namespace cfurllc
