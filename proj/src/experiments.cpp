#include "cfurllc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "cfurllc/channel.hpp"
#include "cfurllc/errors.hpp"
#include "cfurllc/montecarlo.hpp"
#include "cfurllc/rng.hpp"

namespace cfurllc {

const char* profile_name(Profile p) { return p == Profile::kDesk ? "desk" : "paper"; }

Profile parse_profile(const std::string& name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

ProfileSettings profile_settings(Profile p) {
  ProfileSettings s;
  if (p == Profile::kPaper) {
    s.num_devices = 10;
    s.total_antennas = 144;
    s.ap_counts = {1, 4, 9};
    s.tightness_totals = {72, 144, 216, 288};
    s.converge_total = 144;
    s.threshold_aps = 9;
    s.trials = 10000;
    s.deployments = 100;
    s.tightness_deployments = 10;
    s.device_counts = {2, 4, 6, 8, 10, 12, 14};
  }
  return s;
}

ProfileSettings ExperimentOptions::settings() const {
  ProfileSettings s = profile_settings(profile);
  if (trials > 0) s.trials = trials;
  if (deployments > 0) {
    s.deployments = deployments;
    s.tightness_deployments = std::min(s.tightness_deployments, deployments);
  }
  return s;
}

std::uint64_t deployment_seed(std::uint64_t master, int index) {
  CounterRng rng(master, static_cast<std::uint64_t>(index), substream_id(StreamTag::kTopology, 0x3FFF));
  return rng.next_u64();
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kProposed:
      return "proposed";
    case Scheme::kUpperBound:
      return "upper_bound";
    case Scheme::kConventional:
      return "conventional";
    case Scheme::kFixedPilot:
      return "fixed_pilot";
  }
  return "unknown";
}

SchemeObjectives evaluate_schemes(const LargeScaleModel& model, const OptimizerParams& params,
                                  Decoder decoder) {
  SchemeObjectives out;
  const OptimizeResult proposed = solve(model, params, decoder);
  out.proposed = proposed.objective;
  out.proposed_feasible = proposed.feasible;

  const OptimizeResult upper = benchmark_upper_bound(model, params, decoder);
  out.upper_bound = upper.objective;
  out.upper_feasible = upper.feasible;
  // the conventional scheme reuses the infinite-blocklength allocation
  if (upper.feasible) {
    const std::vector<double> rates = lb_rates(model, params.fbl, decoder, upper.power);
    bool ok = true;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      if (rates[k] < params.rate_req_bps[k] * (1.0 - 1e-9)) ok = false;
    }
    out.conventional_feasible = ok;
    out.conventional = ok ? weighted_sum(model.weights, rates) : 0.0;
  }

  const OptimizeResult fixed = benchmark_fixed_pilot(model, params, decoder);
  out.fixed_pilot = fixed.objective;
  out.fixed_feasible = fixed.feasible;
  return out;
}

SystemConfig point_config(const ExperimentOptions& o, int M, int N, int K) {
  SystemConfig cfg = o.config;
  cfg.num_aps = M;
  cfg.antennas_per_ap = N;
  cfg.num_devices = K;
  cfg.master_seed = o.seed;
  cfg.validate();
  return cfg;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string preamble(const char* experiment, const ExperimentOptions& o) {
  SystemConfig cfg = o.config;
  cfg.master_seed = o.seed;
  const ProfileSettings s = o.settings();
  std::ostringstream os;
  os << "# experiment=" << experiment << "\n"
     << "# profile=" << profile_name(o.profile) << "\n"
     << "# config_hash=" << cfg.hash() << "\n"
     << "# master_seed=" << o.seed << "\n"
     << "# trials=" << s.trials << " deployments=" << s.deployments << "\n";
  return os.str();
}

// Devices use the decoder only when it is defined for the antenna count.
bool decoder_applies(Decoder d, int N, int K) { return d == Decoder::kMrc || N > K; }

struct Average {
  double all = 0.0;
  double feasible = 0.0;
  double fraction = 0.0;
};

Average average(const std::vector<double>& values, const std::vector<char>& feasible) {
  Average a;
  int count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    a.all += values[i];
    if (feasible[i]) {
      a.feasible += values[i];
      ++count;
    }
  }
  if (!values.empty()) {
    a.all /= static_cast<double>(values.size());
    a.fraction = static_cast<double>(count) / static_cast<double>(values.size());
  }
  if (count > 0) a.feasible /= count;
  return a;
}

constexpr Decoder kDecoders[] = {Decoder::kMrc, Decoder::kFzf};

std::vector<SchemeRow> scheme_rows(const ExperimentOptions& o, int M, int N, int K,
                                   double energy_db, Decoder decoder) {
  const ProfileSettings s = o.settings();
  SystemConfig cfg = point_config(o, M, N, K);
  cfg.energy_budget = PerDevice(std::pow(10.0, energy_db / 10.0));
  const OptimizerParams params = OptimizerParams::from_config(cfg);

  std::vector<SchemeObjectives> slots(s.deployments);
  parallel_for(s.deployments, o.threads, [&](int d) {
    const LargeScaleModel model = generate_topology(cfg, deployment_seed(o.seed, d));
    slots[d] = evaluate_schemes(model, params, decoder);
  });

  std::vector<SchemeRow> rows;
  const auto add = [&](Scheme scheme, auto value, auto feasible) {
    std::vector<double> v;
    std::vector<char> f;
    for (const SchemeObjectives& r : slots) {
      v.push_back(value(r));
      f.push_back(feasible(r) ? 1 : 0);
    }
    const Average a = average(v, f);
    rows.push_back({decoder, M, N, K, energy_db, scheme, a.all, a.feasible, a.fraction});
  };
  add(Scheme::kProposed, [](const SchemeObjectives& r) { return r.proposed; },
      [](const SchemeObjectives& r) { return r.proposed_feasible; });
  add(Scheme::kUpperBound, [](const SchemeObjectives& r) { return r.upper_bound; },
      [](const SchemeObjectives& r) { return r.upper_feasible; });
  add(Scheme::kConventional, [](const SchemeObjectives& r) { return r.conventional; },
      [](const SchemeObjectives& r) { return r.conventional_feasible; });
  add(Scheme::kFixedPilot, [](const SchemeObjectives& r) { return r.fixed_pilot; },
      [](const SchemeObjectives& r) { return r.fixed_feasible; });
  return rows;
}

std::string scheme_csv(const char* experiment, const ExperimentOptions& o,
                       const std::vector<SchemeRow>& rows) {
  std::ostringstream os;
  os << preamble(experiment, o)
     << "decoder,M,N,K,energy_db,scheme,avg_rate_mbps,avg_rate_feasible_mbps,feasible_fraction\n";
  for (const SchemeRow& r : rows) {
    os << decoder_name(r.decoder) << ',' << r.M << ',' << r.N << ',' << r.K << ','
       << num(r.energy_db) << ',' << scheme_name(r.scheme) << ',' << num(r.avg_rate / 1e6) << ','
       << num(r.avg_rate_feasible / 1e6) << ',' << num(r.feasible_fraction) << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<TightnessRow> tightness_rows(const ExperimentOptions& o) {
  const ProfileSettings s = o.settings();
  const int K = s.num_devices;
  constexpr double kPower = 0.1;
  std::vector<TightnessRow> rows;
  for (Decoder decoder : kDecoders) {
    for (int M : {1, 4, 9}) {
      for (int total : s.tightness_totals) {
        if (total % M != 0) continue;
        const int N = total / M;
        if (!decoder_applies(decoder, N, K)) continue;
        SystemConfig cfg = point_config(o, M, N, K);
        cfg.ap_select_threshold = 0.9;
        const FblParams fbl = FblParams::from_config(cfg);
        const PowerAllocation power = PowerAllocation::uniform(K, kPower, kPower);
        McOptions mc;
        mc.trials = s.trials;
        mc.threads = o.threads;

        double lb = 0.0, erg = 0.0, se = 0.0;
        for (int d = 0; d < s.tightness_deployments; ++d) {
          const std::uint64_t seed = deployment_seed(o.seed, d);
          const LargeScaleModel model = generate_topology(cfg, seed);
          const std::vector<double> lbr = lb_rates(model, fbl, decoder, power);
          const std::vector<Estimate> est = ergodic_rate(model, fbl, power, decoder, seed, mc);
          for (int k = 0; k < K; ++k) {
            lb += lbr[k];
            erg += est[k].mean;
            se += est[k].std_error;
          }
        }
        const double n = static_cast<double>(K) * s.tightness_deployments;
        // devices share trials, so the standard errors are added linearly
        // (exact for fully correlated estimates, conservative otherwise)
        rows.push_back({decoder, M, N, total, lb / n, erg / n, 1.96 * se / n});
      }
    }
  }
  return rows;
}

std::string run_tightness(const ExperimentOptions& o) {
  std::ostringstream os;
  os << preamble("tightness", o) << "decoder,M,N,MN,lb_rate_mbps,ergodic_rate_mbps,ci_mbps\n";
  for (const TightnessRow& r : tightness_rows(o)) {
    os << decoder_name(r.decoder) << ',' << r.M << ',' << r.N << ',' << r.MN << ','
       << num(r.lb_rate / 1e6) << ',' << num(r.ergodic_rate / 1e6) << ',' << num(r.ci / 1e6)
       << '\n';
  }
  return os.str();
}

std::vector<ConvergeRow> converge_rows(const ExperimentOptions& o) {
  const ProfileSettings s = o.settings();
  const int K = s.num_devices;
  const int traces = std::min(3, s.deployments);
  std::vector<ConvergeRow> rows;
  for (Decoder decoder : kDecoders) {
    for (int M : {1, 4, 9}) {
      const int N = s.converge_total / M;
      if (!decoder_applies(decoder, N, K)) continue;
      const SystemConfig cfg = point_config(o, M, N, K);
      const OptimizerParams params = OptimizerParams::from_config(cfg);
      std::vector<OptimizeResult> results(traces);
      parallel_for(traces, o.threads, [&](int d) {
        results[d] = solve(generate_topology(cfg, deployment_seed(o.seed, d)), params, decoder);
      });
      for (int d = 0; d < traces; ++d) {
        for (const IterationRecord& it : results[d].trace) {
          rows.push_back({decoder, M, N, d, it.iteration, it.objective, results[d].converged});
        }
      }
    }
  }
  return rows;
}

std::string run_converge(const ExperimentOptions& o) {
  std::ostringstream os;
  os << preamble("converge", o) << "decoder,M,N,deployment,iteration,objective_mbps,converged\n";
  for (const ConvergeRow& r : converge_rows(o)) {
    os << decoder_name(r.decoder) << ',' << r.M << ',' << r.N << ',' << r.deployment << ','
       << r.iteration << ',' << num(r.objective / 1e6) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<ThresholdRow> threshold_rows(const ExperimentOptions& o) {
  const ProfileSettings s = o.settings();
  const int K = s.num_devices;
  const int M = s.threshold_aps;
  const int N = s.total_antennas / M;
  std::vector<ThresholdRow> rows;
  for (Decoder decoder : kDecoders) {
    if (!decoder_applies(decoder, N, K)) continue;
    const SystemConfig cfg = point_config(o, M, N, K);
    const OptimizerParams params = OptimizerParams::from_config(cfg);
    const std::size_t T = s.thresholds.size();
    std::vector<double> value(s.deployments * T, 0.0);
    std::vector<char> feasible(s.deployments * T, 0);
    parallel_for(s.deployments, o.threads, [&](int d) {
      const LargeScaleModel base = generate_topology(cfg, deployment_seed(o.seed, d));
      for (std::size_t t = 0; t < T; ++t) {
        const OptimizeResult r = solve(with_threshold(base, s.thresholds[t]), params, decoder);
        value[d * T + t] = r.objective;
        feasible[d * T + t] = r.feasible ? 1 : 0;
      }
    });
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> v;
      std::vector<char> f;
      for (int d = 0; d < s.deployments; ++d) {
        v.push_back(value[d * T + t]);
        f.push_back(feasible[d * T + t]);
      }
      const Average a = average(v, f);
      rows.push_back({decoder, M, N, s.thresholds[t], a.all, a.feasible, a.fraction});
    }
  }
  return rows;
}

std::string run_threshold_sweep(const ExperimentOptions& o) {
  std::ostringstream os;
  os << preamble("threshold-sweep", o)
     << "decoder,M,N,threshold,avg_rate_mbps,avg_rate_feasible_mbps,feasible_fraction\n";
  for (const ThresholdRow& r : threshold_rows(o)) {
    os << decoder_name(r.decoder) << ',' << r.M << ',' << r.N << ',' << num(r.threshold) << ','
       << num(r.avg_rate / 1e6) << ',' << num(r.avg_rate_feasible / 1e6) << ','
       << num(r.feasible_fraction) << '\n';
  }
  return os.str();
}

std::vector<SchemeRow> energy_rows(const ExperimentOptions& o) {
  const ProfileSettings s = o.settings();
  const int K = s.num_devices;
  std::vector<SchemeRow> rows;
  for (Decoder decoder : kDecoders) {
    for (int M : s.ap_counts) {
      const int N = s.total_antennas / M;
      if (!decoder_applies(decoder, N, K)) continue;
      for (double e : s.energy_db) {
        const auto part = scheme_rows(o, M, N, K, e, decoder);
        rows.insert(rows.end(), part.begin(), part.end());
      }
    }
  }
  return rows;
}

std::string run_energy_compare(const ExperimentOptions& o) {
  return scheme_csv("energy-compare", o, energy_rows(o));
}

std::vector<SchemeRow> devices_rows(const ExperimentOptions& o) {
  const ProfileSettings s = o.settings();
  const double energy_db = 10.0 * std::log10(o.config.energy_budget.at(0));
  std::vector<SchemeRow> rows;
  for (Decoder decoder : kDecoders) {
    for (int M : s.ap_counts) {
      const int N = s.total_antennas / M;
      for (int K : s.device_counts) {
        // zero-forcing requires K < N
        if (!decoder_applies(decoder, N, K)) continue;
        const auto part = scheme_rows(o, M, N, K, energy_db, decoder);
        rows.insert(rows.end(), part.begin(), part.end());
      }
    }
  }
  return rows;
}

std::string run_devices_sweep(const ExperimentOptions& o) {
  return scheme_csv("devices-sweep", o, devices_rows(o));
}

}  // namespace cfurllc
