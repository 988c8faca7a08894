#include <doctest.h>

#include <cmath>

#include "cfurllc/channel.hpp"
#include "cfurllc/config.hpp"
#include "cfurllc/errors.hpp"
#include "cfurllc/fbl.hpp"
#include "cfurllc/montecarlo.hpp"
#include "cfurllc/rng.hpp"
#include "cfurllc/scenario.hpp"
#include "oracles.hpp"

using namespace cfurllc;

namespace {

struct Instance {
  LargeScaleModel model;
  PowerAllocation power;
  FblParams fbl;
};

Instance make_instance(int M, int N, int K, std::uint64_t seed) {
  CounterRng rng(seed, 0, 0);
  Instance in;
  in.model = make_model(oracle::random_beta(rng, M, K, 0.1, 10.0), 0.9, N, std::vector<double>(K, 1.0),
                        std::vector<double>(K, 1.0));
  for (int k = 0; k < K; ++k) {
    in.power.pilot.push_back(rng.uniform(0.2, 2.0));
    in.power.payload.push_back(rng.uniform(0.2, 2.0));
  }
  SystemConfig cfg;
  cfg.num_devices = K;
  in.fbl = FblParams::from_config(cfg);
  return in;
}

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("MRC term means against the closed forms") {
    const Instance in = make_instance(3, 4, 2, 41);
    McOptions o;
    o.trials = 4000;
    const McResult r = run_monte_carlo(in.model, in.fbl, in.power, Decoder::kMrc, 9, o);
    const EstimationStats st = estimation_stats(in.model, in.power.pilot);
    const double N = 4.0, K = 2.0;
    for (int k = 0; k < 2; ++k) {
      double sl = 0.0, slb = 0.0;
      for (int m : in.model.service_sets[k]) {
        sl += st.lambda(m, k);
        slb += st.lambda(m, k) * in.model.beta(m, k);
      }
      const double p = in.power.payload[k];
      CHECK(r.ds[k].mean == doctest::Approx(N * N * p * sl * sl).epsilon(1e-12));
      CHECK(std::abs(r.ls[k].mean - N * p * slb) <= 4.0 * r.ls[k].std_error);
      CHECK(std::abs(r.noise[k].mean - N * sl) <= 4.0 * r.noise[k].std_error);
      const int j = 1 - k;
      double ui = 0.0;
      for (int m : in.model.service_sets[k]) {
        const double lam = st.lambda(m, k), b = in.model.beta(m, k), bj = in.model.beta(m, j);
        ui += N * lam * lam * bj / b + N / (K * in.power.pilot[k]) * (lam / b) * (lam / b) * bj;
      }
      ui *= in.power.payload[j];
      CHECK(std::abs(r.ui[k][j].mean - ui) <= 4.0 * r.ui[k][j].std_error);
      CHECK(r.ui[k][k].mean == 0.0);
    }
  }

  TEST_CASE("FZF term means against the closed forms") {
    const Instance in = make_instance(2, 6, 3, 42);
    McOptions o;
    o.trials = 4000;
    const McResult r = run_monte_carlo(in.model, in.fbl, in.power, Decoder::kFzf, 10, o);
    const EstimationStats st = estimation_stats(in.model, in.power.pilot);
    for (int k = 0; k < 3; ++k) {
      double root = 0.0;
      for (int m : in.model.service_sets[k]) root += std::sqrt(st.lambda(m, k));
      const double p = in.power.payload[k];
      CHECK(r.ds[k].mean == doctest::Approx(p * 3.0 * root * root).epsilon(1e-9));
      CHECK(r.ds[k].std_error < 1e-9 * r.ds[k].mean);
      const double size = static_cast<double>(in.model.service_sets[k].size());
      CHECK(std::abs(r.noise[k].mean - size) <= 4.0 * r.noise[k].std_error);
      for (int j = 0; j < 3; ++j) {
        double err = 0.0;
        for (int m : in.model.service_sets[k]) err += st.err_var(m, j);
        const Estimate& e = j == k ? r.ls[k] : r.ui[k][j];
        CHECK(std::abs(e.mean - in.power.payload[j] * err) <= 4.0 * e.std_error);
      }
    }
  }

  TEST_CASE("perfect CSI nulls leakage and interference under zero forcing") {
    Instance in = make_instance(2, 6, 3, 43);
    for (double& p : in.power.pilot) p = 1e12;
    McOptions o;
    o.trials = 200;
    const McResult r = run_monte_carlo(in.model, in.fbl, in.power, Decoder::kFzf, 11, o);
    for (int k = 0; k < 3; ++k) {
      CHECK(r.ls[k].mean < 1e-9);
      for (int j = 0; j < 3; ++j) CHECK(r.ui[k][j].mean < 1e-9);
    }
  }

  TEST_CASE("ergodic rate sits above the lower bound") {
    const Instance in = make_instance(2, 8, 3, 44);
    McOptions o;
    o.trials = 2000;
    const EstimationStats st = estimation_stats(in.model, in.power.pilot);
    for (Decoder d : {Decoder::kMrc, Decoder::kFzf}) {
      const McResult r = run_monte_carlo(in.model, in.fbl, in.power, d, 12, o);
      for (int k = 0; k < 3; ++k) {
        const double lb = d == Decoder::kMrc ? lb_sinr_mrc(in.model, st, in.power, k)
                                             : lb_sinr_fzf(in.model, st, in.power, k);
        CHECK(r.rate[k].mean >= lb_rate(lb, in.fbl, k) - r.rate[k].half_width());
        // the desired signal is deterministic, so the bound is 1 / E[1/gamma]
        CHECK(std::abs(r.inv_sinr[k].mean - 1.0 / lb) <= 4.0 * r.inv_sinr[k].std_error);
      }
    }
  }

  TEST_CASE("results do not depend on the thread count") {
    const Instance in = make_instance(4, 6, 3, 45);
    McOptions one, many;
    one.trials = many.trials = 300;
    many.threads = 8;
    for (Decoder d : {Decoder::kMrc, Decoder::kFzf}) {
      const McResult a = run_monte_carlo(in.model, in.fbl, in.power, d, 13, one);
      const McResult b = run_monte_carlo(in.model, in.fbl, in.power, d, 13, many);
      for (int k = 0; k < 3; ++k) {
        CHECK(a.rate[k].mean == b.rate[k].mean);
        CHECK(a.rate[k].std_error == b.rate[k].std_error);
        CHECK(a.ls[k].mean == b.ls[k].mean);
      }
      CHECK(a.trials_used == 300);
    }
  }

  TEST_CASE("argument checks") {
    const Instance in = make_instance(1, 3, 3, 46);
    McOptions o;
    o.trials = 10;
    CHECK_THROWS_AS(run_monte_carlo(in.model, in.fbl, in.power, Decoder::kFzf, 1, o), ConfigError);
    o.trials = 0;
    CHECK_THROWS_AS(run_monte_carlo(in.model, in.fbl, in.power, Decoder::kMrc, 1, o), ConfigError);
  }
}
