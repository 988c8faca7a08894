#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cfurllc/config.hpp"
#include "cfurllc/fbl.hpp"
#include "cfurllc/gp/solver.hpp"
#include "cfurllc/power.hpp"
#include "cfurllc/scenario.hpp"

namespace cfurllc {

enum class Decoder { kMrc, kFzf };
const char* decoder_name(Decoder d);

struct OptimizerParams {
  FblParams fbl;
  std::vector<double> rate_req_bps;
  double sca_tolerance = 0.01;
  int max_iterations = 50;
  int max_init_rounds = 20;
  gp::SolverOptions gp;

  static OptimizerParams from_config(const SystemConfig& cfg);
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;        // weighted sum of LB rates, bit/s
  std::vector<double> chi;       // LB SINR of the iterate
  PowerAllocation power;
  gp::Status status = gp::Status::kOptimal;
};

struct OptimizeResult {
  bool feasible = false;
  bool converged = false;
  PowerAllocation power;
  std::vector<double> sinr;
  std::vector<double> rates;     // bit/s
  double objective = 0.0;        // 0 when infeasible
  std::vector<IterationRecord> trace;
  std::string diagnostic;
};

struct FeasibilityResult {
  bool feasible = false;
  double phi = 0.0;
  int rounds = 0;
  PowerAllocation power;
};

// chi_k >= 1 / f_k^-1(R_req ln 2 / ((1 - eta) B)).
double constraint_rhs_sinr_floor(const OptimizerParams& params, int k);

std::vector<double> lb_sinrs(const LargeScaleModel& model, Decoder decoder,
                             const PowerAllocation& power);
std::vector<double> lb_rates(const LargeScaleModel& model, const FblParams& fbl, Decoder decoder,
                             const PowerAllocation& power);
double weighted_sum(const std::vector<double>& weights, const std::vector<double>& values);

// Max-phi feasibility problem. The tangent coefficients are first taken at
// p^p = E / (2K), p^d = E / (2 (L - K)) and then re-taken at each solution
// while phi improves, until phi >= 1.
FeasibilityResult feasibility_init(const LargeScaleModel& model, const OptimizerParams& params,
                                   Decoder decoder);

OptimizeResult solve_mrc(const LargeScaleModel& model, const OptimizerParams& params);
OptimizeResult solve_fzf(const LargeScaleModel& model, const OptimizerParams& params);
OptimizeResult solve(const LargeScaleModel& model, const OptimizerParams& params, Decoder decoder);

// Infinite-blocklength optimum; rates reported without the dispersion term.
OptimizeResult benchmark_upper_bound(const LargeScaleModel& model, const OptimizerParams& params,
                                     Decoder decoder);
// Infinite-blocklength allocation evaluated with finite-blocklength rates.
OptimizeResult benchmark_conventional(const LargeScaleModel& model,
                                      const OptimizerParams& params, Decoder decoder);
// p^p_k = E_k / L fixed; only payload powers are optimized.
OptimizeResult benchmark_fixed_pilot(const LargeScaleModel& model, const OptimizerParams& params,
                                     Decoder decoder);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace cfurllc
