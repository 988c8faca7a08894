#include "cfurllc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "cfurllc/approx.hpp"
#include "cfurllc/channel.hpp"
#include "cfurllc/errors.hpp"

namespace cfurllc {

using gp::Expr;

const char* decoder_name(Decoder d) { return d == Decoder::kMrc ? "mrc" : "fzf"; }

OptimizerParams OptimizerParams::from_config(const SystemConfig& cfg) {
  OptimizerParams p;
  p.fbl = FblParams::from_config(cfg);
  for (int k = 0; k < cfg.num_devices; ++k) p.rate_req_bps.push_back(cfg.rate_req_bps.at(k));
  p.sca_tolerance = cfg.sca_tolerance;
  p.max_iterations = cfg.sca_max_iterations;
  p.gp.tolerance = cfg.gp_tolerance;
  return p;
}

double constraint_rhs_sinr_floor(const OptimizerParams& params, int k) {
  const double target = params.rate_req_bps.at(k) / params.fbl.rate_scale();
  return 1.0 / f_k_inverse(target, params.fbl, k);
}

std::vector<double> lb_sinrs(const LargeScaleModel& model, Decoder decoder,
                             const PowerAllocation& power) {
  const EstimationStats stats = estimation_stats(model, power.pilot);
  std::vector<double> out;
  for (int k = 0; k < model.num_devices(); ++k) {
    out.push_back(decoder == Decoder::kMrc ? lb_sinr_mrc(model, stats, power, k)
                                           : lb_sinr_fzf(model, stats, power, k));
  }
  return out;
}

std::vector<double> lb_rates(const LargeScaleModel& model, const FblParams& fbl, Decoder decoder,
                             const PowerAllocation& power) {
  const std::vector<double> sinr = lb_sinrs(model, decoder, power);
  std::vector<double> out;
  for (std::size_t k = 0; k < sinr.size(); ++k) {
    out.push_back(lb_rate(sinr[k], fbl, static_cast<int>(k)));
  }
  return out;
}

double weighted_sum(const std::vector<double>& weights, const std::vector<double>& values) {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += weights.at(k) * values[k];
  return s;
}

namespace {

// Which powers are GP variables. Pilots are either variables (joint design)
// or fixed constants (fixed-pilot benchmark).
struct Layout {
  int K = 0;
  bool joint = true;
  std::vector<double> fixed_pilot;

  int pp(int k) const { return k; }
  int pd(int k) const { return joint ? K + k : k; }
  int last() const { return joint ? 2 * K : K; }  // first index after the powers

  Expr pilot(int k) const {
    return joint ? Expr::variable(pp(k)) : Expr::constant(fixed_pilot[k]);
  }
  Expr payload(int k) const { return Expr::variable(pd(k)); }
};

Expr one() { return Expr::constant(1.0); }

Expr scaled(double log_coeff, const Expr& e) { return Expr::monomial_log(log_coeff, {}) * e; }

Expr product_except(const std::vector<Expr>& factors, std::size_t skip) {
  std::vector<Expr> keep;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i != skip) keep.push_back(factors[i]);
  }
  return keep.empty() ? one() : gp::product(keep);
}

// (1 + K beta p) for every AP in the service set of `k`, powered by device j.
std::vector<Expr> estimation_factors(const LargeScaleModel& model, const Layout& lay, int k, int j) {
  std::vector<Expr> out;
  const double logK = std::log(static_cast<double>(model.num_devices()));
  for (int m : model.service_sets[k]) {
    out.push_back(scaled(logK + std::log(model.beta(m, j)), lay.pilot(j)) + one());
  }
  return out;
}

// Adds the approximated SINR constraint chi_k * LHS <= RHS for device k,
// with the tangent coefficients taken at `pilot_hat`.
void add_sinr_constraint(gp::Problem& prob, const LargeScaleModel& model, const Layout& lay,
                         Decoder decoder, int k, const Expr& chi,
                         const std::vector<double>& pilot_hat) {
  const int K = model.num_devices();
  const int N = model.antennas_per_ap;
  const auto& set = model.service_sets[k];
  const double logK = std::log(static_cast<double>(K));
  const std::string name = "sinr_" + std::to_string(k);

  if (decoder == Decoder::kMrc) {
    const std::vector<Expr> fac = estimation_factors(model, lay, k, k);
    // sigma (sum_k' p^d_k' xi_k,k' + theta)
    //   = sigma sum_m K p beta_m^2 prod_{n != m} fac_n (1 + sum_k' beta_m,k' p^d_k')
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const int m = set[i];
      std::vector<Expr> load{one()};
      for (int kp = 0; kp < K; ++kp) {
        load.push_back(scaled(std::log(model.beta(m, kp)), lay.payload(kp)));
      }
      const Expr lead = scaled(logK + 2.0 * std::log(model.beta(m, k)), lay.pilot(k));
      terms.push_back(lead * product_except(fac, i) * gp::sum(load));
    }
    const Expr lhs = chi * gp::product(fac) * gp::sum(terms);
    const MonomialApproxMrc approx = theorem3_coeffs(model, pilot_hat[k], k);
    const Expr rhs = scaled(std::log(N) + 2.0 * approx.c, gp::pow(lay.pilot(k), 2.0 * approx.a)) *
                     lay.payload(k);
    prob.add_constraint(name, lhs, rhs);
    return;
  }

  std::vector<Expr> theta2;  // vartheta_{k,j}^2
  std::vector<Expr> mu;
  for (int j = 0; j < K; ++j) {
    const std::vector<Expr> fac = estimation_factors(model, lay, k, j);
    theta2.push_back(gp::product(fac));
    std::vector<Expr> parts;
    for (std::size_t i = 0; i < set.size(); ++i) {
      parts.push_back(scaled(std::log(model.beta(set[i], j)), product_except(fac, i)));
    }
    mu.push_back(gp::sum(parts));
  }
  std::vector<Expr> terms{scaled(std::log(static_cast<double>(set.size())), gp::product(theta2))};
  for (int j = 0; j < K; ++j) {
    terms.push_back(lay.payload(j) * mu[j] * product_except(theta2, static_cast<std::size_t>(j)));
  }
  const Expr lhs = chi * gp::sum(terms);
  const MonomialApproxFzf approx = theorem4_coeffs(model, pilot_hat, k);
  Expr rhs = scaled(std::log(static_cast<double>(N - K)) + approx.d, lay.payload(k));
  for (int j = 0; j < K; ++j) rhs = rhs * gp::pow(lay.pilot(j), approx.b[j]);
  prob.add_constraint(name, lhs, rhs);
}

void add_power_variables(gp::Problem& prob, const Layout& lay) {
  if (lay.joint) {
    for (int k = 0; k < lay.K; ++k) prob.add_variable("pp" + std::to_string(k));
  }
  for (int k = 0; k < lay.K; ++k) prob.add_variable("pd" + std::to_string(k));
}

void add_energy_constraints(gp::Problem& prob, const LargeScaleModel& model, const Layout& lay,
                            int blocklength) {
  const int K = lay.K;
  for (int k = 0; k < K; ++k) {
    const double logE = std::log(model.energy.at(k));
    const Expr lhs = scaled(std::log(static_cast<double>(K)) - logE, lay.pilot(k)) +
                     scaled(std::log(static_cast<double>(blocklength - K)) - logE, lay.payload(k));
    prob.add_constraint("energy_" + std::to_string(k), lhs);
  }
}

PowerAllocation read_powers(const std::vector<double>& x, const Layout& lay) {
  PowerAllocation p;
  for (int k = 0; k < lay.K; ++k) {
    p.pilot.push_back(lay.joint ? x[lay.pp(k)] : lay.fixed_pilot[k]);
    p.payload.push_back(x[lay.pd(k)]);
  }
  return p;
}

std::vector<double> start_powers(const PowerAllocation& p, const Layout& lay) {
  std::vector<double> x;
  if (lay.joint) x.insert(x.end(), p.pilot.begin(), p.pilot.end());
  x.insert(x.end(), p.payload.begin(), p.payload.end());
  return x;
}

bool meets_requirements(const std::vector<double>& rates, const std::vector<double>& req) {
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] < req[k] * (1.0 - 1e-9)) return false;
  }
  return true;
}

struct Setup {
  Layout layout;
  FblParams fbl;
  std::vector<double> floor;
};

Setup make_setup(const LargeScaleModel& model, const OptimizerParams& params, bool joint,
                 const FblParams& fbl) {
  Setup s;
  s.layout.K = model.num_devices();
  s.layout.joint = joint;
  if (!joint) {
    for (int k = 0; k < s.layout.K; ++k) {
      s.layout.fixed_pilot.push_back(model.energy.at(k) / params.fbl.blocklength);
    }
  }
  s.fbl = fbl;
  OptimizerParams with_fbl = params;
  with_fbl.fbl = fbl;
  for (int k = 0; k < s.layout.K; ++k) s.floor.push_back(constraint_rhs_sinr_floor(with_fbl, k));
  return s;
}

void check_model(const LargeScaleModel& model, const OptimizerParams& params, Decoder decoder) {
  const int K = model.num_devices();
  if (static_cast<int>(params.rate_req_bps.size()) != K ||
      static_cast<int>(params.fbl.alpha.size()) != K || static_cast<int>(model.energy.size()) != K ||
      static_cast<int>(model.weights.size()) != K) {
    throw ConfigError("per-device parameters do not match the number of devices");
  }
  if (decoder == Decoder::kFzf && model.antennas_per_ap <= K) {
    throw ConfigError("FZF needs more antennas per AP than devices (N > K)");
  }
}

FeasibilityResult feasibility_for(const LargeScaleModel& model, const OptimizerParams& params,
                                  Decoder decoder, const Setup& setup) {
  const Layout& lay = setup.layout;
  const int K = lay.K;
  const int L = params.fbl.blocklength;
  FeasibilityResult res;

  std::vector<double> pilot_hat(K);
  PowerAllocation start;
  for (int k = 0; k < K; ++k) {
    const double E = model.energy[k];
    pilot_hat[k] = lay.joint ? E / (2.0 * K) : lay.fixed_pilot[k];
    start.pilot.push_back(0.5 * pilot_hat[k]);
    start.payload.push_back(lay.joint ? 0.25 * E / (L - K) : 0.5 * (E - K * pilot_hat[k]) / (L - K));
  }

  double best_phi = 0.0;
  for (int round = 0; round < params.max_init_rounds; ++round) {
    gp::Problem prob;
    add_power_variables(prob, lay);
    const int phi_idx = prob.add_variable("phi");
    const Expr phi = Expr::variable(phi_idx);
    for (int k = 0; k < K; ++k) {
      add_sinr_constraint(prob, model, lay, decoder, k, scaled(std::log(setup.floor[k]), phi),
                          pilot_hat);
    }
    add_energy_constraints(prob, model, lay, L);
    prob.maximize(phi);

    std::vector<double> x0 = start_powers(start, lay);
    x0.push_back(1e-6);
    const gp::Solution sol = gp::solve(prob, params.gp, x0);
    ++res.rounds;
    if (sol.status == gp::Status::kInfeasible) break;

    const PowerAllocation power = read_powers(sol.x, lay);
    const std::vector<double> sinr = lb_sinrs(model, decoder, power);
    double phi_true = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) phi_true = std::min(phi_true, sinr[k] / setup.floor[k]);
    if (phi_true > best_phi) {
      const bool improved = phi_true > best_phi * (1.0 + 1e-6);
      best_phi = phi_true;
      res.power = power;
      res.phi = phi_true;
      if (phi_true >= 1.0) {
        res.feasible = true;
        return res;
      }
      if (!improved || !lay.joint) break;
    } else {
      break;
    }
    pilot_hat = power.pilot;
    start = power;
  }
  return res;
}

OptimizeResult run_sca(const LargeScaleModel& model, const OptimizerParams& params,
                       Decoder decoder, bool joint, const FblParams& fbl) {
  check_model(model, params, decoder);
  const Setup setup = make_setup(model, params, joint, fbl);
  const Layout& lay = setup.layout;
  const int K = lay.K;
  OptimizeResult res;

  const FeasibilityResult init = feasibility_for(model, params, decoder, setup);
  if (!init.feasible) {
    res.diagnostic = "infeasible: best phi " + std::to_string(init.phi);
    return res;
  }

  PowerAllocation power = init.power;
  std::vector<double> sinr = lb_sinrs(model, decoder, power);
  std::vector<double> rates;
  for (int k = 0; k < K; ++k) rates.push_back(lb_rate(sinr[k], fbl, k));
  double obj = weighted_sum(model.weights, rates);
  res.trace.push_back({1, obj, sinr, power, gp::Status::kOptimal});

  double prev = obj * params.sca_tolerance;
  res.converged = false;
  while (true) {
    if (prev > 0.0 && (obj - prev) / prev < params.sca_tolerance) {
      res.converged = true;
      break;
    }
    if (static_cast<int>(res.trace.size()) >= params.max_iterations) {
      res.diagnostic = "iteration cap reached";
      break;
    }

    // surrogate exponents from both tangent bounds at the current SINR
    std::vector<double> w_hat(K);
    double w_max = 0.0;
    bool bad_exponent = false;
    for (int k = 0; k < K; ++k) {
      const LogApproxCoeffs c = log_approx_coeffs(sinr[k]);
      const double slope = c.rho - fbl.alpha[k] * c.rho_tilde;
      if (!(slope > 0.0)) bad_exponent = true;
      w_hat[k] = model.weights[k] * fbl.rate_scale() * slope;
      w_max = std::max(w_max, w_hat[k]);
    }
    if (bad_exponent || !(w_max > 0.0)) {
      res.diagnostic = "non-positive surrogate exponent";
      break;
    }

    gp::Problem prob;
    add_power_variables(prob, lay);
    std::vector<Expr> chi;
    for (int k = 0; k < K; ++k) chi.push_back(Expr::variable(prob.add_variable("chi" + std::to_string(k))));
    for (int k = 0; k < K; ++k) {
      add_sinr_constraint(prob, model, lay, decoder, k, chi[k], power.pilot);
      prob.add_constraint("floor_" + std::to_string(k),
                          Expr::monomial(setup.floor[k], {{lay.last() + k, -1.0}}));
    }
    add_energy_constraints(prob, model, lay, params.fbl.blocklength);
    std::vector<std::pair<int, double>> objective;
    for (int k = 0; k < K; ++k) {
      if (w_hat[k] > 0.0) objective.emplace_back(lay.last() + k, w_hat[k] / w_max);
    }
    prob.maximize(Expr::monomial(1.0, objective));

    std::vector<double> x0 = start_powers(power, lay);
    for (int k = 0; k < K; ++k) x0.push_back(std::max(setup.floor[k], sinr[k] * (1.0 - 1e-3)));
    const gp::Solution sol = gp::solve(prob, params.gp, x0);
    if (sol.status == gp::Status::kInfeasible) {
      res.diagnostic = "GP infeasible at iteration " + std::to_string(res.trace.size() + 1);
      break;
    }

    const PowerAllocation next = read_powers(sol.x, lay);
    const std::vector<double> next_sinr = lb_sinrs(model, decoder, next);
    std::vector<double> next_rates;
    for (int k = 0; k < K; ++k) next_rates.push_back(lb_rate(next_sinr[k], fbl, k));
    const double next_obj = weighted_sum(model.weights, next_rates);
    if (!meets_requirements(next_rates, params.rate_req_bps)) {
      res.diagnostic = "iterate violates a rate requirement; keeping previous iterate";
      break;
    }
    if (next_obj < obj) {
      res.diagnostic = "objective decreased; keeping previous iterate";
      break;
    }
    const int iteration = static_cast<int>(res.trace.size()) + 1;
    res.trace.push_back({iteration, next_obj, next_sinr, next, sol.status});
    prev = obj;
    obj = next_obj;
    power = next;
    sinr = next_sinr;
    rates = next_rates;
  }

  res.feasible = true;
  res.power = power;
  res.sinr = sinr;
  res.rates = rates;
  res.objective = obj;
  return res;
}

}  // namespace

FeasibilityResult feasibility_init(const LargeScaleModel& model, const OptimizerParams& params,
                                   Decoder decoder) {
  check_model(model, params, decoder);
  return feasibility_for(model, params, decoder, make_setup(model, params, true, params.fbl));
}

OptimizeResult solve_mrc(const LargeScaleModel& model, const OptimizerParams& params) {
  return run_sca(model, params, Decoder::kMrc, true, params.fbl);
}

OptimizeResult solve_fzf(const LargeScaleModel& model, const OptimizerParams& params) {
  return run_sca(model, params, Decoder::kFzf, true, params.fbl);
}

OptimizeResult solve(const LargeScaleModel& model, const OptimizerParams& params, Decoder decoder) {
  return run_sca(model, params, decoder, true, params.fbl);
}

OptimizeResult benchmark_upper_bound(const LargeScaleModel& model, const OptimizerParams& params,
                                     Decoder decoder) {
  return run_sca(model, params, decoder, true, params.fbl.without_dispersion());
}

OptimizeResult benchmark_conventional(const LargeScaleModel& model,
                                      const OptimizerParams& params, Decoder decoder) {
  OptimizeResult res = benchmark_upper_bound(model, params, decoder);
  if (!res.feasible) return res;
  res.rates = lb_rates(model, params.fbl, decoder, res.power);
  if (!meets_requirements(res.rates, params.rate_req_bps)) {
    res.feasible = false;
    res.objective = 0.0;
    res.diagnostic = "allocation misses a rate requirement under finite blocklength";
    return res;
  }
  res.objective = weighted_sum(model.weights, res.rates);
  return res;
}

OptimizeResult benchmark_fixed_pilot(const LargeScaleModel& model, const OptimizerParams& params,
                                     Decoder decoder) {
  return run_sca(model, params, decoder, false, params.fbl);
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "iteration,objective_bps,status,device,chi,pilot_w,payload_w\n";
  for (const IterationRecord& r : trace) {
    for (std::size_t k = 0; k < r.chi.size(); ++k) {
      out << r.iteration << ',' << r.objective << ',' << gp::status_name(r.status) << ',' << k << ','
          << r.chi[k] << ',' << r.power.pilot[k] << ',' << r.power.payload[k] << '\n';
    }
  }
}

}  // namespace cfurllc
