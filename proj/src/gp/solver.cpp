#include "cfurllc/gp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cfurllc/errors.hpp"

namespace cfurllc::gp {

int Problem::add_variable(std::string name) {
  names_.push_back(std::move(name));
  return static_cast<int>(names_.size()) - 1;
}

void Problem::maximize(Expr monomial) {
  if (!monomial.is_monomial()) throw ModelingError("maximized objective must be a monomial");
  objective_ = std::move(monomial);
  maximize_ = true;
}

void Problem::minimize(Expr objective) {
  objective_ = std::move(objective);
  maximize_ = false;
}

void Problem::add_constraint(std::string name, Expr lhs, Expr rhs) {
  if (!rhs.is_monomial()) {
    throw ModelingError("constraint '" + name + "': right-hand side must be a monomial");
  }
  constraints_.push_back({std::move(name), std::move(lhs), std::move(rhs)});
}

const char* status_name(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kMaxIterations:
      return "max-iterations";
  }
  return "unknown";
}

NormalizedProblem normalize(const Problem& problem) {
  if (!problem.objective()) throw ModelingError("problem has no objective");
  const int n = problem.num_variables();
  const auto check_support = [n](const Expr& e, const std::string& what) {
    if (!e.support().empty() && e.support().back() >= n) {
      throw ModelingError(what + " references an undeclared variable");
    }
  };
  NormalizedProblem out{problem.names(), *problem.objective(), problem.maximizing(), {}, {}};
  check_support(out.objective, "objective");
  if (out.maximize) out.objective = pow(out.objective, -1.0);
  for (const Constraint& c : problem.constraints()) {
    check_support(c.lhs, "constraint '" + c.name + "'");
    check_support(c.rhs, "constraint '" + c.name + "'");
    out.constraint_names.push_back(c.name);
    out.constraints.push_back(c.lhs / c.rhs);
  }
  return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Value, gradient and Hessian of a scalar function of the full log vector.
struct Local {
  double value = 0.0;
  VectorXd grad;
  MatrixXd hess;
};

using Evaluator = std::function<Local(const VectorXd&, bool)>;

Local scatter(const Expr& e, const VectorXd& y, bool with_hessian, Eigen::Index dim) {
  const LogEval ev = e.evaluate_log(std::span<const double>(y.data(), y.size()), with_hessian);
  Local out;
  out.value = ev.value;
  out.grad = VectorXd::Zero(dim);
  if (with_hessian) out.hess = MatrixXd::Zero(dim, dim);
  const auto& sup = e.support();
  for (std::size_t a = 0; a < sup.size(); ++a) {
    out.grad(sup[a]) = ev.grad(a);
    if (with_hessian) {
      for (std::size_t b = 0; b < sup.size(); ++b) out.hess(sup[a], sup[b]) = ev.hess(a, b);
    }
  }
  return out;
}

// minimize f0(y) s.t. F_i(y) <= 0, all convex, by the log-barrier method.
struct BarrierProblem {
  Evaluator objective;
  std::vector<Evaluator> constraints;
  // Optional early exit tested after each Newton step (phase I).
  std::function<bool(const VectorXd&)> done;
};

struct BarrierResult {
  VectorXd y;
  bool converged = false;
  bool stopped_early = false;
  int newton_steps = 0;
  std::vector<double> outer_values;
  double t = 0.0;
};

bool strictly_feasible(const BarrierProblem& p, const VectorXd& y) {
  if (!y.allFinite()) return false;
  for (const auto& c : p.constraints) {
    const double v = c(y, false).value;
    if (!(v < 0.0)) return false;
  }
  return true;
}

// Barrier function t f0 - sum log(-F_i); +inf outside the domain.
double barrier_value(const BarrierProblem& p, const VectorXd& y, double t) {
  if (!y.allFinite()) return std::numeric_limits<double>::infinity();
  double v = t * p.objective(y, false).value;
  for (const auto& c : p.constraints) {
    const double f = c(y, false).value;
    if (!(f < 0.0)) return std::numeric_limits<double>::infinity();
    v -= std::log(-f);
  }
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

BarrierResult run_barrier(const BarrierProblem& p, VectorXd y, const SolverOptions& opt) {
  const double m = static_cast<double>(p.constraints.size());
  BarrierResult res;
  double t = opt.t_initial;
  for (int outer = 0; outer < opt.max_outer_steps; ++outer) {
    bool centered = false;
    for (int step = 0; step < opt.max_newton_steps; ++step) {
      const Local f0 = p.objective(y, true);
      VectorXd g = t * f0.grad;
      MatrixXd H = t * f0.hess;
      for (const auto& c : p.constraints) {
        const Local fi = c(y, true);
        const double inv = -1.0 / fi.value;
        g += inv * fi.grad;
        H += inv * fi.hess + (inv * inv) * fi.grad * fi.grad.transpose();
      }
      // small ridge keeps the factorization usable for variables the
      // problem leaves flat
      const double ridge = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += ridge;
      const VectorXd dx = H.ldlt().solve(-g);
      const double decrement = -g.dot(dx);
      ++res.newton_steps;
      if (!dx.allFinite()) break;
      if (decrement / 2.0 <= 1e-12) {
        centered = true;
        break;
      }
      const double phi = barrier_value(p, y, t);
      double s = 1.0;
      bool moved = false;
      bool stalled = false;
      while (s > 1e-16) {
        const VectorXd trial = y + s * dx;
        const double v = barrier_value(p, trial, t);
        if (v <= phi - opt.armijo * s * decrement) {
          // an accepted step that leaves the barrier value unchanged means
          // the remaining decrement is below rounding level
          stalled = !(v < phi);
          y = trial;
          moved = true;
          break;
        }
        s *= opt.shrink;
      }
      if (p.done && p.done(y)) {
        res.y = y;
        res.stopped_early = true;
        return res;
      }
      if (stalled) {
        centered = true;
        break;
      }
      if (!moved) {
        // no representable progress left: treat as centred when the
        // decrement is already tiny relative to the barrier scale
        centered = decrement <= 1e-8 * std::max(1.0, std::abs(phi));
        break;
      }
    }
    res.outer_values.push_back(p.objective(y, false).value);
    res.t = t;
    if (!centered && outer > 0) {
      res.y = y;
      return res;
    }
    if (m == 0.0 || m / t < opt.tolerance) {
      res.y = y;
      res.converged = centered;
      return res;
    }
    t *= opt.t_factor;
  }
  res.y = y;
  return res;
}

}  // namespace

Solution solve(const Problem& problem, const SolverOptions& options,
               const std::optional<std::vector<double>>& start) {
  const NormalizedProblem np = normalize(problem);
  const Eigen::Index n = problem.num_variables();
  Solution sol;

  VectorXd y = VectorXd::Zero(n);
  if (start) {
    if (static_cast<Eigen::Index>(start->size()) != n) throw ModelingError("start has wrong size");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!((*start)[i] > 0.0)) throw ModelingError("start point must be positive");
      y(i) = std::log((*start)[i]);
    }
  }

  std::vector<Evaluator> cons;
  for (const Expr& c : np.constraints) {
    cons.push_back([c, n](const VectorXd& v, bool h) { return scatter(c, v, h, n); });
  }

  BarrierProblem main;
  main.objective = [obj = np.objective, n](const VectorXd& v, bool h) {
    return scatter(obj, v, h, n);
  };
  main.constraints = cons;

  if (!strictly_feasible(main, y)) {
    // Phase I over (y, s): minimize s s.t. F_i(y) <= s, s >= -1.
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : cons) worst = std::max(worst, c(y, false).value);
    if (!std::isfinite(worst)) throw ModelingError("constraint not finite at the start point");
    VectorXd z(n + 1);
    z.head(n) = y;
    z(n) = worst + 1.0;

    BarrierProblem phase1;
    phase1.objective = [n](const VectorXd& v, bool h) {
      Local out;
      out.value = v(n);
      out.grad = VectorXd::Zero(n + 1);
      out.grad(n) = 1.0;
      if (h) out.hess = MatrixXd::Zero(n + 1, n + 1);
      return out;
    };
    for (const auto& c : cons) {
      phase1.constraints.push_back([c, n](const VectorXd& v, bool h) {
        const Local inner = c(v.head(n), h);
        Local out;
        out.value = inner.value - v(n);
        out.grad = VectorXd::Zero(n + 1);
        out.grad.head(n) = inner.grad;
        out.grad(n) = -1.0;
        if (h) {
          out.hess = MatrixXd::Zero(n + 1, n + 1);
          out.hess.topLeftCorner(n, n) = inner.hess;
        }
        return out;
      });
    }
    phase1.constraints.push_back([n](const VectorXd& v, bool h) {
      Local out;
      out.value = -1.0 - v(n);
      out.grad = VectorXd::Zero(n + 1);
      out.grad(n) = -1.0;
      if (h) out.hess = MatrixXd::Zero(n + 1, n + 1);
      return out;
    });
    phase1.done = [&main, n](const VectorXd& v) {
      return v(n) < 0.0 && strictly_feasible(main, v.head(n));
    };
    SolverOptions p1 = options;
    p1.tolerance = std::min(options.tolerance, 1e-10);
    const BarrierResult r1 = run_barrier(phase1, z, p1);
    sol.iterations += r1.newton_steps;
    y = r1.y.head(n);
    if (!strictly_feasible(main, y)) {
      sol.status = Status::kInfeasible;
      sol.x.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) sol.x[i] = std::exp(y(i));
      return sol;
    }
  }

  const BarrierResult r = run_barrier(main, y, options);
  sol.iterations += r.newton_steps;
  y = r.y;
  sol.x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) sol.x[i] = std::exp(y(i));

  const auto to_original = [&](double log_f0) {
    return np.maximize ? std::exp(-log_f0) : std::exp(log_f0);
  };
  for (double v : r.outer_values) sol.outer_objectives.push_back(to_original(v));
  sol.objective = to_original(main.objective(y, false).value);

  // KKT residual. The central-path multipliers 1 / (-t F_i) are refined by a
  // least-squares fit over the constraints they mark as active, since the
  // raw central-path residual is dominated by rounding in the steep barrier
  // directions.
  const VectorXd grad0 = main.objective(y, false).grad;
  std::vector<Local> evals;
  for (const auto& c : cons) evals.push_back(c(y, false));
  VectorXd kkt = grad0;
  if (r.t > 0.0 && !evals.empty()) {
    VectorXd lam(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) lam(i) = 1.0 / (-r.t * evals[i].value);
    VectorXd central = grad0;
    for (std::size_t i = 0; i < evals.size(); ++i) central += lam(i) * evals[i].grad;
    kkt = central;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (lam(i) > 1e-8 * (1.0 + lam.maxCoeff())) active.push_back(i);
    }
    if (!active.empty()) {
      MatrixXd J(n, static_cast<Eigen::Index>(active.size()));
      for (std::size_t a = 0; a < active.size(); ++a) J.col(a) = evals[active[a]].grad;
      const VectorXd fit = J.colPivHouseholderQr().solve(-grad0);
      if (fit.allFinite() && fit.minCoeff() >= 0.0) {
        const VectorXd refined = grad0 + J * fit;
        if (refined.norm() < kkt.norm()) kkt = refined;
      }
    }
  }
  sol.kkt_residual = kkt.norm();
  sol.status = r.converged ? Status::kOptimal : Status::kMaxIterations;
  return sol;
}

std::string dump(const NormalizedProblem& problem) {
  std::string s = "(gp\n  (variables";
  for (const auto& name : problem.names) s += " " + name;
  s += ")\n  (minimize " + problem.objective.to_sexpr(problem.names) + ")";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    s += "\n  (constraint " + problem.constraint_names[i] + " (le1 " +
         problem.constraints[i].to_sexpr(problem.names) + "))";
  }
  return s + ")\n";
}

}  // namespace cfurllc::gp
