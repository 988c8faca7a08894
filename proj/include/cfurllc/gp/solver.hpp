#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfurllc/gp/expr.hpp"

namespace cfurllc::gp {

struct Constraint {
  std::string name;
  Expr lhs;
  Expr rhs;  // must be a monomial
};

// Variables are positive and referenced by index. Objective is either
// "maximize a monomial" or "minimize a generalized posynomial".
class Problem {
 public:
  int add_variable(std::string name);
  Expr var(int index) const { return Expr::variable(index); }
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  void maximize(Expr monomial);
  void minimize(Expr objective);
  // lhs <= rhs; rhs must be a monomial.
  void add_constraint(std::string name, Expr lhs, Expr rhs = Expr::constant(1.0));

  bool maximizing() const { return maximize_; }
  const std::optional<Expr>& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

 private:
  std::vector<std::string> names_;
  std::optional<Expr> objective_;
  bool maximize_ = false;
  std::vector<Constraint> constraints_;
};

// Log-transformed form: minimize ln f0(e^y) s.t. ln F_i(e^y) <= 0.
struct NormalizedProblem {
  std::vector<std::string> names;
  Expr objective;      // minimized; for a maximized monomial m this is 1/m
  bool maximize = false;
  std::vector<std::string> constraint_names;
  std::vector<Expr> constraints;  // each <= 1
};

// Throws ModelingError if the problem is not a valid generalized GP.
NormalizedProblem normalize(const Problem& problem);

enum class Status { kOptimal, kInfeasible, kMaxIterations };
const char* status_name(Status s);

struct SolverOptions {
  double tolerance = 1e-9;       // stop when (#constraints) / t < tolerance
  double t_initial = 1.0;
  double t_factor = 10.0;
  double armijo = 0.3;
  double shrink = 0.5;
  int max_newton_steps = 200;    // per centering step
  int max_outer_steps = 60;
};

struct Solution {
  Status status = Status::kMaxIterations;
  std::vector<double> x;
  double objective = 0.0;        // in the original sense (maximized or minimized value)
  double kkt_residual = 0.0;
  int iterations = 0;            // total Newton steps, phase I included
  std::vector<double> outer_objectives;
};

Solution solve(const Problem& problem, const SolverOptions& options = {},
               const std::optional<std::vector<double>>& start = std::nullopt);

// Plain-text dump of the normalized problem:
//   (gp (variables v...) (minimize E) (constraint NAME (le1 E)) ...)
// with E := (mono c (v a)...) | (sum E...) | (prod E...) | (pow E a)
std::string dump(const NormalizedProblem& problem);

}  // namespace cfurllc::gp
