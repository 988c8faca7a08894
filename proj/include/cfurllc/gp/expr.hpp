#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cfurllc::gp {

// Curvature class of an expression over positive variables.
enum class ExprClass { kMonomial, kPosynomial, kGeneralized };

// Log-domain evaluation of a node on its variable support: value = ln f(e^y),
// grad and hess are taken w.r.t. the support variables y_j = ln x_j.
struct LogEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

struct Node;

// Immutable handle to a generalized-posynomial DAG node. Sub-expressions are
// shared, never copied. Products of posynomials stay products: nothing is
// ever expanded into a sum of monomials.
class Expr {
 public:
  static Expr constant(double value);
  static Expr variable(int index);
  // coeff * prod x_i^a_i; exponents may be any real numbers.
  static Expr monomial(double coeff, std::vector<std::pair<int, double>> exponents);
  // Same with the coefficient given as ln c (no overflow for huge gains).
  static Expr monomial_log(double log_coeff, std::vector<std::pair<int, double>> exponents);

  ExprClass kind() const;
  bool is_monomial() const { return kind() == ExprClass::kMonomial; }
  // Sorted variable indices the expression depends on.
  const std::vector<int>& support() const;

  // Direct evaluation at positive x (x-domain, no logs).
  double evaluate(std::span<const double> x) const;
  // ln f(e^y) with gradient/Hessian on support(). y is the full vector.
  LogEval evaluate_log(std::span<const double> y, bool with_hessian = true) const;

  // Monomial parameters; ModelingError unless is_monomial().
  double monomial_coeff() const;
  double monomial_log_coeff() const;
  const std::vector<std::pair<int, double>>& monomial_exponents() const;

  std::string to_sexpr(std::span<const std::string> names = {}) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator*(double c, const Expr& a);
  friend Expr operator/(const Expr& a, const Expr& monomial);

  const Node& node() const { return *node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend Expr pow(const Expr& base, double exponent);
  friend Expr sum(std::span<const Expr> terms);
  friend Expr product(std::span<const Expr> factors);
};

// base^exponent. Any real exponent for monomials; exponent > 0 otherwise.
Expr pow(const Expr& base, double exponent);
Expr sum(std::span<const Expr> terms);
Expr product(std::span<const Expr> factors);

struct Node {
  enum class Op { kMonomial, kSum, kProduct, kPower };
  Op op = Op::kMonomial;
  ExprClass cls = ExprClass::kMonomial;
  double log_coeff = 0.0;                          // kMonomial, ln c
  std::vector<std::pair<int, double>> exponents;   // kMonomial, sorted by index
  double power = 1.0;                              // kPower
  std::vector<Expr> children;                      // kSum / kProduct / kPower
  std::vector<int> support;
  std::vector<std::vector<int>> child_positions;   // child support -> our support slot
};

}  // namespace cfurllc::gp
