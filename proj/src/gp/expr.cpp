#include "cfurllc/gp/expr.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "cfurllc/errors.hpp"

namespace cfurllc::gp {

namespace {

std::vector<int> merge_supports(const std::vector<Expr>& children) {
  std::vector<int> out;
  for (const Expr& c : children) out.insert(out.end(), c.support().begin(), c.support().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void wire_children(Node& n) {
  n.support = merge_supports(n.children);
  n.child_positions.clear();
  for (const Expr& c : n.children) {
    std::vector<int> pos;
    for (int v : c.support()) {
      pos.push_back(static_cast<int>(std::lower_bound(n.support.begin(), n.support.end(), v) -
                                     n.support.begin()));
    }
    n.child_positions.push_back(std::move(pos));
  }
}

ExprClass widest(const std::vector<Expr>& children) {
  ExprClass cls = ExprClass::kMonomial;
  for (const Expr& c : children) cls = std::max(cls, c.kind());
  return cls;
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Expr Expr::monomial(double coeff, std::vector<std::pair<int, double>> exponents) {
  if (!(coeff > 0.0) || !std::isfinite(coeff)) {
    throw ModelingError("monomial coefficient must be positive and finite");
  }
  return monomial_log(std::log(coeff), std::move(exponents));
}

Expr Expr::monomial_log(double log_coeff, std::vector<std::pair<int, double>> exponents) {
  if (!std::isfinite(log_coeff)) throw ModelingError("monomial log-coefficient must be finite");
  std::map<int, double> merged;
  for (const auto& [idx, a] : exponents) {
    if (idx < 0) throw ModelingError("negative variable index");
    if (!std::isfinite(a)) throw ModelingError("monomial exponent must be finite");
    merged[idx] += a;
  }
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kMonomial;
  n->cls = ExprClass::kMonomial;
  n->log_coeff = log_coeff;
  for (const auto& [idx, a] : merged) {
    if (a != 0.0) {
      n->exponents.emplace_back(idx, a);
      n->support.push_back(idx);
    }
  }
  return Expr(std::move(n));
}

Expr Expr::constant(double value) { return monomial(value, {}); }

Expr Expr::variable(int index) { return monomial(1.0, {{index, 1.0}}); }

ExprClass Expr::kind() const { return node_->cls; }

const std::vector<int>& Expr::support() const { return node_->support; }

double Expr::monomial_coeff() const { return std::exp(monomial_log_coeff()); }

double Expr::monomial_log_coeff() const {
  if (!is_monomial() || node_->op != Node::Op::kMonomial) {
    throw ModelingError("expression is not a monomial");
  }
  return node_->log_coeff;
}

const std::vector<std::pair<int, double>>& Expr::monomial_exponents() const {
  if (!is_monomial() || node_->op != Node::Op::kMonomial) {
    throw ModelingError("expression is not a monomial");
  }
  return node_->exponents;
}

Expr sum(std::span<const Expr> terms) {
  if (terms.empty()) throw ModelingError("empty sum");
  if (terms.size() == 1) return terms.front();
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kSum;
  for (const Expr& t : terms) {
    // flatten nested sums so log-sum-exp sees every term at once
    if (t.node().op == Node::Op::kSum) {
      n->children.insert(n->children.end(), t.node().children.begin(), t.node().children.end());
    } else {
      n->children.push_back(t);
    }
  }
  const ExprClass w = widest(n->children);
  n->cls = w == ExprClass::kMonomial ? ExprClass::kPosynomial : w;
  wire_children(*n);
  return Expr(std::move(n));
}

Expr product(std::span<const Expr> factors) {
  if (factors.empty()) throw ModelingError("empty product");
  // fold all monomial factors into one
  double log_coeff = 0.0;
  std::vector<std::pair<int, double>> exps;
  std::vector<Expr> others;
  for (const Expr& f : factors) {
    if (f.is_monomial()) {
      log_coeff += f.monomial_log_coeff();
      exps.insert(exps.end(), f.monomial_exponents().begin(), f.monomial_exponents().end());
    } else if (f.node().op == Node::Op::kProduct) {
      for (const Expr& g : f.node().children) {
        if (g.is_monomial()) {
          log_coeff += g.monomial_log_coeff();
          exps.insert(exps.end(), g.monomial_exponents().begin(), g.monomial_exponents().end());
        } else {
          others.push_back(g);
        }
      }
    } else {
      others.push_back(f);
    }
  }
  Expr mono = Expr::monomial_log(log_coeff, std::move(exps));
  if (others.empty()) return mono;
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kProduct;
  if (!(mono.monomial_log_coeff() == 0.0 && mono.support().empty())) n->children.push_back(mono);
  n->children.insert(n->children.end(), others.begin(), others.end());
  if (n->children.size() == 1) return n->children.front();
  n->cls = ExprClass::kGeneralized;
  wire_children(*n);
  return Expr(std::move(n));
}

Expr pow(const Expr& base, double exponent) {
  if (!std::isfinite(exponent)) throw ModelingError("non-finite exponent");
  if (base.is_monomial()) {
    std::vector<std::pair<int, double>> exps = base.monomial_exponents();
    for (auto& e : exps) e.second *= exponent;
    return Expr::monomial_log(base.monomial_log_coeff() * exponent, std::move(exps));
  }
  if (!(exponent > 0.0)) {
    throw ModelingError("only positive powers of a posynomial stay generalized posynomials");
  }
  if (exponent == 1.0) return base;
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kPower;
  n->power = exponent;
  n->children.push_back(base);
  n->cls = ExprClass::kGeneralized;
  wire_children(*n);
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  const Expr terms[] = {a, b};
  return sum(terms);
}

Expr operator*(const Expr& a, const Expr& b) {
  const Expr factors[] = {a, b};
  return product(factors);
}

Expr operator*(double c, const Expr& a) { return Expr::constant(c) * a; }

Expr operator/(const Expr& a, const Expr& monomial) {
  if (!monomial.is_monomial()) throw ModelingError("can only divide by a monomial");
  return a * pow(monomial, -1.0);
}

double Expr::evaluate(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.op) {
    case Node::Op::kMonomial: {
      double v = n.log_coeff;
      for (const auto& [idx, a] : n.exponents) v += a * std::log(x[idx]);
      return std::exp(v);
    }
    case Node::Op::kSum: {
      double v = 0.0;
      for (const Expr& c : n.children) v += c.evaluate(x);
      return v;
    }
    case Node::Op::kProduct: {
      double v = 1.0;
      for (const Expr& c : n.children) v *= c.evaluate(x);
      return v;
    }
    case Node::Op::kPower:
      return std::pow(n.children.front().evaluate(x), n.power);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

LogEval Expr::evaluate_log(std::span<const double> y, bool with_hessian) const {
  const Node& n = *node_;
  const auto dim = static_cast<Eigen::Index>(n.support.size());
  LogEval out;
  out.grad = Eigen::VectorXd::Zero(dim);
  if (with_hessian) out.hess = Eigen::MatrixXd::Zero(dim, dim);

  switch (n.op) {
    case Node::Op::kMonomial: {
      out.value = n.log_coeff;
      for (std::size_t i = 0; i < n.exponents.size(); ++i) {
        out.value += n.exponents[i].second * y[n.exponents[i].first];
        out.grad(static_cast<Eigen::Index>(i)) = n.exponents[i].second;
      }
      return out;
    }
    case Node::Op::kSum: {
      std::vector<LogEval> parts;
      parts.reserve(n.children.size());
      double hi = -std::numeric_limits<double>::infinity();
      for (const Expr& c : n.children) {
        parts.push_back(c.evaluate_log(y, with_hessian));
        hi = std::max(hi, parts.back().value);
      }
      double total = 0.0;
      std::vector<double> w(parts.size());
      for (std::size_t i = 0; i < parts.size(); ++i) {
        w[i] = std::exp(parts[i].value - hi);
        total += w[i];
      }
      out.value = hi + std::log(total);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        w[i] /= total;
        const auto& pos = n.child_positions[i];
        for (std::size_t a = 0; a < pos.size(); ++a) out.grad(pos[a]) += w[i] * parts[i].grad(a);
      }
      if (with_hessian) {
        // sum_i w_i (H_i + g_i g_i^T) - g g^T
        for (std::size_t i = 0; i < parts.size(); ++i) {
          const auto& pos = n.child_positions[i];
          for (std::size_t a = 0; a < pos.size(); ++a) {
            for (std::size_t b = 0; b < pos.size(); ++b) {
              out.hess(pos[a], pos[b]) +=
                  w[i] * (parts[i].hess(a, b) + parts[i].grad(a) * parts[i].grad(b));
            }
          }
        }
        out.hess.noalias() -= out.grad * out.grad.transpose();
      }
      return out;
    }
    case Node::Op::kProduct:
    case Node::Op::kPower: {
      const double scale = n.op == Node::Op::kPower ? n.power : 1.0;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const LogEval part = n.children[i].evaluate_log(y, with_hessian);
        out.value += scale * part.value;
        const auto& pos = n.child_positions[i];
        for (std::size_t a = 0; a < pos.size(); ++a) {
          out.grad(pos[a]) += scale * part.grad(a);
          if (with_hessian) {
            for (std::size_t b = 0; b < pos.size(); ++b) {
              out.hess(pos[a], pos[b]) += scale * part.hess(a, b);
            }
          }
        }
      }
      return out;
    }
  }
  return out;
}

std::string Expr::to_sexpr(std::span<const std::string> names) const {
  const Node& n = *node_;
  const auto var = [&](int idx) {
    return idx < static_cast<int>(names.size()) ? names[idx] : "x" + std::to_string(idx);
  };
  std::string s;
  switch (n.op) {
    case Node::Op::kMonomial:
      s = "(mono " + number(std::exp(n.log_coeff));
      for (const auto& [idx, a] : n.exponents) s += " (" + var(idx) + " " + number(a) + ")";
      return s + ")";
    case Node::Op::kSum:
      s = "(sum";
      break;
    case Node::Op::kProduct:
      s = "(prod";
      break;
    case Node::Op::kPower:
      return "(pow " + n.children.front().to_sexpr(names) + " " + number(n.power) + ")";
  }
  for (const Expr& c : n.children) s += " " + c.to_sexpr(names);
  return s + ")";
}

}  // namespace cfurllc::gp
