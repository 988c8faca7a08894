#include <doctest.h>

#include <cmath>

#include "cfurllc/errors.hpp"
#include "cfurllc/gp/expr.hpp"
#include "cfurllc/gp/solver.hpp"
#include "cfurllc/selftest.hpp"

using namespace cfurllc;
using gp::Expr;

TEST_SUITE("gp") {
  TEST_CASE("monomials are linear in the log domain") {
    const Expr m = Expr::monomial(3.0, {{0, 2.0}, {1, -0.5}});
    CHECK(m.is_monomial());
    const std::vector<double> y{0.3, -1.2};
    const gp::LogEval e = m.evaluate_log(y);
    CHECK(e.value == doctest::Approx(std::log(3.0) + 2.0 * 0.3 + 0.5 * 1.2));
    CHECK(e.grad(0) == doctest::Approx(2.0));
    CHECK(e.grad(1) == doctest::Approx(-0.5));
    CHECK(e.hess.norm() == doctest::Approx(0.0));
    CHECK(m.monomial_coeff() == doctest::Approx(3.0));
  }

  TEST_CASE("classification and closure") {
    const Expr x = Expr::variable(0), y = Expr::variable(1);
    CHECK((x * y).is_monomial());
    CHECK((x + y).kind() == gp::ExprClass::kPosynomial);
    CHECK(gp::pow(x + y, 1.5).kind() == gp::ExprClass::kGeneralized);
    CHECK_THROWS_AS(gp::pow(x + y, -1.0), ModelingError);
    CHECK_THROWS_AS((x + y).monomial_coeff(), ModelingError);
    CHECK_THROWS_AS(Expr::monomial(-1.0, {}), ModelingError);
  }

  TEST_CASE("evaluate agrees with the log-domain value") {
    const Expr x = Expr::variable(0), y = Expr::variable(1), z = Expr::variable(2);
    const Expr e = gp::pow(x * y + 2.0 * z, 1.7) * (x + Expr::constant(3.0)) + y / z;
    const std::vector<double> xv{0.4, 2.5, 1.3};
    const std::vector<double> yv{std::log(0.4), std::log(2.5), std::log(1.3)};
    const double direct = std::pow(0.4 * 2.5 + 2.0 * 1.3, 1.7) * 3.4 + 2.5 / 1.3;
    CHECK(e.evaluate(xv) == doctest::Approx(direct));
    CHECK(std::exp(e.evaluate_log(yv, false).value) == doctest::Approx(direct));
  }

  TEST_CASE("maximize chi subject to chi <= 5") {
    gp::Problem p;
    const int c = p.add_variable("chi");
    p.maximize(p.var(c));
    p.add_constraint("cap", p.var(c), Expr::constant(5.0));
    const gp::Solution s = gp::solve(p);
    REQUIRE(s.status == gp::Status::kOptimal);
    CHECK(s.x[0] == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(s.objective == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(s.kkt_residual < 1e-6);
  }

  TEST_CASE("minimize x + 1/x") {
    gp::Problem p;
    const int x = p.add_variable("x");
    p.minimize(p.var(x) + gp::pow(p.var(x), -1.0));
    const gp::Solution s = gp::solve(p);
    REQUIRE(s.status == gp::Status::kOptimal);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("x + 1/x <= 2 is tight at x = 1") {
    gp::Problem p;
    const int x = p.add_variable("x");
    p.maximize(p.var(x));
    p.add_constraint("sym", p.var(x) + gp::pow(p.var(x), -1.0), Expr::constant(2.0));
    const gp::NormalizedProblem n = gp::normalize(p);
    REQUIRE(n.constraints.size() == 1);
    const std::vector<double> at_one{0.0};
    CHECK(n.constraints[0].evaluate_log(at_one).value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(n.constraints[0].evaluate_log(at_one).grad(0) == doctest::Approx(0.0));
    const std::vector<double> off{0.1};
    CHECK(n.constraints[0].evaluate_log(off).value > 0.0);
  }

  TEST_CASE("infeasible problems are reported") {
    gp::Problem p;
    const int x = p.add_variable("x");
    p.minimize(p.var(x));
    p.add_constraint("low", Expr::monomial(2.0, {{x, -1.0}}));
    p.add_constraint("high", p.var(x));
    CHECK(gp::solve(p).status == gp::Status::kInfeasible);
  }

  TEST_CASE("huge coefficients stay finite in log form") {
    gp::Problem p;
    const int x = p.add_variable("x");
    p.maximize(p.var(x));
    p.add_constraint("c", Expr::monomial_log(700.0, {{x, 1.0}}) + Expr::monomial_log(705.0, {{x, 2.0}}));
    const gp::Solution s = gp::solve(p);
    REQUIRE(s.status == gp::Status::kOptimal);
    // near x = e^-700 the quadratic term is e^-695, so the linear one binds
    CHECK(std::log(s.x[0]) == doctest::Approx(-700.0).epsilon(1e-8));
  }

  TEST_CASE("normalized dump lists every piece") {
    gp::Problem p;
    const int x = p.add_variable("x");
    const int y = p.add_variable("y");
    p.minimize(p.var(x) + p.var(y) / p.var(x));
    p.add_constraint("floor", Expr::monomial(2.0, {{y, -1.0}}));
    const std::string d = gp::dump(gp::normalize(p));
    CHECK(d.find("(variables x y)") != std::string::npos);
    CHECK(d.find("(constraint floor") != std::string::npos);
    CHECK(d.find("(minimize") != std::string::npos);
    CHECK_THROWS_AS(p.maximize(p.var(x) + p.var(y)), ModelingError);
  }

  TEST_CASE("self-test passes") {
    const SelftestReport r = run_gp_selftest(1);
    for (const SelftestCheck& c : r.checks) {
      INFO(c.name << ": " << c.detail);
      CHECK(c.passed);
    }
  }
}
