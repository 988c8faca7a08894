#include "cfurllc/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cfurllc/approx.hpp"
#include "cfurllc/fbl.hpp"
#include "cfurllc/gp/solver.hpp"
#include "cfurllc/rng.hpp"
#include "cfurllc/scenario.hpp"

namespace cfurllc {

bool SelftestReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.passed; });
}

namespace {

struct Term2 {
  double log_c, a, b;
  double log_at(double u, double v) const { return log_c + a * u + b * v; }
};

double log_posy(const std::vector<Term2>& terms, double u, double v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const Term2& t : terms) hi = std::max(hi, t.log_at(u, v));
  double s = 0.0;
  for (const Term2& t : terms) s += std::exp(t.log_at(u, v) - hi);
  return hi + std::log(s);
}

gp::Expr to_expr(const std::vector<Term2>& terms) {
  std::vector<gp::Expr> parts;
  for (const Term2& t : terms) parts.push_back(gp::Expr::monomial_log(t.log_c, {{0, t.a}, {1, t.b}}));
  return gp::sum(parts);
}

// min over a 1000 x 1000 log grid, then two zooms around the incumbent wide
// enough to follow a curved constraint boundary
double grid_minimum(const std::vector<Term2>& obj, const std::vector<Term2>& con, double half) {
  constexpr int kPts = 1000;
  double best = std::numeric_limits<double>::infinity();
  double bu = 0.0, bv = 0.0;
  double lo_u = -half, lo_v = -half, span = 2.0 * half;
  for (int level = 0; level < 3; ++level) {
    const double h = span / (kPts - 1);
    for (int i = 0; i < kPts; ++i) {
      const double u = lo_u + i * h;
      for (int j = 0; j < kPts; ++j) {
        const double v = lo_v + j * h;
        if (log_posy(con, u, v) > 0.0) continue;
        const double f = log_posy(obj, u, v);
        if (f < best) {
          best = f;
          bu = u;
          bv = v;
        }
      }
    }
    lo_u = bu - 25.0 * h;
    lo_v = bv - 25.0 * h;
    span = 50.0 * h;
  }
  return std::exp(best);
}

SelftestCheck grid_oracle_check(std::uint64_t seed, int count) {
  CounterRng rng(seed, 11, 0);
  double worst = 0.0;
  int done = 0;
  for (int attempt = 0; done < count && attempt < 20 * count; ++attempt) {
    std::vector<Term2> obj, con;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int j = 0; j < 3; ++j) {
      const double ang = phase + 2.0 * std::numbers::pi * j / 3.0 + rng.uniform(-0.3, 0.3);
      const double r = rng.uniform(0.5, 2.0);
      obj.push_back({rng.uniform(-1.0, 1.0), r * std::cos(ang), r * std::sin(ang)});
    }
    for (int j = 0; j < 2; ++j) {
      con.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    }
    gp::Problem p;
    p.add_variable("x");
    p.add_variable("y");
    p.minimize(to_expr(obj));
    p.add_constraint("c", to_expr(con));
    const gp::Solution s = gp::solve(p);
    if (s.status != gp::Status::kOptimal) continue;
    if (std::abs(std::log(s.x[0])) > 4.0 || std::abs(std::log(s.x[1])) > 4.0) continue;
    const double grid = grid_minimum(obj, con, 6.0);
    worst = std::max(worst, std::abs(s.objective - grid) / grid);
    ++done;
  }
  std::ostringstream os;
  os << done << " problems, worst relative gap " << worst;
  return {"gp grid oracle", done == count && worst < 1e-3, os.str()};
}

gp::Expr random_dag(CounterRng& rng, int depth) {
  const auto mono = [&] {
    return gp::Expr::monomial(rng.uniform(0.2, 3.0), {{0, rng.uniform(-2.0, 2.0)},
                                                      {1, rng.uniform(-2.0, 2.0)},
                                                      {2, rng.uniform(-2.0, 2.0)}});
  };
  if (depth == 0) return mono();
  const gp::Expr a = random_dag(rng, depth - 1);
  const gp::Expr b = random_dag(rng, depth - 1);
  switch (static_cast<int>(rng.uniform(0.0, 3.0))) {
    case 0:
      return a + b + mono();
    case 1:
      return a * b;
    default:
      return gp::pow(a + b, rng.uniform(0.5, 2.5));
  }
}

SelftestCheck gradient_check(std::uint64_t seed, int count) {
  CounterRng rng(seed, 12, 0);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const gp::Expr e = random_dag(rng, 3);
    std::vector<double> y{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const gp::LogEval ev = e.evaluate_log(y, true);
    const auto& sup = e.support();
    constexpr double h = 1e-5;
    for (std::size_t a = 0; a < sup.size(); ++a) {
      auto yp = y, ym = y;
      yp[sup[a]] += h;
      ym[sup[a]] -= h;
      const double fd = (e.evaluate_log(yp, false).value - e.evaluate_log(ym, false).value) / (2 * h);
      worst = std::max(worst, std::abs(fd - ev.grad(a)) / std::max(1.0, std::abs(fd)));
      const gp::LogEval gp_ = e.evaluate_log(yp, false);
      const gp::LogEval gm = e.evaluate_log(ym, false);
      for (std::size_t b = 0; b < sup.size(); ++b) {
        const double fdh = (gp_.grad(b) - gm.grad(b)) / (2 * h);
        worst = std::max(worst, std::abs(fdh - ev.hess(a, b)) / std::max(1.0, std::abs(fdh)));
      }
    }
  }
  std::ostringstream os;
  os << count << " DAGs, worst relative derivative error " << worst;
  return {"log-domain derivatives", worst < 1e-6, os.str()};
}

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

SelftestCheck tangent_bound_check(std::uint64_t seed, int draws) {
  CounterRng rng(seed, 13, 0);
  double worst = 0.0;
  const double thr = g_bound_threshold();
  for (int i = 0; i < draws; ++i) {
    const double xh = log_uniform(rng, 1e-3, 1e3);
    const double x = log_uniform(rng, 1e-3, 1e3);
    const LogLowerCoeffs l = lemma2_coeffs(xh);
    worst = std::max(worst, (l.rho * std::log(x) + l.delta - std::log1p(x)) / std::log1p(x));

    const double xh3 = log_uniform(rng, thr, 1e3);
    const double x3 = log_uniform(rng, thr, 1e3);
    const LogUpperCoeffs u = lemma3_coeffs(xh3);
    const double g = dispersion_factor(x3);
    worst = std::max(worst, (g - (u.rho_tilde * std::log(x3) + u.delta_tilde)) / g);
  }

  Eigen::MatrixXd beta(4, 3);
  for (int m = 0; m < 4; ++m) {
    for (int k = 0; k < 3; ++k) beta(m, k) = log_uniform(rng, 1e-2, 1e2);
  }
  const LargeScaleModel model = make_model(beta, 1.0, 8, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
  for (int i = 0; i < draws; ++i) {
    const int k = static_cast<int>(rng.uniform(0.0, 3.0));
    const double ph = log_uniform(rng, 1e-3, 10.0);
    const double p = log_uniform(rng, 1e-3, 10.0);
    const MonomialApproxMrc a = theorem3_coeffs(model, ph, k);
    const double exact = log_theta(model, p, k);
    worst = std::max(worst, std::expm1((a.c + a.a * std::log(p)) - exact));

    std::vector<double> pv(3), phv(3);
    for (int j = 0; j < 3; ++j) {
      pv[j] = log_uniform(rng, 1e-3, 10.0);
      phv[j] = log_uniform(rng, 1e-3, 10.0);
    }
    const MonomialApproxFzf b = theorem4_coeffs(model, phv, k);
    double lb = b.d;
    for (int j = 0; j < 3; ++j) lb += b.b[j] * std::log(pv[j]);
    worst = std::max(worst, std::expm1(lb - log_fzf_numerator(model, pv, k)));
  }
  std::ostringstream os;
  os << draws << " draws per bound, worst relative violation " << worst;
  return {"tangent bounds", worst <= 1e-9, os.str()};
}

}  // namespace

SelftestReport run_gp_selftest(std::uint64_t seed, std::ostream* dump) {
  SelftestReport r;
  r.checks.push_back(gradient_check(seed, 200));
  r.checks.push_back(grid_oracle_check(seed, 10));
  r.checks.push_back(tangent_bound_check(seed, 1000));

  gp::Problem p;
  const int x = p.add_variable("x");
  const int y = p.add_variable("y");
  p.minimize(gp::Expr::variable(x) + gp::pow(gp::Expr::variable(x), -1.0) * gp::Expr::variable(y));
  p.add_constraint("floor", gp::Expr::monomial(2.0, {{y, -1.0}}));
  const gp::Solution s = gp::solve(p);
  const bool ok = s.status == gp::Status::kOptimal && std::abs(s.objective - 2.0 * std::sqrt(2.0)) < 1e-6;
  r.checks.push_back({"sample problem", ok,
                      "objective " + std::to_string(s.objective) + " (expected 2 sqrt 2)"});
  if (dump) *dump << gp::dump(gp::normalize(p));
  return r;
}

}  // namespace cfurllc
