#include <doctest.h>

#include <cmath>

#include "cfurllc/approx.hpp"
#include "cfurllc/errors.hpp"
#include "cfurllc/rng.hpp"
#include "cfurllc/scenario.hpp"
#include "oracles.hpp"

using namespace cfurllc;

namespace {

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// G(x) written out from its definition.
double g_direct(double x) {
  const double u = 1.0 / x;
  return std::sqrt((2.0 * u + 1.0) / ((u + 1.0) * (u + 1.0)));
}

}  // namespace

TEST_SUITE("approx") {
  TEST_CASE("log lower bound") {
    const LogLowerCoeffs one = lemma2_coeffs(1.0);
    CHECK(one.rho == doctest::Approx(0.5));
    CHECK(one.delta == doctest::Approx(std::log(2.0)));
    const LogLowerCoeffs three = lemma2_coeffs(3.0);
    CHECK(three.rho == doctest::Approx(0.75));
    CHECK(three.delta == doctest::Approx(std::log(4.0) - 0.75 * std::log(3.0)));
    CounterRng rng(21, 0, 0);
    for (int i = 0; i < 1000; ++i) {
      const double xh = log_uniform(rng, 1e-4, 1e4);
      const double x = log_uniform(rng, 1e-4, 1e4);
      const LogLowerCoeffs c = lemma2_coeffs(xh);
      CHECK(std::log1p(x) - (c.rho * std::log(x) + c.delta) >= -1e-12);
      CHECK(c.rho * std::log(xh) + c.delta == doctest::Approx(std::log1p(xh)).epsilon(1e-12));
    }
  }

  TEST_CASE("dispersion-factor upper bound") {
    CHECK(g_bound_threshold() == doctest::Approx((std::sqrt(17.0) - 3.0) / 4.0));
    CHECK(dispersion_factor(1.0) == doctest::Approx(std::sqrt(3.0) / 2.0));
    const LogUpperCoeffs one = lemma3_coeffs(1.0);
    CHECK(one.delta_tilde == doctest::Approx(std::sqrt(3.0) / 2.0));
    const LogUpperCoeffs two = lemma3_coeffs(2.0);
    CounterRng rng(22, 0, 0);
    for (int i = 0; i < 1000; ++i) {
      const double x = log_uniform(rng, g_bound_threshold(), 1e4);
      CHECK(dispersion_factor(x) == doctest::Approx(g_direct(x)).epsilon(1e-12));
      CHECK(dispersion_factor(x) <= two.rho_tilde * std::log(x) + two.delta_tilde + 1e-12);
    }
    for (int i = 0; i <= 200; ++i) {
      const double xh = g_bound_threshold() * std::pow(1e5, i / 200.0);
      CHECK(lemma3_coeffs(xh).rho_tilde >= 0.0);
    }
    CHECK_THROWS_AS(lemma3_coeffs(0.2), DomainError);
    const LogApproxCoeffs clamped = log_approx_coeffs(0.1);
    CHECK(clamped.clamped);
    CHECK_FALSE(log_approx_coeffs(5.0).clamped);
  }

  TEST_CASE("MRC numerator monomial bound") {
    Eigen::MatrixXd b(1, 2);
    b << 0.7, 3.0;
    const LargeScaleModel single = make_model(b, 1.0, 4, {1.0, 1.0}, {1.0, 1.0});
    const MonomialApproxMrc s = theorem3_coeffs(single, 0.4, 1);
    CHECK(s.a == doctest::Approx(1.0));
    CHECK(s.c == doctest::Approx(std::log(2.0 * 9.0)));

    CounterRng rng(23, 0, 0);
    const Eigen::MatrixXd beta = oracle::random_beta(rng, 5, 3);
    const LargeScaleModel m = make_model(beta, 1.0, 8, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
    for (int i = 0; i < 1000; ++i) {
      const int k = i % 3;
      const double ph = log_uniform(rng, 1e-3, 10.0);
      const double p = log_uniform(rng, 1e-3, 10.0);
      const MonomialApproxMrc c = theorem3_coeffs(m, ph, k);
      const double exact = std::exp(log_theta(m, p, k));
      CHECK(exact - std::exp(c.c + c.a * std::log(p)) >= -1e-9 * exact);
      CHECK(c.c + c.a * std::log(ph) == doctest::Approx(log_theta(m, ph, k)).epsilon(1e-12));
      // tangency in log coordinates
      const double h = 1e-5;
      const double fd = (log_theta(m, ph * std::exp(h), k) - log_theta(m, ph * std::exp(-h), k)) / (2 * h);
      CHECK(std::abs(fd - c.a) < 1e-6);
    }
  }

  TEST_CASE("FZF numerator monomial bound") {
    CounterRng rng(24, 0, 0);
    const Eigen::MatrixXd beta = oracle::random_beta(rng, 4, 3);
    const LargeScaleModel m = make_model(beta, 1.0, 8, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
    for (int i = 0; i < 1000; ++i) {
      const int k = i % 3;
      std::vector<double> ph(3), p(3);
      for (int j = 0; j < 3; ++j) {
        ph[j] = log_uniform(rng, 1e-3, 10.0);
        p[j] = log_uniform(rng, 1e-3, 10.0);
      }
      const MonomialApproxFzf c = theorem4_coeffs(m, ph, k);
      double lb = c.d, at_hat = c.d;
      for (int j = 0; j < 3; ++j) {
        lb += c.b[j] * std::log(p[j]);
        at_hat += c.b[j] * std::log(ph[j]);
      }
      const double exact = std::exp(log_fzf_numerator(m, p, k));
      CHECK(exact - std::exp(lb) >= -1e-9 * exact);
      CHECK(at_hat == doctest::Approx(log_fzf_numerator(m, ph, k)).epsilon(1e-12));
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-5;
        auto up = ph, dn = ph;
        up[j] *= std::exp(h);
        dn[j] *= std::exp(-h);
        const double fd = (log_fzf_numerator(m, up, k) - log_fzf_numerator(m, dn, k)) / (2 * h);
        CHECK(std::abs(fd - c.b[j]) < 1e-6);
      }
    }
  }
}
