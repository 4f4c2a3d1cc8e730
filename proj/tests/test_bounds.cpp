#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "ckl/bounds.hpp"
#include "ckl/losses.hpp"

using namespace ckl;
using doctest::Approx;

namespace {

constexpr double kE = std::numbers::e;

TopOneDistribution pn(double a, double b) { return {{a, b}, {true, false}}; }

}  // namespace

TEST_CASE("jensen_min values") {
  CHECK(jensen_min(1.0) == Approx(-0.53074).epsilon(1e-5));
  CHECK(std::abs(jensen_min(2.0) - (-2.0 * std::log2(kE) / kE)) <= 1e-12);
  CHECK(jensen_min(4.0) == Approx(-2.0));
  CHECK(jensen_min(3.0) < jensen_min(2.0));
  CHECK_THROWS(jensen_min(0.5));
}

TEST_CASE("jensen_min is the minimum over a fine grid") {
  for (double s : {1.0, 1.5, 2.0, 2.5, 3.0, 5.0}) {
    double best = 0.0;
    for (int i = 1; i <= 100000; ++i) {
      const double u = i / 100000.0;
      best = std::min(best, u * std::log2(u / s));
    }
    CHECK(jensen_min(s) <= best + 1e-12);
    CHECK(jensen_min(s) == Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("constant_lower_bound examples") {
  const std::vector<double> one{0.3};
  CHECK(constant_lower_bound(one, 5.0) == Approx(0.3 * (-1.0 + std::log(0.3)) - 10.0 / kE).epsilon(1e-14));
  CHECK(constant_lower_bound(one, 5.0) == Approx(-4.33998).epsilon(1e-5));
  CHECK(constant_lower_bound(std::vector<double>{}, 5.0) == Approx(-10.0 / kE));
  CHECK(constant_lower_bound(std::vector<double>{0.0}, 1.0) == Approx(-0.73576).epsilon(1e-5));
}

TEST_CASE("eq_cklbound_rhs golden value") {
  CklHyperparams hp;
  hp.gamma = 1.0;
  hp.alpha = 0.0;
  const double kl = 0.7 * std::log(1.4) + 0.3 * std::log(0.6);
  const double hand = kl + 0.3 * 0.5 * std::log(0.5) + 0.5 * std::log(0.5);
  const double rhs = eq_cklbound_rhs(pn(0.7, 0.3), pn(0.5, 0.5), std::vector<double>{0.0}, hp);
  CHECK(rhs == Approx(hand).epsilon(1e-13));
  CHECK(rhs == Approx(-0.3682628).epsilon(1e-6));
}

TEST_CASE("p equal to q satisfies every bound") {
  CklHyperparams hp;
  const auto d = TopOneDistribution{{0.4, 0.2, 0.3, 0.1}, label_mask(2, 2)};
  const auto r = evaluate_bound_chain(d, d, std::vector<double>{0.5, -0.5}, hp);
  CHECK(r.ckl_value == 0.0);
  CHECK(r.rhs_eq_cklbound <= 0.0);
  CHECK(r.violations == 0);
  for (const auto& c : r.intermediate_checks) CHECK(c.holds);
}

TEST_CASE("constant bound ignores the student") {
  std::mt19937_64 rng(41);
  std::exponential_distribution<double> e(1.0);
  const std::vector<double> neg_p{0.1, 0.25, 0.05};
  const double ref = constant_lower_bound(neg_p, 3.0);
  CklHyperparams hp;
  hp.gamma = 3.0;
  hp.alpha = 0.0;
  TopOneDistribution teacher{{0.3, 0.3, 0.1, 0.25, 0.05}, label_mask(2, 3)};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> q(5);
    double t = 0.0;
    for (double& x : q) t += (x = e(rng));
    for (double& x : q) x /= t;
    const auto r = evaluate_bound_chain(teacher, TopOneDistribution{q, label_mask(2, 3)},
                                        std::vector<double>{0.0, 0.0, 0.0}, hp);
    CHECK(std::abs(r.constant_bound - ref) <= 1e-12);
  }
}

TEST_CASE("monte-carlo chain has no violations for s up to two") {
  BoundsOptions opts;
  opts.samples = 20000;
  opts.threads = 1;
  const auto r = verify_bound_chain(opts);
  CHECK(r.samples_tested == 20000);
  CHECK(r.violations == 0);
  for (const auto& t : r.tallies) {
    INFO(t.name);
    if (t.asserted) CHECK(t.violations == 0);
  }
  for (const auto& p : r.equality_probes) {
    INFO(p.name);
    CHECK(p.holds);
    CHECK(std::abs(p.lhs - p.rhs) <= 1e-8);
  }
}

TEST_CASE("larger positive sets are tallied without being asserted") {
  BoundsOptions opts;
  opts.samples = 4000;
  opts.s_max = 6;
  opts.threads = 1;
  const auto r = verify_bound_chain(opts);
  CHECK(r.violations == 0);
  long unasserted = 0;
  for (const auto& t : r.tallies) {
    if (!t.asserted) unasserted += t.tested;
  }
  CHECK(unasserted > 0);
}

TEST_CASE("thread count does not change the report") {
  BoundsOptions opts;
  opts.samples = 3000;
  opts.threads = 1;
  const auto a = verify_bound_chain(opts);
  opts.threads = 3;
  const auto b = verify_bound_chain(opts);
  REQUIRE(a.tallies.size() == b.tallies.size());
  for (std::size_t i = 0; i < a.tallies.size(); ++i) {
    CHECK(a.tallies[i].tested == b.tallies[i].tested);
    CHECK(a.tallies[i].violations == b.tallies[i].violations);
    CHECK(a.tallies[i].min_slack == b.tallies[i].min_slack);
  }
}
