#include <cmath>
#include <random>

#include "doctest.h"

#include "ckl/beta.hpp"
#include "ckl/losses.hpp"

using namespace ckl;
using doctest::Approx;

namespace {

TopOneDistribution dist(std::vector<double> p, std::size_t s) {
  return {std::move(p), label_mask(s, 0)};
}

TopOneDistribution pn(double a, double b) { return {{a, b}, {true, false}}; }

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double t = 0.0;
  for (double& x : v) t += (x = e(rng));
  for (double& x : v) x /= t;
  return v;
}

}  // namespace

TEST_CASE("kl_loss examples") {
  CHECK(kl_loss(pn(0.3, 0.7), pn(0.3, 0.7)) == 0.0);
  const double hand = 0.7 * std::log(1.4) + 0.3 * std::log(0.6);
  CHECK(kl_loss(pn(0.7, 0.3), pn(0.5, 0.5)) == Approx(hand).epsilon(1e-14));
  CHECK(kl_loss(pn(0.7, 0.3), pn(0.5, 0.5)) == Approx(0.082282).epsilon(1e-5));
  CHECK(kl_loss(pn(1.0, 0.0), pn(0.5, 0.5)) == Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("kl_loss rejects misaligned inputs") {
  CHECK_THROWS(kl_loss(pn(0.5, 0.5), TopOneDistribution{{0.2, 0.3, 0.5}, {true, false, false}}));
  CHECK_THROWS(kl_loss(pn(0.5, 0.5), TopOneDistribution{{0.5, 0.5}, {false, true}}));
}

TEST_CASE("ckl_weights examples") {
  CklHyperparams hp;
  auto w = ckl_weights(TopOneDistribution{{1.0, 0.0}, {true, false}}, std::vector<double>{0.0}, hp);
  CHECK(w.positive_weights[0] == 0.0);
  CHECK(w.negative_weights[0] == 0.0);

  auto half = ckl_weights(pn(0.5, 0.5), std::vector<double>{0.0}, hp);
  CHECK(half.negative_weights[0] == Approx(0.03125));
  auto biased = ckl_weights(pn(0.5, 0.5), std::vector<double>{0.5}, hp);
  CHECK(biased.negative_weights[0] == Approx(std::pow(0.5, 4.5)));
  CHECK(biased.negative_weights[0] == Approx(0.044194).epsilon(1e-5));

  CHECK_THROWS_WITH(ckl_weights(pn(0.5, 0.5), std::vector<double>{4.5}, hp), "exponent below one");
  CHECK_THROWS(ckl_weights(pn(0.5, 0.5), std::vector<double>{}, hp));
}

TEST_CASE("ckl_loss examples") {
  CklHyperparams hp;
  CHECK(ckl_loss(pn(0.4, 0.6), pn(0.4, 0.6), std::vector<double>{0.3}, hp) == 0.0);

  const double kl = 0.7 * std::log(1.4) + 0.3 * std::log(0.6);
  hp.gamma = 1.0;
  hp.alpha = 0.0;
  const double g1 = ckl_loss(pn(0.7, 0.3), pn(0.5, 0.5), std::vector<double>{0.0}, hp);
  CHECK(g1 == Approx(0.5 * kl).epsilon(1e-14));
  CHECK(g1 == Approx(0.041139).epsilon(1e-4));

  hp.gamma = 5.0;
  const double g5 = ckl_loss(pn(0.7, 0.3), pn(0.5, 0.5), std::vector<double>{0.0}, hp);
  CHECK(g5 == Approx(0.03125 * kl).epsilon(1e-14));
  CHECK(g5 == Approx(0.002571).epsilon(1e-3));
}

TEST_CASE("ckl_loss is finite at the probability boundary") {
  CklHyperparams hp;
  const double v = ckl_loss(TopOneDistribution{{0.5, 0.5}, {true, false}},
                            TopOneDistribution{{1.0, 0.0}, {true, false}}, std::vector<double>{0.0}, hp);
  CHECK(std::isfinite(v));
}

TEST_CASE("bkl_loss examples") {
  BklParams zero{0.0};
  CHECK(bkl_loss(pn(0.7, 0.3), pn(0.5, 0.5), zero) == kl_loss(pn(0.7, 0.3), pn(0.5, 0.5)));

  BklParams p{0.1};
  const double reg = 0.1 * (0.5 * std::log(0.5) + 0.5);
  CHECK(bkl_loss(pn(0.5, 0.5), pn(0.5, 0.5), p) == Approx(reg).epsilon(1e-14));
  CHECK(bkl_loss(pn(0.5, 0.5), pn(0.5, 0.5), p) == Approx(0.015343).epsilon(1e-4));
  CHECK(bkl_loss(pn(0.7, 0.3), pn(0.5, 0.5), p) == Approx(0.097625).epsilon(1e-4));

  CHECK_THROWS(BklParams{-1.0}.validate());
}

TEST_CASE("margin_mse examples") {
  std::vector<ScorePair> same{{3.0, 1.0, 5.0, 3.0}};
  CHECK(margin_mse_loss(same) == 0.0);
  std::vector<ScorePair> one{{2.0, 0.0, 1.0, 0.0}};
  CHECK(margin_mse_loss(one) == Approx(1.0));
  std::vector<ScorePair> two{{2.0, 0.0, 1.0, 0.0}, {1.0, 0.0, 1.0, 0.0}};
  CHECK(margin_mse_loss(two) == Approx(0.5));
  CHECK_THROWS(margin_mse_loss(std::vector<ScorePair>{}));

  DistillationInstance inst{"q", {{"a", 2.0, 1.0}}, {{"b", 0.0, 0.0}, {"c", 1.0, 1.0}}};
  // pairs (a,b): (2 - 1)^2 = 1, (a,c): (1 - 0)^2 = 1
  CHECK(margin_mse_loss(inst) == Approx(1.0));
  CHECK(all_pairs(inst).size() == 2);
}

TEST_CASE("nll and kl_nll examples") {
  CHECK(nll_loss(TopOneDistribution{{1.0, 0.0}, {true, false}}) == 0.0);
  CHECK(nll_loss(pn(0.5, 0.5)) == Approx(std::log(2.0)));
  CHECK(kl_plus_nll(pn(0.5, 0.5), pn(0.5, 0.5)) == Approx(std::log(2.0)));
  CHECK_THROWS(nll_loss(TopOneDistribution{{1.0}, {false}}));
}

TEST_CASE("loss names round trip") {
  for (LossKind k : all_losses()) CHECK(parse_loss(loss_name(k)) == k);
  CHECK_FALSE(parse_loss("cl_drd").has_value());
}

TEST_CASE("kl is non-negative on random simplex pairs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(2, 12);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    const auto p = dist(random_simplex(rng, n), 1);
    const auto q = dist(random_simplex(rng, n), 1);
    CHECK(kl_loss(p, q) >= -1e-12);
  }
}

TEST_CASE("weighted ckl terms never exceed the unweighted kl terms") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  std::uniform_real_distribution<double> gam(1.0, 7.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double p = u(rng);
    const double q = u(rng);
    const double gamma = gam(rng);
    const double beta = (gamma - 1.0) * (2.0 * u(rng) - 1.0);
    const bool pos = trial % 2 == 0;
    CHECK(std::abs(ckl_term(p, q, pos, gamma, beta)) <= std::abs(kl_term(p, q)) + 1e-15);
  }
}

TEST_CASE("weight ordering on random instances") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    DistillationInstance inst;
    inst.query_id = "q";
    for (int j = count(rng); j > 0; --j) inst.positives.push_back({"p" + std::to_string(j), 0.0, g(rng)});
    for (int i = count(rng); i > 0; --i) inst.negatives.push_back({"n" + std::to_string(i), 0.0, g(rng)});
    CklHyperparams hp;
    hp.gamma = 1.0 + 6.0 * u(rng);
    hp.alpha = (hp.gamma - 1.0) * u(rng);
    const auto betas = compute_beta(inst, hp.alpha).aligned(inst);
    const auto r = check_weight_ordering(student_distribution(inst), betas, hp);
    CHECK(r.violations() == 0);
  }
}

TEST_CASE("batch loss is the unweighted mean") {
  DistillationInstance a{"a", {{"x", 1.0, 0.0}}, {{"y", 0.0, 0.0}}};
  DistillationInstance b{"b", {{"x", 0.0, 0.0}}, {{"y", 0.0, 0.0}}};
  std::vector<DistillationInstance> batch{a, b};
  LossSpec spec;
  const double expected = 0.5 * (instance_loss(a, spec) + instance_loss(b, spec));
  CHECK(batch_loss(batch, spec) == Approx(expected));
  spec.kind = LossKind::kCkl;
  CHECK_THROWS(batch_loss(batch, spec));
  std::vector<std::vector<double>> betas{{0.0}, {0.0}};
  CHECK(std::isfinite(batch_loss(batch, spec, betas)));
}
