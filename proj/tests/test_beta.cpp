#include <random>

#include "doctest.h"

#include "ckl/beta.hpp"

using namespace ckl;
using doctest::Approx;

TEST_CASE("compute_ranks orders by descending score") {
  std::vector<ScoredDoc> docs{{"x", 3.0}, {"y", 2.0}, {"z", 1.0}};
  auto r = compute_ranks(docs);
  CHECK(r.rank_of("x") == 1);
  CHECK(r.rank_of("y") == 2);
  CHECK(r.rank_of("z") == 3);

  std::vector<ScoredDoc> flipped{{"x", 1.0}, {"y", 5.0}};
  auto f = compute_ranks(flipped);
  CHECK(f.rank_of("x") == 2);
  CHECK(f.rank_of("y") == 1);
}

TEST_CASE("ties break by ascending doc id") {
  std::vector<ScoredDoc> docs{{"b", 2.0}, {"a", 2.0}};
  auto r = compute_ranks(docs);
  CHECK(r.rank_of("a") == 1);
  CHECK(r.rank_of("b") == 2);
  CHECK_THROWS(r.rank_of("missing"));
}

TEST_CASE("compute_beta examples") {
  RankMap ranks;
  ranks.ranks = {{"pos", 2}, {"neg", 1}, {"other", 3}};
  std::vector<DocId> pos{"pos"};

  auto zero = compute_beta(ranks, pos, std::vector<DocId>{"neg", "other"}, 0.0);
  CHECK(zero.beta_of("neg") == 0.0);
  CHECK(zero.beta_of("other") == 0.0);

  auto b = compute_beta(ranks, pos, std::vector<DocId>{"neg", "other"}, 1.0);
  CHECK(b.harmonic_mean_reciprocal == Approx(0.5));
  CHECK(b.beta_of("neg") == Approx(0.5));
  CHECK(b.beta_of("other") == Approx(1.0 / 3.0 - 0.5));
  CHECK(b.beta_of("other") == Approx(-0.16667).epsilon(1e-4));
}

TEST_CASE("schedule_update only recomputes on period boundaries") {
  DistillationInstance inst{"q", {{"p", 0.0, 0.0}}, {{"n", 0.0, 1.0}}};
  const auto initial = compute_beta(inst, 1.0);
  CHECK(initial.beta_of("n") == Approx(0.5));

  inst.positives[0].student_score = 5.0;  // positive now ranked first
  auto kept = schedule_update(1999, 2000, initial, inst, 1.0);
  CHECK(kept.beta_of("n") == Approx(0.5));
  auto fresh = schedule_update(2000, 2000, initial, inst, 1.0);
  CHECK(fresh.beta_of("n") == Approx(-0.5));
  auto every = schedule_update(7, 1, initial, inst, 1.0);
  CHECK(every.beta_of("n") == Approx(-0.5));
  CHECK_THROWS(schedule_update(1, 0, initial, inst, 1.0));
}

TEST_CASE("top-k rank approximation") {
  std::vector<ScoredDoc> pool;
  for (int i = 0; i < 60; ++i) pool.push_back({"d" + std::to_string(100 + i), 100.0 - i});
  auto r = topk_rank_approximation(pool, 50);
  CHECK(r.rank_of("d106") == 7);
  CHECK(r.rank_of("d155") == 51);
  CHECK(r.rank_of("never-seen") == 51);

  auto full = topk_rank_approximation(pool, 500);
  CHECK(full.rank_of("d159") == 60);
  CHECK_THROWS(topk_rank_approximation(pool, 0));
}

TEST_CASE("beta properties over random instances") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> a(0.0, 4.0);
  for (int trial = 0; trial < 2000; ++trial) {
    DistillationInstance inst;
    inst.query_id = "q";
    const int s = count(rng);
    const int m = count(rng);
    for (int j = 0; j < s; ++j) inst.positives.push_back({"p" + std::to_string(j), 0.0, g(rng)});
    for (int i = 0; i < m; ++i) inst.negatives.push_back({"n" + std::to_string(i), 0.0, g(rng)});
    const double alpha = a(rng);
    const auto b = compute_beta(inst, alpha);
    const double n = s + m;

    for (const auto& neg : inst.negatives) {
      const double beta = b.beta_of(neg.doc_id);
      CHECK(std::abs(beta) <= alpha * (1.0 - 1.0 / n) + 1e-12);
      if (alpha > 0.0) CHECK(std::abs(beta) < alpha);
      // sign matches position relative to the harmonic mean of positive ranks
      const double recip = 1.0 / b.ranks.rank_of(neg.doc_id);
      if (alpha > 0.0) CHECK((beta > 0.0) == (recip > b.harmonic_mean_reciprocal));
    }
    for (const auto& x : inst.negatives) {
      for (const auto& y : inst.negatives) {
        if (alpha > 0.0 && b.ranks.rank_of(x.doc_id) < b.ranks.rank_of(y.doc_id)) {
          CHECK(b.beta_of(x.doc_id) > b.beta_of(y.doc_id));
        }
      }
    }
    const auto again = compute_beta(inst, alpha);
    CHECK(again.betas == b.betas);
  }
}
