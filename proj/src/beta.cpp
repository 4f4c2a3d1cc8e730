#include "ckl/beta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ckl {

int RankMap::rank_of(const DocId& id) const {
  auto it = ranks.find(id);
  if (it != ranks.end()) return it->second;
  if (default_rank > 0) return default_rank;
  throw std::out_of_range("no rank for doc_id '" + id + "'");
}

double BetaAssignment::beta_of(const DocId& id) const {
  auto it = betas.find(id);
  if (it == betas.end()) throw std::out_of_range("no beta for doc_id '" + id + "'");
  return it->second;
}

std::vector<double> BetaAssignment::aligned(const DistillationInstance& inst) const {
  std::vector<double> out;
  out.reserve(inst.num_negatives());
  for (const auto& d : inst.negatives) out.push_back(beta_of(d.doc_id));
  return out;
}

std::vector<double> BetaAssignment::aligned(std::span<const DocId> negatives) const {
  std::vector<double> out;
  out.reserve(negatives.size());
  for (const auto& id : negatives) out.push_back(beta_of(id));
  return out;
}

double BetaAssignment::max_abs() const {
  double m = 0.0;
  for (const auto& [id, b] : betas) m = std::max(m, std::abs(b));
  return m;
}

namespace {

std::vector<ScoredDoc> sorted_desc(std::span<const ScoredDoc> docs) {
  std::vector<ScoredDoc> sorted(docs.begin(), docs.end());
  for (const auto& d : sorted) {
    if (!std::isfinite(d.score)) throw std::invalid_argument("invalid score");
  }
  std::sort(sorted.begin(), sorted.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  return sorted;
}

}  // namespace

RankMap compute_ranks(std::span<const ScoredDoc> docs) {
  RankMap out;
  int r = 1;
  for (const auto& d : sorted_desc(docs)) out.ranks[d.doc_id] = r++;
  return out;
}

std::vector<ScoredDoc> student_pool(const DistillationInstance& inst) {
  std::vector<ScoredDoc> pool;
  pool.reserve(inst.size());
  for (const auto& d : inst.positives) pool.push_back({d.doc_id, d.student_score});
  for (const auto& d : inst.negatives) pool.push_back({d.doc_id, d.student_score});
  return pool;
}

RankMap compute_ranks(const DistillationInstance& inst) {
  return compute_ranks(student_pool(inst));
}

RankMap topk_rank_approximation(std::span<const ScoredDoc> pool, int k) {
  if (k < 1) throw std::invalid_argument("rank pool k must be >= 1");
  const auto sorted = sorted_desc(pool);
  RankMap out;
  out.default_rank = k + 1;
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size());
  for (std::size_t i = 0; i < top; ++i) out.ranks[sorted[i].doc_id] = static_cast<int>(i + 1);
  return out;
}

BetaAssignment compute_beta(const RankMap& ranks, std::span<const DocId> positives,
                            std::span<const DocId> negatives, double alpha) {
  if (positives.empty()) throw std::invalid_argument("beta needs at least one positive");
  if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  BetaAssignment out;
  out.ranks = ranks;
  double sum = 0.0;
  for (const auto& id : positives) sum += 1.0 / ranks.rank_of(id);
  out.harmonic_mean_reciprocal = sum / static_cast<double>(positives.size());
  for (const auto& id : negatives) {
    out.betas[id] = alpha * (1.0 / ranks.rank_of(id) - out.harmonic_mean_reciprocal);
  }
  return out;
}

BetaAssignment compute_beta(const DistillationInstance& inst, double alpha, int pool_k) {
  const RankMap ranks = pool_k > 0 ? topk_rank_approximation(student_pool(inst), pool_k)
                                   : compute_ranks(inst);
  std::vector<DocId> pos;
  std::vector<DocId> neg;
  for (const auto& d : inst.positives) pos.push_back(d.doc_id);
  for (const auto& d : inst.negatives) neg.push_back(d.doc_id);
  return compute_beta(ranks, pos, neg, alpha);
}

BetaAssignment schedule_update(long step, long period, const BetaAssignment& current,
                               const DistillationInstance& inst, double alpha, int pool_k) {
  if (period < 1) throw std::invalid_argument("beta update period must be >= 1");
  if (step % period != 0) return current;
  return compute_beta(inst, alpha, pool_k);
}

}  // namespace ckl
