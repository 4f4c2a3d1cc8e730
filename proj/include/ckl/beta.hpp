#ifndef CKL_BETA_HPP
#define CKL_BETA_HPP

#include <map>
#include <span>
#include <vector>

#include "ckl/core.hpp"

namespace ckl {

struct ScoredDoc {
  DocId doc_id;
  double score = 0.0;
};

// Rank positions (1 = best). Documents missing from `ranks` sit at
// `default_rank`, which is 0 for a full ranking and k+1 for a top-k pool.
struct RankMap {
  std::map<DocId, int> ranks;
  int default_rank = 0;

  int rank_of(const DocId& id) const;
};

struct BetaAssignment {
  std::map<DocId, double> betas;
  RankMap ranks;
  // (1/s) * sum over positives of 1/rank.
  double harmonic_mean_reciprocal = 0.0;

  double beta_of(const DocId& id) const;
  // Betas in the instance's negative order.
  std::vector<double> aligned(const DistillationInstance& inst) const;
  std::vector<double> aligned(std::span<const DocId> negatives) const;
  double max_abs() const;
};

// Descending score, ties broken by ascending doc_id.
RankMap compute_ranks(std::span<const ScoredDoc> docs);
RankMap compute_ranks(const DistillationInstance& inst);

// Ranks only the top-k of the candidate pool; everything else gets k+1.
RankMap topk_rank_approximation(std::span<const ScoredDoc> pool, int k = 50);

BetaAssignment compute_beta(const RankMap& ranks, std::span<const DocId> positives,
                            std::span<const DocId> negatives, double alpha);
BetaAssignment compute_beta(const DistillationInstance& inst, double alpha, int pool_k = 0);

// Recomputes from `inst`'s current student scores when step % period == 0.
BetaAssignment schedule_update(long step, long period, const BetaAssignment& current,
                               const DistillationInstance& inst, double alpha,
                               int pool_k = 0);

std::vector<ScoredDoc> student_pool(const DistillationInstance& inst);

}  // namespace ckl

#endif  // CKL_BETA_HPP
