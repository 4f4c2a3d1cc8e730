#ifndef CKL_CORE_HPP
#define CKL_CORE_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ckl {

using DocId = std::string;

struct DocEntry {
  DocId doc_id;
  double teacher_score = 0.0;
  double student_score = 0.0;
};

// One query's candidate set. Positives are always laid out before negatives
// whenever the instance is flattened into a score or probability vector.
struct DistillationInstance {
  std::string query_id;
  std::vector<DocEntry> positives;
  std::vector<DocEntry> negatives;

  std::size_t num_positives() const { return positives.size(); }
  std::size_t num_negatives() const { return negatives.size(); }
  std::size_t size() const { return positives.size() + negatives.size(); }

  // Throws std::invalid_argument when s < 1, m < 1, ids repeat or a score is
  // not finite.
  void validate() const;

  std::vector<double> teacher_scores() const;
  std::vector<double> student_scores() const;
  std::vector<DocId> doc_ids() const;
  void set_student_scores(std::span<const double> scores);
};

struct TopOneDistribution {
  std::vector<double> probs;
  std::vector<bool> positive;

  std::size_t size() const { return probs.size(); }
  std::vector<double> positive_probs() const;
  std::vector<double> negative_probs() const;
};

struct CklHyperparams {
  double gamma = 5.0;
  double alpha = 1.0;
  // Training steps between beta recomputations; 0 lets the trainer pick a
  // period of one tenth of an epoch.
  int beta_update_period = 0;
  double prob_clamp_epsilon = 1e-12;

  void validate() const;
};

struct RankingMetrics {
  double mrr_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
  double positive_entropy = 0.0;
  double margin_separation = 0.0;
};

inline constexpr int kDefaultCutoff = 10;

// Softmax with max-shift. Throws "empty instance" / "invalid score".
std::vector<double> softmax(std::span<const double> scores);

// Label mask defaults to all-negative when empty.
TopOneDistribution top_one_probability(std::span<const double> scores,
                                       const std::vector<bool>& positive = {});

TopOneDistribution teacher_distribution(const DistillationInstance& inst);
TopOneDistribution student_distribution(const DistillationInstance& inst);

std::vector<bool> label_mask(std::size_t num_positive, std::size_t num_negative);

// Shannon entropy (bits) of the student mass on positive documents, with
// 0 log 0 = 0. The positive probabilities are not renormalized.
double positive_entropy(const TopOneDistribution& dist);

// min positive q minus max negative q among the top-k documents by q.
double margin_separation(const TopOneDistribution& dist, int k = kDefaultCutoff);

// `relevance` is in ranked order (best first); any value > 0 counts as relevant.
double mrr_at_k(std::span<const double> relevance, int k = kDefaultCutoff);
double ndcg_at_k(std::span<const double> gains, int k = kDefaultCutoff);

// Orders the distribution by descending q (stable), returning binary labels.
std::vector<double> ranked_labels(const TopOneDistribution& dist);

RankingMetrics evaluate(const TopOneDistribution& student, int k = kDefaultCutoff);

double clamp_prob(double q, double lo, double hi);

}  // namespace ckl

#endif  // CKL_CORE_HPP
