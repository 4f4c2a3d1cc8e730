#ifndef CKL_LOSSES_HPP
#define CKL_LOSSES_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckl/beta.hpp"
#include "ckl/core.hpp"

namespace ckl {

enum class LossKind { kKl, kCkl, kBkl, kMarginMse, kNll, kKlNll };

std::string_view loss_name(LossKind kind);
std::optional<LossKind> parse_loss(std::string_view name);
std::vector<LossKind> all_losses();

struct BklParams {
  double lambda = 0.1;

  void validate() const;
};

struct CklTermWeights {
  std::vector<double> positive_weights;  // (1 - q_j)^gamma
  std::vector<double> negative_weights;  // q_i^(gamma - beta_i)
};

struct LossSpec {
  LossKind kind = LossKind::kKl;
  CklHyperparams ckl;
  BklParams bkl;
};

// Per-document terms. `q` is expected to be clamped already; p = 0 gives 0.
double kl_term(double p, double q);
double ckl_weight(double q, bool is_positive, double gamma, double beta);
double ckl_term(double p, double q, bool is_positive, double gamma, double beta);
double bkl_term(double p, double q, bool is_positive, double lambda);
double nll_term(double q, bool is_positive);

// Throws "exponent below one" when gamma - beta < 1 for a negative.
void check_exponent(double gamma, double beta);

double kl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
               double eps = 1e-12);

// `betas` is aligned with the negatives of the distribution, in order.
CklTermWeights ckl_weights(const TopOneDistribution& student, std::span<const double> betas,
                           const CklHyperparams& hp);

double ckl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
                std::span<const double> betas, const CklHyperparams& hp);

// KL plus lambda * (sum_pos q ln q + sum_neg q).
double bkl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
                const BklParams& params, double eps = 1e-12);

struct ScorePair {
  double teacher_pos = 0.0;
  double teacher_neg = 0.0;
  double student_pos = 0.0;
  double student_neg = 0.0;
};

double margin_mse_loss(std::span<const ScorePair> pairs);
// Every positive paired with every negative.
std::vector<ScorePair> all_pairs(const DistillationInstance& inst);
double margin_mse_loss(const DistillationInstance& inst);

double nll_loss(const TopOneDistribution& student, double eps = 1e-12);
double kl_plus_nll(const TopOneDistribution& teacher, const TopOneDistribution& student,
                   double eps = 1e-12);

// Loss of one instance with its current student scores. `betas` are only read
// for CKL and must then be aligned with the instance's negatives.
double instance_loss(const DistillationInstance& inst, const LossSpec& spec,
                     std::span<const double> betas = {});

struct WeightOrderingReport {
  long positive_pairs = 0;
  long positive_violations = 0;  // q_j >= q_j' but (1-q_j)^g > (1-q_j')^g
  long negative_pairs = 0;
  long negative_violations = 0;  // q_i > q_i' but q_i^(g-b_i) < q_i'^(g-b_i')
  long cross_pairs = 0;          // pairs with 1 - q_j >= q_i and beta_i <= 0
  long cross_violations = 0;

  long violations() const { return positive_violations + negative_violations + cross_violations; }
};

// Checks the pairwise weight orderings over every pair of documents. Betas
// must come from ranks consistent with the student scores for the negative
// ordering to be guaranteed.
WeightOrderingReport check_weight_ordering(const TopOneDistribution& student,
                                           std::span<const double> betas,
                                           const CklHyperparams& hp);

// Unweighted mean over instances, fixed order.
double batch_loss(std::span<const DistillationInstance> batch, const LossSpec& spec,
                  std::span<const std::vector<double>> betas = {});

}  // namespace ckl

#endif  // CKL_LOSSES_HPP
