#ifndef CKL_SYNTH_HPP
#define CKL_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckl/core.hpp"
#include "ckl/losses.hpp"

namespace ckl {

struct SynthConfig {
  int num_queries = 200;
  int positives = 2;
  int negatives = 8;
  int feature_dim = 16;
  double teacher_noise_sigma = 0.5;
  // Fraction of queries whose teacher scores are negated (ranking inverted).
  double teacher_corruption_rate = 0.0;
  double test_fraction = 0.2;
  // Shift of relevant documents along the query's relevance direction.
  double separation = 6.0;
  // Spread of per-query relevance directions around the shared one.
  double query_spread = 0.3;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct SynthDoc {
  DocId doc_id;
  std::vector<double> features;
  double teacher_score = 0.0;
  bool relevant = false;
};

// Relevant documents first.
struct SynthQuery {
  std::string query_id;
  std::vector<SynthDoc> docs;
  int num_positives = 0;
  bool corrupted = false;
};

struct SynthDataset {
  int feature_dim = 0;
  std::vector<SynthQuery> train;
  std::vector<SynthQuery> test;
};

SynthDataset generate_dataset(const SynthConfig& cfg);

struct StudentModel {
  std::vector<double> weights;
  double learning_rate = 0.1;

  double score(const std::vector<double>& features) const;
};

StudentModel init_student(int feature_dim, std::uint64_t seed, double scale, double learning_rate);

DistillationInstance make_instance(const SynthQuery& query, const StudentModel& model);

struct TrainConfig {
  LossSpec loss;
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 0.5;
  int warmup_epochs = 0;
  LossKind warmup_loss = LossKind::kKl;
  int rank_pool_k = 50;
  std::uint64_t init_seed = 1;
  double init_scale = 0.01;

  void validate() const;
};

struct StepRecord {
  long step = 0;
  double loss = 0.0;
  double margin_separation = 0.0;
  double positive_entropy = 0.0;
  double mrr_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
  double max_abs_beta = 0.0;
  bool warmup = false;
};

struct TrainRunLog {
  std::vector<StepRecord> records;
  RankingMetrics final_train;
  RankingMetrics final_test;
  StudentModel model;
  long beta_updates = 0;
};

RankingMetrics evaluate_queries(const std::vector<SynthQuery>& queries, const StudentModel& model);

// Mini-batch SGD on the linear scorer. Throws std::runtime_error when the loss
// becomes non-finite.
TrainRunLog train(const SynthDataset& data, const TrainConfig& cfg);

std::string trainlog_csv(const TrainRunLog& log);

struct ComparisonCell {
  std::string label;
  LossKind kind = LossKind::kKl;
  std::optional<std::pair<double, double>> gamma_alpha;
  std::vector<std::uint64_t> seeds;
  std::vector<RankingMetrics> per_seed;
  RankingMetrics mean;
  RankingMetrics stddev;
};

struct CompareConfig {
  SynthConfig synth;
  TrainConfig train;
  std::vector<LossKind> losses;
  // (gamma, alpha) pairs applied to CKL entries; empty means {(5, 1)}.
  std::vector<std::pair<double, double>> hp_grid;
  std::vector<std::uint64_t> seeds{1};
};

// Each seed fixes the dataset and the student initialization shared by every cell.
std::vector<ComparisonCell> compare_losses(const CompareConfig& cfg);

std::string comparison_csv(const std::vector<ComparisonCell>& cells);

}  // namespace ckl

#endif  // CKL_SYNTH_HPP
