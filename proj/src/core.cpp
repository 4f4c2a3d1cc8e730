#include "ckl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace ckl {

void DistillationInstance::validate() const {
  if (positives.empty() || negatives.empty()) {
    throw std::invalid_argument("instance '" + query_id +
                                "' needs at least one positive and one negative");
  }
  std::unordered_set<DocId> seen;
  auto check = [&](const DocEntry& d) {
    if (!seen.insert(d.doc_id).second) {
      throw std::invalid_argument("duplicate doc_id '" + d.doc_id + "' in instance '" +
                                  query_id + "'");
    }
    if (!std::isfinite(d.teacher_score) || !std::isfinite(d.student_score)) {
      throw std::invalid_argument("invalid score");
    }
  };
  std::for_each(positives.begin(), positives.end(), check);
  std::for_each(negatives.begin(), negatives.end(), check);
}

std::vector<double> DistillationInstance::teacher_scores() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& d : positives) out.push_back(d.teacher_score);
  for (const auto& d : negatives) out.push_back(d.teacher_score);
  return out;
}

std::vector<double> DistillationInstance::student_scores() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& d : positives) out.push_back(d.student_score);
  for (const auto& d : negatives) out.push_back(d.student_score);
  return out;
}

std::vector<DocId> DistillationInstance::doc_ids() const {
  std::vector<DocId> out;
  out.reserve(size());
  for (const auto& d : positives) out.push_back(d.doc_id);
  for (const auto& d : negatives) out.push_back(d.doc_id);
  return out;
}

void DistillationInstance::set_student_scores(std::span<const double> scores) {
  if (scores.size() != size()) throw std::invalid_argument("score vector size mismatch");
  std::size_t k = 0;
  for (auto& d : positives) d.student_score = scores[k++];
  for (auto& d : negatives) d.student_score = scores[k++];
}

std::vector<double> TopOneDistribution::positive_probs() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (positive[i]) out.push_back(probs[i]);
  return out;
}

std::vector<double> TopOneDistribution::negative_probs() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (!positive[i]) out.push_back(probs[i]);
  return out;
}

void CklHyperparams::validate() const {
  if (!std::isfinite(gamma) || gamma < 1.0) {
    throw std::invalid_argument("gamma must be >= 1");
  }
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > gamma - 1.0) {
    throw std::invalid_argument("alpha must lie in [0, gamma - 1]");
  }
  if (beta_update_period < 0) {
    throw std::invalid_argument("beta_update_period must be positive (or 0 for auto)");
  }
  if (!(prob_clamp_epsilon > 0.0) || prob_clamp_epsilon >= 0.5) {
    throw std::invalid_argument("prob_clamp_epsilon must lie in (0, 0.5)");
  }
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("empty instance");
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("invalid score");
    hi = std::max(hi, s);
  }
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - hi);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<bool> label_mask(std::size_t num_positive, std::size_t num_negative) {
  std::vector<bool> mask(num_positive + num_negative, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(num_positive), true);
  return mask;
}

TopOneDistribution top_one_probability(std::span<const double> scores,
                                       const std::vector<bool>& positive) {
  TopOneDistribution dist;
  dist.probs = softmax(scores);
  if (positive.empty()) {
    dist.positive.assign(scores.size(), false);
  } else {
    if (positive.size() != scores.size()) {
      throw std::invalid_argument("label mask size mismatch");
    }
    dist.positive = positive;
  }
  return dist;
}

TopOneDistribution teacher_distribution(const DistillationInstance& inst) {
  return top_one_probability(inst.teacher_scores(),
                             label_mask(inst.num_positives(), inst.num_negatives()));
}

TopOneDistribution student_distribution(const DistillationInstance& inst) {
  return top_one_probability(inst.student_scores(),
                             label_mask(inst.num_positives(), inst.num_negatives()));
}

double positive_entropy(const TopOneDistribution& dist) {
  double h = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double q = dist.probs[i];
    if (dist.positive[i] && q > 0.0) h -= q * std::log2(q);
  }
  return h;
}

namespace {

std::vector<std::size_t> order_by_prob(const TopOneDistribution& dist) {
  std::vector<std::size_t> idx(dist.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return dist.probs[a] > dist.probs[b]; });
  return idx;
}

}  // namespace

double margin_separation(const TopOneDistribution& dist, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto idx = order_by_prob(dist);
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
  double min_pos = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  bool any_pos = false;
  bool any_neg = false;
  for (std::size_t r = 0; r < top; ++r) {
    const double q = dist.probs[idx[r]];
    if (dist.positive[idx[r]]) {
      any_pos = true;
      min_pos = std::min(min_pos, q);
    } else {
      any_neg = true;
      max_neg = std::max(max_neg, q);
    }
  }
  if (!any_pos && !any_neg) return 0.0;
  if (!any_pos) return -max_neg;
  if (!any_neg) return min_pos;
  return min_pos - max_neg;
}

double mrr_at_k(std::span<const double> relevance, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), relevance.size());
  for (std::size_t r = 0; r < top; ++r) {
    if (relevance[r] > 0.0) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double ndcg_at_k(std::span<const double> gains, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), gains.size());
  auto dcg = [top](std::span<const double> g) {
    double sum = 0.0;
    for (std::size_t r = 0; r < top; ++r) sum += g[r] / std::log2(static_cast<double>(r + 2));
    return sum;
  };
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  if (idcg <= 0.0) return 0.0;
  return dcg(gains) / idcg;
}

std::vector<double> ranked_labels(const TopOneDistribution& dist) {
  std::vector<double> labels;
  labels.reserve(dist.size());
  for (std::size_t i : order_by_prob(dist)) labels.push_back(dist.positive[i] ? 1.0 : 0.0);
  return labels;
}

RankingMetrics evaluate(const TopOneDistribution& student, int k) {
  const auto labels = ranked_labels(student);
  RankingMetrics m;
  m.mrr_at_10 = mrr_at_k(labels, k);
  m.ndcg_at_10 = ndcg_at_k(labels, k);
  m.positive_entropy = positive_entropy(student);
  m.margin_separation = margin_separation(student, k);
  return m;
}

double clamp_prob(double q, double lo, double hi) { return std::clamp(q, lo, hi); }

}  // namespace ckl
