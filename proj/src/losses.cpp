#include "ckl/losses.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ckl {

namespace {

constexpr std::array<std::pair<LossKind, std::string_view>, 6> kLossNames{{
    {LossKind::kKl, "kl"},
    {LossKind::kCkl, "ckl"},
    {LossKind::kBkl, "bkl"},
    {LossKind::kMarginMse, "margin_mse"},
    {LossKind::kNll, "nll"},
    {LossKind::kKlNll, "kl_nll"},
}};

void check_aligned(const TopOneDistribution& teacher, const TopOneDistribution& student) {
  if (teacher.size() != student.size() || teacher.positive != student.positive) {
    throw std::invalid_argument("teacher and student distributions are not aligned");
  }
}

}  // namespace

std::string_view loss_name(LossKind kind) {
  for (const auto& [k, name] : kLossNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<LossKind> parse_loss(std::string_view name) {
  for (const auto& [k, n] : kLossNames)
    if (n == name) return k;
  return std::nullopt;
}

std::vector<LossKind> all_losses() {
  std::vector<LossKind> out;
  for (const auto& [k, n] : kLossNames) out.push_back(k);
  return out;
}

void BklParams::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
}

double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  return p * std::log(p / q);
}

void check_exponent(double gamma, double beta) {
  if (gamma - beta < 1.0) throw std::invalid_argument("exponent below one");
}

double ckl_weight(double q, bool is_positive, double gamma, double beta) {
  if (is_positive) return std::pow(1.0 - q, gamma);
  check_exponent(gamma, beta);
  return std::pow(q, gamma - beta);
}

double ckl_term(double p, double q, bool is_positive, double gamma, double beta) {
  return ckl_weight(q, is_positive, gamma, beta) * kl_term(p, q);
}

double bkl_term(double p, double q, bool is_positive, double lambda) {
  const double reg = is_positive ? q * std::log(q) : q;
  return kl_term(p, q) + lambda * reg;
}

double nll_term(double q, bool is_positive) { return is_positive ? -std::log(q) : 0.0; }

double kl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
               double eps) {
  check_aligned(teacher, student);
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    sum += kl_term(teacher.probs[i], clamp_prob(student.probs[i], eps, 1.0));
  }
  return sum;
}

CklTermWeights ckl_weights(const TopOneDistribution& student, std::span<const double> betas,
                           const CklHyperparams& hp) {
  CklTermWeights w;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double q = student.probs[i];
    if (student.positive[i]) {
      w.positive_weights.push_back(ckl_weight(q, true, hp.gamma, 0.0));
    } else {
      if (neg >= betas.size()) throw std::invalid_argument("beta count does not match negatives");
      w.negative_weights.push_back(ckl_weight(q, false, hp.gamma, betas[neg++]));
    }
  }
  if (neg != betas.size()) throw std::invalid_argument("beta count does not match negatives");
  return w;
}

double ckl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
                std::span<const double> betas, const CklHyperparams& hp) {
  check_aligned(teacher, student);
  const double eps = hp.prob_clamp_epsilon;
  double sum = 0.0;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double q = clamp_prob(student.probs[i], eps, 1.0 - eps);
    const bool pos = student.positive[i];
    double beta = 0.0;
    if (!pos) {
      if (neg >= betas.size()) throw std::invalid_argument("beta count does not match negatives");
      beta = betas[neg++];
    }
    sum += ckl_term(teacher.probs[i], q, pos, hp.gamma, beta);
  }
  if (neg != betas.size()) throw std::invalid_argument("beta count does not match negatives");
  return sum;
}

double bkl_loss(const TopOneDistribution& teacher, const TopOneDistribution& student,
                const BklParams& params, double eps) {
  check_aligned(teacher, student);
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    sum += bkl_term(teacher.probs[i], clamp_prob(student.probs[i], eps, 1.0),
                    student.positive[i], params.lambda);
  }
  return sum;
}

double margin_mse_loss(std::span<const ScorePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("margin-MSE needs at least one pair");
  double sum = 0.0;
  for (const auto& pr : pairs) {
    const double diff = (pr.teacher_pos - pr.teacher_neg) - (pr.student_pos - pr.student_neg);
    sum += diff * diff;
  }
  return sum / static_cast<double>(pairs.size());
}

std::vector<ScorePair> all_pairs(const DistillationInstance& inst) {
  std::vector<ScorePair> pairs;
  pairs.reserve(inst.num_positives() * inst.num_negatives());
  for (const auto& pos : inst.positives) {
    for (const auto& neg : inst.negatives) {
      pairs.push_back({pos.teacher_score, neg.teacher_score, pos.student_score, neg.student_score});
    }
  }
  return pairs;
}

double margin_mse_loss(const DistillationInstance& inst) { return margin_mse_loss(all_pairs(inst)); }

double nll_loss(const TopOneDistribution& student, double eps) {
  double sum = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < student.size(); ++i) {
    if (!student.positive[i]) continue;
    any = true;
    sum += nll_term(clamp_prob(student.probs[i], eps, 1.0), true);
  }
  if (!any) throw std::invalid_argument("NLL needs at least one positive");
  return sum;
}

double kl_plus_nll(const TopOneDistribution& teacher, const TopOneDistribution& student,
                   double eps) {
  return kl_loss(teacher, student, eps) + nll_loss(student, eps);
}

WeightOrderingReport check_weight_ordering(const TopOneDistribution& student,
                                           std::span<const double> betas,
                                           const CklHyperparams& hp) {
  const auto w = ckl_weights(student, betas, hp);
  const auto qp = student.positive_probs();
  const auto qn = student.negative_probs();
  constexpr double kTol = 1e-15;
  WeightOrderingReport r;
  for (std::size_t a = 0; a < qp.size(); ++a) {
    for (std::size_t b = 0; b < qp.size(); ++b) {
      if (a == b || qp[a] < qp[b]) continue;
      ++r.positive_pairs;
      if (w.positive_weights[a] > w.positive_weights[b] + kTol) ++r.positive_violations;
    }
  }
  for (std::size_t a = 0; a < qn.size(); ++a) {
    for (std::size_t b = 0; b < qn.size(); ++b) {
      if (a == b || !(qn[a] > qn[b])) continue;
      ++r.negative_pairs;
      if (w.negative_weights[a] < w.negative_weights[b] - kTol) ++r.negative_violations;
    }
  }
  for (std::size_t j = 0; j < qp.size(); ++j) {
    for (std::size_t i = 0; i < qn.size(); ++i) {
      if (1.0 - qp[j] < qn[i] || betas[i] > 0.0) continue;
      ++r.cross_pairs;
      if (w.positive_weights[j] < w.negative_weights[i] - kTol) ++r.cross_violations;
    }
  }
  return r;
}

double instance_loss(const DistillationInstance& inst, const LossSpec& spec,
                     std::span<const double> betas) {
  if (spec.kind == LossKind::kMarginMse) return margin_mse_loss(inst);
  const auto teacher = teacher_distribution(inst);
  const auto student = student_distribution(inst);
  const double eps = spec.ckl.prob_clamp_epsilon;
  switch (spec.kind) {
    case LossKind::kKl:
      return kl_loss(teacher, student, eps);
    case LossKind::kCkl:
      return ckl_loss(teacher, student, betas, spec.ckl);
    case LossKind::kBkl:
      return bkl_loss(teacher, student, spec.bkl, eps);
    case LossKind::kNll:
      return nll_loss(student, eps);
    case LossKind::kKlNll:
      return kl_plus_nll(teacher, student, eps);
    case LossKind::kMarginMse:
      break;
  }
  throw std::logic_error("unhandled loss kind");
}

double batch_loss(std::span<const DistillationInstance> batch, const LossSpec& spec,
                  std::span<const std::vector<double>> betas) {
  if (batch.empty()) return 0.0;
  if (spec.kind == LossKind::kCkl && betas.size() != batch.size()) {
    throw std::invalid_argument("CKL batch needs one beta vector per instance");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::span<const double> b;
    if (spec.kind == LossKind::kCkl) b = betas[i];
    sum += instance_loss(batch[i], spec, b);
  }
  return sum / static_cast<double>(batch.size());
}

}  // namespace ckl
