#include "ckl/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ckl/beta.hpp"

namespace ckl {

double kl_grad_q(double p, double q) {
  if (p <= 0.0) return 0.0;
  return -p / q;
}

double ckl_grad_q(double p, double q, bool is_positive, double gamma, double beta) {
  const double kl = kl_term(p, q);
  if (is_positive) {
    return -gamma * std::pow(1.0 - q, gamma - 1.0) * kl + std::pow(1.0 - q, gamma) * kl_grad_q(p, q);
  }
  check_exponent(gamma, beta);
  const double a = gamma - beta;
  return a * std::pow(q, a - 1.0) * kl + std::pow(q, a) * kl_grad_q(p, q);
}

double bkl_grad_q(double p, double q, bool is_positive, double lambda) {
  const double reg = is_positive ? std::log(q) + 1.0 : 1.0;
  return kl_grad_q(p, q) + lambda * reg;
}

double nll_grad_q(double q, bool is_positive) { return is_positive ? -1.0 / q : 0.0; }

double grad_ratio(double p, double q, bool is_positive, double gamma, double beta) {
  if (!(p > 0.0)) throw std::invalid_argument("ratio undefined");
  const double log_ratio = std::log(p / q);
  if (is_positive) {
    return std::pow(1.0 - q, gamma - 1.0) * (gamma * q * log_ratio + 1.0 - q);
  }
  check_exponent(gamma, beta);
  const double a = gamma - beta;
  return std::pow(q, a) * (1.0 - a * log_ratio);
}

double bkl_grad_ratio(double p, double q, bool is_positive, double lambda) {
  if (!(p > 0.0)) throw std::invalid_argument("ratio undefined");
  const double reg = is_positive ? std::log(q) + 1.0 : 1.0;
  return 1.0 - lambda * reg * q / p;
}

std::vector<double> loss_grad_q(const DistillationInstance& inst, const LossSpec& spec,
                                std::span<const double> betas) {
  std::vector<double> grad(inst.size(), 0.0);
  if (spec.kind == LossKind::kMarginMse) return grad;
  const auto teacher = teacher_distribution(inst);
  const auto student = student_distribution(inst);
  const double eps = spec.ckl.prob_clamp_epsilon;
  if (spec.kind == LossKind::kCkl && betas.size() != inst.num_negatives()) {
    throw std::invalid_argument("beta count does not match negatives");
  }
  std::size_t neg = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double p = teacher.probs[i];
    const bool pos = student.positive[i];
    const double q = clamp_prob(student.probs[i], eps, 1.0);
    switch (spec.kind) {
      case LossKind::kKl:
        grad[i] = kl_grad_q(p, q);
        break;
      case LossKind::kCkl: {
        const double beta = pos ? 0.0 : betas[neg++];
        grad[i] = ckl_grad_q(p, clamp_prob(q, eps, 1.0 - eps), pos, spec.ckl.gamma, beta);
        break;
      }
      case LossKind::kBkl:
        grad[i] = bkl_grad_q(p, q, pos, spec.bkl.lambda);
        break;
      case LossKind::kNll:
        grad[i] = nll_grad_q(q, pos);
        break;
      case LossKind::kKlNll:
        grad[i] = kl_grad_q(p, q) + nll_grad_q(q, pos);
        break;
      case LossKind::kMarginMse:
        break;
    }
  }
  return grad;
}

std::vector<double> loss_grad_scores(const DistillationInstance& inst, const LossSpec& spec,
                                     std::span<const double> betas) {
  const std::size_t n = inst.size();
  std::vector<double> grad(n, 0.0);
  if (spec.kind == LossKind::kMarginMse) {
    const auto s = inst.num_positives();
    const double pairs = static_cast<double>(s * inst.num_negatives());
    for (std::size_t j = 0; j < s; ++j) {
      for (std::size_t i = 0; i < inst.num_negatives(); ++i) {
        const auto& pos = inst.positives[j];
        const auto& neg = inst.negatives[i];
        const double diff = (pos.teacher_score - neg.teacher_score) -
                            (pos.student_score - neg.student_score);
        // d/ds+ of diff^2 = -2 diff, d/ds- = +2 diff
        grad[j] -= 2.0 * diff / pairs;
        grad[s + i] += 2.0 * diff / pairs;
      }
    }
    return grad;
  }
  const auto dq = loss_grad_q(inst, spec, betas);
  const auto q = student_distribution(inst).probs;
  // dq_i/ds_k = q_i (delta_ik - q_k)
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) weighted += dq[i] * q[i];
  for (std::size_t k = 0; k < n; ++k) grad[k] = q[k] * (dq[k] - weighted);
  return grad;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

void GradientReport::add(double a, double n, double floor) {
  analytic.push_back(a);
  numeric.push_back(n);
  max_abs_error = std::max(max_abs_error, std::abs(a - n));
  max_rel_error = std::max(max_rel_error, relative_error(a, n, floor));
}

void GradientReport::add_vector(std::span<const double> a, std::span<const double> n, double floor) {
  if (a.size() != n.size()) throw std::invalid_argument("gradient vectors differ in length");
  double diff = 0.0;
  double na = 0.0;
  double nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    analytic.push_back(a[i]);
    numeric.push_back(n[i]);
    max_abs_error = std::max(max_abs_error, std::abs(a[i] - n[i]));
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nn), floor});
  max_rel_error = std::max(max_rel_error, std::sqrt(diff) / denom);
}

namespace {

DistillationInstance random_instance(std::mt19937_64& rng, int max_pos, int max_neg) {
  std::uniform_int_distribution<int> pos_count(1, max_pos);
  std::uniform_int_distribution<int> neg_count(1, max_neg);
  std::normal_distribution<double> score(0.0, 1.5);
  DistillationInstance inst;
  inst.query_id = "q";
  const int s = pos_count(rng);
  const int m = neg_count(rng);
  for (int j = 0; j < s; ++j) inst.positives.push_back({"p" + std::to_string(j), score(rng), score(rng)});
  for (int i = 0; i < m; ++i) inst.negatives.push_back({"n" + std::to_string(i), score(rng), score(rng)});
  return inst;
}

}  // namespace

std::vector<GradientReport> run_gradcheck(const GradcheckOptions& opts) {
  if (opts.draws < 1) throw std::invalid_argument("draws must be >= 1");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = opts.step;
  const double floor = opts.rel_floor;

  auto named = [](std::string name) {
    GradientReport r;
    r.name = std::move(name);
    return r;
  };
  GradientReport kl = named("kl_dq");
  GradientReport ckl = named("ckl_dq");
  GradientReport bkl = named("bkl_dq");
  GradientReport nll = named("nll_dq");
  std::vector<GradientReport> score_reports;
  for (LossKind kind : all_losses()) score_reports.push_back(named(std::string(loss_name(kind)) + "_ds"));

  for (int d = 0; d < opts.draws; ++d) {
    // q-space terms
    const double p = 1e-3 + (1.0 - 2e-3) * unit(rng);
    const double q = opts.q_min + (1.0 - 2.0 * opts.q_min) * unit(rng);
    const bool pos = unit(rng) < 0.5;
    const double gamma = 1.0 + 6.0 * unit(rng);
    const double alpha = (gamma - 1.0) * unit(rng);
    const double beta = pos ? 0.0 : alpha * (2.0 * unit(rng) - 1.0);
    const double lambda = 0.5 * unit(rng);

    kl.add(kl_grad_q(p, q), central_difference([&](double x) { return kl_term(p, x); }, q, h), floor);
    ckl.add(ckl_grad_q(p, q, pos, gamma, beta),
            central_difference([&](double x) { return ckl_term(p, x, pos, gamma, beta); }, q, h),
            floor);
    bkl.add(bkl_grad_q(p, q, pos, lambda),
            central_difference([&](double x) { return bkl_term(p, x, pos, lambda); }, q, h), floor);
    if (pos) {
      nll.add(nll_grad_q(q, true), central_difference([&](double x) { return nll_term(x, true); }, q, h),
              floor);
    }

    // score space
    auto inst = random_instance(rng, opts.max_positives, opts.max_negatives);
    LossSpec spec;
    spec.ckl.gamma = gamma;
    spec.ckl.alpha = alpha;
    spec.bkl.lambda = lambda;
    const auto betas = compute_beta(inst, alpha).aligned(inst);
    const auto kinds = all_losses();
    for (std::size_t li = 0; li < kinds.size(); ++li) {
      spec.kind = kinds[li];
      const auto grad = loss_grad_scores(inst, spec, betas);
      auto scores = inst.student_scores();
      std::vector<double> numeric(scores.size());
      for (std::size_t k = 0; k < scores.size(); ++k) {
        DistillationInstance probe = inst;
        numeric[k] = central_difference(
            [&](double x) {
              auto shifted = scores;
              shifted[k] = x;
              probe.set_student_scores(shifted);
              return instance_loss(probe, spec, betas);
            },
            scores[k], h);
      }
      score_reports[li].add_vector(grad, numeric, floor);
    }
  }

  std::vector<GradientReport> out{kl, ckl, bkl, nll};
  out.insert(out.end(), score_reports.begin(), score_reports.end());
  return out;
}

std::vector<double> default_ratio_grid() {
  std::vector<double> out;
  constexpr int kPoints = 61;
  for (int i = 0; i < kPoints; ++i) {
    out.push_back(std::pow(10.0, -1.0 + 2.0 * i / (kPoints - 1)));
  }
  return out;
}

std::vector<CurveRow> curve_sweep(const CurveOptions& opts) {
  const auto ratios = opts.ratios.empty() ? default_ratio_grid() : opts.ratios;
  if (opts.q_grid.empty()) throw std::invalid_argument("q grid is empty");
  check_exponent(opts.gamma, opts.beta);
  std::vector<CurveRow> rows;
  for (const bool pos : {true, false}) {
    for (double q : opts.q_grid) {
      if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q grid values must lie in (0, 1)");
      for (double r : ratios) {
        if (!(r > 0.0)) throw std::invalid_argument("ratios must be positive");
        const double p = r * q;
        if (p > 1.0) continue;
        rows.push_back({pos ? "positive" : "negative", r, q,
                        grad_ratio(p, q, pos, opts.gamma, pos ? 0.0 : opts.beta),
                        bkl_grad_ratio(p, q, pos, opts.lambda)});
      }
    }
  }
  return rows;
}

double find_ratio_root(bool is_positive, double q, double gamma, double beta) {
  auto g = [&](double log_r) {
    return grad_ratio(std::exp(log_r) * q, q, is_positive, gamma, is_positive ? 0.0 : beta);
  };
  double lo = -60.0;
  double hi = 60.0;
  double glo = g(lo);
  if ((glo > 0.0) == (g(hi) > 0.0)) throw std::runtime_error("no sign change in ratio range");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace ckl
