#ifndef CKL_GRADIENTS_HPP
#define CKL_GRADIENTS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ckl/core.hpp"
#include "ckl/losses.hpp"

namespace ckl {

// Derivatives of a single document's loss term with respect to its student
// top-one probability q. Beta is a constant here.
double kl_grad_q(double p, double q);
double ckl_grad_q(double p, double q, bool is_positive, double gamma, double beta);
double bkl_grad_q(double p, double q, bool is_positive, double lambda);
double nll_grad_q(double q, bool is_positive);

// g = (dL/dq) / (dKL/dq). Throws "ratio undefined" for p <= 0.
double grad_ratio(double p, double q, bool is_positive, double gamma, double beta);
double bkl_grad_ratio(double p, double q, bool is_positive, double lambda);

// dL/dq_i for every document of the instance (zeros for margin-MSE, which is
// not a function of q).
std::vector<double> loss_grad_q(const DistillationInstance& inst, const LossSpec& spec,
                                 std::span<const double> betas = {});

// Gradient of instance_loss with respect to the raw student scores.
std::vector<double> loss_grad_scores(const DistillationInstance& inst, const LossSpec& spec,
                                     std::span<const double> betas = {});

double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6);

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

struct GradientReport {
  std::string name;
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;

  void add(double a, double n, double floor);
  // One error sample for a whole gradient vector: ||a - n|| / max(||a||, ||n||, floor).
  void add_vector(std::span<const double> a, std::span<const double> n, double floor);
};

struct GradcheckOptions {
  int draws = 1000;
  std::uint64_t seed = 1;
  double step = 1e-6;
  double q_min = 1e-3;
  double rel_floor = 1e-6;
  int max_positives = 3;
  int max_negatives = 8;
};

// One report per q-space loss term (kl, ckl, bkl, nll), checked per element,
// and one per loss in score space (all six), checked per gradient vector.
std::vector<GradientReport> run_gradcheck(const GradcheckOptions& opts);

struct CurveRow {
  std::string branch;  // "positive" or "negative"
  double pq_ratio = 0.0;
  double q = 0.0;
  double g_ckl = 0.0;
  double g_bkl = 0.0;
};

struct CurveOptions {
  double gamma = 5.0;
  double beta = 0.0;
  double lambda = 0.1;
  std::vector<double> q_grid{0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> ratios;  // empty: 61 log-spaced points in [0.1, 10]
};

std::vector<double> default_ratio_grid();

// Rows with p = ratio * q > 1 are skipped since p is a probability.
std::vector<CurveRow> curve_sweep(const CurveOptions& opts);

// p/q at which g_CKL changes sign for fixed q, found by bisection on grad_ratio.
double find_ratio_root(bool is_positive, double q, double gamma, double beta);

}  // namespace ckl

#endif  // CKL_GRADIENTS_HPP
