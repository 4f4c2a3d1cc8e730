#ifndef CKL_BOUNDS_HPP
#define CKL_BOUNDS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ckl/core.hpp"

namespace ckl {

// log2(e); converts natural-log quantities to the base-2 ones used in the
// entropy-style terms.
inline constexpr double kLog2E = 1.4426950408889634;

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

// Monte-Carlo tally for one inequality of the lower-bound chain.
struct CheckTally {
  std::string name;
  bool asserted = true;  // false: logged only, never counted as a violation
  long tested = 0;
  long violations = 0;
  double min_slack = 0.0;  // min over samples of lhs - rhs
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  int worst_num_positives = 0;
};

struct BoundReport {
  // Values of the first sample (or the single evaluated instance).
  double ckl_value = 0.0;
  double rhs_eq_cklbound = 0.0;
  double constant_bound = 0.0;
  std::vector<InequalityCheck> intermediate_checks;
  std::vector<CheckTally> tallies;
  std::vector<InequalityCheck> equality_probes;
  long samples_tested = 0;
  long violations = 0;
};

inline constexpr double kBoundTolerance = 1e-9;

// KL + sum_neg p (1 - q^(gamma - beta)) ln q + (gamma / log e) sum_pos q log q.
// Student probabilities are clamped exactly as in ckl_loss.
double eq_cklbound_rhs(const TopOneDistribution& teacher, const TopOneDistribution& student,
                       std::span<const double> betas, const CklHyperparams& hp);

// sum_neg p (-1 + ln p) - 2 gamma / e; independent of the student.
double constant_lower_bound(std::span<const double> teacher_negative_probs, double gamma);

// min over u in [0, 1] of u log2(u / s).
double jensen_min(double s);

// Every inequality of the chain for one instance.
BoundReport evaluate_bound_chain(const TopOneDistribution& teacher,
                                 const TopOneDistribution& student,
                                 std::span<const double> betas, const CklHyperparams& hp);

struct BoundsOptions {
  long samples = 100000;
  int s_max = 2;
  int m_max = 8;
  std::uint64_t seed = 7;
  unsigned threads = 0;  // 0: hardware concurrency
};

BoundReport verify_bound_chain(const BoundsOptions& opts);

// Constructed near-equality cases for the chain's tight steps.
std::vector<InequalityCheck> equality_probes();

}  // namespace ckl

#endif  // CKL_BOUNDS_HPP
