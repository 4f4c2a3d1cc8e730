#ifndef CKL_CLI_HPP
#define CKL_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ckl/bounds.hpp"
#include "ckl/gradients.hpp"
#include "ckl/synth.hpp"

namespace ckl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

struct WeightsOptions {
  std::string instances;  // empty: built-in example instance
  int index = 0;
};

struct CompareOptions {
  std::vector<LossKind> losses{LossKind::kKl, LossKind::kCkl};
  std::vector<std::pair<double, double>> hp_grid;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

// Parameter groups merged from a JSON config file; unknown keys are rejected.
struct RunConfig {
  CklHyperparams hp;
  BklParams bkl;
  int rank_pool_k = 50;
  SynthConfig synth;
  TrainConfig train;
  BoundsOptions bounds;
  GradcheckOptions gradcheck;
  CurveOptions curves;
  WeightsOptions weights;
  CompareOptions compare;
};

// Throws std::invalid_argument on unknown keys or wrongly typed values.
void apply_config(const nlohmann::json& j, RunConfig& cfg);
RunConfig load_config_file(const std::string& path);

// Report serializers shared by the subcommands.
nlohmann::json to_json(const GradientReport& r, bool include_lists);
nlohmann::json to_json(const BoundReport& r);
std::string weights_csv(const DistillationInstance& inst, const CklHyperparams& hp, int pool_k);
std::string curves_csv(const std::vector<CurveRow>& rows);

// Built-in instance used by `weights` when no instance file is given.
DistillationInstance example_instance();

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ckl::cli

#endif  // CKL_CLI_HPP
