#include "ckl/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "ckl/beta.hpp"
#include "ckl/instance_io.hpp"
#include "ckl/output.hpp"

namespace ckl::cli {

using nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;

template <class T>
Setter setter(const std::string& key, T& target) {
  return [key, &target](const json& v) {
    try {
      target = v.get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config key '" + key + "' has the wrong type");
    }
  };
}

Setter loss_setter(const std::string& key, LossKind& target) {
  return [key, &target](const json& v) {
    if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
    const auto kind = parse_loss(v.get<std::string>());
    if (!kind) throw std::invalid_argument("unknown loss '" + v.get<std::string>() + "'");
    target = *kind;
  };
}

void apply_group(const json& group, const std::string& name,
                 const std::map<std::string, Setter>& setters) {
  if (!group.is_object()) throw std::invalid_argument("config group '" + name + "' must be an object");
  for (const auto& [key, value] : group.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::invalid_argument("unknown config key '" + name + "." + key + "'");
    }
    it->second(value);
  }
}

std::vector<LossKind> parse_loss_list(const std::vector<std::string>& names) {
  std::vector<LossKind> out;
  for (const auto& n : names) {
    const auto kind = parse_loss(n);
    if (!kind) throw std::invalid_argument("unknown loss '" + n + "'");
    out.push_back(*kind);
  }
  return out;
}

// "5:1,1:0" -> {(5,1), (1,0)}
std::vector<std::pair<double, double>> parse_hp_grid(const std::vector<std::string>& items) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("hp grid entries look like gamma:alpha");
    try {
      out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad hp grid entry '" + item + "'");
    }
  }
  return out;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty()) {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

struct Overrides {
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> items;

  template <class T>
  CLI::Option* bind(CLI::App* app, const std::string& name, const std::string& desc,
                    std::function<void(RunConfig&, const T&)> apply) {
    auto store = std::make_shared<T>();
    auto* opt = app->add_option(name, *store, desc);
    items.emplace_back(opt, [store, apply](RunConfig& c) { apply(c, *store); });
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& [opt, fn] : items) {
      if (opt->count() > 0) fn(cfg);
    }
  }
};

void bind_hp(CLI::App* app, Overrides& ov) {
  ov.bind<double>(app, "--gamma", "CKL exponent gamma", [](RunConfig& c, const double& v) { c.hp.gamma = v; });
  ov.bind<double>(app, "--alpha", "beta scale alpha", [](RunConfig& c, const double& v) { c.hp.alpha = v; });
  ov.bind<int>(app, "--beta-period", "steps between beta updates (0 = auto)",
               [](RunConfig& c, const int& v) { c.hp.beta_update_period = v; });
  ov.bind<double>(app, "--epsilon", "probability clamp",
                  [](RunConfig& c, const double& v) { c.hp.prob_clamp_epsilon = v; });
  ov.bind<int>(app, "--pool-k", "rank pool size", [](RunConfig& c, const int& v) { c.rank_pool_k = v; });
  ov.bind<double>(app, "--lambda", "BKL regularization weight",
                  [](RunConfig& c, const double& v) { c.bkl.lambda = v; });
}

void bind_synth_train(CLI::App* app, Overrides& ov) {
  ov.bind<int>(app, "--queries", "number of queries", [](RunConfig& c, const int& v) { c.synth.num_queries = v; });
  ov.bind<int>(app, "--positives", "positives per query", [](RunConfig& c, const int& v) { c.synth.positives = v; });
  ov.bind<int>(app, "--negatives", "negatives per query", [](RunConfig& c, const int& v) { c.synth.negatives = v; });
  ov.bind<int>(app, "--dim", "feature dimension", [](RunConfig& c, const int& v) { c.synth.feature_dim = v; });
  ov.bind<double>(app, "--sigma", "teacher noise sigma",
                  [](RunConfig& c, const double& v) { c.synth.teacher_noise_sigma = v; });
  ov.bind<double>(app, "--corruption", "teacher corruption rate",
                  [](RunConfig& c, const double& v) { c.synth.teacher_corruption_rate = v; });
  ov.bind<double>(app, "--separation", "relevant-document shift",
                  [](RunConfig& c, const double& v) { c.synth.separation = v; });
  ov.bind<std::uint64_t>(app, "--data-seed", "dataset seed",
                         [](RunConfig& c, const std::uint64_t& v) { c.synth.rng_seed = v; });
  ov.bind<std::string>(app, "--loss", "loss to train with", [](RunConfig& c, const std::string& v) {
    c.train.loss.kind = parse_loss_list({v}).front();
  });
  ov.bind<int>(app, "--epochs", "refinement epochs", [](RunConfig& c, const int& v) { c.train.epochs = v; });
  ov.bind<int>(app, "--batch-size", "mini-batch size", [](RunConfig& c, const int& v) { c.train.batch_size = v; });
  ov.bind<double>(app, "--lr", "learning rate", [](RunConfig& c, const double& v) { c.train.learning_rate = v; });
  ov.bind<int>(app, "--warmup-epochs", "warm-up epochs",
               [](RunConfig& c, const int& v) { c.train.warmup_epochs = v; });
  ov.bind<std::string>(app, "--warmup-loss", "warm-up loss", [](RunConfig& c, const std::string& v) {
    c.train.warmup_loss = parse_loss_list({v}).front();
  });
  ov.bind<std::uint64_t>(app, "--init-seed", "student initialization seed",
                         [](RunConfig& c, const std::uint64_t& v) { c.train.init_seed = v; });
}

// Copies the shared hyperparameter groups into the trainer config.
TrainConfig merged_train(const RunConfig& cfg) {
  TrainConfig tc = cfg.train;
  tc.loss.ckl = cfg.hp;
  tc.loss.bkl = cfg.bkl;
  tc.rank_pool_k = cfg.rank_pool_k;
  return tc;
}

json metrics_json(const RankingMetrics& m) {
  return {{"mrr_at_10", m.mrr_at_10},
          {"ndcg_at_10", m.ndcg_at_10},
          {"positive_entropy", m.positive_entropy},
          {"margin_separation", m.margin_separation}};
}

bool curves_have_expected_shape(const std::vector<CurveRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<std::pair<double, double>>> series;
  for (const auto& r : rows) series[{r.branch, r.q}].emplace_back(r.pq_ratio, r.g_ckl);
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const bool positive = key.first == "positive";
      if (positive && pts[i].second < pts[i - 1].second) return false;
      if (!positive && pts[i].second > pts[i - 1].second) return false;
    }
  }
  return true;
}

}  // namespace

void apply_config(const json& j, RunConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::map<std::string, std::function<void(const json&)>> groups;
  groups["hp"] = [&](const json& g) {
    apply_group(g, "hp",
                {{"gamma", setter("gamma", cfg.hp.gamma)},
                 {"alpha", setter("alpha", cfg.hp.alpha)},
                 {"beta_update_period", setter("beta_update_period", cfg.hp.beta_update_period)},
                 {"prob_clamp_epsilon", setter("prob_clamp_epsilon", cfg.hp.prob_clamp_epsilon)},
                 {"rank_pool_k", setter("rank_pool_k", cfg.rank_pool_k)},
                 {"lambda", setter("lambda", cfg.bkl.lambda)}});
  };
  groups["synth"] = [&](const json& g) {
    auto& s = cfg.synth;
    apply_group(g, "synth",
                {{"num_queries", setter("num_queries", s.num_queries)},
                 {"positives", setter("positives", s.positives)},
                 {"negatives", setter("negatives", s.negatives)},
                 {"feature_dim", setter("feature_dim", s.feature_dim)},
                 {"teacher_noise_sigma", setter("teacher_noise_sigma", s.teacher_noise_sigma)},
                 {"teacher_corruption_rate", setter("teacher_corruption_rate", s.teacher_corruption_rate)},
                 {"test_fraction", setter("test_fraction", s.test_fraction)},
                 {"separation", setter("separation", s.separation)},
                 {"query_spread", setter("query_spread", s.query_spread)},
                 {"rng_seed", setter("rng_seed", s.rng_seed)}});
  };
  groups["train"] = [&](const json& g) {
    auto& t = cfg.train;
    apply_group(g, "train",
                {{"loss", loss_setter("loss", t.loss.kind)},
                 {"epochs", setter("epochs", t.epochs)},
                 {"batch_size", setter("batch_size", t.batch_size)},
                 {"learning_rate", setter("learning_rate", t.learning_rate)},
                 {"warmup_epochs", setter("warmup_epochs", t.warmup_epochs)},
                 {"warmup_loss", loss_setter("warmup_loss", t.warmup_loss)},
                 {"init_seed", setter("init_seed", t.init_seed)},
                 {"init_scale", setter("init_scale", t.init_scale)}});
  };
  groups["bounds"] = [&](const json& g) {
    auto& b = cfg.bounds;
    apply_group(g, "bounds",
                {{"samples", setter("samples", b.samples)},
                 {"s_max", setter("s_max", b.s_max)},
                 {"m_max", setter("m_max", b.m_max)},
                 {"seed", setter("seed", b.seed)},
                 {"threads", setter("threads", b.threads)}});
  };
  groups["gradcheck"] = [&](const json& g) {
    auto& o = cfg.gradcheck;
    apply_group(g, "gradcheck",
                {{"draws", setter("draws", o.draws)},
                 {"seed", setter("seed", o.seed)},
                 {"step", setter("step", o.step)}});
  };
  groups["curves"] = [&](const json& g) {
    auto& o = cfg.curves;
    apply_group(g, "curves",
                {{"gamma", setter("gamma", o.gamma)},
                 {"beta", setter("beta", o.beta)},
                 {"lambda", setter("lambda", o.lambda)},
                 {"q_grid", setter("q_grid", o.q_grid)},
                 {"ratios", setter("ratios", o.ratios)}});
  };
  groups["weights"] = [&](const json& g) {
    apply_group(g, "weights",
                {{"instances", setter("instances", cfg.weights.instances)},
                 {"index", setter("index", cfg.weights.index)}});
  };
  groups["compare"] = [&](const json& g) {
    std::vector<std::string> losses;
    std::vector<std::vector<double>> grid;
    bool has_losses = false;
    bool has_grid = false;
    apply_group(g, "compare",
                {{"losses", [&](const json& v) { setter("losses", losses)(v); has_losses = true; }},
                 {"hp_grid", [&](const json& v) { setter("hp_grid", grid)(v); has_grid = true; }},
                 {"seeds", setter("seeds", cfg.compare.seeds)}});
    if (has_losses) cfg.compare.losses = parse_loss_list(losses);
    if (has_grid) {
      cfg.compare.hp_grid.clear();
      for (const auto& pair : grid) {
        if (pair.size() != 2) throw std::invalid_argument("hp_grid entries are [gamma, alpha]");
        cfg.compare.hp_grid.emplace_back(pair[0], pair[1]);
      }
    }
  };
  for (const auto& [key, value] : j.items()) {
    auto it = groups.find(key);
    if (it == groups.end()) throw std::invalid_argument("unknown config group '" + key + "'");
    it->second(value);
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg;
  apply_config(j, cfg);
  return cfg;
}

json to_json(const GradientReport& r, bool include_lists) {
  json j = {{"name", r.name},
            {"count", r.analytic.size()},
            {"max_rel_error", r.max_rel_error},
            {"max_abs_error", r.max_abs_error}};
  if (include_lists) {
    j["analytic"] = r.analytic;
    j["numeric"] = r.numeric;
  }
  return j;
}

json to_json(const BoundReport& r) {
  json checks = json::array();
  for (const auto& c : r.intermediate_checks) {
    checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
  }
  json probes = json::array();
  for (const auto& c : r.equality_probes) {
    probes.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds},
                      {"gap", c.lhs - c.rhs}});
  }
  json tallies = json::array();
  for (const auto& t : r.tallies) {
    tallies.push_back({{"name", t.name},
                       {"asserted", t.asserted},
                       {"tested", t.tested},
                       {"violations", t.violations},
                       {"min_slack", t.min_slack},
                       {"worst_lhs", t.worst_lhs},
                       {"worst_rhs", t.worst_rhs},
                       {"worst_num_positives", t.worst_num_positives}});
  }
  return {{"ckl_value", r.ckl_value},
          {"rhs_eq_cklbound", r.rhs_eq_cklbound},
          {"constant_bound", r.constant_bound},
          {"intermediate_checks", checks},
          {"tallies", tallies},
          {"equality_probes", probes},
          {"samples_tested", r.samples_tested},
          {"violations", r.violations}};
}

DistillationInstance example_instance() {
  DistillationInstance inst;
  inst.query_id = "example";
  inst.positives = {{"p1", 3.2, 3.0}, {"p2", 2.9, 1.8}, {"p3", 2.5, 0.4}};
  inst.negatives = {{"n1", 0.8, 2.4}, {"n2", 1.1, 1.2}, {"n3", 0.2, 0.9}, {"n4", -0.3, 0.1},
                    {"n5", 0.4, -0.5}, {"n6", -1.0, -1.0}, {"n7", -0.6, -2.0}};
  return inst;
}

std::string weights_csv(const DistillationInstance& inst, const CklHyperparams& hp, int pool_k) {
  const auto student = student_distribution(inst);
  const auto betas = compute_beta(inst, hp.alpha, pool_k).aligned(inst);
  const auto w = ckl_weights(student, betas, hp);
  struct Row {
    bool positive;
    double q;
    double weight;
  };
  std::vector<Row> rows;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    if (student.positive[i]) {
      rows.push_back({true, student.probs[i], w.positive_weights[pos++]});
    } else {
      rows.push_back({false, student.probs[i], w.negative_weights[neg++]});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.q > b.q; });
  std::ostringstream out;
  out << "doc_index,kind,q,weight\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i + 1 << ',' << (rows[i].positive ? "positive" : "negative") << ','
        << format_double(rows[i].q) << ',' << format_double(rows[i].weight) << '\n';
  }
  return out.str();
}

std::string curves_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "branch,pq_ratio,q,g_ckl,g_bkl\n";
  for (const auto& r : rows) {
    out << r.branch << ',' << format_double(r.pq_ratio) << ',' << format_double(r.q) << ','
        << format_double(r.g_ckl) << ',' << format_double(r.g_bkl) << '\n';
  }
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrastively-weighted KL distillation loss laboratory", "ckl"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  Overrides ov;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_path, "output file (default: stdout)");
  };

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every analytic gradient");
  add_common(gradcheck);
  bool full_lists = false;
  ov.bind<int>(gradcheck, "--draws", "random draws", [](RunConfig& c, const int& v) { c.gradcheck.draws = v; });
  ov.bind<std::uint64_t>(gradcheck, "--seed", "rng seed",
                         [](RunConfig& c, const std::uint64_t& v) { c.gradcheck.seed = v; });
  ov.bind<double>(gradcheck, "--step", "central difference step",
                  [](RunConfig& c, const double& v) { c.gradcheck.step = v; });
  gradcheck->add_flag("--full", full_lists, "include analytic/numeric lists");

  auto* bounds = app.add_subcommand("bounds", "Monte-Carlo check of the CKL lower-bound chain");
  add_common(bounds);
  ov.bind<long>(bounds, "--samples", "number of random draws",
                [](RunConfig& c, const long& v) { c.bounds.samples = v; });
  ov.bind<int>(bounds, "--s-max", "max positives per draw", [](RunConfig& c, const int& v) { c.bounds.s_max = v; });
  ov.bind<int>(bounds, "--m-max", "max negatives per draw", [](RunConfig& c, const int& v) { c.bounds.m_max = v; });
  ov.bind<std::uint64_t>(bounds, "--seed", "rng seed",
                         [](RunConfig& c, const std::uint64_t& v) { c.bounds.seed = v; });
  ov.bind<unsigned>(bounds, "--threads", "worker threads (0 = all cores)",
                    [](RunConfig& c, const unsigned& v) { c.bounds.threads = v; });

  auto* weights = app.add_subcommand("weights", "CKL term weights sorted by student probability");
  add_common(weights);
  bind_hp(weights, ov);
  ov.bind<std::string>(weights, "--instances", "JSON-lines instance file",
                       [](RunConfig& c, const std::string& v) { c.weights.instances = v; });
  ov.bind<int>(weights, "--index", "instance line (0-based)", [](RunConfig& c, const int& v) { c.weights.index = v; });

  auto* curves = app.add_subcommand("curves", "gradient contribution ratios over p/q");
  add_common(curves);
  ov.bind<double>(curves, "--gamma", "gamma", [](RunConfig& c, const double& v) { c.curves.gamma = v; });
  ov.bind<double>(curves, "--beta", "beta", [](RunConfig& c, const double& v) { c.curves.beta = v; });
  ov.bind<double>(curves, "--lambda", "BKL lambda", [](RunConfig& c, const double& v) { c.curves.lambda = v; });
  ov.bind<std::vector<double>>(curves, "--q-grid", "student probabilities",
                               [](RunConfig& c, const std::vector<double>& v) { c.curves.q_grid = v; })
      ->delimiter(',');
  ov.bind<std::vector<double>>(curves, "--ratios", "p/q ratios",
                               [](RunConfig& c, const std::vector<double>& v) { c.curves.ratios = v; })
      ->delimiter(',');

  auto* trainer = app.add_subcommand("train", "train a linear student on synthetic data");
  add_common(trainer);
  std::string summary_path;
  trainer->add_option("--summary", summary_path, "summary JSON path");
  bind_hp(trainer, ov);
  bind_synth_train(trainer, ov);

  auto* compare = app.add_subcommand("compare", "compare losses across seeds");
  add_common(compare);
  bind_hp(compare, ov);
  bind_synth_train(compare, ov);
  ov.bind<std::vector<std::string>>(compare, "--losses", "losses to compare",
                                    [](RunConfig& c, const std::vector<std::string>& v) {
                                      c.compare.losses = parse_loss_list(v);
                                    })
      ->delimiter(',');
  ov.bind<std::vector<std::uint64_t>>(compare, "--seeds", "seeds",
                                      [](RunConfig& c, const std::vector<std::uint64_t>& v) {
                                        c.compare.seeds = v;
                                      })
      ->delimiter(',');
  ov.bind<std::vector<std::string>>(compare, "--hp-grid", "gamma:alpha pairs for CKL",
                                    [](RunConfig& c, const std::vector<std::string>& v) {
                                      c.compare.hp_grid = parse_hp_grid(v);
                                    })
      ->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    ov.apply(cfg);

    if (*gradcheck) {
      constexpr double kTolerance = 1e-6;
      const auto reports = run_gradcheck(cfg.gradcheck);
      double max_rel = 0.0;
      double max_abs = 0.0;
      json arr = json::array();
      for (const auto& r : reports) {
        max_rel = std::max(max_rel, r.max_rel_error);
        max_abs = std::max(max_abs, r.max_abs_error);
        arr.push_back(to_json(r, full_lists));
      }
      const bool passed = max_rel < kTolerance;
      const json j = {{"draws", cfg.gradcheck.draws}, {"seed", cfg.gradcheck.seed},
                      {"step", cfg.gradcheck.step},   {"tolerance", kTolerance},
                      {"max_rel_error", max_rel},     {"max_abs_error", max_abs},
                      {"passed", passed},             {"reports", arr}};
      emit(out_path, j.dump(2) + "\n", out);
      return passed ? kExitOk : kExitViolation;
    }
    if (*bounds) {
      const auto report = verify_bound_chain(cfg.bounds);
      json j = to_json(report);
      j["jensen_min_s2"] = jensen_min(2.0);
      j["passed"] = report.violations == 0;
      emit(out_path, j.dump(2) + "\n", out);
      return report.violations == 0 ? kExitOk : kExitViolation;
    }
    if (*weights) {
      cfg.hp.validate();
      DistillationInstance inst = example_instance();
      if (!cfg.weights.instances.empty()) {
        const auto all = read_instances_file(cfg.weights.instances);
        if (cfg.weights.index < 0 || static_cast<std::size_t>(cfg.weights.index) >= all.size()) {
          throw std::invalid_argument("instance index out of range");
        }
        inst = all[static_cast<std::size_t>(cfg.weights.index)];
      }
      emit(out_path, weights_csv(inst, cfg.hp, cfg.rank_pool_k), out);
      const auto betas = compute_beta(inst, cfg.hp.alpha, cfg.rank_pool_k).aligned(inst);
      const auto report = check_weight_ordering(student_distribution(inst), betas, cfg.hp);
      if (report.violations() > 0) {
        err << "weight ordering violated in " << report.violations() << " pairs\n";
        return kExitViolation;
      }
      return kExitOk;
    }
    if (*curves) {
      const auto rows = curve_sweep(cfg.curves);
      emit(out_path, curves_csv(rows), out);
      if (!curves_have_expected_shape(rows)) {
        err << "gradient ratio curves are not monotone in p/q\n";
        return kExitViolation;
      }
      return kExitOk;
    }
    if (*trainer) {
      cfg.hp.validate();
      const auto tc = merged_train(cfg);
      const auto data = generate_dataset(cfg.synth);
      const auto log = train(data, tc);
      emit(out_path, trainlog_csv(log), out);
      if (!summary_path.empty()) {
        const json j = {{"loss", loss_name(tc.loss.kind)},
                        {"steps", log.records.size()},
                        {"beta_updates", log.beta_updates},
                        {"final_train", metrics_json(log.final_train)},
                        {"final_test", metrics_json(log.final_test)},
                        {"weights", log.model.weights}};
        write_file_atomic(summary_path, j.dump(2) + "\n");
      }
      for (const auto& r : log.records) {
        const bool ok = tc.loss.ckl.alpha > 0.0 ? r.max_abs_beta < tc.loss.ckl.alpha : r.max_abs_beta == 0.0;
        if (!ok) {
          err << "beta magnitude bound violated at step " << r.step << "\n";
          return kExitViolation;
        }
      }
      return kExitOk;
    }
    if (*compare) {
      cfg.hp.validate();
      CompareConfig cc;
      cc.synth = cfg.synth;
      cc.train = merged_train(cfg);
      cc.losses = cfg.compare.losses;
      cc.hp_grid = cfg.compare.hp_grid;
      cc.seeds = cfg.compare.seeds;
      emit(out_path, comparison_csv(compare_losses(cc)), out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ckl::cli
