#include "ckl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ckl/beta.hpp"
#include "ckl/gradients.hpp"
#include "ckl/output.hpp"

namespace ckl {

void SynthConfig::validate() const {
  if (num_queries < 2) throw std::invalid_argument("num_queries must be >= 2");
  if (positives < 1 || negatives < 1) throw std::invalid_argument("need >= 1 positive and negative");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (!(teacher_noise_sigma >= 0.0)) throw std::invalid_argument("teacher_noise_sigma must be >= 0");
  if (!(teacher_corruption_rate >= 0.0 && teacher_corruption_rate <= 1.0)) {
    throw std::invalid_argument("teacher_corruption_rate must lie in [0, 1]");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  if (!std::isfinite(separation) || !(query_spread >= 0.0)) {
    throw std::invalid_argument("separation must be finite and query_spread >= 0");
  }
}

namespace {

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SynthDataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto dim = static_cast<std::size_t>(cfg.feature_dim);

  std::vector<double> shared(dim);
  for (double& x : shared) x = gauss(rng);
  normalize(shared);

  SynthDataset data;
  data.feature_dim = cfg.feature_dim;
  const int num_test = std::max(1, static_cast<int>(std::lround(cfg.num_queries * cfg.test_fraction)));
  const int num_train = cfg.num_queries - num_test;
  if (num_train < 1) throw std::invalid_argument("test_fraction leaves no training queries");

  for (int qi = 0; qi < cfg.num_queries; ++qi) {
    std::vector<double> direction(dim);
    for (std::size_t k = 0; k < dim; ++k) direction[k] = shared[k] + cfg.query_spread * gauss(rng);
    normalize(direction);

    SynthQuery query;
    query.query_id = "q" + std::to_string(qi);
    query.num_positives = cfg.positives;
    query.corrupted = unit(rng) < cfg.teacher_corruption_rate;
    const int n = cfg.positives + cfg.negatives;
    for (int d = 0; d < n; ++d) {
      SynthDoc doc;
      doc.relevant = d < cfg.positives;
      doc.doc_id = query.query_id + (doc.relevant ? "_p" : "_n") + std::to_string(d);
      doc.features.resize(dim);
      for (double& x : doc.features) x = gauss(rng);
      if (doc.relevant) {
        for (std::size_t k = 0; k < dim; ++k) doc.features[k] += cfg.separation * direction[k];
      }
      const double latent = dot(direction, doc.features);
      doc.teacher_score = latent + cfg.teacher_noise_sigma * gauss(rng);
      if (query.corrupted) doc.teacher_score = -doc.teacher_score;
      query.docs.push_back(std::move(doc));
    }
    (qi < num_train ? data.train : data.test).push_back(std::move(query));
  }
  return data;
}

double StudentModel::score(const std::vector<double>& features) const {
  return dot(weights, features);
}

StudentModel init_student(int feature_dim, std::uint64_t seed, double scale, double learning_rate) {
  StudentModel m;
  m.learning_rate = learning_rate;
  m.weights.resize(static_cast<std::size_t>(feature_dim));
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& w : m.weights) w = scale * gauss(rng);
  return m;
}

DistillationInstance make_instance(const SynthQuery& query, const StudentModel& model) {
  DistillationInstance inst;
  inst.query_id = query.query_id;
  for (const auto& doc : query.docs) {
    DocEntry e{doc.doc_id, doc.teacher_score, model.score(doc.features)};
    (doc.relevant ? inst.positives : inst.negatives).push_back(std::move(e));
  }
  return inst;
}

void TrainConfig::validate() const {
  if (epochs < 0 || warmup_epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (rank_pool_k < 1) throw std::invalid_argument("rank_pool_k must be >= 1");
  loss.ckl.validate();
  loss.bkl.validate();
}

RankingMetrics evaluate_queries(const std::vector<SynthQuery>& queries, const StudentModel& model) {
  RankingMetrics sum;
  if (queries.empty()) return sum;
  for (const auto& q : queries) {
    const auto m = evaluate(student_distribution(make_instance(q, model)));
    sum.mrr_at_10 += m.mrr_at_10;
    sum.ndcg_at_10 += m.ndcg_at_10;
    sum.positive_entropy += m.positive_entropy;
    sum.margin_separation += m.margin_separation;
  }
  const double n = static_cast<double>(queries.size());
  sum.mrr_at_10 /= n;
  sum.ndcg_at_10 /= n;
  sum.positive_entropy /= n;
  sum.margin_separation /= n;
  return sum;
}

TrainRunLog train(const SynthDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty()) throw std::invalid_argument("empty training split");
  TrainRunLog log;
  StudentModel model = init_student(data.feature_dim, cfg.init_seed, cfg.init_scale, cfg.learning_rate);
  std::mt19937_64 shuffle_rng(cfg.init_seed ^ 0x5bd1e995ULL);

  const std::size_t n = data.train.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((n + batch - 1) / batch);
  const long period = cfg.loss.ckl.beta_update_period > 0
                          ? cfg.loss.ckl.beta_update_period
                          : std::max(1L, steps_per_epoch / 10);

  // Betas are held fixed between updates; one vector per training query.
  std::vector<BetaAssignment> beta_state(n);
  std::vector<std::vector<double>> betas(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  long step = 0;
  long refine_step = 0;

  for (int epoch = 0; epoch < cfg.warmup_epochs + cfg.epochs; ++epoch) {
    const bool warmup = epoch < cfg.warmup_epochs;
    LossSpec spec = cfg.loss;
    if (warmup) spec.kind = cfg.warmup_loss;
    const bool uses_beta = spec.kind == LossKind::kCkl;

    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);

      // Applied between steps, from the latest student scores.
      if (uses_beta && refine_step % period == 0) {
        ++log.beta_updates;
        for (std::size_t i = 0; i < n; ++i) {
          const auto inst = make_instance(data.train[i], model);
          beta_state[i] = schedule_update(refine_step, period, beta_state[i], inst,
                                          spec.ckl.alpha, cfg.rank_pool_k);
          betas[i] = beta_state[i].aligned(inst);
        }
      }

      std::vector<double> grad(model.weights.size(), 0.0);
      StepRecord rec;
      rec.step = step;
      rec.warmup = warmup;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t qi = order[b];
        const auto& query = data.train[qi];
        const auto inst = make_instance(query, model);
        std::span<const double> inst_betas;
        if (uses_beta) {
          inst_betas = betas[qi];
          rec.max_abs_beta = std::max(rec.max_abs_beta, beta_state[qi].max_abs());
        }
        rec.loss += instance_loss(inst, spec, inst_betas);
        const auto m = evaluate(student_distribution(inst));
        rec.margin_separation += m.margin_separation;
        rec.positive_entropy += m.positive_entropy;
        rec.mrr_at_10 += m.mrr_at_10;
        rec.ndcg_at_10 += m.ndcg_at_10;

        // Instance layout is positives then negatives, matching query.docs.
        const auto ds = loss_grad_scores(inst, spec, inst_betas);
        for (std::size_t d = 0; d < query.docs.size(); ++d) {
          const auto& x = query.docs[d].features;
          for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += ds[d] * x[k];
        }
      }
      const double count = static_cast<double>(end - start);
      rec.loss /= count;
      rec.margin_separation /= count;
      rec.positive_entropy /= count;
      rec.mrr_at_10 /= count;
      rec.ndcg_at_10 /= count;
      if (!std::isfinite(rec.loss)) {
        throw std::runtime_error("training diverged at step " + std::to_string(step) +
                                 ": non-finite loss (" + std::string(loss_name(spec.kind)) + ")");
      }
      for (std::size_t k = 0; k < grad.size(); ++k) {
        model.weights[k] -= model.learning_rate * grad[k] / count;
        if (!std::isfinite(model.weights[k])) {
          throw std::runtime_error("training diverged at step " + std::to_string(step) +
                                   ": non-finite weights");
        }
      }
      log.records.push_back(rec);
      ++step;
      if (!warmup) ++refine_step;
    }
  }
  log.final_train = evaluate_queries(data.train, model);
  log.final_test = evaluate_queries(data.test, model);
  log.model = std::move(model);
  return log;
}

std::string trainlog_csv(const TrainRunLog& log) {
  std::ostringstream out;
  out << "step,loss,margin,entropy,mrr10,ndcg10\n";
  for (const auto& r : log.records) {
    out << r.step << ',' << format_double(r.loss) << ',' << format_double(r.margin_separation)
        << ',' << format_double(r.positive_entropy) << ',' << format_double(r.mrr_at_10) << ','
        << format_double(r.ndcg_at_10) << '\n';
  }
  return out.str();
}

namespace {

void summarize(ComparisonCell& cell) {
  const double n = static_cast<double>(cell.per_seed.size());
  RankingMetrics mean;
  for (const auto& m : cell.per_seed) {
    mean.mrr_at_10 += m.mrr_at_10 / n;
    mean.ndcg_at_10 += m.ndcg_at_10 / n;
    mean.positive_entropy += m.positive_entropy / n;
    mean.margin_separation += m.margin_separation / n;
  }
  RankingMetrics var;
  for (const auto& m : cell.per_seed) {
    var.mrr_at_10 += std::pow(m.mrr_at_10 - mean.mrr_at_10, 2);
    var.ndcg_at_10 += std::pow(m.ndcg_at_10 - mean.ndcg_at_10, 2);
    var.positive_entropy += std::pow(m.positive_entropy - mean.positive_entropy, 2);
    var.margin_separation += std::pow(m.margin_separation - mean.margin_separation, 2);
  }
  // sample standard deviation; 0 for a single seed
  const double denom = n > 1 ? n - 1 : 1;
  cell.mean = mean;
  cell.stddev = {std::sqrt(var.mrr_at_10 / denom), std::sqrt(var.ndcg_at_10 / denom),
                 std::sqrt(var.positive_entropy / denom), std::sqrt(var.margin_separation / denom)};
}

}  // namespace

std::vector<ComparisonCell> compare_losses(const CompareConfig& cfg) {
  if (cfg.losses.size() < 2) throw std::invalid_argument("compare needs at least two losses");
  if (cfg.seeds.empty()) throw std::invalid_argument("compare needs at least one seed");
  std::vector<std::pair<double, double>> grid = cfg.hp_grid;
  if (grid.empty()) grid.emplace_back(5.0, 1.0);

  std::vector<ComparisonCell> cells;
  for (LossKind kind : cfg.losses) {
    if (kind == LossKind::kCkl) {
      for (const auto& [g, a] : grid) {
        ComparisonCell c;
        c.kind = kind;
        c.gamma_alpha = std::make_pair(g, a);
        c.label = "ckl(gamma=" + format_double(g) + ",alpha=" + format_double(a) + ")";
        cells.push_back(c);
      }
    } else {
      ComparisonCell c;
      c.kind = kind;
      c.label = std::string(loss_name(kind));
      cells.push_back(c);
    }
  }

  for (std::uint64_t seed : cfg.seeds) {
    SynthConfig synth = cfg.synth;
    synth.rng_seed = seed;
    const auto data = generate_dataset(synth);
    for (auto& cell : cells) {
      TrainConfig tc = cfg.train;
      tc.init_seed = seed;
      tc.loss.kind = cell.kind;
      if (cell.gamma_alpha) {
        tc.loss.ckl.gamma = cell.gamma_alpha->first;
        tc.loss.ckl.alpha = cell.gamma_alpha->second;
      }
      cell.seeds.push_back(seed);
      cell.per_seed.push_back(train(data, tc).final_test);
    }
  }
  for (auto& cell : cells) summarize(cell);
  return cells;
}

std::string comparison_csv(const std::vector<ComparisonCell>& cells) {
  std::ostringstream out;
  out << "loss,gamma,alpha,seeds,mrr10_mean,mrr10_std,ndcg10_mean,ndcg10_std,margin_mean,"
         "margin_std,entropy_mean,entropy_std\n";
  for (const auto& c : cells) {
    out << loss_name(c.kind) << ',';
    if (c.gamma_alpha) {
      out << format_double(c.gamma_alpha->first) << ',' << format_double(c.gamma_alpha->second);
    } else {
      out << ',';
    }
    out << ',' << c.per_seed.size() << ',' << format_double(c.mean.mrr_at_10) << ','
        << format_double(c.stddev.mrr_at_10) << ',' << format_double(c.mean.ndcg_at_10) << ','
        << format_double(c.stddev.ndcg_at_10) << ',' << format_double(c.mean.margin_separation)
        << ',' << format_double(c.stddev.margin_separation) << ','
        << format_double(c.mean.positive_entropy) << ',' << format_double(c.stddev.positive_entropy)
        << '\n';
  }
  return out.str();
}

}  // namespace ckl
