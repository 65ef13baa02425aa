#include "mvrbm/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "mvrbm/errors.hpp"
#include "mvrbm/inference.hpp"
#include "mvrbm/oracle.hpp"
#include "mvrbm/rng.hpp"
#include "parallel.hpp"

namespace mvrbm {

void TrainConfig::validate() const {
  if (hidden < 1) throw UsageError("hidden must be >= 1");
  if (cd_steps < 1) throw UsageError("cd_steps must be >= 1");
  if (!(lr_w > 0.0 && lr_a > 0.0 && lr_b > 0.0)) throw UsageError("learning rates must be positive");
  for (double s : type_lr_scale)
    if (!(s > 0.0)) throw UsageError("per-type learning-rate scales must be positive");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw UsageError("alpha and beta must be >= 0");
  if (groups < 1) throw UsageError("groups must be >= 1");
  if (alpha > 0.0 && hidden % groups != 0)
    throw UsageError("groups (" + std::to_string(groups) + ") must divide hidden (" + std::to_string(hidden) + ")");
  if (metric_neighbors < 0 || metric_non_neighbors < 0) throw UsageError("metric pair counts must be >= 0");
  if (!(rho1 > 0.0 && rho1 < 1.0)) throw UsageError("rho1 must lie in (0, 1)");
  if (!(init_scale >= 0.0)) throw UsageError("init_scale must be >= 0");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

namespace {

struct RecordTerms {
  Eigen::MatrixXd dW;
  Eigen::VectorXd da;
  Eigen::VectorXd db;
};

// One Gibbs sweep v -> h ~ P(h|v) -> v' ~ P(v|h), k times. Returns v_k.
VisibleState run_chain(VisibleState v, Eigen::VectorXd h, const ModelParams& params, const VisibleSchema& schema,
                       int steps, const SampleOptions& sampling, Rng& rng) {
  for (int s = 0; s < steps; ++s) {
    if (s > 0) h = sample_hidden(hidden_conditional(v, params, schema), rng);
    v = sample_visible(visible_conditional(h, params, schema, v.lengths), schema, rng, sampling);
  }
  return v;
}

}  // namespace

Gradient cd_gradient(const std::vector<const VisibleState*>& batch, const ModelParams& params,
                     const VisibleSchema& schema, const CdOptions& options, Rng& rng, ChainState* chain) {
  if (batch.empty()) throw UsageError("cd_gradient: empty batch");
  if (options.steps < 1) throw UsageError("cd_gradient: steps must be >= 1");
  params.check(schema);
  for (const VisibleState* v : batch)
    if (!v->fully_observed()) throw ValidationError("training records must be fully observed");

  if (chain)
    for (std::size_t i = chain->particles.size(); i < batch.size(); ++i) chain->particles.push_back(*batch[i]);

  const std::size_t n = batch.size();
  std::vector<std::uint64_t> seeds(n);
  for (auto& s : seeds) s = rng();
  std::vector<RecordTerms> terms(n);

  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    Rng local = child_rng(seeds[i]);
    const VisibleState& v0 = *batch[i];
    const Eigen::VectorXd p0 = hidden_conditional(v0, params, schema);
    const Eigen::VectorXd h0 = sample_hidden(p0, local);
    const Eigen::VectorXd& data_h = options.mean_field_data ? p0 : h0;

    VisibleState vk;
    if (chain) {
      VisibleState& particle = chain->particles[i % chain->particles.size()];
      const Eigen::VectorXd hp = sample_hidden(hidden_conditional(particle, params, schema), local);
      vk = run_chain(particle, hp, params, schema, options.steps, options.sampling, local);
    } else {
      vk = run_chain(v0, h0, params, schema, options.steps, options.sampling, local);
    }
    const Eigen::VectorXd pk = hidden_conditional(vk, params, schema);

    RecordTerms& t = terms[i];
    t.dW = features(v0, schema) * data_h.transpose() - features(vk, schema) * pk.transpose();
    t.da = bias_statistic(v0, schema) - bias_statistic(vk, schema);
    t.db = v0.bias_scale * data_h - vk.bias_scale * pk;
    if (chain) chain->particles[i % chain->particles.size()] = std::move(vk);
  });

  Gradient g = Gradient::zeros_like(params);
  for (const auto& t : terms) {
    g.dW += t.dW;
    g.da += t.da;
    g.db += t.db;
  }
  g *= 1.0 / static_cast<double>(n);
  return g;
}

ModelParams initialize_params(const std::vector<MixedRecord>& data, const VisibleSchema& schema,
                              const TrainConfig& config) {
  ModelParams p = ModelParams::zeros(schema, config.hidden);
  Rng rng = make_rng(config.seed, "init");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index c = 0; c < p.W.cols(); ++c)
    for (Eigen::Index r = 0; r < p.W.rows(); ++r) p.W(r, c) = config.init_scale * normal(rng);

  if (config.frequency_bias_init && !data.empty()) {
    Eigen::VectorXd totals = Eigen::VectorXd::Zero(p.a.size());
    for (const auto& r : data) totals += encode(r, schema).values;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& t = schema.unit(i).type;
      if (t.kind != UnitKind::Categorical && t.kind != UnitKind::ReplicatedSoftmax) continue;
      const int off = schema.offset(i);
      Eigen::VectorXd logf = (totals.segment(off, t.width()).array() + 1.0).log().matrix();
      p.a.segment(off, t.width()) = logf.array() - logf.mean();
    }
  }
  return p;
}

double mean_reconstruction_error(const std::vector<VisibleState>& data, const ModelParams& params,
                                 const VisibleSchema& schema) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& v : data) s += reconstruct(v, params, schema).error;
  return s / static_cast<double>(data.size());
}

double mean_group_norm(const std::vector<VisibleState>& data, const ModelParams& params,
                       const VisibleSchema& schema, int groups) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& v : data) s += sparsity_penalty(hidden_conditional(v, params, schema), groups);
  return s / static_cast<double>(data.size());
}

ConceptDistances concept_distances(const std::vector<VisibleState>& data, const ConceptLabels& labels,
                                   const ModelParams& params, const VisibleSchema& schema, std::size_t limit) {
  if (labels.size() != data.size()) throw UsageError("labels do not match dataset size");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size() && idx.size() < limit; ++i)
    if (labels[i] != kUnlabeled) idx.push_back(i);
  // Clamped posteriors and their logits, so the pair loop needs no logarithms.
  std::vector<Eigen::ArrayXd> post, logit;
  for (std::size_t i : idx) {
    post.push_back(hidden_conditional(data[i], params, schema)
                       .array()
                       .max(kProbabilityFloor)
                       .min(1.0 - kProbabilityFloor));
    logit.push_back(post.back().log() - (1.0 - post.back()).log());
  }
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t x = 0; x < idx.size(); ++x)
    for (std::size_t y = x + 1; y < idx.size(); ++y) {
      const double d = 0.5 * ((post[x] - post[y]) * (logit[x] - logit[y])).sum();
      if (labels[idx[x]] == labels[idx[y]]) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  return {n_intra ? intra / n_intra : 0.0, n_inter ? inter / n_inter : 0.0};
}

namespace {

class MetricSampler {
 public:
  MetricSampler(const ConceptLabels& labels, int neighbors, int non_neighbors)
      : labels_(labels), neighbors_(neighbors), non_neighbors_(non_neighbors) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kUnlabeled) by_concept_[labels[i]].push_back(i);
    for (const auto& [label, members] : by_concept_) {
      auto& others = others_[label];
      for (const auto& [c2, m2] : by_concept_)
        if (c2 != label) others.insert(others.end(), m2.begin(), m2.end());
      std::sort(others.begin(), others.end());
    }
  }

  bool labelled(std::size_t i) const { return labels_[i] != kUnlabeled; }

  void sample(std::size_t f, const std::vector<VisibleState>& states, Rng& rng, StateRefs& same,
              StateRefs& different) const {
    same.clear();
    different.clear();
    const int label = labels_[f];
    std::vector<std::size_t> pool;
    for (std::size_t g : by_concept_.at(label))
      if (g != f) pool.push_back(g);
    std::vector<std::size_t> picked;
    std::sample(pool.begin(), pool.end(), std::back_inserter(picked), neighbors_, rng);
    for (std::size_t g : picked) same.push_back(&states[g]);
    picked.clear();
    const auto& others = others_.at(label);
    std::sample(others.begin(), others.end(), std::back_inserter(picked), non_neighbors_, rng);
    for (std::size_t g : picked) different.push_back(&states[g]);
  }

 private:
  const ConceptLabels& labels_;
  int neighbors_;
  int non_neighbors_;
  std::map<int, std::vector<std::size_t>> by_concept_;
  std::map<int, std::vector<std::size_t>> others_;
};

void apply_update(ModelParams& p, const Gradient& g, const VisibleSchema& schema, const TrainConfig& c) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const int off = schema.offset(i);
    const int w = schema.width(i);
    const double scale = c.type_lr_scale[static_cast<std::size_t>(schema.unit(i).type.kind)];
    p.a.segment(off, w) += c.lr_a * scale * g.da.segment(off, w);
    p.W.middleRows(off, w) += c.lr_w * scale * g.dW.middleRows(off, w);
  }
  p.b += c.lr_b * g.db;
}

// alpha * dR + beta * dMetric, averaged over `members`.
Gradient regularizer_gradient(const std::vector<std::size_t>& members, const std::vector<VisibleState>& states,
                              const ModelParams& params, const VisibleSchema& schema, const TrainConfig& config,
                              const MetricSampler* sampler, Rng& rng) {
  Gradient total = Gradient::zeros_like(params);
  const std::size_t n = members.size();
  std::vector<std::uint64_t> seeds(n);
  for (auto& s : seeds) s = rng();
  std::vector<Gradient> parts(n);
  detail::parallel_for(n, config.threads, [&](std::size_t k) {
    const std::size_t f = members[k];
    Gradient g = Gradient::zeros_like(params);
    if (config.alpha > 0.0) {
      Gradient s = sparsity_gradient(states[f], params, schema, config.groups);
      s *= config.alpha;
      g += s;
    }
    if (config.beta > 0.0 && sampler && sampler->labelled(f)) {
      Rng local = child_rng(seeds[k]);
      StateRefs same, different;
      sampler->sample(f, states, local, same, different);
      Gradient m = metric_gradient(states[f], same, different, params, schema);
      m *= config.beta;
      g += m;
    }
    parts[k] = std::move(g);
  });
  for (const auto& g : parts) total += g;
  total *= 1.0 / static_cast<double>(n);
  return total;
}

}  // namespace

FitResult fit(const std::vector<MixedRecord>& data, const VisibleSchema& schema, const TrainConfig& config,
              const ConceptLabels* labels, const ModelParams* initial) {
  config.validate();
  if (data.empty()) throw UsageError("fit: empty dataset");
  if (config.beta > 0.0 && (!labels || labels->size() != data.size()))
    throw UsageError("fit: beta > 0 needs one concept label per record");
  if (labels && labels->size() != data.size()) throw UsageError("fit: labels do not match dataset size");

  std::vector<VisibleState> states;
  states.reserve(data.size());
  for (const auto& r : data) {
    validate(r, schema);
    states.push_back(encode(r, schema));
  }

  FitResult result;
  result.params = initial ? *initial : initialize_params(data, schema, config);
  result.params.check(schema);
  if (initial && result.params.hidden_units() != config.hidden)
    throw UsageError("initial parameters have a different hidden size");
  if (config.alpha > 0.0 && result.params.hidden_units() % config.groups != 0)
    throw UsageError("groups must divide the hidden size");

  std::optional<MetricSampler> sampler;
  if (config.beta > 0.0) sampler.emplace(*labels, config.metric_neighbors, config.metric_non_neighbors);

  Rng order_rng = make_rng(config.seed, "shuffle");
  Rng chain_rng = make_rng(config.seed, "chain");
  Rng metric_rng = make_rng(config.seed, "metric");
  ChainState chain;
  const CdOptions cd{config.cd_steps, config.mean_field_data, config.sampling, config.threads};

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const ModelParams checkpoint = result.params;
    bool finite = true;
    if (config.exact_gradient) {
      Gradient g = oracle::exact_mean_gradient(data, result.params, schema);
      g -= regularizer_gradient(order, states, result.params, schema, config, sampler ? &*sampler : nullptr,
                                metric_rng);
      apply_update(result.params, g, schema, config);
      finite = result.params.all_finite();
    } else {
      std::shuffle(order.begin(), order.end(), order_rng);
      for (std::size_t start = 0; start < order.size() && finite; start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
        std::vector<std::size_t> members(order.begin() + start, order.begin() + end);
        std::vector<const VisibleState*> batch;
        for (std::size_t i : members) batch.push_back(&states[i]);
        Gradient g = cd_gradient(batch, result.params, schema, cd, chain_rng,
                                 config.persistent ? &chain : nullptr);
        if (config.alpha > 0.0 || config.beta > 0.0)
          g -= regularizer_gradient(members, states, result.params, schema, config,
                                    sampler ? &*sampler : nullptr, metric_rng);
        apply_update(result.params, g, schema, config);
        finite = result.params.all_finite();
      }
    }
    if (!finite) {
      result.params = checkpoint;
      result.diverged = true;
      result.message = "non-finite parameters in epoch " + std::to_string(epoch) +
                       "; returning the checkpoint from the end of epoch " + std::to_string(epoch - 1);
      break;
    }

    EpochLog row;
    row.epoch = epoch;
    row.recon_error = mean_reconstruction_error(states, result.params, schema);
    if (config.alpha > 0.0) row.mean_group_norm = mean_group_norm(states, result.params, schema, config.groups);
    if (config.beta > 0.0) {
      const auto d = concept_distances(states, *labels, result.params, schema);
      row.intra_kl = d.intra;
      row.inter_kl = d.inter;
    }
    if (config.exact_gradient) row.exact_log_likelihood = oracle::exact_mean_log_likelihood(data, result.params, schema);
    result.log.push_back(row);
  }
  return result;
}

namespace {

std::string fmt6(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt6(*x) : std::string(); }

}  // namespace

std::string log_header(bool with_exact) {
  std::string h = "epoch,recon_error,mean_group_norm,intra_kl,inter_kl";
  if (with_exact) h += ",exact_log_likelihood";
  return h;
}

std::string log_row(const EpochLog& row, bool with_exact) {
  std::string s = std::to_string(row.epoch) + "," + fmt6(row.recon_error) + "," + fmt_opt(row.mean_group_norm) +
                  "," + fmt_opt(row.intra_kl) + "," + fmt_opt(row.inter_kl);
  if (with_exact) {
    if (row.exact_log_likelihood) {
      // Monotonicity checks on the log need more than 6 digits.
      std::ostringstream os;
      os.precision(17);
      os << *row.exact_log_likelihood;
      s += "," + os.str();
    } else {
      s += ",";
    }
  }
  return s;
}

}  // namespace mvrbm
