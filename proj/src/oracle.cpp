#include "mvrbm/oracle.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "mvrbm/numeric.hpp"

namespace mvrbm::oracle {

namespace {

void check_supported(const ModelParams& params, const VisibleSchema& schema, const Lengths& lengths,
                     const TinyModelBound& bound) {
  params.check(schema);
  if (params.hidden_units() > bound.max_hidden)
    throw Refusal(std::to_string(params.hidden_units()) + " hidden units exceed the bound of " +
                  std::to_string(bound.max_hidden));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& u = schema.unit(i);
    if (u.type.kind == UnitKind::ConstrainedPoisson)
      throw Refusal("constrained-Poisson unit '" + u.name + "' has no proper joint distribution");
    if (u.type.kind == UnitKind::ReplicatedSoftmax) {
      if (lengths.size() != schema.size()) throw Refusal("replicated-softmax unit '" + u.name + "' needs a length");
      const double d = lengths[i];
      if (d < 0 || d != std::floor(d) || d > bound.max_replication)
        throw Refusal("replication count of '" + u.name + "' outside [0, " + std::to_string(bound.max_replication) +
                      "]");
      if (u.type.size > bound.max_replicated_vocab)
        throw Refusal("vocabulary of '" + u.name + "' exceeds " + std::to_string(bound.max_replicated_vocab));
    }
  }
}

Lengths normalized_lengths(const VisibleSchema& schema, const Lengths& lengths) {
  return lengths.empty() ? Lengths(schema.size(), 0.0) : lengths;
}

// Closed-form quantities for one hidden configuration.
struct HiddenTerm {
  double log_weight = 0.0;       // log sum_v w(v) exp(-E(v,h))
  Eigen::VectorXd mean_feature;  // E[x | h]
  Eigen::VectorXd mean_stat;     // E[bias statistic | h]
};

HiddenTerm hidden_term(const Eigen::VectorXd& h, const ModelParams& params, const VisibleSchema& schema,
                       const Lengths& lengths, double scale) {
  const Eigen::VectorXd wh = params.W * h;
  HiddenTerm t;
  t.log_weight = scale * params.b.dot(h);
  t.mean_feature = Eigen::VectorXd::Zero(params.a.size());
  t.mean_stat = Eigen::VectorXd::Zero(params.a.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& type = schema.unit(i).type;
    const int off = schema.offset(i);
    const int w = type.width();
    switch (type.kind) {
      case UnitKind::Binary: {
        const double f = params.a[off] + wh[off];
        t.log_weight += softplus(f);
        t.mean_feature[off] = t.mean_stat[off] = sigmoid(f);
        break;
      }
      case UnitKind::Gaussian: {
        const double s = type.sigma;
        const double u = wh[off];
        const double a = params.a[off];
        t.log_weight += std::log(std::sqrt(2.0 * std::numbers::pi) * s) + a * u / s + 0.5 * u * u;
        const double mean = a + s * u;
        t.mean_feature[off] = mean / s;
        t.mean_stat[off] = mean / (s * s);
        break;
      }
      case UnitKind::Categorical:
      case UnitKind::ReplicatedSoftmax: {
        const double d = type.kind == UnitKind::Categorical ? 1.0 : lengths[i];
        const Eigen::VectorXd f = params.a.segment(off, w) + wh.segment(off, w);
        t.log_weight += d * log_sum_exp(f);
        t.mean_feature.segment(off, w) = d * softmax(f);
        t.mean_stat.segment(off, w) = t.mean_feature.segment(off, w);
        break;
      }
      case UnitKind::ConstrainedPoisson: break;  // refused earlier
    }
  }
  return t;
}

template <class Fn>
void for_each_hidden(int hidden, Fn&& fn) {
  Eigen::VectorXd h(hidden);
  const unsigned long total = 1UL << hidden;
  for (unsigned long code = 0; code < total; ++code) {
    for (int j = 0; j < hidden; ++j) h[j] = (code >> j) & 1UL ? 1.0 : 0.0;
    fn(h);
  }
}

double log_sum(const std::vector<double>& xs) {
  return log_sum_exp(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())));
}

// log sum_h exp(-E(v,h)) in closed form over h (the negative free energy).
double log_unnormalized(const VisibleState& v, const ModelParams& params, const VisibleSchema& schema) {
  double s = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    const int off = schema.offset(i);
    if (t.kind == UnitKind::Gaussian) {
      const double d = v.values[off] - params.a[off];
      s -= d * d / (2.0 * t.sigma * t.sigma);
    } else {
      s += params.a.segment(off, t.width()).dot(v.values.segment(off, t.width()));
    }
  }
  const Eigen::VectorXd pre = hidden_preactivation(v, params, schema);
  for (Eigen::Index j = 0; j < pre.size(); ++j) s += softplus(pre[j]);
  return s;
}

double log_multinomial(const VisibleState& v, const VisibleSchema& schema) {
  double s = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    if (t.kind != UnitKind::ReplicatedSoftmax) continue;
    const int off = schema.offset(i);
    s += std::lgamma(v.lengths[i] + 1.0);
    for (int k = 0; k < t.width(); ++k) s -= std::lgamma(v.values[off + k] + 1.0);
  }
  return s;
}

VisibleState observed_state(const MixedRecord& v, const VisibleSchema& schema) {
  validate(v, schema);
  return encode(v, schema);
}

struct ModelExpectations {
  double log_partition = 0.0;
  Eigen::VectorXd hidden;        // E[h]
  Eigen::MatrixXd feature_by_h;  // E[x h^T]
  Eigen::VectorXd stat;          // E[bias statistic]
};

ModelExpectations model_expectations(const ModelParams& params, const VisibleSchema& schema,
                                     const Lengths& lengths_in, const TinyModelBound& bound) {
  const Lengths lengths = normalized_lengths(schema, lengths_in);
  check_supported(params, schema, lengths, bound);
  const double scale = bias_scale_for(schema, lengths);
  std::vector<double> log_weights;
  std::vector<HiddenTerm> terms;
  std::vector<Eigen::VectorXd> hs;
  for_each_hidden(params.hidden_units(), [&](const Eigen::VectorXd& h) {
    terms.push_back(hidden_term(h, params, schema, lengths, scale));
    log_weights.push_back(terms.back().log_weight);
    hs.push_back(h);
  });
  ModelExpectations m;
  m.log_partition = log_sum(log_weights);
  m.hidden = Eigen::VectorXd::Zero(params.hidden_units());
  m.feature_by_h = Eigen::MatrixXd::Zero(params.a.size(), params.hidden_units());
  m.stat = Eigen::VectorXd::Zero(params.a.size());
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const double p = std::exp(log_weights[c] - m.log_partition);
    m.hidden += p * hs[c];
    m.feature_by_h.noalias() += p * terms[c].mean_feature * hs[c].transpose();
    m.stat += p * terms[c].mean_stat;
  }
  return m;
}

}  // namespace

Lengths lengths_of(const MixedRecord& record, const VisibleSchema& schema) {
  return encode(record, schema).lengths;
}

double exact_log_partition(const ModelParams& params, const VisibleSchema& schema, const Lengths& lengths_in,
                           const TinyModelBound& bound) {
  const Lengths lengths = normalized_lengths(schema, lengths_in);
  check_supported(params, schema, lengths, bound);
  const double scale = bias_scale_for(schema, lengths);
  std::vector<double> log_weights;
  log_weights.reserve(std::size_t{1} << params.hidden_units());
  for_each_hidden(params.hidden_units(), [&](const Eigen::VectorXd& h) {
    log_weights.push_back(hidden_term(h, params, schema, lengths, scale).log_weight);
  });
  return log_sum(log_weights);
}

double exact_log_likelihood(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                            const TinyModelBound& bound) {
  const VisibleState s = observed_state(v, schema);
  return log_unnormalized(s, params, schema) + log_multinomial(s, schema) -
         exact_log_partition(params, schema, s.lengths, bound);
}

Gradient exact_gradient(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                        const TinyModelBound& bound) {
  const VisibleState s = observed_state(v, schema);
  const ModelExpectations m = model_expectations(params, schema, s.lengths, bound);
  const Eigen::VectorXd p = hidden_conditional(s, params, schema);
  Gradient g;
  g.db = s.bias_scale * (p - m.hidden);
  g.dW = features(s, schema) * p.transpose() - m.feature_by_h;
  g.da = bias_statistic(s, schema) - m.stat;
  return g;
}

double exact_mean_log_likelihood(const std::vector<MixedRecord>& data, const ModelParams& params,
                                 const VisibleSchema& schema, const TinyModelBound& bound) {
  if (data.empty()) throw UsageError("empty dataset");
  double s = 0.0;
  for (const auto& r : data) s += exact_log_likelihood(r, params, schema, bound);
  return s / static_cast<double>(data.size());
}

Gradient exact_mean_gradient(const std::vector<MixedRecord>& data, const ModelParams& params,
                             const VisibleSchema& schema, const TinyModelBound& bound) {
  if (data.empty()) throw UsageError("empty dataset");
  Gradient g = Gradient::zeros_like(params);
  for (const auto& r : data) g += exact_gradient(r, params, schema, bound);
  g *= 1.0 / static_cast<double>(data.size());
  return g;
}

HybridObjectives hybrid_objectives(const std::vector<MixedRecord>& data, const ModelParams& params,
                                   const VisibleSchema& schema, std::size_t target_unit, double hybrid_weight,
                                   const TinyModelBound& bound) {
  if (data.empty()) throw UsageError("empty dataset");
  if (!(hybrid_weight >= 0.0 && hybrid_weight <= 1.0)) throw UsageError("hybrid weight must lie in [0, 1]");
  if (target_unit >= schema.size()) throw UsageError("target unit out of range");
  const auto& t = schema.unit(target_unit).type;
  if (t.kind != UnitKind::Binary && t.kind != UnitKind::Categorical)
    throw Refusal("target unit must be binary or categorical");
  const int values = t.kind == UnitKind::Binary ? 2 : t.size;

  HybridObjectives out;
  for (const auto& record : data) {
    const double log_full = exact_log_likelihood(record, params, schema, bound);
    std::vector<double> log_joint;
    MixedRecord alt = record;
    for (int s = 0; s < values; ++s) {
      alt.values[target_unit] =
          t.kind == UnitKind::Binary ? UnitValue{BinaryValue{s}} : UnitValue{CategoricalValue{s}};
      log_joint.push_back(exact_log_likelihood(alt, params, schema, bound));
    }
    const double log_marginal = log_sum(log_joint);
    out.generative += log_marginal;
    out.discriminative += log_full - log_marginal;
  }
  out.generative /= static_cast<double>(data.size());
  out.discriminative /= static_cast<double>(data.size());
  out.hybrid = hybrid_weight * out.generative + (1.0 - hybrid_weight) * out.discriminative;
  return out;
}

// --- Brute force ---------------------------------------------------------

std::vector<Eigen::VectorXd> enumerate_hidden(int hidden, const TinyModelBound& bound) {
  if (hidden > bound.max_hidden) throw Refusal("too many hidden units to enumerate");
  std::vector<Eigen::VectorXd> out;
  for_each_hidden(hidden, [&](const Eigen::VectorXd& h) { out.push_back(h); });
  return out;
}

namespace {

// Calls fn(counts) for every composition of `total` into `bins` non-negative parts.
void for_each_composition(int total, int bins, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  std::function<void(int, int)> rec = [&](int bin, int left) {
    if (bin == bins - 1) {
      counts[bin] = left;
      fn(counts);
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[bin] = c;
      rec(bin + 1, left - c);
    }
  };
  if (bins > 0) rec(0, total);
}

}  // namespace

std::vector<VisiblePoint> enumerate_visible(const ModelParams& params, const VisibleSchema& schema,
                                            const Lengths& lengths_in, const GaussianGrid& grid,
                                            const TinyModelBound& bound) {
  const Lengths lengths = normalized_lengths(schema, lengths_in);
  check_supported(params, schema, lengths, bound);

  // Per unit: list of (column block, log weight).
  std::vector<std::vector<std::pair<Eigen::VectorXd, double>>> options(schema.size());
  double discrete = 1.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    auto& opts = options[i];
    switch (t.kind) {
      case UnitKind::Binary:
        opts.push_back({Eigen::VectorXd::Constant(1, 0.0), 0.0});
        opts.push_back({Eigen::VectorXd::Constant(1, 1.0), 0.0});
        break;
      case UnitKind::Categorical:
        for (int m = 0; m < t.size; ++m) opts.push_back({Eigen::VectorXd::Unit(t.size, m), 0.0});
        break;
      case UnitKind::ReplicatedSoftmax: {
        const int d = static_cast<int>(lengths[i]);
        for_each_composition(d, t.size, [&](const std::vector<int>& counts) {
          Eigen::VectorXd block(t.size);
          double lw = std::lgamma(d + 1.0);
          for (int k = 0; k < t.size; ++k) {
            block[k] = counts[k];
            lw -= std::lgamma(counts[k] + 1.0);
          }
          opts.push_back({block, lw});
        });
        break;
      }
      case UnitKind::Gaussian: {
        const double centre = params.a[schema.offset(i)];
        const long n = std::lround(grid.half_width / grid.step);
        const double h = grid.step * t.sigma;
        for (long k = -n; k <= n; ++k) {
          const double end = (k == -n || k == n) ? 0.5 : 1.0;
          opts.push_back({Eigen::VectorXd::Constant(1, centre + k * h), std::log(end * h)});
        }
        break;
      }
      case UnitKind::ConstrainedPoisson: break;
    }
    discrete *= static_cast<double>(opts.size());
  }
  if (discrete * std::ldexp(1.0, params.hidden_units()) > bound.max_configurations)
    throw Refusal("visible space too large to enumerate");

  std::vector<VisiblePoint> out;
  VisiblePoint current;
  current.state.values = Eigen::VectorXd::Zero(schema.total_weight_columns());
  current.state.lengths = lengths;
  current.state.observed.assign(schema.size(), 1);
  current.state.bias_scale = bias_scale_for(schema, lengths);
  std::function<void(std::size_t, double)> rec = [&](std::size_t unit, double lw) {
    if (unit == schema.size()) {
      current.log_weight = lw;
      out.push_back(current);
      return;
    }
    const int off = schema.offset(unit);
    for (const auto& [block, w] : options[unit]) {
      current.state.values.segment(off, block.size()) = block;
      rec(unit + 1, lw + w);
    }
  };
  rec(0, 0.0);
  return out;
}

double enumerated_log_partition(const ModelParams& params, const VisibleSchema& schema, const Lengths& lengths,
                                const GaussianGrid& grid, const TinyModelBound& bound) {
  const auto visible = enumerate_visible(params, schema, lengths, grid, bound);
  const auto hidden = enumerate_hidden(params.hidden_units(), bound);
  std::vector<double> terms;
  terms.reserve(visible.size() * hidden.size());
  for (const auto& v : visible)
    for (const auto& h : hidden) terms.push_back(v.log_weight - energy(v.state, h, params, schema));
  return log_sum(terms);
}

Eigen::VectorXd enumerated_hidden_conditional(const VisibleState& v, const ModelParams& params,
                                              const VisibleSchema& schema, const TinyModelBound& bound) {
  const auto hidden = enumerate_hidden(params.hidden_units(), bound);
  std::vector<double> log_w;
  for (const auto& h : hidden) log_w.push_back(-energy(v, h, params, schema));
  const double norm = log_sum(log_w);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(params.hidden_units());
  for (std::size_t c = 0; c < hidden.size(); ++c) p += std::exp(log_w[c] - norm) * hidden[c];
  return p;
}

Eigen::VectorXd enumerated_visible_mean(const Eigen::VectorXd& h, const ModelParams& params,
                                        const VisibleSchema& schema, const Lengths& lengths,
                                        const GaussianGrid& grid, const TinyModelBound& bound) {
  const auto visible = enumerate_visible(params, schema, lengths, grid, bound);
  std::vector<double> log_w;
  log_w.reserve(visible.size());
  for (const auto& v : visible) log_w.push_back(v.log_weight - energy(v.state, h, params, schema));
  const double norm = log_sum(log_w);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(schema.total_weight_columns());
  for (std::size_t c = 0; c < visible.size(); ++c) mean += std::exp(log_w[c] - norm) * visible[c].state.values;
  return mean;
}

Eigen::VectorXd enumerated_unit_conditional(const MixedRecord& v, const ModelParams& params,
                                            const VisibleSchema& schema, std::size_t unit,
                                            const TinyModelBound& bound) {
  if (unit >= schema.size()) throw UsageError("unit out of range");
  const auto& t = schema.unit(unit).type;
  if (t.kind != UnitKind::Binary && t.kind != UnitKind::Categorical)
    throw Refusal("unit conditional needs a binary or categorical unit");
  const int values = t.kind == UnitKind::Binary ? 2 : t.size;
  const auto hidden = enumerate_hidden(params.hidden_units(), bound);
  MixedRecord alt = v;
  std::vector<double> per_value;
  for (int s = 0; s < values; ++s) {
    alt.values[unit] = t.kind == UnitKind::Binary ? UnitValue{BinaryValue{s}} : UnitValue{CategoricalValue{s}};
    const VisibleState st = encode(alt, schema);
    std::vector<double> log_w;
    for (const auto& h : hidden) log_w.push_back(-energy(st, h, params, schema));
    per_value.push_back(log_sum(log_w));
  }
  const double norm = log_sum(per_value);
  Eigen::VectorXd p(values);
  for (int s = 0; s < values; ++s) p[s] = std::exp(per_value[s] - norm);
  return p;
}

Eigen::VectorXd enumerated_next_token_conditional(const MixedRecord& v, const ModelParams& params,
                                                  const VisibleSchema& schema, std::size_t unit,
                                                  const TinyModelBound& bound) {
  if (unit >= schema.size() || schema.unit(unit).type.kind != UnitKind::ReplicatedSoftmax)
    throw Refusal("next-token conditional needs a replicated-softmax unit");
  const int vocab = schema.unit(unit).type.size;
  const auto hidden = enumerate_hidden(params.hidden_units(), bound);
  std::vector<double> per_token;
  for (int tok = 0; tok < vocab; ++tok) {
    MixedRecord alt = v;
    std::get<TokenValue>(alt.values[unit]).tokens.push_back(tok);
    const VisibleState st = encode(alt, schema);
    std::vector<double> log_w;
    for (const auto& h : hidden) log_w.push_back(-energy(st, h, params, schema));
    per_token.push_back(log_sum(log_w));
  }
  const double norm = log_sum(per_token);
  Eigen::VectorXd p(vocab);
  for (int tok = 0; tok < vocab; ++tok) p[tok] = std::exp(per_token[tok] - norm);
  return p;
}

}  // namespace mvrbm::oracle
