#include "mvrbm/model.hpp"

#include <cmath>

#include "mvrbm/errors.hpp"
#include "mvrbm/numeric.hpp"

namespace mvrbm {

namespace {

void check_hidden(const Eigen::VectorXd& h, const ModelParams& params) {
  if (h.size() != params.b.size()) throw SchemaError("hidden vector length does not match the model");
}

}  // namespace

double energy(const VisibleState& v, const Eigen::VectorXd& h, const ModelParams& params,
              const VisibleSchema& schema) {
  params.check(schema);
  check_hidden(h, params);
  if (v.values.size() != schema.total_weight_columns()) throw SchemaError("state does not match schema");
  if (!v.fully_observed()) throw ValidationError("energy needs a fully observed record");
  if (!v.values.allFinite() || !h.allFinite()) throw ValidationError("non-finite input to energy");

  double e = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    const int off = schema.offset(i);
    if (t.kind == UnitKind::Gaussian) {
      const double d = v.values[off] - params.a[off];
      e += d * d / (2.0 * t.sigma * t.sigma);
    } else {
      e -= params.a.segment(off, t.width()).dot(v.values.segment(off, t.width()));
    }
  }
  e -= v.bias_scale * params.b.dot(h);
  e -= h.dot(params.W.transpose() * features(v, schema));
  return e;
}

double energy(const MixedRecord& v, const Eigen::VectorXd& h, const ModelParams& params,
              const VisibleSchema& schema) {
  return energy(encode(v, schema), h, params, schema);
}

Eigen::VectorXd hidden_preactivation(const VisibleState& v, const ModelParams& params,
                                     const VisibleSchema& schema) {
  params.check(schema);
  return v.bias_scale * params.b + params.W.transpose() * features(v, schema);
}

Eigen::VectorXd hidden_conditional(const VisibleState& v, const ModelParams& params,
                                   const VisibleSchema& schema) {
  return hidden_preactivation(v, params, schema).unaryExpr([](double x) { return sigmoid(x); });
}

Eigen::VectorXd hidden_conditional(const MixedRecord& v, const ModelParams& params,
                                   const VisibleSchema& schema) {
  return hidden_conditional(encode(v, schema), params, schema);
}

VisibleDistribution visible_conditional(const Eigen::VectorXd& h, const ModelParams& params,
                                        const VisibleSchema& schema, const std::vector<double>& lengths) {
  params.check(schema);
  check_hidden(h, params);
  if (lengths.size() != schema.size()) throw SchemaError("lengths do not match schema");
  const Eigen::VectorXd wh = params.W * h;
  VisibleDistribution dist;
  dist.units.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    const int off = schema.offset(i);
    UnitDistribution u;
    u.kind = t.kind;
    u.length = lengths[i];
    switch (t.kind) {
      case UnitKind::Binary:
        u.params = Eigen::VectorXd::Constant(1, sigmoid(params.a[off] + wh[off]));
        break;
      case UnitKind::Gaussian:
        u.sigma = t.sigma;
        u.params = Eigen::VectorXd::Constant(1, params.a[off] + t.sigma * wh[off]);
        break;
      case UnitKind::Categorical:
      case UnitKind::ReplicatedSoftmax:
        u.params = softmax(params.a.segment(off, t.width()) + wh.segment(off, t.width()));
        break;
      case UnitKind::ConstrainedPoisson:
        u.params = lengths[i] * softmax(params.a.segment(off, t.width()) + wh.segment(off, t.width()));
        break;
    }
    dist.units.push_back(std::move(u));
  }
  return dist;
}

Eigen::VectorXd sample_hidden(const Eigen::VectorXd& posteriors, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd h(posteriors.size());
  for (Eigen::Index j = 0; j < posteriors.size(); ++j) h[j] = uniform(rng) < posteriors[j] ? 1.0 : 0.0;
  return h;
}

namespace {

int sample_index(const Eigen::VectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace

double bias_scale_for(const VisibleSchema& schema, const std::vector<double>& lengths) {
  if (!schema.has_replicated_softmax()) return 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema.unit(i).type.kind == UnitKind::ReplicatedSoftmax) d += lengths[i];
  return d;
}

VisibleState sample_visible(const VisibleDistribution& dist, const VisibleSchema& schema, Rng& rng,
                            const SampleOptions& options) {
  VisibleState s;
  s.values = Eigen::VectorXd::Zero(schema.total_weight_columns());
  s.lengths.assign(schema.size(), 0.0);
  s.observed.assign(schema.size(), 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& u = dist.units[i];
    const int off = schema.offset(i);
    s.lengths[i] = u.length;
    switch (u.kind) {
      case UnitKind::Binary: s.values[off] = uniform(rng) < u.params[0] ? 1.0 : 0.0; break;
      case UnitKind::Gaussian:
        s.values[off] = options.gaussian_noise ? std::normal_distribution<double>(u.params[0], u.sigma)(rng)
                                               : u.params[0];
        break;
      case UnitKind::Categorical: s.values[off + sample_index(u.params, rng)] = 1.0; break;
      case UnitKind::ReplicatedSoftmax: {
        const long draws = std::lround(u.length);
        for (long d = 0; d < draws; ++d) s.values[off + sample_index(u.params, rng)] += 1.0;
        break;
      }
      case UnitKind::ConstrainedPoisson:
        if (options.poisson_counts) {
          for (Eigen::Index k = 0; k < u.params.size(); ++k)
            s.values[off + k] = u.params[k] > 0.0 ? std::poisson_distribution<long>(u.params[k])(rng) : 0.0;
        } else {
          s.values.segment(off, u.params.size()) = u.params;
        }
        break;
    }
  }
  s.bias_scale = bias_scale_for(schema, s.lengths);
  return s;
}

VisibleState expected_visible(const VisibleDistribution& dist, const VisibleSchema& schema) {
  VisibleState s;
  s.values = Eigen::VectorXd::Zero(schema.total_weight_columns());
  s.lengths.assign(schema.size(), 0.0);
  s.observed.assign(schema.size(), 1);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& u = dist.units[i];
    const int off = schema.offset(i);
    s.lengths[i] = u.length;
    if (u.kind == UnitKind::ReplicatedSoftmax)
      s.values.segment(off, u.params.size()) = u.length * u.params;
    else
      s.values.segment(off, u.params.size()) = u.params;
  }
  s.bias_scale = bias_scale_for(schema, s.lengths);
  return s;
}

}  // namespace mvrbm
