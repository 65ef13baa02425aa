#include "mvrbm/regularizers.hpp"

#include <cmath>

#include "mvrbm/errors.hpp"
#include "mvrbm/numeric.hpp"

namespace mvrbm {

namespace {

void check_groups(Eigen::Index hidden, int groups) {
  if (groups < 1 || hidden % groups != 0)
    throw UsageError("group count " + std::to_string(groups) + " does not divide " + std::to_string(hidden) +
                     " hidden units");
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

// Accumulates d(objective)/d(pre-activation) = dpre into b and W.
void accumulate_through_posteriors(Gradient& g, const Eigen::VectorXd& dpre, const VisibleState& v,
                                   const VisibleSchema& schema) {
  g.db += v.bias_scale * dpre;
  g.dW.noalias() += features(v, schema) * dpre.transpose();
}

}  // namespace

Eigen::VectorXd group_norms(const Eigen::VectorXd& posteriors, int groups) {
  check_groups(posteriors.size(), groups);
  const Eigen::Index size = posteriors.size() / groups;
  Eigen::VectorXd norms(groups);
  for (int m = 0; m < groups; ++m) norms[m] = posteriors.segment(m * size, size).norm();
  return norms;
}

double sparsity_penalty(const Eigen::VectorXd& posteriors, int groups) {
  return group_norms(posteriors, groups).sum();
}

Gradient sparsity_gradient(const VisibleState& v, const ModelParams& params, const VisibleSchema& schema,
                           int groups) {
  const Eigen::VectorXd p = hidden_conditional(v, params, schema);
  const Eigen::VectorXd norms = group_norms(p, groups);
  const Eigen::Index size = p.size() / groups;
  Eigen::VectorXd dpre(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double norm = norms[j / size];
    dpre[j] = norm < kGroupNormFloor ? 0.0 : p[j] * p[j] * (1.0 - p[j]) / norm;
  }
  Gradient g = Gradient::zeros_like(params);
  accumulate_through_posteriors(g, dpre, v, schema);
  return g;
}

double symmetric_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw UsageError("symmetric_kl: length mismatch");
  double d = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pj = clamp_probability(p[j], kProbabilityFloor);
    const double qj = clamp_probability(q[j], kProbabilityFloor);
    d += (pj - qj) * (logit(pj) - logit(qj));
  }
  return 0.5 * d;
}

Eigen::VectorXd symmetric_kl_gradient(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw UsageError("symmetric_kl: length mismatch");
  Eigen::VectorXd g(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (p[j] < kProbabilityFloor || p[j] > 1.0 - kProbabilityFloor) {
      g[j] = 0.0;
      continue;
    }
    const double qj = clamp_probability(q[j], kProbabilityFloor);
    g[j] = 0.5 * ((logit(p[j]) - logit(qj)) + (p[j] - qj) / (p[j] * (1.0 - p[j])));
  }
  return g;
}

double metric_objective(const VisibleState& f, const StateRefs& neighbors, const StateRefs& non_neighbors,
                        const ModelParams& params, const VisibleSchema& schema) {
  const Eigen::VectorXd pf = hidden_conditional(f, params, schema);
  auto mean_distance = [&](const StateRefs& set) {
    if (set.empty()) return 0.0;
    double s = 0.0;
    for (const VisibleState* g : set) s += symmetric_kl(hidden_conditional(*g, params, schema), pf);
    return s / static_cast<double>(set.size());
  };
  return mean_distance(neighbors) - mean_distance(non_neighbors);
}

Gradient metric_gradient(const VisibleState& f, const StateRefs& neighbors, const StateRefs& non_neighbors,
                         const ModelParams& params, const VisibleSchema& schema) {
  Gradient grad = Gradient::zeros_like(params);
  const Eigen::VectorXd pf = hidden_conditional(f, params, schema);
  const Eigen::VectorXd dpf = pf.array() * (1.0 - pf.array());
  Eigen::VectorXd f_side = Eigen::VectorXd::Zero(pf.size());

  auto add_set = [&](const StateRefs& set, double sign) {
    if (set.empty()) return;
    const double w = sign / static_cast<double>(set.size());
    for (const VisibleState* g : set) {
      const Eigen::VectorXd pg = hidden_conditional(*g, params, schema);
      f_side += w * symmetric_kl_gradient(pf, pg);
      const Eigen::VectorXd g_side =
          w * symmetric_kl_gradient(pg, pf).cwiseProduct((pg.array() * (1.0 - pg.array())).matrix());
      accumulate_through_posteriors(grad, g_side, *g, schema);
    }
  };
  add_set(neighbors, 1.0);
  add_set(non_neighbors, -1.0);
  accumulate_through_posteriors(grad, f_side.cwiseProduct(dpf), f, schema);
  return grad;
}

}  // namespace mvrbm
