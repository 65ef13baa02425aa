#include "mvrbm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mvrbm/errors.hpp"
#include "mvrbm/numeric.hpp"

namespace mvrbm {

std::vector<std::uint8_t> binarize(const Eigen::VectorXd& posteriors, double rho1) {
  std::vector<std::uint8_t> code(static_cast<std::size_t>(posteriors.size()));
  for (Eigen::Index k = 0; k < posteriors.size(); ++k) code[k] = posteriors[k] >= rho1 ? 1 : 0;
  return code;
}

LatentProfile project(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                      double rho1) {
  if (!(rho1 > 0.0 && rho1 < 1.0)) throw UsageError("rho1 must lie in (0, 1)");
  LatentProfile p;
  p.posteriors = hidden_conditional(v, params, schema);
  p.code = binarize(p.posteriors, rho1);
  return p;
}

Reconstruction reconstruct(const VisibleState& v, const ModelParams& params, const VisibleSchema& schema) {
  const Eigen::VectorXd posteriors = hidden_conditional(v, params, schema);
  Reconstruction r;
  r.expected = expected_visible(visible_conditional(posteriors, params, schema, v.lengths), schema);
  r.unit_errors.assign(schema.size(), 0.0);
  double total = 0.0;
  int counted = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!v.observed[i]) continue;
    const auto& t = schema.unit(i).type;
    const int off = schema.offset(i);
    const auto orig = v.values.segment(off, t.width());
    const auto rec = r.expected.values.segment(off, t.width());
    double err = 0.0;
    switch (t.kind) {
      case UnitKind::Binary:
      case UnitKind::Gaussian: err = (orig[0] - rec[0]) * (orig[0] - rec[0]); break;
      case UnitKind::Categorical: {
        Eigen::Index want = 0, got = 0;
        orig.maxCoeff(&want);
        rec.maxCoeff(&got);
        err = want == got ? 0.0 : 1.0;
        break;
      }
      case UnitKind::ConstrainedPoisson:
      case UnitKind::ReplicatedSoftmax: {
        const double n = v.lengths[i];
        if (n > 0.0) err = 0.5 * ((orig - rec) / n).cwiseAbs().sum();
        break;
      }
    }
    r.unit_errors[i] = err;
    total += err;
    ++counted;
  }
  r.error = counted > 0 ? total / counted : 0.0;
  return r;
}

Reconstruction reconstruct(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema) {
  return reconstruct(encode(v, schema), params, schema);
}

std::vector<int> full_vocabulary(const VisibleSchema& schema, std::size_t unit) {
  std::vector<int> all(static_cast<std::size_t>(schema.unit(unit).type.size));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

PredictionRanking predict_unseen(const MixedRecord& observed, const ModelParams& params,
                                 const VisibleSchema& schema, std::size_t unit,
                                 const std::vector<int>& candidates) {
  if (unit >= schema.size()) throw UsageError("prediction unit out of range");
  const auto& t = schema.unit(unit).type;
  if (t.kind != UnitKind::ReplicatedSoftmax && t.kind != UnitKind::Categorical)
    throw UsageError("prediction needs a categorical or replicated-softmax unit");
  if (candidates.empty()) throw UsageError("empty candidate set");
  std::set<int> unique;
  for (int c : candidates) {
    if (c < 0 || c >= t.size) throw UsageError("candidate token " + std::to_string(c) + " outside vocabulary");
    if (!unique.insert(c).second) throw UsageError("duplicate candidate token " + std::to_string(c));
  }

  const Eigen::VectorXd posteriors = hidden_conditional(observed, params, schema);
  const int off = schema.offset(unit);
  const Eigen::VectorXd logits = params.a.segment(off, t.size) + params.W.middleRows(off, t.size) * posteriors;
  const double log_norm_full = log_sum_exp(logits);

  Eigen::VectorXd cand_logits(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) cand_logits[c] = logits[candidates[c]];
  const double log_norm_cand = log_sum_exp(cand_logits);

  PredictionRanking ranking;
  ranking.entries.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    ranking.entries.push_back({candidates[c], std::exp(cand_logits[c] - log_norm_cand),
                               std::exp(cand_logits[c] - log_norm_full)});
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& x, const auto& y) {
    if (x.probability != y.probability) return x.probability > y.probability;
    return x.token < y.token;
  });
  return ranking;
}

}  // namespace mvrbm
