#include "mvrbm/gradcheck.hpp"

#include <cmath>

#include "mvrbm/errors.hpp"
#include "mvrbm/oracle.hpp"
#include "mvrbm/regularizers.hpp"

namespace mvrbm {

Gradient finite_difference(const std::function<double(const ModelParams&)>& f, const ModelParams& params,
                           double eps) {
  Gradient g = Gradient::zeros_like(params);
  ModelParams p = params;
  auto central = [&](double& slot) {
    const double x = slot;
    slot = x + eps;
    const double up = f(p);
    slot = x - eps;
    const double down = f(p);
    slot = x;
    return (up - down) / (2.0 * eps);
  };
  for (Eigen::Index i = 0; i < p.a.size(); ++i) g.da[i] = central(p.a[i]);
  for (Eigen::Index j = 0; j < p.b.size(); ++j) g.db[j] = central(p.b[j]);
  for (Eigen::Index j = 0; j < p.W.cols(); ++j)
    for (Eigen::Index i = 0; i < p.W.rows(); ++i) g.dW(i, j) = central(p.W(i, j));
  return g;
}

double relative_error(const Gradient& x, const Gradient& y) {
  const double diff = std::sqrt((x.da - y.da).squaredNorm() + (x.db - y.db).squaredNorm() +
                                (x.dW - y.dW).squaredNorm());
  const double nx = std::sqrt(x.da.squaredNorm() + x.db.squaredNorm() + x.dW.squaredNorm());
  const double ny = std::sqrt(y.da.squaredNorm() + y.db.squaredNorm() + y.dW.squaredNorm());
  const double denom = std::max(nx, ny);
  return denom > 0.0 ? diff / denom : 0.0;
}

VisibleSchema random_tiny_schema(Rng& rng, int max_units, bool allow_gaussian) {
  if (max_units < 1) throw UsageError("max_units must be >= 1");
  std::uniform_int_distribution<int> count(1, max_units);
  std::uniform_int_distribution<int> kind(0, allow_gaussian ? 3 : 2);
  std::uniform_int_distribution<int> cats(2, 4);
  std::uniform_int_distribution<int> vocab(2, 3);
  std::vector<UnitSpec> units;
  const int n = count(rng);
  bool has_gaussian = false;
  for (int i = 0; i < n; ++i) {
    const std::string name = "u" + std::to_string(i);
    int k = kind(rng);
    if (k == 3 && has_gaussian) k = 0;
    has_gaussian = has_gaussian || k == 3;
    switch (k) {
      case 0: units.push_back({name, UnitType::binary()}); break;
      case 1: units.push_back({name, UnitType::categorical(cats(rng))}); break;
      case 2: units.push_back({name, UnitType::replicated_softmax(vocab(rng))}); break;
      default: units.push_back({name, UnitType::gaussian(std::uniform_real_distribution<double>(0.5, 2.0)(rng))});
    }
  }
  return VisibleSchema(std::move(units));
}

ModelParams random_params(const VisibleSchema& schema, int hidden, double scale, Rng& rng) {
  ModelParams p = ModelParams::zeros(schema, hidden);
  std::normal_distribution<double> normal(0.0, scale);
  for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a[i] = normal(rng);
  for (Eigen::Index j = 0; j < p.b.size(); ++j) p.b[j] = normal(rng);
  for (Eigen::Index j = 0; j < p.W.cols(); ++j)
    for (Eigen::Index i = 0; i < p.W.rows(); ++i) p.W(i, j) = normal(rng);
  return p;
}

MixedRecord random_record(const VisibleSchema& schema, Rng& rng, int max_tokens) {
  MixedRecord r;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& u : schema.units()) {
    switch (u.type.kind) {
      case UnitKind::Binary: r.values.emplace_back(BinaryValue{std::uniform_int_distribution<int>(0, 1)(rng)}); break;
      case UnitKind::Gaussian: r.values.emplace_back(GaussianValue{normal(rng)}); break;
      case UnitKind::Categorical:
        r.values.emplace_back(CategoricalValue{std::uniform_int_distribution<int>(0, u.type.size - 1)(rng)});
        break;
      case UnitKind::ConstrainedPoisson: {
        CountValue c;
        std::uniform_int_distribution<int> n(0, max_tokens);
        for (int t = 0; t < u.type.size; ++t) c.counts.push_back(n(rng));
        r.values.emplace_back(std::move(c));
        break;
      }
      case UnitKind::ReplicatedSoftmax: {
        TokenValue t;
        const int d = std::uniform_int_distribution<int>(1, max_tokens)(rng);
        std::uniform_int_distribution<int> tok(0, u.type.size - 1);
        for (int k = 0; k < d; ++k) t.tokens.push_back(tok(rng));
        r.values.emplace_back(std::move(t));
        break;
      }
    }
  }
  return r;
}

std::vector<GradCheck> check_gradients(const ModelParams& params, const VisibleSchema& schema,
                                       const std::vector<MixedRecord>& records, int groups,
                                       double likelihood_threshold, double regularizer_threshold, double eps) {
  if (records.size() < 3) throw UsageError("gradient check needs at least 3 records");
  std::vector<GradCheck> out;

  const MixedRecord& v = records.front();
  const Gradient exact = oracle::exact_gradient(v, params, schema);
  const Gradient fd_ll = finite_difference(
      [&](const ModelParams& p) { return oracle::exact_log_likelihood(v, p, schema); }, params, eps);
  out.push_back({"log_likelihood", relative_error(exact, fd_ll), likelihood_threshold});

  std::vector<VisibleState> states;
  for (const auto& r : records) states.push_back(encode(r, schema));
  const Gradient sp = sparsity_gradient(states.front(), params, schema, groups);
  const Gradient fd_sp = finite_difference(
      [&](const ModelParams& p) { return sparsity_penalty(hidden_conditional(states.front(), p, schema), groups); },
      params, eps);
  out.push_back({"sparsity", relative_error(sp, fd_sp), regularizer_threshold});

  StateRefs same, different;
  for (std::size_t i = 1; i < states.size(); ++i) (i % 2 ? same : different).push_back(&states[i]);
  const Gradient mg = metric_gradient(states.front(), same, different, params, schema);
  const Gradient fd_mg = finite_difference(
      [&](const ModelParams& p) { return metric_objective(states.front(), same, different, p, schema); }, params,
      eps);
  out.push_back({"metric", relative_error(mg, fd_mg), regularizer_threshold});
  return out;
}

}  // namespace mvrbm
