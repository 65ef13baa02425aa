#include "mvrbm/synth.hpp"

#include <algorithm>

#include "mvrbm/errors.hpp"
#include "mvrbm/rng.hpp"

namespace mvrbm {

void SyntheticSpec::validate() const {
  if (concepts < 1) throw UsageError("synth: concepts must be >= 1");
  if (records_per_concept < 0) throw UsageError("synth: records_per_concept must be >= 0");
  if (gaussian_units < 0 || categorical_units < 0) throw UsageError("synth: unit counts must be >= 0");
  if (categorical_units > 0 && categories < 2) throw UsageError("synth: categories must be >= 2");
  if (tokens < 0) throw UsageError("synth: tokens must be >= 0");
  if (tokens > 0 && vocab < 1) throw UsageError("synth: vocab must be >= 1");
  if (gaussian_units + categorical_units == 0 && tokens == 0) throw UsageError("synth: no units requested");
  if (!(prototype_spread >= 0.0) || !(gaussian_noise >= 0.0)) throw UsageError("synth: spreads must be >= 0");
  for (double p : {categorical_noise, token_noise})
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("synth: noise probabilities must lie in [0, 1]");
}

VisibleSchema synthetic_schema(const SyntheticSpec& spec) {
  std::vector<UnitSpec> units;
  for (int i = 0; i < spec.gaussian_units; ++i) units.push_back({"g" + std::to_string(i), UnitType::gaussian(1.0)});
  for (int i = 0; i < spec.categorical_units; ++i)
    units.push_back({"c" + std::to_string(i), UnitType::categorical(spec.categories)});
  if (spec.tokens > 0) units.push_back({"tokens", UnitType::replicated_softmax(spec.vocab)});
  return VisibleSchema(std::move(units));
}

Dataset synthesize(const SyntheticSpec& spec) {
  spec.validate();
  const VisibleSchema schema = synthetic_schema(spec);
  Rng proto_rng = make_rng(spec.seed, "synth-prototypes");
  Rng rng = make_rng(spec.seed, "synth-records");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Prototype {
    std::vector<double> means;
    std::vector<int> categories;
    std::vector<int> topic;  // tokens preferred by this concept
  };
  std::vector<Prototype> protos(spec.concepts);
  const int slice = spec.vocab > 0 ? std::max(1, spec.vocab / spec.concepts) : 0;
  for (int c = 0; c < spec.concepts; ++c) {
    auto& p = protos[c];
    for (int i = 0; i < spec.gaussian_units; ++i) p.means.push_back(spec.prototype_spread * normal(proto_rng));
    std::uniform_int_distribution<int> cat(0, std::max(spec.categories, 2) - 1);
    for (int i = 0; i < spec.categorical_units; ++i) p.categories.push_back(cat(proto_rng));
    for (int t = 0; t < slice; ++t) p.topic.push_back((c * slice + t) % std::max(spec.vocab, 1));
  }

  Dataset d;
  const int n = spec.concepts * spec.records_per_concept;
  std::uniform_int_distribution<int> any_category(0, std::max(spec.categories, 2) - 1);
  std::uniform_int_distribution<int> any_token(0, std::max(spec.vocab, 1) - 1);
  for (int r = 0; r < n; ++r) {
    const int c = r % spec.concepts;
    const auto& p = protos[c];
    MixedRecord rec;
    for (int i = 0; i < spec.gaussian_units; ++i)
      rec.values.emplace_back(GaussianValue{p.means[i] + spec.gaussian_noise * normal(rng)});
    for (int i = 0; i < spec.categorical_units; ++i)
      rec.values.emplace_back(
          CategoricalValue{unit(rng) < spec.categorical_noise ? any_category(rng) : p.categories[i]});
    if (spec.tokens > 0) {
      std::uniform_int_distribution<std::size_t> in_topic(0, p.topic.size() - 1);
      TokenValue tv;
      for (int t = 0; t < spec.tokens; ++t)
        tv.tokens.push_back(unit(rng) < spec.token_noise ? any_token(rng) : p.topic[in_topic(rng)]);
      std::sort(tv.tokens.begin(), tv.tokens.end());
      rec.values.emplace_back(std::move(tv));
    }
    d.push_back(std::move(rec), r, c);
  }
  return d;
}

}  // namespace mvrbm
