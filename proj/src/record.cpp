#include "mvrbm/record.hpp"

#include <cmath>
#include <string>

#include "mvrbm/errors.hpp"

namespace mvrbm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

bool kind_matches(const UnitValue& value, UnitKind kind) {
  switch (kind) {
    case UnitKind::Binary: return std::holds_alternative<BinaryValue>(value);
    case UnitKind::Gaussian: return std::holds_alternative<GaussianValue>(value);
    case UnitKind::Categorical: return std::holds_alternative<CategoricalValue>(value);
    case UnitKind::ConstrainedPoisson: return std::holds_alternative<CountValue>(value);
    case UnitKind::ReplicatedSoftmax: return std::holds_alternative<TokenValue>(value);
  }
  return false;
}

}  // namespace

int MixedRecord::replication() const {
  int d = 0;
  for (const auto& v : values)
    if (const auto* t = std::get_if<TokenValue>(&v)) d += static_cast<int>(t->tokens.size());
  return d;
}

bool VisibleState::fully_observed() const {
  for (char o : observed)
    if (!o) return false;
  return true;
}

void validate(const MixedRecord& record, const VisibleSchema& schema, bool allow_missing) {
  if (record.values.size() != schema.size())
    throw SchemaError("record has " + std::to_string(record.values.size()) + " values, schema has " +
                      std::to_string(schema.size()) + " units");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& spec = schema.unit(i);
    const auto& value = record.values[i];
    if (std::holds_alternative<std::monostate>(value)) {
      if (!allow_missing) throw ValidationError("unit '" + spec.name + "' is unobserved");
      continue;
    }
    if (!kind_matches(value, spec.type.kind))
      throw SchemaError("unit '" + spec.name + "' expects a " + std::string(to_string(spec.type.kind)) +
                        " value");
    const int size = spec.type.size;
    std::visit(Overloaded{
                   [](const std::monostate&) {},
                   [&](const BinaryValue& b) {
                     if (b.bit != 0 && b.bit != 1) throw ValidationError("unit '" + spec.name + "' needs a 0/1 bit");
                   },
                   [&](const GaussianValue& g) {
                     if (!std::isfinite(g.x)) throw ValidationError("unit '" + spec.name + "' is not finite");
                   },
                   [&](const CategoricalValue& c) {
                     if (c.index < 0 || c.index >= size)
                       throw ValidationError("unit '" + spec.name + "' category out of range");
                   },
                   [&](const CountValue& c) {
                     if (static_cast<int>(c.counts.size()) != size)
                       throw ValidationError("unit '" + spec.name + "' needs " + std::to_string(size) + " counts");
                     for (int n : c.counts)
                       if (n < 0) throw ValidationError("unit '" + spec.name + "' has a negative count");
                   },
                   [&](const TokenValue& t) {
                     for (int tok : t.tokens)
                       if (tok < 0 || tok >= size) throw ValidationError("unit '" + spec.name + "' token out of range");
                   },
               },
               value);
  }
}

VisibleState encode(const MixedRecord& record, const VisibleSchema& schema) {
  validate(record, schema, /*allow_missing=*/true);
  VisibleState s;
  s.values = Eigen::VectorXd::Zero(schema.total_weight_columns());
  s.lengths.assign(schema.size(), 0.0);
  s.observed.assign(schema.size(), 1);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const int off = schema.offset(i);
    std::visit(Overloaded{
                   [&](const std::monostate&) { s.observed[i] = 0; },
                   [&](const BinaryValue& b) { s.values[off] = b.bit; },
                   [&](const GaussianValue& g) { s.values[off] = g.x; },
                   [&](const CategoricalValue& c) { s.values[off + c.index] = 1.0; },
                   [&](const CountValue& c) {
                     double n = 0.0;
                     for (std::size_t k = 0; k < c.counts.size(); ++k) {
                       s.values[off + static_cast<int>(k)] = c.counts[k];
                       n += c.counts[k];
                     }
                     s.lengths[i] = n;
                   },
                   [&](const TokenValue& t) {
                     for (int tok : t.tokens) s.values[off + tok] += 1.0;
                     s.lengths[i] = static_cast<double>(t.tokens.size());
                   },
               },
               record.values[i]);
  }
  s.bias_scale = schema.has_replicated_softmax() ? record.replication() : 1.0;
  return s;
}

Eigen::VectorXd features(const VisibleState& state, const VisibleSchema& schema) {
  Eigen::VectorXd x = state.values;
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema.unit(i).type.kind == UnitKind::Gaussian) x[schema.offset(i)] /= schema.unit(i).type.sigma;
  return x;
}

Eigen::VectorXd bias_statistic(const VisibleState& state, const VisibleSchema& schema) {
  Eigen::VectorXd s = state.values;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& t = schema.unit(i).type;
    if (t.kind == UnitKind::Gaussian) s[schema.offset(i)] /= t.sigma * t.sigma;
  }
  return s;
}

MixedRecord to_record(const VisibleState& state, const VisibleSchema& schema) {
  MixedRecord r;
  r.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!state.observed.empty() && !state.observed[i]) continue;
    const int off = schema.offset(i);
    const auto& t = schema.unit(i).type;
    auto block = state.values.segment(off, t.width());
    switch (t.kind) {
      case UnitKind::Binary: r.values[i] = BinaryValue{block[0] >= 0.5 ? 1 : 0}; break;
      case UnitKind::Gaussian: r.values[i] = GaussianValue{block[0]}; break;
      case UnitKind::Categorical: {
        Eigen::Index best = 0;
        block.maxCoeff(&best);
        r.values[i] = CategoricalValue{static_cast<int>(best)};
        break;
      }
      case UnitKind::ConstrainedPoisson: {
        CountValue c;
        for (Eigen::Index k = 0; k < block.size(); ++k) c.counts.push_back(static_cast<int>(std::lround(block[k])));
        r.values[i] = std::move(c);
        break;
      }
      case UnitKind::ReplicatedSoftmax: {
        TokenValue tv;
        for (Eigen::Index k = 0; k < block.size(); ++k)
          for (long n = std::lround(block[k]); n > 0; --n) tv.tokens.push_back(static_cast<int>(k));
        r.values[i] = std::move(tv);
        break;
      }
    }
  }
  return r;
}

}  // namespace mvrbm
