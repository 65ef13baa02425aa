#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mvrbm/schema.hpp"

namespace mvrbm {

struct BinaryValue {
  int bit = 0;
};
struct GaussianValue {
  double x = 0.0;
};
struct CategoricalValue {
  int index = 0;
};
/// Count vector of a constrained-Poisson block; its sum is the record length N.
struct CountValue {
  std::vector<int> counts;
};
/// Multiset of tokens of a replicated-softmax block; order is irrelevant.
struct TokenValue {
  std::vector<int> tokens;
};

/// std::monostate marks an unobserved unit (allowed for projection and
/// prediction only).
using UnitValue =
    std::variant<std::monostate, BinaryValue, GaussianValue, CategoricalValue, CountValue, TokenValue>;

struct MixedRecord {
  std::vector<UnitValue> values;

  /// Replication count: total number of tokens over all replicated-softmax blocks.
  int replication() const;
};

/// Dense column view of a record. `values` holds one entry per weight
/// column: the bit, the raw Gaussian value, a one-hot row, or counts.
/// Count entries may be fractional for mean-field reconstructions.
struct VisibleState {
  Eigen::VectorXd values;
  /// Per unit: N for constrained-Poisson blocks, D for replicated-softmax
  /// blocks, 0 otherwise.
  std::vector<double> lengths;
  std::vector<char> observed;
  /// Multiplier of the hidden bias: the replication count D when the schema
  /// has a replicated-softmax block, 1 otherwise.
  double bias_scale = 1.0;

  bool fully_observed() const;
};

/// Throws ValidationError (or SchemaError on arity/type mismatch).
void validate(const MixedRecord& record, const VisibleSchema& schema, bool allow_missing = false);

VisibleState encode(const MixedRecord& record, const VisibleSchema& schema);

/// Weight-side feature per column: v/sigma for Gaussian units, the raw value otherwise.
Eigen::VectorXd features(const VisibleState& state, const VisibleSchema& schema);

/// Statistic multiplying the visible bias in -dE/da, up to terms constant
/// in v: v/sigma^2 for Gaussian units, the raw value otherwise.
Eigen::VectorXd bias_statistic(const VisibleState& state, const VisibleSchema& schema);

/// Converts an integral state back into a typed record (one-hot rows to
/// indices, counts to sorted token multisets). Fractional counts are rounded.
MixedRecord to_record(const VisibleState& state, const VisibleSchema& schema);

}  // namespace mvrbm
