#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mvrbm {

enum class UnitKind { Binary, Gaussian, Categorical, ConstrainedPoisson, ReplicatedSoftmax };

std::string_view to_string(UnitKind kind);
UnitKind unit_kind_from_string(std::string_view name);

/// Type of one visible unit. `size` is the category count M for
/// Categorical and the vocabulary size V for the count blocks; `sigma`
/// is only meaningful for Gaussian units.
struct UnitType {
  UnitKind kind = UnitKind::Binary;
  double sigma = 1.0;
  int size = 1;

  static UnitType binary() { return {UnitKind::Binary, 1.0, 1}; }
  static UnitType gaussian(double sigma = 1.0) { return {UnitKind::Gaussian, sigma, 1}; }
  static UnitType categorical(int categories) { return {UnitKind::Categorical, 1.0, categories}; }
  static UnitType constrained_poisson(int vocab) { return {UnitKind::ConstrainedPoisson, 1.0, vocab}; }
  static UnitType replicated_softmax(int vocab) { return {UnitKind::ReplicatedSoftmax, 1.0, vocab}; }

  /// Number of weight columns the unit occupies.
  int width() const;
  bool is_count_block() const {
    return kind == UnitKind::ConstrainedPoisson || kind == UnitKind::ReplicatedSoftmax;
  }

  friend bool operator==(const UnitType&, const UnitType&) = default;
};

struct UnitSpec {
  std::string name;
  UnitType type;

  friend bool operator==(const UnitSpec&, const UnitSpec&) = default;
};

/// Ordered layout of one mixed record. Each unit owns a contiguous range
/// of weight columns starting at `offset(i)`.
class VisibleSchema {
 public:
  VisibleSchema() = default;
  explicit VisibleSchema(std::vector<UnitSpec> units);

  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  const UnitSpec& unit(std::size_t i) const { return units_[i]; }
  const std::vector<UnitSpec>& units() const { return units_; }

  int offset(std::size_t i) const { return offsets_[i]; }
  int width(std::size_t i) const { return units_[i].type.width(); }
  int total_weight_columns() const { return total_columns_; }

  /// Index of the unit called `name`; throws SchemaError when absent.
  std::size_t index_of(std::string_view name) const;
  bool has_replicated_softmax() const { return has_replicated_softmax_; }
  bool has_kind(UnitKind kind) const;

  friend bool operator==(const VisibleSchema& x, const VisibleSchema& y) { return x.units_ == y.units_; }

 private:
  std::vector<UnitSpec> units_;
  std::vector<int> offsets_;
  int total_columns_ = 0;
  bool has_replicated_softmax_ = false;
};

}  // namespace mvrbm
