#include "mvrbm/schema.hpp"

#include <cmath>
#include <unordered_set>

#include "mvrbm/errors.hpp"

namespace mvrbm {

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::Binary: return "binary";
    case UnitKind::Gaussian: return "gaussian";
    case UnitKind::Categorical: return "categorical";
    case UnitKind::ConstrainedPoisson: return "constrained_poisson";
    case UnitKind::ReplicatedSoftmax: return "replicated_softmax";
  }
  return "unknown";
}

UnitKind unit_kind_from_string(std::string_view name) {
  for (auto kind : {UnitKind::Binary, UnitKind::Gaussian, UnitKind::Categorical,
                    UnitKind::ConstrainedPoisson, UnitKind::ReplicatedSoftmax}) {
    if (to_string(kind) == name) return kind;
  }
  throw SchemaError("unknown unit type '" + std::string(name) + "'");
}

int UnitType::width() const {
  switch (kind) {
    case UnitKind::Binary:
    case UnitKind::Gaussian: return 1;
    default: return size;
  }
}

VisibleSchema::VisibleSchema(std::vector<UnitSpec> units) : units_(std::move(units)) {
  std::unordered_set<std::string> seen;
  offsets_.reserve(units_.size());
  for (const auto& u : units_) {
    if (u.name.empty()) throw SchemaError("unit name must not be empty");
    if (!seen.insert(u.name).second) throw SchemaError("duplicate unit name '" + u.name + "'");
    const auto& t = u.type;
    switch (t.kind) {
      case UnitKind::Gaussian:
        if (!(t.sigma > 0.0) || !std::isfinite(t.sigma))
          throw SchemaError("gaussian unit '" + u.name + "' needs sigma > 0");
        break;
      case UnitKind::Categorical:
        if (t.size < 2) throw SchemaError("categorical unit '" + u.name + "' needs at least 2 categories");
        break;
      case UnitKind::ConstrainedPoisson:
      case UnitKind::ReplicatedSoftmax:
        if (t.size < 1) throw SchemaError("count unit '" + u.name + "' needs vocabulary size >= 1");
        break;
      case UnitKind::Binary: break;
    }
    if (t.kind == UnitKind::ReplicatedSoftmax) has_replicated_softmax_ = true;
    offsets_.push_back(total_columns_);
    total_columns_ += t.width();
  }
}

std::size_t VisibleSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < units_.size(); ++i)
    if (units_[i].name == name) return i;
  throw SchemaError("schema has no unit named '" + std::string(name) + "'");
}

bool VisibleSchema::has_kind(UnitKind kind) const {
  for (const auto& u : units_)
    if (u.type.kind == kind) return true;
  return false;
}

}  // namespace mvrbm
