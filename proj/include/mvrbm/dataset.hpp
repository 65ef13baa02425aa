#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvrbm/record.hpp"
#include "mvrbm/training.hpp"

namespace mvrbm {

inline constexpr int kSchemaFormatVersion = 1;

/// Records with their ids and (optional) label labels.
struct Dataset {
  std::vector<MixedRecord> records;
  std::vector<std::int64_t> ids;
  /// kUnlabeled where a record carries no "concept" field.
  ConceptLabels concepts;

  std::size_t size() const { return records.size(); }
  bool any_labelled() const;
  void push_back(MixedRecord record, std::int64_t id, int label = kUnlabeled);
};

nlohmann::ordered_json schema_to_json(const VisibleSchema& schema);
VisibleSchema schema_from_json(const nlohmann::json& doc);
VisibleSchema load_schema(const std::string& path);
void save_schema(const std::string& path, const VisibleSchema& schema);

/// One JSON object per line: "id", optional "concept", then one field per
/// unit (number, index, count array or token array). A missing or null
/// field marks the unit as unobserved.
nlohmann::ordered_json record_to_json(const MixedRecord& record, const VisibleSchema& schema, std::int64_t id,
                                      int label);
MixedRecord record_from_json(const nlohmann::json& line, const VisibleSchema& schema);

Dataset read_dataset(std::istream& in, const VisibleSchema& schema);
void write_dataset(std::ostream& out, const Dataset& data, const VisibleSchema& schema);
Dataset load_dataset(const std::string& path, const VisibleSchema& schema);
void save_dataset(const std::string& path, const Dataset& data, const VisibleSchema& schema);

/// Per-feature mean and standard deviation of the Gaussian units.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const std::vector<MixedRecord>& data, const VisibleSchema& schema);
  void apply(std::vector<MixedRecord>& data, const VisibleSchema& schema) const;
};

}  // namespace mvrbm
