#include "mvrbm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mvrbm/errors.hpp"

namespace mvrbm {

using nlohmann::json;
using nlohmann::ordered_json;

bool Dataset::any_labelled() const {
  for (int c : concepts)
    if (c != kUnlabeled) return true;
  return false;
}

void Dataset::push_back(MixedRecord record, std::int64_t id, int label) {
  records.push_back(std::move(record));
  ids.push_back(id);
  concepts.push_back(label);
}

ordered_json schema_to_json(const VisibleSchema& schema) {
  ordered_json doc;
  doc["format"] = "mvrbm-schema";
  doc["version"] = kSchemaFormatVersion;
  doc["units"] = ordered_json::array();
  for (const auto& u : schema.units()) {
    ordered_json unit;
    unit["name"] = u.name;
    unit["type"] = std::string(to_string(u.type.kind));
    switch (u.type.kind) {
      case UnitKind::Gaussian: unit["sigma"] = u.type.sigma; break;
      case UnitKind::Categorical: unit["categories"] = u.type.size; break;
      case UnitKind::ConstrainedPoisson:
      case UnitKind::ReplicatedSoftmax: unit["vocab"] = u.type.size; break;
      case UnitKind::Binary: break;
    }
    doc["units"].push_back(unit);
  }
  return doc;
}

VisibleSchema schema_from_json(const json& doc) {
  try {
    if (doc.contains("version") && doc.at("version").get<int>() != kSchemaFormatVersion)
      throw ValidationError("schema format version " + std::to_string(doc.at("version").get<int>()) +
                            " is not supported; this build reads version " + std::to_string(kSchemaFormatVersion));
    std::vector<UnitSpec> units;
    for (const auto& u : doc.at("units")) {
      const UnitKind kind = unit_kind_from_string(u.at("type").get<std::string>());
      UnitType type{kind, 1.0, 1};
      switch (kind) {
        case UnitKind::Gaussian: type.sigma = u.value("sigma", 1.0); break;
        case UnitKind::Categorical: type.size = u.at("categories").get<int>(); break;
        case UnitKind::ConstrainedPoisson:
        case UnitKind::ReplicatedSoftmax: type.size = u.at("vocab").get<int>(); break;
        case UnitKind::Binary: break;
      }
      units.push_back({u.at("name").get<std::string>(), type});
    }
    return VisibleSchema(std::move(units));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

VisibleSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open schema file '" + path + "'");
  try {
    return schema_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("schema file '" + path + "': " + e.what());
  }
}

void save_schema(const std::string& path, const VisibleSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write schema file '" + path + "'");
  out << schema_to_json(schema).dump(2) << '\n';
}

ordered_json record_to_json(const MixedRecord& record, const VisibleSchema& schema, std::int64_t id, int label) {
  ordered_json line;
  line["id"] = id;
  if (label != kUnlabeled) line["concept"] = label;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& name = schema.unit(i).name;
    const auto& v = record.values[i];
    if (const auto* b = std::get_if<BinaryValue>(&v)) line[name] = b->bit;
    else if (const auto* g = std::get_if<GaussianValue>(&v)) line[name] = g->x;
    else if (const auto* c = std::get_if<CategoricalValue>(&v)) line[name] = c->index;
    else if (const auto* n = std::get_if<CountValue>(&v)) line[name] = n->counts;
    else if (const auto* t = std::get_if<TokenValue>(&v)) line[name] = t->tokens;
    else line[name] = nullptr;
  }
  return line;
}

MixedRecord record_from_json(const json& line, const VisibleSchema& schema) {
  MixedRecord r;
  r.values.resize(schema.size());
  if (!line.is_object()) throw ValidationError("record is not a JSON object");
  for (const auto& [key, value] : line.items())
    if (key != "id" && key != "concept") {
      const auto& units = schema.units();
      if (std::none_of(units.begin(), units.end(), [&](const UnitSpec& u) { return u.name == key; }))
        throw ValidationError("unknown field '" + key + "'");
    }
  try {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& spec = schema.unit(i);
      if (!line.contains(spec.name) || line.at(spec.name).is_null()) continue;
      const auto& f = line.at(spec.name);
      switch (spec.type.kind) {
        case UnitKind::Binary: r.values[i] = BinaryValue{f.get<int>()}; break;
        case UnitKind::Gaussian: r.values[i] = GaussianValue{f.get<double>()}; break;
        case UnitKind::Categorical: r.values[i] = CategoricalValue{f.get<int>()}; break;
        case UnitKind::ConstrainedPoisson: r.values[i] = CountValue{f.get<std::vector<int>>()}; break;
        case UnitKind::ReplicatedSoftmax: r.values[i] = TokenValue{f.get<std::vector<int>>()}; break;
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
  validate(r, schema, /*allow_missing=*/true);
  return r;
}

Dataset read_dataset(std::istream& in, const VisibleSchema& schema) {
  Dataset d;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json line = json::parse(text);
      const std::int64_t id = line.value("id", static_cast<std::int64_t>(d.size()));
      const int label = line.contains("concept") ? line.at("concept").get<int>() : kUnlabeled;
      d.push_back(record_from_json(line, schema), id, label);
    } catch (const json::exception& e) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return d;
}

void write_dataset(std::ostream& out, const Dataset& data, const VisibleSchema& schema) {
  for (std::size_t i = 0; i < data.size(); ++i)
    out << record_to_json(data.records[i], schema, data.ids[i], data.concepts[i]).dump() << '\n';
}

Dataset load_dataset(const std::string& path, const VisibleSchema& schema) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset '" + path + "'");
  return read_dataset(in, schema);
}

void save_dataset(const std::string& path, const Dataset& data, const VisibleSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write dataset '" + path + "'");
  write_dataset(out, data, schema);
}

Standardizer Standardizer::fit(const std::vector<MixedRecord>& data, const VisibleSchema& schema) {
  Standardizer s;
  s.mean.assign(schema.size(), 0.0);
  s.stddev.assign(schema.size(), 1.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.unit(i).type.kind != UnitKind::Gaussian) continue;
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : data)
      if (const auto* g = std::get_if<GaussianValue>(&r.values[i])) {
        sum += g->x;
        sq += g->x * g->x;
        ++n;
      }
    if (n == 0) continue;
    s.mean[i] = sum / n;
    const double var = sq / n - s.mean[i] * s.mean[i];
    s.stddev[i] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

void Standardizer::apply(std::vector<MixedRecord>& data, const VisibleSchema& schema) const {
  for (auto& r : data)
    for (std::size_t i = 0; i < schema.size(); ++i)
      if (auto* g = std::get_if<GaussianValue>(&r.values[i])) g->x = (g->x - mean[i]) / stddev[i];
}

}  // namespace mvrbm
