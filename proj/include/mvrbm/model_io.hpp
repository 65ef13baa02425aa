#pragma once

#include <iosfwd>
#include <string>

#include "mvrbm/params.hpp"
#include "mvrbm/schema.hpp"

namespace mvrbm {

inline constexpr int kModelFormatVersion = 1;

/// A trained model: the schema travels with the parameters.
struct Model {
  VisibleSchema schema;
  ModelParams params;
};

/// Versioned text format; see docs/formats.md. Numbers are written in the
/// shortest form that reads back to the identical double.
void write_model(std::ostream& out, const Model& model);
std::string model_to_string(const Model& model);

/// Throws ValidationError on malformed input or a different format version.
Model read_model(std::istream& in);
Model model_from_string(const std::string& text);

Model load_model(const std::string& path);
void save_model(const std::string& path, const Model& model);

std::string format_double(double x);

}  // namespace mvrbm
