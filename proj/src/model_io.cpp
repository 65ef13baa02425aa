#include "mvrbm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "mvrbm/errors.hpp"

namespace mvrbm {

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return std::string(buf, end);
}

namespace {

constexpr const char* kMagic = "mvrbm-model";

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
  out << '\n';
}

double parse_double(const std::string& token) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ValidationError("model file: bad number '" + token + "'");
  return x;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> line() {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_no_;
      if (text.empty() || text[0] == '#') continue;
      std::istringstream ss(text);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw ValidationError("model file: unexpected end of input");
  }

  std::vector<std::string> expect(const std::string& key, std::size_t min_tokens) {
    auto tokens = line();
    if (tokens[0] != key || tokens.size() < min_tokens)
      throw ValidationError("model file line " + std::to_string(line_no_) + ": expected '" + key + "'");
    return tokens;
  }

  Eigen::VectorXd numbers(const std::string& key, Eigen::Index n) {
    auto tokens = expect(key, 1);
    if (static_cast<Eigen::Index>(tokens.size()) != n + 1)
      throw ValidationError("model file line " + std::to_string(line_no_) + ": '" + key + "' needs " +
                            std::to_string(n) + " values");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = parse_double(tokens[static_cast<std::size_t>(i) + 1]);
    return v;
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

int parse_int(const std::string& token) {
  int x = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ValidationError("model file: bad integer '" + token + "'");
  return x;
}

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  const auto& schema = model.schema;
  const auto& p = model.params;
  p.check(schema);
  if (!p.all_finite()) throw NumericError("refusing to write non-finite parameters");
  out << "format " << kMagic << ' ' << kModelFormatVersion << '\n';
  out << "units " << schema.size() << '\n';
  for (const auto& u : schema.units()) {
    if (u.name.find_first_of(" \t\r\n#") != std::string::npos)
      throw SchemaError("unit name '" + u.name + "' contains whitespace or '#'");
    out << "unit " << u.name << ' ' << to_string(u.type.kind) << ' ';
    if (u.type.kind == UnitKind::Gaussian)
      out << format_double(u.type.sigma);
    else
      out << u.type.size;
    out << '\n';
  }
  out << "hidden " << p.hidden_units() << '\n';
  out << "a ";
  write_vector(out, p.a);
  out << "b ";
  write_vector(out, p.b);
  out << "W " << p.W.rows() << ' ' << p.W.cols() << '\n';
  for (Eigen::Index r = 0; r < p.W.rows(); ++r) write_vector(out, p.W.row(r).transpose());
  out << "end\n";
}

std::string model_to_string(const Model& model) {
  std::ostringstream os;
  write_model(os, model);
  return os.str();
}

Model read_model(std::istream& in) {
  Reader r(in);
  auto header = r.expect("format", 3);
  if (header[1] != kMagic) throw ValidationError("not a model file (magic '" + header[1] + "')");
  const int version = parse_int(header[2]);
  if (version != kModelFormatVersion)
    throw ValidationError("model format version " + std::to_string(version) + " is not supported; this build reads version " +
                          std::to_string(kModelFormatVersion));

  const int units = parse_int(r.expect("units", 2)[1]);
  std::vector<UnitSpec> specs;
  for (int i = 0; i < units; ++i) {
    auto t = r.expect("unit", 4);
    const UnitKind kind = unit_kind_from_string(t[2]);
    UnitType type{kind, 1.0, 1};
    if (kind == UnitKind::Gaussian)
      type.sigma = parse_double(t[3]);
    else if (kind != UnitKind::Binary)
      type.size = parse_int(t[3]);
    specs.push_back({t[1], type});
  }
  Model m;
  m.schema = VisibleSchema(std::move(specs));
  const int hidden = parse_int(r.expect("hidden", 2)[1]);
  if (hidden < 1) throw ValidationError("model file: hidden must be >= 1");
  const int cols = m.schema.total_weight_columns();
  m.params.a = r.numbers("a", cols);
  m.params.b = r.numbers("b", hidden);
  auto wline = r.expect("W", 3);
  if (parse_int(wline[1]) != cols || parse_int(wline[2]) != hidden)
    throw ValidationError("model file: W shape does not match schema");
  m.params.W.resize(cols, hidden);
  for (int row = 0; row < cols; ++row) {
    auto tokens = r.line();
    if (static_cast<int>(tokens.size()) != hidden)
      throw ValidationError("model file line " + std::to_string(r.line_no()) + ": W row needs " +
                            std::to_string(hidden) + " values");
    for (int k = 0; k < hidden; ++k) m.params.W(row, k) = parse_double(tokens[static_cast<std::size_t>(k)]);
  }
  r.expect("end", 1);
  if (!m.params.all_finite()) throw ValidationError("model file holds non-finite parameters");
  return m;
}

Model model_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_model(is);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file '" + path + "'");
  return read_model(in);
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write model file '" + path + "'");
  write_model(out, model);
}

}  // namespace mvrbm
