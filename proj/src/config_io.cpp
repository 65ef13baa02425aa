#include "mvrbm/config_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "mvrbm/errors.hpp"
#include "mvrbm/model_io.hpp"

namespace mvrbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("config key '" + key + "': expected true or false, got '" + text + "'");
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

template <class T>
Setter number(T TrainConfig::*field) {
  return [field](TrainConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<T>(k, v); };
}

Setter flag(bool TrainConfig::*field) {
  return [field](TrainConfig& c, const std::string& k, const std::string& v) { c.*field = parse_bool(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t{
        {"hidden", number(&TrainConfig::hidden)},
        {"cd_steps", number(&TrainConfig::cd_steps)},
        {"persistent", flag(&TrainConfig::persistent)},
        {"mean_field_data", flag(&TrainConfig::mean_field_data)},
        {"lr_w", number(&TrainConfig::lr_w)},
        {"lr_a", number(&TrainConfig::lr_a)},
        {"lr_b", number(&TrainConfig::lr_b)},
        {"batch_size", number(&TrainConfig::batch_size)},
        {"epochs", number(&TrainConfig::epochs)},
        {"alpha", number(&TrainConfig::alpha)},
        {"groups", number(&TrainConfig::groups)},
        {"beta", number(&TrainConfig::beta)},
        {"metric_neighbors", number(&TrainConfig::metric_neighbors)},
        {"metric_non_neighbors", number(&TrainConfig::metric_non_neighbors)},
        {"rho1", number(&TrainConfig::rho1)},
        {"seed", number(&TrainConfig::seed)},
        {"init_scale", number(&TrainConfig::init_scale)},
        {"frequency_bias_init", flag(&TrainConfig::frequency_bias_init)},
        {"exact_gradient", flag(&TrainConfig::exact_gradient)},
        {"threads", number(&TrainConfig::threads)},
        {"gaussian_noise",
         [](TrainConfig& c, const std::string& k, const std::string& v) { c.sampling.gaussian_noise = parse_bool(k, v); }},
        {"poisson_counts",
         [](TrainConfig& c, const std::string& k, const std::string& v) { c.sampling.poisson_counts = parse_bool(k, v); }},
    };
    for (UnitKind kind : {UnitKind::Binary, UnitKind::Gaussian, UnitKind::Categorical, UnitKind::ConstrainedPoisson,
                          UnitKind::ReplicatedSoftmax}) {
      const auto slot = static_cast<std::size_t>(kind);
      t["lr_scale_" + std::string(to_string(kind))] = [slot](TrainConfig& c, const std::string& k,
                                                              const std::string& v) {
        c.type_lr_scale[slot] = parse_number<double>(k, v);
      };
    }
    return t;
  }();
  return table;
}

}  // namespace

void read_config(std::istream& in, TrainConfig& config) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(config, key, value);
  }
}

void load_config(const std::string& path, TrainConfig& config) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  read_config(in, config);
}

void write_config(std::ostream& out, const TrainConfig& c) {
  auto b = [](bool x) { return x ? "true" : "false"; };
  out << "hidden = " << c.hidden << '\n'
      << "cd_steps = " << c.cd_steps << '\n'
      << "persistent = " << b(c.persistent) << '\n'
      << "mean_field_data = " << b(c.mean_field_data) << '\n'
      << "lr_w = " << format_double(c.lr_w) << '\n'
      << "lr_a = " << format_double(c.lr_a) << '\n'
      << "lr_b = " << format_double(c.lr_b) << '\n';
  for (UnitKind kind : {UnitKind::Binary, UnitKind::Gaussian, UnitKind::Categorical, UnitKind::ConstrainedPoisson,
                        UnitKind::ReplicatedSoftmax})
    out << "lr_scale_" << to_string(kind) << " = " << format_double(c.type_lr_scale[static_cast<std::size_t>(kind)])
        << '\n';
  out << "batch_size = " << c.batch_size << '\n'
      << "epochs = " << c.epochs << '\n'
      << "alpha = " << format_double(c.alpha) << '\n'
      << "groups = " << c.groups << '\n'
      << "beta = " << format_double(c.beta) << '\n'
      << "metric_neighbors = " << c.metric_neighbors << '\n'
      << "metric_non_neighbors = " << c.metric_non_neighbors << '\n'
      << "rho1 = " << format_double(c.rho1) << '\n'
      << "seed = " << c.seed << '\n'
      << "init_scale = " << format_double(c.init_scale) << '\n'
      << "frequency_bias_init = " << b(c.frequency_bias_init) << '\n'
      << "exact_gradient = " << b(c.exact_gradient) << '\n'
      << "gaussian_noise = " << b(c.sampling.gaussian_noise) << '\n'
      << "poisson_counts = " << b(c.sampling.poisson_counts) << '\n'
      << "threads = " << c.threads << '\n';
}

}  // namespace mvrbm
