#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mvrbm/analytics.hpp"
#include "mvrbm/config_io.hpp"
#include "mvrbm/dataset.hpp"
#include "mvrbm/errors.hpp"
#include "mvrbm/gradcheck.hpp"
#include "mvrbm/inference.hpp"
#include "mvrbm/model_io.hpp"
#include "mvrbm/rng.hpp"
#include "mvrbm/synth.hpp"
#include "mvrbm/training.hpp"

namespace mvrbm::cli {

namespace {

std::string fmt6(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Writes to --out when given, else to the command's output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write '" + path + "'");
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Common {
  std::string schema, data, model, out, query;
  int threads = 1;
  std::uint64_t seed = 1;
  double rho1 = 0.5;
  int k = 10;
};

std::vector<Eigen::VectorXd> posteriors_of(const Dataset& d, const Model& m) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(d.size());
  for (const auto& r : d.records) out.push_back(hidden_conditional(r, m.params, m.schema));
  return out;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

int cmd_synth(const SyntheticSpec& spec, const Common& c, std::ostream& out) {
  if (c.schema.empty()) throw UsageError("synth: --schema (output path) is required");
  const Dataset d = synthesize(spec);
  save_schema(c.schema, synthetic_schema(spec));
  Sink sink(c.out, out);
  write_dataset(*sink, d, synthetic_schema(spec));
  return 0;
}

struct TrainFlags {
  std::string config, log;
  std::optional<int> hidden, epochs, batch, cd_steps, groups;
  std::optional<double> alpha, beta, lr_w, lr_a, lr_b;
  bool persistent = false, exact = false;
};

int cmd_train(const TrainFlags& f, const Common& c, CLI::App& app, std::ostream& out, std::ostream& err) {
  if (c.schema.empty() || c.data.empty() || c.out.empty())
    throw UsageError("train: --schema, --data and --out are required");
  TrainConfig config;
  if (!f.config.empty()) load_config(f.config, config);
  if (f.hidden) config.hidden = *f.hidden;
  if (f.epochs) config.epochs = *f.epochs;
  if (f.batch) config.batch_size = *f.batch;
  if (f.cd_steps) config.cd_steps = *f.cd_steps;
  if (f.groups) config.groups = *f.groups;
  if (f.alpha) config.alpha = *f.alpha;
  if (f.beta) config.beta = *f.beta;
  if (f.lr_w) config.lr_w = *f.lr_w;
  if (f.lr_a) config.lr_a = *f.lr_a;
  if (f.lr_b) config.lr_b = *f.lr_b;
  if (f.persistent) config.persistent = true;
  if (f.exact) config.exact_gradient = true;
  if (app.count("--seed")) config.seed = c.seed;
  if (app.count("--threads")) config.threads = c.threads;
  if (app.count("--rho1")) config.rho1 = c.rho1;
  config.validate();

  const VisibleSchema schema = load_schema(c.schema);
  const Dataset data = load_dataset(c.data, schema);
  if (config.beta > 0.0 && !data.any_labelled())
    throw UsageError("train: --beta > 0 needs \"concept\" labels in the dataset");
  const FitResult r = fit(data.records, schema, config, &data.concepts);

  Sink log(f.log, out);
  *log << log_header(config.exact_gradient) << '\n';
  for (const auto& row : r.log) *log << log_row(row, config.exact_gradient) << '\n';
  save_model(c.out, Model{schema, r.params});
  if (r.diverged) {
    err << "train: " << r.message << '\n';
    return 3;
  }
  return 0;
}

int cmd_project(const Common& c, std::ostream& out) {
  if (c.model.empty() || c.data.empty()) throw UsageError("project: --model and --data are required");
  const Model m = load_model(c.model);
  const Dataset d = load_dataset(c.data, m.schema);
  const int k = m.params.hidden_units();
  Sink sink(c.out, out);
  *sink << "id";
  for (int j = 0; j < k; ++j) *sink << ",p" << j;
  for (int j = 0; j < k; ++j) *sink << ",bit" << j;
  *sink << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    const LatentProfile p = project(d.records[i], m.params, m.schema, c.rho1);
    *sink << d.ids[i];
    for (int j = 0; j < k; ++j) *sink << ',' << format_double(p.posteriors[j]);
    for (int j = 0; j < k; ++j) *sink << ',' << int(p.code[j]);
    *sink << '\n';
  }
  return 0;
}

std::vector<int> parse_candidates(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad candidate token '" + item + "'");
    }
  }
  return out;
}

int cmd_predict(const std::string& unit_name, const std::string& candidates, const Common& c, std::ostream& out) {
  if (c.model.empty() || c.data.empty() || unit_name.empty())
    throw UsageError("predict: --model, --data and --unit are required");
  const Model m = load_model(c.model);
  const Dataset d = load_dataset(c.data, m.schema);
  const std::size_t unit = m.schema.index_of(unit_name);
  const std::vector<int> cand = candidates.empty() ? full_vocabulary(m.schema, unit) : parse_candidates(candidates);
  const bool hide_target = m.schema.unit(unit).type.kind == UnitKind::Categorical;
  Sink sink(c.out, out);
  *sink << "id,token,probability,vocabulary_probability\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    MixedRecord observed = d.records[i];
    if (hide_target) observed.values[unit] = std::monostate{};
    const PredictionRanking r = predict_unseen(observed, m.params, m.schema, unit, cand);
    for (const auto& e : r.entries)
      *sink << d.ids[i] << ',' << e.token << ',' << fmt6(e.probability) << ',' << fmt6(e.vocabulary_probability)
            << '\n';
  }
  return 0;
}

int cmd_retrieve(const Common& c, std::ostream& out) {
  if (c.model.empty() || c.data.empty()) throw UsageError("retrieve: --model and --data are required");
  if (c.k < 1) throw UsageError("--k must be >= 1");
  const Model m = load_model(c.model);
  const Dataset corpus = load_dataset(c.data, m.schema);
  const Dataset queries = c.query.empty() ? corpus : load_dataset(c.query, m.schema);
  const auto results = retrieve_all(posteriors_of(queries, m), queries.ids, queries.concepts,
                                    posteriors_of(corpus, m), corpus.ids, corpus.concepts, c.threads);
  Sink sink(c.out, out);
  *sink << "query_id,rank,id,distance,relevant\n";
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.items.size() && i < static_cast<std::size_t>(c.k); ++i)
      *sink << r.query_id << ',' << i + 1 << ',' << r.items[i].id << ',' << fmt6(r.items[i].distance) << ','
            << int(r.items[i].relevant) << '\n';
  return 0;
}

std::vector<Code> codes_of(const Dataset& d, const Model& m, double rho1) {
  std::vector<Code> codes;
  for (const auto& r : d.records) codes.push_back(project(r, m.params, m.schema, rho1).code);
  return codes;
}

int cmd_cluster(int clusters, int max_iter, const Common& c, std::ostream& out) {
  if (c.model.empty() || c.data.empty()) throw UsageError("cluster: --model and --data are required");
  const Model m = load_model(c.model);
  const Dataset d = load_dataset(c.data, m.schema);
  const ClusterAssignment a = hamming_kmeans(codes_of(d, m, c.rho1), clusters, c.seed, max_iter);
  Sink sink(c.out, out);
  *sink << "id,cluster\n";
  for (std::size_t i = 0; i < d.size(); ++i) *sink << d.ids[i] << ',' << a.cluster[i] << '\n';
  return 0;
}

int cmd_eval(const std::vector<std::string>& models, const std::string& method, int clusters, const Common& c,
             std::ostream& out) {
  if (models.empty() || c.data.empty()) throw UsageError("eval: --model and --data are required");
  if (c.k < 1) throw UsageError("--k must be >= 1");
  std::vector<double> maps, ndcgs, rands;
  for (const auto& path : models) {
    const Model m = load_model(path);
    const Dataset corpus = load_dataset(c.data, m.schema);
    const bool leave_one_out = c.query.empty();
    const Dataset queries = leave_one_out ? corpus : load_dataset(c.query, m.schema);
    const auto qpost = posteriors_of(queries, m);
    const auto cpost = posteriors_of(corpus, m);
    auto results = retrieve_all(qpost, queries.ids, queries.concepts, cpost, corpus.ids, corpus.concepts, c.threads);
    if (leave_one_out)
      for (auto& r : results)
        std::erase_if(r.items, [&](const RankedItem& item) { return item.id == r.query_id; });
    maps.push_back(map_at_k(results, c.k));
    ndcgs.push_back(ndcg_at_k(results, c.k));
    if (clusters > 0) {
      const ClusterAssignment a = hamming_kmeans(codes_of(queries, m, c.rho1), clusters, c.seed);
      rands.push_back(rand_index(a.cluster, queries.concepts));
    }
  }
  Sink sink(c.out, out);
  *sink << "method,metric,value,std\n";
  const std::string k = std::to_string(c.k);
  *sink << method << ",map@" << k << ',' << fmt6(mean_of(maps)) << ',' << fmt6(sample_std(maps)) << '\n';
  *sink << method << ",ndcg@" << k << ',' << fmt6(mean_of(ndcgs)) << ',' << fmt6(sample_std(ndcgs)) << '\n';
  if (clusters > 0)
    *sink << method << ",rand_index," << fmt6(mean_of(rands)) << ',' << fmt6(sample_std(rands)) << '\n';
  return 0;
}

int cmd_gradcheck(double threshold, int hidden, int groups, const Common& c, std::ostream& out) {
  Rng rng = make_rng(c.seed, "gradcheck");
  Model m;
  if (!c.model.empty()) {
    m = load_model(c.model);
  } else {
    m.schema = c.schema.empty() ? random_tiny_schema(rng) : load_schema(c.schema);
    m.params = random_params(m.schema, hidden, 0.5, rng);
  }
  std::vector<MixedRecord> records;
  if (!c.data.empty()) {
    const Dataset d = load_dataset(c.data, m.schema);
    records.assign(d.records.begin(), d.records.begin() + std::min<std::size_t>(d.size(), 5));
  }
  while (records.size() < 3) records.push_back(random_record(m.schema, rng));
  const auto checks = check_gradients(m.params, m.schema, records, groups, threshold, threshold);
  Sink sink(c.out, out);
  *sink << "check,relative_error,threshold,status\n";
  bool ok = true;
  for (const auto& ch : checks) {
    *sink << ch.name << ',' << fmt6(ch.relative_error) << ',' << fmt6(ch.threshold) << ','
          << (ch.passed() ? "pass" : "fail") << '\n';
    ok = ok && ch.passed();
  }
  return ok ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-variate restricted Boltzmann machines", "mvrbm"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* sub, bool data_model) {
    sub->add_option("--out", c.out, "Output file (default: standard output)");
    sub->add_option("--seed", c.seed, "Seed for every random stream");
    sub->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    if (data_model) {
      sub->add_option("--model", c.model, "Model file");
      sub->add_option("--data", c.data, "Dataset (JSON lines)");
      sub->add_option("--rho1", c.rho1, "Binarisation threshold");
    }
  };

  SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a planted-concept mixed dataset");
  add_common(synth, false);
  synth->add_option("--schema", c.schema, "Schema output path");
  synth->add_option("--concepts", spec.concepts);
  synth->add_option("--per-concept", spec.records_per_concept);
  synth->add_option("--gaussian-units", spec.gaussian_units);
  synth->add_option("--categorical-units", spec.categorical_units);
  synth->add_option("--categories", spec.categories);
  synth->add_option("--vocab", spec.vocab);
  synth->add_option("--tokens", spec.tokens);
  synth->add_option("--spread", spec.prototype_spread);
  synth->add_option("--gaussian-noise", spec.gaussian_noise);
  synth->add_option("--categorical-noise", spec.categorical_noise);
  synth->add_option("--token-noise", spec.token_noise);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Fit a model and write it with the training log");
  add_common(train, false);
  train->add_option("--schema", c.schema, "Schema file");
  train->add_option("--data", c.data, "Training dataset");
  train->add_option("--rho1", c.rho1, "Binarisation threshold");
  train->add_option("--config", tf.config, "key = value configuration file");
  train->add_option("--log", tf.log, "Training log path (default: standard output)");
  train->add_option("--hidden", tf.hidden);
  train->add_option("--epochs", tf.epochs);
  train->add_option("--batch", tf.batch);
  train->add_option("--cd-steps", tf.cd_steps);
  train->add_option("--alpha", tf.alpha, "Sparsity coefficient");
  train->add_option("--groups", tf.groups, "Number of hidden groups");
  train->add_option("--beta", tf.beta, "Metric-learning coefficient");
  train->add_option("--lr-w", tf.lr_w);
  train->add_option("--lr-a", tf.lr_a);
  train->add_option("--lr-b", tf.lr_b);
  train->add_flag("--persistent", tf.persistent, "Persistent contrastive divergence");
  train->add_flag("--oracle-exact-gradient", tf.exact, "Full-batch exact gradient (tiny models)");

  auto* projectc = app.add_subcommand("project", "Write hidden posteriors and binary codes");
  add_common(projectc, true);

  std::string unit, candidates;
  auto* predict = app.add_subcommand("predict", "Rank values of a categorical or replicated-softmax unit");
  add_common(predict, true);
  predict->add_option("--unit", unit, "Unit to predict");
  predict->add_option("--candidates", candidates, "Comma-separated candidate tokens (default: all)");

  auto* retrieve = app.add_subcommand("retrieve", "Rank the corpus for every query by symmetric KL");
  add_common(retrieve, true);
  retrieve->add_option("--query", c.query, "Query dataset (default: the corpus)");
  retrieve->add_option("--k", c.k, "Results per query");

  int clusters = 0, max_iter = 100;
  auto* cluster = app.add_subcommand("cluster", "Hamming k-means on binary codes");
  add_common(cluster, true);
  cluster->add_option("--clusters", clusters, "Number of clusters")->required();
  cluster->add_option("--max-iter", max_iter);

  std::vector<std::string> models;
  std::string method = "model";
  auto* eval = app.add_subcommand("eval", "MAP, NDCG and Rand index report");
  add_common(eval, false);
  eval->add_option("--model", models, "Model file; repeat for repeated runs");
  eval->add_option("--data", c.data, "Corpus dataset");
  eval->add_option("--query", c.query, "Query dataset (default: leave-one-out over the corpus)");
  eval->add_option("--k", c.k, "Cutoff")->default_val(100);
  eval->add_option("--method", method, "Method label in the report");
  eval->add_option("--clusters", clusters, "Also report the Rand index of k-means with this many clusters");
  eval->add_option("--rho1", c.rho1, "Binarisation threshold");

  double threshold = 1e-4;
  int hidden = 3, groups = 1;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  add_common(gradcheck, true);
  gradcheck->add_option("--schema", c.schema, "Schema for a random model");
  gradcheck->add_option("--threshold", threshold, "Relative error threshold");
  gradcheck->add_option("--hidden", hidden, "Hidden units of a random model");
  gradcheck->add_option("--groups", groups, "Sparsity groups");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*synth) return cmd_synth(spec, c, out);
    if (*train) return cmd_train(tf, c, *train, out, err);
    if (*projectc) return cmd_project(c, out);
    if (*predict) return cmd_predict(unit, candidates, c, out);
    if (*retrieve) return cmd_retrieve(c, out);
    if (*cluster) return cmd_cluster(clusters, max_iter, c, out);
    if (*eval) return cmd_eval(models, method, clusters, c, out);
    if (*gradcheck) return cmd_gradcheck(threshold, hidden, groups, c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace mvrbm::cli
