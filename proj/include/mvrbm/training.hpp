#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvrbm/model.hpp"
#include "mvrbm/regularizers.hpp"

namespace mvrbm {

inline constexpr int kUnlabeled = -1;

/// Concept id per record; kUnlabeled records take no part in metric learning.
using ConceptLabels = std::vector<int>;

struct TrainConfig {
  int hidden = 50;
  int cd_steps = 1;
  bool persistent = false;
  /// Use P(h|v0) instead of the sampled h0 in the data term.
  bool mean_field_data = false;
  /// Hidden-side rate for W and b, visible-side rate for a.
  double lr_w = 0.02;
  double lr_a = 0.3;
  double lr_b = 0.02;
  /// Multiplier on the learning rates of `a` and of W rows, per unit kind
  /// (indexed by UnitKind).
  std::array<double, 5> type_lr_scale{1.0, 1.0, 1.0, 1.0, 1.0};
  int batch_size = 100;
  int epochs = 100;
  double alpha = 0.0;
  int groups = 1;
  double beta = 0.0;
  int metric_neighbors = 5;
  int metric_non_neighbors = 5;
  double rho1 = 0.5;
  std::uint64_t seed = 1;
  /// Standard deviation of the initial weights.
  double init_scale = 0.01;
  /// Initialise categorical / replicated-softmax biases to log empirical frequencies.
  bool frequency_bias_init = false;
  /// Full-batch ascent on the exact gradient (tiny models only).
  bool exact_gradient = false;
  SampleOptions sampling;
  int threads = 1;

  /// Throws UsageError on an inconsistent configuration.
  void validate() const;
};

/// Fantasy particles for persistent CD, one per batch slot.
struct ChainState {
  std::vector<VisibleState> particles;
};

struct CdOptions {
  int steps = 1;
  bool mean_field_data = false;
  SampleOptions sampling;
  int threads = 1;
};

/// CD-k (or PCD-k when `chain` is given) estimate of the mean
/// log-likelihood gradient over `batch`.
Gradient cd_gradient(const std::vector<const VisibleState*>& batch, const ModelParams& params,
                     const VisibleSchema& schema, const CdOptions& options, Rng& rng, ChainState* chain = nullptr);

struct EpochLog {
  int epoch = 0;
  double recon_error = 0.0;
  std::optional<double> mean_group_norm;
  std::optional<double> intra_kl;
  std::optional<double> inter_kl;
  std::optional<double> exact_log_likelihood;
};

struct FitResult {
  ModelParams params;
  std::vector<EpochLog> log;
  bool diverged = false;
  std::string message;
};

ModelParams initialize_params(const std::vector<MixedRecord>& data, const VisibleSchema& schema,
                              const TrainConfig& config);

/// Stochastic gradient ascent on the log-likelihood minus alpha times the
/// group-sparsity penalty minus beta times (intra - inter) concept distance.
/// `labels` is required when beta > 0. Training starts from `initial` when given.
FitResult fit(const std::vector<MixedRecord>& data, const VisibleSchema& schema, const TrainConfig& config,
              const ConceptLabels* labels = nullptr, const ModelParams* initial = nullptr);

/// Mean reconstruction error over a dataset.
double mean_reconstruction_error(const std::vector<VisibleState>& data, const ModelParams& params,
                                 const VisibleSchema& schema);
/// Mean sparsity penalty of the posteriors over a dataset.
double mean_group_norm(const std::vector<VisibleState>& data, const ModelParams& params,
                       const VisibleSchema& schema, int groups);

struct ConceptDistances {
  double intra = 0.0;
  double inter = 0.0;
};

/// Mean symmetric KL over same-concept and different-concept pairs among
/// the first `limit` labelled records.
ConceptDistances concept_distances(const std::vector<VisibleState>& data, const ConceptLabels& labels,
                                   const ModelParams& params, const VisibleSchema& schema,
                                   std::size_t limit = 500);

/// Header and rows of the training log: epoch,recon_error,mean_group_norm,intra_kl,inter_kl
/// plus exact_log_likelihood in exact-gradient mode. Absent values are empty.
std::string log_header(bool with_exact);
std::string log_row(const EpochLog& row, bool with_exact);

}  // namespace mvrbm
