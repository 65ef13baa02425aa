#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mvrbm/errors.hpp"
#include "mvrbm/model.hpp"

namespace mvrbm::oracle {

/// Thrown when a model is outside what exact enumeration supports.
class Refusal : public UsageError {
 public:
  explicit Refusal(const std::string& why) : UsageError("oracle refused: " + why) {}
};

struct TinyModelBound {
  int max_hidden = 12;
  /// Bound on hidden configurations times visible configurations (grid
  /// points included) for the brute-force enumerators.
  double max_configurations = 1 << 20;
  int max_replication = 6;
  int max_replicated_vocab = 6;
};

/// Per-unit lengths (D for replicated-softmax blocks) fixing the visible
/// space; other entries are ignored. Same layout as VisibleState::lengths.
using Lengths = std::vector<double>;

Lengths lengths_of(const MixedRecord& record, const VisibleSchema& schema);

/// log Z by summing, over all 2^K hidden configurations, the product of
/// per-unit closed-form visible sums and Gaussian integrals.
double exact_log_partition(const ModelParams& params, const VisibleSchema& schema, const Lengths& lengths = {},
                           const TinyModelBound& bound = {});

/// log P(v). For replicated-softmax blocks this is the probability of the
/// observed count vector (multiset), including the multinomial coefficient;
/// Gaussian units contribute a density.
double exact_log_likelihood(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                            const TinyModelBound& bound = {});

/// d log P(v) / d params, as data minus model expectations.
Gradient exact_gradient(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                        const TinyModelBound& bound = {});

/// Mean of exact_log_likelihood / exact_gradient over a dataset.
double exact_mean_log_likelihood(const std::vector<MixedRecord>& data, const ModelParams& params,
                                 const VisibleSchema& schema, const TinyModelBound& bound = {});
Gradient exact_mean_gradient(const std::vector<MixedRecord>& data, const ModelParams& params,
                             const VisibleSchema& schema, const TinyModelBound& bound = {});

struct HybridObjectives {
  double generative = 0.0;      // mean log P(v_notS)
  double discriminative = 0.0;  // mean log P(v_S | v_notS)
  double hybrid = 0.0;          // mix * generative + (1 - mix) * discriminative
};

/// Generative, discriminative and hybrid objectives with the empirical
/// distribution of `data`; `target_unit` (binary or categorical) is the
/// unseen variable. `hybrid_weight` must lie in [0, 1].
HybridObjectives hybrid_objectives(const std::vector<MixedRecord>& data, const ModelParams& params,
                                   const VisibleSchema& schema, std::size_t target_unit, double hybrid_weight,
                                   const TinyModelBound& bound = {});

// --- Brute-force enumeration from the energy function alone -------------

/// One point of the visible space with the log of its base measure:
/// multinomial coefficients for replicated-softmax blocks, trapezoid
/// weights for Gaussian grid points.
struct VisiblePoint {
  VisibleState state;
  double log_weight = 0.0;
};

/// Trapezoid grid for Gaussian units. The integrands are Gaussian, for
/// which the trapezoid rule converges faster than any power of the step.
struct GaussianGrid {
  double half_width = 30.0;  // in units of sigma, centred on the visible bias
  double step = 0.1;         // in units of sigma
};

/// All visible configurations for the given lengths. Gaussian units are
/// discretised on `grid`; constrained-Poisson blocks are refused.
std::vector<VisiblePoint> enumerate_visible(const ModelParams& params, const VisibleSchema& schema,
                                            const Lengths& lengths, const GaussianGrid& grid = {},
                                            const TinyModelBound& bound = {});

/// All 2^K binary hidden vectors in counting order.
std::vector<Eigen::VectorXd> enumerate_hidden(int hidden, const TinyModelBound& bound = {});

/// log sum_{v,h} w(v) exp(-E(v,h)) by nested loops over energy().
double enumerated_log_partition(const ModelParams& params, const VisibleSchema& schema, const Lengths& lengths,
                                const GaussianGrid& grid = {}, const TinyModelBound& bound = {});

/// P(h_j = 1 | v) from Boltzmann weights of all 2^K hidden states.
Eigen::VectorXd enumerated_hidden_conditional(const VisibleState& v, const ModelParams& params,
                                              const VisibleSchema& schema, const TinyModelBound& bound = {});

/// E[v | h] per weight column from Boltzmann weights over the visible space.
Eigen::VectorXd enumerated_visible_mean(const Eigen::VectorXd& h, const ModelParams& params,
                                        const VisibleSchema& schema, const Lengths& lengths,
                                        const GaussianGrid& grid = {}, const TinyModelBound& bound = {});

/// P(v_unit = s | rest of v) for every value s of a binary or categorical
/// unit, by enumerating hidden states; the record's value at `unit` is ignored.
Eigen::VectorXd enumerated_unit_conditional(const MixedRecord& v, const ModelParams& params,
                                            const VisibleSchema& schema, std::size_t unit,
                                            const TinyModelBound& bound = {});

/// P(next token = t | v) for a replicated-softmax unit: the token is added
/// to the record's multiset (so D grows by one) and hidden states are
/// enumerated.
Eigen::VectorXd enumerated_next_token_conditional(const MixedRecord& v, const ModelParams& params,
                                                  const VisibleSchema& schema, std::size_t unit,
                                                  const TinyModelBound& bound = {});

}  // namespace mvrbm::oracle
