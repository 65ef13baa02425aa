#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvrbm/model.hpp"

namespace mvrbm {

/// Central differences of `f` with respect to every entry of a, b and W.
Gradient finite_difference(const std::function<double(const ModelParams&)>& f, const ModelParams& params,
                           double eps = 1e-6);

/// ||x - y|| / max(||x||, ||y||) over all parameters (0 when both vanish).
double relative_error(const Gradient& x, const Gradient& y);

/// Random schema of 1..max_units units drawn from binary, categorical
/// (M <= 4) and replicated-softmax (2 <= V <= 3) types; with `allow_gaussian`
/// at most one Gaussian unit may be included.
VisibleSchema random_tiny_schema(Rng& rng, int max_units = 4, bool allow_gaussian = false);

/// Parameters with entries drawn from N(0, scale^2).
ModelParams random_params(const VisibleSchema& schema, int hidden, double scale, Rng& rng);

/// Uniformly random fully observed record (replicated-softmax blocks get
/// 1..max_tokens tokens; Gaussian values are standard normal).
MixedRecord random_record(const VisibleSchema& schema, Rng& rng, int max_tokens = 3);

struct GradCheck {
  std::string name;
  double relative_error = 0.0;
  double threshold = 0.0;
  bool passed() const { return relative_error <= threshold; }
};

/// Compares exact log-likelihood, sparsity and metric gradients of `params`
/// on `records` (at least 3, the first being the anchor of the metric
/// objective) against central differences.
std::vector<GradCheck> check_gradients(const ModelParams& params, const VisibleSchema& schema,
                                       const std::vector<MixedRecord>& records, int groups,
                                       double likelihood_threshold, double regularizer_threshold,
                                       double eps = 1e-6);

}  // namespace mvrbm
