#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mvrbm/model.hpp"

namespace mvrbm {

/// Homogeneous representation of a record: hidden posteriors plus the
/// code obtained by thresholding them at rho1 (bit set iff p >= rho1).
struct LatentProfile {
  Eigen::VectorXd posteriors;
  std::vector<std::uint8_t> code;
};

std::vector<std::uint8_t> binarize(const Eigen::VectorXd& posteriors, double rho1);

LatentProfile project(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema,
                      double rho1 = 0.5);

struct Reconstruction {
  /// Mean-field reconstruction computed from the posteriors.
  VisibleState expected;
  /// Per unit: squared error (Binary, Gaussian), misclassification
  /// indicator (Categorical) or total variation between count proportions
  /// (count blocks). Unobserved units get 0 and are excluded from `error`.
  std::vector<double> unit_errors;
  double error = 0.0;
};

Reconstruction reconstruct(const VisibleState& v, const ModelParams& params, const VisibleSchema& schema);
Reconstruction reconstruct(const MixedRecord& v, const ModelParams& params, const VisibleSchema& schema);

struct PredictionEntry {
  int token = 0;
  /// Probability renormalized over the candidate set.
  double probability = 0.0;
  /// Probability normalized over the unit's full vocabulary.
  double vocabulary_probability = 0.0;
};

/// Candidates in descending probability, ties by ascending token id.
struct PredictionRanking {
  std::vector<PredictionEntry> entries;
};

/// Mean-field prediction of one more value of a categorical or
/// replicated-softmax unit: softmax over candidates of
/// a_j + sum_k W_jk P(h_k = 1 | observed). The observed record may leave
/// units unobserved.
PredictionRanking predict_unseen(const MixedRecord& observed, const ModelParams& params,
                                 const VisibleSchema& schema, std::size_t unit,
                                 const std::vector<int>& candidates);

/// All token ids of `unit`, for use as a candidate set.
std::vector<int> full_vocabulary(const VisibleSchema& schema, std::size_t unit);

}  // namespace mvrbm
