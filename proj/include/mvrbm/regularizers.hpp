#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mvrbm/model.hpp"

namespace mvrbm {

/// Probabilities are clamped into [kProbabilityFloor, 1 - kProbabilityFloor]
/// before any logarithm or ratio.
inline constexpr double kProbabilityFloor = 1e-7;

/// Group norms below this are treated as zero; their gradient is 0.
inline constexpr double kGroupNormFloor = 1e-12;

/// l2 norm of each of the `groups` contiguous, equal-size blocks of posteriors.
Eigen::VectorXd group_norms(const Eigen::VectorXd& posteriors, int groups);

/// Mixed l1/l2 norm: sum over groups of the group l2 norm.
double sparsity_penalty(const Eigen::VectorXd& posteriors, int groups);

/// Gradient of sparsity_penalty(P(h|v)) with respect to b and W (da = 0).
Gradient sparsity_gradient(const VisibleState& v, const ModelParams& params, const VisibleSchema& schema,
                           int groups);

/// 1/2 (KL(p||q) + KL(q||p)) between factorized Bernoulli distributions.
double symmetric_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// d symmetric_kl(p, q) / d p, with the clamp treated as part of the function.
Eigen::VectorXd symmetric_kl_gradient(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

using StateRefs = std::vector<const VisibleState*>;

/// D_N(f) - D_Nbar(f): mean symmetric KL to same-concept records minus mean
/// symmetric KL to other-concept records, in posterior space. An empty set
/// contributes 0.
double metric_objective(const VisibleState& f, const StateRefs& neighbors, const StateRefs& non_neighbors,
                        const ModelParams& params, const VisibleSchema& schema);

/// Gradient of metric_objective with respect to b and W, accumulated over
/// both endpoints of every pair (da = 0).
Gradient metric_gradient(const VisibleState& f, const StateRefs& neighbors, const StateRefs& non_neighbors,
                         const ModelParams& params, const VisibleSchema& schema);

}  // namespace mvrbm
