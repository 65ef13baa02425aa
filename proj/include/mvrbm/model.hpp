#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mvrbm/params.hpp"
#include "mvrbm/record.hpp"
#include "mvrbm/schema.hpp"

namespace mvrbm {

using Rng = std::mt19937_64;

/// Energy of a joint configuration:
///   E = sum_gauss (v-a)^2 / (2 sigma^2) - sum_other a.v - D b.h - h.W^T x
/// where x is the weight-side feature (v/sigma for Gaussian units, counts
/// for count blocks) and D the bias scale. `h` must be a 0/1 vector.
/// Constrained-Poisson blocks contribute their count terms but define no
/// proper joint distribution.
double energy(const VisibleState& v, const Eigen::VectorXd& h, const ModelParams& params,
              const VisibleSchema& schema);
double energy(const MixedRecord& v, const Eigen::VectorXd& h, const ModelParams& params,
              const VisibleSchema& schema);

/// D*b + W^T x. Unobserved units contribute nothing.
Eigen::VectorXd hidden_preactivation(const VisibleState& v, const ModelParams& params,
                                     const VisibleSchema& schema);

/// P(h_j = 1 | v) for every hidden unit.
Eigen::VectorXd hidden_conditional(const VisibleState& v, const ModelParams& params,
                                   const VisibleSchema& schema);
Eigen::VectorXd hidden_conditional(const MixedRecord& v, const ModelParams& params,
                                   const VisibleSchema& schema);

/// Parameters of P(v_i | h) for one unit.
///   Binary              -> params = [P(v=1)]
///   Gaussian            -> params = [mean], `sigma` set
///   Categorical         -> params = category probabilities
///   ReplicatedSoftmax   -> params = per-token probabilities, `length` = D
///   ConstrainedPoisson  -> params = rates summing to `length` = N
struct UnitDistribution {
  UnitKind kind = UnitKind::Binary;
  Eigen::VectorXd params;
  double sigma = 1.0;
  double length = 0.0;
};

struct VisibleDistribution {
  std::vector<UnitDistribution> units;
};

/// Top-down conditional. `h` may be binary or a vector of posteriors
/// (mean-field). `lengths` supplies N / D per unit (see VisibleState).
VisibleDistribution visible_conditional(const Eigen::VectorXd& h, const ModelParams& params,
                                        const VisibleSchema& schema, const std::vector<double>& lengths);

Eigen::VectorXd sample_hidden(const Eigen::VectorXd& posteriors, Rng& rng);

struct SampleOptions {
  /// Add N(0, sigma^2) noise to Gaussian reconstructions instead of using the mean.
  bool gaussian_noise = false;
  /// Draw Poisson counts for constrained-Poisson blocks instead of the mean rates.
  bool poisson_counts = false;
};

VisibleState sample_visible(const VisibleDistribution& dist, const VisibleSchema& schema, Rng& rng,
                            const SampleOptions& options = {});

/// Expected value of every column under `dist` (the mean-field reconstruction).
VisibleState expected_visible(const VisibleDistribution& dist, const VisibleSchema& schema);

/// Bias scale implied by per-unit lengths (sum of replicated-softmax D, or 1).
double bias_scale_for(const VisibleSchema& schema, const std::vector<double>& lengths);

}  // namespace mvrbm
