#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace mvrbm {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) return -INFINITY;
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

inline Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

/// Clamps a probability into [eps, 1 - eps].
inline double clamp_probability(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

}  // namespace mvrbm
