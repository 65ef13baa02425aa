#pragma once

#include <Eigen/Dense>

#include "mvrbm/schema.hpp"

namespace mvrbm {

/// Visible biases `a` (one per weight column), hidden biases `b` and the
/// column-by-hidden weight matrix `W`.
struct ModelParams {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::MatrixXd W;

  static ModelParams zeros(const VisibleSchema& schema, int hidden);

  int hidden_units() const { return static_cast<int>(b.size()); }
  int visible_columns() const { return static_cast<int>(a.size()); }
  bool all_finite() const;
  /// Throws SchemaError when shapes disagree with the schema.
  void check(const VisibleSchema& schema) const;

  friend bool operator==(const ModelParams& x, const ModelParams& y) {
    return x.a == y.a && x.b == y.b && x.W == y.W;
  }
};

/// Same shapes as ModelParams; holds a direction of ascent.
struct Gradient {
  Eigen::MatrixXd dW;
  Eigen::VectorXd da;
  Eigen::VectorXd db;

  static Gradient zeros_like(const ModelParams& params);

  Gradient& operator+=(const Gradient& other);
  Gradient& operator-=(const Gradient& other);
  Gradient& operator*=(double s);
  bool all_finite() const;
};

}  // namespace mvrbm
