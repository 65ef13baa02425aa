#include "mvrbm/params.hpp"

#include <string>

#include "mvrbm/errors.hpp"

namespace mvrbm {

ModelParams ModelParams::zeros(const VisibleSchema& schema, int hidden) {
  if (hidden < 1) throw UsageError("hidden unit count must be >= 1");
  const int c = schema.total_weight_columns();
  return {Eigen::VectorXd::Zero(c), Eigen::VectorXd::Zero(hidden), Eigen::MatrixXd::Zero(c, hidden)};
}

bool ModelParams::all_finite() const { return a.allFinite() && b.allFinite() && W.allFinite(); }

void ModelParams::check(const VisibleSchema& schema) const {
  const int c = schema.total_weight_columns();
  if (a.size() != c || W.rows() != c || W.cols() != b.size() || b.size() < 1)
    throw SchemaError("parameter shapes (a:" + std::to_string(a.size()) + ", b:" + std::to_string(b.size()) +
                      ", W:" + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) +
                      ") do not match schema with " + std::to_string(c) + " columns");
}

Gradient Gradient::zeros_like(const ModelParams& p) {
  return {Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols()), Eigen::VectorXd::Zero(p.a.size()),
          Eigen::VectorXd::Zero(p.b.size())};
}

Gradient& Gradient::operator+=(const Gradient& o) {
  dW += o.dW;
  da += o.da;
  db += o.db;
  return *this;
}

Gradient& Gradient::operator-=(const Gradient& o) {
  dW -= o.dW;
  da -= o.da;
  db -= o.db;
  return *this;
}

Gradient& Gradient::operator*=(double s) {
  dW *= s;
  da *= s;
  db *= s;
  return *this;
}

bool Gradient::all_finite() const { return dW.allFinite() && da.allFinite() && db.allFinite(); }

}  // namespace mvrbm
