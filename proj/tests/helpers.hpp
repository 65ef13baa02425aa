#pragma once

#include <cmath>
#include <vector>

#include "mvrbm/model.hpp"

namespace testing {

using namespace mvrbm;

inline VisibleSchema binary_schema(int n) {
  std::vector<UnitSpec> units;
  for (int i = 0; i < n; ++i) units.push_back({"b" + std::to_string(i), UnitType::binary()});
  return VisibleSchema(units);
}

inline MixedRecord binary_record(const std::vector<int>& bits) {
  MixedRecord r;
  for (int b : bits) r.values.emplace_back(BinaryValue{b});
  return r;
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Independent logistic, written out without the library helpers.
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace testing
