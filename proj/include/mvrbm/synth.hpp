#pragma once

#include <cstdint>

#include "mvrbm/dataset.hpp"

namespace mvrbm {

/// Planted-concept generator for mixed records. Each concept has a
/// prototype: Gaussian means, one preferred category per categorical unit
/// and a token distribution concentrated on its own slice of the vocabulary.
struct SyntheticSpec {
  int concepts = 5;
  int records_per_concept = 100;
  int gaussian_units = 4;
  /// Standard deviation of the prototype means around 0.
  double prototype_spread = 1.0;
  int categorical_units = 2;
  int categories = 5;
  int vocab = 20;
  int tokens = 8;
  /// Gaussian observation noise (standard deviation).
  double gaussian_noise = 0.5;
  /// Probability that a categorical value is replaced by a uniform draw.
  double categorical_noise = 0.2;
  /// Probability that a token is drawn uniformly from the whole vocabulary.
  double token_noise = 0.2;
  std::uint64_t seed = 1;

  /// Throws UsageError on an invalid spec.
  void validate() const;
};

VisibleSchema synthetic_schema(const SyntheticSpec& spec);

/// Records interleave the concepts (record i has concept i mod concepts),
/// so any prefix is close to balanced. Ids are 0..n-1.
Dataset synthesize(const SyntheticSpec& spec);

}  // namespace mvrbm
