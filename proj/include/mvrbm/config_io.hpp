#pragma once

#include <iosfwd>
#include <string>

#include "mvrbm/training.hpp"

namespace mvrbm {

/// Reads `key = value` lines into `config`; blank lines and lines starting
/// with '#' are ignored. Keys match the TrainConfig field names, with
/// lr_scale_<kind> for the per-type learning-rate scales and
/// gaussian_noise / poisson_counts for the sampling options. Booleans are
/// true/false. Unknown keys throw UsageError.
void read_config(std::istream& in, TrainConfig& config);
void load_config(const std::string& path, TrainConfig& config);

/// Writes every key; read_config of the output reproduces `config`.
void write_config(std::ostream& out, const TrainConfig& config);

}  // namespace mvrbm
