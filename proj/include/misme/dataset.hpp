#pragma once

#include <span>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/tensor.hpp"

namespace misme::data {

// One training unit: a soil-patch pixel grid in [0,1], the raw (unnormalized)
// feature values aligned with the owning dataset's feature list, and the
// volumetric-water-content target.
struct Sample {
  nn::Tensor patch;                  // [H, W, 3], values in [0, 1]
  std::vector<double> features;      // raw values
  double target_vwc = 0.0;           // cm^3/cm^3, in (0, 1)
  std::string station_id;
  std::string timestamp;
  std::string patch_path;            // where the patch lives on disk, if anywhere

  void validate(std::size_t expected_features) const {
    if (features.size() != expected_features) {
      throw DimensionError("sample has " + std::to_string(features.size()) +
                           " features, dataset declares " + std::to_string(expected_features));
    }
    if (!(target_vwc > 0.0 && target_vwc < 1.0)) {
      throw ContractError("sample target_vwc " + std::to_string(target_vwc) + " outside (0, 1)");
    }
    for (double v : patch.values()) {
      if (v < 0.0 || v > 1.0) throw ContractError("sample patch pixel outside [0, 1]");
    }
  }
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Sample> samples;

  std::vector<const Sample*> view(std::span<const std::size_t> indices) const {
    std::vector<const Sample*> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(&samples.at(i));
    return out;
  }

  std::vector<const Sample*> view_all() const {
    std::vector<const Sample*> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(&s);
    return out;
  }
};

}  // namespace misme::data
