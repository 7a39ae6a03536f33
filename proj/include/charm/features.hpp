#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace charm {

inline constexpr std::size_t kFeaturesPerChannel = 5;

/// Channel-major: for each channel c, (mean, variance, peak_to_peak, min, max).
/// Variance is the population variance.
using FeatureVector = std::vector<double>;

/// `window` is row-major [r, q].
FeatureVector handcrafted_features(std::span<const double> window, std::size_t q);

/// Column names in the same order, e.g. "acc_x.mean".
std::vector<std::string> feature_names(const std::vector<std::string>& channel_names);

}  // namespace charm
