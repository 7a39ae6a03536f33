#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "charm/dataset.hpp"

namespace charm {

/// Lower bound applied to fitted standard deviations.
inline constexpr double kStdFloor = 1e-8;

/// Per-channel standardisation statistics (population standard deviation).
struct ChannelStats {
    std::vector<double> means;
    std::vector<double> stds;

    std::size_t channels() const noexcept { return means.size(); }
    bool operator==(const ChannelStats&) const = default;
};

/// Pools every sample of every segment. Fit on the training split only.
ChannelStats fit_normalizer(std::span<const LabeledSegment> train);
ChannelStats fit_normalizer(std::span<const SensorStream> streams);

SensorStream normalize(const SensorStream& stream, const ChannelStats& stats);

/// Non-overlapping windows of r consecutive samples; shape [z, r, q].
struct WindowedSequence {
    std::size_t z = 0;
    std::size_t r = 0;
    std::size_t q = 0;
    std::vector<double> windows;

    std::span<const double> window_at(std::size_t t) const {
        return std::span<const double>(windows).subspan(t * r * q, r * q);
    }
};

/// z = floor(n / r); the trailing n mod r samples are dropped.
WindowedSequence window(std::span<const double> samples, std::size_t q, std::size_t r);
WindowedSequence window(const SensorStream& stream, std::size_t r);

}  // namespace charm
