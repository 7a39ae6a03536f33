#include "charm/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "charm/error.hpp"

namespace charm {

ChannelStats fit_normalizer(std::span<const SensorStream> streams) {
    require(!streams.empty(), ErrorKind::Data, "fit_normalizer: no training samples");
    const std::size_t q = streams.front().channels();
    std::vector<double> sum(q, 0.0);
    std::size_t count = 0;
    for (const auto& s : streams) {
        require(s.channels() == q, ErrorKind::Shape, "fit_normalizer: streams differ in channel count");
        for (std::size_t t = 0; t < s.size(); ++t) {
            auto row = s.row(t);
            for (std::size_t c = 0; c < q; ++c) sum[c] += row[c];
        }
        count += s.size();
    }
    require(count > 0, ErrorKind::Data, "fit_normalizer: no training samples");
    ChannelStats stats;
    stats.means.resize(q);
    for (std::size_t c = 0; c < q; ++c) stats.means[c] = sum[c] / static_cast<double>(count);
    // Second pass on centred values.
    std::vector<double> sq(q, 0.0);
    for (const auto& s : streams) {
        for (std::size_t t = 0; t < s.size(); ++t) {
            auto row = s.row(t);
            for (std::size_t c = 0; c < q; ++c) {
                const double d = row[c] - stats.means[c];
                sq[c] += d * d;
            }
        }
    }
    stats.stds.resize(q);
    for (std::size_t c = 0; c < q; ++c) {
        stats.stds[c] = std::max(std::sqrt(sq[c] / static_cast<double>(count)), kStdFloor);
    }
    return stats;
}

ChannelStats fit_normalizer(std::span<const LabeledSegment> train) {
    std::vector<SensorStream> streams;
    streams.reserve(train.size());
    for (const auto& s : train) streams.push_back(s.stream);
    return fit_normalizer(std::span<const SensorStream>(streams));
}

SensorStream normalize(const SensorStream& stream, const ChannelStats& stats) {
    const std::size_t q = stream.channels();
    require(stats.means.size() == q && stats.stds.size() == q, ErrorKind::Shape,
            "normalize: stream has " + std::to_string(q) + " channels, statistics have " +
                std::to_string(stats.means.size()));
    std::vector<double> out(stream.samples().begin(), stream.samples().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t c = i % q;
        out[i] = (out[i] - stats.means[c]) / stats.stds[c];
    }
    return SensorStream(q, stream.sample_rate_hz(), std::move(out), stream.channel_names());
}

WindowedSequence window(std::span<const double> samples, std::size_t q, std::size_t r) {
    require(q > 0 && r > 0, ErrorKind::Argument, "window: q and r must be positive");
    require(samples.size() % q == 0, ErrorKind::Shape, "window: sample buffer is not a whole number of rows");
    const std::size_t n = samples.size() / q;
    require(n >= r, ErrorKind::Shape,
            "window: sequence of " + std::to_string(n) + " samples is shorter than window " + std::to_string(r));
    WindowedSequence w;
    w.z = n / r;
    w.r = r;
    w.q = q;
    // Rows are contiguous, so window t is simply the next r*q values.
    w.windows.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(w.z * r * q));
    return w;
}

WindowedSequence window(const SensorStream& stream, std::size_t r) {
    return window(stream.samples(), stream.channels(), r);
}

}  // namespace charm
