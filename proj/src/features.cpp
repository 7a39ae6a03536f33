#include "charm/features.hpp"

#include <algorithm>

#include "charm/error.hpp"

namespace charm {

FeatureVector handcrafted_features(std::span<const double> window, std::size_t q) {
    require(q > 0, ErrorKind::Argument, "features: channel count must be positive");
    require(!window.empty(), ErrorKind::Argument, "features: empty window");
    require(window.size() % q == 0, ErrorKind::Shape, "features: window is not a whole number of rows");
    const std::size_t r = window.size() / q;
    FeatureVector out;
    out.reserve(kFeaturesPerChannel * q);
    for (std::size_t c = 0; c < q; ++c) {
        double sum = 0.0;
        double lo = window[c];
        double hi = window[c];
        for (std::size_t t = 0; t < r; ++t) {
            const double v = window[t * q + c];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / static_cast<double>(r);
        double sq = 0.0;
        for (std::size_t t = 0; t < r; ++t) {
            const double d = window[t * q + c] - mean;
            sq += d * d;
        }
        out.push_back(mean);
        out.push_back(sq / static_cast<double>(r));
        out.push_back(hi - lo);
        out.push_back(lo);
        out.push_back(hi);
    }
    return out;
}

std::vector<std::string> feature_names(const std::vector<std::string>& channel_names) {
    static constexpr const char* kSuffix[kFeaturesPerChannel] = {"mean", "variance", "peak_to_peak", "min", "max"};
    std::vector<std::string> names;
    for (const auto& ch : channel_names) {
        for (const char* s : kSuffix) names.push_back(ch + "." + s);
    }
    return names;
}

}  // namespace charm
