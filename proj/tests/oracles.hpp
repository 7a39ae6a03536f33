#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <span>
#include <vector>

namespace charm::oracle {

/// Central finite differences of f with respect to every entry of x.
inline std::vector<double> central_difference(std::span<double> x, const std::function<double()>& f, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f();
        x[i] = saved - h;
        const double down = f();
        x[i] = saved;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Denominator floor for relative gradient error; below it the comparison is
/// effectively absolute. Central differences at h = 1e-5 on an O(1) loss carry
/// roundoff of about 1e-11, so gradients much smaller than 1e-6 cannot be
/// resolved to 1e-4 relative.
inline constexpr double kGradientFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
}

inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i]));
    return worst;
}

/// Textbook Adam, one parameter, written out step by step.
struct ScalarAdam {
    double lr, beta1, beta2, eps;
    double m = 0.0, v = 0.0;
    int t = 0;

    /// Returns the update applied to the parameter.
    double step(double g) {
        ++t;
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double m_hat = m / (1.0 - std::pow(beta1, t));
        const double v_hat = v / (1.0 - std::pow(beta2, t));
        return -lr * m_hat / (std::sqrt(v_hat) + eps);
    }
};

/// Precision/recall/F1 of class i from a confusion matrix, by the definitions.
struct ClassScores {
    double precision, recall, f1;
};

inline ClassScores class_scores(const std::vector<std::vector<std::size_t>>& cm, std::size_t i) {
    double tp = static_cast<double>(cm[i][i]);
    double fp = 0.0, fn = 0.0;
    for (std::size_t j = 0; j < cm.size(); ++j) {
        if (j == i) continue;
        fp += static_cast<double>(cm[j][i]);
        fn += static_cast<double>(cm[i][j]);
    }
    const double p = tp + fp == 0.0 ? 0.0 : tp / (tp + fp);
    const double r = tp + fn == 0.0 ? 0.0 : tp / (tp + fn);
    const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    return {p, r, f};
}

/// Nearest-centroid classifier on normalised per-sequence label histograms.
/// Returns the accuracy on the test sequences.
inline double histogram_centroid_accuracy(const std::vector<std::vector<std::string>>& train_tracks,
                                          const std::vector<std::size_t>& train_labels,
                                          const std::vector<std::vector<std::string>>& test_tracks,
                                          const std::vector<std::size_t>& test_labels, std::size_t classes) {
    std::map<std::string, std::size_t> vocab;
    for (const auto* set : {&train_tracks, &test_tracks}) {
        for (const auto& t : *set) {
            for (const auto& s : t) vocab.emplace(s, 0);
        }
    }
    std::size_t next = 0;
    for (auto& [name, index] : vocab) index = next++;
    auto histogram = [&](const std::vector<std::string>& track) {
        std::vector<double> h(vocab.size(), 0.0);
        for (const auto& s : track) h[vocab.at(s)] += 1.0;
        for (double& v : h) v /= static_cast<double>(track.size());
        return h;
    };
    std::vector<std::vector<double>> centroid(classes, std::vector<double>(vocab.size(), 0.0));
    std::vector<double> count(classes, 0.0);
    for (std::size_t i = 0; i < train_tracks.size(); ++i) {
        const auto h = histogram(train_tracks[i]);
        for (std::size_t k = 0; k < h.size(); ++k) centroid[train_labels[i]][k] += h[k];
        count[train_labels[i]] += 1.0;
    }
    for (std::size_t c = 0; c < classes; ++c) {
        for (double& v : centroid[c]) v /= count[c];
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_tracks.size(); ++i) {
        const auto h = histogram(test_tracks[i]);
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
            double d = 0.0;
            for (std::size_t k = 0; k < h.size(); ++k) d += (h[k] - centroid[c][k]) * (h[k] - centroid[c][k]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        correct += best == test_labels[i];
    }
    return static_cast<double>(correct) / static_cast<double>(test_tracks.size());
}

}  // namespace charm::oracle
