#pragma once

// PCA of learned low-level embeddings, silhouette scoring and CSV export.

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "charm/dataset.hpp"
#include "charm/model.hpp"

namespace charm {

struct PcaModel {
    Eigen::RowVectorXd mean;               // [D]
    Eigen::MatrixXd components;            // [k, D], orthonormal rows
    Eigen::VectorXd explained_variance;    // [k], non-increasing
};

/// Top-k principal axes of the sample covariance (divisor N - 1). Each
/// component is signed so that its largest-magnitude entry is positive.
PcaModel pca_fit(const Eigen::MatrixXd& x, std::size_t k);
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);
Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& coords);

/// Mean silhouette with Euclidean distance. Points in singleton clusters
/// contribute 0; if every pairwise distance is 0 the score is 0.
double silhouette_score(const Eigen::MatrixXd& points, std::span<const std::string> labels);

struct LabeledWindows {
    std::vector<double> windows;  // [k, r, q] row-major
    std::vector<std::string> labels;
    std::vector<std::string> sources;
    std::size_t count() const noexcept { return labels.size(); }
};

/// Fraction of a window's samples that must share one low-level label.
inline constexpr double kWindowPurity = 0.9;

/// Non-overlapping r-sample windows from each segment whose `track` label is
/// at least `purity` pure and not `null_token`. With a non-empty `grouping`
/// the label is replaced by its group; labels missing from the grouping are
/// skipped. Samples are normalised with `stats` when provided.
LabeledWindows extract_label_pure_windows(std::span<const LabeledSegment> segments, const std::string& track,
                                          std::size_t r, const ChannelStats* stats,
                                          const std::map<std::string, std::string>& grouping = {},
                                          const std::string& null_token = "null", double purity = kWindowPurity);

/// "label group" per line; '#' starts a comment.
std::map<std::string, std::string> parse_grouping(const std::string& text);

struct EmbeddingPoint {
    std::vector<double> coords;
    std::string low_label;
    std::string source;
};

struct EmbeddingAnalysis {
    std::vector<EmbeddingPoint> points;  // 2-D PCA coordinates
    PcaModel pca;
    double silhouette = 0.0;
};

/// Low-level encoder -> PCA(2) -> silhouette on the window labels.
EmbeddingAnalysis analyse_embeddings(const CharmConfig& config, const ParameterSet& params,
                                     const LabeledWindows& windows, std::size_t dims = 2);

/// CSV with header "pc1,pc2,low_label,source"; fields containing ',' or '"'
/// are quoted RFC 4180 style. Coordinates are written at round-trip precision.
std::string format_embedding_csv(std::span<const EmbeddingPoint> points);
std::vector<EmbeddingPoint> parse_embedding_csv(const std::string& text);
void export_embedding(std::span<const EmbeddingPoint> points, const std::filesystem::path& path);

}  // namespace charm
