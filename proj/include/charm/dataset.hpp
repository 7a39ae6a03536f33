#pragma once

// Ingest of delimiter-separated sensor recordings, high-level label
// segmentation, fixed-length cropping and leave-one-subject-out splits.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace charm {

/// Time-ordered multi-channel samples, stored row-major [n, q].
class SensorStream {
  public:
    SensorStream() = default;
    SensorStream(std::size_t channels, double sample_rate_hz, std::vector<double> samples,
                 std::vector<std::string> channel_names = {});

    std::size_t size() const noexcept { return channels_ == 0 ? 0 : samples_.size() / channels_; }
    std::size_t channels() const noexcept { return channels_; }
    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    const std::vector<std::string>& channel_names() const noexcept { return channel_names_; }

    std::span<const double> row(std::size_t t) const {
        return std::span<const double>(samples_).subspan(t * channels_, channels_);
    }
    std::span<const double> samples() const noexcept { return samples_; }
    std::span<double> samples() noexcept { return samples_; }

    /// Rows [begin, begin + count).
    SensorStream slice(std::size_t begin, std::size_t count) const;

    bool operator==(const SensorStream&) const = default;

  private:
    std::size_t channels_ = 0;
    double sample_rate_hz_ = 0.0;
    std::vector<std::string> channel_names_;
    std::vector<double> samples_;
};

/// Ordered class names; the position of a name is its class index everywhere.
class ActivityLabelSet {
  public:
    ActivityLabelSet() = default;
    explicit ActivityLabelSet(std::vector<std::string> classes);

    std::size_t size() const noexcept { return classes_.size(); }
    const std::string& name(std::size_t i) const { return classes_.at(i); }
    const std::vector<std::string>& names() const noexcept { return classes_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

  private:
    std::vector<std::string> classes_;
};

using LabelTracks = std::map<std::string, std::vector<std::string>>;

struct LabeledSegment {
    SensorStream stream;
    std::size_t high_label = 0;
    std::string user_id;
    /// Per-sample low-level labels by track name. Never consumed by training.
    LabelTracks low_label_tracks;
    /// Human-readable origin, e.g. "S1-ADL1.dat@1200".
    std::string source;
    bool padded = false;
};

struct SchemaConfig {
    /// ' ' splits on any run of spaces/tabs; any other character splits exactly.
    char delimiter = ',';
    std::size_t header_rows = 0;
    std::vector<std::size_t> channel_columns;
    std::vector<std::string> channel_names;
    std::size_t high_label_column = 0;
    std::map<std::string, std::size_t> low_label_columns;
    /// Fixed user id for every file; empty = derive from the file name or manifest.
    std::string user_id;
    std::string null_label_token = "null";
    /// Optional raw token -> class name translation for high labels (e.g. "102" -> "coffee_time").
    std::map<std::string, std::string> label_map;
    /// Optional per-track raw token -> name translation for low-level labels.
    std::map<std::string, std::map<std::string, std::string>> low_label_maps;
    double sample_rate_hz = 30.0;

    /// Checks distinct, consistent column indices. Throws ErrorKind::Config.
    void validate() const;
    std::size_t required_width() const;
};

struct LoadStats {
    std::size_t rows_read = 0;
    std::size_t rows_malformed = 0;     // too few fields; skipped
    std::size_t values_interpolated = 0;
    std::size_t rows_dropped = 0;       // missing values with no short enough bridge
};

struct LoadedStream {
    SensorStream stream;
    std::vector<std::string> high_labels;
    LabelTracks low_labels;
    LoadStats stats;
};

/// Longest run of consecutive missing values in one channel that is still
/// bridged by linear interpolation.
inline constexpr std::size_t kMaxInterpolatedGap = 8;

LoadedStream load_stream(const std::filesystem::path& path, const SchemaConfig& schema);
LoadedStream parse_stream(std::istream& in, const SchemaConfig& schema);

struct SegmentationResult {
    std::vector<LabeledSegment> segments;
    std::size_t discarded_runs = 0;
    std::size_t discarded_samples = 0;
};

/// Splits the stream into maximal runs of one label. Runs labeled
/// `null_token` or with a name outside `labels` are discarded.
SegmentationResult segment_by_high_label(const SensorStream& stream, std::span<const std::string> high_labels,
                                         const ActivityLabelSet& labels, std::string_view null_token,
                                         const LabelTracks& low_tracks = {}, const std::string& user_id = {},
                                         const std::string& source = {});

/// True (drop) when more than one distinct non-null label occurs in the window.
bool reject_multilabel(std::span<const std::string> window_labels, std::string_view null_token);

/// Crops at offsets 0, stride, 2*stride, ... while offset + n_target <= n.
/// Shorter segments yield one sample left-padded by repeating sample 0.
std::vector<LabeledSegment> make_fixed_length_samples(const LabeledSegment& segment, std::size_t n_target,
                                                      std::size_t stride);

std::vector<LabeledSegment> make_fixed_length_samples(std::span<const LabeledSegment> segments,
                                                      std::size_t n_target, std::size_t stride);

struct LosoSplit {
    std::vector<LabeledSegment> train;
    std::vector<LabeledSegment> validation;
};

LosoSplit loso_split(std::span<const LabeledSegment> dataset, const std::string& held_out_user);

/// Distinct user ids in first-appearance order.
std::vector<std::string> users_in(std::span<const LabeledSegment> dataset);

struct DirectoryLoad {
    std::vector<LabeledSegment> segments;
    std::size_t files = 0;
    LoadStats totals;
    std::size_t discarded_runs = 0;
};

/// Loads every recording in `dir`. When `dir/manifest.json` exists it lists
/// the files and their users; otherwise every *.csv / *.dat / *.txt file is
/// read in name order and the user is `schema.user_id` or, if empty, the
/// file name up to its first '-' or '_'.
DirectoryLoad load_dataset_dir(const std::filesystem::path& dir, const SchemaConfig& schema,
                               const ActivityLabelSet& labels);

}  // namespace charm
