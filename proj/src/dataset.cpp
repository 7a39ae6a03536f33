#include "charm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "charm/error.hpp"

namespace charm {

namespace fs = std::filesystem;

SensorStream::SensorStream(std::size_t channels, double sample_rate_hz, std::vector<double> samples,
                           std::vector<std::string> channel_names)
    : channels_(channels), sample_rate_hz_(sample_rate_hz), channel_names_(std::move(channel_names)),
      samples_(std::move(samples)) {
    require(channels_ > 0, ErrorKind::Data, "sensor stream needs at least one channel");
    require(sample_rate_hz_ > 0.0, ErrorKind::Data, "sensor stream sample rate must be positive");
    require(!samples_.empty() && samples_.size() % channels_ == 0, ErrorKind::Data,
            "sensor stream sample buffer must hold n >= 1 rows of " + std::to_string(channels_) + " channels");
    if (channel_names_.empty()) {
        for (std::size_t i = 0; i < channels_; ++i) channel_names_.push_back("ch" + std::to_string(i));
    }
    require(channel_names_.size() == channels_, ErrorKind::Data, "channel name count differs from channel count");
}

SensorStream SensorStream::slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= size() && count > 0, ErrorKind::Argument, "sensor stream slice out of range");
    auto first = samples_.begin() + static_cast<std::ptrdiff_t>(begin * channels_);
    return SensorStream(channels_, sample_rate_hz_,
                        std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * channels_)),
                        channel_names_);
}

ActivityLabelSet::ActivityLabelSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
    require(classes_.size() >= 2, ErrorKind::Config, "activity label set needs at least two classes");
    std::set<std::string> seen;
    for (const auto& c : classes_) {
        require(!c.empty(), ErrorKind::Config, "empty activity class name");
        require(seen.insert(c).second, ErrorKind::Config, "duplicate activity class name '" + c + "'");
    }
}

std::optional<std::size_t> ActivityLabelSet::index_of(std::string_view name) const {
    auto it = std::find(classes_.begin(), classes_.end(), name);
    if (it == classes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes_.begin());
}

void SchemaConfig::validate() const {
    require(!channel_columns.empty(), ErrorKind::Config, "schema: channel_columns is empty");
    require(channel_names.empty() || channel_names.size() == channel_columns.size(), ErrorKind::Config,
            "schema: channel_names must match channel_columns in length");
    require(sample_rate_hz > 0.0, ErrorKind::Config, "schema: sample_rate_hz must be positive");
    require(delimiter != '\n' && delimiter != '\r', ErrorKind::Config, "schema: invalid delimiter");
    std::set<std::size_t> used;
    auto claim = [&](std::size_t col, const std::string& what) {
        require(used.insert(col).second, ErrorKind::Config,
                "schema: column " + std::to_string(col) + " used twice (" + what + ")");
    };
    for (std::size_t c : channel_columns) claim(c, "channel");
    claim(high_label_column, "high_label_column");
    for (const auto& [name, col] : low_label_columns) claim(col, "low label track '" + name + "'");
    for (const auto& [track, _] : low_label_maps) {
        require(low_label_columns.count(track) != 0, ErrorKind::Config,
                "schema: low_label_maps names unknown track '" + track + "'");
    }
}

std::size_t SchemaConfig::required_width() const {
    std::size_t widest = high_label_column;
    for (std::size_t c : channel_columns) widest = std::max(widest, c);
    for (const auto& [_, c] : low_label_columns) widest = std::max(widest, c);
    return widest + 1;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    if (delimiter == ' ') {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
            if (i == line.size()) break;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
            out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(delimiter, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool is_missing_token(std::string_view tok) {
    return tok.empty() || tok == "NaN" || tok == "nan" || tok == "NAN" || tok == "NA" || tok == "?";
}

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string translate(const std::map<std::string, std::string>& map, std::string_view raw) {
    if (auto it = map.find(std::string(raw)); it != map.end()) return it->second;
    return std::string(raw);
}

}  // namespace

LoadedStream parse_stream(std::istream& in, const SchemaConfig& schema) {
    schema.validate();
    const std::size_t q = schema.channel_columns.size();
    const std::size_t width = schema.required_width();

    LoadedStream result;
    std::vector<double> values;  // row-major, NaN = missing
    std::vector<std::size_t> line_of_row;
    std::vector<std::string> high;
    LabelTracks low;
    for (const auto& [name, _] : schema.low_label_columns) low[name];

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= schema.header_rows) continue;
        if (trim(line).empty()) continue;
        ++result.stats.rows_read;
        const auto fields = split_fields(line, schema.delimiter);
        if (fields.size() < width) {
            ++result.stats.rows_malformed;
            continue;
        }
        for (std::size_t c = 0; c < q; ++c) {
            const std::string_view tok = fields[schema.channel_columns[c]];
            double v = kMissing;
            if (!is_missing_token(tok)) {
                auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                    throw ParseError(line_no, "channel " + std::to_string(c) + ": cannot parse '" +
                                                  std::string(tok) + "' as a number");
                }
                if (!std::isfinite(v)) v = kMissing;
            }
            values.push_back(v);
        }
        std::string hl = std::string(fields[schema.high_label_column]);
        high.push_back(hl == schema.null_label_token ? hl : translate(schema.label_map, hl));
        for (const auto& [name, col] : schema.low_label_columns) {
            std::string raw(fields[col]);
            auto map_it = schema.low_label_maps.find(name);
            low[name].push_back(map_it == schema.low_label_maps.end() ? raw : translate(map_it->second, raw));
        }
        line_of_row.push_back(line_no);
    }

    const std::size_t n = high.size();
    std::vector<bool> keep(n, true);
    for (std::size_t c = 0; c < q; ++c) {
        std::size_t t = 0;
        while (t < n) {
            if (!std::isnan(values[t * q + c])) {
                ++t;
                continue;
            }
            std::size_t end = t;
            while (end < n && std::isnan(values[end * q + c])) ++end;
            const std::size_t gap = end - t;
            if (t > 0 && end < n && gap <= kMaxInterpolatedGap) {
                const double left = values[(t - 1) * q + c];
                const double right = values[end * q + c];
                const double span = static_cast<double>(gap + 1);
                for (std::size_t k = t; k < end; ++k) {
                    const double frac = static_cast<double>(k - t + 1) / span;
                    values[k * q + c] = left + (right - left) * frac;
                    ++result.stats.values_interpolated;
                }
            } else {
                for (std::size_t k = t; k < end; ++k) keep[k] = false;
            }
            t = end;
        }
    }

    std::vector<double> kept_values;
    kept_values.reserve(values.size());
    for (std::size_t t = 0; t < n; ++t) {
        if (!keep[t]) {
            ++result.stats.rows_dropped;
            continue;
        }
        kept_values.insert(kept_values.end(), values.begin() + static_cast<std::ptrdiff_t>(t * q),
                           values.begin() + static_cast<std::ptrdiff_t>((t + 1) * q));
        result.high_labels.push_back(std::move(high[t]));
        for (auto& [name, track] : low) result.low_labels[name].push_back(std::move(track[t]));
    }
    require(!result.high_labels.empty(), ErrorKind::Data, "no usable rows in input");
    result.stream = SensorStream(q, schema.sample_rate_hz, std::move(kept_values), schema.channel_names);
    return result;
}

LoadedStream load_stream(const fs::path& path, const SchemaConfig& schema) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "'");
    try {
        return parse_stream(in, schema);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.filename().string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(e.kind(), path.filename().string() + ": " + e.what());
    }
}

SegmentationResult segment_by_high_label(const SensorStream& stream, std::span<const std::string> high_labels,
                                         const ActivityLabelSet& labels, std::string_view null_token,
                                         const LabelTracks& low_tracks, const std::string& user_id,
                                         const std::string& source) {
    require(high_labels.size() == stream.size(), ErrorKind::Data,
            "label sequence length " + std::to_string(high_labels.size()) + " differs from stream length " +
                std::to_string(stream.size()));
    for (const auto& [name, track] : low_tracks) {
        require(track.size() == stream.size(), ErrorKind::Data, "low label track '" + name + "' length mismatch");
    }
    SegmentationResult out;
    std::size_t start = 0;
    while (start < high_labels.size()) {
        std::size_t end = start + 1;
        while (end < high_labels.size() && high_labels[end] == high_labels[start]) ++end;
        const std::string& name = high_labels[start];
        const auto cls = name == null_token ? std::nullopt : labels.index_of(name);
        if (!cls) {
            ++out.discarded_runs;
            out.discarded_samples += end - start;
        } else {
            LabeledSegment seg;
            seg.stream = stream.slice(start, end - start);
            seg.high_label = *cls;
            seg.user_id = user_id;
            for (const auto& [track_name, track] : low_tracks) {
                seg.low_label_tracks[track_name].assign(track.begin() + static_cast<std::ptrdiff_t>(start),
                                                        track.begin() + static_cast<std::ptrdiff_t>(end));
            }
            seg.source = source + "@" + std::to_string(start);
            out.segments.push_back(std::move(seg));
        }
        start = end;
    }
    return out;
}

bool reject_multilabel(std::span<const std::string> window_labels, std::string_view null_token) {
    const std::string* first = nullptr;
    for (const auto& l : window_labels) {
        if (l == null_token) continue;
        if (!first) {
            first = &l;
        } else if (l != *first) {
            return true;
        }
    }
    return false;
}

std::vector<LabeledSegment> make_fixed_length_samples(const LabeledSegment& segment, std::size_t n_target,
                                                      std::size_t stride) {
    require(n_target >= 1 && stride >= 1, ErrorKind::Argument, "n_target and stride must be at least 1");
    const std::size_t n = segment.stream.size();
    std::vector<LabeledSegment> out;
    if (n < n_target) {
        const std::size_t q = segment.stream.channels();
        const std::size_t pad = n_target - n;
        std::vector<double> values;
        values.reserve(n_target * q);
        auto first_row = segment.stream.row(0);
        for (std::size_t i = 0; i < pad; ++i) values.insert(values.end(), first_row.begin(), first_row.end());
        auto all = segment.stream.samples();
        values.insert(values.end(), all.begin(), all.end());
        LabeledSegment s;
        s.stream = SensorStream(q, segment.stream.sample_rate_hz(), std::move(values), segment.stream.channel_names());
        s.high_label = segment.high_label;
        s.user_id = segment.user_id;
        for (const auto& [name, track] : segment.low_label_tracks) {
            auto& t = s.low_label_tracks[name];
            t.assign(pad, track.front());
            t.insert(t.end(), track.begin(), track.end());
        }
        s.source = segment.source + "+pad" + std::to_string(pad);
        s.padded = true;
        out.push_back(std::move(s));
        return out;
    }
    for (std::size_t offset = 0; offset + n_target <= n; offset += stride) {
        LabeledSegment s;
        s.stream = segment.stream.slice(offset, n_target);
        s.high_label = segment.high_label;
        s.user_id = segment.user_id;
        for (const auto& [name, track] : segment.low_label_tracks) {
            s.low_label_tracks[name].assign(track.begin() + static_cast<std::ptrdiff_t>(offset),
                                            track.begin() + static_cast<std::ptrdiff_t>(offset + n_target));
        }
        s.source = segment.source + "+" + std::to_string(offset);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSegment> make_fixed_length_samples(std::span<const LabeledSegment> segments,
                                                      std::size_t n_target, std::size_t stride) {
    std::vector<LabeledSegment> out;
    for (const auto& seg : segments) {
        auto crops = make_fixed_length_samples(seg, n_target, stride);
        std::move(crops.begin(), crops.end(), std::back_inserter(out));
    }
    return out;
}

std::vector<std::string> users_in(std::span<const LabeledSegment> dataset) {
    std::vector<std::string> users;
    for (const auto& s : dataset) {
        if (std::find(users.begin(), users.end(), s.user_id) == users.end()) users.push_back(s.user_id);
    }
    return users;
}

LosoSplit loso_split(std::span<const LabeledSegment> dataset, const std::string& held_out_user) {
    const auto users = users_in(dataset);
    if (std::find(users.begin(), users.end(), held_out_user) == users.end()) {
        std::string list;
        for (const auto& u : users) list += (list.empty() ? "" : ", ") + u;
        fail(ErrorKind::Data, "unknown user '" + held_out_user + "'; available users: " + list);
    }
    LosoSplit split;
    for (const auto& s : dataset) (s.user_id == held_out_user ? split.validation : split.train).push_back(s);
    require(!split.train.empty(), ErrorKind::Data,
            "holding out user '" + held_out_user + "' leaves no training data");
    return split;
}

namespace {

std::string user_from_filename(const fs::path& p) {
    const std::string stem = p.stem().string();
    const std::size_t cut = stem.find_first_of("-_");
    return cut == std::string::npos ? stem : stem.substr(0, cut);
}

}  // namespace

DirectoryLoad load_dataset_dir(const fs::path& dir, const SchemaConfig& schema, const ActivityLabelSet& labels) {
    require(fs::is_directory(dir), ErrorKind::Data, "data directory '" + dir.string() + "' does not exist");
    std::vector<std::pair<fs::path, std::string>> files;
    const fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + manifest.string() + "'");
        nlohmann::json j;
        try {
            in >> j;
            for (const auto& f : j.at("files")) {
                files.emplace_back(dir / f.at("path").get<std::string>(), f.at("user").get<std::string>());
            }
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::Data, "malformed manifest '" + manifest.string() + "': " + e.what());
        }
    } else {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".csv" || ext == ".dat" || ext == ".txt")) {
                files.emplace_back(entry.path(),
                                   schema.user_id.empty() ? user_from_filename(entry.path()) : schema.user_id);
            }
        }
        std::sort(files.begin(), files.end());
    }
    require(!files.empty(), ErrorKind::Data, "no recordings found in '" + dir.string() + "'");

    DirectoryLoad out;
    for (const auto& [path, user] : files) {
        LoadedStream loaded = load_stream(path, schema);
        out.totals.rows_read += loaded.stats.rows_read;
        out.totals.rows_malformed += loaded.stats.rows_malformed;
        out.totals.values_interpolated += loaded.stats.values_interpolated;
        out.totals.rows_dropped += loaded.stats.rows_dropped;
        auto seg = segment_by_high_label(loaded.stream, loaded.high_labels, labels, schema.null_label_token,
                                         loaded.low_labels, user, path.filename().string());
        out.discarded_runs += seg.discarded_runs;
        std::move(seg.segments.begin(), seg.segments.end(), std::back_inserter(out.segments));
        ++out.files;
    }
    return out;
}

}  // namespace charm
