#pragma once

// Compositional synthetic activity streams: each high-level class is a
// categorical grammar over low-level motifs, and each motif is a set of
// per-channel sinusoids. Per-user amplitude scaling and additive noise
// emulate inter-subject variation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "charm/dataset.hpp"
#include "charm/neurocore.hpp"

namespace charm {

/// offset + amplitude * sin(2*pi*frequency_hz*t/fs + phase)
struct Waveform {
    double amplitude = 0.0;
    double frequency_hz = 0.0;
    double phase = 0.0;
    double offset = 0.0;
};

struct MotifSpec {
    std::string name;
    std::vector<Waveform> channels;
    std::size_t min_duration = 16;
    std::size_t max_duration = 16;
};

struct ActivityGrammar {
    std::string name;
    std::vector<std::pair<std::string, double>> motifs;  // name, probability
    std::size_t target_length = 512;
};

struct UserProfile {
    std::string id;
    double amplitude_scale = 1.0;
    double noise_sigma = 0.0;
};

struct SynthConfig {
    double sample_rate_hz = 30.0;
    std::size_t channels = 6;
    std::vector<MotifSpec> motifs;
    std::vector<ActivityGrammar> grammars;
    std::vector<UserProfile> users;
    std::size_t samples_per_class_per_user = 20;
    std::uint64_t seed = 42;
    /// Null-labelled noise between activities inside a session file.
    std::size_t null_gap = 24;
    std::string low_track = "motif";
    std::string null_label = "null";
    /// Motif durations must be at least this long (the encoder window).
    std::size_t min_motif_duration = 16;

    void validate() const;
    const MotifSpec& motif(const std::string& name) const;
    std::vector<std::string> class_names() const;
};

/// 4 classes over 8 motifs with overlapping inventories, 4 users, 6 channels,
/// 512-sample activities, 20 activities per class and user, seed 42.
SynthConfig default_synth_config();

struct MotifSamples {
    std::vector<double> samples;  // [duration, q]
    std::string label;
};

MotifSamples gen_motif(const MotifSpec& spec, std::size_t duration, const UserProfile& user, double sample_rate_hz,
                       SeededRng& rng);

/// Motifs drawn i.i.d. from the grammar, concatenated and truncated to the
/// target length; the low-level track holds the generating motif names.
LabeledSegment gen_segment(const SynthConfig& config, std::size_t class_index, const UserProfile& user,
                           SeededRng& rng);

/// samples_per_class_per_user segments for every (user, class), ordered by
/// user, then class, then index. Each segment has its own derived seed.
std::vector<LabeledSegment> gen_dataset(const SynthConfig& config);

/// Schema that reads the files written by write_synth_dataset.
SchemaConfig synth_schema(const SynthConfig& config);

struct SynthSummary {
    std::size_t files = 0;
    std::size_t segments = 0;
    std::size_t users = 0;
    std::size_t classes = 0;
};

/// One CSV per (user, session); session k holds the k-th activity of every
/// class in a shuffled order separated by null gaps. Also writes
/// manifest.json (files, users, classes, counts, seed).
SynthSummary write_synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace charm
