#include "charm/synth.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "charm/error.hpp"
#include "charm/io.hpp"

namespace charm {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
    require(sample_rate_hz > 0.0, ErrorKind::Config, "synth: sample_rate_hz must be positive");
    require(channels > 0, ErrorKind::Config, "synth: channels must be positive");
    require(grammars.size() >= 2, ErrorKind::Config, "synth: at least two classes are required");
    require(users.size() >= 2, ErrorKind::Config, "synth: at least two users are required");
    require(samples_per_class_per_user >= 1, ErrorKind::Config, "synth: samples_per_class_per_user must be >= 1");
    require(!low_track.empty(), ErrorKind::Config, "synth: low_track must be named");
    std::set<std::string> names;
    for (const auto& m : motifs) {
        require(!m.name.empty() && names.insert(m.name).second, ErrorKind::Config,
                "synth: motif names must be unique and non-empty");
        require(m.name != null_label, ErrorKind::Config, "synth: motif may not use the null label");
        require(m.channels.size() == channels, ErrorKind::Config,
                "synth: motif '" + m.name + "' must define " + std::to_string(channels) + " channel waveforms");
        require(m.min_duration >= min_motif_duration && m.min_duration <= m.max_duration, ErrorKind::Config,
                "synth: motif '" + m.name + "' duration range must satisfy " + std::to_string(min_motif_duration) +
                    " <= min <= max");
        for (const auto& w : m.channels) {
            require(std::isfinite(w.amplitude) && std::isfinite(w.frequency_hz) && std::isfinite(w.phase) &&
                        std::isfinite(w.offset),
                    ErrorKind::Config, "synth: motif '" + m.name + "' has non-finite waveform parameters");
        }
    }
    std::set<std::string> classes;
    for (const auto& g : grammars) {
        require(!g.name.empty() && classes.insert(g.name).second, ErrorKind::Config,
                "synth: class names must be unique and non-empty");
        require(g.name != null_label, ErrorKind::Config, "synth: class may not use the null label");
        require(!g.motifs.empty(), ErrorKind::Config, "synth: grammar '" + g.name + "' has no motifs");
        require(g.target_length >= 1, ErrorKind::Config, "synth: grammar '" + g.name + "' target_length must be >= 1");
        double total = 0.0;
        for (const auto& [name, p] : g.motifs) {
            require(names.count(name) != 0, ErrorKind::Config,
                    "synth: grammar '" + g.name + "' references unknown motif '" + name + "'");
            require(p >= 0.0, ErrorKind::Config, "synth: grammar '" + g.name + "' has a negative probability");
            total += p;
        }
        require(std::abs(total - 1.0) < 1e-9, ErrorKind::Config,
                "synth: grammar '" + g.name + "' probabilities must sum to 1");
    }
    std::set<std::string> ids;
    for (const auto& u : users) {
        require(!u.id.empty() && ids.insert(u.id).second, ErrorKind::Config, "synth: user ids must be unique");
        require(u.amplitude_scale > 0.0 && u.noise_sigma >= 0.0, ErrorKind::Config,
                "synth: user '" + u.id + "' needs amplitude_scale > 0 and noise_sigma >= 0");
    }
}

const MotifSpec& SynthConfig::motif(const std::string& name) const {
    for (const auto& m : motifs) {
        if (m.name == name) return m;
    }
    fail(ErrorKind::Config, "synth: unknown motif '" + name + "'");
}

std::vector<std::string> SynthConfig::class_names() const {
    std::vector<std::string> out;
    for (const auto& g : grammars) out.push_back(g.name);
    return out;
}

SynthConfig default_synth_config() {
    SynthConfig c;
    c.sample_rate_hz = 30.0;
    c.channels = 6;
    constexpr double pi = std::numbers::pi;

    // Each motif drives two channels at its own frequency, in quadrature,
    // with a weak background tone elsewhere. The offsets act as a per-motif
    // posture.
    struct Design {
        const char* name;
        std::size_t primary;
        std::size_t secondary;
        double freq;
        double offset;
    };
    const Design designs[] = {
        {"stir", 0, 3, 2.0, 0.75},    {"sip", 1, 4, 1.0, -0.75}, {"cut", 2, 5, 5.0, 0.5},
        {"spread", 3, 0, 3.5, -0.5},  {"bite", 4, 1, 6.5, 1.0},  {"open", 5, 2, 1.5, -1.0},
        {"close", 0, 4, 4.0, -0.25}, {"lock", 2, 3, 7.5, 0.25},
    };
    for (const auto& d : designs) {
        MotifSpec m;
        m.name = d.name;
        m.min_duration = 24;
        m.max_duration = 48;
        m.channels.assign(c.channels, Waveform{0.1, 0.5, 0.0, 0.0});
        m.channels[d.primary] = Waveform{1.0, d.freq, 0.0, d.offset};
        m.channels[d.secondary] = Waveform{0.6, d.freq, pi / 2.0, -d.offset};
        c.motifs.push_back(std::move(m));
    }

    auto grammar = [](const char* name, std::vector<std::pair<std::string, double>> motifs) {
        return ActivityGrammar{name, std::move(motifs), 512};
    };
    c.grammars = {
        grammar("coffee_time", {{"stir", 0.4}, {"sip", 0.4}, {"cut", 0.2}}),
        grammar("lunch", {{"cut", 0.4}, {"spread", 0.4}, {"bite", 0.2}}),
        grammar("cleanup", {{"bite", 0.4}, {"open", 0.4}, {"close", 0.2}}),
        grammar("morning_routine", {{"close", 0.4}, {"lock", 0.4}, {"stir", 0.2}}),
    };
    c.users = {{"1", 1.0, 0.10}, {"2", 0.85, 0.15}, {"3", 1.15, 0.10}, {"4", 0.95, 0.20}};
    c.samples_per_class_per_user = 20;
    c.seed = 42;
    c.null_gap = 24;
    return c;
}

MotifSamples gen_motif(const MotifSpec& spec, std::size_t duration, const UserProfile& user, double sample_rate_hz,
                       SeededRng& rng) {
    require(duration >= spec.min_duration && duration <= spec.max_duration, ErrorKind::Argument,
            "gen_motif: duration " + std::to_string(duration) + " outside the range of motif '" + spec.name + "'");
    const std::size_t q = spec.channels.size();
    MotifSamples out{std::vector<double>(duration * q), spec.name};
    for (std::size_t t = 0; t < duration; ++t) {
        const double time = static_cast<double>(t) / sample_rate_hz;
        for (std::size_t c = 0; c < q; ++c) {
            const Waveform& w = spec.channels[c];
            const double clean =
                w.offset + user.amplitude_scale * w.amplitude *
                               std::sin(2.0 * std::numbers::pi * w.frequency_hz * time + w.phase);
            const double noise = user.noise_sigma > 0.0 ? user.noise_sigma * rng.normal() : 0.0;
            out.samples[t * q + c] = clean + noise;
        }
    }
    return out;
}

namespace {

std::size_t draw_categorical(const std::vector<std::pair<std::string, double>>& items, SeededRng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        acc += items[i].second;
        if (u < acc) return i;
    }
    // Rounding in the cumulative sum: fall back to the last item with mass.
    for (std::size_t i = items.size(); i-- > 0;) {
        if (items[i].second > 0.0) return i;
    }
    return items.size() - 1;
}

std::vector<std::string> channel_names(std::size_t q) {
    static const char* kNames[] = {"acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z"};
    std::vector<std::string> out;
    for (std::size_t c = 0; c < q; ++c) out.push_back(q == 6 ? kNames[c] : "ch" + std::to_string(c));
    return out;
}

std::uint64_t segment_index(const SynthConfig& c, std::size_t user, std::size_t cls, std::size_t k) {
    return (static_cast<std::uint64_t>(user) * c.grammars.size() + cls) * c.samples_per_class_per_user + k;
}

constexpr std::uint64_t kSessionStream = 0x5e55'1000'0000'0000ULL;

}  // namespace

LabeledSegment gen_segment(const SynthConfig& config, std::size_t class_index, const UserProfile& user,
                           SeededRng& rng) {
    const ActivityGrammar& g = config.grammars.at(class_index);
    const std::size_t q = config.channels;
    std::vector<double> values;
    values.reserve(g.target_length * q);
    std::vector<std::string> track;
    track.reserve(g.target_length);
    while (track.size() < g.target_length) {
        const MotifSpec& spec = config.motif(g.motifs[draw_categorical(g.motifs, rng)].first);
        const std::size_t span = spec.max_duration - spec.min_duration + 1;
        const std::size_t duration = spec.min_duration + static_cast<std::size_t>(rng.below(span));
        const auto motif = gen_motif(spec, duration, user, config.sample_rate_hz, rng);
        const std::size_t take = std::min(duration, g.target_length - track.size());
        values.insert(values.end(), motif.samples.begin(), motif.samples.begin() + static_cast<std::ptrdiff_t>(take * q));
        track.insert(track.end(), take, motif.label);
    }
    LabeledSegment seg;
    seg.stream = SensorStream(q, config.sample_rate_hz, std::move(values), channel_names(q));
    seg.high_label = class_index;
    seg.user_id = user.id;
    seg.low_label_tracks[config.low_track] = std::move(track);
    return seg;
}

std::vector<LabeledSegment> gen_dataset(const SynthConfig& config) {
    config.validate();
    std::vector<LabeledSegment> out;
    for (std::size_t u = 0; u < config.users.size(); ++u) {
        for (std::size_t c = 0; c < config.grammars.size(); ++c) {
            for (std::size_t k = 0; k < config.samples_per_class_per_user; ++k) {
                SeededRng rng = SeededRng::derive(config.seed, segment_index(config, u, c, k));
                LabeledSegment seg = gen_segment(config, c, config.users[u], rng);
                seg.source = "user" + config.users[u].id + "/" + config.grammars[c].name + "/" + std::to_string(k);
                out.push_back(std::move(seg));
            }
        }
    }
    return out;
}

SchemaConfig synth_schema(const SynthConfig& config) {
    SchemaConfig s;
    s.delimiter = ',';
    s.header_rows = 1;
    for (std::size_t c = 0; c < config.channels; ++c) s.channel_columns.push_back(c);
    s.channel_names = channel_names(config.channels);
    s.high_label_column = config.channels;
    s.low_label_columns[config.low_track] = config.channels + 1;
    s.null_label_token = config.null_label;
    s.sample_rate_hz = config.sample_rate_hz;
    return s;
}

SynthSummary write_synth_dataset(const SynthConfig& config, const fs::path& out_dir) {
    const auto segments = gen_dataset(config);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    require(!ec && fs::is_directory(out_dir), ErrorKind::Io, "cannot create output directory '" + out_dir.string() + "'");

    const std::size_t q = config.channels;
    const std::size_t classes = config.grammars.size();
    const auto names = channel_names(q);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    SynthSummary summary{0, segments.size(), config.users.size(), classes};

    for (std::size_t u = 0; u < config.users.size(); ++u) {
        const UserProfile& user = config.users[u];
        for (std::size_t k = 0; k < config.samples_per_class_per_user; ++k) {
            SeededRng rng = SeededRng::derive(config.seed ^ kSessionStream, u * config.samples_per_class_per_user + k);
            std::vector<std::size_t> order(classes);
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);

            std::ostringstream out;
            for (const auto& n : names) out << n << ',';
            out << "activity," << config.low_track << '\n';
            auto write_gap = [&] {
                for (std::size_t t = 0; t < config.null_gap; ++t) {
                    for (std::size_t c = 0; c < q; ++c) out << format_double(user.noise_sigma * rng.normal()) << ',';
                    out << config.null_label << ',' << config.null_label << '\n';
                }
            };
            write_gap();
            for (std::size_t c : order) {
                const LabeledSegment& seg = segments[segment_index(config, u, c, k)];
                const auto& track = seg.low_label_tracks.at(config.low_track);
                for (std::size_t t = 0; t < seg.stream.size(); ++t) {
                    for (double v : seg.stream.row(t)) out << format_double(v) << ',';
                    out << config.grammars[c].name << ',' << track[t] << '\n';
                }
                write_gap();
            }
            char name[64];
            std::snprintf(name, sizeof name, "user%s_session%02zu.csv", user.id.c_str(), k);
            write_file_atomic(out_dir / name, out.str());
            files.push_back({{"path", name}, {"user", user.id}, {"segments", classes}});
            ++summary.files;
        }
    }

    nlohmann::ordered_json manifest;
    manifest["generator"] = "charm synthetic compositional activities";
    manifest["seed"] = config.seed;
    manifest["classes"] = config.class_names();
    nlohmann::ordered_json users = nlohmann::ordered_json::array();
    for (const auto& u : config.users) users.push_back(u.id);
    manifest["users"] = users;
    manifest["low_tracks"] = {config.low_track};
    manifest["samples_per_class_per_user"] = config.samples_per_class_per_user;
    manifest["segments"] = summary.segments;
    manifest["files"] = files;
    write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

}  // namespace charm
