#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "charm/error.hpp"
#include "charm/io.hpp"
#include "charm/synth.hpp"
#include "oracles.hpp"

using namespace charm;

namespace {

MotifSpec flat_motif(const std::string& name, std::size_t q, double offset, std::size_t duration = 16) {
    MotifSpec m;
    m.name = name;
    m.channels.assign(q, Waveform{0.0, 1.0, 0.0, offset});
    m.min_duration = duration;
    m.max_duration = duration;
    return m;
}

SynthConfig small_config() {
    SynthConfig c = default_synth_config();
    c.samples_per_class_per_user = 5;
    return c;
}

std::map<std::string, std::string> directory_contents(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
    return out;
}

}  // namespace

TEST_CASE("gen_motif") {
    const UserProfile quiet{"u", 1.0, 0.0};
    SUBCASE("zero amplitude and noise gives the offset") {
        SeededRng rng(1);
        const auto m = gen_motif(flat_motif("m", 3, 0.7, 20), 20, quiet, 30.0, rng);
        CHECK(m.label == "m");
        CHECK(m.samples.size() == 60);
        for (double v : m.samples) CHECK(v == 0.7);
    }
    SUBCASE("sinusoid follows its formula with the user scale") {
        MotifSpec spec = flat_motif("m", 1, 0.5, 16);
        spec.channels[0] = Waveform{2.0, 3.0, 0.25, 0.5};
        SeededRng rng(1);
        const auto m = gen_motif(spec, 16, UserProfile{"u", 0.5, 0.0}, 30.0, rng);
        for (std::size_t t = 0; t < 16; ++t) {
            const double expect = 0.5 + 0.5 * 2.0 * std::sin(2.0 * M_PI * 3.0 * t / 30.0 + 0.25);
            CHECK(m.samples[t] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    SUBCASE("deterministic") {
        const auto spec = default_synth_config().motifs[0];
        SeededRng a(5), b(5);
        const UserProfile noisy{"u", 1.1, 0.2};
        CHECK(gen_motif(spec, 30, noisy, 30.0, a).samples == gen_motif(spec, 30, noisy, 30.0, b).samples);
    }
    SUBCASE("noise sample variance with sigma 0.1 is 0.01") {
        const std::size_t n = 100000;
        SeededRng rng(12);
        const auto m = gen_motif(flat_motif("m", 1, 0.0, n), n, UserProfile{"u", 1.0, 0.1}, 30.0, rng);
        double sum = 0.0, sq = 0.0;
        for (double v : m.samples) {
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        // Var of the sample variance of N(0, s^2) is 2 s^4 / n.
        CHECK(std::abs(var - 0.01) < 3.0 * std::sqrt(2.0 * 1e-4 / n));
    }
    SUBCASE("duration outside the range") {
        SeededRng rng(1);
        CHECK_THROWS_AS(gen_motif(flat_motif("m", 1, 0.0, 16), 17, quiet, 30.0, rng), Error);
    }
}

TEST_CASE("gen_segment") {
    SynthConfig c;
    c.channels = 1;
    c.motifs = {flat_motif("a", 1, 1.0), flat_motif("b", 1, 2.0), flat_motif("c", 1, 3.0)};
    c.grammars = {{"one", {{"a", 1.0}}, 100}, {"mix", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}}, 16 * 10000}};
    c.users = {{"1", 1.0, 0.0}, {"2", 1.0, 0.0}};
    const UserProfile& user = c.users[0];
    SUBCASE("single-motif grammar gives a constant track and the exact target length") {
        SeededRng rng(3);
        const auto s = gen_segment(c, 0, user, rng);
        CHECK(s.stream.size() == 100);
        const auto& track = s.low_label_tracks.at("motif");
        CHECK(track.size() == 100);
        CHECK(std::set<std::string>(track.begin(), track.end()) == std::set<std::string>{"a"});
        CHECK(s.high_label == 0);
        CHECK(s.user_id == "1");
    }
    SUBCASE("motif frequencies follow the grammar") {
        SeededRng rng(4);
        const auto s = gen_segment(c, 1, user, rng);
        const auto& track = s.low_label_tracks.at("motif");
        std::map<std::string, double> draws;
        for (std::size_t i = 0; i < track.size(); i += 16) draws[track[i]] += 1.0;
        const double n = 10000.0;
        for (const auto& [name, p] : c.grammars[1].motifs) {
            CAPTURE(name);
            CHECK(std::abs(draws[name] / n - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
        }
    }
    SUBCASE("every sample carries the label of the motif that generated it") {
        SeededRng rng(5);
        const auto s = gen_segment(c, 1, user, rng);
        const auto& track = s.low_label_tracks.at("motif");
        const std::map<std::string, double> offset{{"a", 1.0}, {"b", 2.0}, {"c", 3.0}};
        for (std::size_t t = 0; t < 2000; ++t) CHECK(s.stream.row(t)[0] == offset.at(track[t]));
    }
    SUBCASE("the last motif is truncated") {
        SynthConfig d = c;
        d.motifs[0].min_duration = 24;
        d.motifs[0].max_duration = 40;
        d.grammars[0].target_length = 50;
        SeededRng rng(6);
        CHECK(gen_segment(d, 0, user, rng).stream.size() == 50);
    }
}

TEST_CASE("gen_dataset") {
    const auto c = small_config();
    const auto a = gen_dataset(c);
    CHECK(a.size() == 4 * 4 * 5);
    std::map<std::pair<std::string, std::size_t>, int> per;
    for (const auto& s : a) {
        per[{s.user_id, s.high_label}] += 1;
        CHECK(s.stream.size() == 512);
        CHECK(s.stream.channels() == 6);
    }
    CHECK(per.size() == 16);
    for (const auto& [key, n] : per) CHECK(n == 5);
    const auto b = gen_dataset(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].stream == b[i].stream);
        CHECK(a[i].low_label_tracks == b[i].low_label_tracks);
    }
    auto other = c;
    other.seed = 43;
    CHECK_FALSE(gen_dataset(other)[0].stream == a[0].stream);
}

TEST_CASE("default configuration") {
    const auto c = default_synth_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.grammars.size() == 4);
    CHECK(c.motifs.size() == 8);
    CHECK(c.users.size() == 4);
    CHECK(c.samples_per_class_per_user == 20);
    CHECK(c.seed == 42);
    for (const auto& g : c.grammars) CHECK(g.target_length == 512);
    // Every class shares at least one motif with another class.
    for (std::size_t i = 0; i < c.grammars.size(); ++i) {
        bool shares = false;
        for (std::size_t j = 0; j < c.grammars.size(); ++j) {
            if (i == j) continue;
            for (const auto& [a, pa] : c.grammars[i].motifs) {
                for (const auto& [b, pb] : c.grammars[j].motifs) shares |= a == b;
            }
        }
        CHECK(shares);
    }
    for (const auto& m : c.motifs) CHECK(m.min_duration >= 16);
}

TEST_CASE("config validation") {
    auto c = default_synth_config();
    c.users.resize(1);
    CHECK_THROWS_AS(c.validate(), Error);
    c = default_synth_config();
    c.grammars.resize(1);
    CHECK_THROWS_AS(c.validate(), Error);
    c = default_synth_config();
    c.grammars[0].motifs[0].second = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = default_synth_config();
    c.grammars[0].motifs[0].first = "dance";
    CHECK_THROWS_AS(c.validate(), Error);
    c = default_synth_config();
    c.motifs[0].min_duration = 8;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(gen_dataset(c), Error);
}

TEST_CASE("histogram oracle separates classes with disjoint grammars") {
    SynthConfig c = default_synth_config();
    c.grammars = {
        {"a", {{"stir", 0.5}, {"sip", 0.5}}, 512},
        {"b", {{"cut", 0.5}, {"spread", 0.5}}, 512},
        {"c", {{"bite", 0.5}, {"open", 0.5}}, 512},
        {"d", {{"close", 0.5}, {"lock", 0.5}}, 512},
    };
    c.samples_per_class_per_user = 5;
    const auto data = gen_dataset(c);
    std::vector<std::vector<std::string>> tr, te;
    std::vector<std::size_t> trl, tel;
    for (const auto& s : data) {
        auto& tracks = s.user_id == "4" ? te : tr;
        auto& labels = s.user_id == "4" ? tel : trl;
        tracks.push_back(s.low_label_tracks.at("motif"));
        labels.push_back(s.high_label);
    }
    CHECK(oracle::histogram_centroid_accuracy(tr, trl, te, tel, 4) == 1.0);
}

TEST_CASE("write_synth_dataset") {
    const auto base = std::filesystem::temp_directory_path() / "charm_test_synth";
    std::filesystem::remove_all(base);
    const auto c = small_config();
    const auto s1 = write_synth_dataset(c, base / "a");
    write_synth_dataset(c, base / "b");
    CHECK(s1.files == 4 * 5);
    CHECK(s1.segments == 4 * 4 * 5);
    CHECK(s1.users == 4);
    CHECK(s1.classes == 4);
    const auto a = directory_contents(base / "a");
    CHECK(a.size() == 4 * 5 + 1);
    CHECK(a.count("manifest.json") == 1);
    CHECK(a == directory_contents(base / "b"));

    const auto loaded = load_dataset_dir(base / "a", synth_schema(c), ActivityLabelSet(c.class_names()));
    REQUIRE(loaded.segments.size() == 80);
    std::map<std::string, std::size_t> per_user;
    for (const auto& s : loaded.segments) {
        per_user[s.user_id] += 1;
        CHECK(s.stream.size() == 512);
        CHECK(s.low_label_tracks.at("motif").size() == 512);
    }
    CHECK(per_user == std::map<std::string, std::size_t>{{"1", 20}, {"2", 20}, {"3", 20}, {"4", 20}});

    // Files hold the generated values at round-trip precision.
    const auto generated = gen_dataset(c);
    std::multiset<std::vector<double>> want, got;
    for (const auto& s : generated) want.insert({s.stream.samples().begin(), s.stream.samples().end()});
    for (const auto& s : loaded.segments) got.insert({s.stream.samples().begin(), s.stream.samples().end()});
    CHECK(want == got);
    std::filesystem::remove_all(base);
}
