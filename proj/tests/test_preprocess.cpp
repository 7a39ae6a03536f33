#include <doctest.h>

#include <cmath>

#include "charm/error.hpp"
#include "charm/neurocore.hpp"
#include "charm/preprocess.hpp"

using namespace charm;

TEST_CASE("fit_normalizer") {
    SUBCASE("{0, 2} gives mean 1, std 1") {
        const std::vector<SensorStream> s{SensorStream(1, 30.0, {0.0, 2.0})};
        const auto st = fit_normalizer(std::span<const SensorStream>(s));
        CHECK(st.means[0] == 1.0);
        CHECK(st.stds[0] == 1.0);
    }
    SUBCASE("constant channel is clamped") {
        const std::vector<SensorStream> s{SensorStream(1, 30.0, {5.0, 5.0, 5.0})};
        const auto st = fit_normalizer(std::span<const SensorStream>(s));
        CHECK(st.means[0] == 5.0);
        CHECK(st.stds[0] == kStdFloor);
    }
    SUBCASE("channels are independent and samples pool across segments") {
        LabeledSegment a, b;
        a.stream = SensorStream(2, 30.0, {0.0, 10.0});
        b.stream = SensorStream(2, 30.0, {2.0, 10.0});
        const std::vector<LabeledSegment> segs{a, b};
        const auto st = fit_normalizer(std::span<const LabeledSegment>(segs));
        CHECK(st.means == std::vector<double>{1.0, 10.0});
        CHECK(st.stds[0] == 1.0);
        CHECK(st.stds[1] == kStdFloor);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(fit_normalizer(std::span<const SensorStream>()), Error);
        const std::vector<SensorStream> mixed{SensorStream(1, 30.0, {1.0}), SensorStream(2, 30.0, {1.0, 2.0})};
        CHECK_THROWS_AS(fit_normalizer(std::span<const SensorStream>(mixed)), Error);
    }
}

TEST_CASE("normalize") {
    const ChannelStats st{{1.0}, {1.0}};
    const auto out = normalize(SensorStream(1, 30.0, {0.0, 2.0}), st);
    CHECK(out.row(0)[0] == -1.0);
    CHECK(out.row(1)[0] == 1.0);
    CHECK_THROWS_AS(normalize(SensorStream(2, 30.0, {0.0, 2.0}), st), Error);

    const std::vector<SensorStream> c{SensorStream(1, 30.0, {5.0, 5.0, 5.0})};
    const auto cs = fit_normalizer(std::span<const SensorStream>(c));
    const auto cn = normalize(c[0], cs);
    for (double v : cn.samples()) CHECK(v == 0.0);

    const std::vector<SensorStream> z{SensorStream(1, 30.0, {-1.0, 1.0, -1.0, 1.0})};
    const auto zs = fit_normalizer(std::span<const SensorStream>(z));
    const auto zn = normalize(z[0], zs);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(zn.samples()[i] - z[0].samples()[i]) < 1e-12);
}

TEST_CASE("property: fit-set channels are standardised") {
    SeededRng rng(17);
    std::vector<SensorStream> streams;
    for (int s = 0; s < 5; ++s) {
        std::vector<double> v(3 * (50 + 10 * s));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 100.0 * (i % 3) + (1.0 + i % 3) * rng.normal();
        streams.emplace_back(3, 30.0, std::move(v));
    }
    const auto st = fit_normalizer(std::span<const SensorStream>(streams));
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    std::size_t n = 0;
    for (const auto& s : streams) {
        const auto z = normalize(s, st);
        for (std::size_t t = 0; t < z.size(); ++t) {
            for (std::size_t c = 0; c < 3; ++c) {
                sum[c] += z.row(t)[c];
                sq[c] += z.row(t)[c] * z.row(t)[c];
            }
        }
        n += z.size();
    }
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(sum[c] / n) < 1e-9);
        CHECK(std::abs(sq[c] / n - 1.0) < 1e-9);
    }
}

TEST_CASE("window") {
    SUBCASE("n=2560, r=16 gives z=160") {
        const SensorStream s(18, 30.0, std::vector<double>(2560 * 18, 0.0));
        const auto w = window(s, 16);
        CHECK(w.z == 160);
        CHECK(w.q == 18);
        CHECK(w.windows.size() == 2560 * 18);
    }
    SUBCASE("n=r gives a single window equal to the input") {
        std::vector<double> v(16 * 2);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
        const auto w = window(SensorStream(2, 30.0, v), 16);
        CHECK(w.z == 1);
        CHECK(std::vector<double>(w.window_at(0).begin(), w.window_at(0).end()) == v);
    }
    SUBCASE("n=33, r=16 gives z=2 and drops one sample") {
        std::vector<double> v(33);
        for (std::size_t i = 0; i < 33; ++i) v[i] = static_cast<double>(i);
        const auto w = window(v, 1, 16);
        CHECK(w.z == 2);
        CHECK(w.windows.size() == 32);
        CHECK(w.window_at(1)[0] == 16.0);
    }
    SUBCASE("n < r") {
        CHECK_THROWS_AS(window(std::vector<double>(15, 0.0), 1, 16), Error);
        CHECK_THROWS_AS(window(std::vector<double>(16, 0.0), 1, 0), Error);
    }
}
