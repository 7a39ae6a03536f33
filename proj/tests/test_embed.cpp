#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <set>

#include "charm/embed.hpp"
#include "charm/error.hpp"
#include "charm/io.hpp"
#include "charm/neurocore.hpp"

using namespace charm;

namespace {

Eigen::MatrixXd gaussian(SeededRng& rng, std::size_t n, std::size_t d, double sigma = 1.0) {
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = sigma * rng.normal();
    }
    return x;
}

Eigen::Matrix3d rotation() {
    return (Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(-1.1, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

}  // namespace

TEST_CASE("pca_fit on the line y = 2x") {
    Eigen::MatrixXd x(5, 2);
    for (int i = 0; i < 5; ++i) x.row(i) << i - 1.5, 2.0 * (i - 1.5);
    const auto m = pca_fit(x, 2);
    CHECK(m.components(0, 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(m.components(0, 1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(std::abs(m.explained_variance(1)) < 1e-12);
    // Projections are sqrt(5) * (t - mean t), t - mean t = -2..2: 5 * 10 / (N - 1).
    CHECK(m.explained_variance(0) == doctest::Approx(5.0 * 10.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("pca properties") {
    SeededRng rng(8);
    Eigen::MatrixXd x = gaussian(rng, 60, 4);
    x.col(0) *= 3.0;
    x.col(2) *= 0.5;
    x.rowwise() += Eigen::RowVector4d(1, -2, 3, 4);
    const auto m = pca_fit(x, 4);

    SUBCASE("orthonormal, sorted, sign convention") {
        const Eigen::MatrixXd gram = m.components * m.components.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
        for (int i = 1; i < 4; ++i) CHECK(m.explained_variance(i) <= m.explained_variance(i - 1));
        CHECK(m.explained_variance.minCoeff() >= 0.0);
        for (int i = 0; i < 4; ++i) {
            Eigen::Index at;
            m.components.row(i).cwiseAbs().maxCoeff(&at);
            CHECK(m.components(i, at) > 0.0);
        }
    }
    SUBCASE("k = D reconstructs exactly and transformed data is centred with the explained variances") {
        const auto coords = pca_transform(m, x);
        CHECK((pca_inverse_transform(m, coords) - x).cwiseAbs().maxCoeff() < 1e-9);
        const Eigen::RowVectorXd mean = coords.colwise().mean();
        CHECK(mean.cwiseAbs().maxCoeff() < 1e-9);
        for (int j = 0; j < 4; ++j) {
            const double var = coords.col(j).squaredNorm() / (coords.rows() - 1.0);
            CHECK(std::abs(var - m.explained_variance(j)) < 1e-9);
        }
    }
    SUBCASE("mean maps to the origin; mean + first component maps to (1, 0, ...)") {
        Eigen::MatrixXd probe(2, 4);
        probe.row(0) = m.mean;
        probe.row(1) = m.mean + m.components.row(0);
        const auto c = pca_transform(m, probe);
        CHECK(c.row(0).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(c(1, 0) - 1.0) < 1e-12);
        CHECK(c.row(1).tail(3).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(pca_fit(x, 0), Error);
        CHECK_THROWS_AS(pca_fit(x, 5), Error);
        CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(5, 3), 2), Error);
        CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(1, 3), 1), Error);
        CHECK_THROWS_AS(pca_transform(m, Eigen::MatrixXd::Zero(2, 3)), Error);
    }
}

TEST_CASE("explained variances are rotation invariant") {
    SeededRng rng(21);
    Eigen::MatrixXd x = gaussian(rng, 400, 3);
    x.col(0) *= 2.0;
    const auto a = pca_fit(x, 3);
    const auto b = pca_fit(x * rotation().transpose(), 3);
    CHECK((a.explained_variance - b.explained_variance).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("silhouette_score") {
    SUBCASE("hand-computed four points on a line") {
        Eigen::MatrixXd p(4, 1);
        p << 0, 1, 4, 5;
        const std::vector<std::string> l{"a", "a", "b", "b"};
        CHECK(silhouette_score(p, l) == doctest::Approx(94.0 / 126.0).epsilon(1e-12));
    }
    SUBCASE("tight, far-apart clusters") {
        SeededRng rng(1);
        Eigen::MatrixXd p = gaussian(rng, 40, 2, 0.01);
        std::vector<std::string> l;
        for (int i = 0; i < 40; ++i) {
            l.push_back(i < 20 ? "a" : "b");
            if (i >= 20) p(i, 0) += 10.0;
        }
        CHECK(silhouette_score(p, l) > 0.9);
    }
    SUBCASE("random labels on one blob score near 0") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            SeededRng rng(seed);
            const Eigen::MatrixXd p = gaussian(rng, 300, 2);
            std::vector<std::string> l;
            for (int i = 0; i < 300; ++i) l.push_back(rng.below(2) ? "a" : "b");
            CHECK(std::abs(silhouette_score(p, l)) < 0.1);
        }
    }
    SUBCASE("identical points score 0") {
        const std::vector<std::string> l{"a", "b", "a", "b"};
        CHECK(silhouette_score(Eigen::MatrixXd::Ones(4, 2), l) == 0.0);
    }
    SUBCASE("singletons contribute 0") {
        Eigen::MatrixXd p(3, 1);
        p << 0, 1, 10;
        const std::vector<std::string> l{"a", "a", "b"};
        // a: 1 - 1/10 and 1 - 1/9; b is a singleton.
        CHECK(silhouette_score(p, l) == doctest::Approx((0.9 + 8.0 / 9.0) / 3.0).epsilon(1e-12));
    }
    SUBCASE("invariant under rotation and translation") {
        SeededRng rng(4);
        const Eigen::MatrixXd p = gaussian(rng, 50, 3);
        std::vector<std::string> l;
        for (int i = 0; i < 50; ++i) l.push_back(p(i, 0) + 0.3 * rng.normal() > 0 ? "a" : "b");
        Eigen::MatrixXd moved = p * rotation().transpose();
        moved.rowwise() += Eigen::RowVector3d(5, -7, 2);
        CHECK(silhouette_score(moved, l) == doctest::Approx(silhouette_score(p, l)).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<std::string> one{"a", "a", "a"};
        CHECK_THROWS_AS(silhouette_score(Eigen::MatrixXd::Zero(3, 2), one), Error);
        const std::vector<std::string> two{"a", "b"};
        CHECK_THROWS_AS(silhouette_score(Eigen::MatrixXd::Zero(2, 2), two), Error);
        CHECK_THROWS_AS(silhouette_score(Eigen::MatrixXd::Zero(3, 2), two), Error);
    }
}

TEST_CASE("extract_label_pure_windows") {
    LabeledSegment s;
    std::vector<double> v(48);
    for (std::size_t i = 0; i < 48; ++i) v[i] = static_cast<double>(i);
    s.stream = SensorStream(1, 30.0, v);
    s.source = "seg";
    std::vector<std::string> track(48, "stir");
    track[3] = "sip";                                        // window 0: 15/16 pure, kept
    for (std::size_t t = 16; t < 24; ++t) track[t] = "sip";  // window 1: 50/50, dropped
    for (std::size_t t = 32; t < 48; ++t) track[t] = "null"; // window 2: null, dropped
    s.low_label_tracks["motif"] = track;
    const std::vector<LabeledSegment> segs{s};

    const auto w = extract_label_pure_windows(segs, "motif", 16, nullptr);
    REQUIRE(w.count() == 1);
    CHECK(w.labels[0] == "stir");
    CHECK(w.windows.size() == 16);
    CHECK(w.windows[5] == 5.0);
    CHECK(w.sources[0].find("seg") != std::string::npos);

    const ChannelStats st{{10.0}, {2.0}};
    CHECK(extract_label_pure_windows(segs, "motif", 16, &st).windows[0] == -5.0);

    const auto g = extract_label_pure_windows(segs, "motif", 16, nullptr, {{"stir", "food"}});
    CHECK(g.labels == std::vector<std::string>{"food"});
    CHECK(extract_label_pure_windows(segs, "motif", 16, nullptr, {{"sip", "food"}}).count() == 0);
    CHECK_THROWS_AS(extract_label_pure_windows(segs, "locomotion", 16, nullptr), Error);
}

TEST_CASE("parse_grouping") {
    const auto g = parse_grouping("# motif groups\nstir food\n\nlock object  # trailing\n");
    CHECK(g == std::map<std::string, std::string>{{"stir", "food"}, {"lock", "object"}});
    CHECK_THROWS_AS(parse_grouping("stir\n"), Error);
}

TEST_CASE("analyse_embeddings") {
    CharmConfig c;
    c.window = 4;
    c.channels = 2;
    c.low_hidden = 5;
    c.low_out = 3;
    c.windows = 2;
    c.high_hidden = 4;
    c.classes = 2;
    ParameterSet p = make_params({ModelKind::Charm, c, {}});
    SeededRng rng(6);
    init_params(p, rng);
    LabeledWindows w;
    for (int i = 0; i < 12; ++i) {
        for (int k = 0; k < 8; ++k) w.windows.push_back((i % 2 ? 2.0 : -2.0) + 0.1 * rng.normal());
        w.labels.push_back(i % 2 ? "up" : "down");
        w.sources.push_back("s" + std::to_string(i));
    }
    // A duplicate window embeds identically.
    w.windows.insert(w.windows.end(), w.windows.begin(), w.windows.begin() + 8);
    w.labels.push_back("down");
    w.sources.push_back("dup");
    const auto a = analyse_embeddings(c, p, w);
    REQUIRE(a.points.size() == 13);
    CHECK(a.points[0].coords == a.points[12].coords);
    CHECK(a.points[0].coords.size() == 2);
    CHECK(a.silhouette > 0.5);
}

TEST_CASE("embedding CSV") {
    const std::vector<EmbeddingPoint> pts{
        {{0.1, -2.5e-17}, "stir", "user1/coffee/0@0"},
        {{1.0 / 3.0, 1e300}, "a,b", "x"},
        {{-0.0, 42.0}, "say \"hi\"", "y"},
    };
    const auto csv = format_embedding_csv(pts);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("pc1,pc2,low_label,source\n", 0) == 0);
    CHECK(csv.find("\"a,b\"") != std::string::npos);
    CHECK(csv.find("\"say \"\"hi\"\"\"") != std::string::npos);
    const auto back = parse_embedding_csv(csv);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].coords == pts[i].coords);
        CHECK(back[i].low_label == pts[i].low_label);
        CHECK(back[i].source == pts[i].source);
    }
    const auto path = std::filesystem::temp_directory_path() / "charm_test_embedding.csv";
    export_embedding(pts, path);
    CHECK(read_file(path) == csv);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(export_embedding({}, path), Error);
    // Parent "directory" is a regular file.
    const auto blocker = std::filesystem::temp_directory_path() / "charm_test_blocker";
    write_file_atomic(blocker, "x");
    CHECK_THROWS_AS(export_embedding(pts, blocker / "out.csv"), Error);
    std::filesystem::remove(blocker);
}
