#include "charm/embed.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "charm/error.hpp"
#include "charm/io.hpp"

namespace charm {

PcaModel pca_fit(const Eigen::MatrixXd& x, std::size_t k) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    require(n >= 2, ErrorKind::Argument, "pca: at least two rows are required");
    require(k >= 1 && k <= std::min(n, d), ErrorKind::Argument,
            "pca: k = " + std::to_string(k) + " outside [1, " + std::to_string(std::min(n, d)) + "]");
    PcaModel model;
    model.mean = x.colwise().mean();
    const Eigen::MatrixXd centred = x.rowwise() - model.mean;
    const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
    require(cov.cwiseAbs().maxCoeff() > 0.0, ErrorKind::Argument, "pca: all rows are identical (zero covariance)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    require(solver.info() == Eigen::Success, ErrorKind::Argument, "pca: eigendecomposition failed");
    // Eigenvalues come back ascending.
    model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    model.explained_variance.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const auto src = static_cast<Eigen::Index>(d - 1 - i);
        Eigen::RowVectorXd axis = solver.eigenvectors().col(src).transpose();
        Eigen::Index top = 0;
        axis.cwiseAbs().maxCoeff(&top);
        if (axis(top) < 0.0) axis = -axis;
        model.components.row(static_cast<Eigen::Index>(i)) = axis;
        model.explained_variance(static_cast<Eigen::Index>(i)) = std::max(solver.eigenvalues()(src), 0.0);
    }
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
    require(x.cols() == model.mean.cols(), ErrorKind::Shape,
            "pca: data has " + std::to_string(x.cols()) + " columns, model expects " +
                std::to_string(model.mean.cols()));
    return (x.rowwise() - model.mean) * model.components.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& coords) {
    require(coords.cols() == model.components.rows(), ErrorKind::Shape, "pca: coordinate dimension mismatch");
    return (coords * model.components).rowwise() + model.mean;
}

double silhouette_score(const Eigen::MatrixXd& points, std::span<const std::string> labels) {
    const auto n = static_cast<std::size_t>(points.rows());
    require(labels.size() == n, ErrorKind::Shape, "silhouette: label count differs from point count");
    require(n >= 3, ErrorKind::Argument, "silhouette: at least three points are required");
    std::vector<std::string> names(labels.begin(), labels.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    require(names.size() >= 2, ErrorKind::Argument, "silhouette: at least two distinct labels are required");

    std::vector<std::size_t> cluster(n);
    for (std::size_t i = 0; i < n; ++i) {
        cluster[i] = static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), labels[i]) - names.begin());
    }
    std::vector<std::size_t> sizes(names.size(), 0);
    for (std::size_t c : cluster) ++sizes[c];

    double total = 0.0;
    std::vector<double> sums(names.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[cluster[i]] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[cluster[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
        }
        const double a = sums[cluster[i]] / static_cast<double>(sizes[cluster[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (c != cluster[i]) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        total += denom == 0.0 ? 0.0 : (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

LabeledWindows extract_label_pure_windows(std::span<const LabeledSegment> segments, const std::string& track,
                                          std::size_t r, const ChannelStats* stats,
                                          const std::map<std::string, std::string>& grouping,
                                          const std::string& null_token, double purity) {
    require(r >= 1, ErrorKind::Argument, "window length must be positive");
    LabeledWindows out;
    for (const auto& seg : segments) {
        auto it = seg.low_label_tracks.find(track);
        require(it != seg.low_label_tracks.end(), ErrorKind::Data,
                "segment '" + seg.source + "' has no low-level label track '" + track + "'");
        const auto& labels = it->second;
        const SensorStream stream = stats ? normalize(seg.stream, *stats) : seg.stream;
        const std::size_t q = stream.channels();
        for (std::size_t off = 0; off + r <= stream.size(); off += r) {
            std::map<std::string, std::size_t> counts;
            for (std::size_t t = off; t < off + r; ++t) ++counts[labels[t]];
            auto best = std::max_element(counts.begin(), counts.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
            if (best->first == null_token) continue;
            if (static_cast<double>(best->second) < purity * static_cast<double>(r)) continue;
            std::string label = best->first;
            if (!grouping.empty()) {
                auto g = grouping.find(label);
                if (g == grouping.end()) continue;
                label = g->second;
            }
            auto samples = stream.samples().subspan(off * q, r * q);
            out.windows.insert(out.windows.end(), samples.begin(), samples.end());
            out.labels.push_back(std::move(label));
            out.sources.push_back(seg.source + "#" + std::to_string(off));
        }
    }
    return out;
}

std::map<std::string, std::string> parse_grouping(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string label, group, extra;
        if (!(ls >> label)) continue;
        if (!(ls >> group) || (ls >> extra)) throw ParseError(line_no, "grouping lines must be 'label group'");
        out[label] = group;
    }
    require(!out.empty(), ErrorKind::Data, "grouping file defines no groups");
    return out;
}

EmbeddingAnalysis analyse_embeddings(const CharmConfig& config, const ParameterSet& params,
                                     const LabeledWindows& windows, std::size_t dims) {
    require(windows.count() >= 3, ErrorKind::Data, "fewer than three label-pure windows to embed");
    const auto flat = extract_low_level_embeddings(config, params, windows.windows);
    const auto rows = static_cast<Eigen::Index>(windows.count());
    const auto cols = static_cast<Eigen::Index>(config.low_out);
    const Eigen::MatrixXd x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, cols);
    EmbeddingAnalysis a;
    a.pca = pca_fit(x, dims);
    const Eigen::MatrixXd coords = pca_transform(a.pca, x);
    a.silhouette = silhouette_score(coords, windows.labels);
    for (Eigen::Index i = 0; i < rows; ++i) {
        EmbeddingPoint p;
        for (Eigen::Index j = 0; j < coords.cols(); ++j) p.coords.push_back(coords(i, j));
        p.low_label = windows.labels[static_cast<std::size_t>(i)];
        p.source = windows.sources[static_cast<std::size_t>(i)];
        a.points.push_back(std::move(p));
    }
    return a;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

std::string format_embedding_csv(std::span<const EmbeddingPoint> points) {
    require(!points.empty(), ErrorKind::Data, "no embedding points to export");
    const std::size_t dims = points.front().coords.size();
    std::ostringstream out;
    for (std::size_t j = 0; j < dims; ++j) out << "pc" << j + 1 << ',';
    out << "low_label,source\n";
    for (const auto& p : points) {
        require(p.coords.size() == dims, ErrorKind::Shape, "embedding points differ in dimension");
        for (double v : p.coords) out << format_double(v) << ',';
        out << csv_field(p.low_label) << ',' << csv_field(p.source) << '\n';
    }
    return std::move(out).str();
}

std::vector<EmbeddingPoint> parse_embedding_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Data, "embedding file is empty");
    const auto header = split_csv_line(line, 1);
    require(header.size() >= 3, ErrorKind::Data, "embedding header too short");
    const std::size_t dims = header.size() - 2;
    std::vector<EmbeddingPoint> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != dims + 2) throw ParseError(line_no, "wrong number of fields");
        EmbeddingPoint p;
        for (std::size_t j = 0; j < dims; ++j) p.coords.push_back(parse_double(f[j]));
        p.low_label = f[dims];
        p.source = f[dims + 1];
        out.push_back(std::move(p));
    }
    return out;
}

void export_embedding(std::span<const EmbeddingPoint> points, const std::filesystem::path& path) {
    write_file_atomic(path, format_embedding_csv(points));
}

}  // namespace charm
