#include "charm/traineval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "charm/error.hpp"
#include "charm/io.hpp"

namespace charm {

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorKind::Config, "train: epochs must be at least 1");
    require(batch_size == 1, ErrorKind::Config, "train: only batch_size 1 is supported");
    require(lr > 0.0, ErrorKind::Config, "train: lr must be positive");
}

std::vector<double> compute_class_weights(std::span<const std::size_t> label_counts,
                                          std::span<const std::string> class_names) {
    require(!label_counts.empty(), ErrorKind::Data, "class weights: no classes");
    std::vector<double> w(label_counts.size());
    for (std::size_t i = 0; i < label_counts.size(); ++i) {
        if (label_counts[i] == 0) {
            const std::string name = i < class_names.size() ? class_names[i] : std::to_string(i);
            fail(ErrorKind::Data, "class '" + name + "' has no training samples");
        }
        w[i] = 1.0 / static_cast<double>(label_counts[i]);
    }
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (double& v : w) v /= mean;
    return w;
}

namespace {

struct PreparedSample {
    std::vector<double> values;
    std::size_t label;
};

std::vector<PreparedSample> prepare(std::span<const LabeledSegment> set, const ChannelStats& stats,
                                    const Architecture& arch) {
    std::vector<PreparedSample> out;
    out.reserve(set.size());
    for (const auto& s : set) {
        require(s.stream.size() == arch.sequence_length() && s.stream.channels() == arch.channels(), ErrorKind::Data,
                "sample '" + s.source + "' has shape [" + std::to_string(s.stream.size()) + ", " +
                    std::to_string(s.stream.channels()) + "], model expects [" +
                    std::to_string(arch.sequence_length()) + ", " + std::to_string(arch.channels()) + "]");
        require(s.high_label < arch.classes(), ErrorKind::Data, "sample label out of range");
        const auto norm = normalize(s.stream, stats);
        out.push_back({std::vector<double>(norm.samples().begin(), norm.samples().end()), s.high_label});
    }
    return out;
}

void check_train_set(std::span<const LabeledSegment> train_set, const Architecture& arch,
                     const std::vector<std::string>& class_names) {
    arch.validate();
    require(!train_set.empty(), ErrorKind::Data, "training set is empty");
    require(class_names.size() == arch.classes(), ErrorKind::Config,
            "class name count differs from the model's class count");
    std::vector<bool> present(arch.classes(), false);
    for (const auto& s : train_set) {
        if (s.high_label < present.size()) present[s.high_label] = true;
    }
    require(std::count(present.begin(), present.end(), true) >= 2, ErrorKind::Data,
            "training set must contain at least two classes");
}

}  // namespace

TrainedModel untrained_model(std::span<const LabeledSegment> train_set, const Architecture& arch,
                             const std::vector<std::string>& class_names, std::uint64_t seed) {
    check_train_set(train_set, arch, class_names);
    TrainedModel model{arch, class_names, fit_normalizer(train_set), make_params(arch)};
    SeededRng init_rng = SeededRng::derive(seed, 0);
    init_params(model.params, init_rng);
    return model;
}

TrainResult train(std::span<const LabeledSegment> train_set, const Architecture& arch,
                  const std::vector<std::string>& class_names, const TrainConfig& config,
                  std::span<const LabeledSegment> validation_set) {
    config.validate();
    TrainResult result{untrained_model(train_set, arch, class_names, config.seed), {}};
    TrainedModel& model = result.model;

    const auto samples = prepare(train_set, model.stats, arch);
    std::vector<std::size_t> counts(arch.classes(), 0);
    for (const auto& s : samples) ++counts[s.label];
    const auto weights = compute_class_weights(counts, class_names);

    SeededRng shuffle_rng = SeededRng::derive(config.seed, 1);
    SeededRng dropout_rng = SeededRng::derive(config.seed, 2);
    AdamState adam(model.params.size(), config.lr);
    ParameterSet grads = model.params.zeros_like();
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(order);
        double total = 0.0;
        for (std::size_t idx : order) {
            grads.fill(0.0);
            total += loss_and_gradient(arch, model.params, samples[idx].values, samples[idx].label, weights,
                                       Mode::Train, dropout_rng, grads);
            adam_step(model.params.values(), grads.values(), adam);
        }
        result.history.train_loss.push_back(total / static_cast<double>(samples.size()));
        if (!validation_set.empty()) {
            result.history.validation_macro_f1.push_back(evaluate(model, validation_set).macro_f1);
        }
    }
    return result;
}

std::size_t argmax(std::span<const double> values) {
    require(!values.empty(), ErrorKind::Argument, "argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::vector<double> predict_proba(const TrainedModel& model, const SensorStream& sample) {
    const auto norm = normalize(sample, model.stats);
    SeededRng unused(0);
    return softmax(forward_logits(model.arch, model.params, norm.samples(), Mode::Infer, unused));
}

std::size_t predict(const TrainedModel& model, const SensorStream& sample) {
    return argmax(predict_proba(model, sample));
}

MetricsReport metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion,
                                     std::vector<std::string> class_names) {
    const std::size_t m = confusion.size();
    require(m >= 1, ErrorKind::Argument, "metrics: empty confusion matrix");
    for (const auto& row : confusion) require(row.size() == m, ErrorKind::Shape, "metrics: confusion matrix not square");
    if (class_names.empty()) {
        for (std::size_t i = 0; i < m; ++i) class_names.push_back(std::to_string(i));
    }
    require(class_names.size() == m, ErrorKind::Shape, "metrics: class name count mismatch");

    MetricsReport r;
    r.class_names = std::move(class_names);
    r.precision.resize(m);
    r.recall.resize(m);
    r.f1.resize(m);
    r.support.resize(m);
    std::size_t trace = 0;
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (std::size_t j = 0; j < m; ++j) {
            predicted += confusion[j][i];
            actual += confusion[i][j];
        }
        const std::size_t tp = confusion[i][i];
        r.precision[i] = ratio(tp, predicted);
        r.recall[i] = ratio(tp, actual);
        const double ps = r.precision[i] + r.recall[i];
        r.f1[i] = ps == 0.0 ? 0.0 : 2.0 * r.precision[i] * r.recall[i] / ps;
        r.support[i] = actual;
        r.total += actual;
        trace += tp;
    }
    require(r.total > 0, ErrorKind::Data, "metrics: confusion matrix holds no samples");
    const double dm = static_cast<double>(m);
    r.macro_precision = std::accumulate(r.precision.begin(), r.precision.end(), 0.0) / dm;
    r.macro_recall = std::accumulate(r.recall.begin(), r.recall.end(), 0.0) / dm;
    r.macro_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / dm;
    r.accuracy = ratio(trace, r.total);
    r.confusion = std::move(confusion);
    return r;
}

MetricsReport evaluate(const TrainedModel& model, std::span<const LabeledSegment> validation_set) {
    require(!validation_set.empty(), ErrorKind::Data, "evaluation set is empty");
    const std::size_t m = model.arch.classes();
    std::vector<std::vector<std::size_t>> confusion(m, std::vector<std::size_t>(m, 0));
    for (const auto& s : validation_set) {
        require(s.high_label < m, ErrorKind::Data, "evaluation label out of range");
        ++confusion[s.high_label][predict(model, s.stream)];
    }
    return metrics_from_confusion(std::move(confusion), model.class_names);
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string format_report_text(const MetricsReport& r) {
    std::size_t width = std::string("class average").size();
    for (const auto& n : r.class_names) width = std::max(width, n.size());
    std::ostringstream out;
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
    out << pad("class") << "P       R       F1      support\n";
    for (std::size_t i = 0; i < r.class_names.size(); ++i) {
        out << pad(r.class_names[i]) << fixed4(r.precision[i]) << "  " << fixed4(r.recall[i]) << "  " << fixed4(r.f1[i])
            << "  " << r.support[i] << '\n';
    }
    out << pad("class average") << fixed4(r.macro_precision) << "  " << fixed4(r.macro_recall) << "  "
        << fixed4(r.macro_f1) << "  " << r.total << '\n';
    out << "accuracy " << fixed4(r.accuracy) << '\n';
    out << "confusion (rows = truth, columns = prediction)\n";
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        out << pad(r.class_names[i]);
        for (std::size_t j = 0; j < r.confusion[i].size(); ++j) out << (j ? " " : "") << r.confusion[i][j];
        out << '\n';
    }
    out << "note: precision or recall with an empty denominator is reported as 0\n";
    return std::move(out).str();
}

std::string format_report_kv(const MetricsReport& r) {
    std::ostringstream out;
    out << "classes=";
    for (std::size_t i = 0; i < r.class_names.size(); ++i) out << (i ? "," : "") << r.class_names[i];
    out << '\n';
    for (std::size_t i = 0; i < r.class_names.size(); ++i) {
        const auto& n = r.class_names[i];
        out << "precision." << n << '=' << format_double(r.precision[i]) << '\n';
        out << "recall." << n << '=' << format_double(r.recall[i]) << '\n';
        out << "f1." << n << '=' << format_double(r.f1[i]) << '\n';
        out << "support." << n << '=' << r.support[i] << '\n';
    }
    out << "macro_precision=" << format_double(r.macro_precision) << '\n';
    out << "macro_recall=" << format_double(r.macro_recall) << '\n';
    out << "macro_f1=" << format_double(r.macro_f1) << '\n';
    out << "accuracy=" << format_double(r.accuracy) << '\n';
    out << "total=" << r.total << '\n';
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        out << "confusion." << r.class_names[i] << '=';
        for (std::size_t j = 0; j < r.confusion[i].size(); ++j) out << (j ? "," : "") << r.confusion[i][j];
        out << '\n';
    }
    return std::move(out).str();
}

std::string format_history(const TrainHistory& h) {
    std::ostringstream out;
    out << "epoch,train_loss" << (h.validation_macro_f1.empty() ? "" : ",validation_macro_f1") << '\n';
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
        out << e + 1 << ',' << format_double(h.train_loss[e]);
        if (e < h.validation_macro_f1.size()) out << ',' << format_double(h.validation_macro_f1[e]);
        out << '\n';
    }
    return std::move(out).str();
}

}  // namespace charm
