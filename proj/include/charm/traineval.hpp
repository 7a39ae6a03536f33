#pragma once

// Training loop (batch size 1, Adam, class-weighted cross-entropy) and
// the precision/recall/F1 evaluation harness.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "charm/dataset.hpp"
#include "charm/model.hpp"

namespace charm {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 1;
    double lr = 5e-4;
    std::uint64_t seed = 42;
    bool shuffle = true;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;           // mean weighted loss per epoch
    std::vector<double> validation_macro_f1;  // per epoch; empty without a validation set
};

/// Inverse-frequency weights scaled to mean 1.
std::vector<double> compute_class_weights(std::span<const std::size_t> label_counts,
                                          std::span<const std::string> class_names = {});

struct TrainResult {
    TrainedModel model;
    TrainHistory history;
};

/// Samples must already have the architecture's fixed length. Fits the
/// normaliser on `train`, initialises from `config.seed`, and runs one Adam
/// step per sample. `validation_set`, when given, is scored after every epoch.
TrainResult train(std::span<const LabeledSegment> train_set, const Architecture& arch,
                  const std::vector<std::string>& class_names, const TrainConfig& config,
                  std::span<const LabeledSegment> validation_set = {});

/// Initialised but untrained model with statistics fitted on `train_set`.
TrainedModel untrained_model(std::span<const LabeledSegment> train_set, const Architecture& arch,
                             const std::vector<std::string>& class_names, std::uint64_t seed);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Class probabilities for one raw (unnormalised) sample, inference mode.
std::vector<double> predict_proba(const TrainedModel& model, const SensorStream& sample);
std::size_t predict(const TrainedModel& model, const SensorStream& sample);

struct MetricsReport {
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::size_t> support;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t total = 0;
};

/// Precision/recall/F1 from a confusion matrix. 0/0 is taken as 0.
MetricsReport metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion,
                                     std::vector<std::string> class_names = {});

MetricsReport evaluate(const TrainedModel& model, std::span<const LabeledSegment> validation_set);

/// Per-class table with a class-average row, accuracy and confusion matrix.
std::string format_report_text(const MetricsReport& report);
/// key=value lines at full precision.
std::string format_report_kv(const MetricsReport& report);

std::string format_history(const TrainHistory& history);

}  // namespace charm
