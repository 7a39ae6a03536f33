#pragma once

// The two-stage CHARM classifier, the MLP baseline, low-level embedding
// extraction and checkpoint persistence.
//
// CHARM parameter layers, in storage order:
//   0  low encoder layer 1   [low_hidden, r*q]
//   1  low encoder layer 2   [low_out, low_hidden]
//   2  high encoder layer 1  [high_hidden, z*low_out]
//   3  high encoder layer 2  [classes, high_hidden]
// The low encoder is applied with the same parameters to each of the z
// windows; its outputs are concatenated window-major into the high encoder
// input.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "charm/neurocore.hpp"
#include "charm/preprocess.hpp"

namespace charm {

struct CharmConfig {
    std::size_t window = 16;       // r, samples per window
    std::size_t channels = 18;     // q
    std::size_t low_hidden = 32;
    std::size_t low_out = 32;      // q', low-level feature width
    std::size_t windows = 160;     // z
    std::size_t high_hidden = 32;
    std::size_t classes = 4;       // m
    double dropout_p = 0.05;
    double leaky_slope = 0.01;
    bool low_output_activation = true;

    std::size_t sequence_length() const noexcept { return window * windows; }
    std::vector<LayerShape> layer_shapes() const;
    void validate() const;
    bool operator==(const CharmConfig&) const = default;
};

struct MlpConfig {
    std::size_t layers = 4;  // affine layers
    std::size_t hidden = 16;
    std::size_t sequence_length = 2560;
    std::size_t channels = 18;
    std::size_t classes = 4;
    double dropout_p = 0.05;
    double leaky_slope = 0.01;

    std::size_t input_dim() const noexcept { return sequence_length * channels; }
    std::vector<LayerShape> layer_shapes() const;
    void validate() const;
    bool operator==(const MlpConfig&) const = default;
};

enum class ModelKind { Charm, Mlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct Architecture {
    ModelKind kind = ModelKind::Charm;
    CharmConfig charm;
    MlpConfig mlp;

    std::vector<LayerShape> layer_shapes() const;
    std::size_t classes() const noexcept;
    std::size_t sequence_length() const noexcept;
    std::size_t channels() const noexcept;
    void validate() const;
};

/// Sum of in*out + out over the layers.
std::size_t parameter_count(std::span<const LayerShape> shapes);

/// Zero-initialised parameters shaped for the architecture.
ParameterSet make_params(const Architecture& arch);

/// Activations recorded by forward_logits for backward_logits.
struct ForwardTape {
    std::vector<StackTape> low;   // one per window (CHARM)
    StackTape high;               // high encoder (CHARM) or the whole MLP
    std::vector<double> low_features;
};

/// `sample` is a normalised [n_target, q] row-major sequence.
std::vector<double> forward_logits(const Architecture& arch, const ParameterSet& params,
                                   std::span<const double> sample, Mode mode, SeededRng& rng,
                                   ForwardTape* tape = nullptr);

void backward_logits(const Architecture& arch, const ParameterSet& params, const ForwardTape& tape,
                     std::span<const double> dlogits, ParameterSet& grads, std::span<double> dinput = {});

/// Weighted cross-entropy of one sample; accumulates its gradient into `grads`.
double loss_and_gradient(const Architecture& arch, const ParameterSet& params, std::span<const double> sample,
                         std::size_t target, std::span<const double> class_weights, Mode mode, SeededRng& rng,
                         ParameterSet& grads, std::span<double> dinput = {});

struct CharmOutput {
    std::vector<double> probs;
    std::vector<double> low_features;  // [z, q'] row-major
};

CharmOutput charm_forward(const CharmConfig& config, const ParameterSet& params, std::span<const double> sample,
                          Mode mode, SeededRng& rng);

std::vector<double> mlp_forward(const MlpConfig& config, const ParameterSet& params, std::span<const double> sample,
                                Mode mode, SeededRng& rng);

/// Applies only the low-level encoder (inference mode) to k windows of
/// shape [r, q]; returns [k, q'] row-major.
std::vector<double> extract_low_level_embeddings(const CharmConfig& config, const ParameterSet& params,
                                                 std::span<const double> windows);

/// Everything needed to run inference: architecture, class order,
/// training-set channel statistics and weights.
struct TrainedModel {
    Architecture arch;
    std::vector<std::string> class_names;
    ChannelStats stats;
    ParameterSet params;
};

inline constexpr std::string_view kCheckpointMagic = "CHARM1";
inline constexpr int kCheckpointVersion = 1;

/// Byte layout:
///   "CHARM1\n"
///   text header, one "key value..." line each, terminated by "end\n"
///   weights: parameter_count little-endian IEEE-754 doubles, layer order
///   trailer: 8-byte little-endian FNV-1a 64 of every preceding byte
std::string serialize_checkpoint(const TrainedModel& model);
TrainedModel parse_checkpoint(std::string_view bytes);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace charm
