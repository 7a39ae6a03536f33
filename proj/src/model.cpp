#include "charm/model.hpp"

#include <array>

#include "charm/error.hpp"

namespace charm {

namespace {

constexpr std::size_t kLow1 = 0;
constexpr std::size_t kLow2 = 1;
constexpr std::size_t kHigh1 = 2;
constexpr std::size_t kHigh2 = 3;

std::array<StackStage, 2> low_stages(const CharmConfig& c) {
    return {StackStage{kLow1, true, true}, StackStage{kLow2, c.low_output_activation, false}};
}

constexpr std::array<StackStage, 2> kHighStages{StackStage{kHigh1, true, true}, StackStage{kHigh2, false, false}};

std::vector<StackStage> mlp_stages(const MlpConfig& c) {
    std::vector<StackStage> stages;
    for (std::size_t i = 0; i < c.layers; ++i) {
        const bool hidden = i + 1 < c.layers;
        stages.push_back({i, hidden, hidden});
    }
    return stages;
}

void check_sample(std::span<const double> sample, std::size_t n, std::size_t q) {
    require(sample.size() == n * q, ErrorKind::Shape,
            "sample has " + std::to_string(sample.size()) + " values, model expects [" + std::to_string(n) + ", " +
                std::to_string(q) + "]");
}

}  // namespace

std::vector<LayerShape> CharmConfig::layer_shapes() const {
    return {{window * channels, low_hidden},
            {low_hidden, low_out},
            {windows * low_out, high_hidden},
            {high_hidden, classes}};
}

void CharmConfig::validate() const {
    require(window > 0 && channels > 0 && low_hidden > 0 && low_out > 0 && windows > 0 && high_hidden > 0,
            ErrorKind::Config, "charm: all dimensions must be positive");
    require(classes >= 2, ErrorKind::Config, "charm: at least two classes are required");
    require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorKind::Config, "charm: dropout_p must lie in [0, 1)");
    require(leaky_slope >= 0.0, ErrorKind::Config, "charm: leaky_slope must be non-negative");
}

std::vector<LayerShape> MlpConfig::layer_shapes() const {
    std::vector<LayerShape> shapes;
    for (std::size_t i = 0; i < layers; ++i) {
        shapes.push_back({i == 0 ? input_dim() : hidden, i + 1 == layers ? classes : hidden});
    }
    return shapes;
}

void MlpConfig::validate() const {
    require(layers >= 1 && hidden > 0 && sequence_length > 0 && channels > 0, ErrorKind::Config,
            "mlp: all dimensions must be positive");
    require(classes >= 2, ErrorKind::Config, "mlp: at least two classes are required");
    require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorKind::Config, "mlp: dropout_p must lie in [0, 1)");
    require(leaky_slope >= 0.0, ErrorKind::Config, "mlp: leaky_slope must be non-negative");
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Charm ? "charm" : "mlp"; }

ModelKind parse_model_kind(std::string_view name) {
    if (name == "charm") return ModelKind::Charm;
    if (name == "mlp") return ModelKind::Mlp;
    fail(ErrorKind::Config, "unknown model kind '" + std::string(name) + "' (expected charm or mlp)");
}

std::vector<LayerShape> Architecture::layer_shapes() const {
    return kind == ModelKind::Charm ? charm.layer_shapes() : mlp.layer_shapes();
}
std::size_t Architecture::classes() const noexcept { return kind == ModelKind::Charm ? charm.classes : mlp.classes; }
std::size_t Architecture::sequence_length() const noexcept {
    return kind == ModelKind::Charm ? charm.sequence_length() : mlp.sequence_length;
}
std::size_t Architecture::channels() const noexcept {
    return kind == ModelKind::Charm ? charm.channels : mlp.channels;
}
void Architecture::validate() const {
    if (kind == ModelKind::Charm) {
        charm.validate();
    } else {
        mlp.validate();
    }
}

std::size_t parameter_count(std::span<const LayerShape> shapes) {
    std::size_t n = 0;
    for (const auto& s : shapes) n += s.parameter_count();
    return n;
}

ParameterSet make_params(const Architecture& arch) {
    arch.validate();
    return ParameterSet(arch.layer_shapes());
}

std::vector<double> forward_logits(const Architecture& arch, const ParameterSet& params,
                                   std::span<const double> sample, Mode mode, SeededRng& rng, ForwardTape* tape) {
    check_sample(sample, arch.sequence_length(), arch.channels());
    if (arch.kind == ModelKind::Mlp) {
        const auto stages = mlp_stages(arch.mlp);
        const StackOptions opts{arch.mlp.leaky_slope, arch.mlp.dropout_p};
        return stack_forward(params, stages, sample, opts, mode, rng, tape ? &tape->high : nullptr);
    }
    const CharmConfig& c = arch.charm;
    const StackOptions opts{c.leaky_slope, c.dropout_p};
    const auto low = low_stages(c);
    const std::size_t window_size = c.window * c.channels;
    std::vector<double> features;
    features.reserve(c.windows * c.low_out);
    if (tape) tape->low.assign(c.windows, {});
    for (std::size_t t = 0; t < c.windows; ++t) {
        const auto w = sample.subspan(t * window_size, window_size);
        auto l = stack_forward(params, low, w, opts, mode, rng, tape ? &tape->low[t] : nullptr);
        features.insert(features.end(), l.begin(), l.end());
    }
    auto logits = stack_forward(params, kHighStages, features, opts, mode, rng, tape ? &tape->high : nullptr);
    if (tape) tape->low_features = std::move(features);
    return logits;
}

void backward_logits(const Architecture& arch, const ParameterSet& params, const ForwardTape& tape,
                     std::span<const double> dlogits, ParameterSet& grads, std::span<double> dinput) {
    if (arch.kind == ModelKind::Mlp) {
        const auto stages = mlp_stages(arch.mlp);
        const StackOptions opts{arch.mlp.leaky_slope, arch.mlp.dropout_p};
        stack_backward(params, stages, tape.high, dlogits, opts, grads, dinput);
        return;
    }
    const CharmConfig& c = arch.charm;
    const StackOptions opts{c.leaky_slope, c.dropout_p};
    std::vector<double> dfeatures(c.windows * c.low_out, 0.0);
    stack_backward(params, kHighStages, tape.high, dlogits, opts, grads, dfeatures);
    const auto low = low_stages(c);
    const std::size_t window_size = c.window * c.channels;
    require(tape.low.size() == c.windows, ErrorKind::Shape, "backward: tape does not match configuration");
    require(dinput.empty() || dinput.size() == c.windows * window_size, ErrorKind::Shape,
            "backward: input gradient size mismatch");
    for (std::size_t t = 0; t < c.windows; ++t) {
        const auto d = std::span<const double>(dfeatures).subspan(t * c.low_out, c.low_out);
        stack_backward(params, low, tape.low[t], d, opts, grads,
                       dinput.empty() ? std::span<double>{} : dinput.subspan(t * window_size, window_size));
    }
}

double loss_and_gradient(const Architecture& arch, const ParameterSet& params, std::span<const double> sample,
                         std::size_t target, std::span<const double> class_weights, Mode mode, SeededRng& rng,
                         ParameterSet& grads, std::span<double> dinput) {
    ForwardTape tape;
    const auto logits = forward_logits(arch, params, sample, mode, rng, &tape);
    const double loss = weighted_cross_entropy(logits, target, class_weights);
    const auto dlogits = weighted_cross_entropy_gradient(logits, target, class_weights);
    backward_logits(arch, params, tape, dlogits, grads, dinput);
    return loss;
}

CharmOutput charm_forward(const CharmConfig& config, const ParameterSet& params, std::span<const double> sample,
                          Mode mode, SeededRng& rng) {
    Architecture arch{ModelKind::Charm, config, {}};
    ForwardTape tape;
    const auto logits = forward_logits(arch, params, sample, mode, rng, &tape);
    return {softmax(logits), std::move(tape.low_features)};
}

std::vector<double> mlp_forward(const MlpConfig& config, const ParameterSet& params, std::span<const double> sample,
                                Mode mode, SeededRng& rng) {
    Architecture arch{ModelKind::Mlp, {}, config};
    return softmax(forward_logits(arch, params, sample, mode, rng));
}

std::vector<double> extract_low_level_embeddings(const CharmConfig& config, const ParameterSet& params,
                                                 std::span<const double> windows) {
    const std::size_t window_size = config.window * config.channels;
    require(!windows.empty() && windows.size() % window_size == 0, ErrorKind::Shape,
            "embeddings: input is not a whole number of [" + std::to_string(config.window) + ", " +
                std::to_string(config.channels) + "] windows");
    const StackOptions opts{config.leaky_slope, config.dropout_p};
    const auto low = low_stages(config);
    SeededRng unused(0);
    std::vector<double> out;
    out.reserve(windows.size() / window_size * config.low_out);
    for (std::size_t off = 0; off < windows.size(); off += window_size) {
        auto l = stack_forward(params, low, windows.subspan(off, window_size), opts, Mode::Infer, unused);
        out.insert(out.end(), l.begin(), l.end());
    }
    return out;
}

}  // namespace charm
