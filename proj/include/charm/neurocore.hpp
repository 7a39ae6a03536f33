#pragma once

// Small differentiable core for the fixed dense architectures in this
// project: parameter storage, affine layers, leaky ReLU, softmax, weighted
// cross-entropy, inverted dropout, reverse-mode gradients and Adam.
// Everything is 64-bit floating point.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "charm/kernels.hpp"

namespace charm {

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; all conversions to floating point and
/// bounded integers are done here rather than through <random>
/// distributions, whose algorithms are implementation-defined.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Independent stream for (seed, index), e.g. per generated segment.
    static SeededRng derive(std::uint64_t seed, std::uint64_t index);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

struct LayerShape {
    std::size_t in = 0;
    std::size_t out = 0;

    std::size_t weight_count() const noexcept { return in * out; }
    std::size_t parameter_count() const noexcept { return in * out + out; }
    bool operator==(const LayerShape&) const = default;
};

/// Read-only view of one affine layer: weights row-major [out, in], bias [out].
struct DenseLayer {
    LayerShape shape;
    std::span<const double> weights;
    std::span<const double> bias;
};

struct MutableDenseLayer {
    LayerShape shape;
    std::span<double> weights;
    std::span<double> bias;
};

/// Contiguous storage for a sequence of dense layers. Layer i occupies
/// [weights_i, bias_i] and layers follow each other in index order; this is
/// the flat order used by the optimizer and by checkpoints.
class ParameterSet {
  public:
    ParameterSet() = default;
    explicit ParameterSet(std::vector<LayerShape> shapes);

    std::size_t layer_count() const noexcept { return shapes_.size(); }
    const std::vector<LayerShape>& shapes() const noexcept { return shapes_; }
    DenseLayer layer(std::size_t i) const;
    MutableDenseLayer layer(std::size_t i);

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    ParameterSet zeros_like() const { return ParameterSet(shapes_); }
    void fill(double value);

    /// Bitwise equality of shapes and every stored double.
    bool bit_equal(const ParameterSet& other) const noexcept;

  private:
    std::vector<LayerShape> shapes_;
    std::vector<std::size_t> offsets_;
    std::vector<double> values_;
};

enum class Mode { Train, Infer };

inline constexpr double kDefaultLeakySlope = 0.01;

std::vector<double> dense_forward(std::span<const double> x, const DenseLayer& layer);

inline double leaky_relu(double x, double slope = kDefaultLeakySlope) noexcept {
    return x >= 0.0 ? x : slope * x;
}
inline double leaky_relu_derivative(double x, double slope = kDefaultLeakySlope) noexcept {
    return x >= 0.0 ? 1.0 : slope;
}
std::vector<double> leaky_relu(std::span<const double> x, double slope = kDefaultLeakySlope);

std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

/// -class_weights[target] * log softmax(logits)[target], evaluated in log space.
double weighted_cross_entropy(std::span<const double> logits, std::size_t target,
                              std::span<const double> class_weights);

/// d(loss)/d(logits) = w[target] * (softmax(logits) - onehot(target)).
std::vector<double> weighted_cross_entropy_gradient(std::span<const double> logits, std::size_t target,
                                                    std::span<const double> class_weights);

struct DropoutResult {
    std::vector<double> values;
    /// Per-element multiplier applied: 0 for dropped, 1/(1-p) for kept.
    /// Empty when dropout was the identity.
    std::vector<double> scale;
};

/// Inverted dropout. Identity when p == 0 or mode == Infer.
DropoutResult dropout(std::span<const double> x, double p, SeededRng& rng, Mode mode);

/// Uniform Glorot initialisation of every weight, zero biases.
void init_params(ParameterSet& params, SeededRng& rng);

struct AdamState {
    std::uint64_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(std::size_t parameter_count, double lr, double beta1 = 0.9, double beta2 = 0.999,
              double eps = 1e-8);
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const kernels::KernelTable& kernels);

// ---------------------------------------------------------------------------
// Layer stacks with recorded activations for reverse mode.

/// One affine layer of a stack, optionally followed by leaky ReLU and then dropout.
struct StackStage {
    std::size_t layer;
    bool activate;
    bool dropout;
};

struct StackOptions {
    double leaky_slope = kDefaultLeakySlope;
    double dropout_p = 0.0;
};

/// Everything backward() needs from one forward pass through a stack.
struct StackTape {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;    // affine output per stage
    std::vector<std::vector<double>> out;    // stage output after activation/dropout
    std::vector<std::vector<double>> scale;  // dropout multipliers; empty = none
};

std::vector<double> stack_forward(const ParameterSet& params, std::span<const StackStage> stages,
                                  std::span<const double> x, const StackOptions& options, Mode mode,
                                  SeededRng& rng, StackTape* tape = nullptr);

/// Accumulates parameter gradients into `grads` (same shapes as the
/// parameters). When `dinput` is non-empty, adds d(loss)/d(input) to it.
void stack_backward(const ParameterSet& params, std::span<const StackStage> stages, const StackTape& tape,
                    std::span<const double> dout, const StackOptions& options, ParameterSet& grads,
                    std::span<double> dinput = {});

}  // namespace charm
