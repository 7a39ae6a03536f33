#include "charm/neurocore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "charm/error.hpp"

namespace charm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

SeededRng SeededRng::derive(std::uint64_t seed, std::uint64_t index) {
    return SeededRng(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::uint64_t SeededRng::below(std::uint64_t n) {
    // Rejection sampling on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double SeededRng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ParameterSet::ParameterSet(std::vector<LayerShape> shapes) : shapes_(std::move(shapes)) {
    std::size_t total = 0;
    offsets_.reserve(shapes_.size());
    for (const auto& s : shapes_) {
        require(s.in > 0 && s.out > 0, ErrorKind::Shape, "dense layer dimensions must be positive");
        offsets_.push_back(total);
        total += s.parameter_count();
    }
    values_.assign(total, 0.0);
}

DenseLayer ParameterSet::layer(std::size_t i) const {
    const auto& s = shapes_.at(i);
    std::span<const double> all(values_);
    return {s, all.subspan(offsets_[i], s.weight_count()), all.subspan(offsets_[i] + s.weight_count(), s.out)};
}

MutableDenseLayer ParameterSet::layer(std::size_t i) {
    const auto& s = shapes_.at(i);
    std::span<double> all(values_);
    return {s, all.subspan(offsets_[i], s.weight_count()), all.subspan(offsets_[i] + s.weight_count(), s.out)};
}

void ParameterSet::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool ParameterSet::bit_equal(const ParameterSet& other) const noexcept {
    return shapes_ == other.shapes_ && values_.size() == other.values_.size() &&
           (values_.empty() ||
            std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0);
}

std::vector<double> dense_forward(std::span<const double> x, const DenseLayer& layer) {
    require(x.size() == layer.shape.in, ErrorKind::Shape,
            "dense_forward: input has " + std::to_string(x.size()) + " values, layer expects " +
                std::to_string(layer.shape.in));
    std::vector<double> y(layer.shape.out);
    kernels::affine(kernels::active(), layer.weights, layer.bias, x, y);
    return y;
}

std::vector<double> leaky_relu(std::span<const double> x, double slope) {
    std::vector<double> y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [slope](double v) { return leaky_relu(v, slope); });
    return y;
}

std::vector<double> log_softmax(std::span<const double> logits) {
    require(!logits.empty(), ErrorKind::Argument, "softmax of an empty vector");
    for (double v : logits) require(std::isfinite(v), ErrorKind::Argument, "softmax: non-finite logit");
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - top);
    const double log_norm = top + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
    return out;
}

std::vector<double> softmax(std::span<const double> logits) {
    require(!logits.empty(), ErrorKind::Argument, "softmax of an empty vector");
    for (double v : logits) require(std::isfinite(v), ErrorKind::Argument, "softmax: non-finite logit");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

namespace {

void check_loss_args(std::span<const double> logits, std::size_t target, std::span<const double> w) {
    require(target < logits.size(), ErrorKind::Argument,
            "cross-entropy: target " + std::to_string(target) + " out of range for " +
                std::to_string(logits.size()) + " classes");
    require(w.size() == logits.size(), ErrorKind::Shape, "cross-entropy: class weight count mismatch");
    require(w[target] > 0.0, ErrorKind::Argument, "cross-entropy: class weights must be positive");
}

}  // namespace

double weighted_cross_entropy(std::span<const double> logits, std::size_t target,
                              std::span<const double> class_weights) {
    check_loss_args(logits, target, class_weights);
    return -class_weights[target] * log_softmax(logits)[target];
}

std::vector<double> weighted_cross_entropy_gradient(std::span<const double> logits, std::size_t target,
                                                    std::span<const double> class_weights) {
    check_loss_args(logits, target, class_weights);
    std::vector<double> g = softmax(logits);
    g[target] -= 1.0;
    for (double& v : g) v *= class_weights[target];
    return g;
}

DropoutResult dropout(std::span<const double> x, double p, SeededRng& rng, Mode mode) {
    require(p >= 0.0 && p < 1.0, ErrorKind::Argument, "dropout probability must lie in [0, 1)");
    DropoutResult r{std::vector<double>(x.begin(), x.end()), {}};
    if (mode == Mode::Infer || p == 0.0) return r;
    const double keep_scale = 1.0 / (1.0 - p);
    r.scale.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.scale[i] = rng.uniform() < p ? 0.0 : keep_scale;
        r.values[i] *= r.scale[i];
    }
    return r;
}

void init_params(ParameterSet& params, SeededRng& rng) {
    for (std::size_t i = 0; i < params.layer_count(); ++i) {
        auto layer = params.layer(i);
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.shape.in + layer.shape.out));
        for (double& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * bound;
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
}

AdamState::AdamState(std::size_t parameter_count, double lr_, double beta1_, double beta2_, double eps_)
    : first_moment(parameter_count, 0.0),
      second_moment(parameter_count, 0.0),
      lr(lr_),
      beta1(beta1_),
      beta2(beta2_),
      eps(eps_) {
    require(lr > 0.0 && eps > 0.0, ErrorKind::Argument, "Adam: lr and eps must be positive");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::Argument,
            "Adam: betas must lie in [0, 1)");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    adam_step(params, grads, state, kernels::active());
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const kernels::KernelTable& kernels) {
    require(params.size() == grads.size() && params.size() == state.first_moment.size() &&
                params.size() == state.second_moment.size(),
            ErrorKind::Shape, "adam_step: parameter, gradient and moment sizes differ");
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const kernels::AdamCoeffs c{state.lr,
                                state.beta1,
                                state.beta2,
                                state.eps,
                                1.0 - std::pow(state.beta1, t),
                                1.0 - std::pow(state.beta2, t)};
    kernels.adam(params.data(), grads.data(), state.first_moment.data(), state.second_moment.data(),
                 params.size(), c);
}

std::vector<double> stack_forward(const ParameterSet& params, std::span<const StackStage> stages,
                                  std::span<const double> x, const StackOptions& options, Mode mode,
                                  SeededRng& rng, StackTape* tape) {
    const auto& k = kernels::active();
    std::vector<double> current(x.begin(), x.end());
    if (tape) {
        tape->input = current;
        tape->pre.assign(stages.size(), {});
        tape->out.assign(stages.size(), {});
        tape->scale.assign(stages.size(), {});
    }
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const DenseLayer layer = params.layer(stages[s].layer);
        require(current.size() == layer.shape.in, ErrorKind::Shape,
                "stack_forward: stage input has " + std::to_string(current.size()) + " values, layer expects " +
                    std::to_string(layer.shape.in));
        std::vector<double> pre(layer.shape.out);
        kernels::affine(k, layer.weights, layer.bias, current, pre);
        std::vector<double> out = stages[s].activate ? leaky_relu(pre, options.leaky_slope) : pre;
        if (stages[s].dropout) {
            auto d = dropout(out, options.dropout_p, rng, mode);
            out = std::move(d.values);
            if (tape) tape->scale[s] = std::move(d.scale);
        }
        if (tape) tape->pre[s] = std::move(pre);
        current = out;
        if (tape) tape->out[s] = std::move(out);
    }
    return current;
}

void stack_backward(const ParameterSet& params, std::span<const StackStage> stages, const StackTape& tape,
                    std::span<const double> dout, const StackOptions& options, ParameterSet& grads,
                    std::span<double> dinput) {
    const auto& k = kernels::active();
    std::vector<double> delta(dout.begin(), dout.end());
    for (std::size_t s = stages.size(); s-- > 0;) {
        const auto& pre = tape.pre[s];
        const auto& scale = tape.scale[s];
        require(delta.size() == pre.size(), ErrorKind::Shape, "stack_backward: gradient size mismatch");
        for (std::size_t i = 0; i < delta.size(); ++i) {
            if (!scale.empty()) delta[i] *= scale[i];
            if (stages[s].activate) delta[i] *= leaky_relu_derivative(pre[i], options.leaky_slope);
        }
        const std::span<const double> input = s == 0 ? std::span<const double>(tape.input) : tape.out[s - 1];
        auto g = grads.layer(stages[s].layer);
        kernels::outer_accumulate(k, delta, input, g.weights);
        for (std::size_t i = 0; i < delta.size(); ++i) g.bias[i] += delta[i];
        if (s == 0 && dinput.empty()) break;
        std::vector<double> next(input.size(), 0.0);
        kernels::affine_transpose_accumulate(k, params.layer(stages[s].layer).weights, delta, next);
        if (s == 0) {
            require(dinput.size() == next.size(), ErrorKind::Shape, "stack_backward: input gradient size mismatch");
            for (std::size_t i = 0; i < next.size(); ++i) dinput[i] += next[i];
        } else {
            delta = std::move(next);
        }
    }
}

}  // namespace charm
