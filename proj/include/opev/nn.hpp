#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opev/rng.hpp"
#include "opev/tensor.hpp"

namespace opev::nn {

enum class Act { Relu, Tanh, Sine, Linear };

std::string act_name(Act a);
Act act_from_name(const std::string& name);

double act_apply(Act a, double z);
/// Derivative at pre-activation z.
double act_deriv(Act a, double z);

/// Architecture of a dense network: layer_widths[0] is the input width,
/// layer_widths.back() the output width. Hidden layers use `hidden`,
/// the last layer uses `output`.
struct MlpSpec {
    std::vector<std::size_t> layer_widths;
    Act hidden = Act::Relu;
    Act output = Act::Linear;

    void validate() const;
    std::size_t n_layers() const { return layer_widths.size() - 1; }
    std::size_t in_width() const { return layer_widths.front(); }
    std::size_t out_width() const { return layer_widths.back(); }

    bool operator==(const MlpSpec&) const = default;
};

struct Grads {
    std::vector<Tensor2> w;  // one per layer, shaped like the weights
    std::vector<Tensor2> b;
    Tensor2 input;  // dL/dinput, for chaining through critics into actions
};

class Mlp;

/// Records one forward pass: the inputs feeding each layer and the
/// pre-activations. Consumed exactly once by backward().
class GradTape {
public:
    const Tensor2& output() const { return layer_in_.back(); }

private:
    friend class Mlp;
    std::vector<Tensor2> layer_in_;   // n_layers+1 entries; last = network output
    std::vector<Tensor2> pre_act_;    // n_layers entries
    bool consumed_ = false;
};

class Mlp {
public:
    Mlp() = default;
    Mlp(MlpSpec spec, Rng& rng);  // uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases
    static Mlp from_params(MlpSpec spec, std::vector<Tensor2> w, std::vector<Tensor2> b);

    const MlpSpec& spec() const { return spec_; }

    /// Inference path, no tape.
    Tensor2 forward(const Tensor2& input) const;
    /// Training path; tape feeds backward().
    Tensor2 forward(const Tensor2& input, GradTape& tape) const;

    /// Reverse pass. Consumes the tape; reuse raises StateError. Callers
    /// that do not chain into earlier computations skip the input gradient.
    Grads backward(GradTape& tape, const Tensor2& output_grad, bool want_input_grad = true) const;

    std::size_t n_params() const;
    std::vector<Tensor2>& weights() { return w_; }
    std::vector<Tensor2>& biases() { return b_; }
    const std::vector<Tensor2>& weights() const { return w_; }
    const std::vector<Tensor2>& biases() const { return b_; }

    /// FNV-1a over the raw parameter bytes; freeze audits compare these.
    std::uint64_t param_hash() const;

private:
    MlpSpec spec_;
    std::vector<Tensor2> w_;  // layer l: (width[l] x width[l+1])
    std::vector<Tensor2> b_;  // layer l: (1 x width[l+1])
};

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 10.0;  // global-norm gradient clip, applied before the step
};

/// Moment accumulators for one parameter set (weights + biases of one net,
/// or any list of tensors).
struct AdamState {
    std::int64_t step = 0;
    std::vector<Tensor2> m;
    std::vector<Tensor2> v;

    static AdamState like(const std::vector<Tensor2>& params);
};

/// Global L2 norm over a list of gradient tensors.
double global_norm(const std::vector<Tensor2>& grads);

/// In-place scale so the global norm is at most clip_norm. Returns the
/// pre-clip norm.
double clip_by_global_norm(std::vector<Tensor2>& grads, double clip_norm);

/// One Adam update. `params` and `grads` are parallel lists shaped like
/// `state.m`. Throws OptimizerError on non-finite gradients.
void adam_step(AdamState& state, std::vector<Tensor2*> params, const std::vector<Tensor2>& grads,
               const AdamConfig& cfg);

/// Moments shaped like a net's [weights..., biases...] list.
AdamState adam_state_for(const Mlp& net);

/// Convenience: clip then step a whole Mlp. Consumes `grads`.
void adam_step_net(AdamState& state, Mlp& net, Grads& grads, const AdamConfig& cfg);

}  // namespace opev::nn
