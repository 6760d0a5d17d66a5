#include "opev/nn.hpp"

#include <cmath>

#include "opev/kernels.hpp"

namespace opev::nn {

std::string act_name(Act a) {
    switch (a) {
        case Act::Relu: return "relu";
        case Act::Tanh: return "tanh";
        case Act::Sine: return "sine";
        case Act::Linear: return "linear";
    }
    return "?";
}

Act act_from_name(const std::string& name) {
    if (name == "relu") return Act::Relu;
    if (name == "tanh") return Act::Tanh;
    if (name == "sine") return Act::Sine;
    if (name == "linear") return Act::Linear;
    throw ConfigError("unknown activation: " + name);
}

double act_apply(Act a, double z) {
    switch (a) {
        case Act::Relu: return z > 0.0 ? z : 0.0;
        case Act::Tanh: return std::tanh(z);
        case Act::Sine: return std::sin(z);
        case Act::Linear: return z;
    }
    return z;
}

double act_deriv(Act a, double z) {
    switch (a) {
        case Act::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Act::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Act::Sine: return std::cos(z);
        case Act::Linear: return 1.0;
    }
    return 1.0;
}

void MlpSpec::validate() const {
    if (layer_widths.size() < 2) throw ConfigError("MlpSpec: need at least 2 layers");
    for (std::size_t w : layer_widths)
        if (w < 1) throw ConfigError("MlpSpec: zero-width layer");
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    for (std::size_t l = 0; l + 1 < spec_.layer_widths.size(); ++l) {
        const std::size_t fan_in = spec_.layer_widths[l];
        const std::size_t fan_out = spec_.layer_widths[l + 1];
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        Tensor2 w(fan_in, fan_out);
        for (double& x : w.vec()) x = rng.uniform(-bound, bound);
        w_.push_back(std::move(w));
        b_.emplace_back(1, fan_out, 0.0);
    }
}

Mlp Mlp::from_params(MlpSpec spec, std::vector<Tensor2> w, std::vector<Tensor2> b) {
    spec.validate();
    if (w.size() != spec.n_layers() || b.size() != spec.n_layers())
        throw DimensionError("Mlp::from_params: layer count mismatch");
    for (std::size_t l = 0; l < w.size(); ++l) {
        if (w[l].rows() != spec.layer_widths[l] || w[l].cols() != spec.layer_widths[l + 1] ||
            b[l].rows() != 1 || b[l].cols() != spec.layer_widths[l + 1])
            throw DimensionError("Mlp::from_params: tensor shape mismatch");
    }
    Mlp net;
    net.spec_ = std::move(spec);
    net.w_ = std::move(w);
    net.b_ = std::move(b);
    return net;
}

namespace {

// Branch on the activation once, outside the element loop, so the relu path
// vectorizes and the transcendental paths stay a single libm call per entry.
void apply_act_rows(Act a, const Tensor2& pre, Tensor2& out) {
    const std::size_t n = pre.size();
    const double* __restrict z = pre.data();
    double* __restrict y = out.data();
    switch (a) {
        case Act::Linear:
            std::copy(z, z + n, y);
            break;
        case Act::Relu:
            for (std::size_t i = 0; i < n; ++i) y[i] = z[i] > 0.0 ? z[i] : 0.0;
            break;
        case Act::Tanh:
            for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(z[i]);
            break;
        case Act::Sine:
            for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(z[i]);
            break;
    }
}

void scale_by_act_deriv(Act a, const Tensor2& pre, Tensor2& delta) {
    const std::size_t n = delta.size();
    double* __restrict d = delta.data();
    const double* __restrict z = pre.data();
    switch (a) {
        case Act::Linear:
            break;
        case Act::Relu:
            for (std::size_t i = 0; i < n; ++i) d[i] = z[i] > 0.0 ? d[i] : 0.0;
            break;
        case Act::Tanh:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = std::tanh(z[i]);
                d[i] *= 1.0 - t * t;
            }
            break;
        case Act::Sine:
            for (std::size_t i = 0; i < n; ++i) d[i] *= std::cos(z[i]);
            break;
    }
}

}  // namespace

Tensor2 Mlp::forward(const Tensor2& input) const {
    if (input.cols() != spec_.in_width()) throw DimensionError("Mlp::forward: input width mismatch");
    Tensor2 cur = input;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Tensor2 pre(cur.rows(), w_[l].cols());
        kernels::matmul(cur, w_[l], pre);
        kernels::add_bias(pre, b_[l], pre);
        const Act a = (l + 1 == w_.size()) ? spec_.output : spec_.hidden;
        apply_act_rows(a, pre, pre);
        cur = std::move(pre);
    }
    return cur;
}

Tensor2 Mlp::forward(const Tensor2& input, GradTape& tape) const {
    if (input.cols() != spec_.in_width()) throw DimensionError("Mlp::forward: input width mismatch");
    tape.layer_in_.clear();
    tape.pre_act_.clear();
    tape.consumed_ = false;
    tape.layer_in_.push_back(input);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        const Tensor2& cur = tape.layer_in_.back();
        Tensor2 pre(cur.rows(), w_[l].cols());
        kernels::matmul(cur, w_[l], pre);
        kernels::add_bias(pre, b_[l], pre);
        const Act a = (l + 1 == w_.size()) ? spec_.output : spec_.hidden;
        Tensor2 post(pre.rows(), pre.cols());
        apply_act_rows(a, pre, post);
        tape.pre_act_.push_back(std::move(pre));
        tape.layer_in_.push_back(std::move(post));
    }
    return tape.layer_in_.back();
}

Grads Mlp::backward(GradTape& tape, const Tensor2& output_grad, bool want_input_grad) const {
    if (tape.consumed_) throw StateError("GradTape already consumed");
    if (tape.pre_act_.size() != w_.size()) throw StateError("GradTape does not match this net");
    if (!output_grad.same_shape(tape.layer_in_.back()))
        throw DimensionError("Mlp::backward: output_grad shape mismatch");
    tape.consumed_ = true;

    Grads g;
    g.w.resize(w_.size());
    g.b.resize(w_.size());

    // delta = dL/d(pre-activation) of the current layer, walked back to front.
    Tensor2 delta = output_grad;
    for (std::size_t li = w_.size(); li-- > 0;) {
        const Act a = (li + 1 == w_.size()) ? spec_.output : spec_.hidden;
        scale_by_act_deriv(a, tape.pre_act_[li], delta);

        // dW = X^T * delta, db = column sums of delta, dX = delta * W^T.
        Tensor2 xt = kernels::transpose(tape.layer_in_[li]);
        g.w[li] = Tensor2(w_[li].rows(), w_[li].cols());
        kernels::matmul(xt, delta, g.w[li]);

        g.b[li] = Tensor2(1, b_[li].cols());
        double* db = g.b[li].row(0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const double* drow = delta.row(r);
            for (std::size_t c = 0; c < delta.cols(); ++c) db[c] += drow[c];
        }

        if (li == 0 && !want_input_grad) break;
        Tensor2 wt = kernels::transpose(w_[li]);
        Tensor2 dx(delta.rows(), w_[li].rows());
        kernels::matmul(delta, wt, dx);
        delta = std::move(dx);
    }
    if (want_input_grad) g.input = std::move(delta);
    return g;
}

std::size_t Mlp::n_params() const {
    std::size_t n = 0;
    for (const auto& w : w_) n += w.size();
    for (const auto& b : b_) n += b.size();
    return n;
}

std::uint64_t Mlp::param_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const Tensor2& t) {
        const unsigned char* bytes = reinterpret_cast<const unsigned char*>(t.data());
        const std::size_t n = t.size() * sizeof(double);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& w : w_) mix(w);
    for (const auto& b : b_) mix(b);
    return h;
}

AdamState AdamState::like(const std::vector<Tensor2>& params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(p.rows(), p.cols(), 0.0);
        s.v.emplace_back(p.rows(), p.cols(), 0.0);
    }
    return s;
}

double global_norm(const std::vector<Tensor2>& grads) {
    double sq = 0.0;
    for (const auto& g : grads)
        for (double x : g.vec()) sq += x * x;
    return std::sqrt(sq);
}

double clip_by_global_norm(std::vector<Tensor2>& grads, double clip_norm) {
    const double norm = global_norm(grads);
    if (clip_norm > 0.0 && norm > clip_norm) {
        const double scale = clip_norm / norm;
        for (auto& g : grads)
            for (double& x : g.vec()) x *= scale;
    }
    return norm;
}

void adam_step(AdamState& state, std::vector<Tensor2*> params, const std::vector<Tensor2>& grads,
               const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw DimensionError("adam_step: parameter/gradient list mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].all_finite()) throw OptimizerError("adam_step: non-finite gradient");
        if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.m[i]))
            throw DimensionError("adam_step: shape mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        double* p = params[i]->data();
        const double* g = grads[i].data();
        double* m = state.m[i].data();
        double* v = state.v[i].data();
        const std::size_t n = grads[i].size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

AdamState adam_state_for(const Mlp& net) {
    std::vector<Tensor2> all;
    for (const auto& w : net.weights()) all.push_back(w);
    for (const auto& b : net.biases()) all.push_back(b);
    return AdamState::like(all);
}

void adam_step_net(AdamState& state, Mlp& net, Grads& grads, const AdamConfig& cfg) {
    std::vector<Tensor2> all;
    all.reserve(grads.w.size() + grads.b.size());
    for (auto& g : grads.w) all.push_back(std::move(g));
    for (auto& g : grads.b) all.push_back(std::move(g));
    clip_by_global_norm(all, cfg.clip_norm);
    std::vector<Tensor2*> params;
    for (auto& w : net.weights()) params.push_back(&w);
    for (auto& b : net.biases()) params.push_back(&b);
    adam_step(state, params, all, cfg);
}

}  // namespace opev::nn
