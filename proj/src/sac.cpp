#include "opev/sac.hpp"

#include <cmath>

#include "opev/errors.hpp"

namespace opev::sac {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr double kSquashEps = 1e-6;
}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
    if (capacity_ == 0) throw ValidationError("ReplayBuffer: capacity must be > 0");
    s_.resize(capacity_ * obs_dim_);
    a_.resize(capacity_ * act_dim_);
    s2_.resize(capacity_ * obs_dim_);
    r_.resize(capacity_);
    d_.resize(capacity_);
}

void ReplayBuffer::push(const Transition& t) {
    if (t.s.size() != obs_dim_ || t.s2.size() != obs_dim_ || t.a.size() != act_dim_)
        throw DimensionError("ReplayBuffer::push: dimension mismatch");
    std::copy(t.s.begin(), t.s.end(), s_.begin() + cursor_ * obs_dim_);
    std::copy(t.a.begin(), t.a.end(), a_.begin() + cursor_ * act_dim_);
    std::copy(t.s2.begin(), t.s2.end(), s2_.begin() + cursor_ * obs_dim_);
    r_[cursor_] = t.r;
    d_[cursor_] = t.d ? 1 : 0;
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::sample(Rng& rng, std::size_t batch_size) const {
    if (size_ == 0) throw StateError("ReplayBuffer::sample: empty buffer");
    Batch b;
    b.s = Tensor2(batch_size, obs_dim_);
    b.a = Tensor2(batch_size, act_dim_);
    b.r = Tensor2(batch_size, 1);
    b.s2 = Tensor2(batch_size, obs_dim_);
    b.d = Tensor2(batch_size, 1);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t idx = rng.below(size_);
        std::copy(s_.begin() + idx * obs_dim_, s_.begin() + (idx + 1) * obs_dim_, b.s.row(i));
        std::copy(a_.begin() + idx * act_dim_, a_.begin() + (idx + 1) * act_dim_, b.a.row(i));
        std::copy(s2_.begin() + idx * obs_dim_, s2_.begin() + (idx + 1) * obs_dim_, b.s2.row(i));
        b.r(i, 0) = r_[idx];
        b.d(i, 0) = d_[idx];
    }
    return b;
}

Transition ReplayBuffer::get(std::size_t idx) const {
    if (idx >= size_) throw StateError("ReplayBuffer::get: index out of range");
    Transition t;
    t.s.assign(s_.begin() + idx * obs_dim_, s_.begin() + (idx + 1) * obs_dim_);
    t.a.assign(a_.begin() + idx * act_dim_, a_.begin() + (idx + 1) * act_dim_);
    t.s2.assign(s2_.begin() + idx * obs_dim_, s2_.begin() + (idx + 1) * obs_dim_);
    t.r = r_[idx];
    t.d = d_[idx] != 0;
    return t;
}

Agent::Agent(SacConfig cfg, std::size_t obs_dim, std::size_t act_dim,
             std::vector<double> obs_scale, std::uint64_t seed)
    : cfg_(cfg), obs_dim_(obs_dim), act_dim_(act_dim), obs_scale_(std::move(obs_scale)),
      rng_(seed), log_alpha_(cfg.init_log_alpha) {
    if (obs_scale_.empty()) obs_scale_.assign(obs_dim_, 1.0);
    if (obs_scale_.size() != obs_dim_) throw DimensionError("Agent: obs_scale length mismatch");

    std::vector<std::size_t> actor_widths{obs_dim_};
    std::vector<std::size_t> critic_widths{obs_dim_ + act_dim_};
    for (std::size_t i = 0; i < cfg_.hidden_depth; ++i) {
        actor_widths.push_back(cfg_.hidden_width);
        critic_widths.push_back(cfg_.hidden_width);
    }
    actor_widths.push_back(2 * act_dim_);
    critic_widths.push_back(1);

    actor_ = Mlp({actor_widths, cfg_.hidden_act, Act::Linear}, rng_);
    q1_ = Mlp({critic_widths, cfg_.hidden_act, Act::Linear}, rng_);
    q2_ = Mlp({critic_widths, cfg_.hidden_act, Act::Linear}, rng_);
    q1t_ = q1_;
    q2t_ = q2_;

    opt_actor_ = nn::adam_state_for(actor_);
    opt_actor_extra_ = nn::adam_state_for(actor_);
    opt_q1_ = nn::adam_state_for(q1_);
    opt_q2_ = nn::adam_state_for(q2_);
    opt_alpha_ = nn::AdamState::like({Tensor2(1, 1)});
    adam_.lr = cfg_.lr;
    adam_.clip_norm = cfg_.clip_norm;
}

Tensor2 Agent::scale_obs(const Tensor2& raw) const {
    Tensor2 out = raw;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] *= obs_scale_[c];
    }
    return out;
}

Tensor2 Agent::critic_input(const Tensor2& scaled_obs, const Tensor2& actions) const {
    Tensor2 x(scaled_obs.rows(), obs_dim_ + act_dim_);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double* row = x.row(r);
        std::copy(scaled_obs.row(r), scaled_obs.row(r) + obs_dim_, row);
        std::copy(actions.row(r), actions.row(r) + act_dim_, row + obs_dim_);
    }
    return x;
}

GaussianPolicyHead Agent::head_from_trunk(const Tensor2& trunk_out) const {
    const std::size_t b = trunk_out.rows();
    GaussianPolicyHead head;
    head.mean = Tensor2(b, act_dim_);
    head.log_std = Tensor2(b, act_dim_);
    for (std::size_t r = 0; r < b; ++r) {
        const double* z = trunk_out.row(r);
        for (std::size_t k = 0; k < act_dim_; ++k) {
            head.mean(r, k) = nn::act_apply(cfg_.mean_act, z[k]);
            head.log_std(r, k) =
                std::clamp(z[act_dim_ + k], cfg_.log_std_min, cfg_.log_std_max);
        }
    }
    return head;
}

GaussianPolicyHead Agent::policy_head(const Tensor2& raw_obs) const {
    return head_from_trunk(actor_.forward(scale_obs(raw_obs)));
}

ActionSample Agent::sample_action(const std::vector<double>& obs, SampleMode mode) {
    if (obs.size() != obs_dim_) throw DimensionError("sample_action: obs dim mismatch");
    Tensor2 x(1, obs_dim_, obs);
    GaussianPolicyHead head = policy_head(x);

    ActionSample out;
    out.action.resize(act_dim_);
    if (mode == SampleMode::Deterministic) {
        const bool bounded = cfg_.mean_act == Act::Tanh || cfg_.mean_act == Act::Sine;
        for (std::size_t k = 0; k < act_dim_; ++k)
            out.action[k] = bounded ? head.mean(0, k) : std::tanh(head.mean(0, k));
        return out;
    }
    double logp = 0.0;
    for (std::size_t k = 0; k < act_dim_; ++k) {
        const double eps = rng_.normal();
        const double sigma = std::exp(head.log_std(0, k));
        const double pre = head.mean(0, k) + sigma * eps;
        const double a = std::tanh(pre);
        out.action[k] = a;
        logp += -0.5 * eps * eps - head.log_std(0, k) - 0.5 * kLog2Pi -
                std::log(1.0 - a * a + kSquashEps);
    }
    out.log_prob = logp;
    return out;
}

double Agent::critic_update(const Batch& batch) {
    const std::size_t b = batch.size();

    // Bellman targets from the target critics and a fresh policy sample.
    GaussianPolicyHead next = policy_head(batch.s2);
    Tensor2 a2(b, act_dim_);
    Tensor2 logp2(b, 1, 0.0);
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t k = 0; k < act_dim_; ++k) {
            const double eps = rng_.normal();
            const double sigma = std::exp(next.log_std(r, k));
            const double pre = next.mean(r, k) + sigma * eps;
            const double a = std::tanh(pre);
            a2(r, k) = a;
            logp2(r, 0) += -0.5 * eps * eps - next.log_std(r, k) - 0.5 * kLog2Pi -
                           std::log(1.0 - a * a + kSquashEps);
        }
    }
    const Tensor2 s2_scaled = scale_obs(batch.s2);
    const Tensor2 x2 = critic_input(s2_scaled, a2);
    const Tensor2 q1n = q1t_.forward(x2);
    const Tensor2 q2n = q2t_.forward(x2);

    const double alpha_ent = alpha();
    Tensor2 y(b, 1);
    for (std::size_t r = 0; r < b; ++r) {
        const double minq = std::min(q1n(r, 0), q2n(r, 0));
        y(r, 0) = batch.r(r, 0) +
                  cfg_.gamma * (1.0 - batch.d(r, 0)) * (minq - alpha_ent * logp2(r, 0));
    }
    if (!y.all_finite()) {
        ++skipped_updates_;
        return std::nan("");
    }

    const Tensor2 x = critic_input(scale_obs(batch.s), batch.a);
    double loss = 0.0;
    for (Mlp* critic : {&q1_, &q2_}) {
        nn::GradTape tape;
        const Tensor2 q = critic->forward(x, tape);
        Tensor2 dq(b, 1);
        for (std::size_t r = 0; r < b; ++r) {
            const double err = q(r, 0) - y(r, 0);
            loss += err * err;
            dq(r, 0) = 2.0 * err / static_cast<double>(b);
        }
        nn::Grads g = critic->backward(tape, dq, /*want_input_grad=*/false);
        nn::adam_step_net(critic == &q1_ ? opt_q1_ : opt_q2_, *critic, g, adam_);
    }
    return loss / static_cast<double>(2 * b);
}

std::pair<double, std::optional<double>> Agent::actor_update(const Batch& batch,
                                                             const ExtraLossFn* extra) {
    const std::size_t b = batch.size();
    const Tensor2 s_scaled = scale_obs(batch.s);

    nn::GradTape actor_tape;
    const Tensor2 trunk = actor_.forward(s_scaled, actor_tape);
    GaussianPolicyHead head = head_from_trunk(trunk);

    // Reparameterized sample with the noise held fixed for the gradient.
    Tensor2 eps(b, act_dim_), act(b, act_dim_), sigma(b, act_dim_);
    Tensor2 logp(b, 1, 0.0);
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t k = 0; k < act_dim_; ++k) {
            const double e = rng_.normal();
            const double sg = std::exp(head.log_std(r, k));
            const double a = std::tanh(head.mean(r, k) + sg * e);
            eps(r, k) = e;
            sigma(r, k) = sg;
            act(r, k) = a;
            logp(r, 0) += -0.5 * e * e - head.log_std(r, k) - 0.5 * kLog2Pi -
                          std::log(1.0 - a * a + kSquashEps);
        }
    }

    // Q(s, a) through both critics; the row-wise min drives the loss.
    const Tensor2 xq = critic_input(s_scaled, act);
    nn::GradTape t1, t2;
    const Tensor2 qv1 = q1_.forward(xq, t1);
    const Tensor2 qv2 = q2_.forward(xq, t2);

    const double alpha_ent = alpha();
    const double inv_b = 1.0 / static_cast<double>(b);
    double loss = 0.0;
    double mean_logp = 0.0;
    Tensor2 dq1(b, 1, 0.0), dq2(b, 1, 0.0);
    for (std::size_t r = 0; r < b; ++r) {
        const double minq = std::min(qv1(r, 0), qv2(r, 0));
        loss += alpha_ent * logp(r, 0) - minq;
        mean_logp += logp(r, 0);
        // d(-minq)/dq with the 1/B batch mean folded in.
        if (qv1(r, 0) <= qv2(r, 0))
            dq1(r, 0) = -inv_b;
        else
            dq2(r, 0) = -inv_b;
    }
    loss *= inv_b;
    mean_logp *= inv_b;
    last_mean_logp_ = mean_logp;

    nn::Grads gq1 = q1_.backward(t1, dq1);
    nn::Grads gq2 = q2_.backward(t2, dq2);

    // dL/d(mean), dL/d(log_std), then chained through the head activations
    // into the trunk's 2d-wide output.
    Tensor2 dtrunk(b, 2 * act_dim_, 0.0);
    const Tensor2& trunk_pre = trunk;  // trunk output is linear: pre == post
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t k = 0; k < act_dim_; ++k) {
            const double a = act(r, k);
            const double one_m_a2 = 1.0 - a * a;
            const double dq_da =
                gq1.input(r, obs_dim_ + k) + gq2.input(r, obs_dim_ + k);  // includes -1/B
            const double dlogp_da = 2.0 * a / (one_m_a2 + kSquashEps);
            const double dl_da = alpha_ent * inv_b * dlogp_da + dq_da;
            const double dl_dpre = dl_da * one_m_a2;

            const double dl_dmean = dl_dpre;
            const double dl_dlogstd = dl_dpre * sigma(r, k) * eps(r, k) - alpha_ent * inv_b;

            // Mean head activation chain; trunk output itself is linear.
            const double u = trunk_pre(r, k);
            dtrunk(r, k) = dl_dmean * nn::act_deriv(cfg_.mean_act, u);
            const double v = trunk_pre(r, act_dim_ + k);
            const bool pass = v > cfg_.log_std_min && v < cfg_.log_std_max;
            dtrunk(r, act_dim_ + k) = pass ? dl_dlogstd : 0.0;
        }
    }

    nn::Grads ga = actor_.backward(actor_tape, dtrunk, /*want_input_grad=*/false);
    nn::adam_step_net(opt_actor_, actor_, ga, adam_);

    std::optional<double> extra_value;
    if (extra && *extra) {
        // Second pass at the already-updated parameters, separate optimizer
        // state: a zero extra gradient leaves the actor bit-identical.
        nn::GradTape tape2;
        const Tensor2 trunk2 = actor_.forward(s_scaled, tape2);
        GaussianPolicyHead head2 = head_from_trunk(trunk2);
        ExtraLoss el = (*extra)(batch.s, head2);
        extra_value = el.value;
        if (!el.d_mean.same_shape(head2.mean) || !el.d_log_std.same_shape(head2.log_std))
            throw DimensionError("actor_update: extra loss gradient shape mismatch");
        Tensor2 dtrunk2(b, 2 * act_dim_, 0.0);
        for (std::size_t r = 0; r < b; ++r) {
            for (std::size_t k = 0; k < act_dim_; ++k) {
                const double u = trunk2(r, k);
                dtrunk2(r, k) = el.d_mean(r, k) * nn::act_deriv(cfg_.mean_act, u);
                const double v = trunk2(r, act_dim_ + k);
                const bool pass = v > cfg_.log_std_min && v < cfg_.log_std_max;
                dtrunk2(r, act_dim_ + k) = pass ? el.d_log_std(r, k) : 0.0;
            }
        }
        nn::Grads g2 = actor_.backward(tape2, dtrunk2, /*want_input_grad=*/false);
        nn::adam_step_net(opt_actor_extra_, actor_, g2, adam_);
    }
    return {loss, extra_value};
}

double Agent::temperature_update() {
    // Dual gradient on log_alpha toward E[-log pi] = target_entropy.
    const double grad = -(last_mean_logp_ + cfg_.target_entropy);
    Tensor2 p(1, 1, {log_alpha_});
    std::vector<Tensor2> g{Tensor2(1, 1, {grad})};
    nn::AdamConfig acfg = adam_;
    acfg.clip_norm = 0.0;
    std::vector<Tensor2*> params{&p};
    nn::adam_step(opt_alpha_, params, g, acfg);
    log_alpha_ = p(0, 0);
    return log_alpha_;
}

void Agent::soft_update_targets() {
    auto blend = [this](Mlp& online, Mlp& target) {
        for (std::size_t l = 0; l < online.weights().size(); ++l) {
            double* t = target.weights()[l].data();
            const double* o = online.weights()[l].data();
            for (std::size_t i = 0; i < online.weights()[l].size(); ++i)
                t[i] = cfg_.tau * o[i] + (1.0 - cfg_.tau) * t[i];
            double* tb = target.biases()[l].data();
            const double* ob = online.biases()[l].data();
            for (std::size_t i = 0; i < online.biases()[l].size(); ++i)
                tb[i] = cfg_.tau * ob[i] + (1.0 - cfg_.tau) * tb[i];
        }
    };
    blend(q1_, q1t_);
    blend(q2_, q2t_);
}

UpdateStats Agent::update(const Batch& batch, const ExtraLossFn* extra) {
    UpdateStats stats;
    stats.critic_loss = critic_update(batch);
    auto [actor_loss, extra_loss] = actor_update(batch, extra);
    stats.actor_loss = actor_loss;
    stats.extra_loss = extra_loss;
    temperature_update();
    soft_update_targets();
    stats.alpha = alpha();
    stats.entropy_estimate = -last_mean_logp_;
    stats.skipped_updates = skipped_updates_;
    return stats;
}

std::uint64_t Agent::param_hash() const {
    std::uint64_t h = actor_.param_hash();
    h ^= q1_.param_hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= q2_.param_hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace opev::sac
