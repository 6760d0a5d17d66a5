#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "opev/nn.hpp"
#include "opev/rng.hpp"
#include "opev/tensor.hpp"

namespace opev::sac {

using nn::Act;
using nn::Mlp;
using opev::Tensor2;

/// Diagonal-Gaussian action distribution parameters for a batch of states.
/// `mean` is post-activation (the variant's bounded head), `log_std` is
/// clamped to the configured range.
struct GaussianPolicyHead {
    Tensor2 mean;     // B x action_dim
    Tensor2 log_std;  // B x action_dim
};

struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s2;
    bool d = false;  // terminal flag; truncations store false and bootstrap
};

struct Batch {
    Tensor2 s, a, r, s2, d;
    std::size_t size() const { return s.rows(); }
};

/// Fixed-capacity ring with uniform sampling over the filled region.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim);

    void push(const Transition& t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t obs_dim() const { return obs_dim_; }

    Batch sample(Rng& rng, std::size_t batch_size) const;
    /// Direct row access (oldest entries are overwritten first).
    Transition get(std::size_t idx) const;

private:
    std::size_t capacity_, obs_dim_, act_dim_;
    std::size_t cursor_ = 0, size_ = 0;
    std::vector<double> s_, a_, s2_;
    std::vector<double> r_;
    std::vector<unsigned char> d_;
};

struct SacConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double lr = 3e-4;
    std::size_t batch_size = 256;
    std::size_t buffer_capacity = 500000;
    std::size_t warmup_steps = 5000;
    std::size_t update_every = 1;
    double target_entropy = -6.0;  // "low": -2 * action_dim
    std::size_t hidden_width = 256;
    std::size_t hidden_depth = 2;
    Act hidden_act = Act::Relu;
    Act mean_act = Act::Linear;  // the variant-dependent output head
    double log_std_min = -5.0;
    double log_std_max = 2.0;
    double clip_norm = 10.0;
    double init_log_alpha = 0.0;
};

enum class SampleMode { Stochastic, Deterministic };

struct ActionSample {
    std::vector<double> action;  // in [-1, 1]^d
    double log_prob = 0.0;       // only meaningful for stochastic samples
};

/// Hook for an additional actor loss evaluated on the same batch after the
/// RL step (the divergence term plugs in here). Receives the batch states
/// and the current policy head; returns the loss value and its gradients
/// w.r.t. the head parameters.
struct ExtraLoss {
    double value = 0.0;
    Tensor2 d_mean;
    Tensor2 d_log_std;
};
using ExtraLossFn = std::function<ExtraLoss(const Tensor2& states, const GaussianPolicyHead& head)>;

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    std::optional<double> extra_loss;
    double alpha = 0.0;
    double entropy_estimate = 0.0;  // mean(-log pi)
    std::size_t skipped_updates = 0;
};

/// Soft actor-critic agent: squashed diagonal-Gaussian actor, twin critics
/// with target copies, and automatic entropy temperature.
class Agent {
public:
    Agent(SacConfig cfg, std::size_t obs_dim, std::size_t act_dim,
          std::vector<double> obs_scale, std::uint64_t seed);

    const SacConfig& config() const { return cfg_; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t act_dim() const { return act_dim_; }

    GaussianPolicyHead policy_head(const Tensor2& raw_obs) const;

    ActionSample sample_action(const std::vector<double>& obs, SampleMode mode);

    double critic_update(const Batch& batch);
    /// SAC objective step, then (when present) the extra-loss step on the
    /// same batch with its own optimizer state.
    std::pair<double, std::optional<double>> actor_update(const Batch& batch,
                                                          const ExtraLossFn* extra = nullptr);
    double temperature_update();  // uses log-probs cached by actor_update
    void soft_update_targets();

    /// One full update tick: critics, actor (+hook), temperature, targets.
    UpdateStats update(const Batch& batch, const ExtraLossFn* extra = nullptr);

    double alpha() const { return std::exp(log_alpha_); }
    double log_alpha() const { return log_alpha_; }

    std::uint64_t actor_hash() const { return actor_.param_hash(); }
    std::uint64_t param_hash() const;
    std::size_t skipped_updates() const { return skipped_updates_; }

    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
    Rng& rng() { return rng_; }

    // Checkpoint plumbing.
    Mlp& actor() { return actor_; }
    Mlp& q1() { return q1_; }
    Mlp& q2() { return q2_; }
    Mlp& q1_target() { return q1t_; }
    Mlp& q2_target() { return q2t_; }
    const Mlp& actor() const { return actor_; }
    const std::vector<double>& obs_scale() const { return obs_scale_; }
    nn::AdamState& opt_actor() { return opt_actor_; }
    nn::AdamState& opt_actor_extra() { return opt_actor_extra_; }
    nn::AdamState& opt_q1() { return opt_q1_; }
    nn::AdamState& opt_q2() { return opt_q2_; }
    nn::AdamState& opt_alpha() { return opt_alpha_; }
    void set_log_alpha(double v) { log_alpha_ = v; }

private:
    Tensor2 scale_obs(const Tensor2& raw) const;
    Tensor2 critic_input(const Tensor2& scaled_obs, const Tensor2& actions) const;
    GaussianPolicyHead head_from_trunk(const Tensor2& trunk_out) const;

    SacConfig cfg_;
    std::size_t obs_dim_, act_dim_;
    std::vector<double> obs_scale_;
    Rng rng_;

    Mlp actor_;       // obs -> 2*act_dim, linear trunk output
    Mlp q1_, q2_, q1t_, q2t_;
    double log_alpha_;

    nn::AdamState opt_actor_, opt_actor_extra_, opt_q1_, opt_q2_, opt_alpha_;
    nn::AdamConfig adam_;

    double last_mean_logp_ = 0.0;
    std::size_t skipped_updates_ = 0;
};

}  // namespace opev::sac
