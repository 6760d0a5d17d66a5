#pragma once

#include <vector>

#include "opev/sac.hpp"

namespace opev::divergence {

using sac::GaussianPolicyHead;
using sac::Tensor2;

/// Settings for the divergent-adversary term: number of adversarial models,
/// the target pairwise divergence, and the linearly decaying weight.
struct DivergenceConfig {
    std::size_t n_adversaries = 2;
    double c_kl = 1.0;
    double alpha_start = 1.0;
    double alpha_end = 0.0;

    void validate() const;
};

/// Closed-form KL between diagonal Gaussians, summed over dims, for one row
/// of a batch head pair.
double kl_divergence_diag_gaussian_row(const GaussianPolicyHead& p, const GaussianPolicyHead& q,
                                       std::size_t row);

/// Batch mean of the row-wise KL.
double mean_kl(const GaussianPolicyHead& p, const GaussianPolicyHead& q);

/// Divergence loss for policy i against the other policies' heads on the
/// same states: mean over states of  alpha/(n-1) * sum_{j != i}
/// (c_kl - KL(pi_i || pi_j))^2.  Gradients flow only into policy i; the
/// other heads are constants. Returns the loss and d/d(mean_i),
/// d/d(log_std_i).
struct DivergenceLoss {
    double value = 0.0;
    Tensor2 d_mean;
    Tensor2 d_log_std;
};

DivergenceLoss divergence_loss(const GaussianPolicyHead& own,
                               const std::vector<GaussianPolicyHead>& others, double c_kl,
                               double alpha);

/// Linear interpolation alpha_start -> alpha_end over phase-1 steps.
double alpha_at(std::size_t step, std::size_t phase1_steps, const DivergenceConfig& cfg);

/// Entry (i, j) = mean over probe states of KL(pi_i(.|s) || pi_j(.|s)).
std::vector<std::vector<double>> pairwise_policy_divergence(
    const std::vector<const sac::Agent*>& agents, const Tensor2& probe_states);

/// Mean of the off-diagonal entries of a divergence matrix.
double mean_off_diagonal(const std::vector<std::vector<double>>& matrix);

}  // namespace opev::divergence
