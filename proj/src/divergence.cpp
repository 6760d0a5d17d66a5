#include "opev/divergence.hpp"

#include <cmath>

#include "opev/errors.hpp"

namespace opev::divergence {

void DivergenceConfig::validate() const {
    if (n_adversaries < 1) throw ValidationError("DivergenceConfig: need n >= 1");
    if (c_kl < 0.0) throw ValidationError("DivergenceConfig: c_kl must be >= 0");
    if (alpha_start < 0.0 || alpha_end < 0.0)
        throw ValidationError("DivergenceConfig: alpha must be >= 0");
}

double kl_divergence_diag_gaussian_row(const GaussianPolicyHead& p, const GaussianPolicyHead& q,
                                       std::size_t row) {
    if (p.mean.cols() != q.mean.cols()) throw DimensionError("kl: dim mismatch");
    double kl = 0.0;
    for (std::size_t k = 0; k < p.mean.cols(); ++k) {
        const double lp = p.log_std(row, k);
        const double lq = q.log_std(row, k);
        const double vp = std::exp(2.0 * lp);
        const double vq = std::exp(2.0 * lq);
        const double dm = p.mean(row, k) - q.mean(row, k);
        kl += lq - lp + (vp + dm * dm) / (2.0 * vq) - 0.5;
    }
    return kl;
}

double mean_kl(const GaussianPolicyHead& p, const GaussianPolicyHead& q) {
    if (p.mean.rows() != q.mean.rows()) throw DimensionError("mean_kl: batch mismatch");
    double acc = 0.0;
    for (std::size_t r = 0; r < p.mean.rows(); ++r)
        acc += kl_divergence_diag_gaussian_row(p, q, r);
    return acc / static_cast<double>(p.mean.rows());
}

DivergenceLoss divergence_loss(const GaussianPolicyHead& own,
                               const std::vector<GaussianPolicyHead>& others, double c_kl,
                               double alpha) {
    const std::size_t b = own.mean.rows();
    const std::size_t d = own.mean.cols();
    DivergenceLoss out;
    out.d_mean = Tensor2(b, d, 0.0);
    out.d_log_std = Tensor2(b, d, 0.0);
    if (others.empty()) return out;  // n = 1: the loss is defined as 0

    const double w = alpha / static_cast<double>(others.size());
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t r = 0; r < b; ++r) {
        for (const GaussianPolicyHead& other : others) {
            const double kl = kl_divergence_diag_gaussian_row(own, other, r);
            const double resid = c_kl - kl;
            out.value += w * resid * resid * inv_b;
            // d(loss)/d(kl) = -2 w resid / B; chain into own's head, treating
            // the other policy as a constant.
            const double dkl = -2.0 * w * resid * inv_b;
            for (std::size_t k = 0; k < d; ++k) {
                const double vq = std::exp(2.0 * other.log_std(r, k));
                const double vp = std::exp(2.0 * own.log_std(r, k));
                const double dm = own.mean(r, k) - other.mean(r, k);
                out.d_mean(r, k) += dkl * dm / vq;
                out.d_log_std(r, k) += dkl * (vp / vq - 1.0);
            }
        }
    }
    return out;
}

double alpha_at(std::size_t step, std::size_t phase1_steps, const DivergenceConfig& cfg) {
    if (phase1_steps == 0) return cfg.alpha_end;
    const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(phase1_steps));
    return cfg.alpha_start + (cfg.alpha_end - cfg.alpha_start) * t;
}

std::vector<std::vector<double>> pairwise_policy_divergence(
    const std::vector<const sac::Agent*>& agents, const Tensor2& probe_states) {
    const std::size_t n = agents.size();
    std::vector<GaussianPolicyHead> heads;
    heads.reserve(n);
    for (const sac::Agent* a : agents) heads.push_back(a->policy_head(probe_states));

    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) m[i][j] = mean_kl(heads[i], heads[j]);
    return m;
}

double mean_off_diagonal(const std::vector<std::vector<double>>& matrix) {
    const std::size_t n = matrix.size();
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) acc += matrix[i][j];
    return acc / static_cast<double>(n * (n - 1));
}

}  // namespace opev::divergence
