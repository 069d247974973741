#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kernelcal/kernel.hpp"

namespace kernelcal {

// Normalized discrete probability vector.
struct DiscreteDistribution {
    Eigen::VectorXd probs;

    explicit DiscreteDistribution(Eigen::VectorXd p);
    int size() const { return static_cast<int>(probs.size()); }
};

// Information quantity in nats; nonnegative by construction.
struct InfoValue {
    double nats = 0.0;
};

// Gaussian information gain of a noisy design: 1/2 ln det(I + K / noise_var).
// This is the mutual information between the latent field values at the
// design points and their noisy observations. Empty designs carry 0 nats.
InfoValue gp_info_gain(const Eigen::MatrixXd& k_design, double noise_var);
InfoValue gp_info_gain(const KernelMatrix& k_design, double noise_var);

// KL divergence between the zero-mean Gaussians N(0, K_env + s2 I) and
// N(0, K_model + s2 I), with the environment as the data distribution.
InfoValue gaussian_kl(const KernelMatrix& k_model, const KernelMatrix& k_env, double noise_var);
InfoValue gaussian_kl_cov(const Eigen::MatrixXd& k_model, const Eigen::MatrixXd& k_env,
                          double noise_var);

// Hellinger affinity sum_i sqrt(p_i q_i); a PSD kernel over distributions.
double hellinger_kernel(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Parametric discrete family theta -> p_theta used by the Fisher-Rao metric.
using DiscreteFamily = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Fisher information matrix g_ij = sum_x d(ln p)/dtheta_i d(ln p)/dtheta_j p(x)
// with scores from central differences of relative width `step`. The family
// must be strictly positive componentwise around theta.
Eigen::MatrixXd fisher_rao_metric(const DiscreteFamily& family, const Eigen::VectorXd& theta,
                                  double step = 1e-5);

}  // namespace kernelcal
