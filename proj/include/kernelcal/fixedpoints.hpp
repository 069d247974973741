#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "kernelcal/kernel.hpp"

namespace kernelcal::fixedpoints {

// Frozen-kernel objective over a parametric family: the information term
// rewards effective rank of the Gram matrix, the consistency term penalizes
// divergence from the environment kernel.
struct FrozenObjectiveConfig {
    KernelFamily family = KernelFamily::squared_exponential;
    DomainPtr domain;
    Eigen::MatrixXd env_kernel;  // Gram of the true environment kernel on domain
    double noise_var = 0.05;
    double lambda2 = 1.0;  // info multiplier
    double lambda3 = 1.0;  // consistency multiplier
    double fd_step = 1e-5;  // relative finite-difference step
    bool free_amplitude = false;  // theta = (lengthscale) or (lengthscale, amplitude)

    void validate() const;
    int theta_dim() const { return free_amplitude ? 2 : 1; }
};

// Scalar objective with box bounds; the finite-difference machinery and the
// Newton solver only see this shape, so tests can inject synthetic surfaces.
struct Objective {
    std::function<double(const Eigen::VectorXd&)> f;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double fd_step = 1e-5;
};

enum class Stability { stable, unstable, saddle, degenerate };

std::string to_string(Stability s);

struct FixedPointRecord {
    Eigen::VectorXd theta_star;
    double s_star = 0.0;
    double gradient_norm = 0.0;
    Eigen::MatrixXd hessian;
    Stability stability = Stability::degenerate;
};

struct StartDiagnostic {
    Eigen::VectorXd start;
    Eigen::VectorXd final_theta;
    double final_gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FindResult {
    std::vector<FixedPointRecord> points;
    std::vector<StartDiagnostic> diagnostics;
};

struct FindOptions {
    double grad_tol = 1e-8;
    int max_iterations = 200;
    double merge_tol = 1e-4;  // relative
};

// Bounds for the parametric family on this domain: lengthscale in
// [min spacing / 2, 10 x diameter], amplitude (if free) in [1e-2, 1e2].
Eigen::VectorXd lower_bounds(const FrozenObjectiveConfig& cfg);
Eigen::VectorXd upper_bounds(const FrozenObjectiveConfig& cfg);

// S*(theta) = lambda2 * gp_info_gain(gram(theta), s2) - lambda3 * gaussian_kl(gram(theta), env, s2).
double frozen_objective(const Eigen::VectorXd& theta, const FrozenObjectiveConfig& cfg);

Objective make_frozen_objective(const FrozenObjectiveConfig& cfg);

struct GradHessian {
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // symmetrized
};

// Central finite differences with per-coordinate step fd_step * max(1, |theta_i|).
// theta must sit inside the bounds by at least twice the actual step.
GradHessian grad_hessian(const Objective& obj, const Eigen::VectorXd& theta);
GradHessian grad_hessian(const Eigen::VectorXd& theta, const FrozenObjectiveConfig& cfg);

// Stability from Hessian eigenvalues with eig_tol = 1e-6 * max|eig|:
// degenerate if any |eig| <= tol, stable if all < -tol, unstable if all > tol,
// saddle otherwise.
Stability classify_stability(const Eigen::MatrixXd& hessian);

// Damped Newton iteration on the stationarity condition grad S* = 0 from each
// start; converged points deduplicated within merge_tol relative distance.
FindResult find_fixed_points(const Objective& obj, const std::vector<Eigen::VectorXd>& starts,
                             const FindOptions& opts = {});
FindResult find_fixed_points(const FrozenObjectiveConfig& cfg,
                             const std::vector<Eigen::VectorXd>& starts,
                             const FindOptions& opts = {});

// Log-spaced starts strictly inside the 1-D bounds (product grid when the
// amplitude is free).
std::vector<Eigen::VectorXd> default_start_grid(const FrozenObjectiveConfig& cfg, int per_dim = 12);

struct ScanCell {
    int index = 0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::vector<FixedPointRecord> records;
    int stable_count = 0;
    double min_stable_separation = 0.0;  // relative; 0 when fewer than 2 stable points
    std::string error;  // nonempty when this cell failed
};

struct ScanResult {
    std::vector<ScanCell> cells;
};

// Log grid of (lambda2, lambda3) pairs over [lo, hi]^2, row-major in cell index.
std::vector<Eigen::Vector2d> log_lambda_grid(double lo, double hi, int n);

// Runs find_fixed_points per multiplier pair. Failures are recorded in the
// cell diagnostics; the scan itself always completes.
ScanResult bifurcation_scan(const FrozenObjectiveConfig& cfg,
                            const std::vector<Eigen::Vector2d>& lambda_grid,
                            const FindOptions& opts = {});

}  // namespace kernelcal::fixedpoints
