#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace kernelcal::paths {

// Finite-family path-measure problem in discrete time. A path visits one of
// m kernels at each of T+1 epochs; the reference process is Markov with
// initial distribution pi0 and row-stochastic transition matrix q. Paths are
// reweighted by exp(-lambda_c * switches + lambda_g * cumulative info).
struct PathMeasureSpec {
    int m = 2;
    int T = 1;
    Eigen::VectorXd pi0;   // m
    Eigen::MatrixXd q;     // m x m, rows sum to 1
    Eigen::VectorXd info;  // m, nats per epoch under kernel i
    double lambda_c = 0.0;
    double lambda_g = 0.0;

    void validate() const;

    static PathMeasureSpec uniform(int m, int T, Eigen::VectorXd info,
                                   double lambda_c = 0.0, double lambda_g = 0.0);
};

struct Trajectory {
    std::vector<int> states;  // T+1 kernel indices
};

// Gibbs path measure summary: normalizer and exact marginals.
struct GibbsPathMeasure {
    double ln_z = 0.0;
    Eigen::MatrixXd node_marginals;               // (T+1) x m
    std::vector<Eigen::MatrixXd> pair_marginals;  // T of m x m
    double expected_switch_cost = 0.0;
    double expected_info = 0.0;
};

// Exhaustive measure over all m^(T+1) paths; the brute-force oracle.
// Path index i encodes states via base-m digits, epoch 0 least significant.
struct EnumeratedMeasure {
    PathMeasureSpec spec;
    std::vector<double> log_weights;  // -inf for zero-weight paths
    std::vector<double> probs;
    double ln_z = 0.0;
    Eigen::MatrixXd node_marginals;
    std::vector<Eigen::MatrixXd> pair_marginals;
    double expected_switch_cost = 0.0;
    double expected_info = 0.0;
    double path_entropy = 0.0;  // direct -sum p ln(p/q)

    Trajectory decode(std::size_t index) const;
};

struct TransitionOdds {
    double one_step = 0.0;           // weight-ratio odds from the displayed dynamics
    double exact_conditional = 0.0;  // Gibbs conditional odds from pair marginals
};

struct CalibrationResult {
    double lambda_c = 0.0;
    double lambda_g = 0.0;
    int iterations = 0;
    double residual_c = 0.0;
    double residual_g = 0.0;
};

// Switching count C and cumulative information G of one path.
int switch_count(const Trajectory& traj);
double cumulative_info(const PathMeasureSpec& spec, const Trajectory& traj);

// Unnormalized path weight pi0(k0) prod q(k_{t+1}|k_t) exp(-lc C + lg G).
// Paths stepping through zero reference probability get weight 0.
double path_weight(const PathMeasureSpec& spec, const Trajectory& traj);
double log_path_weight(const PathMeasureSpec& spec, const Trajectory& traj);

// Exact enumeration; guarded to m^(T+1) <= 2^20 paths.
EnumeratedMeasure enumerate_paths(const PathMeasureSpec& spec);

// Transfer-matrix forward/backward solve, O(T m^2), all in log space.
GibbsPathMeasure transfer_solve(const PathMeasureSpec& spec);

// Transition odds at epoch t (t < T): the one-step weight ratio
// (q(to|from)/q(from|from)) exp(-lc 1[to!=from] + lg (I_to - I_from)) and the
// exact Gibbs conditional odds. They coincide at t = T-1.
TransitionOdds transition_odds(const PathMeasureSpec& spec, int t, int from_state, int to_state);

// Path entropy S[P] = -sum_paths P ln(P/Q) = lc E[C] - lg E[G] + lnZ; <= 0.
double path_entropy(const PathMeasureSpec& spec);

// Forward-filter backward-sample; deterministic given seed.
std::vector<Trajectory> sample_paths(const PathMeasureSpec& spec, int n, std::uint64_t seed);

// Solve for multipliers reproducing target expectations E[C], E[G] under the
// reference chain of `spec` (its lambda fields are ignored). Damped Newton
// with a monotone bisection fallback.
CalibrationResult calibrate_multipliers(const PathMeasureSpec& spec, double target_switch_cost,
                                        double target_info);

}  // namespace kernelcal::paths
