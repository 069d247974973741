#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kernelcal/domain.hpp"
#include "kernelcal/kernel.hpp"

namespace kernelcal::bloom {

struct Blob {
    Eigen::Vector2d center;
    double amplitude = 1.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
};

struct FlowField {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    Eigen::Matrix2d shear = Eigen::Matrix2d::Zero();
};

// Advecting Gaussian-blob field on [0,1]^2. The subsurface channel is the
// surface field read at a fixed spatial offset, so the two channels
// decorrelate once the offset exceeds the kernel lengthscale.
struct BloomWorld {
    DomainPtr grid;
    std::vector<Blob> blobs;
    FlowField flow;
    Eigen::Vector2d subsurface_offset = Eigen::Vector2d(0.15, 0.0);
    int t = 0;
    std::uint64_t rng_seed = 0;

    void validate() const;
    double surface(const Eigen::Vector2d& x) const;
    double subsurface(const Eigen::Vector2d& x) const;
};

// Each blob center advances by v + shear * center per unit step; blob shapes
// are carried rigidly.
BloomWorld step_environment(const BloomWorld& world);

enum class CoordState { docked, undocked };

struct AgentState {
    Eigen::Vector2d asv_pos = Eigen::Vector2d(0.5, 0.5);
    Eigen::Vector2d auv_pos = Eigen::Vector2d(0.5, 0.5);
    CoordState sigma = CoordState::docked;
    int dive_elapsed = 0;
    double energy_remaining = 0.0;
    int samples_collected = 0;
};

struct MissionBudget {
    double e_max = 10.0;
    int n_max = 5;
    double c_move_unit = 1.0;   // energy per unit ASV distance
    double c_dive_step = 0.05;  // energy per dive step
    int tau_dive = 4;           // steps per vertical profile
    double delta_meet = 0.12;   // rendezvous radius
    Eigen::Vector2d base_pos = Eigen::Vector2d(0.5, 0.5);
    int horizon_steps = 60;
    double c_collect = 0.05;  // energy per physical sample
    double move_step = 0.05;  // ASV step h per tick

    void validate() const;
};

// Lexicographic tie-break order is the enum value order.
enum class Action {
    stay = 0,
    move_e,
    move_ne,
    move_n,
    move_nw,
    move_w,
    move_sw,
    move_s,
    move_se,
    return_to_base,
    collect,
    undock,
    redock,
};

std::string to_string(Action a);

struct ActionGeometry {
    Eigen::Vector2d next_asv;
    double energy_cost = 0.0;  // move or collect cost; dive charges are separate
};

ActionGeometry action_geometry(Action a, const AgentState& agent, const MissionBudget& budget);

// Admission: return reserve c_move * dist(next, base) plus remaining dive
// charges must stay covered, moves must remain in [0,1]^2, and an undocked
// ASV may not leave the rendezvous radius around the diving AUV.
// "stay" is always admitted and a direct step toward base is always admitted
// while docked, so the set is never empty.
std::vector<Action> feasible_actions(const AgentState& agent, const MissionBudget& budget,
                                     const BloomWorld& world);

enum class Channel { surface, subsurface };

struct Observation {
    Eigen::Vector2d pos;  // physical position of the reading
    Channel channel = Channel::surface;
    double value = 0.0;
    double noise_var = 0.05;
};

struct KernelFamilyConfig {
    double ell_a = 0.3;  // smooth member
    double ell_b = 0.1;  // front-tracking member
    double amplitude = 1.0;
    double sigma2_surface = 0.05;
    double sigma2_subsurface = 0.01;
    double sigma2_sample = 0.001;  // lab-grade analysis of collected samples

    void validate() const;
};

// GP belief over the shared latent field. Surface readings at x condition the
// latent at x; subsurface readings condition it at x - offset. The Cholesky
// cache is rebuilt lazily after observations or kernel switches.
class Belief {
  public:
    Belief(KernelFamilyConfig family, Eigen::Vector2d subsurface_offset, int kernel_id = 0);

    int kernel_id() const { return kernel_id_; }
    void set_kernel(int id);
    KernelSpec kernel_spec(int id) const;
    const std::vector<Observation>& observations() const { return obs_; }
    void add_observation(const Observation& o);
    const KernelFamilyConfig& family() const { return family_; }
    const Eigen::Vector2d& offset() const { return offset_; }

    Eigen::Vector2d latent_site(const Eigen::Vector2d& pos, Channel channel) const;

    // Posterior of the latent field at query sites (rows), under kernel_id()
    // unless an explicit kernel is requested.
    void posterior(const Eigen::MatrixXd& sites, Eigen::VectorXd& mean,
                   Eigen::VectorXd& var) const;
    Eigen::MatrixXd posterior_cov(const Eigen::MatrixXd& sites) const;
    Eigen::MatrixXd posterior_cov_under(int kernel_id, const Eigen::MatrixXd& sites) const;

    // 1/2 ln(1 + var_f(site) / obs_noise) for a single new reading.
    double info_gain(const Eigen::Vector2d& pos, Channel channel, double obs_noise) const;

    int jitter_events() const { return jitter_events_; }

  private:
    struct Cache;
    const Cache& cache() const;
    Cache build_cache(int kernel_id) const;

    KernelFamilyConfig family_;
    Eigen::Vector2d offset_;
    int kernel_id_;
    std::vector<Observation> obs_;
    mutable std::shared_ptr<const Cache> cache_;
    mutable int jitter_events_ = 0;
};

struct PlannerWeights {
    double lambda_e = 1.0;  // energy multiplier
    double lambda_n = 0.0;  // sample-count multiplier
};

struct PlannedAction {
    Action action = Action::stay;
    double score = 0.0;
    double info_gain = 0.0;
    double energy_cost = 0.0;
    Eigen::Vector2d obs_pos = Eigen::Vector2d::Zero();
    Channel obs_channel = Channel::surface;
    double obs_noise = 0.05;
};

// Greedy argmax of info_gain - lambda_E * energy - lambda_N * 1[collect] over
// the feasible set; ties broken by least energy, then enum order.
PlannedAction plan_step(const Belief& belief, const AgentState& agent,
                        const MissionBudget& budget, const BloomWorld& world,
                        const PlannerWeights& weights);

struct SwitchSpec {
    double lambda_c = 1.0;
    double lambda_g = 2.0;
    double q_switch = 0.5;
    double q_stay = 0.5;

    void validate() const;
};

// Transition odds o = (q_sw/q_stay) exp(-lambda_c + lambda_g * dI) where dI is
// the candidate-design info gain under the other kernel minus that under the
// current one; switches with probability o / (1 + o).
int kernel_switch_decide(const Belief& belief, const Eigen::MatrixXd& candidate_sites,
                         const SwitchSpec& spec, std::uint64_t seed);

enum class Policy { adaptive, fixed_a, fixed_b };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);

struct WorldGenConfig {
    int grid_n = 32;
    int n_blobs = 3;
    double amp_lo = 0.6, amp_hi = 1.4;
    double blob_scale_lo = 0.06, blob_scale_hi = 0.12;
    double center_margin = 0.2;
    double v_mag = 0.0;  // advection speed; direction drawn per seed
    double shear_mag = 0.0;
    Eigen::Vector2d subsurface_offset = Eigen::Vector2d(0.15, 0.0);

    void validate() const;
};

BloomWorld generate_world(const WorldGenConfig& cfg, std::uint64_t seed);

struct EpisodeConfig {
    WorldGenConfig world;
    MissionBudget budget;
    PlannerWeights weights;
    KernelFamilyConfig kernels;
    SwitchSpec switch_spec;
    Policy policy = Policy::adaptive;
    int k_epoch = 10;         // kernel decision period
    int forecast_horizon = 5;

    void validate() const;
};

struct StepRecord {
    int t = 0;
    Action action = Action::stay;
    Eigen::Vector2d asv_pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d auv_pos = Eigen::Vector2d::Zero();
    CoordState sigma = CoordState::docked;
    double energy_remaining = 0.0;
    double energy_cost = 0.0;
    double info_gain = 0.0;
    double cumulative_info = 0.0;
    int kernel_id = 0;
    double hs_speed = 0.0;  // HS distance between consecutive kernel Grams
};

struct EpisodeResult {
    std::uint64_t seed = 0;
    Policy policy = Policy::adaptive;
    std::vector<StepRecord> steps;
    double forecast_rmse_surface = 0.0;
    double forecast_rmse_subsurface = 0.0;
    double total_info = 0.0;
    double energy_used = 0.0;
    int samples_returned = 0;
    int constraints_violated = 0;
    double v_norm = 0.0;
    int jitter_events = 0;
};

EpisodeResult run_episode(const EpisodeConfig& cfg, std::uint64_t seed);

}  // namespace kernelcal::bloom
