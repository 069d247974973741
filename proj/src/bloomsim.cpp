#include "kernelcal/bloomsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernelcal/errors.hpp"
#include "kernelcal/infogeom.hpp"
#include "kernelcal/rng.hpp"

namespace kernelcal::bloom {

namespace {

constexpr double kReserveSlack = 1e-9;

const Eigen::Vector2d kMoveDirs[8] = {
    {1.0, 0.0}, {1.0, 1.0},  {0.0, 1.0},  {-1.0, 1.0},
    {-1.0, 0.0}, {-1.0, -1.0}, {0.0, -1.0}, {1.0, -1.0},
};

bool inside_unit_square(const Eigen::Vector2d& p) {
    return p.x() >= 0.0 && p.x() <= 1.0 && p.y() >= 0.0 && p.y() <= 1.0;
}

double return_cost(const Eigen::Vector2d& pos, const MissionBudget& budget) {
    return budget.c_move_unit * (pos - budget.base_pos).norm();
}

// Dive charges still owed from this step on if the agent ends the step in
// coordination state sigma with the given elapsed count.
double dive_charges_owed(CoordState sigma, int dive_elapsed, const MissionBudget& budget) {
    if (sigma != CoordState::undocked) return 0.0;
    return std::max(0, budget.tau_dive - dive_elapsed) * budget.c_dive_step;
}

}  // namespace

void BloomWorld::validate() const {
    if (!grid) throw ParameterError("bloom world needs a grid domain");
    if (grid->dim() != 2) throw ShapeError("bloom world grid must be 2-D");
    for (const Blob& b : blobs) {
        if (!std::isfinite(b.amplitude) || !b.center.allFinite() || !b.covariance.allFinite())
            throw DataError("blob fields must be finite");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(
            0.5 * (b.covariance + b.covariance.transpose()));
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw DataError("blob covariance must be positive definite");
    }
    if (!flow.v.allFinite() || !flow.shear.allFinite() || !subsurface_offset.allFinite())
        throw DataError("flow and offset must be finite");
}

double BloomWorld::surface(const Eigen::Vector2d& x) const {
    double value = 0.0;
    for (const Blob& b : blobs) {
        const Eigen::Vector2d d = x - b.center;
        value += b.amplitude * std::exp(-0.5 * d.dot(b.covariance.inverse() * d));
    }
    return value;
}

double BloomWorld::subsurface(const Eigen::Vector2d& x) const {
    return surface(x - subsurface_offset);
}

BloomWorld step_environment(const BloomWorld& world) {
    world.validate();
    BloomWorld next = world;
    for (Blob& b : next.blobs)
        b.center += world.flow.v + world.flow.shear * b.center;
    next.t = world.t + 1;
    return next;
}

void MissionBudget::validate() const {
    if (!(e_max >= 0.0)) throw ParameterError("E_max must be nonnegative");
    if (n_max < 0) throw ParameterError("N_max must be nonnegative");
    if (!(c_move_unit > 0.0) || !(c_dive_step > 0.0) || !(c_collect > 0.0))
        throw ParameterError("energy costs must be positive");
    if (tau_dive < 1) throw ParameterError("tau_dive must be at least 1");
    if (!(delta_meet > 0.0) || delta_meet >= std::sqrt(2.0))
        throw ParameterError("delta_meet must be positive and below the domain diameter");
    if (!inside_unit_square(base_pos)) throw ParameterError("base must lie in the unit square");
    if (horizon_steps < 1) throw ParameterError("horizon must be at least 1");
    if (!(move_step > 0.0) || move_step > 1.0) throw ParameterError("move_step must be in (0, 1]");
}

std::string to_string(Action a) {
    switch (a) {
        case Action::stay: return "stay";
        case Action::move_e: return "move_e";
        case Action::move_ne: return "move_ne";
        case Action::move_n: return "move_n";
        case Action::move_nw: return "move_nw";
        case Action::move_w: return "move_w";
        case Action::move_sw: return "move_sw";
        case Action::move_s: return "move_s";
        case Action::move_se: return "move_se";
        case Action::return_to_base: return "return_to_base";
        case Action::collect: return "collect";
        case Action::undock: return "undock";
        case Action::redock: return "redock";
    }
    return "stay";
}

ActionGeometry action_geometry(Action a, const AgentState& agent, const MissionBudget& budget) {
    ActionGeometry g;
    g.next_asv = agent.asv_pos;
    switch (a) {
        case Action::stay:
        case Action::undock:
        case Action::redock:
            break;
        case Action::collect:
            g.energy_cost = budget.c_collect;
            break;
        case Action::return_to_base: {
            const Eigen::Vector2d to_base = budget.base_pos - agent.asv_pos;
            const double dist = to_base.norm();
            if (dist <= budget.move_step) {
                g.next_asv = budget.base_pos;  // exact landing
                g.energy_cost = budget.c_move_unit * dist;
            } else {
                g.next_asv = agent.asv_pos + budget.move_step * to_base / dist;
                g.energy_cost = budget.c_move_unit * budget.move_step;
            }
            break;
        }
        default: {
            const int idx = static_cast<int>(a) - static_cast<int>(Action::move_e);
            const Eigen::Vector2d delta = budget.move_step * kMoveDirs[idx];
            g.next_asv = agent.asv_pos + delta;
            g.energy_cost = budget.c_move_unit * delta.norm();
            break;
        }
    }
    return g;
}

std::vector<Action> feasible_actions(const AgentState& agent, const MissionBudget& budget,
                                     const BloomWorld& world) {
    budget.validate();
    world.validate();

    const bool undocked = agent.sigma == CoordState::undocked;

    auto admissible = [&](Action a) -> bool {
        if (a == Action::collect && agent.samples_collected >= budget.n_max) return false;
        if (a == Action::undock && undocked) return false;
        if (a == Action::redock) {
            if (!undocked || agent.dive_elapsed < budget.tau_dive) return false;
            if ((agent.asv_pos - agent.auv_pos).norm() > budget.delta_meet) return false;
        }

        const ActionGeometry g = action_geometry(a, agent, budget);
        if (!inside_unit_square(g.next_asv)) return false;
        if (undocked && a != Action::redock &&
            (g.next_asv - agent.auv_pos).norm() > budget.delta_meet + 1e-12)
            return false;

        CoordState sigma_after = agent.sigma;
        int elapsed_after = agent.dive_elapsed;
        if (a == Action::undock) {
            sigma_after = CoordState::undocked;
            elapsed_after = 0;
        } else if (a == Action::redock) {
            sigma_after = CoordState::docked;
        }
        const double owed = dive_charges_owed(sigma_after, elapsed_after, budget);
        return agent.energy_remaining - g.energy_cost - owed >=
               return_cost(g.next_asv, budget) - kReserveSlack;
    };

    std::vector<Action> out;
    for (int i = 0; i <= static_cast<int>(Action::redock); ++i) {
        const Action a = static_cast<Action>(i);
        if (admissible(a)) out.push_back(a);
    }
    return out;
}

void KernelFamilyConfig::validate() const {
    if (!(ell_a > 0.0) || !(ell_b > 0.0) || !(amplitude > 0.0))
        throw ParameterError("kernel family parameters must be positive");
    if (!(sigma2_surface > 0.0) || !(sigma2_subsurface > 0.0) || !(sigma2_sample > 0.0))
        throw ParameterError("observation noise variances must be positive");
}

struct Belief::Cache {
    int kernel_id = 0;
    Eigen::MatrixXd sites;  // n x 2 latent positions
    Eigen::VectorXd values;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;
};

Belief::Belief(KernelFamilyConfig family, Eigen::Vector2d subsurface_offset, int kernel_id)
    : family_(family), offset_(std::move(subsurface_offset)), kernel_id_(kernel_id) {
    family_.validate();
    if (kernel_id_ != 0 && kernel_id_ != 1) throw ParameterError("kernel_id must be 0 or 1");
}

void Belief::set_kernel(int id) {
    if (id != 0 && id != 1) throw ParameterError("kernel_id must be 0 or 1");
    if (id != kernel_id_) cache_.reset();
    kernel_id_ = id;
}

KernelSpec Belief::kernel_spec(int id) const {
    if (id != 0 && id != 1) throw ParameterError("kernel_id must be 0 or 1");
    return KernelSpec::squared_exponential(id == 0 ? family_.ell_a : family_.ell_b,
                                           family_.amplitude);
}

void Belief::add_observation(const Observation& o) {
    if (!o.pos.allFinite() || !std::isfinite(o.value) || !(o.noise_var > 0.0))
        throw DataError("observation must be finite with positive noise");
    obs_.push_back(o);
    cache_.reset();
}

Eigen::Vector2d Belief::latent_site(const Eigen::Vector2d& pos, Channel channel) const {
    return channel == Channel::surface ? pos : Eigen::Vector2d(pos - offset_);
}

Belief::Cache Belief::build_cache(int kernel_id) const {
    Cache c;
    c.kernel_id = kernel_id;
    const int n = static_cast<int>(obs_.size());
    c.sites.resize(n, 2);
    c.values.resize(n);
    for (int i = 0; i < n; ++i) {
        c.sites.row(i) = latent_site(obs_[i].pos, obs_[i].channel).transpose();
        c.values(i) = obs_[i].value;
    }
    if (n == 0) return c;

    const KernelSpec spec = kernel_spec(kernel_id);
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            k(i, j) = spec(c.sites.row(i), c.sites.row(j));
            k(j, i) = k(i, j);
        }
        k(i, i) += obs_[i].noise_var;
    }

    double jitter = 1e-8;
    c.llt.compute(k);
    while (c.llt.info() != Eigen::Success) {
        ++jitter_events_;
        if (jitter > 1e-2) throw NumericError("GP system stayed singular after jitter");
        c.llt.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
        jitter *= 10.0;
    }
    c.alpha = c.llt.solve(c.values);
    return c;
}

const Belief::Cache& Belief::cache() const {
    if (!cache_ || cache_->kernel_id != kernel_id_)
        cache_ = std::make_shared<const Cache>(build_cache(kernel_id_));
    return *cache_;
}

void Belief::posterior(const Eigen::MatrixXd& sites, Eigen::VectorXd& mean,
                       Eigen::VectorXd& var) const {
    if (sites.cols() != 2) throw ShapeError("query sites must be n x 2");
    const int q = static_cast<int>(sites.rows());
    const KernelSpec spec = kernel_spec(kernel_id_);
    mean.setZero(q);
    var.resize(q);

    const Cache& c = cache();
    const int n = static_cast<int>(c.sites.rows());
    if (n == 0) {
        for (int i = 0; i < q; ++i) var(i) = spec(sites.row(i), sites.row(i));
        return;
    }

    for (int i = 0; i < q; ++i) {
        Eigen::VectorXd kzx(n);
        for (int j = 0; j < n; ++j) kzx(j) = spec(c.sites.row(j), sites.row(i));
        mean(i) = kzx.dot(c.alpha);
        Eigen::VectorXd w = kzx;
        c.llt.matrixL().solveInPlace(w);
        var(i) = std::max(0.0, spec(sites.row(i), sites.row(i)) - w.squaredNorm());
    }
}

Eigen::MatrixXd Belief::posterior_cov(const Eigen::MatrixXd& sites) const {
    return posterior_cov_under(kernel_id_, sites);
}

Eigen::MatrixXd Belief::posterior_cov_under(int kernel_id, const Eigen::MatrixXd& sites) const {
    if (sites.cols() != 2) throw ShapeError("query sites must be n x 2");
    const int q = static_cast<int>(sites.rows());
    const KernelSpec spec = kernel_spec(kernel_id);

    Eigen::MatrixXd kxx(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = i; j < q; ++j) {
            kxx(i, j) = spec(sites.row(i), sites.row(j));
            kxx(j, i) = kxx(i, j);
        }

    const Cache tmp = kernel_id == kernel_id_ ? cache() : build_cache(kernel_id);
    const int n = static_cast<int>(tmp.sites.rows());
    if (n > 0) {
        Eigen::MatrixXd kzx(n, q);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < q; ++i) kzx(j, i) = spec(tmp.sites.row(j), sites.row(i));
        Eigen::MatrixXd w = kzx;
        tmp.llt.matrixL().solveInPlace(w);
        kxx -= w.transpose() * w;
        kxx = 0.5 * (kxx + kxx.transpose()).eval();
    }

    // Clamp roundoff so downstream log-det calls see a PSD matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kxx);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
           es.eigenvectors().transpose();
}

double Belief::info_gain(const Eigen::Vector2d& pos, Channel channel, double obs_noise) const {
    if (!(obs_noise > 0.0)) throw ParameterError("observation noise must be positive");
    Eigen::MatrixXd site(1, 2);
    site.row(0) = latent_site(pos, channel).transpose();
    Eigen::VectorXd mean, var;
    posterior(site, mean, var);
    return 0.5 * std::log1p(var(0) / obs_noise);
}

PlannedAction plan_step(const Belief& belief, const AgentState& agent,
                        const MissionBudget& budget, const BloomWorld& world,
                        const PlannerWeights& weights) {
    const std::vector<Action> actions = feasible_actions(agent, budget, world);
    if (actions.empty()) throw NumericError("feasible action set is empty");

    const KernelFamilyConfig& fam = belief.family();
    bool have_best = false;
    PlannedAction best;
    double best_cost = 0.0;

    for (Action a : actions) {
        const ActionGeometry g = action_geometry(a, agent, budget);
        PlannedAction cand;
        cand.action = a;
        cand.energy_cost = g.energy_cost;
        switch (a) {
            case Action::collect:
                cand.obs_pos = agent.asv_pos;
                cand.obs_channel = Channel::surface;
                cand.obs_noise = fam.sigma2_sample;
                break;
            case Action::undock:
                cand.obs_pos = agent.asv_pos;
                cand.obs_channel = Channel::subsurface;
                cand.obs_noise = fam.sigma2_subsurface;
                break;
            case Action::redock:
                cand.obs_pos = agent.auv_pos;
                cand.obs_channel = Channel::subsurface;
                cand.obs_noise = fam.sigma2_subsurface;
                break;
            default:
                cand.obs_pos = g.next_asv;
                cand.obs_channel = Channel::surface;
                cand.obs_noise = fam.sigma2_surface;
                break;
        }
        cand.info_gain = belief.info_gain(cand.obs_pos, cand.obs_channel, cand.obs_noise);

        // Undock commits the full dive energy, so the planner prices it all in.
        const double scored_cost =
            g.energy_cost + (a == Action::undock ? budget.tau_dive * budget.c_dive_step : 0.0);
        cand.score = cand.info_gain - weights.lambda_e * scored_cost -
                     weights.lambda_n * (a == Action::collect ? 1.0 : 0.0);

        const bool wins =
            !have_best || cand.score > best.score ||
            (cand.score == best.score &&
             (scored_cost < best_cost ||
              (scored_cost == best_cost && static_cast<int>(a) < static_cast<int>(best.action))));
        if (wins) {
            best = cand;
            best_cost = scored_cost;
            have_best = true;
        }
    }
    return best;
}

void SwitchSpec::validate() const {
    if (!std::isfinite(lambda_c) || !std::isfinite(lambda_g))
        throw ParameterError("switch multipliers must be finite");
    if (!(q_switch > 0.0) || !(q_stay > 0.0))
        throw ParameterError("reference switch probabilities must be positive");
}

int kernel_switch_decide(const Belief& belief, const Eigen::MatrixXd& candidate_sites,
                         const SwitchSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int current = belief.kernel_id();
    const int other = 1 - current;

    double delta_info = 0.0;
    if (candidate_sites.rows() > 0) {
        const double s2 = belief.family().sigma2_surface;
        const double gain_other =
            gp_info_gain(belief.posterior_cov_under(other, candidate_sites), s2).nats;
        const double gain_current =
            gp_info_gain(belief.posterior_cov_under(current, candidate_sites), s2).nats;
        delta_info = gain_other - gain_current;
    }

    const double odds =
        (spec.q_switch / spec.q_stay) * std::exp(-spec.lambda_c + spec.lambda_g * delta_info);
    const double p_switch = std::isinf(odds) ? 1.0 : odds / (1.0 + odds);

    RngStream rng(seed);
    return rng.uniform() < p_switch ? other : current;
}

std::string to_string(Policy p) {
    switch (p) {
        case Policy::adaptive: return "adaptive";
        case Policy::fixed_a: return "fixed_a";
        case Policy::fixed_b: return "fixed_b";
    }
    return "adaptive";
}

Policy policy_from_string(const std::string& s) {
    if (s == "adaptive") return Policy::adaptive;
    if (s == "fixed_a") return Policy::fixed_a;
    if (s == "fixed_b") return Policy::fixed_b;
    throw ParameterError("unknown policy: " + s);
}

void WorldGenConfig::validate() const {
    if (grid_n < 2) throw ParameterError("grid_n must be at least 2");
    if (n_blobs < 0) throw ParameterError("n_blobs must be nonnegative");
    if (!(amp_lo > 0.0) || !(amp_hi >= amp_lo)) throw ParameterError("invalid amplitude range");
    if (!(blob_scale_lo > 0.0) || !(blob_scale_hi >= blob_scale_lo))
        throw ParameterError("invalid blob scale range");
    if (center_margin < 0.0 || center_margin >= 0.5)
        throw ParameterError("center_margin must be in [0, 0.5)");
    if (v_mag < 0.0 || shear_mag < 0.0) throw ParameterError("flow magnitudes must be nonnegative");
    if (!subsurface_offset.allFinite()) throw DataError("subsurface offset must be finite");
}

BloomWorld generate_world(const WorldGenConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    RngStream rng = derived_stream(seed, 0);

    BloomWorld world;
    world.grid = DiscreteDomain::grid2d(cfg.grid_n);
    world.subsurface_offset = cfg.subsurface_offset;
    world.rng_seed = seed;
    for (int j = 0; j < cfg.n_blobs; ++j) {
        Blob b;
        b.center.x() = rng.uniform(cfg.center_margin, 1.0 - cfg.center_margin);
        b.center.y() = rng.uniform(cfg.center_margin, 1.0 - cfg.center_margin);
        b.amplitude = rng.uniform(cfg.amp_lo, cfg.amp_hi);
        const double sx = rng.uniform(cfg.blob_scale_lo, cfg.blob_scale_hi);
        const double sy = rng.uniform(cfg.blob_scale_lo, cfg.blob_scale_hi);
        b.covariance = Eigen::Vector2d(sx * sx, sy * sy).asDiagonal();
        world.blobs.push_back(b);
    }
    // The direction is drawn even when the magnitude is zero so that static
    // and advecting configs share blob layouts at equal seeds.
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    world.flow.v = cfg.v_mag * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    if (cfg.shear_mag > 0.0)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                world.flow.shear(r, c) = rng.uniform(-cfg.shear_mag, cfg.shear_mag);
    world.validate();
    return world;
}

void EpisodeConfig::validate() const {
    world.validate();
    budget.validate();
    kernels.validate();
    switch_spec.validate();
    if (k_epoch < 1) throw ParameterError("k_epoch must be at least 1");
    if (forecast_horizon < 1) throw ParameterError("forecast horizon must be at least 1");
    if (!(weights.lambda_e >= 0.0) || !(weights.lambda_n >= 0.0))
        throw ParameterError("planner weights must be nonnegative");
}

namespace {

Eigen::MatrixXd candidate_latent_sites(const Belief& belief, const AgentState& agent,
                                       const MissionBudget& budget, const BloomWorld& world,
                                       const KernelFamilyConfig& fam) {
    std::vector<Eigen::Vector2d> sites;
    for (Action a : feasible_actions(agent, budget, world)) {
        const ActionGeometry g = action_geometry(a, agent, budget);
        Eigen::Vector2d site;
        if (a == Action::undock)
            site = belief.latent_site(agent.asv_pos, Channel::subsurface);
        else if (a == Action::redock)
            site = belief.latent_site(agent.auv_pos, Channel::subsurface);
        else
            site = belief.latent_site(g.next_asv, Channel::surface);
        const bool dup = std::any_of(sites.begin(), sites.end(), [&](const Eigen::Vector2d& s) {
            return s == site;
        });
        if (!dup) sites.push_back(site);
    }
    (void)fam;
    Eigen::MatrixXd m(static_cast<int>(sites.size()), 2);
    for (std::size_t i = 0; i < sites.size(); ++i) m.row(static_cast<int>(i)) = sites[i].transpose();
    return m;
}

double kernel_hs_speed(const Belief& belief, int old_id, int new_id) {
    if (old_id == new_id) return 0.0;
    static const DomainPtr coarse = DiscreteDomain::grid2d(8);
    return hs_distance(gram(belief.kernel_spec(old_id), coarse),
                       gram(belief.kernel_spec(new_id), coarse));
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, std::uint64_t seed) {
    cfg.validate();

    BloomWorld world = generate_world(cfg.world, seed);
    RngStream noise_rng = derived_stream(seed, 1);

    AgentState agent;
    agent.asv_pos = cfg.budget.base_pos;
    agent.auv_pos = cfg.budget.base_pos;
    agent.energy_remaining = cfg.budget.e_max;

    Belief belief(cfg.kernels, cfg.world.subsurface_offset,
                  cfg.policy == Policy::fixed_b ? 1 : 0);

    EpisodeResult result;
    result.seed = seed;
    result.policy = cfg.policy;
    result.v_norm = world.flow.v.norm();

    Eigen::Vector2d dive_site = agent.asv_pos;
    bool profile_pending = false;
    double cumulative_info = 0.0;
    double spent_total = 0.0;

    for (int t = 1; t <= cfg.budget.horizon_steps; ++t) {
        world = step_environment(world);
        const PlannedAction planned = plan_step(belief, agent, cfg.budget, world, cfg.weights);
        const Action a = planned.action;
        const ActionGeometry g = action_geometry(a, agent, cfg.budget);

        double step_cost = g.energy_cost;
        agent.energy_remaining -= g.energy_cost;
        agent.asv_pos = g.next_asv;
        if (agent.sigma == CoordState::docked) agent.auv_pos = agent.asv_pos;

        double fused_gain = 0.0;
        if (a == Action::undock) {
            agent.sigma = CoordState::undocked;
            agent.dive_elapsed = 0;
            dive_site = agent.asv_pos;
            profile_pending = true;
        } else if (a == Action::redock) {
            agent.sigma = CoordState::docked;
            agent.auv_pos = agent.asv_pos;
            if (profile_pending) {
                Observation o;
                o.pos = dive_site;
                o.channel = Channel::subsurface;
                o.noise_var = cfg.kernels.sigma2_subsurface;
                o.value = world.subsurface(dive_site) +
                          noise_rng.normal() * std::sqrt(o.noise_var);
                fused_gain = belief.info_gain(o.pos, o.channel, o.noise_var);
                belief.add_observation(o);
                profile_pending = false;
            }
        } else if (a == Action::collect) {
            agent.samples_collected += 1;
            Observation o;
            o.pos = agent.asv_pos;
            o.channel = Channel::surface;
            o.noise_var = cfg.kernels.sigma2_sample;
            o.value = world.surface(o.pos) + noise_rng.normal() * std::sqrt(o.noise_var);
            fused_gain = belief.info_gain(o.pos, o.channel, o.noise_var);
            belief.add_observation(o);
        } else {
            Observation o;
            o.pos = agent.asv_pos;
            o.channel = Channel::surface;
            o.noise_var = cfg.kernels.sigma2_surface;
            o.value = world.surface(o.pos) + noise_rng.normal() * std::sqrt(o.noise_var);
            fused_gain = belief.info_gain(o.pos, o.channel, o.noise_var);
            belief.add_observation(o);
        }

        if (agent.sigma == CoordState::undocked && agent.dive_elapsed < cfg.budget.tau_dive) {
            agent.energy_remaining -= cfg.budget.c_dive_step;
            step_cost += cfg.budget.c_dive_step;
            agent.dive_elapsed += 1;
        }
        if (agent.sigma == CoordState::undocked) agent.auv_pos = dive_site;

        double hs_speed = 0.0;
        if (cfg.policy == Policy::adaptive && t % cfg.k_epoch == 0) {
            const int old_id = belief.kernel_id();
            const Eigen::MatrixXd sites =
                candidate_latent_sites(belief, agent, cfg.budget, world, cfg.kernels);
            const std::uint64_t switch_seed = derived_stream(seed, 100000 + t).raw();
            const int new_id = kernel_switch_decide(belief, sites, cfg.switch_spec, switch_seed);
            hs_speed = kernel_hs_speed(belief, old_id, new_id);
            belief.set_kernel(new_id);
        }

        // Constraint audit for this step.
        bool ok = agent.energy_remaining >= -1e-12;
        ok = ok && agent.energy_remaining >= return_cost(agent.asv_pos, cfg.budget) - 1e-9;
        if (agent.sigma == CoordState::docked)
            ok = ok && agent.asv_pos.x() == agent.auv_pos.x() &&
                 agent.asv_pos.y() == agent.auv_pos.y();
        ok = ok && agent.samples_collected <= cfg.budget.n_max;
        if (!ok) result.constraints_violated += 1;

        cumulative_info += fused_gain;
        spent_total += step_cost;

        StepRecord rec;
        rec.t = t;
        rec.action = a;
        rec.asv_pos = agent.asv_pos;
        rec.auv_pos = agent.auv_pos;
        rec.sigma = agent.sigma;
        rec.energy_remaining = agent.energy_remaining;
        rec.energy_cost = step_cost;
        rec.info_gain = fused_gain;
        rec.cumulative_info = cumulative_info;
        rec.kernel_id = belief.kernel_id();
        rec.hs_speed = hs_speed;
        result.steps.push_back(rec);

        if (a == Action::return_to_base && agent.sigma == CoordState::docked &&
            agent.asv_pos == cfg.budget.base_pos)
            break;
    }

    // Forecast by pulling grid sites back through the known flow.
    const Eigen::Matrix2d a_flow = Eigen::Matrix2d::Identity() + world.flow.shear;
    if (std::abs(a_flow.determinant()) < 1e-12)
        throw NumericError("flow map is singular; forecast undefined");
    const Eigen::Matrix2d a_inv = a_flow.inverse();
    auto pullback = [&](Eigen::Vector2d x) {
        for (int h = 0; h < cfg.forecast_horizon; ++h) x = a_inv * (x - world.flow.v);
        return x;
    };

    BloomWorld future = world;
    for (int h = 0; h < cfg.forecast_horizon; ++h) future = step_environment(future);

    const Eigen::MatrixXd& grid_pts = world.grid->points();
    const int n_grid = world.grid->size();
    Eigen::MatrixXd surf_sites(n_grid, 2), sub_sites(n_grid, 2);
    for (int i = 0; i < n_grid; ++i) {
        const Eigen::Vector2d x = grid_pts.row(i).transpose();
        surf_sites.row(i) = pullback(x).transpose();
        sub_sites.row(i) = pullback(x - world.subsurface_offset).transpose();
    }
    Eigen::VectorXd mean_surf, var_surf, mean_sub, var_sub;
    belief.posterior(surf_sites, mean_surf, var_surf);
    belief.posterior(sub_sites, mean_sub, var_sub);

    double se_surf = 0.0, se_sub = 0.0;
    for (int i = 0; i < n_grid; ++i) {
        const Eigen::Vector2d x = grid_pts.row(i).transpose();
        se_surf += std::pow(mean_surf(i) - future.surface(x), 2);
        se_sub += std::pow(mean_sub(i) - future.subsurface(x), 2);
    }
    result.forecast_rmse_surface = std::sqrt(se_surf / n_grid);
    result.forecast_rmse_subsurface = std::sqrt(se_sub / n_grid);

    result.total_info = cumulative_info;
    result.energy_used = spent_total;
    result.samples_returned = agent.samples_collected;
    result.jitter_events = belief.jitter_events();

    if (std::abs(spent_total + agent.energy_remaining - cfg.budget.e_max) > 1e-9)
        result.constraints_violated += 1;

    return result;
}

}  // namespace kernelcal::bloom
