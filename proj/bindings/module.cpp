#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "kernelcal/bloomsim.hpp"
#include "kernelcal/domain.hpp"
#include "kernelcal/fixedpoints.hpp"
#include "kernelcal/harness.hpp"
#include "kernelcal/infogeom.hpp"
#include "kernelcal/kernel.hpp"
#include "kernelcal/pathengine.hpp"
#include "kernelcal/thermo.hpp"

namespace py = pybind11;
using namespace kernelcal;

namespace {

// Factory results are shared_ptr<const DiscreteDomain>; pybind11 holders are
// non-const, so ownership crosses the boundary through this cast.
std::shared_ptr<DiscreteDomain> unconst(DomainPtr p) {
    return std::const_pointer_cast<DiscreteDomain>(std::move(p));
}

std::vector<std::vector<int>> states_of(const std::vector<paths::Trajectory>& trajs) {
    std::vector<std::vector<int>> out;
    out.reserve(trajs.size());
    for (const paths::Trajectory& t : trajs) out.push_back(t.states);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernel-space calibration core";
    m.attr("__version__") = KERNELCAL_VERSION;

    // ---- domain and kernel space -------------------------------------------

    py::class_<DiscreteDomain, std::shared_ptr<DiscreteDomain>>(m, "DiscreteDomain")
        .def(py::init<Eigen::MatrixXd, Eigen::VectorXd>(), py::arg("points"), py::arg("weights"))
        .def(py::init<Eigen::MatrixXd>(), py::arg("points"))
        .def_property_readonly("size", &DiscreteDomain::size)
        .def_property_readonly("dim", &DiscreteDomain::dim)
        .def_property_readonly("points", &DiscreteDomain::points)
        .def_property_readonly("weights", &DiscreteDomain::weights)
        .def("diameter", &DiscreteDomain::diameter)
        .def("same_as", &DiscreteDomain::same_as)
        .def_static(
            "grid1d",
            [](int n, double lo, double hi) { return unconst(DiscreteDomain::grid1d(n, lo, hi)); },
            py::arg("n"), py::arg("lo"), py::arg("hi"))
        .def_static(
            "grid2d", [](int n) { return unconst(DiscreteDomain::grid2d(n)); }, py::arg("n"));

    py::enum_<KernelFamily>(m, "KernelFamily")
        .value("squared_exponential", KernelFamily::squared_exponential)
        .value("matern_3_2", KernelFamily::matern_3_2)
        .value("explicit_matrix", KernelFamily::explicit_matrix);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<>())
        .def_readwrite("family", &KernelSpec::family)
        .def_readwrite("lengthscale", &KernelSpec::lengthscale)
        .def_readwrite("amplitude", &KernelSpec::amplitude)
        .def_readwrite("entries", &KernelSpec::entries)
        .def_static("squared_exponential", &KernelSpec::squared_exponential, py::arg("lengthscale"),
                    py::arg("amplitude") = 1.0)
        .def_static("matern_3_2", &KernelSpec::matern_3_2, py::arg("lengthscale"),
                    py::arg("amplitude") = 1.0)
        .def_static("explicit_matrix", &KernelSpec::explicit_matrix, py::arg("entries"))
        .def("validate", &KernelSpec::validate)
        .def("__call__", &KernelSpec::operator(), py::arg("x"), py::arg("y"));

    py::class_<KernelMatrix>(m, "KernelMatrix")
        .def_property_readonly("entries",
                               [](const KernelMatrix& k) -> Eigen::MatrixXd { return k.entries(); })
        .def_property_readonly("size", &KernelMatrix::size)
        .def_property_readonly("domain",
                               [](const KernelMatrix& k) { return unconst(k.domain_ptr()); });

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("min_eigenvalue", &ValidationReport::min_eigenvalue)
        .def_readonly("symmetry_defect", &ValidationReport::symmetry_defect)
        .def_readonly("psd_tol", &ValidationReport::psd_tol)
        .def_readonly("passed", &ValidationReport::pass);

    m.def(
        "gram",
        [](const KernelSpec& spec, std::shared_ptr<DiscreteDomain> d) {
            return gram(spec, std::move(d));
        },
        py::arg("spec"), py::arg("domain"));
    m.def("default_psd_tol", &default_psd_tol, py::arg("entries"));
    m.def(
        "validate_psd",
        [](const Eigen::MatrixXd& entries, std::optional<double> tol) {
            return validate_psd(entries, tol);
        },
        py::arg("entries"), py::arg("psd_tol") = std::nullopt);
    m.def("kernel_sum", &kernel_sum, py::arg("k1"), py::arg("k2"), py::arg("alpha") = 1.0,
          py::arg("beta") = 1.0);
    m.def("kernel_scale", &kernel_scale, py::arg("k"), py::arg("c"));
    m.def("kernel_schur", &kernel_schur, py::arg("k1"), py::arg("k2"));
    m.def("hs_distance", &hs_distance, py::arg("k1"), py::arg("k2"));
    m.def("hs_norm", &hs_norm, py::arg("k"));

    // ---- information geometry ----------------------------------------------

    m.def(
        "gp_info_gain",
        [](const Eigen::MatrixXd& k, double noise_var) { return gp_info_gain(k, noise_var).nats; },
        py::arg("k_design"), py::arg("noise_var"));
    m.def(
        "gaussian_kl_cov",
        [](const Eigen::MatrixXd& k_model, const Eigen::MatrixXd& k_env, double noise_var) {
            return gaussian_kl_cov(k_model, k_env, noise_var).nats;
        },
        py::arg("k_model"), py::arg("k_env"), py::arg("noise_var"));
    m.def(
        "hellinger_kernel",
        [](Eigen::VectorXd p, Eigen::VectorXd q) {
            return hellinger_kernel(DiscreteDistribution(std::move(p)),
                                    DiscreteDistribution(std::move(q)));
        },
        py::arg("p"), py::arg("q"));
    m.def("fisher_rao_metric", &fisher_rao_metric, py::arg("family"), py::arg("theta"),
          py::arg("step") = 1e-5);

    // ---- path measures -------------------------------------------------------

    auto mp = m.def_submodule("paths", "MaxCal path measures over finite kernel families");

    py::class_<paths::PathMeasureSpec>(mp, "PathMeasureSpec")
        .def(py::init<>())
        .def_readwrite("m", &paths::PathMeasureSpec::m)
        .def_readwrite("T", &paths::PathMeasureSpec::T)
        .def_readwrite("pi0", &paths::PathMeasureSpec::pi0)
        .def_readwrite("q", &paths::PathMeasureSpec::q)
        .def_readwrite("info", &paths::PathMeasureSpec::info)
        .def_readwrite("lambda_c", &paths::PathMeasureSpec::lambda_c)
        .def_readwrite("lambda_g", &paths::PathMeasureSpec::lambda_g)
        .def("validate", &paths::PathMeasureSpec::validate)
        .def_static("uniform", &paths::PathMeasureSpec::uniform, py::arg("m"), py::arg("T"),
                    py::arg("info"), py::arg("lambda_c") = 0.0, py::arg("lambda_g") = 0.0);

    py::class_<paths::GibbsPathMeasure>(mp, "GibbsPathMeasure")
        .def_readonly("ln_z", &paths::GibbsPathMeasure::ln_z)
        .def_readonly("node_marginals", &paths::GibbsPathMeasure::node_marginals)
        .def_readonly("pair_marginals", &paths::GibbsPathMeasure::pair_marginals)
        .def_readonly("expected_switch_cost", &paths::GibbsPathMeasure::expected_switch_cost)
        .def_readonly("expected_info", &paths::GibbsPathMeasure::expected_info);

    py::class_<paths::EnumeratedMeasure>(mp, "EnumeratedMeasure")
        .def_readonly("log_weights", &paths::EnumeratedMeasure::log_weights)
        .def_readonly("probs", &paths::EnumeratedMeasure::probs)
        .def_readonly("ln_z", &paths::EnumeratedMeasure::ln_z)
        .def_readonly("node_marginals", &paths::EnumeratedMeasure::node_marginals)
        .def_readonly("pair_marginals", &paths::EnumeratedMeasure::pair_marginals)
        .def_readonly("expected_switch_cost", &paths::EnumeratedMeasure::expected_switch_cost)
        .def_readonly("expected_info", &paths::EnumeratedMeasure::expected_info)
        .def_readonly("path_entropy", &paths::EnumeratedMeasure::path_entropy)
        .def("decode",
             [](const paths::EnumeratedMeasure& em, std::size_t index) {
                 return em.decode(index).states;
             });

    py::class_<paths::TransitionOdds>(mp, "TransitionOdds")
        .def_readonly("one_step", &paths::TransitionOdds::one_step)
        .def_readonly("exact_conditional", &paths::TransitionOdds::exact_conditional);

    py::class_<paths::CalibrationResult>(mp, "CalibrationResult")
        .def_readonly("lambda_c", &paths::CalibrationResult::lambda_c)
        .def_readonly("lambda_g", &paths::CalibrationResult::lambda_g)
        .def_readonly("iterations", &paths::CalibrationResult::iterations)
        .def_readonly("residual_c", &paths::CalibrationResult::residual_c)
        .def_readonly("residual_g", &paths::CalibrationResult::residual_g);

    mp.def("enumerate_paths", &paths::enumerate_paths, py::arg("spec"));
    mp.def("transfer_solve", &paths::transfer_solve, py::arg("spec"));
    mp.def("transition_odds", &paths::transition_odds, py::arg("spec"), py::arg("t"),
           py::arg("from_state"), py::arg("to_state"));
    mp.def("path_entropy", &paths::path_entropy, py::arg("spec"));
    mp.def(
        "sample_paths",
        [](const paths::PathMeasureSpec& spec, int n, std::uint64_t seed) {
            return states_of(paths::sample_paths(spec, n, seed));
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"));
    mp.def("calibrate_multipliers", &paths::calibrate_multipliers, py::arg("spec"),
           py::arg("target_switch_cost"), py::arg("target_info"));

    // ---- thermodynamics -------------------------------------------------------

    auto mt = m.def_submodule("thermo", "Landauer accounting and kernel speed limits");

    py::class_<thermo::ThermoConfig>(mt, "ThermoConfig")
        .def(py::init<>())
        .def_readwrite("kBT", &thermo::ThermoConfig::kBT)
        .def("validate", &thermo::ThermoConfig::validate);

    py::class_<thermo::LedgerEntry>(mt, "LedgerEntry")
        .def_readonly("step", &thermo::LedgerEntry::step)
        .def_readonly("delta_info", &thermo::LedgerEntry::delta_info)
        .def_readonly("min_work", &thermo::LedgerEntry::min_work);

    py::class_<thermo::LandauerLedger>(mt, "LandauerLedger")
        .def_readonly("entries", &thermo::LandauerLedger::entries)
        .def_readonly("total_info", &thermo::LandauerLedger::total_info)
        .def_readonly("total_info_gained", &thermo::LandauerLedger::total_info_gained)
        .def_readonly("total_min_work", &thermo::LandauerLedger::total_min_work);

    py::class_<thermo::SpeedLimitReport>(mt, "SpeedLimitReport")
        .def_readonly("required_power", &thermo::SpeedLimitReport::required_power)
        .def_readonly("supplied_power", &thermo::SpeedLimitReport::supplied_power)
        .def_readonly("hs_speed", &thermo::SpeedLimitReport::hs_speed)
        .def_readonly("satisfied", &thermo::SpeedLimitReport::satisfied)
        .def_readonly("first_violation", &thermo::SpeedLimitReport::first_violation);

    mt.def("landauer_ledger", &thermo::landauer_ledger, py::arg("info_trajectory"),
           py::arg("cfg") = thermo::ThermoConfig{});
    mt.def("extraction_bound", &thermo::extraction_bound, py::arg("delta_f"), py::arg("info_nats"),
           py::arg("cfg") = thermo::ThermoConfig{});
    mt.def(
        "speed_limit_check",
        [](const std::vector<double>& info, const std::vector<double>& supplied,
           const std::vector<double>& hs_speed, const thermo::ThermoConfig& cfg) {
            return thermo::speed_limit_check(info, supplied, hs_speed, cfg);
        },
        py::arg("info_trajectory"), py::arg("supplied_power"), py::arg("hs_speed"),
        py::arg("cfg") = thermo::ThermoConfig{});

    // ---- frozen-kernel fixed points --------------------------------------------

    auto mf = m.def_submodule("fixedpoints", "Stationary kernels of the frozen objective");

    py::enum_<fixedpoints::Stability>(mf, "Stability")
        .value("stable", fixedpoints::Stability::stable)
        .value("unstable", fixedpoints::Stability::unstable)
        .value("saddle", fixedpoints::Stability::saddle)
        .value("degenerate", fixedpoints::Stability::degenerate);

    py::class_<fixedpoints::FrozenObjectiveConfig>(mf, "FrozenObjectiveConfig")
        .def(py::init<>())
        .def_readwrite("family", &fixedpoints::FrozenObjectiveConfig::family)
        .def_property(
            "domain",
            [](const fixedpoints::FrozenObjectiveConfig& c) { return unconst(c.domain); },
            [](fixedpoints::FrozenObjectiveConfig& c, std::shared_ptr<DiscreteDomain> d) {
                c.domain = std::move(d);
            })
        .def_readwrite("env_kernel", &fixedpoints::FrozenObjectiveConfig::env_kernel)
        .def_readwrite("noise_var", &fixedpoints::FrozenObjectiveConfig::noise_var)
        .def_readwrite("lambda2", &fixedpoints::FrozenObjectiveConfig::lambda2)
        .def_readwrite("lambda3", &fixedpoints::FrozenObjectiveConfig::lambda3)
        .def_readwrite("fd_step", &fixedpoints::FrozenObjectiveConfig::fd_step)
        .def_readwrite("free_amplitude", &fixedpoints::FrozenObjectiveConfig::free_amplitude)
        .def("validate", &fixedpoints::FrozenObjectiveConfig::validate)
        .def("theta_dim", &fixedpoints::FrozenObjectiveConfig::theta_dim);

    py::class_<fixedpoints::FindOptions>(mf, "FindOptions")
        .def(py::init<>())
        .def_readwrite("grad_tol", &fixedpoints::FindOptions::grad_tol)
        .def_readwrite("max_iterations", &fixedpoints::FindOptions::max_iterations)
        .def_readwrite("merge_tol", &fixedpoints::FindOptions::merge_tol);

    py::class_<fixedpoints::FixedPointRecord>(mf, "FixedPointRecord")
        .def_readonly("theta_star", &fixedpoints::FixedPointRecord::theta_star)
        .def_readonly("s_star", &fixedpoints::FixedPointRecord::s_star)
        .def_readonly("gradient_norm", &fixedpoints::FixedPointRecord::gradient_norm)
        .def_readonly("hessian", &fixedpoints::FixedPointRecord::hessian)
        .def_readonly("stability", &fixedpoints::FixedPointRecord::stability);

    py::class_<fixedpoints::StartDiagnostic>(mf, "StartDiagnostic")
        .def_readonly("start", &fixedpoints::StartDiagnostic::start)
        .def_readonly("final_theta", &fixedpoints::StartDiagnostic::final_theta)
        .def_readonly("final_gradient_norm", &fixedpoints::StartDiagnostic::final_gradient_norm)
        .def_readonly("iterations", &fixedpoints::StartDiagnostic::iterations)
        .def_readonly("converged", &fixedpoints::StartDiagnostic::converged);

    py::class_<fixedpoints::FindResult>(mf, "FindResult")
        .def_readonly("points", &fixedpoints::FindResult::points)
        .def_readonly("diagnostics", &fixedpoints::FindResult::diagnostics);

    py::class_<fixedpoints::GradHessian>(mf, "GradHessian")
        .def_readonly("gradient", &fixedpoints::GradHessian::gradient)
        .def_readonly("hessian", &fixedpoints::GradHessian::hessian);

    py::class_<fixedpoints::ScanCell>(mf, "ScanCell")
        .def_readonly("index", &fixedpoints::ScanCell::index)
        .def_readonly("lambda2", &fixedpoints::ScanCell::lambda2)
        .def_readonly("lambda3", &fixedpoints::ScanCell::lambda3)
        .def_readonly("records", &fixedpoints::ScanCell::records)
        .def_readonly("stable_count", &fixedpoints::ScanCell::stable_count)
        .def_readonly("min_stable_separation", &fixedpoints::ScanCell::min_stable_separation)
        .def_readonly("error", &fixedpoints::ScanCell::error);

    py::class_<fixedpoints::ScanResult>(mf, "ScanResult")
        .def_readonly("cells", &fixedpoints::ScanResult::cells);

    mf.def("lower_bounds", &fixedpoints::lower_bounds, py::arg("cfg"));
    mf.def("upper_bounds", &fixedpoints::upper_bounds, py::arg("cfg"));
    mf.def("frozen_objective", &fixedpoints::frozen_objective, py::arg("theta"), py::arg("cfg"));
    mf.def(
        "grad_hessian",
        [](const Eigen::VectorXd& theta, const fixedpoints::FrozenObjectiveConfig& cfg) {
            return fixedpoints::grad_hessian(theta, cfg);
        },
        py::arg("theta"), py::arg("cfg"));
    mf.def("classify_stability", &fixedpoints::classify_stability, py::arg("hessian"));
    mf.def(
        "find_fixed_points",
        [](const fixedpoints::FrozenObjectiveConfig& cfg,
           const std::vector<Eigen::VectorXd>& starts, const fixedpoints::FindOptions& opts) {
            return fixedpoints::find_fixed_points(cfg, starts, opts);
        },
        py::arg("cfg"), py::arg("starts"), py::arg("opts") = fixedpoints::FindOptions{});
    mf.def("default_start_grid", &fixedpoints::default_start_grid, py::arg("cfg"),
           py::arg("per_dim") = 12);
    mf.def("log_lambda_grid", &fixedpoints::log_lambda_grid, py::arg("lo"), py::arg("hi"),
           py::arg("n"));
    mf.def("bifurcation_scan", &fixedpoints::bifurcation_scan, py::arg("cfg"),
           py::arg("lambda_grid"), py::arg("opts") = fixedpoints::FindOptions{});

    // ---- bloom episodes ---------------------------------------------------------

    auto mb = m.def_submodule("bloom", "Coupled-vehicle bloom monitoring episodes");

    py::enum_<bloom::CoordState>(mb, "CoordState")
        .value("docked", bloom::CoordState::docked)
        .value("undocked", bloom::CoordState::undocked);

    py::enum_<bloom::Channel>(mb, "Channel")
        .value("surface", bloom::Channel::surface)
        .value("subsurface", bloom::Channel::subsurface);

    py::enum_<bloom::Action>(mb, "Action")
        .value("stay", bloom::Action::stay)
        .value("move_e", bloom::Action::move_e)
        .value("move_ne", bloom::Action::move_ne)
        .value("move_n", bloom::Action::move_n)
        .value("move_nw", bloom::Action::move_nw)
        .value("move_w", bloom::Action::move_w)
        .value("move_sw", bloom::Action::move_sw)
        .value("move_s", bloom::Action::move_s)
        .value("move_se", bloom::Action::move_se)
        .value("return_to_base", bloom::Action::return_to_base)
        .value("collect", bloom::Action::collect)
        .value("undock", bloom::Action::undock)
        .value("redock", bloom::Action::redock);

    py::enum_<bloom::Policy>(mb, "Policy")
        .value("adaptive", bloom::Policy::adaptive)
        .value("fixed_a", bloom::Policy::fixed_a)
        .value("fixed_b", bloom::Policy::fixed_b);

    py::class_<bloom::BloomWorld>(mb, "BloomWorld")
        .def_property_readonly("grid", [](const bloom::BloomWorld& w) { return unconst(w.grid); })
        .def_readonly("subsurface_offset", &bloom::BloomWorld::subsurface_offset)
        .def_readonly("t", &bloom::BloomWorld::t)
        .def("surface", &bloom::BloomWorld::surface, py::arg("x"))
        .def("subsurface", &bloom::BloomWorld::subsurface, py::arg("x"));

    py::class_<bloom::AgentState>(mb, "AgentState")
        .def(py::init<>())
        .def_readwrite("asv_pos", &bloom::AgentState::asv_pos)
        .def_readwrite("auv_pos", &bloom::AgentState::auv_pos)
        .def_readwrite("sigma", &bloom::AgentState::sigma)
        .def_readwrite("dive_elapsed", &bloom::AgentState::dive_elapsed)
        .def_readwrite("energy_remaining", &bloom::AgentState::energy_remaining)
        .def_readwrite("samples_collected", &bloom::AgentState::samples_collected);

    py::class_<bloom::MissionBudget>(mb, "MissionBudget")
        .def(py::init<>())
        .def_readwrite("e_max", &bloom::MissionBudget::e_max)
        .def_readwrite("n_max", &bloom::MissionBudget::n_max)
        .def_readwrite("c_move_unit", &bloom::MissionBudget::c_move_unit)
        .def_readwrite("c_dive_step", &bloom::MissionBudget::c_dive_step)
        .def_readwrite("tau_dive", &bloom::MissionBudget::tau_dive)
        .def_readwrite("delta_meet", &bloom::MissionBudget::delta_meet)
        .def_readwrite("base_pos", &bloom::MissionBudget::base_pos)
        .def_readwrite("horizon_steps", &bloom::MissionBudget::horizon_steps)
        .def_readwrite("c_collect", &bloom::MissionBudget::c_collect)
        .def_readwrite("move_step", &bloom::MissionBudget::move_step)
        .def("validate", &bloom::MissionBudget::validate);

    py::class_<bloom::Observation>(mb, "Observation")
        .def(py::init<>())
        .def_readwrite("pos", &bloom::Observation::pos)
        .def_readwrite("channel", &bloom::Observation::channel)
        .def_readwrite("value", &bloom::Observation::value)
        .def_readwrite("noise_var", &bloom::Observation::noise_var);

    py::class_<bloom::KernelFamilyConfig>(mb, "KernelFamilyConfig")
        .def(py::init<>())
        .def_readwrite("ell_a", &bloom::KernelFamilyConfig::ell_a)
        .def_readwrite("ell_b", &bloom::KernelFamilyConfig::ell_b)
        .def_readwrite("amplitude", &bloom::KernelFamilyConfig::amplitude)
        .def_readwrite("sigma2_surface", &bloom::KernelFamilyConfig::sigma2_surface)
        .def_readwrite("sigma2_subsurface", &bloom::KernelFamilyConfig::sigma2_subsurface)
        .def_readwrite("sigma2_sample", &bloom::KernelFamilyConfig::sigma2_sample)
        .def("validate", &bloom::KernelFamilyConfig::validate);

    py::class_<bloom::Belief>(mb, "Belief")
        .def(py::init<bloom::KernelFamilyConfig, Eigen::Vector2d, int>(), py::arg("family"),
             py::arg("subsurface_offset"), py::arg("kernel_id") = 0)
        .def_property_readonly("kernel_id", &bloom::Belief::kernel_id)
        .def("set_kernel", &bloom::Belief::set_kernel, py::arg("id"))
        .def("kernel_spec", &bloom::Belief::kernel_spec, py::arg("id"))
        .def("add_observation", &bloom::Belief::add_observation, py::arg("obs"))
        .def("latent_site", &bloom::Belief::latent_site, py::arg("pos"), py::arg("channel"))
        .def(
            "posterior",
            [](const bloom::Belief& b, const Eigen::MatrixXd& sites) {
                Eigen::VectorXd mean, var;
                b.posterior(sites, mean, var);
                return py::make_tuple(mean, var);
            },
            py::arg("sites"))
        .def("posterior_cov", &bloom::Belief::posterior_cov, py::arg("sites"))
        .def("posterior_cov_under", &bloom::Belief::posterior_cov_under, py::arg("kernel_id"),
             py::arg("sites"))
        .def("info_gain", &bloom::Belief::info_gain, py::arg("pos"), py::arg("channel"),
             py::arg("obs_noise"))
        .def_property_readonly("jitter_events", &bloom::Belief::jitter_events);

    py::class_<bloom::PlannerWeights>(mb, "PlannerWeights")
        .def(py::init<>())
        .def_readwrite("lambda_e", &bloom::PlannerWeights::lambda_e)
        .def_readwrite("lambda_n", &bloom::PlannerWeights::lambda_n);

    py::class_<bloom::PlannedAction>(mb, "PlannedAction")
        .def_readonly("action", &bloom::PlannedAction::action)
        .def_readonly("score", &bloom::PlannedAction::score)
        .def_readonly("info_gain", &bloom::PlannedAction::info_gain)
        .def_readonly("energy_cost", &bloom::PlannedAction::energy_cost)
        .def_readonly("obs_pos", &bloom::PlannedAction::obs_pos)
        .def_readonly("obs_channel", &bloom::PlannedAction::obs_channel)
        .def_readonly("obs_noise", &bloom::PlannedAction::obs_noise);

    py::class_<bloom::SwitchSpec>(mb, "SwitchSpec")
        .def(py::init<>())
        .def_readwrite("lambda_c", &bloom::SwitchSpec::lambda_c)
        .def_readwrite("lambda_g", &bloom::SwitchSpec::lambda_g)
        .def_readwrite("q_switch", &bloom::SwitchSpec::q_switch)
        .def_readwrite("q_stay", &bloom::SwitchSpec::q_stay)
        .def("validate", &bloom::SwitchSpec::validate);

    py::class_<bloom::WorldGenConfig>(mb, "WorldGenConfig")
        .def(py::init<>())
        .def_readwrite("grid_n", &bloom::WorldGenConfig::grid_n)
        .def_readwrite("n_blobs", &bloom::WorldGenConfig::n_blobs)
        .def_readwrite("amp_lo", &bloom::WorldGenConfig::amp_lo)
        .def_readwrite("amp_hi", &bloom::WorldGenConfig::amp_hi)
        .def_readwrite("blob_scale_lo", &bloom::WorldGenConfig::blob_scale_lo)
        .def_readwrite("blob_scale_hi", &bloom::WorldGenConfig::blob_scale_hi)
        .def_readwrite("center_margin", &bloom::WorldGenConfig::center_margin)
        .def_readwrite("v_mag", &bloom::WorldGenConfig::v_mag)
        .def_readwrite("shear_mag", &bloom::WorldGenConfig::shear_mag)
        .def_readwrite("subsurface_offset", &bloom::WorldGenConfig::subsurface_offset)
        .def("validate", &bloom::WorldGenConfig::validate);

    py::class_<bloom::EpisodeConfig>(mb, "EpisodeConfig")
        .def(py::init<>())
        .def_readwrite("world", &bloom::EpisodeConfig::world)
        .def_readwrite("budget", &bloom::EpisodeConfig::budget)
        .def_readwrite("weights", &bloom::EpisodeConfig::weights)
        .def_readwrite("kernels", &bloom::EpisodeConfig::kernels)
        .def_readwrite("switch_spec", &bloom::EpisodeConfig::switch_spec)
        .def_readwrite("policy", &bloom::EpisodeConfig::policy)
        .def_readwrite("k_epoch", &bloom::EpisodeConfig::k_epoch)
        .def_readwrite("forecast_horizon", &bloom::EpisodeConfig::forecast_horizon)
        .def("validate", &bloom::EpisodeConfig::validate);

    py::class_<bloom::StepRecord>(mb, "StepRecord")
        .def_readonly("t", &bloom::StepRecord::t)
        .def_readonly("action", &bloom::StepRecord::action)
        .def_readonly("asv_pos", &bloom::StepRecord::asv_pos)
        .def_readonly("auv_pos", &bloom::StepRecord::auv_pos)
        .def_readonly("sigma", &bloom::StepRecord::sigma)
        .def_readonly("energy_remaining", &bloom::StepRecord::energy_remaining)
        .def_readonly("energy_cost", &bloom::StepRecord::energy_cost)
        .def_readonly("info_gain", &bloom::StepRecord::info_gain)
        .def_readonly("cumulative_info", &bloom::StepRecord::cumulative_info)
        .def_readonly("kernel_id", &bloom::StepRecord::kernel_id)
        .def_readonly("hs_speed", &bloom::StepRecord::hs_speed);

    py::class_<bloom::EpisodeResult>(mb, "EpisodeResult")
        .def_readonly("seed", &bloom::EpisodeResult::seed)
        .def_readonly("policy", &bloom::EpisodeResult::policy)
        .def_readonly("steps", &bloom::EpisodeResult::steps)
        .def_readonly("forecast_rmse_surface", &bloom::EpisodeResult::forecast_rmse_surface)
        .def_readonly("forecast_rmse_subsurface", &bloom::EpisodeResult::forecast_rmse_subsurface)
        .def_readonly("total_info", &bloom::EpisodeResult::total_info)
        .def_readonly("energy_used", &bloom::EpisodeResult::energy_used)
        .def_readonly("samples_returned", &bloom::EpisodeResult::samples_returned)
        .def_readonly("constraints_violated", &bloom::EpisodeResult::constraints_violated)
        .def_readonly("v_norm", &bloom::EpisodeResult::v_norm)
        .def_readonly("jitter_events", &bloom::EpisodeResult::jitter_events);

    mb.def("step_environment", &bloom::step_environment, py::arg("world"));
    mb.def("feasible_actions", &bloom::feasible_actions, py::arg("agent"), py::arg("budget"),
           py::arg("world"));
    mb.def("plan_step", &bloom::plan_step, py::arg("belief"), py::arg("agent"), py::arg("budget"),
           py::arg("world"), py::arg("weights"));
    mb.def("kernel_switch_decide", &bloom::kernel_switch_decide, py::arg("belief"),
           py::arg("candidate_sites"), py::arg("spec"), py::arg("seed"));
    mb.def("generate_world", &bloom::generate_world, py::arg("cfg"), py::arg("seed"));
    mb.def("run_episode", &bloom::run_episode, py::arg("cfg"), py::arg("seed"));

    // ---- experiment harness -------------------------------------------------------

    auto mh = m.def_submodule("harness", "Batch experiments and policy comparisons");

    py::class_<harness::MetricsRow>(mh, "MetricsRow")
        .def(py::init<>())
        .def_readwrite("seed", &harness::MetricsRow::seed)
        .def_readwrite("policy", &harness::MetricsRow::policy)
        .def_readwrite("rmse_surface", &harness::MetricsRow::rmse_surface)
        .def_readwrite("rmse_subsurface", &harness::MetricsRow::rmse_subsurface)
        .def_readwrite("total_info", &harness::MetricsRow::total_info)
        .def_readwrite("energy_used", &harness::MetricsRow::energy_used)
        .def_readwrite("samples_returned", &harness::MetricsRow::samples_returned)
        .def_readwrite("violations", &harness::MetricsRow::violations)
        .def_readwrite("e_max", &harness::MetricsRow::e_max)
        .def_readwrite("n_max", &harness::MetricsRow::n_max)
        .def_readwrite("v_norm", &harness::MetricsRow::v_norm);

    py::class_<harness::PairedStats>(mh, "PairedStats")
        .def_readonly("n_pairs", &harness::PairedStats::n_pairs)
        .def_readonly("wins", &harness::PairedStats::wins)
        .def_readonly("losses", &harness::PairedStats::losses)
        .def_readonly("ties", &harness::PairedStats::ties)
        .def_readonly("win_fraction", &harness::PairedStats::win_fraction)
        .def_readonly("median_diff", &harness::PairedStats::median_diff)
        .def_readonly("p_value", &harness::PairedStats::p_value);

    py::class_<harness::ComparisonSummary>(mh, "ComparisonSummary")
        .def_readonly("surface", &harness::ComparisonSummary::surface)
        .def_readonly("subsurface", &harness::ComparisonSummary::subsurface)
        .def_readonly("surface_high_advection", &harness::ComparisonSummary::surface_high_advection)
        .def_readonly("subsurface_high_advection",
                      &harness::ComparisonSummary::subsurface_high_advection)
        .def_readonly("high_advection_pairs", &harness::ComparisonSummary::high_advection_pairs)
        .def_readonly("v_threshold", &harness::ComparisonSummary::v_threshold)
        .def_readonly("budgets_equal", &harness::ComparisonSummary::budgets_equal)
        .def_readonly("seeds_match", &harness::ComparisonSummary::seeds_match);

    mh.def("sign_test_p_value", &harness::sign_test_p_value, py::arg("wins"), py::arg("n_nontie"));
    mh.def("read_metrics_csv", &harness::read_metrics_csv, py::arg("path"));
    mh.def("write_metrics_csv", &harness::write_metrics_csv, py::arg("path"), py::arg("rows"));
    mh.def("compare_policies", &harness::compare_policies, py::arg("adaptive"), py::arg("fixed"),
           py::arg("v_threshold") = 0.05);
    mh.def("format_double", &harness::format_double, py::arg("v"));
    mh.def(
        "run_experiment",
        [](const std::string& kind, const std::string& payload_json, const std::string& seeds,
           const std::string& output_dir, int parallelism) {
            harness::ExperimentConfig cfg;
            cfg.kind = harness::experiment_kind_from_string(kind);
            cfg.payload = nlohmann::json::parse(payload_json);
            cfg.seeds = harness::parse_seed_range(seeds);
            cfg.output_dir = output_dir;
            cfg.parallelism = parallelism;
            const harness::ExperimentOutcome out = harness::run_experiment(cfg);
            py::dict d;
            d["all_ok"] = out.all_ok;
            d["manifest_path"] = out.manifest_path;
            py::list statuses;
            for (const harness::SeedStatus& s : out.statuses) {
                py::dict e;
                e["seed"] = s.seed;
                e["ok"] = s.ok;
                e["error"] = s.error;
                e["files"] = s.files;
                statuses.append(e);
            }
            d["statuses"] = statuses;
            return d;
        },
        py::arg("kind"), py::arg("payload_json"), py::arg("seeds"), py::arg("output_dir"),
        py::arg("parallelism") = 1);
}
