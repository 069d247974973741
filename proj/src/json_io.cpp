#include "kernelcal/json_io.hpp"

#include <fstream>

#include "kernelcal/errors.hpp"

namespace kernelcal::io {

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing required field");
    return *it;
}

double number_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
    return v.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback,
                 const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
    return v.get<double>();
}

int int_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    return v.get<int>();
}

int int_or(const json& j, const std::string& key, int fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    return v.get<int>();
}

Eigen::VectorXd vector_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_array()) throw SchemaError(path + "." + key, "expected an array");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw SchemaError(path + "." + key, "expected numeric entries");
        out(static_cast<int>(i)) = v[i].get<double>();
    }
    return out;
}

Eigen::MatrixXd matrix_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_array() || v.empty()) throw SchemaError(path + "." + key, "expected a 2-D array");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) throw SchemaError(path + "." + key, "expected a 2-D array");
    Eigen::MatrixXd out(v.size(), cols);
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (!v[r].is_array() || v[r].size() != cols)
            throw SchemaError(path + "." + key, "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!v[r][c].is_number())
                throw SchemaError(path + "." + key, "expected numeric entries");
            out(static_cast<int>(r), static_cast<int>(c)) = v[r][c].get<double>();
        }
    }
    return out;
}

Eigen::Vector2d vec2_or(const json& j, const std::string& key, Eigen::Vector2d fallback,
                        const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const Eigen::VectorXd v = vector_at(j, key, path);
    if (v.size() != 2) throw SchemaError(path + "." + key, "expected two entries");
    return {v(0), v(1)};
}

}  // namespace

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path, std::string("invalid JSON: ") + e.what());
    }
}

json kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    j["family"] = to_string(spec.family);
    if (spec.family == KernelFamily::explicit_matrix) {
        json rows = json::array();
        for (int r = 0; r < spec.entries.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < spec.entries.cols(); ++c) row.push_back(spec.entries(r, c));
            rows.push_back(row);
        }
        j["entries"] = rows;
    } else {
        j["lengthscale"] = spec.lengthscale;
        j["amplitude"] = spec.amplitude;
    }
    return j;
}

KernelSpec kernel_spec_from_json(const json& j, const std::string& path) {
    const json& fam = require(j, "family", path);
    if (!fam.is_string()) throw SchemaError(path + ".family", "expected a string");
    KernelFamily family;
    try {
        family = kernel_family_from_string(fam.get<std::string>());
    } catch (const std::exception& e) {
        throw SchemaError(path + ".family", e.what());
    }
    if (family == KernelFamily::explicit_matrix)
        return KernelSpec::explicit_matrix(matrix_at(j, "entries", path));
    const double ell = number_at(j, "lengthscale", path);
    const double amp = number_or(j, "amplitude", 1.0, path);
    return family == KernelFamily::matern_3_2 ? KernelSpec::matern_3_2(ell, amp)
                                              : KernelSpec::squared_exponential(ell, amp);
}

paths::PathMeasureSpec path_spec_from_json(const json& j) {
    const std::string path = "config";
    paths::PathMeasureSpec spec;
    spec.m = int_at(j, "m", path);
    spec.T = int_at(j, "T", path);
    if (spec.m < 2 || spec.T < 1) throw SchemaError(path, "need m >= 2 and T >= 1");
    spec.info = vector_at(j, "info", path);
    spec.lambda_c = number_at(j, "lambda_c", path);
    spec.lambda_g = number_at(j, "lambda_g", path);
    spec.pi0 = j.contains("pi0") ? vector_at(j, "pi0", path)
                                 : Eigen::VectorXd::Constant(spec.m, 1.0 / spec.m).eval();
    spec.q = j.contains("q") ? matrix_at(j, "q", path)
                             : Eigen::MatrixXd::Constant(spec.m, spec.m, 1.0 / spec.m).eval();
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
    return spec;
}

ToyJob toy_job_from_json(const json& j) {
    ToyJob job;
    job.spec = path_spec_from_json(j);
    job.samples = int_or(j, "samples", 0, "config");
    if (job.samples < 0) throw SchemaError("config.samples", "must be nonnegative");
    if (j.contains("calibrate")) {
        const json& c = j.at("calibrate");
        job.calibrate = true;
        job.target_switch_cost = number_at(c, "target_switch_cost", "config.calibrate");
        job.target_info = number_at(c, "target_info", "config.calibrate");
    }
    return job;
}

FixedPointsJob fixedpoints_job_from_json(const json& j) {
    const std::string path = "config";
    FixedPointsJob job;

    const json& dom = require(j, "domain", path);
    const int n = int_at(dom, "n", path + ".domain");
    const double lo = number_or(dom, "lo", 0.0, path + ".domain");
    const double hi = number_or(dom, "hi", 1.0, path + ".domain");
    if (n < 2 || !(hi > lo)) throw SchemaError(path + ".domain", "need n >= 2 and hi > lo");
    job.cfg.domain = DiscreteDomain::grid1d(n, lo, hi);

    if (j.contains("family")) {
        const json& fam = j.at("family");
        if (!fam.is_string()) throw SchemaError(path + ".family", "expected a string");
        try {
            job.cfg.family = kernel_family_from_string(fam.get<std::string>());
        } catch (const std::exception& e) {
            throw SchemaError(path + ".family", e.what());
        }
    }

    const KernelSpec env = kernel_spec_from_json(require(j, "env", path), path + ".env");
    job.cfg.env_kernel = gram(env, job.cfg.domain).entries();

    job.cfg.noise_var = number_or(j, "noise_var", 0.05, path);
    job.cfg.lambda2 = number_or(j, "lambda2", 1.0, path);
    job.cfg.lambda3 = number_or(j, "lambda3", 1.0, path);
    job.cfg.fd_step = number_or(j, "fd_step", 1e-5, path);
    job.starts_per_dim = int_or(j, "starts_per_dim", 12, path);
    if (job.starts_per_dim < 2) throw SchemaError(path + ".starts_per_dim", "must be >= 2");

    if (j.contains("scan")) {
        const json& s = j.at("scan");
        const double slo = number_at(s, "lo", path + ".scan");
        const double shi = number_at(s, "hi", path + ".scan");
        const int sn = int_at(s, "n", path + ".scan");
        try {
            job.lambda_grid = fixedpoints::log_lambda_grid(slo, shi, sn);
        } catch (const std::exception& e) {
            throw SchemaError(path + ".scan", e.what());
        }
    } else {
        job.lambda_grid = {Eigen::Vector2d(job.cfg.lambda2, job.cfg.lambda3)};
    }

    try {
        job.cfg.validate();
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
    return job;
}

bloom::EpisodeConfig episode_config_from_json(const json& j) {
    const std::string path = "config";
    bloom::EpisodeConfig cfg;

    if (j.contains("world")) {
        const json& w = j.at("world");
        const std::string wp = path + ".world";
        cfg.world.grid_n = int_or(w, "grid_n", cfg.world.grid_n, wp);
        cfg.world.n_blobs = int_or(w, "n_blobs", cfg.world.n_blobs, wp);
        if (w.contains("amp")) {
            const Eigen::VectorXd a = vector_at(w, "amp", wp);
            if (a.size() != 2) throw SchemaError(wp + ".amp", "expected [lo, hi]");
            cfg.world.amp_lo = a(0);
            cfg.world.amp_hi = a(1);
        }
        if (w.contains("blob_scale")) {
            const Eigen::VectorXd s = vector_at(w, "blob_scale", wp);
            if (s.size() != 2) throw SchemaError(wp + ".blob_scale", "expected [lo, hi]");
            cfg.world.blob_scale_lo = s(0);
            cfg.world.blob_scale_hi = s(1);
        }
        cfg.world.center_margin = number_or(w, "center_margin", cfg.world.center_margin, wp);
        cfg.world.v_mag = number_or(w, "v_mag", cfg.world.v_mag, wp);
        cfg.world.shear_mag = number_or(w, "shear_mag", cfg.world.shear_mag, wp);
        cfg.world.subsurface_offset =
            vec2_or(w, "subsurface_offset", cfg.world.subsurface_offset, wp);
    }

    if (j.contains("budget")) {
        const json& b = j.at("budget");
        const std::string bp = path + ".budget";
        cfg.budget.e_max = number_or(b, "e_max", cfg.budget.e_max, bp);
        cfg.budget.n_max = int_or(b, "n_max", cfg.budget.n_max, bp);
        cfg.budget.c_move_unit = number_or(b, "c_move_unit", cfg.budget.c_move_unit, bp);
        cfg.budget.c_dive_step = number_or(b, "c_dive_step", cfg.budget.c_dive_step, bp);
        cfg.budget.tau_dive = int_or(b, "tau_dive", cfg.budget.tau_dive, bp);
        cfg.budget.delta_meet = number_or(b, "delta_meet", cfg.budget.delta_meet, bp);
        cfg.budget.base_pos = vec2_or(b, "base_pos", cfg.budget.base_pos, bp);
        cfg.budget.horizon_steps = int_or(b, "horizon_steps", cfg.budget.horizon_steps, bp);
        cfg.budget.c_collect = number_or(b, "c_collect", cfg.budget.c_collect, bp);
        cfg.budget.move_step = number_or(b, "move_step", cfg.budget.move_step, bp);
    }

    if (j.contains("weights")) {
        const json& w = j.at("weights");
        cfg.weights.lambda_e = number_or(w, "lambda_e", cfg.weights.lambda_e, path + ".weights");
        cfg.weights.lambda_n = number_or(w, "lambda_n", cfg.weights.lambda_n, path + ".weights");
    }

    if (j.contains("kernels")) {
        const json& k = j.at("kernels");
        const std::string kp = path + ".kernels";
        cfg.kernels.ell_a = number_or(k, "ell_a", cfg.kernels.ell_a, kp);
        cfg.kernels.ell_b = number_or(k, "ell_b", cfg.kernels.ell_b, kp);
        cfg.kernels.amplitude = number_or(k, "amplitude", cfg.kernels.amplitude, kp);
        cfg.kernels.sigma2_surface = number_or(k, "sigma2_surface", cfg.kernels.sigma2_surface, kp);
        cfg.kernels.sigma2_subsurface =
            number_or(k, "sigma2_subsurface", cfg.kernels.sigma2_subsurface, kp);
        cfg.kernels.sigma2_sample = number_or(k, "sigma2_sample", cfg.kernels.sigma2_sample, kp);
    }

    if (j.contains("switch")) {
        const json& s = j.at("switch");
        const std::string sp = path + ".switch";
        cfg.switch_spec.lambda_c = number_or(s, "lambda_c", cfg.switch_spec.lambda_c, sp);
        cfg.switch_spec.lambda_g = number_or(s, "lambda_g", cfg.switch_spec.lambda_g, sp);
        cfg.switch_spec.q_switch = number_or(s, "q_switch", cfg.switch_spec.q_switch, sp);
        cfg.switch_spec.q_stay = number_or(s, "q_stay", cfg.switch_spec.q_stay, sp);
    }

    if (j.contains("policy")) {
        const json& p = j.at("policy");
        if (!p.is_string()) throw SchemaError(path + ".policy", "expected a string");
        try {
            cfg.policy = bloom::policy_from_string(p.get<std::string>());
        } catch (const std::exception& e) {
            throw SchemaError(path + ".policy", e.what());
        }
    }
    cfg.k_epoch = int_or(j, "k_epoch", cfg.k_epoch, path);
    cfg.forecast_horizon = int_or(j, "forecast_horizon", cfg.forecast_horizon, path);

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
    return cfg;
}

json episode_config_to_json(const bloom::EpisodeConfig& cfg) {
    json j;
    j["world"] = {
        {"grid_n", cfg.world.grid_n},
        {"n_blobs", cfg.world.n_blobs},
        {"amp", {cfg.world.amp_lo, cfg.world.amp_hi}},
        {"blob_scale", {cfg.world.blob_scale_lo, cfg.world.blob_scale_hi}},
        {"center_margin", cfg.world.center_margin},
        {"v_mag", cfg.world.v_mag},
        {"shear_mag", cfg.world.shear_mag},
        {"subsurface_offset", {cfg.world.subsurface_offset.x(), cfg.world.subsurface_offset.y()}},
    };
    j["budget"] = {
        {"e_max", cfg.budget.e_max},
        {"n_max", cfg.budget.n_max},
        {"c_move_unit", cfg.budget.c_move_unit},
        {"c_dive_step", cfg.budget.c_dive_step},
        {"tau_dive", cfg.budget.tau_dive},
        {"delta_meet", cfg.budget.delta_meet},
        {"base_pos", {cfg.budget.base_pos.x(), cfg.budget.base_pos.y()}},
        {"horizon_steps", cfg.budget.horizon_steps},
        {"c_collect", cfg.budget.c_collect},
        {"move_step", cfg.budget.move_step},
    };
    j["weights"] = {{"lambda_e", cfg.weights.lambda_e}, {"lambda_n", cfg.weights.lambda_n}};
    j["kernels"] = {
        {"ell_a", cfg.kernels.ell_a},
        {"ell_b", cfg.kernels.ell_b},
        {"amplitude", cfg.kernels.amplitude},
        {"sigma2_surface", cfg.kernels.sigma2_surface},
        {"sigma2_subsurface", cfg.kernels.sigma2_subsurface},
        {"sigma2_sample", cfg.kernels.sigma2_sample},
    };
    j["switch"] = {
        {"lambda_c", cfg.switch_spec.lambda_c},
        {"lambda_g", cfg.switch_spec.lambda_g},
        {"q_switch", cfg.switch_spec.q_switch},
        {"q_stay", cfg.switch_spec.q_stay},
    };
    j["policy"] = bloom::to_string(cfg.policy);
    j["k_epoch"] = cfg.k_epoch;
    j["forecast_horizon"] = cfg.forecast_horizon;
    return j;
}

}  // namespace kernelcal::io
