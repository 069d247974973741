#pragma once

#include <string>

#include "json.hpp"
#include "kernelcal/bloomsim.hpp"
#include "kernelcal/fixedpoints.hpp"
#include "kernelcal/kernel.hpp"
#include "kernelcal/pathengine.hpp"

namespace kernelcal::io {

using nlohmann::json;

json load_json_file(const std::string& path);

// KernelSpec <-> {"family": ..., "lengthscale": r, "amplitude": r} or
// {"family": "explicit_matrix", "entries": [[...]]}.
json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const json& j, const std::string& path);

// PathMeasureSpec from a config object; pi0 and q default to uniform.
paths::PathMeasureSpec path_spec_from_json(const json& j);

struct ToyJob {
    paths::PathMeasureSpec spec;
    int samples = 0;
    bool calibrate = false;
    double target_switch_cost = 0.0;
    double target_info = 0.0;
};

ToyJob toy_job_from_json(const json& j);

struct FixedPointsJob {
    fixedpoints::FrozenObjectiveConfig cfg;
    std::vector<Eigen::Vector2d> lambda_grid;  // single cell when no scan block
    int starts_per_dim = 12;
};

FixedPointsJob fixedpoints_job_from_json(const json& j);

bloom::EpisodeConfig episode_config_from_json(const json& j);
json episode_config_to_json(const bloom::EpisodeConfig& cfg);

}  // namespace kernelcal::io
