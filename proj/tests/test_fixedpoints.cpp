#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "kernelcal/errors.hpp"
#include "kernelcal/fixedpoints.hpp"
#include "kernelcal/kernel.hpp"

using namespace kernelcal;
using namespace kernelcal::fixedpoints;

namespace {

Objective box_objective(std::function<double(const Eigen::VectorXd&)> f, int dim, double lo,
                        double hi) {
    Objective obj;
    obj.f = std::move(f);
    obj.lower = Eigen::VectorXd::Constant(dim, lo);
    obj.upper = Eigen::VectorXd::Constant(dim, hi);
    return obj;
}

Eigen::VectorXd theta1(double v) {
    Eigen::VectorXd t(1);
    t << v;
    return t;
}

FrozenObjectiveConfig reference_config() {
    FrozenObjectiveConfig cfg;
    cfg.domain = DiscreteDomain::grid1d(12, 0.0, 1.0);
    cfg.env_kernel = gram(KernelSpec::squared_exponential(0.25), cfg.domain).entries();
    cfg.noise_var = 0.05;
    return cfg;
}

}  // namespace

TEST_CASE("finite differences recover analytic derivatives of a quadratic") {
    const Objective obj =
        box_objective([](const Eigen::VectorXd& t) { return -(t(0) - 1.0) * (t(0) - 1.0); }, 1,
                      -5.0, 5.0);
    const GradHessian gh = grad_hessian(obj, theta1(0.3));
    CHECK(gh.gradient(0) == doctest::Approx(-2.0 * (0.3 - 1.0)).epsilon(1e-9));
    CHECK(gh.hessian(0, 0) == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("mixed partials of a coupled quadratic") {
    // f(x, y) = -(x-1)^2 - 2(y+1/2)^2 + 0.3 xy, Hessian [[-2, 0.3], [0.3, -4]]
    auto f = [](const Eigen::VectorXd& t) {
        return -(t(0) - 1.0) * (t(0) - 1.0) - 2.0 * (t(1) + 0.5) * (t(1) + 0.5) +
               0.3 * t(0) * t(1);
    };
    const Objective obj = box_objective(f, 2, -5.0, 5.0);
    Eigen::VectorXd t(2);
    t << 0.4, -0.2;
    const GradHessian gh = grad_hessian(obj, t);

    CHECK(gh.gradient(0) == doctest::Approx(-2.0 * (0.4 - 1.0) + 0.3 * (-0.2)).epsilon(1e-8));
    CHECK(gh.gradient(1) == doctest::Approx(-4.0 * (-0.2 + 0.5) + 0.3 * 0.4).epsilon(1e-8));
    CHECK(gh.hessian(0, 0) == doctest::Approx(-2.0).epsilon(1e-4));
    CHECK(gh.hessian(1, 1) == doctest::Approx(-4.0).epsilon(1e-4));
    CHECK(gh.hessian(0, 1) == doctest::Approx(0.3).epsilon(1e-4));
    CHECK((gh.hessian - gh.hessian.transpose()).norm() <= 1e-10);
}

TEST_CASE("stencil refuses to cross the parameter box") {
    const Objective obj =
        box_objective([](const Eigen::VectorXd& t) { return -t(0) * t(0); }, 1, 0.0, 1.0);
    CHECK_THROWS_AS(grad_hessian(obj, theta1(1.0)), DomainError);
    CHECK_THROWS_AS(grad_hessian(obj, theta1(1.0 - 1e-6)), DomainError);
    CHECK_THROWS_AS(grad_hessian(obj, theta1(-0.5)), DomainError);
    CHECK_NOTHROW(grad_hessian(obj, theta1(0.5)));
}

TEST_CASE("newton run deduplicates a single quadratic maximum") {
    const Objective obj =
        box_objective([](const Eigen::VectorXd& t) { return -(t(0) - 1.0) * (t(0) - 1.0); }, 1,
                      -5.0, 5.0);
    const FindResult res =
        find_fixed_points(obj, {theta1(0.2), theta1(0.5), theta1(1.7), theta1(3.0)});
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].theta_star(0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(res.points[0].stability == Stability::stable);
    CHECK(res.diagnostics.size() == 4);
    for (const StartDiagnostic& d : res.diagnostics) CHECK(d.converged);
}

TEST_CASE("strictly monotone objective yields no interior stationary point") {
    const Objective obj =
        box_objective([](const Eigen::VectorXd& t) { return -std::exp(t(0)); }, 1, 0.0, 4.0);
    const FindResult res = find_fixed_points(obj, {theta1(0.5), theta1(2.0), theta1(3.5)});
    CHECK(res.points.empty());
    for (const StartDiagnostic& d : res.diagnostics) CHECK_FALSE(d.converged);
}

TEST_CASE("stability classification by hessian spectrum") {
    Eigen::Matrix2d h;
    h << -1.0, 0.0, 0.0, -2.0;
    CHECK(classify_stability(h) == Stability::stable);
    h << 1.0, 0.0, 0.0, 2.0;
    CHECK(classify_stability(h) == Stability::unstable);
    h << -1.0, 0.0, 0.0, 1.0;
    CHECK(classify_stability(h) == Stability::saddle);
    h << 0.0, 0.0, 0.0, 1.0;
    CHECK(classify_stability(h) == Stability::degenerate);
}

TEST_CASE("pure consistency objective locks onto the environment lengthscale") {
    FrozenObjectiveConfig cfg = reference_config();
    cfg.lambda2 = 0.0;
    cfg.lambda3 = 1.0;
    const FindResult res = find_fixed_points(cfg, default_start_grid(cfg));
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].theta_star(0) == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(res.points[0].stability == Stability::stable);
    CHECK(res.points[0].s_star == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("frozen objective gradient agrees with a high-order stencil") {
    FrozenObjectiveConfig cfg = reference_config();
    cfg.lambda2 = 1.0;
    cfg.lambda3 = 2.0;
    for (double ell : {0.1, 0.25, 0.6}) {
        const GradHessian gh = grad_hessian(theta1(ell), cfg);
        const double h = 1e-3 * std::max(1.0, std::abs(ell));
        auto f = [&](double x) { return frozen_objective(theta1(x), cfg); };
        const double stencil =
            (-f(ell + 2 * h) + 8 * f(ell + h) - 8 * f(ell - h) + f(ell - 2 * h)) / (12.0 * h);
        CHECK(std::abs(gh.gradient(0) - stencil) <= 1e-6 * std::max(1.0, std::abs(stencil)));
    }
}

TEST_CASE("frozen objective validation") {
    FrozenObjectiveConfig cfg = reference_config();
    cfg.lambda2 = -0.1;
    CHECK_THROWS_AS(frozen_objective(theta1(0.3), cfg), ParameterError);
    cfg.lambda2 = 0.0;
    cfg.lambda3 = 0.0;
    CHECK_THROWS_AS(frozen_objective(theta1(0.3), cfg), ParameterError);
    cfg = reference_config();
    cfg.env_kernel = Eigen::MatrixXd::Identity(5, 5);
    CHECK_THROWS_AS(frozen_objective(theta1(0.3), cfg), ShapeError);
    cfg = reference_config();
    Eigen::VectorXd two(2);
    two << 0.3, 1.0;
    CHECK_THROWS_AS(frozen_objective(two, cfg), ShapeError);
}

TEST_CASE("default start grid stays strictly inside bounds") {
    FrozenObjectiveConfig cfg = reference_config();
    const Eigen::VectorXd lo = lower_bounds(cfg);
    const Eigen::VectorXd hi = upper_bounds(cfg);
    const std::vector<Eigen::VectorXd> starts = default_start_grid(cfg, 9);
    CHECK(starts.size() == 9);
    for (const Eigen::VectorXd& s : starts) {
        CHECK(s(0) > lo(0));
        CHECK(s(0) < hi(0));
    }

    cfg.free_amplitude = true;
    const std::vector<Eigen::VectorXd> starts2 = default_start_grid(cfg, 5);
    CHECK(starts2.size() == 25);
    for (const Eigen::VectorXd& s : starts2) CHECK(s.size() == 2);
}

TEST_CASE("lambda grid covers the requested square") {
    const std::vector<Eigen::Vector2d> grid = log_lambda_grid(0.1, 10.0, 3);
    CHECK(grid.size() == 9);
    CHECK(grid.front()(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(grid.back()(1) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(log_lambda_grid(-1.0, 10.0, 3), ParameterError);
    CHECK_THROWS_AS(log_lambda_grid(1.0, 0.5, 3), ParameterError);
}

TEST_CASE("small bifurcation scan completes every cell") {
    FrozenObjectiveConfig cfg = reference_config();
    cfg.domain = DiscreteDomain::grid1d(8, 0.0, 1.0);
    cfg.env_kernel = gram(KernelSpec::squared_exponential(0.3), cfg.domain).entries();

    const FindOptions opts;
    const ScanResult scan = bifurcation_scan(cfg, log_lambda_grid(0.5, 2.0, 2), opts);
    REQUIRE(scan.cells.size() == 4);
    for (const ScanCell& cell : scan.cells) {
        CHECK(cell.error.empty());
        CHECK(cell.stable_count >= 1);
        if (cell.stable_count >= 2) CHECK(cell.min_stable_separation >= opts.merge_tol);
    }
}
