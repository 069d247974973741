#include "kernelcal/fixedpoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernelcal/errors.hpp"
#include "kernelcal/infogeom.hpp"

namespace kernelcal::fixedpoints {

namespace {

double min_spacing(const DiscreteDomain& d) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d.size(); ++i)
        for (int j = i + 1; j < d.size(); ++j) {
            const double dist = (d.point(i) - d.point(j)).norm();
            if (dist > 0.0) best = std::min(best, dist);
        }
    return std::isfinite(best) ? best : 1e-3;
}

Eigen::VectorXd step_sizes(const Objective& obj, const Eigen::VectorXd& theta) {
    Eigen::VectorXd h(theta.size());
    for (int i = 0; i < theta.size(); ++i)
        h(i) = obj.fd_step * std::max(1.0, std::abs(theta(i)));
    return h;
}

void check_interior(const Objective& obj, const Eigen::VectorXd& theta,
                    const Eigen::VectorXd& h) {
    if (theta.size() != obj.lower.size())
        throw ShapeError("theta dimension does not match objective bounds");
    for (int i = 0; i < theta.size(); ++i)
        if (theta(i) - 2.0 * h(i) < obj.lower(i) || theta(i) + 2.0 * h(i) > obj.upper(i))
            throw DomainError("finite-difference stencil crosses parameter bounds");
}

Eigen::VectorXd clamp_interior(const Objective& obj, Eigen::VectorXd theta) {
    for (int i = 0; i < theta.size(); ++i) {
        const double h = obj.fd_step * std::max(1.0, std::abs(theta(i)));
        const double margin = 2.5 * h;
        theta(i) = std::clamp(theta(i), obj.lower(i) + margin, obj.upper(i) - margin);
    }
    return theta;
}

}  // namespace

void FrozenObjectiveConfig::validate() const {
    if (!domain) throw ParameterError("frozen objective needs a design domain");
    if (family == KernelFamily::explicit_matrix)
        throw ParameterError("frozen objective needs a parametric family");
    const int n = domain->size();
    if (env_kernel.rows() != n || env_kernel.cols() != n)
        throw ShapeError("environment kernel does not match the domain size");
    if (!(noise_var > 0.0)) throw ParameterError("noise variance must be positive");
    if (lambda2 < 0.0 || lambda3 < 0.0) throw ParameterError("multipliers must be nonnegative");
    if (lambda2 == 0.0 && lambda3 == 0.0)
        throw ParameterError("multipliers must not both be zero");
    if (!(fd_step > 0.0) || fd_step > 1e-2)
        throw ParameterError("fd_step must be in (0, 1e-2]");
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::saddle: return "saddle";
        case Stability::degenerate: return "degenerate";
    }
    return "degenerate";
}

Eigen::VectorXd lower_bounds(const FrozenObjectiveConfig& cfg) {
    Eigen::VectorXd lo(cfg.theta_dim());
    lo(0) = min_spacing(*cfg.domain) / 2.0;
    if (cfg.free_amplitude) lo(1) = 1e-2;
    return lo;
}

Eigen::VectorXd upper_bounds(const FrozenObjectiveConfig& cfg) {
    Eigen::VectorXd hi(cfg.theta_dim());
    hi(0) = 10.0 * cfg.domain->diameter();
    if (cfg.free_amplitude) hi(1) = 1e2;
    return hi;
}

double frozen_objective(const Eigen::VectorXd& theta, const FrozenObjectiveConfig& cfg) {
    cfg.validate();
    if (theta.size() != cfg.theta_dim()) throw ShapeError("theta has wrong dimension");
    const Eigen::VectorXd lo = lower_bounds(cfg);
    const Eigen::VectorXd hi = upper_bounds(cfg);
    for (int i = 0; i < theta.size(); ++i)
        if (theta(i) < lo(i) || theta(i) > hi(i))
            throw DomainError("theta outside parameter bounds");

    const double ell = theta(0);
    const double amp = cfg.free_amplitude ? theta(1) : 1.0;
    const KernelSpec spec = cfg.family == KernelFamily::matern_3_2
                                ? KernelSpec::matern_3_2(ell, amp)
                                : KernelSpec::squared_exponential(ell, amp);
    const Eigen::MatrixXd k = gram(spec, cfg.domain).entries();

    double value = 0.0;
    if (cfg.lambda2 != 0.0) value += cfg.lambda2 * gp_info_gain(k, cfg.noise_var).nats;
    if (cfg.lambda3 != 0.0)
        value -= cfg.lambda3 * gaussian_kl_cov(k, cfg.env_kernel, cfg.noise_var).nats;
    return value;
}

Objective make_frozen_objective(const FrozenObjectiveConfig& cfg) {
    cfg.validate();
    Objective obj;
    obj.f = [cfg](const Eigen::VectorXd& theta) { return frozen_objective(theta, cfg); };
    obj.lower = lower_bounds(cfg);
    obj.upper = upper_bounds(cfg);
    obj.fd_step = cfg.fd_step;
    return obj;
}

GradHessian grad_hessian(const Objective& obj, const Eigen::VectorXd& theta) {
    const int p = static_cast<int>(theta.size());
    const Eigen::VectorXd h = step_sizes(obj, theta);
    check_interior(obj, theta, h);

    GradHessian gh;
    gh.gradient.resize(p);
    gh.hessian.resize(p, p);
    const double f0 = obj.f(theta);

    for (int i = 0; i < p; ++i) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp(i) += h(i);
        tm(i) -= h(i);
        const double fp = obj.f(tp);
        const double fm = obj.f(tm);
        gh.gradient(i) = (fp - fm) / (2.0 * h(i));
        gh.hessian(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    }
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            Eigen::VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
            tpp(i) += h(i); tpp(j) += h(j);
            tpm(i) += h(i); tpm(j) -= h(j);
            tmp(i) -= h(i); tmp(j) += h(j);
            tmm(i) -= h(i); tmm(j) -= h(j);
            const double v =
                (obj.f(tpp) - obj.f(tpm) - obj.f(tmp) + obj.f(tmm)) / (4.0 * h(i) * h(j));
            gh.hessian(i, j) = v;
            gh.hessian(j, i) = v;
        }
    gh.hessian = 0.5 * (gh.hessian + gh.hessian.transpose()).eval();
    return gh;
}

GradHessian grad_hessian(const Eigen::VectorXd& theta, const FrozenObjectiveConfig& cfg) {
    return grad_hessian(make_frozen_objective(cfg), theta);
}

Stability classify_stability(const Eigen::MatrixXd& hessian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hessian + hessian.transpose()));
    const Eigen::VectorXd eig = es.eigenvalues();
    const double tol = 1e-6 * eig.cwiseAbs().maxCoeff();
    if ((eig.cwiseAbs().array() <= tol).any()) return Stability::degenerate;
    if ((eig.array() < -tol).all()) return Stability::stable;
    if ((eig.array() > tol).all()) return Stability::unstable;
    return Stability::saddle;
}

FindResult find_fixed_points(const Objective& obj, const std::vector<Eigen::VectorXd>& starts,
                             const FindOptions& opts) {
    if (starts.empty()) throw ParameterError("start grid must be nonempty");

    FindResult result;
    for (const Eigen::VectorXd& start : starts) {
        StartDiagnostic diag;
        diag.start = start;
        Eigen::VectorXd theta = clamp_interior(obj, start);
        GradHessian gh = grad_hessian(obj, theta);
        double gnorm = gh.gradient.norm();

        int iter = 0;
        for (; iter < opts.max_iterations && gnorm >= opts.grad_tol; ++iter) {
            Eigen::VectorXd step;
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(gh.hessian);
            if (lu.isInvertible()) {
                step = lu.solve(-gh.gradient);
            } else {
                // Singular Hessian: fall back to a gradient-sized probe step.
                step = -gh.gradient / std::max(1.0, gnorm);
            }

            bool improved = false;
            double damp = 1.0;
            for (int back = 0; back < 25; ++back) {
                const Eigen::VectorXd trial = clamp_interior(obj, theta + damp * step);
                const GradHessian trial_gh = grad_hessian(obj, trial);
                if (trial_gh.gradient.norm() < gnorm) {
                    theta = trial;
                    gh = trial_gh;
                    gnorm = gh.gradient.norm();
                    improved = true;
                    break;
                }
                damp *= 0.5;
            }
            if (!improved) break;
        }

        diag.final_theta = theta;
        diag.final_gradient_norm = gnorm;
        diag.iterations = iter;
        diag.converged = gnorm < opts.grad_tol;
        result.diagnostics.push_back(diag);
        if (!diag.converged) continue;

        const bool duplicate = std::any_of(
            result.points.begin(), result.points.end(), [&](const FixedPointRecord& r) {
                const double scale = std::max(1.0, std::max(theta.norm(), r.theta_star.norm()));
                return (theta - r.theta_star).norm() <= opts.merge_tol * scale;
            });
        if (duplicate) continue;

        FixedPointRecord rec;
        rec.theta_star = theta;
        rec.s_star = obj.f(theta);
        rec.gradient_norm = gnorm;
        rec.hessian = gh.hessian;
        rec.stability = classify_stability(gh.hessian);
        result.points.push_back(std::move(rec));
    }
    return result;
}

FindResult find_fixed_points(const FrozenObjectiveConfig& cfg,
                             const std::vector<Eigen::VectorXd>& starts,
                             const FindOptions& opts) {
    return find_fixed_points(make_frozen_objective(cfg), starts, opts);
}

std::vector<Eigen::VectorXd> default_start_grid(const FrozenObjectiveConfig& cfg, int per_dim) {
    if (per_dim < 2) throw ParameterError("need at least two starts per dimension");
    const Eigen::VectorXd lo = lower_bounds(cfg);
    const Eigen::VectorXd hi = upper_bounds(cfg);

    auto log_spaced = [&](int dim) {
        std::vector<double> vals(per_dim);
        const double a = std::log(lo(dim) * 1.05);
        const double b = std::log(hi(dim) * 0.95);
        for (int i = 0; i < per_dim; ++i)
            vals[i] = std::exp(a + (b - a) * i / double(per_dim - 1));
        return vals;
    };

    std::vector<Eigen::VectorXd> starts;
    const std::vector<double> ells = log_spaced(0);
    if (!cfg.free_amplitude) {
        for (double e : ells) starts.push_back(Eigen::VectorXd::Constant(1, e));
    } else {
        const std::vector<double> amps = log_spaced(1);
        for (double e : ells)
            for (double a : amps) {
                Eigen::VectorXd t(2);
                t << e, a;
                starts.push_back(t);
            }
    }
    return starts;
}

std::vector<Eigen::Vector2d> log_lambda_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 1) throw ParameterError("invalid lambda grid");
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i)
        vals[i] = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / double(n - 1));
    std::vector<Eigen::Vector2d> grid;
    grid.reserve(static_cast<std::size_t>(n) * n);
    for (double l2 : vals)
        for (double l3 : vals) grid.emplace_back(l2, l3);
    return grid;
}

ScanResult bifurcation_scan(const FrozenObjectiveConfig& cfg,
                            const std::vector<Eigen::Vector2d>& lambda_grid,
                            const FindOptions& opts) {
    if (lambda_grid.empty()) throw ParameterError("lambda grid must be nonempty");

    ScanResult scan;
    scan.cells.resize(lambda_grid.size());
    for (std::size_t c = 0; c < lambda_grid.size(); ++c) {
        ScanCell& cell = scan.cells[c];
        cell.index = static_cast<int>(c);
        cell.lambda2 = lambda_grid[c](0);
        cell.lambda3 = lambda_grid[c](1);
        try {
            FrozenObjectiveConfig local = cfg;
            local.lambda2 = cell.lambda2;
            local.lambda3 = cell.lambda3;
            const FindResult found =
                find_fixed_points(local, default_start_grid(local), opts);
            cell.records = found.points;

            std::vector<const FixedPointRecord*> stable;
            for (const FixedPointRecord& r : cell.records)
                if (r.stability == Stability::stable) stable.push_back(&r);
            cell.stable_count = static_cast<int>(stable.size());

            double min_sep = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < stable.size(); ++i)
                for (std::size_t j = i + 1; j < stable.size(); ++j) {
                    const double scale = std::max(
                        1.0, std::max(stable[i]->theta_star.norm(), stable[j]->theta_star.norm()));
                    min_sep = std::min(
                        min_sep, (stable[i]->theta_star - stable[j]->theta_star).norm() / scale);
                }
            cell.min_stable_separation = std::isfinite(min_sep) ? min_sep : 0.0;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    return scan;
}

}  // namespace kernelcal::fixedpoints
