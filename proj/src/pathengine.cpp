#include "kernelcal/pathengine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernelcal/errors.hpp"
#include "kernelcal/rng.hpp"

namespace kernelcal::paths {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) s += std::exp(v(i) - m);
    return m + std::log(s);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Log edge factor: ln q(j|i) - lambda_c 1[j != i].
Eigen::MatrixXd log_edge_factor(const PathMeasureSpec& spec) {
    Eigen::MatrixXd e(spec.m, spec.m);
    for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j)
            e(i, j) = safe_log(spec.q(i, j)) - (i == j ? 0.0 : spec.lambda_c);
    return e;
}

struct Messages {
    Eigen::MatrixXd alpha;  // (T+1) x m forward log messages, node factors included
    Eigen::MatrixXd beta;   // (T+1) x m backward log messages
    double ln_z = 0.0;
};

Messages forward_backward(const PathMeasureSpec& spec) {
    const int m = spec.m, T = spec.T;
    const Eigen::MatrixXd edge = log_edge_factor(spec);
    const Eigen::VectorXd node = spec.lambda_g * spec.info;

    Messages msg;
    msg.alpha.resize(T + 1, m);
    msg.beta.resize(T + 1, m);

    for (int j = 0; j < m; ++j) msg.alpha(0, j) = safe_log(spec.pi0(j)) + node(j);
    Eigen::VectorXd acc(m);
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) acc(i) = msg.alpha(t, i) + edge(i, j);
            msg.alpha(t + 1, j) = logsumexp(acc) + node(j);
        }
    }

    msg.beta.row(T).setZero();
    for (int t = T - 1; t >= 0; --t) {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) acc(j) = edge(i, j) + node(j) + msg.beta(t + 1, j);
            msg.beta(t, i) = logsumexp(acc);
        }
    }

    msg.ln_z = logsumexp(msg.alpha.row(T));
    if (!std::isfinite(msg.ln_z))
        throw NumericError("transfer_solve: path measure has zero total weight");
    return msg;
}

}  // namespace

void PathMeasureSpec::validate() const {
    if (m < 2) throw ParameterError("kernel family size m must be >= 2");
    if (T < 1) throw ParameterError("horizon T must be >= 1");
    if (pi0.size() != m || info.size() != m || q.rows() != m || q.cols() != m)
        throw ShapeError("path measure spec sizes do not match m");
    if (!pi0.allFinite() || !q.allFinite() || !info.allFinite())
        throw DataError("path measure spec has non-finite entries");
    if ((pi0.array() < 0.0).any()) throw DataError("pi0 has negative entries");
    if (std::abs(pi0.sum() - 1.0) > 1e-12) throw DataError("pi0 does not sum to 1 within 1e-12");
    if ((q.array() < 0.0).any()) throw DataError("q has negative entries");
    for (int i = 0; i < m; ++i)
        if (std::abs(q.row(i).sum() - 1.0) > 1e-12)
            throw DataError("q row " + std::to_string(i) + " does not sum to 1 within 1e-12");
    if (!std::isfinite(lambda_c) || !std::isfinite(lambda_g))
        throw ParameterError("multipliers must be finite");
    if (lambda_c < 0.0) throw ParameterError("lambda_c must be >= 0");
}

PathMeasureSpec PathMeasureSpec::uniform(int m, int T, Eigen::VectorXd info, double lambda_c,
                                         double lambda_g) {
    PathMeasureSpec s;
    s.m = m;
    s.T = T;
    s.pi0 = Eigen::VectorXd::Constant(m, 1.0 / m);
    s.q = Eigen::MatrixXd::Constant(m, m, 1.0 / m);
    s.info = std::move(info);
    s.lambda_c = lambda_c;
    s.lambda_g = lambda_g;
    s.validate();
    return s;
}

int switch_count(const Trajectory& traj) {
    int c = 0;
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t)
        c += traj.states[t + 1] != traj.states[t] ? 1 : 0;
    return c;
}

double cumulative_info(const PathMeasureSpec& spec, const Trajectory& traj) {
    double g = 0.0;
    for (int s : traj.states) g += spec.info(s);
    return g;
}

double log_path_weight(const PathMeasureSpec& spec, const Trajectory& traj) {
    spec.validate();
    if (static_cast<int>(traj.states.size()) != spec.T + 1)
        throw ShapeError("trajectory length does not match horizon");
    for (int s : traj.states)
        if (s < 0 || s >= spec.m) throw ShapeError("trajectory state out of range");

    double lw = safe_log(spec.pi0(traj.states[0]));
    for (int t = 0; t < spec.T; ++t) lw += safe_log(spec.q(traj.states[t], traj.states[t + 1]));
    lw += -spec.lambda_c * switch_count(traj) + spec.lambda_g * cumulative_info(spec, traj);
    return lw;
}

double path_weight(const PathMeasureSpec& spec, const Trajectory& traj) {
    const double lw = log_path_weight(spec, traj);
    return std::isfinite(lw) ? std::exp(lw) : 0.0;
}

Trajectory EnumeratedMeasure::decode(std::size_t index) const {
    Trajectory traj;
    traj.states.resize(spec.T + 1);
    for (int t = 0; t <= spec.T; ++t) {
        traj.states[t] = static_cast<int>(index % spec.m);
        index /= spec.m;
    }
    return traj;
}

EnumeratedMeasure enumerate_paths(const PathMeasureSpec& spec) {
    spec.validate();
    double count = std::pow(double(spec.m), double(spec.T + 1));
    if (count > double(1 << 20)) throw SizeError("enumeration guard: more than 2^20 paths");
    const std::size_t n = static_cast<std::size_t>(count);

    EnumeratedMeasure em;
    em.spec = spec;
    em.log_weights.resize(n);
    em.probs.resize(n);
    em.node_marginals = Eigen::MatrixXd::Zero(spec.T + 1, spec.m);
    em.pair_marginals.assign(spec.T, Eigen::MatrixXd::Zero(spec.m, spec.m));

    double max_lw = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        em.log_weights[i] = log_path_weight(spec, em.decode(i));
        max_lw = std::max(max_lw, em.log_weights[i]);
    }
    if (!std::isfinite(max_lw)) throw NumericError("enumeration: all paths have zero weight");

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        z += std::isfinite(em.log_weights[i]) ? std::exp(em.log_weights[i] - max_lw) : 0.0;
    em.ln_z = max_lw + std::log(z);

    for (std::size_t i = 0; i < n; ++i)
        em.probs[i] =
            std::isfinite(em.log_weights[i]) ? std::exp(em.log_weights[i] - em.ln_z) : 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        if (em.probs[i] == 0.0) continue;
        const Trajectory traj = em.decode(i);
        const double p = em.probs[i];
        for (int t = 0; t <= spec.T; ++t) em.node_marginals(t, traj.states[t]) += p;
        for (int t = 0; t < spec.T; ++t)
            em.pair_marginals[t](traj.states[t], traj.states[t + 1]) += p;
        em.expected_switch_cost += p * switch_count(traj);
        em.expected_info += p * cumulative_info(spec, traj);
        // ln(P/Q) = -lc C + lg G - lnZ
        em.path_entropy -= p * (-spec.lambda_c * switch_count(traj) +
                                spec.lambda_g * cumulative_info(spec, traj) - em.ln_z);
    }
    return em;
}

namespace {

// Shared with the calibration loop, whose trial iterates may step outside the
// public field constraints (negative lambda_c) before converging back in.
GibbsPathMeasure solve_unvalidated(const PathMeasureSpec& spec) {
    const int m = spec.m, T = spec.T;
    const Messages msg = forward_backward(spec);
    const Eigen::MatrixXd edge = log_edge_factor(spec);
    const Eigen::VectorXd node = spec.lambda_g * spec.info;

    GibbsPathMeasure gm;
    gm.ln_z = msg.ln_z;
    gm.node_marginals.resize(T + 1, m);
    for (int t = 0; t <= T; ++t)
        for (int i = 0; i < m; ++i)
            gm.node_marginals(t, i) = std::exp(msg.alpha(t, i) + msg.beta(t, i) - msg.ln_z);

    gm.pair_marginals.assign(T, Eigen::MatrixXd(m, m));
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double lp =
                    msg.alpha(t, i) + edge(i, j) + node(j) + msg.beta(t + 1, j) - msg.ln_z;
                gm.pair_marginals[t](i, j) = std::isfinite(lp) ? std::exp(lp) : 0.0;
            }

    for (int t = 0; t < T; ++t)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j) gm.expected_switch_cost += gm.pair_marginals[t](i, j);
    for (int t = 0; t <= T; ++t) gm.expected_info += gm.node_marginals.row(t).dot(spec.info);
    return gm;
}

}  // namespace

GibbsPathMeasure transfer_solve(const PathMeasureSpec& spec) {
    spec.validate();
    return solve_unvalidated(spec);
}

TransitionOdds transition_odds(const PathMeasureSpec& spec, int t, int from_state, int to_state) {
    spec.validate();
    if (t < 0 || t >= spec.T) throw ShapeError("transition epoch t must satisfy 0 <= t < T");
    if (from_state < 0 || from_state >= spec.m || to_state < 0 || to_state >= spec.m)
        throw ShapeError("transition states out of range");
    if (!(spec.q(from_state, from_state) > 0.0))
        throw DomainError("transition odds undefined: q(from|from) = 0");

    TransitionOdds odds;
    const double delta_info = spec.info(to_state) - spec.info(from_state);
    const double cost = from_state == to_state ? 0.0 : spec.lambda_c;
    odds.one_step = spec.q(from_state, to_state) / spec.q(from_state, from_state) *
                    std::exp(-cost + spec.lambda_g * delta_info);

    const GibbsPathMeasure gm = transfer_solve(spec);
    const double stay = gm.pair_marginals[t](from_state, from_state);
    if (!(stay > 0.0)) throw DomainError("transition odds undefined: zero stay probability");
    odds.exact_conditional = gm.pair_marginals[t](from_state, to_state) / stay;
    return odds;
}

double path_entropy(const PathMeasureSpec& spec) {
    const GibbsPathMeasure gm = transfer_solve(spec);
    return spec.lambda_c * gm.expected_switch_cost - spec.lambda_g * gm.expected_info + gm.ln_z;
}

std::vector<Trajectory> sample_paths(const PathMeasureSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw ParameterError("sample count must be >= 1");
    const int m = spec.m, T = spec.T;
    const Messages msg = forward_backward(spec);
    const Eigen::MatrixXd edge = log_edge_factor(spec);

    RngStream rng(seed);
    std::vector<Trajectory> out(n);
    std::vector<double> w(m);
    for (int s = 0; s < n; ++s) {
        Trajectory traj;
        traj.states.resize(T + 1);

        double mx = msg.alpha.row(T).maxCoeff();
        for (int i = 0; i < m; ++i)
            w[i] = std::isfinite(msg.alpha(T, i)) ? std::exp(msg.alpha(T, i) - mx) : 0.0;
        traj.states[T] = rng.categorical(w);

        for (int t = T - 1; t >= 0; --t) {
            const int next = traj.states[t + 1];
            mx = kNegInf;
            for (int i = 0; i < m; ++i) mx = std::max(mx, msg.alpha(t, i) + edge(i, next));
            for (int i = 0; i < m; ++i) {
                const double lw = msg.alpha(t, i) + edge(i, next);
                w[i] = std::isfinite(lw) ? std::exp(lw - mx) : 0.0;
            }
            traj.states[t] = rng.categorical(w);
        }
        out[s] = std::move(traj);
    }
    return out;
}

namespace {

// Expectations (E[C], E[G]) at given multipliers, reusing the reference chain.
std::pair<double, double> expectations_at(PathMeasureSpec spec, double lc, double lg) {
    spec.lambda_c = lc;
    spec.lambda_g = lg;
    const GibbsPathMeasure gm = solve_unvalidated(spec);
    return {gm.expected_switch_cost, gm.expected_info};
}

}  // namespace

CalibrationResult calibrate_multipliers(const PathMeasureSpec& spec, double target_switch_cost,
                                        double target_info) {
    spec.validate();
    const double T = spec.T;

    if (!(target_switch_cost > 0.0) || !(target_switch_cost < T))
        throw InfeasibleError("target E[C] outside achievable open interval (0, T)", 0.0, T);

    const double info_min = spec.info.minCoeff() * (spec.T + 1);
    const double info_max = spec.info.maxCoeff() * (spec.T + 1);
    const bool info_flat = info_max - info_min <= 1e-15 * std::max(1.0, std::abs(info_max));
    if (info_flat) {
        if (std::abs(target_info - info_max) > 1e-9)
            throw InfeasibleError("target E[G] unreachable: info values all equal", info_min,
                                  info_max);
    } else if (!(target_info > info_min) || !(target_info < info_max)) {
        throw InfeasibleError("target E[G] outside achievable open interval", info_min, info_max);
    }

    double lc = 0.0, lg = 0.0;
    const double tol = 1e-9;
    CalibrationResult res;

    auto residual = [&](double a, double b) {
        auto [ec, eg] = expectations_at(spec, a, b);
        return Eigen::Vector2d(ec - target_switch_cost, eg - target_info);
    };

    Eigen::Vector2d f = residual(lc, lg);
    for (int iter = 0; iter < 200; ++iter) {
        res.iterations = iter + 1;
        if (std::abs(f(0)) <= tol && std::abs(f(1)) <= tol) break;

        // Jacobian by central differences; columns are d(EC,EG)/d(lc,lg).
        const double hc = 1e-5 * std::max(1.0, std::abs(lc));
        const double hg = 1e-5 * std::max(1.0, std::abs(lg));
        Eigen::Matrix2d jac;
        jac.col(0) = (residual(lc + hc, lg) - residual(lc - hc, lg)) / (2.0 * hc);
        jac.col(1) = (residual(lc, lg + hg) - residual(lc, lg - hg)) / (2.0 * hg);

        bool newton_ok = false;
        if (std::abs(jac.determinant()) > 1e-14) {
            const Eigen::Vector2d step = jac.partialPivLu().solve(f);
            double damp = 1.0;
            for (int back = 0; back < 30; ++back) {
                const Eigen::Vector2d trial = residual(lc - damp * step(0), lg - damp * step(1));
                if (trial.norm() < f.norm()) {
                    lc -= damp * step(0);
                    lg -= damp * step(1);
                    f = trial;
                    newton_ok = true;
                    break;
                }
                damp *= 0.5;
            }
        }

        if (!newton_ok) {
            // Bisection fallback: E[C] is monotone decreasing in lambda_c and
            // E[G] monotone increasing in lambda_g (exponential-family variance).
            auto solve_c = [&](double fixed_lg) {
                double lo = lc, hi = lc;
                while (expectations_at(spec, lo, fixed_lg).first < target_switch_cost) lo -= 1.0;
                while (expectations_at(spec, hi, fixed_lg).first > target_switch_cost) hi += 1.0;
                for (int b = 0; b < 80; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    if (expectations_at(spec, mid, fixed_lg).first > target_switch_cost)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            };
            auto solve_g = [&](double fixed_lc) {
                if (info_flat) return lg;
                double lo = lg, hi = lg;
                while (expectations_at(spec, fixed_lc, lo).second > target_info) lo -= 1.0;
                while (expectations_at(spec, fixed_lc, hi).second < target_info) hi += 1.0;
                for (int b = 0; b < 80; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    if (expectations_at(spec, fixed_lc, mid).second < target_info)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            };
            lc = solve_c(lg);
            lg = solve_g(lc);
            f = residual(lc, lg);
        }
    }

    res.lambda_c = lc;
    res.lambda_g = lg;
    res.residual_c = f(0);
    res.residual_g = f(1);
    if (std::abs(f(0)) > 1e-6 || std::abs(f(1)) > 1e-6)
        throw NumericError("calibration did not converge to targets within 1e-6");
    return res;
}

}  // namespace kernelcal::paths
