#include "kernelcal/infogeom.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "kernelcal/errors.hpp"

namespace kernelcal {

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd p) : probs(std::move(p)) {
    if (probs.size() == 0) throw ShapeError("empty distribution");
    if (!probs.allFinite()) throw DataError("distribution has non-finite entries");
    if ((probs.array() < 0.0).any()) throw DataError("distribution has negative entries");
    if (std::abs(probs.sum() - 1.0) > 1e-10)
        throw DataError("distribution does not sum to 1 within 1e-10");
}

InfoValue gp_info_gain(const Eigen::MatrixXd& k_design, double noise_var) {
    if (!(noise_var > 0.0)) throw ParameterError("noise_var must be > 0");
    const int m = static_cast<int>(k_design.rows());
    if (m == 0) return InfoValue{0.0};
    if (k_design.cols() != m) throw ShapeError("design kernel matrix must be square");
    if (!k_design.allFinite()) throw DataError("design kernel matrix has NaN/Inf entries");

    Eigen::MatrixXd sym = 0.5 * (k_design + k_design.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    const double tol = default_psd_tol(sym);
    double nats = 0.0;
    for (int i = 0; i < m; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -tol)
            throw DataError("design kernel matrix is not PSD within tolerance");
        lam = std::max(0.0, lam);
        nats += 0.5 * std::log1p(lam / noise_var);
    }
    return InfoValue{nats};
}

InfoValue gp_info_gain(const KernelMatrix& k_design, double noise_var) {
    return gp_info_gain(k_design.entries(), noise_var);
}

InfoValue gaussian_kl_cov(const Eigen::MatrixXd& k_model, const Eigen::MatrixXd& k_env,
                          double noise_var) {
    if (!(noise_var > 0.0)) throw ParameterError("noise_var must be > 0");
    const int n = static_cast<int>(k_model.rows());
    if (k_env.rows() != n || k_env.cols() != n || k_model.cols() != n)
        throw ShapeError("gaussian_kl: matrices must be square and share a size");

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd sigma0 = k_env + noise_var * id;   // data
    const Eigen::MatrixXd sigma1 = k_model + noise_var * id; // model

    Eigen::LLT<Eigen::MatrixXd> llt1(sigma1);
    Eigen::LLT<Eigen::MatrixXd> llt0(sigma0);
    if (llt1.info() != Eigen::Success || llt0.info() != Eigen::Success)
        throw NumericError("gaussian_kl: covariance not positive definite");

    auto logdet = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
        return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    };
    const double trace = llt1.solve(sigma0).trace();
    const double kl = 0.5 * (trace - n + logdet(llt1) - logdet(llt0));
    // Gibbs inequality: true value is >= 0, clip roundoff residue.
    return InfoValue{std::max(0.0, kl)};
}

InfoValue gaussian_kl(const KernelMatrix& k_model, const KernelMatrix& k_env, double noise_var) {
    if (!k_model.domain().same_as(k_env.domain()))
        throw ShapeError("gaussian_kl: kernels live on different domains");
    return gaussian_kl_cov(k_model.entries(), k_env.entries(), noise_var);
}

double hellinger_kernel(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) throw ShapeError("hellinger_kernel: support sizes differ");
    return (p.probs.array() * q.probs.array()).sqrt().sum();
}

Eigen::MatrixXd fisher_rao_metric(const DiscreteFamily& family, const Eigen::VectorXd& theta,
                                  double step) {
    const int d = static_cast<int>(theta.size());
    const Eigen::VectorXd p0 = family(theta);
    const int n = static_cast<int>(p0.size());
    if ((p0.array() <= 0.0).any())
        throw DomainError("fisher_rao_metric: family must be strictly positive at theta");

    // Central-difference scores: s_i(x) = (ln p(theta + h e_i) - ln p(theta - h e_i)) / 2h.
    Eigen::MatrixXd scores(n, d);
    for (int i = 0; i < d; ++i) {
        const double h = step * std::max(1.0, std::abs(theta(i)));
        Eigen::VectorXd tp = theta, tm = theta;
        tp(i) += h;
        tm(i) -= h;
        const Eigen::VectorXd pp = family(tp), pm = family(tm);
        if (pp.size() != n || pm.size() != n)
            throw ShapeError("fisher_rao_metric: family changed support size");
        if ((pp.array() <= 0.0).any() || (pm.array() <= 0.0).any())
            throw DomainError("fisher_rao_metric: family must stay positive near theta");
        scores.col(i) = (pp.array().log() - pm.array().log()) / (2.0 * h);
    }

    // g = sum_x p(x) s(x) s(x)^T, PSD by construction.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (int x = 0; x < n; ++x) g += p0(x) * scores.row(x).transpose() * scores.row(x);
    return 0.5 * (g + g.transpose());
}

}  // namespace kernelcal
