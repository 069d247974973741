#include "kernelcal/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kernelcal/errors.hpp"

namespace kernelcal {

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::squared_exponential: return "squared_exponential";
        case KernelFamily::matern_3_2: return "matern_3_2";
        case KernelFamily::explicit_matrix: return "explicit_matrix";
    }
    return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "squared_exponential") return KernelFamily::squared_exponential;
    if (s == "matern_3_2") return KernelFamily::matern_3_2;
    if (s == "explicit_matrix") return KernelFamily::explicit_matrix;
    throw ParameterError("unknown kernel family: " + s);
}

KernelSpec KernelSpec::squared_exponential(double lengthscale, double amplitude) {
    KernelSpec s;
    s.family = KernelFamily::squared_exponential;
    s.lengthscale = lengthscale;
    s.amplitude = amplitude;
    s.validate();
    return s;
}

KernelSpec KernelSpec::matern_3_2(double lengthscale, double amplitude) {
    KernelSpec s;
    s.family = KernelFamily::matern_3_2;
    s.lengthscale = lengthscale;
    s.amplitude = amplitude;
    s.validate();
    return s;
}

KernelSpec KernelSpec::explicit_matrix(Eigen::MatrixXd entries) {
    KernelSpec s;
    s.family = KernelFamily::explicit_matrix;
    s.entries = std::move(entries);
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (family == KernelFamily::explicit_matrix) {
        if (entries.rows() == 0 || entries.rows() != entries.cols())
            throw ShapeError("explicit kernel matrix must be square and nonempty");
        return;
    }
    if (!(lengthscale > 0.0)) throw ParameterError("lengthscale must be > 0");
    if (!(amplitude > 0.0)) throw ParameterError("amplitude must be > 0");
}

double KernelSpec::operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
    const double d = (x - y).norm();
    switch (family) {
        case KernelFamily::squared_exponential:
            return amplitude * std::exp(-0.5 * d * d / (lengthscale * lengthscale));
        case KernelFamily::matern_3_2: {
            const double z = std::sqrt(3.0) * d / lengthscale;
            return amplitude * (1.0 + z) * std::exp(-z);
        }
        case KernelFamily::explicit_matrix:
            throw ParameterError("explicit_matrix kernels have no pointwise form");
    }
    return 0.0;
}

KernelMatrix::KernelMatrix(DomainPtr domain, Eigen::MatrixXd entries)
    : domain_(std::move(domain)), entries_(std::move(entries)) {
    if (!domain_) throw ShapeError("kernel matrix needs a domain");
    if (entries_.rows() != domain_->size() || entries_.cols() != domain_->size())
        throw ShapeError("kernel matrix size does not match domain size");
}

double default_psd_tol(const Eigen::MatrixXd& entries) {
    const double max_diag = entries.rows() > 0 ? entries.diagonal().maxCoeff() : 0.0;
    return std::max(1e-12, 1e-9 * max_diag);
}

KernelMatrix gram(const KernelSpec& spec, DomainPtr domain) {
    spec.validate();
    if (!domain || domain->size() < 1) throw ShapeError("gram needs a nonempty domain");
    const int n = domain->size();

    if (spec.family == KernelFamily::explicit_matrix) {
        if (spec.entries.rows() != n)
            throw ShapeError("explicit kernel matrix size does not match domain");
        KernelMatrix k(domain, spec.entries);
        auto report = validate_psd(k);
        if (!report.pass)
            throw DataError("explicit kernel matrix is not PSD (min eigenvalue " +
                            std::to_string(report.min_eigenvalue) + ")");
        return k;
    }

    // Build the upper triangle and mirror so the result is exactly symmetric.
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = spec.amplitude;
        for (int j = i + 1; j < n; ++j) {
            const double v = spec(domain->point(i), domain->point(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return KernelMatrix(std::move(domain), std::move(K));
}

ValidationReport validate_psd(const Eigen::MatrixXd& entries, std::optional<double> psd_tol) {
    if (!entries.allFinite()) throw DataError("kernel matrix has NaN/Inf entries");
    ValidationReport r;
    r.psd_tol = psd_tol.value_or(default_psd_tol(entries));
    r.symmetry_defect = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    Eigen::MatrixXd sym = 0.5 * (entries + entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.pass = r.min_eigenvalue >= -r.psd_tol && r.symmetry_defect <= 1e-12;
    return r;
}

ValidationReport validate_psd(const KernelMatrix& k, std::optional<double> psd_tol) {
    return validate_psd(k.entries(), psd_tol);
}

namespace {
void require_same_domain(const KernelMatrix& a, const KernelMatrix& b, const char* op) {
    if (!a.domain().same_as(b.domain()))
        throw ShapeError(std::string(op) + ": kernels live on different domains");
}
}  // namespace

KernelMatrix kernel_sum(const KernelMatrix& k1, const KernelMatrix& k2, double alpha, double beta) {
    require_same_domain(k1, k2, "kernel_sum");
    if (alpha < 0.0 || beta < 0.0)
        throw ParameterError("cone combination coefficients must be >= 0");
    return KernelMatrix(k1.domain_ptr(), alpha * k1.entries() + beta * k2.entries());
}

KernelMatrix kernel_scale(const KernelMatrix& k, double c) {
    if (c < 0.0) throw ParameterError("scale factor must be >= 0");
    return KernelMatrix(k.domain_ptr(), c * k.entries());
}

KernelMatrix kernel_schur(const KernelMatrix& k1, const KernelMatrix& k2) {
    require_same_domain(k1, k2, "kernel_schur");
    return KernelMatrix(k1.domain_ptr(), k1.entries().cwiseProduct(k2.entries()));
}

double hs_distance(const KernelMatrix& k1, const KernelMatrix& k2) {
    require_same_domain(k1, k2, "hs_distance");
    const Eigen::MatrixXd diff = k1.entries() - k2.entries();
    const Eigen::VectorXd& w = k1.domain().weights();
    // sum_ij w_i w_j diff_ij^2 = w^T (diff . diff) w
    const double s = w.dot(diff.cwiseProduct(diff) * w);
    return std::sqrt(std::max(0.0, s));
}

double hs_norm(const KernelMatrix& k) {
    const Eigen::VectorXd& w = k.domain().weights();
    const double s = w.dot(k.entries().cwiseProduct(k.entries()) * w);
    return std::sqrt(std::max(0.0, s));
}

}  // namespace kernelcal
