#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "kernelcal/domain.hpp"

namespace kernelcal {

enum class KernelFamily { squared_exponential, matern_3_2, explicit_matrix };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

// Member of the kernel family: a parametric stationary form or an explicit
// Gram matrix. Lengthscale and amplitude must be strictly positive.
struct KernelSpec {
    KernelFamily family = KernelFamily::squared_exponential;
    double lengthscale = 1.0;
    double amplitude = 1.0;  // a^2, the k(x,x) value
    Eigen::MatrixXd entries; // explicit_matrix only

    static KernelSpec squared_exponential(double lengthscale, double amplitude = 1.0);
    static KernelSpec matern_3_2(double lengthscale, double amplitude = 1.0);
    static KernelSpec explicit_matrix(Eigen::MatrixXd entries);

    void validate() const;

    // Pointwise evaluation for parametric families.
    double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const;
};

// Gram matrix of a kernel on a weighted discrete domain.
class KernelMatrix {
  public:
    KernelMatrix(DomainPtr domain, Eigen::MatrixXd entries);

    const DiscreteDomain& domain() const { return *domain_; }
    DomainPtr domain_ptr() const { return domain_; }
    const Eigen::MatrixXd& entries() const { return entries_; }
    int size() const { return static_cast<int>(entries_.rows()); }

  private:
    DomainPtr domain_;
    Eigen::MatrixXd entries_;
};

struct ValidationReport {
    double min_eigenvalue = 0.0;
    double symmetry_defect = 0.0;
    double psd_tol = 0.0;
    bool pass = false;
};

// Relative tolerance for eigenvalue noise: 1e-9 x max diagonal entry
// (floored away from zero for near-zero matrices).
double default_psd_tol(const Eigen::MatrixXd& entries);

// Evaluate the kernel on the domain. Parametric families produce the exact
// closed forms with the upper triangle mirrored; an explicit matrix is
// checked against the domain size and must pass the PSD validation.
KernelMatrix gram(const KernelSpec& spec, DomainPtr domain);

// Symmetry + positive semi-definiteness check. Pass iff the minimum
// eigenvalue of the symmetrized matrix is >= -psd_tol and the symmetry
// defect is <= 1e-12.
ValidationReport validate_psd(const KernelMatrix& k, std::optional<double> psd_tol = std::nullopt);
ValidationReport validate_psd(const Eigen::MatrixXd& entries, std::optional<double> psd_tol = std::nullopt);

// Cone operations. Outputs stay in the PSD cone whenever inputs do.
KernelMatrix kernel_sum(const KernelMatrix& k1, const KernelMatrix& k2,
                        double alpha = 1.0, double beta = 1.0);
KernelMatrix kernel_scale(const KernelMatrix& k, double c);
KernelMatrix kernel_schur(const KernelMatrix& k1, const KernelMatrix& k2);

// Hilbert-Schmidt distance: sqrt(sum_ij w_i w_j (k1_ij - k2_ij)^2), the
// quadrature form of the L2 operator distance.
double hs_distance(const KernelMatrix& k1, const KernelMatrix& k2);
double hs_norm(const KernelMatrix& k);

}  // namespace kernelcal
