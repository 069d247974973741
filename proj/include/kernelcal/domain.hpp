#pragma once

#include <Eigen/Dense>
#include <memory>

namespace kernelcal {

// Weighted discrete domain: n points in R^d with nonnegative quadrature
// weights for the reference measure. All kernel-space integrals become
// weighted sums over these points.
class DiscreteDomain {
  public:
    // points: n x d (one row per point), weights: n
    DiscreteDomain(Eigen::MatrixXd points, Eigen::VectorXd weights);

    // Unit-weight domain.
    explicit DiscreteDomain(Eigen::MatrixXd points);

    int size() const { return static_cast<int>(points_.rows()); }
    int dim() const { return static_cast<int>(points_.cols()); }
    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    Eigen::RowVectorXd point(int i) const { return points_.row(i); }

    // Largest pairwise point distance.
    double diameter() const;

    bool same_as(const DiscreteDomain& other) const;

    // Regular 1-D grid of n points on [lo, hi], weights = grid spacing.
    static std::shared_ptr<const DiscreteDomain> grid1d(int n, double lo, double hi);
    // Regular n x n grid on [0,1]^2 with uniform weights 1/n^2.
    static std::shared_ptr<const DiscreteDomain> grid2d(int n);

  private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd weights_;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

}  // namespace kernelcal
