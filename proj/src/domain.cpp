#include "kernelcal/domain.hpp"

#include "kernelcal/errors.hpp"

namespace kernelcal {

DiscreteDomain::DiscreteDomain(Eigen::MatrixXd points, Eigen::VectorXd weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.rows() < 1) throw ShapeError("domain needs at least one point");
    if (points_.rows() != weights_.size())
        throw ShapeError("point count does not match weight count");
    if (!weights_.allFinite() || !points_.allFinite())
        throw DataError("domain has non-finite entries");
    if ((weights_.array() < 0.0).any())
        throw ParameterError("domain weights must be nonnegative");
    if (weights_.maxCoeff() <= 0.0)
        throw ParameterError("at least one domain weight must be positive");
}

DiscreteDomain::DiscreteDomain(Eigen::MatrixXd points)
    : DiscreteDomain(points, Eigen::VectorXd::Ones(points.rows())) {}

double DiscreteDomain::diameter() const {
    double d2 = 0.0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            d2 = std::max(d2, (points_.row(i) - points_.row(j)).squaredNorm());
    return std::sqrt(d2);
}

bool DiscreteDomain::same_as(const DiscreteDomain& other) const {
    if (this == &other) return true;
    return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
           points_ == other.points_ && weights_ == other.weights_;
}

DomainPtr DiscreteDomain::grid1d(int n, double lo, double hi) {
    if (n < 1) throw ParameterError("grid1d needs n >= 1");
    Eigen::MatrixXd pts(n, 1);
    for (int i = 0; i < n; ++i)
        pts(i, 0) = (n == 1) ? lo : lo + (hi - lo) * i / double(n - 1);
    double h = (n == 1) ? 1.0 : (hi - lo) / double(n - 1);
    return std::make_shared<DiscreteDomain>(pts, Eigen::VectorXd::Constant(n, h));
}

DomainPtr DiscreteDomain::grid2d(int n) {
    if (n < 1) throw ParameterError("grid2d needs n >= 1");
    Eigen::MatrixXd pts(n * n, 2);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            // cell centers
            pts(iy * n + ix, 0) = (ix + 0.5) / double(n);
            pts(iy * n + ix, 1) = (iy + 0.5) / double(n);
        }
    return std::make_shared<DiscreteDomain>(pts, Eigen::VectorXd::Constant(n * n, 1.0 / double(n * n)));
}

}  // namespace kernelcal
