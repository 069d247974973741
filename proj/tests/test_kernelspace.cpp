#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kernelcal/domain.hpp"
#include "kernelcal/errors.hpp"
#include "kernelcal/kernel.hpp"

using namespace kernelcal;

namespace {

DomainPtr unit_points(const Eigen::MatrixXd& pts) {
    return std::make_shared<const DiscreteDomain>(pts);
}

DomainPtr two_points() {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    return unit_points(pts);
}

// Random PSD matrix B^T B with entries of modest scale.
Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    return b.transpose() * b / n;
}

}  // namespace

TEST_CASE("squared exponential closed forms") {
    Eigen::MatrixXd one(1, 1);
    one << 0.3;
    const KernelMatrix k1 = gram(KernelSpec::squared_exponential(1.0, 1.0), unit_points(one));
    CHECK(k1.entries()(0, 0) == 1.0);

    const KernelMatrix k2 = gram(KernelSpec::squared_exponential(1.0, 1.0), two_points());
    CHECK(k2.entries()(0, 0) == 1.0);
    CHECK(k2.entries()(0, 1) == doctest::Approx(0.6065306597126334).epsilon(1e-14));
    CHECK(k2.entries()(0, 1) == k2.entries()(1, 0));  // exact mirror
}

TEST_CASE("matern 3/2 closed form") {
    const KernelMatrix k = gram(KernelSpec::matern_3_2(1.0, 1.0), two_points());
    CHECK(k.entries()(0, 1) == doctest::Approx(0.4833577245965077).epsilon(1e-14));
    CHECK(k.entries()(0, 0) == 1.0);
}

TEST_CASE("amplitude scales values") {
    const KernelMatrix k = gram(KernelSpec::squared_exponential(0.5, 2.5), two_points());
    CHECK(k.entries()(0, 0) == 2.5);
    CHECK(k.entries()(0, 1) == doctest::Approx(2.5 * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("parametric parameter validation") {
    CHECK_THROWS_AS(KernelSpec::squared_exponential(0.0).validate(), ParameterError);
    CHECK_THROWS_AS(KernelSpec::squared_exponential(-1.0).validate(), ParameterError);
    CHECK_THROWS_AS(KernelSpec::matern_3_2(1.0, 0.0).validate(), ParameterError);
}

TEST_CASE("explicit non-psd matrix is rejected by gram") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(gram(KernelSpec::explicit_matrix(bad), two_points()), DataError);

    const ValidationReport rep = validate_psd(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("validate_psd on identity and rank-one matrices") {
    const ValidationReport id3 = validate_psd(Eigen::MatrixXd::Identity(3, 3));
    CHECK(id3.pass);
    CHECK(id3.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-12));

    const ValidationReport ones = validate_psd(Eigen::MatrixXd::Ones(2, 2));
    CHECK(ones.pass);
    CHECK(ones.min_eigenvalue == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("validate_psd flags asymmetry and non-finite entries") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_FALSE(validate_psd(asym).pass);

    Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
    nan(0, 1) = std::nan("");
    CHECK_THROWS_AS(validate_psd(nan), DataError);
}

TEST_CASE("cone operations on simple matrices") {
    auto dom = two_points();
    const KernelMatrix id(dom, Eigen::MatrixXd::Identity(2, 2));
    const KernelMatrix ones(dom, Eigen::MatrixXd::Ones(2, 2));

    const KernelMatrix zero = kernel_scale(id, 0.0);
    CHECK(zero.entries().isZero(0.0));
    CHECK(validate_psd(zero).pass);  // boundary of the cone

    const KernelMatrix s = kernel_sum(id, ones);
    CHECK(s.entries()(0, 0) == 2.0);
    CHECK(s.entries()(0, 1) == 1.0);
    CHECK(validate_psd(s).min_eigenvalue == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(kernel_scale(id, -0.5), ParameterError);
}

TEST_CASE("cone operations require a shared domain") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 2.0;
    const KernelMatrix a(two_points(), Eigen::MatrixXd::Identity(2, 2));
    const KernelMatrix b(unit_points(pts), Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(kernel_sum(a, b), ShapeError);
    CHECK_THROWS_AS(kernel_schur(a, b), ShapeError);
    CHECK_THROWS_AS(hs_distance(a, b), ShapeError);
}

TEST_CASE("cone closure over seeded psd pairs") {
    std::mt19937_64 rng(20260815);
    std::uniform_real_distribution<double> coef(0.0, 3.0);
    Eigen::MatrixXd pts(5, 1);
    pts << 0.0, 0.2, 0.4, 0.7, 1.0;
    auto dom = unit_points(pts);

    for (int trial = 0; trial < 1000; ++trial) {
        const KernelMatrix k1(dom, random_psd(rng, 5));
        const KernelMatrix k2(dom, random_psd(rng, 5));
        CHECK(validate_psd(kernel_sum(k1, k2, coef(rng), coef(rng))).pass);
        CHECK(validate_psd(kernel_scale(k1, coef(rng))).pass);
        CHECK(validate_psd(kernel_schur(k1, k2)).pass);
    }
}

TEST_CASE("hs distance four-term oracle") {
    auto dom = two_points();  // unit weights
    const KernelMatrix id(dom, Eigen::MatrixXd::Identity(2, 2));
    const KernelMatrix ones(dom, Eigen::MatrixXd::Ones(2, 2));
    CHECK(hs_distance(id, ones) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(hs_distance(id, id) == 0.0);

    // d(2k, k) = ||k|| by absolute homogeneity
    const KernelMatrix twice = kernel_scale(ones, 2.0);
    CHECK(hs_distance(twice, ones) == doctest::Approx(hs_norm(ones)).epsilon(1e-14));
}

TEST_CASE("hs distance uses quadrature weights") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    Eigen::VectorXd w(2);
    w << 2.0, 0.5;
    auto dom = std::make_shared<const DiscreteDomain>(pts, w);
    const KernelMatrix a(dom, Eigen::MatrixXd::Identity(2, 2));
    const KernelMatrix b(dom, Eigen::MatrixXd::Zero(2, 2));
    // sum_ij w_i w_j diff^2 = 4*1 + 0.25*1
    CHECK(hs_distance(a, b) == doctest::Approx(std::sqrt(4.25)).epsilon(1e-14));
}

TEST_CASE("hs metric axioms on seeded triples") {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd pts(4, 1);
    pts << 0.0, 0.3, 0.6, 1.0;
    auto dom = unit_points(pts);
    for (int trial = 0; trial < 1000; ++trial) {
        const KernelMatrix a(dom, random_psd(rng, 4));
        const KernelMatrix b(dom, random_psd(rng, 4));
        const KernelMatrix c(dom, random_psd(rng, 4));
        const double ab = hs_distance(a, b);
        const double ba = hs_distance(b, a);
        const double ac = hs_distance(a, c);
        const double cb = hs_distance(c, b);
        CHECK(ab == ba);
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("gram of the same spec on the same domain is reproducible") {
    auto dom = DiscreteDomain::grid1d(9, 0.0, 1.0);
    const KernelSpec spec = KernelSpec::matern_3_2(0.4, 1.3);
    CHECK(hs_distance(gram(spec, dom), gram(spec, dom)) == 0.0);
}

TEST_CASE("grid constructors carry quadrature weights") {
    auto g1 = DiscreteDomain::grid1d(5, 0.0, 1.0);
    CHECK(g1->size() == 5);
    CHECK(g1->weights()(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g1->points()(4, 0) == 1.0);

    auto g2 = DiscreteDomain::grid2d(4);
    CHECK(g2->size() == 16);
    CHECK(g2->dim() == 2);
    CHECK(g2->weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g2->points()(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("domain invariants") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    Eigen::VectorXd neg(2);
    neg << 1.0, -0.1;
    CHECK_THROWS_AS(DiscreteDomain(pts, neg), ParameterError);
    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(DiscreteDomain(pts, zeros), ParameterError);
    Eigen::VectorXd three = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(DiscreteDomain(pts, three), ShapeError);
    CHECK(DiscreteDomain(pts).diameter() == 1.0);
}
