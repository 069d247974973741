#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kernelcal/bloomsim.hpp"
#include "kernelcal/errors.hpp"
#include "kernelcal/kernel.hpp"
#include "kernelcal/thermo.hpp"

using namespace kernelcal;
using namespace kernelcal::thermo;

TEST_CASE("landauer ledger basic accounting") {
    const LandauerLedger a = landauer_ledger({0.0, 1.0});
    CHECK(a.total_min_work == 1.0);
    CHECK(a.entries.size() == 1);

    // one bit gained costs exactly kBT ln 2
    const double ln2 = 0.6931471805599453;
    CHECK(landauer_ledger({0.0, ln2}).total_min_work == ln2);

    // information loss is free at this level of accounting
    const LandauerLedger loss = landauer_ledger({2.0, 1.0});
    CHECK(loss.entries[0].min_work == 0.0);
    CHECK(loss.total_info == -1.0);
    CHECK(loss.total_info_gained == 0.0);
}

TEST_CASE("ledger kBT scaling and validation") {
    ThermoConfig cfg;
    cfg.kBT = 2.5;
    CHECK(landauer_ledger({0.0, 1.0}, cfg).total_min_work == 2.5);

    CHECK_THROWS_AS(landauer_ledger({1.0}), DataError);
    CHECK_THROWS_AS(landauer_ledger({0.0, std::nan("")}), DataError);
    ThermoConfig bad;
    bad.kBT = 0.0;
    CHECK_THROWS_AS(landauer_ledger({0.0, 1.0}, bad), ParameterError);
}

TEST_CASE("ledger additivity over concatenation is exact") {
    const std::vector<double> full{0.0, 0.3, 0.1, 0.9, 0.7};
    const std::vector<double> left{0.0, 0.3, 0.1};
    const std::vector<double> right{0.1, 0.9, 0.7};
    CHECK(landauer_ledger(full).total_min_work ==
          landauer_ledger(left).total_min_work + landauer_ledger(right).total_min_work);
}

TEST_CASE("cumulative work dominates the net information change") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 0.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> traj{0.0};
        for (int t = 0; t < 10; ++t) traj.push_back(traj.back() + g(rng));
        const LandauerLedger ledger = landauer_ledger(traj);
        CHECK(ledger.total_min_work >= traj.back() - traj.front() - 1e-12);
    }
}

TEST_CASE("extraction bound closed forms") {
    CHECK(extraction_bound(0.0, 1.0) == 1.0);
    CHECK(extraction_bound(3.25, 0.0) == 3.25);
    // 1 bit at kBT = 1
    CHECK(extraction_bound(-0.5, 0.6931471805599453) ==
          doctest::Approx(0.1931471805599453).epsilon(1e-15));
    CHECK_THROWS_AS(extraction_bound(0.0, -0.1), DataError);
}

TEST_CASE("extraction bound is linear in kBT") {
    ThermoConfig one, two;
    two.kBT = 2.0;
    const double base = extraction_bound(0.0, 0.7, one);
    CHECK(extraction_bound(0.0, 0.7, two) == 2.0 * base);
    CHECK(extraction_bound(1.5, 0.7, two) == 1.5 + 2.0 * base);
}

TEST_CASE("speed limit check flags undersupplied steps") {
    // dI = 0.5 per step, supplied 0.4 -> violated at the first step
    const SpeedLimitReport bad = speed_limit_check({0.0, 0.5, 1.0}, {0.4, 0.6}, {0.0, 0.0});
    CHECK_FALSE(bad.satisfied);
    CHECK(bad.first_violation == 0);
    CHECK(bad.required_power[0] == 0.5);

    const SpeedLimitReport ok = speed_limit_check({0.0, 0.5, 1.0}, {0.5, 0.5}, {0.1, 0.1});
    CHECK(ok.satisfied);
    CHECK(ok.first_violation == -1);

    CHECK_THROWS_AS(speed_limit_check({0.0, 1.0}, {0.5, 0.5}, {0.0}), SizeError);
}

TEST_CASE("speed limit from a kernel trajectory reports hs speeds") {
    auto dom = DiscreteDomain::grid1d(6, 0.0, 1.0);
    const KernelMatrix a = gram(KernelSpec::squared_exponential(0.3), dom);
    const KernelMatrix b = gram(KernelSpec::squared_exponential(0.1), dom);

    const SpeedLimitReport constant =
        speed_limit_check({a, a, a}, {0.0, 0.1, 0.2}, {0.1, 0.1});
    CHECK(constant.hs_speed[0] == 0.0);
    CHECK(constant.hs_speed[1] == 0.0);
    CHECK(constant.satisfied);

    const SpeedLimitReport moving = speed_limit_check({a, b, b}, {0.0, 0.1, 0.2}, {0.1, 0.1});
    CHECK(moving.hs_speed[0] == doctest::Approx(hs_distance(a, b)).epsilon(1e-14));
    CHECK(moving.hs_speed[1] == 0.0);

    CHECK_THROWS_AS(speed_limit_check({a, b}, {0.0, 0.1, 0.2}, {0.1, 0.1}), SizeError);
}

TEST_CASE("episode information rate sits far below the actuation budget") {
    // The Landauer cost of the information actually gathered is measured in
    // thermal units; at lab temperature one nat costs ~4e-21 J while each
    // actuation step spends order 0.1 energy units, so the realized schedule
    // satisfies the bound with enormous margin.
    bloom::EpisodeConfig cfg;
    cfg.budget.horizon_steps = 20;
    const bloom::EpisodeResult ep = bloom::run_episode(cfg, 3);
    REQUIRE(ep.steps.size() >= 2);

    std::vector<double> info{0.0};
    std::vector<double> power, speed;
    for (const bloom::StepRecord& r : ep.steps) {
        info.push_back(r.cumulative_info);
        power.push_back(r.energy_cost);
        speed.push_back(r.hs_speed);
    }
    ThermoConfig physical;
    physical.kBT = 4.14e-21;  // k_B x 300 K in joules
    const SpeedLimitReport rep = speed_limit_check(info, power, speed, physical);
    CHECK(rep.satisfied);
}
