#include "kernelcal/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "kernelcal/errors.hpp"

namespace kernelcal::thermo {

void ThermoConfig::validate() const {
    if (!(kBT > 0.0) || !std::isfinite(kBT)) throw ParameterError("kBT must be positive");
}

LandauerLedger landauer_ledger(const std::vector<double>& info_trajectory,
                               const ThermoConfig& cfg) {
    cfg.validate();
    if (info_trajectory.size() < 2)
        throw DataError("info trajectory needs at least two samples");
    for (double v : info_trajectory)
        if (!std::isfinite(v)) throw DataError("info trajectory has non-finite entries");

    LandauerLedger ledger;
    ledger.entries.reserve(info_trajectory.size() - 1);
    for (std::size_t t = 0; t + 1 < info_trajectory.size(); ++t) {
        LedgerEntry e;
        e.step = static_cast<int>(t);
        e.delta_info = info_trajectory[t + 1] - info_trajectory[t];
        e.min_work = cfg.kBT * std::max(0.0, e.delta_info);
        ledger.total_info += e.delta_info;
        ledger.total_info_gained += std::max(0.0, e.delta_info);
        ledger.total_min_work += e.min_work;
        ledger.entries.push_back(e);
    }
    return ledger;
}

double extraction_bound(double delta_f, double info_nats, const ThermoConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(delta_f) || !std::isfinite(info_nats))
        throw DataError("extraction bound inputs must be finite");
    if (info_nats < 0.0) throw DataError("information must be nonnegative");
    return delta_f + cfg.kBT * info_nats;
}

SpeedLimitReport speed_limit_check(const std::vector<double>& info_trajectory,
                                   const std::vector<double>& supplied_power,
                                   const std::vector<double>& hs_speed,
                                   const ThermoConfig& cfg) {
    cfg.validate();
    if (info_trajectory.size() < 2)
        throw DataError("info trajectory needs at least two samples");
    const std::size_t steps = info_trajectory.size() - 1;
    if (supplied_power.size() != steps)
        throw SizeError("supplied power must have one entry per increment");
    if (hs_speed.size() != steps)
        throw SizeError("hs speed must have one entry per increment");
    for (double v : info_trajectory)
        if (!std::isfinite(v)) throw DataError("info trajectory has non-finite entries");
    for (double v : supplied_power)
        if (!std::isfinite(v) || v < 0.0) throw DataError("supplied power must be finite and >= 0");

    SpeedLimitReport rep;
    rep.required_power.resize(steps);
    rep.supplied_power = supplied_power;
    rep.hs_speed = hs_speed;
    for (std::size_t t = 0; t < steps; ++t) {
        const double delta = info_trajectory[t + 1] - info_trajectory[t];
        rep.required_power[t] = cfg.kBT * std::max(0.0, delta);
        if (supplied_power[t] < rep.required_power[t] - 1e-12 && rep.first_violation < 0) {
            rep.satisfied = false;
            rep.first_violation = static_cast<int>(t);
        }
    }
    return rep;
}

SpeedLimitReport speed_limit_check(const std::vector<KernelMatrix>& kernel_trajectory,
                                   const std::vector<double>& info_trajectory,
                                   const std::vector<double>& supplied_power,
                                   const ThermoConfig& cfg) {
    if (kernel_trajectory.size() != info_trajectory.size())
        throw SizeError("kernel and info trajectories must align");
    if (kernel_trajectory.size() < 2)
        throw DataError("kernel trajectory needs at least two samples");
    std::vector<double> speeds(kernel_trajectory.size() - 1);
    for (std::size_t t = 0; t + 1 < kernel_trajectory.size(); ++t)
        speeds[t] = hs_distance(kernel_trajectory[t], kernel_trajectory[t + 1]);
    return speed_limit_check(info_trajectory, supplied_power, speeds, cfg);
}

}  // namespace kernelcal::thermo
