#pragma once

#include <vector>

#include "kernelcal/kernel.hpp"

namespace kernelcal::thermo {

struct ThermoConfig {
    double kBT = 1.0;  // energy per nat

    void validate() const;
};

// Per-step bookkeeping of the minimal work needed to record the information
// gained at that step. Only positive increments cost work; forgetting is free
// at this level of accounting.
struct LedgerEntry {
    int step = 0;
    double delta_info = 0.0;  // nats
    double min_work = 0.0;    // kBT * max(0, delta_info)
};

struct LandauerLedger {
    std::vector<LedgerEntry> entries;
    double total_info = 0.0;         // sum of increments, may be negative
    double total_info_gained = 0.0;  // sum of positive increments only
    double total_min_work = 0.0;     // sum of per-step minimal work
};

// info_trajectory holds cumulative information I_t at each step; entry k of
// the ledger covers the increment from t=k to t=k+1. Needs at least two
// samples to have any increment at all.
LandauerLedger landauer_ledger(const std::vector<double>& info_trajectory,
                               const ThermoConfig& cfg = {});

// Upper bound on extractable work given a free-energy drop and the mutual
// information acquired by the controller: delta_f + kBT * info_nats.
double extraction_bound(double delta_f, double info_nats, const ThermoConfig& cfg = {});

struct SpeedLimitReport {
    std::vector<double> required_power;  // kBT * max(0, delta I) per step
    std::vector<double> supplied_power;
    std::vector<double> hs_speed;  // copied through as a diagnostic
    bool satisfied = true;         // supplied >= required - 1e-12 everywhere
    int first_violation = -1;      // step index, or -1
};

// supplied_power and hs_speed must have exactly one entry per increment of
// the info trajectory (length - 1).
SpeedLimitReport speed_limit_check(const std::vector<double>& info_trajectory,
                                   const std::vector<double>& supplied_power,
                                   const std::vector<double>& hs_speed,
                                   const ThermoConfig& cfg = {});

// Same check with per-step kernel speeds computed from the realized kernel
// trajectory; kernel_trajectory must align with info_trajectory.
SpeedLimitReport speed_limit_check(const std::vector<KernelMatrix>& kernel_trajectory,
                                   const std::vector<double>& info_trajectory,
                                   const std::vector<double>& supplied_power,
                                   const ThermoConfig& cfg = {});

}  // namespace kernelcal::thermo
