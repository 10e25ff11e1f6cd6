#pragma once

#include "tvmap/simulate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cli {

// Desk-scale reproduction of the Monte Carlo studies. The defaults trade
// replicate counts for laptop runtimes; --full restores the paper-scale
// counts (excluded from CI budgets).
struct ReproduceOptions {
    std::string what; // table1 | table2 | power
    std::vector<std::string> cells;
    std::string out_dir;
    int runs = -1; // -1: per-table default
    std::uint64_t seed = 20240501;
    double target_prevalence = 0.75;
    double signal_spread = 0.45;
    int n0 = 5000;
    int T = 2880;
    int N0 = 50;
    int qut_m = 200;
    double alpha = 0.05;
    int gpr_folds = 3;
    int boot_runs = 30;
    int n_boot = 500;
    int n_locations = 720;
    std::vector<int> power_sizes = {50, 100, 200};
    int power_m = 200;
    double power_amplitude = 0.0; // 0: calibrated per dataset
    bool full_scale = false;
    int workers = 0;
};

int cmd_reproduce(const ReproduceOptions& opt);

} // namespace cli
