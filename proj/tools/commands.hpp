#pragma once

#include "tvmap/bootstrap.hpp"
#include "tvmap/simulate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cli {

// Every command echoes its configuration hash and seed into a .meta.json
// sidecar next to its primary artifact.

struct SimulateOptions {
    std::string config_path;
    std::string out_dir;
    bool dump_locations = false;
    int workers = 0;
};
int cmd_simulate(const SimulateOptions& opt);

struct FitOptions {
    std::string data_dir;
    std::string method = "tv";
    double lambda = -1.0; // <0 means "use QUT"
    double alpha = 0.05;
    int qut_m = 200;
    int gpr_folds = 4;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string pgm_path;
    std::string diag_path;
    int workers = 0;
};
int cmd_fit(const FitOptions& opt);

struct QutOptions {
    std::string data_dir;
    double alpha = 0.05;
    int m = 200;
    std::uint64_t seed = 0;
    std::string out_path;
    int workers = 0;
};
int cmd_qut(const QutOptions& opt);

struct TestOptions {
    std::string data_dir;
    std::string method = "tv"; // tv | lrt-chi2 | lrt-exact
    double alpha = 0.05;
    int m = 200;
    std::uint64_t seed = 0;
    std::string out_path;
    int workers = 0;
};
int cmd_test(const TestOptions& opt);

struct BootstrapOptions {
    std::string data_dir;
    std::string estimator = "tv";
    tvmap::BootstrapConfig config;
    std::string out_dir;
};
int cmd_bootstrap(const BootstrapOptions& opt);

struct EvaluateOptions {
    std::string map_path;
    std::string profile = "lake";
    int n0 = 50;
    int n = 0; // 0: inferred from the map file
    std::string out_path;
};
int cmd_evaluate(const EvaluateOptions& opt);

} // namespace cli
