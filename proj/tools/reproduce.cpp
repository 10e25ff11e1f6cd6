#include "reproduce.hpp"

#include "tvmap/baselines.hpp"
#include "tvmap/bootstrap.hpp"
#include "tvmap/errors.hpp"
#include "tvmap/io.hpp"
#include "tvmap/model.hpp"
#include "tvmap/parallel.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/rng.hpp"
#include "tvmap/tvsolve.hpp"
#include "tvmap/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>

namespace cli {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace tvmap;

namespace {

struct Cell {
    ProfileName profile;
    int n, N, t;
    std::string id;
};

Cell parse_cell(const std::string& text) {
    Cell cell;
    cell.id = text;
    std::vector<std::string> parts;
    std::string part;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(part);
            part.clear();
        } else {
            part += c;
        }
    }
    parts.push_back(part);
    if (parts.size() != 4)
        throw data_error("reproduce: bad cell '" + text + "' (expected profile:n:N:t)");
    cell.profile = parse_profile(parts[0]);
    cell.n = std::stoi(parts[1]);
    cell.N = std::stoi(parts[2]);
    cell.t = std::stoi(parts[3]);
    return cell;
}

Scenario cell_scenario(const Cell& cell, const ReproduceOptions& opt, std::uint64_t salt) {
    Scenario sc;
    sc.profile = cell.profile;
    sc.N0 = opt.N0;
    sc.n0 = opt.n0;
    sc.T = opt.T;
    sc.n = cell.n;
    sc.N = cell.N;
    sc.t = cell.t;
    sc.target_prevalence = opt.target_prevalence;
    sc.signal_spread = opt.signal_spread;
    sc.seed = derive_seed(opt.seed, salt);
    return sc;
}

json run_meta(const ReproduceOptions& opt, const std::string& what) {
    json meta;
    meta["command"] = "reproduce " + what;
    meta["seed"] = opt.seed;
    meta["runs"] = opt.runs;
    meta["target_prevalence"] = opt.target_prevalence;
    meta["signal_spread"] = opt.signal_spread;
    meta["n0"] = opt.n0;
    meta["T"] = opt.T;
    meta["N0"] = opt.N0;
    meta["qut_m"] = opt.qut_m;
    meta["alpha"] = opt.alpha;
    meta["gpr_folds"] = opt.gpr_folds;
    meta["full_scale"] = opt.full_scale;
    meta["version"] = tvmap::version;
    return meta;
}

int reproduce_table1(const ReproduceOptions& opt) {
    const int runs = opt.runs > 0 ? opt.runs : (opt.full_scale ? 100 : 20);
    std::vector<Cell> cells;
    for (const auto& text : opt.cells) cells.push_back(parse_cell(text));
    if (cells.empty()) cells.push_back(parse_cell("lake:500:30:96"));

    std::string summary = "profile,n,N,t,estimator,mean_mse,runs\n";
    std::string per_run = "scenario,method,run,mse\n";

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& cell = cells[ci];
        const Scenario sc = cell_scenario(cell, opt, ci);
        const ProfileMap profile = make_profile(cell.profile, opt.N0, 0.0, 1.0);
        const NeighborGraph graph = build_neighbor_graph(LatticeSpec::full(cell.N, cell.N));
        const DifferenceOperator D = build_difference_operator(graph);

        std::vector<double> mse_tv(runs), mse_gpr(runs), mse_emp(runs);
        parallel_for(static_cast<std::size_t>(runs), opt.workers, [&](std::size_t j) {
            const Dataset ds = simulate_scenario_dataset(sc, j);
            const std::uint64_t run_seed = derive_seed(sc.seed, j);

            const double beta0 = fit_intercept(ds.X, ds.y);
            const QutResult qut = qut_estimate(ds.X, D, opt.alpha, opt.qut_m,
                                               derive_seed(run_seed, 10), beta0, 1);
            const TvSolution sol = fit_tv(ds.X, ds.y, D, qut.lambda_qut);
            mse_tv[j] = scaled_mse(sol.mu, profile, cell.N);

            const Eigen::VectorXd emp = empirical_estimate(ds.X, ds.y);
            mse_emp[j] = scaled_mse(emp, profile, cell.N);
            const Eigen::VectorXd gpr =
                gpr_logodds(emp, graph, opt.gpr_folds, derive_seed(run_seed, 11));
            mse_gpr[j] = scaled_mse(gpr, profile, cell.N);
        });

        const auto emit = [&](const char* method, const std::vector<double>& mses) {
            double mean = 0.0;
            for (int j = 0; j < runs; ++j) {
                mean += mses[static_cast<std::size_t>(j)];
                per_run += cell.id;
                per_run += ',';
                per_run += method;
                per_run += ',';
                per_run += std::to_string(j);
                per_run += ',';
                per_run += io::format_double(mses[static_cast<std::size_t>(j)]);
                per_run += '\n';
            }
            mean /= runs;
            summary += profile_name(cell.profile) + "," + std::to_string(cell.n) + "," +
                       std::to_string(cell.N) + "," + std::to_string(cell.t) + "," + method +
                       "," + io::format_double(mean) + "," + std::to_string(runs) + "\n";
            std::cerr << "reproduce table1 " << cell.id << " " << method << ": mean MSE "
                      << mean << "\n";
        };
        emit("TV", mse_tv);
        emit("GPR", mse_gpr);
        emit("empirical", mse_emp);
    }

    const fs::path dir(opt.out_dir);
    io::atomic_write(dir / "table1.csv", summary);
    io::atomic_write(dir / "table1_runs.csv", per_run);
    json meta = run_meta(opt, "table1");
    meta["runs"] = runs;
    meta["cells"] = opt.cells;
    io::atomic_write(dir / "table1.meta.json", meta.dump(2) + "\n");
    return 0;
}

int reproduce_table2(const ReproduceOptions& opt) {
    const int mc_runs = opt.runs > 0 ? opt.runs : (opt.full_scale ? 100 : 10);
    std::vector<Cell> cells;
    for (const auto& text : opt.cells) cells.push_back(parse_cell(text));
    if (cells.empty()) cells.push_back(parse_cell("lake:500:30:1"));

    std::string summary = "profile,n,N,t,estimator,mse_bc,coverage,width,runs\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& cell = cells[ci];
        const Scenario sc = cell_scenario(cell, opt, 1000 + ci);

        BootstrapConfig cfg;
        cfg.n_boot = opt.full_scale ? 5000 : opt.n_boot;
        cfg.n_locations = opt.n_locations;
        cfg.runs = opt.full_scale ? 100 : opt.boot_runs;
        cfg.alpha = 0.05;
        cfg.qut_m = opt.qut_m;
        cfg.qut_alpha = opt.alpha;
        cfg.gpr_folds = opt.gpr_folds;
        cfg.workers = opt.workers;

        for (EstimatorKind est :
             {EstimatorKind::TV, EstimatorKind::GPR, EstimatorKind::Empirical}) {
            const CoverageStats stats = coverage_eval(sc, est, mc_runs, cfg);
            summary += profile_name(cell.profile) + "," + std::to_string(cell.n) + "," +
                       std::to_string(cell.N) + "," + std::to_string(cell.t) + "," +
                       estimator_name(est) + "," + io::format_double(stats.mse_bc) + "," +
                       io::format_double(stats.coverage) + "," +
                       io::format_double(stats.width) + "," + std::to_string(stats.runs) +
                       "\n";
            std::cerr << "reproduce table2 " << cell.id << " " << estimator_name(est)
                      << ": mse_bc " << stats.mse_bc << " coverage " << stats.coverage
                      << " width " << stats.width << "\n";
        }
    }

    const fs::path dir(opt.out_dir);
    io::atomic_write(dir / "table2.csv", summary);
    json meta = run_meta(opt, "table2");
    meta["mc_runs"] = mc_runs;
    meta["boot_runs"] = opt.full_scale ? 100 : opt.boot_runs;
    meta["n_boot"] = opt.full_scale ? 5000 : opt.n_boot;
    meta["n_locations"] = opt.n_locations;
    meta["cells"] = opt.cells;
    io::atomic_write(dir / "table2.meta.json", meta.dump(2) + "\n");
    return 0;
}

int reproduce_power(const ReproduceOptions& opt) {
    const int runs = opt.runs > 0 ? opt.runs : 200;
    const int N = 5; // p = 25 so the LRT applies at every tested n
    const ProfileMap alt = make_profile(ProfileName::lake_corner, opt.N0, 0.0, 1.0);

    std::string out_csv = "n,method,kind,rate,runs\n";
    for (std::size_t ni = 0; ni < opt.power_sizes.size(); ++ni) {
        const int n = opt.power_sizes[ni];
        const int n0 = std::max(2 * n, 500);

        // One fixed design per sample size; fresh outcomes per Monte Carlo run.
        Scenario sc;
        sc.profile = ProfileName::lake_corner;
        sc.N0 = opt.N0;
        sc.n0 = n0;
        sc.T = opt.T;
        sc.n = n;
        sc.N = N;
        sc.t = 96;
        sc.target_prevalence = opt.target_prevalence;
        sc.signal_spread = opt.signal_spread;
        sc.seed = derive_seed(opt.seed, 5000 + ni);

        const ProfileMap profile = make_profile(sc.profile, sc.N0, 0.0, 1.0);
        PopulationData pop = simulate_population(profile, sc.n0, sc.T,
                                                 derive_seed(sc.seed, 0), opt.workers);
        const Amplitudes amp = generate_infections(pop, profile, sc.target_prevalence,
                                                   derive_seed(sc.seed, 1), sc.signal_spread);
        const Dataset ds = subsample_dataset(pop, sc.n, sc.N, sc.t, derive_seed(sc.seed, 2));
        const DifferenceOperator D =
            build_difference_operator(build_neighbor_graph(ds.lattice));

        // Alternative logits on the coarse design: amplitude from the
        // population calibration, geometry from the downsampled profile.
        const Eigen::VectorXd truth_coarse = downsample_map(alt.values, alt.n0, N);
        Eigen::VectorXd mu_alt(truth_coarse.size());
        for (Eigen::Index l = 0; l < truth_coarse.size(); ++l)
            mu_alt[l] = amp.offset + (truth_coarse[l] > 0.5 ? amp.a : -amp.a);

        std::map<std::string, std::vector<double>> rejects;
        for (const char* kind : {"level", "power"}) {
            std::vector<double> tv_rej(runs, 0.0), lrt_rej(runs, 0.0), chi2_rej(runs, 0.0);
            parallel_for(static_cast<std::size_t>(runs), opt.workers, [&](std::size_t j) {
                Rng rng(derive_seed(sc.seed, 7000 + j + (kind[0] == 'p' ? 100000 : 0)));
                Eigen::VectorXd y(ds.X.rows());
                for (;;) {
                    if (kind[0] == 'l') {
                        for (Eigen::Index i = 0; i < y.size(); ++i)
                            y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
                    } else {
                        const Eigen::VectorXd eta = ds.X * mu_alt;
                        for (Eigen::Index i = 0; i < y.size(); ++i)
                            y[i] = rng.bernoulli(sigmoid(eta[i])) ? 1.0 : 0.0;
                    }
                    bool any0 = false, any1 = false;
                    for (Eigen::Index i = 0; i < y.size(); ++i)
                        (y[i] == 1.0 ? any1 : any0) = true;
                    if (any0 && any1) break;
                }
                const std::uint64_t run_seed = derive_seed(sc.seed, 9000 + j);
                tv_rej[j] = tv_test(ds.X, y, D, opt.alpha, opt.power_m, run_seed).reject;
                lrt_rej[j] =
                    lrt(ds.X, y, LrtMode::exact, opt.alpha, opt.power_m, run_seed).reject;
                chi2_rej[j] = lrt(ds.X, y, LrtMode::chi2, opt.alpha, 0, run_seed).reject;
            });
            rejects[std::string("TV:") + kind] = tv_rej;
            rejects[std::string("LRT_exact:") + kind] = lrt_rej;
            rejects[std::string("LRT_chi2:") + kind] = chi2_rej;
        }

        for (const auto& [key, vals] : rejects) {
            const auto colon = key.find(':');
            double rate = 0.0;
            for (double v : vals) rate += v;
            rate /= static_cast<double>(vals.size());
            out_csv += std::to_string(n) + "," + key.substr(0, colon) + "," +
                       key.substr(colon + 1) + "," + io::format_double(rate) + "," +
                       std::to_string(runs) + "\n";
            std::cerr << "reproduce power n=" << n << " " << key << ": " << rate << "\n";
        }
    }

    const fs::path dir(opt.out_dir);
    io::atomic_write(dir / "power.csv", out_csv);
    json meta = run_meta(opt, "power");
    meta["runs"] = runs;
    meta["sizes"] = opt.power_sizes;
    meta["m"] = opt.power_m;
    io::atomic_write(dir / "power.meta.json", meta.dump(2) + "\n");
    return 0;
}

} // namespace

int cmd_reproduce(const ReproduceOptions& opt) {
    if (opt.what == "table1") return reproduce_table1(opt);
    if (opt.what == "table2") return reproduce_table2(opt);
    if (opt.what == "power") return reproduce_power(opt);
    throw data_error("reproduce: unknown target '" + opt.what +
                     "' (expected table1, table2, power)");
}

} // namespace cli
