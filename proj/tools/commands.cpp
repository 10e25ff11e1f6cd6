#include "commands.hpp"

#include "tvmap/baselines.hpp"
#include "tvmap/errors.hpp"
#include "tvmap/io.hpp"
#include "tvmap/model.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/rng.hpp"
#include "tvmap/tvsolve.hpp"
#include "tvmap/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace cli {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace tvmap;

namespace {

io::Provenance make_provenance(const std::string& command, const json& config,
                               std::uint64_t seed) {
    io::Provenance prov;
    prov.command = command;
    prov.config_hash = io::hash_hex(command + "\n" + config.dump());
    prov.seed = seed;
    return prov;
}

void write_meta(const fs::path& artifact, const io::Provenance& prov, const json& config) {
    json j;
    j["command"] = prov.command;
    j["config"] = config;
    j["config_hash"] = prov.config_hash;
    j["seed"] = prov.seed;
    j["version"] = tvmap::version;
    io::atomic_write(artifact.string() + ".meta.json", j.dump(2) + "\n");
}

} // namespace

int cmd_simulate(const SimulateOptions& opt) {
    const json cfg = json::parse(io::read_text(opt.config_path));
    Scenario sc;
    sc.profile = parse_profile(cfg.at("profile").get<std::string>());
    sc.N0 = cfg.value("N0", 50);
    sc.n0 = cfg.at("n0").get<int>();
    sc.T = cfg.at("T").get<int>();
    sc.n = cfg.at("n").get<int>();
    sc.N = cfg.at("N").get<int>();
    sc.t = cfg.at("t").get<int>();
    sc.target_prevalence = cfg.at("target_prevalence").get<double>();
    sc.signal_spread = cfg.value("signal_spread", 0.0);
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    sc.workers = opt.workers;

    const ProfileMap profile = make_profile(sc.profile, sc.N0, 0.0, 1.0);
    PopulationData pop =
        simulate_population(profile, sc.n0, sc.T, derive_seed(sc.seed, 0), opt.workers);
    const Amplitudes amp = generate_infections(pop, profile, sc.target_prevalence,
                                               derive_seed(sc.seed, 1), sc.signal_spread);
    const Dataset ds = subsample_dataset(pop, sc.n, sc.N, sc.t, derive_seed(sc.seed, 2));

    const io::Provenance prov = make_provenance("simulate", cfg, sc.seed);
    io::write_dataset(opt.out_dir, ds, prov);

    // Extend the sidecar with the scenario echo and calibrated amplitudes.
    json side = json::parse(io::read_text(fs::path(opt.out_dir) / "dataset.json"));
    side["scenario"] = cfg;
    side["amplitudes"] = {{"a", amp.a}, {"b", amp.b}, {"offset", amp.offset}};
    io::atomic_write(fs::path(opt.out_dir) / "dataset.json", side.dump(2) + "\n");

    if (opt.dump_locations) {
        std::string out;
        out.reserve(static_cast<std::size_t>(pop.n0) * pop.T * 4);
        for (int i = 0; i < pop.n0; ++i) {
            for (int t = 0; t < pop.T; ++t) {
                if (t) out += ',';
                out += std::to_string(pop.at(i, t));
            }
            out += '\n';
        }
        io::atomic_write(fs::path(opt.out_dir) / "L0.csv", out);
    }
    std::cerr << "simulate: wrote " << ds.X.rows() << "x" << ds.X.cols() << " dataset to "
              << opt.out_dir << " (amplitude a=" << amp.a << ")\n";
    return 0;
}

int cmd_fit(const FitOptions& opt) {
    const Dataset ds = io::read_dataset(opt.data_dir);
    const NeighborGraph graph = build_neighbor_graph(ds.lattice);
    const DifferenceOperator D = build_difference_operator(graph);
    const EstimatorKind method = parse_estimator(opt.method);

    json cfg = {{"data", opt.data_dir},   {"method", opt.method},   {"lambda", opt.lambda},
                {"alpha", opt.alpha},     {"qut_m", opt.qut_m},     {"seed", opt.seed},
                {"gpr_folds", opt.gpr_folds}};
    const io::Provenance prov = make_provenance("fit", cfg, opt.seed);

    Eigen::VectorXd map;
    json diag;
    diag["method"] = estimator_name(method);

    switch (method) {
        case EstimatorKind::TV: {
            double lambda = opt.lambda;
            diag["lambda_source"] = (lambda >= 0.0) ? "flag" : "qut";
            if (lambda < 0.0) {
                const double beta0 = fit_intercept(ds.X, ds.y);
                const QutResult qut = qut_estimate(ds.X, D, opt.alpha, opt.qut_m, opt.seed,
                                                   beta0, opt.workers);
                lambda = qut.lambda_qut;
                diag["qut"] = {{"lambda_qut", qut.lambda_qut},
                               {"alpha", qut.alpha},
                               {"m", qut.m},
                               {"discards", qut.discards},
                               {"beta0", qut.beta0}};
            }
            const TvSolution sol = fit_tv(ds.X, ds.y, D, lambda);
            if (!sol.converged)
                std::cerr << "fit: warning: solver stopped at dual residual "
                          << sol.dual_residual << "\n";
            map = sol.mu;
            diag["lambda"] = sol.lambda;
            diag["objective"] = sol.objective;
            diag["dual_residual"] = sol.dual_residual;
            diag["iterations"] = sol.iterations;
            diag["converged"] = sol.converged;
            break;
        }
        case EstimatorKind::Empirical:
            map = empirical_estimate(ds.X, ds.y);
            break;
        case EstimatorKind::GPR:
            map = gpr_logodds(empirical_estimate(ds.X, ds.y), graph, opt.gpr_folds, opt.seed);
            break;
    }

    io::write_map_csv(opt.out_path, map, graph);
    write_meta(opt.out_path, prov, cfg);
    if (!opt.pgm_path.empty()) io::write_pgm(opt.pgm_path, minmax_scale01(map), graph);
    if (!opt.diag_path.empty()) io::atomic_write(opt.diag_path, diag.dump(2) + "\n");
    std::cerr << "fit: wrote " << opt.out_path << "\n";
    return 0;
}

int cmd_qut(const QutOptions& opt) {
    const Dataset ds = io::read_dataset(opt.data_dir);
    const DifferenceOperator D = build_difference_operator(build_neighbor_graph(ds.lattice));
    const double beta0 = fit_intercept(ds.X, ds.y);
    const QutResult qut =
        qut_estimate(ds.X, D, opt.alpha, opt.m, opt.seed, beta0, opt.workers);

    json cfg = {{"data", opt.data_dir}, {"alpha", opt.alpha}, {"m", opt.m}, {"seed", opt.seed}};
    const io::Provenance prov = make_provenance("qut", cfg, opt.seed);
    io::write_qut_json(opt.out_path, qut, prov);
    write_meta(opt.out_path, prov, cfg);
    std::cerr << "qut: lambda_qut = " << qut.lambda_qut << "\n";
    return 0;
}

int cmd_test(const TestOptions& opt) {
    const Dataset ds = io::read_dataset(opt.data_dir);
    const DifferenceOperator D = build_difference_operator(build_neighbor_graph(ds.lattice));

    TestReport report;
    if (opt.method == "tv") {
        report = tv_test(ds.X, ds.y, D, opt.alpha, opt.m, opt.seed, opt.workers);
    } else if (opt.method == "lrt-chi2") {
        report = lrt(ds.X, ds.y, LrtMode::chi2, opt.alpha, opt.m, opt.seed, opt.workers);
    } else if (opt.method == "lrt-exact") {
        report = lrt(ds.X, ds.y, LrtMode::exact, opt.alpha, opt.m, opt.seed, opt.workers);
    } else {
        throw data_error("test: unknown method '" + opt.method +
                         "' (expected tv, lrt-chi2, lrt-exact)");
    }

    json cfg = {{"data", opt.data_dir},
                {"method", opt.method},
                {"alpha", opt.alpha},
                {"m", opt.m},
                {"seed", opt.seed}};
    const io::Provenance prov = make_provenance("test", cfg, opt.seed);
    io::write_test_report_json(opt.out_path, report, prov);
    write_meta(opt.out_path, prov, cfg);
    std::cerr << "test: statistic " << report.statistic << (report.reject ? " >= " : " < ")
              << report.threshold << " -> " << (report.reject ? "reject" : "keep") << " H0\n";
    return 0;
}

int cmd_bootstrap(const BootstrapOptions& opt) {
    const Dataset ds = io::read_dataset(opt.data_dir);
    const DifferenceOperator D = build_difference_operator(build_neighbor_graph(ds.lattice));
    const EstimatorKind estimator = parse_estimator(opt.estimator);
    const BootstrapResult res = bootstrap_fit(ds, D, opt.config, estimator);

    json cfg = {{"data", opt.data_dir},
                {"estimator", opt.estimator},
                {"n_boot", opt.config.n_boot},
                {"n_locations", opt.config.n_locations},
                {"runs", opt.config.runs},
                {"alpha", opt.config.alpha},
                {"qut_m", opt.config.qut_m},
                {"qut_alpha", opt.config.qut_alpha},
                {"gpr_folds", opt.config.gpr_folds},
                {"seed", opt.config.seed}};
    const io::Provenance prov = make_provenance("bootstrap", cfg, opt.config.seed);

    const fs::path dir(opt.out_dir);
    io::write_bootstrap_csv(dir / "bootstrap.csv", res);

    json meta;
    meta["config"] = cfg;
    meta["config_hash"] = prov.config_hash;
    meta["version"] = tvmap::version;
    meta["estimator"] = estimator_name(res.estimator);
    meta["replicate_count"] = res.replicate_count;
    meta["degenerate_redraws"] = res.degenerate_redraws;
    const auto as_vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    meta["mu_hat"] = as_vec(res.mu_hat);
    meta["mu_bar_boot"] = as_vec(res.mu_bar_boot);
    meta["scaled_lower"] = as_vec(res.scaled_lower);
    meta["scaled_upper"] = as_vec(res.scaled_upper);
    io::atomic_write(dir / "bootstrap.json", meta.dump(2) + "\n");
    std::cerr << "bootstrap: " << res.replicate_count << " replicates, "
              << res.degenerate_redraws << " redraws\n";
    return 0;
}

int cmd_evaluate(const EvaluateOptions& opt) {
    // Peek at the map to infer the grid size when not given.
    int N = opt.n;
    if (N <= 0) {
        const Eigen::MatrixXd raw = [&] {
            std::string text = io::read_text(opt.map_path);
            const auto first_newline = text.find('\n');
            if (first_newline == std::string::npos)
                throw data_error(opt.map_path + ": not a map CSV");
            const fs::path tmp = fs::path(opt.map_path).string() + ".body.tmp";
            io::atomic_write(tmp, text.substr(first_newline + 1));
            Eigen::MatrixXd M = io::read_matrix_csv(tmp);
            fs::remove(tmp);
            return M;
        }();
        N = static_cast<int>(std::max(raw.col(0).maxCoeff(), raw.col(1).maxCoeff())) + 1;
    }
    const NeighborGraph graph = build_neighbor_graph(LatticeSpec::full(N, N));
    const Eigen::VectorXd map = io::read_map_csv(opt.map_path, graph);
    const ProfileMap profile = make_profile(parse_profile(opt.profile), opt.n0, 0.0, 1.0);
    const double mse = scaled_mse(map, profile, N);

    json cfg = {{"map", opt.map_path}, {"profile", opt.profile}, {"n0", opt.n0}, {"n", N}};
    const io::Provenance prov = make_provenance("evaluate", cfg, 0);
    json out = {{"scaled_mse", mse}, {"profile", opt.profile}, {"N", N}, {"N0", opt.n0}};
    if (!opt.out_path.empty()) {
        io::atomic_write(opt.out_path, out.dump(2) + "\n");
        write_meta(opt.out_path, prov, cfg);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace cli
