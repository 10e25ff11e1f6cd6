#include "commands.hpp"
#include "reproduce.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
int main(int argc, char** argv) {
    CLI::App app{"tvmap: total-variation reconstruction of infection propensity maps "
                 "from dwell-time tracks"};
    app.set_version_flag("--version", tvmap::version);
    app.require_subcommand(1);

    int workers = 0;
    app.add_option("--workers", workers, "Worker threads (0 = hardware)")->capture_default_str();

    cli::SimulateOptions sim;
    auto* sub_sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a scenario");
    sub_sim->add_option("--config", sim.config_path, "Scenario config JSON")->required();
    sub_sim->add_option("--out", sim.out_dir, "Output dataset directory")->required();
    sub_sim->add_flag("--dump-locations", sim.dump_locations, "Also write the L0 matrix (large)");

    cli::FitOptions fit;
    auto* sub_fit = app.add_subcommand("fit", "Fit a propensity map (TV, empirical, or GPR)");
    sub_fit->add_option("--data", fit.data_dir, "Dataset directory")->required();
    sub_fit->add_option("--method", fit.method, "tv | empirical | gpr")->capture_default_str();
    sub_fit->add_option("--lambda", fit.lambda, "Fixed penalty weight (TV; default: QUT)");
    sub_fit->add_option("--alpha", fit.alpha, "QUT level")->capture_default_str();
    sub_fit->add_option("--qut-m", fit.qut_m, "QUT Monte Carlo size")->capture_default_str();
    sub_fit->add_option("--gpr-folds", fit.gpr_folds, "GPR CV folds")->capture_default_str();
    sub_fit->add_option("--seed", fit.seed, "RNG seed")->capture_default_str();
    sub_fit->add_option("--out", fit.out_path, "Output map CSV")->required();
    sub_fit->add_option("--pgm", fit.pgm_path, "Also render a grayscale PGM");
    sub_fit->add_option("--diag", fit.diag_path, "Write solver diagnostics JSON");

    cli::QutOptions qut;
    auto* sub_qut = app.add_subcommand("qut", "Estimate the quantile universal threshold");
    sub_qut->add_option("--data", qut.data_dir, "Dataset directory")->required();
    sub_qut->add_option("--alpha", qut.alpha, "Level")->capture_default_str();
    sub_qut->add_option("--m", qut.m, "Monte Carlo draws")->capture_default_str();
    sub_qut->add_option("--seed", qut.seed, "RNG seed")->capture_default_str();
    sub_qut->add_option("--out", qut.out_path, "Output JSON")->required();

    cli::TestOptions test;
    auto* sub_test = app.add_subcommand("test", "Test H0: constant propensity map");
    sub_test->add_option("--data", test.data_dir, "Dataset directory")->required();
    sub_test->add_option("--method", test.method, "tv | lrt-chi2 | lrt-exact")
        ->capture_default_str();
    sub_test->add_option("--alpha", test.alpha, "Level")->capture_default_str();
    sub_test->add_option("--m", test.m, "Monte Carlo draws")->capture_default_str();
    sub_test->add_option("--seed", test.seed, "RNG seed")->capture_default_str();
    sub_test->add_option("--out", test.out_path, "Output report JSON")->required();

    cli::BootstrapOptions boot;
    auto* sub_boot = app.add_subcommand("bootstrap", "Bootstrap data augmentation with "
                                                     "bias correction and intervals");
    sub_boot->add_option("--data", boot.data_dir, "Dataset directory")->required();
    sub_boot->add_option("--estimator", boot.estimator, "tv | empirical | gpr")
        ->capture_default_str();
    sub_boot->add_option("--n-boot", boot.config.n_boot, "Augmented sample size")
        ->capture_default_str();
    sub_boot->add_option("--n-locations", boot.config.n_locations,
                         "Resampled locations per bootstrap individual")
        ->capture_default_str();
    sub_boot->add_option("--runs", boot.config.runs, "Bootstrap replicates")
        ->capture_default_str();
    sub_boot->add_option("--alpha", boot.config.alpha, "Interval level")->capture_default_str();
    sub_boot->add_option("--qut-m", boot.config.qut_m, "QUT draws per TV replicate")
        ->capture_default_str();
    sub_boot->add_option("--qut-alpha", boot.config.qut_alpha, "QUT level")
        ->capture_default_str();
    sub_boot->add_option("--gpr-folds", boot.config.gpr_folds, "GPR CV folds")
        ->capture_default_str();
    sub_boot->add_option("--seed", boot.config.seed, "RNG seed")->capture_default_str();
    sub_boot->add_option("--out", boot.out_dir, "Output directory")->required();

    cli::EvaluateOptions eval;
    auto* sub_eval = app.add_subcommand("evaluate", "Scaled MSE of a map against a truth profile");
    sub_eval->add_option("--map", eval.map_path, "Map CSV")->required();
    sub_eval->add_option("--profile", eval.profile, "lake | river | lake_corner")
        ->capture_default_str();
    sub_eval->add_option("--n0", eval.n0, "Truth grid size")->capture_default_str();
    sub_eval->add_option("--n", eval.n, "Map grid size (0 = infer)")->capture_default_str();
    sub_eval->add_option("--out", eval.out_path, "Output JSON (optional)");

    cli::ReproduceOptions rep;
    auto* sub_rep = app.add_subcommand("reproduce",
                                       "Desk-scale Monte Carlo studies (table1|table2|power)");
    sub_rep->add_option("what", rep.what, "table1 | table2 | power")->required();
    sub_rep->add_option("--cells", rep.cells, "Cells as profile:n:N:t")->delimiter(',');
    sub_rep->add_option("--out", rep.out_dir, "Output directory")->required();
    sub_rep->add_option("--runs", rep.runs, "Monte Carlo runs (-1 = table default)");
    sub_rep->add_option("--seed", rep.seed, "Base seed")->capture_default_str();
    sub_rep->add_option("--target-prevalence", rep.target_prevalence,
                        "Infection prevalence the amplitude calibration targets")
        ->capture_default_str();
    sub_rep->add_option("--signal-spread", rep.signal_spread,
                        "Prevalence target of the symmetric signal part (0: no offset)")
        ->capture_default_str();
    sub_rep->add_option("--n0", rep.n0, "Population size")->capture_default_str();
    sub_rep->add_option("--T", rep.T, "Walk length")->capture_default_str();
    sub_rep->add_option("--qut-m", rep.qut_m, "QUT Monte Carlo size")->capture_default_str();
    sub_rep->add_option("--alpha", rep.alpha, "Level")->capture_default_str();
    sub_rep->add_option("--gpr-folds", rep.gpr_folds, "GPR CV folds")->capture_default_str();
    sub_rep->add_option("--boot-runs", rep.boot_runs, "Bootstrap replicates (table2)")
        ->capture_default_str();
    sub_rep->add_option("--n-boot", rep.n_boot, "Bootstrap sample size (table2)")
        ->capture_default_str();
    sub_rep->add_option("--n-locations", rep.n_locations,
                        "Locations per bootstrap individual (table2)")
        ->capture_default_str();
    sub_rep->add_option("--sizes", rep.power_sizes, "Sample sizes (power)")->delimiter(',');
    sub_rep->add_option("--m", rep.power_m, "Null-calibration draws (power)")
        ->capture_default_str();
    sub_rep->add_flag("--full", rep.full_scale, "Paper-scale replicate counts (slow)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sim.workers = fit.workers = qut.workers = test.workers = workers;
        boot.config.workers = workers;
        rep.workers = workers;
        if (sub_sim->parsed()) return cli::cmd_simulate(sim);
        if (sub_fit->parsed()) return cli::cmd_fit(fit);
        if (sub_qut->parsed()) return cli::cmd_qut(qut);
        if (sub_test->parsed()) return cli::cmd_test(test);
        if (sub_boot->parsed()) return cli::cmd_bootstrap(boot);
        if (sub_eval->parsed()) return cli::cmd_evaluate(eval);
        if (sub_rep->parsed()) return cli::cmd_reproduce(rep);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const tvmap::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const tvmap::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
}
