// qcat — quantized perturbed cat maps: Loschmidt echo decay rates and LDOS
// widths over perturbation-strength sweeps.
//
// Subcommands: sigma-sweep, gamma-sweep, local-sweep, ldos-grid, correlate,
// lyapunov. Exit codes: 0 success, 1 validation error, 2 partial failure
// (some grid points errored), 3 internal error.

#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qcat/classical.hpp"
#include "qcat/config.hpp"
#include "qcat/sweep.hpp"
#include "qcat/task_pool.hpp"
#include "qcat/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string cache_dir;
    std::string seed;
    int threads = -1;
    bool paper_scale = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key=value lines)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--cache", args.cache_dir, "eigendecomposition cache directory");
    cmd->add_option("--seed", args.seed, "RNG seed (u64; mandatory here or in the config)");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
    cmd->add_flag("--paper-scale", args.paper_scale,
                  "use the paper-exact N and ensemble sizes (long runs)");
}

qcat::ExperimentConfig load_config(const CommonArgs& args, bool sigma_scale) {
    qcat::ExperimentConfig cfg;
    if (!args.config_path.empty())
        qcat::apply_config_entries(cfg, qcat::parse_config_file(args.config_path));
    std::map<std::string, std::string> overrides;
    if (!args.out_dir.empty()) overrides["out"] = args.out_dir;
    if (!args.cache_dir.empty()) overrides["cache"] = args.cache_dir;
    if (!args.seed.empty()) overrides["seed"] = args.seed;
    if (args.threads >= 0) overrides["threads"] = std::to_string(args.threads);
    if (args.paper_scale) overrides["paper_scale"] = "1";
    qcat::apply_config_entries(cfg, overrides);
    qcat::apply_paper_scale(cfg, sigma_scale);
    return cfg;
}

int report(const qcat::SweepOutcome& outcome, const qcat::ExperimentConfig& cfg) {
    for (const auto& f : outcome.files) std::printf("wrote %s/%s\n", cfg.out_dir.c_str(), f.c_str());
    if (outcome.n_failed > 0)
        std::fprintf(stderr, "%d grid point(s) failed; see *.errors.csv\n", outcome.n_failed);
    return outcome.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    qcat::pin_blas_threads();
    CLI::App app{"quantized perturbed cat maps: LE decay rates and LDOS widths"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qcat::kVersion);

    CommonArgs sigma_args, gamma_args, local_args, grid_args, corr_args, lyap_args;

    auto* sigma_cmd = app.add_subcommand("sigma-sweep", "LDOS width sigma vs chi, per N");
    add_common_flags(sigma_cmd, sigma_args);

    auto* gamma_cmd = app.add_subcommand("gamma-sweep", "LE decay rate Gamma vs chi");
    add_common_flags(gamma_cmd, gamma_args);

    auto* local_cmd =
        app.add_subcommand("local-sweep", "windowed perturbation: sigma and Gamma per width w");
    add_common_flags(local_cmd, local_args);

    auto* grid_cmd = app.add_subcommand("ldos-grid", "binned LDOS density rho(dphi, chi)");
    add_common_flags(grid_cmd, grid_args);

    auto* corr_cmd =
        app.add_subcommand("correlate", "detrended sigma-Gamma correlation from sweep CSVs");
    std::string sigma_file, gamma_file;
    corr_cmd->add_option("--sigma-file", sigma_file, "sigma sweep CSV")->required();
    corr_cmd->add_option("--gamma-file", gamma_file, "gamma sweep CSV")->required();
    add_common_flags(corr_cmd, corr_args);

    auto* lyap_cmd = app.add_subcommand("lyapunov", "closed-form and numeric Lyapunov exponents");
    std::string lyap_map = "G2";
    double lyap_k = 0.0;
    double lyap_w = 1.0;
    int lyap_steps = 2000, lyap_samples = 32;
    lyap_cmd->add_option("--map", lyap_map, "cat map label (G1..G4)");
    lyap_cmd->add_option("--k", lyap_k, "shear strength");
    lyap_cmd->add_option("--w", lyap_w, "window width (1 = global)");
    lyap_cmd->add_option("--steps", lyap_steps, "tangent-map steps per sample");
    lyap_cmd->add_option("--samples", lyap_samples, "number of random initial points");
    add_common_flags(lyap_cmd, lyap_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sigma_cmd->parsed()) {
            auto cfg = load_config(sigma_args, true);
            return report(qcat::run_sigma_sweep(cfg), cfg);
        }
        if (gamma_cmd->parsed()) {
            auto cfg = load_config(gamma_args, false);
            return report(qcat::run_gamma_sweep(cfg), cfg);
        }
        if (local_cmd->parsed()) {
            auto cfg = load_config(local_args, false);
            return report(qcat::run_local_sweep(cfg), cfg);
        }
        if (grid_cmd->parsed()) {
            auto cfg = load_config(grid_args, false);
            return report(qcat::run_ldos_grid(cfg), cfg);
        }
        if (corr_cmd->parsed()) {
            std::string out = corr_args.out_dir.empty() ? "." : corr_args.out_dir;
            auto rep = qcat::correlate(sigma_file, gamma_file, out);
            std::printf("pearson_detrended=%.6f sigma_cov=%.6f sigma_period=%.4f "
                        "oscillation_significant=%d n_points=%d\n",
                        rep.pearson_detrended, rep.sigma_cov, rep.sigma_period,
                        rep.oscillation_significant ? 1 : 0, rep.n_points);
            return 0;
        }
        if (lyap_cmd->parsed()) {
            const qcat::CatMap& map = qcat::cat_map_by_label(lyap_map);
            double closed = qcat::lyapunov_closed_form(map);
            std::uint64_t seed = lyap_args.seed.empty() ? 1u : std::stoull(lyap_args.seed);
            auto est = qcat::lyapunov_numeric(map, lyap_k, qcat::ShearWindow(
                                                  qcat::shear_profile_peak_q(), lyap_w),
                                              lyap_steps, lyap_samples, seed);
            std::printf("map=%s closed_form=%.6f numeric=%.6f std_error=%.3g n_steps=%d "
                        "n_samples=%d converged=%d\n",
                        lyap_map.c_str(), closed, est.value, est.std_error, est.n_steps,
                        est.n_samples, est.converged ? 1 : 0);
            return 0;
        }
    } catch (const qcat::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const qcat::GridMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 3;
}
