// sweep.hpp — experiment orchestration: sigma/gamma/local sweeps, LDOS
// density grids, and the sigma-gamma correlation report
//
// Sweep cells (chi points, N values, windows) are independent tasks on a
// bounded pool. One run writes: the CSVs named below, a config snapshot
// `config-<hash>.txt`, and `manifest.csv` mapping each output file to the
// config hash and code version. Rows of joined tables carry the hash too.
// Grid points that fail are dropped from the main CSVs and recorded in a
// sidecar `<name>.errors.csv`; the run then reports partial failure.
#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qcat/cache.hpp"
#include "qcat/config.hpp"
#include "qcat/csv.hpp"
#include "qcat/echo.hpp"
#include "qcat/spectral.hpp"
#include "qcat/task_pool.hpp"
#include "qcat/version.hpp"

namespace qcat {

// --------------------------- curve analysis helpers -------------------------

// residuals after subtracting a centered moving average (window in grid
// points, truncated at the edges)
inline std::vector<double> detrend_moving_average(const std::vector<double>& y, int window = 5) {
    const int n = int(y.size());
    const int half = window / 2;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += y[j];
        out[i] = y[i] - s / double(hi - lo + 1);
    }
    return out;
}

inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 3)
        throw std::invalid_argument("pearson: need two equal series of length >= 3");
    const int n = int(a.size());
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

inline double coefficient_of_variation(const std::vector<double>& y) {
    if (y.size() < 2) throw std::invalid_argument("cov: need >= 2 values");
    double m = 0.0;
    for (double v : y) m += v;
    m /= double(y.size());
    double var = 0.0;
    for (double v : y) var += (v - m) * (v - m);
    var /= double(y.size() - 1);
    return std::sqrt(var) / m;
}

// Dominant oscillation period of (x, y) by direct periodogram peak over a
// dense period grid; y is used as given (detrend/mean-subtract first).
inline double dominant_period(const std::vector<double>& x, const std::vector<double>& y,
                              double period_min = 5.0, double period_max = 100.0) {
    if (x.size() != y.size() || x.size() < 4)
        throw std::invalid_argument("dominant_period: need >= 4 points");
    double best_power = -1.0, best_period = 0.0;
    for (double period = period_min; period <= period_max + 1e-12; period += 0.05) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            re += y[i] * std::cos(kTwoPi * x[i] / period);
            im += y[i] * std::sin(kTwoPi * x[i] / period);
        }
        double power = re * re + im * im;
        if (power > best_power) {
            best_power = power;
            best_period = period;
        }
    }
    return best_period;
}

// ------------------------------ run bookkeeping ------------------------------

struct SweepOutcome {
    int n_failed{0};
    std::vector<std::string> files;

    int exit_code() const { return n_failed > 0 ? 2 : 0; }
};

namespace detail {

struct RunContext {
    const ExperimentConfig& cfg;
    std::filesystem::path out;
    std::string hash;
    EigenCache cache;
    std::vector<std::string> files;

    explicit RunContext(const ExperimentConfig& cfg_) : cfg(cfg_), out(cfg_.out_dir) {
        std::filesystem::create_directories(out);
        hash = config_hash(cfg);
        if (!cfg.cache_dir.empty()) cache = EigenCache(cfg.cache_dir);
        std::ofstream snap(out / ("config-" + hash + ".txt"), std::ios::binary | std::ios::trunc);
        snap << canonical_config_text(cfg);
    }

    void finish() {
        CsvWriter manifest(out / "manifest.csv", {"file", "config_hash", "code_version"});
        for (const auto& f : files) manifest.row({f, hash, kVersion});
        files.push_back("manifest.csv");
    }

    std::filesystem::path file(const std::string& name) {
        files.push_back(name);
        return out / name;
    }
};

inline Propagator build_for(const ExperimentConfig& cfg, const ShearWindow& window, double k,
                            int n) {
    return (cfg.kind == PerturbationKind::DoubleShear)
               ? compose_double_shear(cfg.map(), k, n)
               : compose_momentum_perturbed(cfg.map(), k, n, window);
}

inline StateSamplePolicy sigma_policy(const ExperimentConfig& cfg) {
    StateSamplePolicy policy;
    if (cfg.sigma_states == "auto") {
        policy.mode = StateSamplePolicy::Mode::Auto;
        policy.count = 50;
    } else if (cfg.sigma_states == "full") {
        policy.mode = StateSamplePolicy::Mode::FullBasis;
    } else {
        policy.mode = StateSamplePolicy::Mode::RandomSubset;
        policy.count = int(parse_int("sigma_states", cfg.sigma_states));
    }
    return policy;
}

inline std::vector<SigmaPoint> sigma_points_for(const ExperimentConfig& cfg,
                                                const ShearWindow& window, int n,
                                                RunContext& ctx) {
    SigmaCurveParams params;
    params.map = cfg.map();
    params.kind = cfg.kind;
    params.window = window;
    params.k0 = cfg.k0;
    params.chi_grid = cfg.chi_grid();
    params.n = n;
    params.states = sigma_policy(cfg);
    params.seed = cfg.seed;
    auto make_es = [&](double k) {
        Propagator prop = build_for(cfg, window, k, n);
        return cached_eigendecompose(prop, ctx.cache);
    };
    return sigma_curve(params, make_es, pool_runner(cfg.threads));
}

inline std::vector<GammaPoint> gamma_points_for(const ExperimentConfig& cfg,
                                                const ShearWindow& window, int n,
                                                RunContext& ctx) {
    GammaCurveParams params;
    params.map = cfg.map();
    params.kind = cfg.kind;
    params.window = window;
    params.k0 = cfg.resolved_ref_k();
    params.chi_grid = cfg.chi_grid();
    params.n = n;
    params.n_states = cfg.n_states;
    params.t_steps = cfg.t_steps;
    params.seed = cfg.seed;
    auto build = [&](double k) { return build_for(cfg, window, k, n); };

    if (!cfg.dump_echo) return gamma_curve(params, build, pool_runner(cfg.threads));

    // re-run sequentially writing per-chi echo curves
    const Propagator u_ref = build(params.k0);
    auto centers = random_centers(params.n_states, params.seed);
    std::vector<GammaPoint> points;
    for (double chi : params.chi_grid) {
        GammaPoint pt;
        pt.chi = chi;
        pt.k = params.k0 + chi / double(n);
        try {
            Propagator u_pert = build(pt.k);
            EchoCurve curve = echo_ensemble_at(u_ref, u_pert, centers, params.t_steps);
            pt.m_floor = curve.m.back();
            char name[64];
            std::snprintf(name, sizeof(name), "echo_chi%g_N%d.csv", chi, n);
            CsvWriter echo_csv(ctx.file(name), {"t", "m_mean", "m_sem"});
            for (int t = 0; t <= params.t_steps; ++t)
                echo_csv.row({std::to_string(t), csv_num(curve.m[t]), csv_num(curve.sem[t])});
            pt.fit = fit_decay_rate(curve, n);
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
        }
        points.push_back(std::move(pt));
    }
    return points;
}

inline int write_sigma_csv(RunContext& ctx, const std::string& name,
                           const std::vector<SigmaPoint>& pts, const ExperimentConfig& cfg,
                           int n) {
    CsvWriter csv(ctx.file(name),
                  {"chi", "sigma", "N", "map", "kind", "k0", "n_states", "seed"});
    int failed = 0;
    std::vector<std::vector<std::string>> errors;
    for (const auto& p : pts) {
        if (!p.ok) {
            ++failed;
            errors.push_back({csv_num(p.chi), p.error});
            continue;
        }
        csv.row({csv_num(p.chi), csv_num(p.sigma), std::to_string(n), cfg.map_label,
                 kind_label(cfg.kind), csv_num(cfg.k0), std::to_string(p.n_states),
                 std::to_string(cfg.seed)});
    }
    if (failed > 0) {
        CsvWriter err(ctx.file(name + ".errors.csv"), {"chi", "error"});
        for (const auto& r : errors) err.row(r);
    }
    return failed;
}

inline int write_gamma_csv(RunContext& ctx, const std::string& name,
                           const std::vector<GammaPoint>& pts, const ExperimentConfig& cfg,
                           int n) {
    CsvWriter csv(ctx.file(name),
                  {"chi", "gamma", "gamma_stderr", "t_start", "t_end", "r_squared",
                   "quality_flag", "N", "map", "kind", "n_states", "seed"});
    int failed = 0;
    std::vector<std::vector<std::string>> errors;
    for (const auto& p : pts) {
        if (!p.ok) {
            ++failed;
            errors.push_back({csv_num(p.chi), p.error});
            continue;
        }
        csv.row({csv_num(p.chi), csv_num(p.fit.gamma), csv_num(p.fit.stderr_gamma),
                 std::to_string(p.fit.t_start), std::to_string(p.fit.t_end),
                 csv_num(p.fit.r_squared), fit_quality_label(p.fit.quality), std::to_string(n),
                 cfg.map_label, kind_label(cfg.kind), std::to_string(cfg.n_states),
                 std::to_string(cfg.seed)});
    }
    if (failed > 0) {
        CsvWriter err(ctx.file(name + ".errors.csv"), {"chi", "error"});
        for (const auto& r : errors) err.row(r);
    }
    return failed;
}

inline std::string n_tag(int n) { return "N" + std::to_string(n); }

} // namespace detail

// ------------------------------- sweep drivers ------------------------------

// sigma CSV per N in the config
inline SweepOutcome run_sigma_sweep(const ExperimentConfig& cfg) {
    validate_config(cfg);
    detail::RunContext ctx(cfg);
    SweepOutcome outcome;
    ShearWindow window = cfg.windows.empty() ? ShearWindow::global()
                                             : cfg.window_for(cfg.windows.front());
    for (int n : cfg.n_list) {
        auto pts = detail::sigma_points_for(cfg, window, n, ctx);
        outcome.n_failed += detail::write_sigma_csv(
            ctx, "sigma_" + cfg.map_label + "_" + kind_label(cfg.kind) + "_" +
                     detail::n_tag(n) + ".csv",
            pts, cfg, n);
    }
    ctx.finish();
    outcome.files = ctx.files;
    return outcome;
}

// gamma CSV; joined (chi, sigma, gamma) table when a matching sigma CSV
// already exists in the output directory
inline SweepOutcome run_gamma_sweep(const ExperimentConfig& cfg) {
    validate_config(cfg);
    detail::RunContext ctx(cfg);
    SweepOutcome outcome;
    ShearWindow window = cfg.windows.empty() ? ShearWindow::global()
                                             : cfg.window_for(cfg.windows.front());
    const int n = cfg.n();
    auto pts = detail::gamma_points_for(cfg, window, n, ctx);
    std::string gamma_name =
        "gamma_" + cfg.map_label + "_" + kind_label(cfg.kind) + "_" + detail::n_tag(n) + ".csv";
    outcome.n_failed += detail::write_gamma_csv(ctx, gamma_name, pts, cfg, n);

    // join against a sigma sweep with the same map/kind, preferring equal N
    // (sigma is N-independent, so any N is usable)
    std::vector<std::filesystem::path> candidates;
    for (const auto& entry : std::filesystem::directory_iterator(ctx.out)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("sigma_" + cfg.map_label + "_" + kind_label(cfg.kind) + "_", 0) == 0 &&
            name.find(".errors.") == std::string::npos && entry.path().extension() == ".csv")
            candidates.push_back(entry.path());
    }
    std::sort(candidates.begin(), candidates.end());
    std::filesystem::path chosen;
    for (const auto& c : candidates) {
        if (c.filename().string().find(detail::n_tag(n) + ".csv") != std::string::npos) chosen = c;
    }
    if (chosen.empty() && !candidates.empty()) chosen = candidates.back();

    if (!chosen.empty()) {
        CsvTable sigma = read_csv(chosen);
        std::map<double, double> sigma_by_chi;
        auto chis = sigma.numeric_column("chi");
        auto sigmas = sigma.numeric_column("sigma");
        for (std::size_t i = 0; i < chis.size(); ++i) sigma_by_chi[chis[i]] = sigmas[i];
        CsvWriter joined(ctx.file("joined_" + cfg.map_label + "_" + kind_label(cfg.kind) + "_" +
                                  detail::n_tag(n) + ".csv"),
                         {"chi", "sigma", "gamma", "gamma_stderr", "r_squared", "quality_flag",
                          "error", "config_hash"});
        for (const auto& p : pts) {
            auto it = sigma_by_chi.find(p.chi);
            if (it == sigma_by_chi.end()) continue;
            joined.row({csv_num(p.chi), csv_num(it->second),
                        p.ok ? csv_num(p.fit.gamma) : "", p.ok ? csv_num(p.fit.stderr_gamma) : "",
                        p.ok ? csv_num(p.fit.r_squared) : "",
                        p.ok ? fit_quality_label(p.fit.quality) : "", p.ok ? "" : p.error,
                        ctx.hash});
        }
    }
    ctx.finish();
    outcome.files = ctx.files;
    return outcome;
}

// per-window sigma+gamma joined tables and the (w, gamma_bar) summary,
// averaging gamma over chi > 20
inline SweepOutcome run_local_sweep(const ExperimentConfig& cfg) {
    validate_config(cfg, /*needs_windows=*/true);
    detail::RunContext ctx(cfg);
    SweepOutcome outcome;
    const int n = cfg.n();

    struct SummaryRow {
        double w, gamma_bar, sigma_bar;
        int n_points;
    };
    std::vector<SummaryRow> summary;

    for (double w : cfg.windows) {
        ShearWindow window = cfg.window_for(w);
        char wtag[32];
        std::snprintf(wtag, sizeof(wtag), "w%g", w);
        auto spts = detail::sigma_points_for(cfg, window, n, ctx);
        auto gpts = detail::gamma_points_for(cfg, window, n, ctx);
        outcome.n_failed += detail::write_sigma_csv(
            ctx, std::string("local_") + wtag + "_sigma.csv", spts, cfg, n);
        outcome.n_failed += detail::write_gamma_csv(
            ctx, std::string("local_") + wtag + "_gamma.csv", gpts, cfg, n);

        CsvWriter joined(ctx.file(std::string("local_") + wtag + "_joined.csv"),
                         {"chi", "sigma", "gamma", "gamma_stderr", "r_squared", "quality_flag",
                          "w", "error", "config_hash"});
        double gsum = 0.0, ssum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < gpts.size(); ++i) {
            const auto& g = gpts[i];
            const auto& s = spts[i];
            joined.row({csv_num(g.chi), s.ok ? csv_num(s.sigma) : "",
                        g.ok ? csv_num(g.fit.gamma) : "", g.ok ? csv_num(g.fit.stderr_gamma) : "",
                        g.ok ? csv_num(g.fit.r_squared) : "",
                        g.ok ? fit_quality_label(g.fit.quality) : "", csv_num(w),
                        g.ok ? (s.ok ? "" : s.error) : g.error, ctx.hash});
            if (g.chi > 20.0 && g.ok && s.ok) {
                gsum += g.fit.gamma;
                ssum += s.sigma;
                ++count;
            }
        }
        summary.push_back({w, count ? gsum / count : 0.0, count ? ssum / count : 0.0, count});
    }

    CsvWriter sum_csv(ctx.file("local_summary.csv"),
                      {"w", "gamma_bar", "sigma_bar", "n_points", "config_hash"});
    for (const auto& row : summary)
        sum_csv.row({csv_num(row.w), csv_num(row.gamma_bar), csv_num(row.sigma_bar),
                     std::to_string(row.n_points), ctx.hash});
    ctx.finish();
    outcome.files = ctx.files;
    return outcome;
}

// binned rho(dphi, chi) density grid, 200 bins over (-pi, pi]
inline SweepOutcome run_ldos_grid(const ExperimentConfig& cfg) {
    validate_config(cfg);
    detail::RunContext ctx(cfg);
    SweepOutcome outcome;
    const int n = cfg.n();
    const int n_bins = 200;
    const double bin_width = kTwoPi / n_bins;
    ShearWindow window = cfg.windows.empty() ? ShearWindow::global()
                                             : cfg.window_for(cfg.windows.front());

    StateSamplePolicy policy;
    policy.mode = StateSamplePolicy::Mode::RandomSubset;
    policy.count = cfg.n_states;
    std::vector<int> sample = policy.resolve(n, cfg.seed);

    auto make_es = [&](double k) {
        Propagator prop = detail::build_for(cfg, window, k, n);
        return cached_eigendecompose(prop, ctx.cache);
    };
    EigenSystem ref = make_es(cfg.k0);

    auto grid = cfg.chi_grid();
    std::vector<std::vector<double>> densities(grid.size());
    std::vector<std::string> errors(grid.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        tasks.push_back([&, i] {
            try {
                double k = cfg.k0 + grid[i] / double(n);
                EigenSystem pert = make_es(k);
                LdosDistribution dist = ldos_averaged(ref, pert, sample);
                std::vector<double> bins(n_bins, 0.0);
                for (const auto& s : dist.samples) {
                    int b = int((s.dphi + std::numbers::pi) / bin_width);
                    if (b < 0) b = 0;
                    if (b >= n_bins) b = n_bins - 1;
                    bins[b] += s.weight;
                }
                for (double& v : bins) v /= bin_width;
                densities[i] = std::move(bins);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
    }
    run_tasks(tasks, cfg.threads);

    CsvWriter csv(ctx.file("ldos_grid_" + cfg.map_label + "_" + kind_label(cfg.kind) + "_" +
                           detail::n_tag(n) + ".csv"),
                  {"chi", "dphi_bin_center", "density"});
    std::vector<std::vector<std::string>> failed;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (densities[i].empty()) {
            ++outcome.n_failed;
            failed.push_back({csv_num(grid[i]), errors[i]});
            continue;
        }
        for (int b = 0; b < n_bins; ++b) {
            double center = -std::numbers::pi + (b + 0.5) * bin_width;
            csv.row({csv_num(grid[i]), csv_num(center), csv_num(densities[i][b])});
        }
    }
    if (!failed.empty()) {
        CsvWriter err(ctx.file("ldos_grid.errors.csv"), {"chi", "error"});
        for (const auto& r : failed) err.row(r);
    }
    ctx.finish();
    outcome.files = ctx.files;
    return outcome;
}

// ------------------------------- correlation --------------------------------

struct CorrelationReport {
    double pearson_detrended{0.0};
    double sigma_cov{0.0};
    double sigma_period{0.0};
    bool oscillation_significant{false};
    int n_points{0};
};

// Pearson correlation of moving-average-detrended sigma(chi) and gamma(chi)
// over chi > 15, plus the dominant sigma oscillation period. A flat curve
// (CoV below 0.08) reports no significant oscillation and period 0.
inline CorrelationReport correlate_curves(const std::vector<double>& chi,
                                          const std::vector<double>& sigma,
                                          const std::vector<double>& gamma) {
    if (chi.size() != sigma.size() || chi.size() != gamma.size())
        throw GridMismatch("correlate: series lengths differ");
    std::vector<double> x, s, g;
    for (std::size_t i = 0; i < chi.size(); ++i) {
        if (chi[i] > 15.0) {
            x.push_back(chi[i]);
            s.push_back(sigma[i]);
            g.push_back(gamma[i]);
        }
    }
    if (x.size() < 8) throw GridMismatch("correlate: need >= 8 grid points beyond chi=15");

    CorrelationReport rep;
    rep.n_points = int(x.size());
    rep.pearson_detrended =
        pearson_correlation(detrend_moving_average(s), detrend_moving_average(g));
    rep.sigma_cov = coefficient_of_variation(s);
    rep.oscillation_significant = rep.sigma_cov > 0.08;
    if (rep.oscillation_significant) {
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= double(s.size());
        std::vector<double> centered(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) centered[i] = s[i] - mean;
        rep.sigma_period = dominant_period(x, centered);
    }
    return rep;
}

inline CorrelationReport correlate(const std::filesystem::path& sigma_file,
                                   const std::filesystem::path& gamma_file,
                                   const std::filesystem::path& out_dir = {}) {
    CsvTable st = read_csv(sigma_file);
    CsvTable gt = read_csv(gamma_file);
    auto sc = st.numeric_column("chi");
    auto gc = gt.numeric_column("chi");
    if (sc.size() != gc.size())
        throw GridMismatch("correlate: chi grids differ in length (" + std::to_string(sc.size()) +
                           " vs " + std::to_string(gc.size()) + ")");
    for (std::size_t i = 0; i < sc.size(); ++i)
        if (std::abs(sc[i] - gc[i]) > 1e-9)
            throw GridMismatch("correlate: chi grids differ at index " + std::to_string(i));

    CorrelationReport rep =
        correlate_curves(sc, st.numeric_column("sigma"), gt.numeric_column("gamma"));
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        CsvWriter csv(out_dir / "correlate_report.csv",
                      {"pearson_detrended", "sigma_cov", "sigma_period",
                       "oscillation_significant", "n_points"});
        csv.row({csv_num(rep.pearson_detrended), csv_num(rep.sigma_cov),
                 csv_num(rep.sigma_period), rep.oscillation_significant ? "1" : "0",
                 std::to_string(rep.n_points)});
    }
    return rep;
}

} // namespace qcat
