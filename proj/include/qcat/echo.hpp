// echo.hpp — coherent states, Loschmidt echo curves, decay-rate fits
//
// M(t) = |<psi0| (U_pert^dag)^t (U_ref)^t |psi0>|^2, evolved by repeated
// matrix-vector products. Ensembles average M(t) over coherent states at
// seed-determined random phase-space centers; the decay rate comes from a
// log-linear least-squares fit between t = 1 and the saturation crossing.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qcat/classical.hpp"
#include "qcat/errors.hpp"
#include "qcat/quantize.hpp"
#include "qcat/rng.hpp"

namespace qcat {

struct CoherentState {
    TorusPoint center;
    Vector vector;
};

// Periodized Gaussian wave packet on the position grid, unit norm.
// Amplitude at q_j: sum over images m of exp[-pi N (x+m)^2 + 2 pi i N p (x+m)]
// with x = q_j - q, truncated at |m| <= 3.
inline CoherentState coherent_state(const TorusPoint& center, int n) {
    if (n < 2) throw std::invalid_argument("coherent_state: N must be >= 2");
    const int image_cutoff = 3;
    Vector v(n);
    for (int j = 0; j < n; ++j) {
        double x = double(j) / double(n) - center.q;
        Complex amp(0.0, 0.0);
        for (int m = -image_cutoff; m <= image_cutoff; ++m) {
            double y = x + double(m);
            double g = std::exp(-std::numbers::pi * double(n) * y * y);
            amp += g * std::polar(1.0, kTwoPi * double(n) * center.p * y);
        }
        v[j] = amp;
    }
    v.normalize();
    return {TorusPoint{mod1(center.q), mod1(center.p)}, std::move(v)};
}

// Circular position expectation in [0, 1); robust against wrap-around.
inline double position_expectation(const Vector& state) {
    Complex acc(0.0, 0.0);
    const int n = int(state.size());
    for (int j = 0; j < n; ++j)
        acc += std::norm(state[j]) * std::polar(1.0, kTwoPi * double(j) / double(n));
    return mod1(std::arg(acc) / kTwoPi);
}

struct EchoMeta {
    int n{0};
    std::string map_label;
    PerturbationKind kind{PerturbationKind::MomentumShear};
    double k0{0.0};
    double k{0.0};
    int n_states{1};
    std::uint64_t seed{0};
};

struct EchoCurve {
    std::vector<double> m;    // M(t), t = 0..T
    std::vector<double> sem;  // standard error over the ensemble, per t
    EchoMeta meta;

    int steps() const { return int(m.size()) - 1; }
};

inline EchoCurve loschmidt_echo(const Propagator& u_ref, const Propagator& u_pert,
                                const CoherentState& psi0, int t_steps) {
    const int n = u_ref.dim();
    if (u_pert.dim() != n || int(psi0.vector.size()) != n)
        throw DimensionMismatch("loschmidt_echo: dimensions disagree");
    if (t_steps < 1) throw std::invalid_argument("loschmidt_echo: T must be >= 1");

    EchoCurve curve;
    curve.m.resize(t_steps + 1);
    curve.sem.assign(t_steps + 1, 0.0);
    curve.meta.n = n;
    curve.meta.map_label = u_ref.meta.map_label;
    curve.meta.kind = u_pert.meta.kind;
    curve.meta.k0 = u_ref.meta.k;
    curve.meta.k = u_pert.meta.k;

    Vector a = psi0.vector, b = psi0.vector, tmp(n);
    curve.m[0] = std::norm(b.dot(a));
    for (int t = 1; t <= t_steps; ++t) {
        tmp.noalias() = u_ref.matrix * a;
        a.swap(tmp);
        tmp.noalias() = u_pert.matrix * b;
        b.swap(tmp);
        curve.m[t] = std::norm(b.dot(a));
    }
    return curve;
}

// Random phase-space centers for an ensemble, drawn once from the seed.
inline std::vector<TorusPoint> random_centers(int n_states, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xec40ULL));
    std::vector<TorusPoint> centers(n_states);
    for (auto& c : centers) {
        c.q = rng.next_double();
        c.p = rng.next_double();
    }
    return centers;
}

inline EchoCurve echo_ensemble_at(const Propagator& u_ref, const Propagator& u_pert,
                                  const std::vector<TorusPoint>& centers, int t_steps) {
    if (centers.empty()) throw std::invalid_argument("echo_ensemble: need >= 1 state");
    const int n_states = int(centers.size());
    const int n = u_ref.dim();

    std::vector<std::vector<double>> per_state(n_states);
    for (int s = 0; s < n_states; ++s)
        per_state[s] = loschmidt_echo(u_ref, u_pert, coherent_state(centers[s], n), t_steps).m;

    EchoCurve curve;
    curve.m.assign(t_steps + 1, 0.0);
    curve.sem.assign(t_steps + 1, 0.0);
    for (int t = 0; t <= t_steps; ++t) {
        double mean = 0.0;
        for (int s = 0; s < n_states; ++s) mean += per_state[s][t];
        mean /= double(n_states);
        double var = 0.0;
        for (int s = 0; s < n_states; ++s) {
            double d = per_state[s][t] - mean;
            var += d * d;
        }
        curve.m[t] = mean;
        curve.sem[t] = (n_states > 1)
                           ? std::sqrt(var / double(n_states - 1) / double(n_states))
                           : 0.0;
    }
    curve.meta.n = n;
    curve.meta.map_label = u_ref.meta.map_label;
    curve.meta.kind = u_pert.meta.kind;
    curve.meta.k0 = u_ref.meta.k;
    curve.meta.k = u_pert.meta.k;
    curve.meta.n_states = n_states;
    return curve;
}

inline EchoCurve echo_ensemble(const Propagator& u_ref, const Propagator& u_pert,
                               int n_states, int t_steps, std::uint64_t seed) {
    EchoCurve curve = echo_ensemble_at(u_ref, u_pert, random_centers(n_states, seed), t_steps);
    curve.meta.seed = seed;
    return curve;
}

// ------------------------------- decay fitting ------------------------------

enum class FitQuality { Ok, Widened, NoDecay };

inline std::string fit_quality_label(FitQuality q) {
    switch (q) {
        case FitQuality::Ok: return "ok";
        case FitQuality::Widened: return "widened";
        case FitQuality::NoDecay: return "no_decay";
    }
    return "?";
}

struct DecayFit {
    double gamma{0.0};
    double stderr_gamma{0.0};
    int t_start{1};
    int t_end{1};
    double r_squared{0.0};
    double saturation_level{0.0};
    FitQuality quality{FitQuality::Ok};
};

// Least-squares line on ln M(t) over t in [1, t_sat], where t_sat is the
// first step with M <= 5/N (whole curve if never reached). If that window has
// fewer than 3 points the threshold widens to 2/N; still shorter means the
// decay is too fast to resolve at this N and the fit is refused.
inline DecayFit fit_decay_rate(const EchoCurve& curve, int n) {
    const int t_max = curve.steps();
    if (t_max + 1 < 5) throw std::invalid_argument("fit_decay_rate: need >= 5 time points");

    auto find_t_sat = [&](double threshold) {
        for (int t = 1; t <= t_max; ++t)
            if (curve.m[t] <= threshold) return t;
        return t_max;
    };

    double threshold = 5.0 / double(n);
    int t_sat = find_t_sat(threshold);
    FitQuality quality = FitQuality::Ok;
    if (t_sat < 3) {
        threshold = 2.0 / double(n);
        t_sat = find_t_sat(threshold);
        quality = FitQuality::Widened;
        if (t_sat < 3)
            throw FitWindowTooShort(
                "fit window [1, " + std::to_string(t_sat) + "] has fewer than 3 points even at "
                "threshold 2/N; decay too fast to resolve at N=" + std::to_string(n));
    }

    int count = 0;
    double sx = 0.0, sy = 0.0;
    for (int t = 1; t <= t_sat; ++t) {
        if (!(curve.m[t] > 0.0)) continue;
        sx += t;
        sy += std::log(curve.m[t]);
        ++count;
    }
    if (count < 3) throw FitWindowTooShort("fit window has fewer than 3 usable points");
    double mx = sx / count, my = sy / count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int t = 1; t <= t_sat; ++t) {
        if (!(curve.m[t] > 0.0)) continue;
        double dx = t - mx, dy = std::log(curve.m[t]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double slope = sxy / sxx;
    double ss_res = syy - sxy * sxy / sxx;
    if (ss_res < 0.0) ss_res = 0.0;

    DecayFit fit;
    fit.t_start = 1;
    fit.t_end = t_sat;
    fit.quality = quality;
    if (slope >= -1e-12 || syy <= 1e-24) {
        fit.gamma = 0.0;
        fit.quality = FitQuality::NoDecay;
        fit.r_squared = 0.0;
    } else {
        fit.gamma = -slope;
        fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 0.0;
    }
    if (count > 2) fit.stderr_gamma = std::sqrt(ss_res / double(count - 2) / sxx);

    if (t_sat < t_max) {
        double acc = 0.0;
        for (int t = t_sat; t <= t_max; ++t) acc += curve.m[t];
        fit.saturation_level = acc / double(t_max - t_sat + 1);
    } else {
        fit.saturation_level = curve.m[t_max];
    }
    return fit;
}

// ------------------------------- gamma curve --------------------------------

struct GammaPoint {
    double chi{0.0};
    double k{0.0};
    DecayFit fit;
    double m_floor{0.0};  // ensemble curve value at the last step
    bool ok{false};
    std::string error;
};

struct GammaCurveParams {
    CatMap map{maps::G2};
    PerturbationKind kind{PerturbationKind::MomentumShear};
    ShearWindow window{ShearWindow::global()};
    double k0{0.02};
    std::vector<double> chi_grid;
    int n{800};
    int n_states{50};
    int t_steps{60};
    std::uint64_t seed{0};
};

// Decay rate vs chi = (k - k0) N. The reference propagator carries the base
// strength k0; the same ensemble centers are reused across the grid so that
// neighboring chi points share their sampling noise.
inline std::vector<GammaPoint> gamma_curve(
    const GammaCurveParams& params,
    const std::function<Propagator(double)>& build,
    const std::function<void(std::vector<std::function<void()>>&)>& for_each = {}) {
    for (std::size_t i = 0; i < params.chi_grid.size(); ++i) {
        if (params.chi_grid[i] < 0.0 || (i > 0 && params.chi_grid[i] <= params.chi_grid[i - 1]))
            throw std::invalid_argument("gamma_curve: chi grid must be nonnegative ascending");
    }

    const Propagator u_ref = build(params.k0);
    const std::vector<TorusPoint> centers = random_centers(params.n_states, params.seed);

    std::vector<GammaPoint> points(params.chi_grid.size());
    std::vector<std::function<void()>> tasks;
    tasks.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        tasks.push_back([&, i] {
            GammaPoint& pt = points[i];
            pt.chi = params.chi_grid[i];
            pt.k = params.k0 + pt.chi / double(params.n);
            try {
                Propagator u_pert = build(pt.k);
                EchoCurve curve = echo_ensemble_at(u_ref, u_pert, centers, params.t_steps);
                curve.meta.seed = params.seed;
                pt.m_floor = curve.m.back();
                pt.fit = fit_decay_rate(curve, params.n);
                pt.ok = true;
            } catch (const std::exception& e) {
                pt.ok = false;
                pt.error = e.what();
            }
        });
    }
    if (for_each)
        for_each(tasks);
    else
        for (auto& t : tasks) t();
    return points;
}

} // namespace qcat
