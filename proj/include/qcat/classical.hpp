// classical.hpp — perturbed cat maps on the unit torus
//
// Torus automorphisms q' = g11 q + g12 p, p' = g21 q + g22 p (mod 1) with
// integer entries, det = 1 and trace > 2 (hyperbolic, area preserving),
// optionally composed with a momentum shear p -> p + eps(q) where
//   eps(q) = (k/2pi) (cos 2pi q - cos 4pi q),
// applied globally or on a coordinate window. Lyapunov exponents come either
// from the closed form ln of the largest eigenvalue or from tangent-map
// norm-growth averaging.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcat/rng.hpp"

namespace qcat {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Strength above which the shear is no longer guaranteed to keep the
// perturbed map Anosov.
inline constexpr double kAnosovBound = 0.11;

// reduce to [0, 1); maps exact integers (incl. 1.0) to 0.0
inline double mod1(double x) {
    double y = x - std::floor(x);
    return (y >= 1.0) ? y - 1.0 : y;
}

struct TorusPoint {
    double q{0.0};
    double p{0.0};
};

struct CatMap {
    std::int64_t g11, g12, g21, g22;
    std::string label;

    CatMap(std::int64_t a11, std::int64_t a12, std::int64_t a21, std::int64_t a22,
           std::string name)
        : g11(a11), g12(a12), g21(a21), g22(a22), label(std::move(name)) {
        if (det() != 1)
            throw std::invalid_argument("CatMap " + label + ": det must be 1");
        if (trace() <= 2)
            throw std::invalid_argument("CatMap " + label + ": trace must exceed 2");
    }

    std::int64_t det() const { return g11 * g22 - g12 * g21; }
    std::int64_t trace() const { return g11 + g22; }

    bool operator==(const CatMap& o) const {
        return g11 == o.g11 && g12 == o.g12 && g21 == o.g21 && g22 == o.g22;
    }
};

namespace maps {
inline const CatMap G1{2, 1, 1, 1, "G1"};
inline const CatMap G2{2, 1, 3, 2, "G2"};
inline const CatMap G3{4, 1, 15, 4, "G3"};
inline const CatMap G4{8, 1, 63, 8, "G4"};
} // namespace maps

inline const CatMap& cat_map_by_label(const std::string& label) {
    if (label == "G1") return maps::G1;
    if (label == "G2") return maps::G2;
    if (label == "G3") return maps::G3;
    if (label == "G4") return maps::G4;
    throw std::invalid_argument("unknown cat map label: " + label);
}

// Coordinate window [q0 - w/2, q0 + w/2) mod 1; w = 1 covers the whole torus.
struct ShearWindow {
    double q0{0.0};
    double w{1.0};

    ShearWindow() = default;
    ShearWindow(double center, double width) : q0(mod1(center)), w(width) {
        if (!(width > 0.0 && width <= 1.0))
            throw std::invalid_argument("ShearWindow: width must be in (0, 1]");
    }

    static ShearWindow global() { return ShearWindow(0.0, 1.0); }
    bool is_global() const { return w >= 1.0; }

    bool contains(double q) const {
        if (is_global()) return true;
        double d = q - q0;
        d -= std::floor(d + 0.5); // wrapped displacement in [-1/2, 1/2)
        return d >= -0.5 * w && d < 0.5 * w;
    }
};

// Center of the interval used for local perturbations: the maximum of the
// shear profile, at cos(2pi q) = 1/4.
inline double shear_profile_peak_q() {
    return std::acos(0.25) / kTwoPi;
}

// eps(q) of the momentum shear; zero outside the window.
inline double shear_profile(double q, double k, const ShearWindow& window = ShearWindow::global()) {
    if (!window.contains(q)) return 0.0;
    return (k / kTwoPi) * (std::cos(kTwoPi * q) - std::cos(2.0 * kTwoPi * q));
}

// d eps / dq, with the window treated as a hard indicator (edge ignored).
inline double shear_profile_derivative(double q, double k,
                                       const ShearWindow& window = ShearWindow::global()) {
    if (!window.contains(q)) return 0.0;
    return k * (-std::sin(kTwoPi * q) + 2.0 * std::sin(2.0 * kTwoPi * q));
}

inline bool exceeds_anosov_bound(double k) { return std::abs(k) > kAnosovBound; }

inline TorusPoint apply_cat_map(const CatMap& map, const TorusPoint& pt) {
    return {mod1(double(map.g11) * pt.q + double(map.g12) * pt.p),
            mod1(double(map.g21) * pt.q + double(map.g22) * pt.p)};
}

inline TorusPoint apply_perturbed_map(const CatMap& map, double k,
                                      const ShearWindow& window, const TorusPoint& pt) {
    double p_kicked = pt.p + shear_profile(pt.q, k, window);
    return {mod1(double(map.g11) * pt.q + double(map.g12) * p_kicked),
            mod1(double(map.g21) * pt.q + double(map.g22) * p_kicked)};
}

// ------------------------------- Lyapunov ----------------------------------

struct LyapunovEstimate {
    double value{0.0};
    double std_error{0.0};
    int n_steps{0};
    int n_samples{0};
    bool converged{true};
};

// ln of the largest eigenvalue of G.
inline double lyapunov_closed_form(const CatMap& map) {
    double tr = double(map.trace());
    return std::log(0.5 * (tr + std::sqrt(tr * tr - 4.0)));
}

// Tangent-map norm-growth average over random initial points. The tangent of
// one perturbed step is G * [[1, 0], [eps'(q), 1]] evaluated at the current
// point; the vector is renormalized every step and log norms are averaged
// after a short alignment burn-in.
inline LyapunovEstimate lyapunov_numeric(const CatMap& map, double k,
                                         const ShearWindow& window, int n_steps,
                                         int n_samples, std::uint64_t seed) {
    if (n_steps < 1 || n_samples < 1)
        throw std::invalid_argument("lyapunov_numeric: n_steps and n_samples must be >= 1");

    const int burn_in = 64;
    std::vector<double> per_sample(n_samples);

    for (int s = 0; s < n_samples; ++s) {
        Rng rng(derive_seed(seed, std::uint64_t(s)));
        TorusPoint pt{rng.next_double(), rng.next_double()};
        double vq = 1.0, vp = 0.0;
        {
            double ang = kTwoPi * rng.next_double();
            vq = std::cos(ang);
            vp = std::sin(ang);
        }
        double sum_log = 0.0;
        for (int t = 0; t < burn_in + n_steps; ++t) {
            double de = shear_profile_derivative(pt.q, k, window);
            // J = G * [[1,0],[de,1]]
            double jq = double(map.g11) * vq + double(map.g12) * (de * vq + vp);
            double jp = double(map.g21) * vq + double(map.g22) * (de * vq + vp);
            double norm = std::hypot(jq, jp);
            vq = jq / norm;
            vp = jp / norm;
            if (t >= burn_in) sum_log += std::log(norm);
            pt = apply_perturbed_map(map, k, window, pt);
        }
        per_sample[s] = sum_log / double(n_steps);
    }

    double mean = 0.0;
    for (double v : per_sample) mean += v;
    mean /= double(n_samples);
    double var = 0.0;
    for (double v : per_sample) var += (v - mean) * (v - mean);
    double std_error =
        (n_samples > 1) ? std::sqrt(var / double(n_samples - 1) / double(n_samples)) : 0.0;

    LyapunovEstimate est;
    est.value = mean;
    est.std_error = std_error;
    est.n_steps = n_steps;
    est.n_samples = n_samples;
    est.converged = std_error <= 0.05 * std::max(std::abs(mean), 0.1);
    return est;
}

} // namespace qcat
