// quantize.hpp — N x N unitary propagators for perturbed cat maps
//
// Position grid q_j = j/N with hbar_eff = 1/(2 pi N). The bare map kernel is
//   U[l,j] = (1/sqrt(i N g12)) exp[ i pi (g11 j^2 - 2 l j + g22 l^2) / (N g12) ],
// the momentum shear is diagonal in position with phase 2 pi N S_p(q_j),
//   S_p(q) = (k/4pi^2) (sin 2pi q - 1/2 sin 4pi q),
// the position shear is diagonal in the momentum grid p_j = j/N with phase
// (chi/2pi)(cos 6pi p - 1/2 sin 4pi p), chi = k N, conjugated by the DFT
//   F[l,j] = (1/sqrt N) exp(-2 pi i l j / N).
// Compositions: momentum-perturbed U = U_G U_P, double shear
// U = U_P U_G F^+ U_Q F. Every returned Propagator is unitarity-checked.
#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "qcat/classical.hpp"
#include "qcat/errors.hpp"

namespace qcat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class PerturbationKind { Bare, MomentumShear, DoubleShear };

inline std::string kind_label(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::Bare: return "bare";
        case PerturbationKind::MomentumShear: return "momentum-shear";
        case PerturbationKind::DoubleShear: return "double-shear";
    }
    return "?";
}

inline PerturbationKind kind_by_label(const std::string& s) {
    if (s == "bare") return PerturbationKind::Bare;
    if (s == "momentum-shear" || s == "momentum") return PerturbationKind::MomentumShear;
    if (s == "double-shear" || s == "double") return PerturbationKind::DoubleShear;
    throw std::invalid_argument("unknown perturbation kind: " + s);
}

struct PerturbationSpec {
    PerturbationKind kind{PerturbationKind::MomentumShear};
    double k{0.0};
    double k0{0.0};
    ShearWindow window{ShearWindow::global()};

    PerturbationSpec() = default;
    PerturbationSpec(PerturbationKind kd, double strength, double reference,
                     ShearWindow win = ShearWindow::global())
        : kind(kd), k(strength), k0(reference), window(win) {
        if (!(k >= k0 && k0 >= 0.0))
            throw std::invalid_argument("PerturbationSpec: need k >= k0 >= 0");
        if (kind == PerturbationKind::DoubleShear && !window.is_global())
            throw std::invalid_argument("PerturbationSpec: double shear admits only the global window");
    }
};

struct PropagatorMeta {
    std::string map_label;
    std::int64_t g11{0}, g12{0}, g21{0}, g22{0};
    PerturbationKind kind{PerturbationKind::Bare};
    double k{0.0};
    double k0{0.0};
    ShearWindow window{ShearWindow::global()};
    int n{0};
    bool anosov_warning{false};

    bool operator==(const PropagatorMeta& o) const {
        return map_label == o.map_label && g11 == o.g11 && g12 == o.g12 && g21 == o.g21 &&
               g22 == o.g22 && kind == o.kind && k == o.k && k0 == o.k0 &&
               window.q0 == o.window.q0 && window.w == o.window.w && n == o.n;
    }
};

struct Propagator {
    Matrix matrix;
    PropagatorMeta meta;

    int dim() const { return int(matrix.rows()); }
};

// max-norm of U^dag U - I
inline double unitarity_defect(const Matrix& u) {
    Matrix d = u.adjoint() * u;
    d.diagonal().array() -= 1.0;
    return d.cwiseAbs().maxCoeff();
}

inline double unitarity_tolerance(int n) { return 1e-10 * double(n); }

inline void require_unitary(const Matrix& u, const std::string& what) {
    double defect = unitarity_defect(u);
    if (!(defect < unitarity_tolerance(int(u.rows()))))
        throw UnitarityError(what + ": unitarity defect " + std::to_string(defect) +
                             " exceeds tolerance at N=" + std::to_string(u.rows()));
}

namespace detail {

inline std::int64_t mod_pos(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return (r < 0) ? r + m : r;
}

// Checkerboard quantizability pattern: diagonal odd with antidiagonal even,
// or the reverse.
inline bool checkerboard_parity_ok(const CatMap& map) {
    bool diag_odd = (map.g11 % 2 != 0) && (map.g22 % 2 != 0);
    bool diag_even = (map.g11 % 2 == 0) && (map.g22 % 2 == 0);
    bool anti_odd = (map.g12 % 2 != 0) && (map.g21 % 2 != 0);
    bool anti_even = (map.g12 % 2 == 0) && (map.g21 % 2 == 0);
    return (diag_odd && anti_even) || (diag_even && anti_odd);
}

inline double shear_action(double q, double k) {
    return (k / (4.0 * std::numbers::pi * std::numbers::pi)) *
           (std::sin(kTwoPi * q) - 0.5 * std::sin(2.0 * kTwoPi * q));
}

// Diagonal of U_P in the position grid; identity outside the window.
inline Vector momentum_shear_diagonal(double k, int n, const ShearWindow& window) {
    Vector d(n);
    for (int j = 0; j < n; ++j) {
        double q = double(j) / double(n);
        if (window.contains(q))
            d[j] = std::polar(1.0, kTwoPi * double(n) * shear_action(q, k));
        else
            d[j] = Complex(1.0, 0.0);
    }
    return d;
}

// Diagonal of U_Q in the momentum grid.
inline Vector position_shear_diagonal(double chi, int n) {
    Vector d(n);
    for (int j = 0; j < n; ++j) {
        double p = double(j) / double(n);
        double phase = (chi / kTwoPi) *
                       (std::cos(3.0 * kTwoPi * p) - 0.5 * std::sin(2.0 * kTwoPi * p));
        d[j] = std::polar(1.0, phase);
    }
    return d;
}

// Bare-map matrix without the unitarity gate (callers compose first, then check).
inline Matrix cat_matrix(const CatMap& map, int n) {
    const std::int64_t b = map.g12;
    // exact phase reduction: the quadratic form mod 2 N g12 keeps sin/cos
    // arguments small for any N
    const std::int64_t period = 2 * std::int64_t(n) * b;
    const Complex pref = 1.0 / std::sqrt(Complex(0.0, double(n) * double(b)));
    Matrix u(n, n);
    for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) {
            std::int64_t form = map.g11 * std::int64_t(j) * j - 2 * std::int64_t(l) * j +
                                map.g22 * std::int64_t(l) * l;
            double phase = std::numbers::pi * double(mod_pos(form, period)) /
                           (double(n) * double(b));
            u(l, j) = pref * std::polar(1.0, phase);
        }
    }
    return u;
}

inline void check_quantizable(const CatMap& map, int n) {
    if (n < 2) throw QuantizationError("Hilbert dimension must be >= 2");
    if (map.g12 <= 0)
        throw QuantizationError("cat map " + map.label + ": g12 must be positive to quantize");
    if (map == maps::G1 && n % 2 != 0)
        throw QuantizationError("map G1 requires an even Hilbert dimension, got N=" +
                                std::to_string(n));
}

// Parity pattern outside the known map set is reported, not fatal: G1 itself
// violates it and is rescued by the even-N rule.
inline bool quantizability_warning(const CatMap& map) {
    bool known = map == maps::G1 || map == maps::G2 || map == maps::G3 || map == maps::G4;
    return !known && !checkerboard_parity_ok(map);
}

inline PropagatorMeta make_meta(const CatMap& map, PerturbationKind kind, double k, double k0,
                                const ShearWindow& window, int n) {
    PropagatorMeta meta;
    meta.map_label = map.label;
    meta.g11 = map.g11;
    meta.g12 = map.g12;
    meta.g21 = map.g21;
    meta.g22 = map.g22;
    meta.kind = kind;
    meta.k = k;
    meta.k0 = k0;
    meta.window = window;
    meta.n = n;
    meta.anosov_warning = exceeds_anosov_bound(k);
    return meta;
}

} // namespace detail

inline Matrix dft_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dft_matrix: N must be >= 1");
    Matrix f(n, n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
            std::int64_t m = detail::mod_pos(std::int64_t(l) * j, n);
            f(l, j) = std::polar(scale, -kTwoPi * double(m) / double(n));
        }
    return f;
}

inline Propagator cat_propagator(const CatMap& map, int n) {
    detail::check_quantizable(map, n);
    Matrix u = detail::cat_matrix(map, n);
    require_unitary(u, "cat_propagator(" + map.label + ", N=" + std::to_string(n) + ")");
    return {std::move(u), detail::make_meta(map, PerturbationKind::Bare, 0.0, 0.0,
                                            ShearWindow::global(), n)};
}

inline Propagator momentum_shear_propagator(double k, int n,
                                            const ShearWindow& window = ShearWindow::global()) {
    if (n < 2) throw std::invalid_argument("momentum_shear_propagator: N must be >= 2");
    Vector d = detail::momentum_shear_diagonal(k, n, window);
    double defect = (d.cwiseAbs2().array() - 1.0).abs().maxCoeff();
    if (!(defect < unitarity_tolerance(n)))
        throw UnitarityError("momentum_shear_propagator: phase diagonal not unit modulus");
    PropagatorMeta meta;
    meta.map_label = "";
    meta.kind = PerturbationKind::MomentumShear;
    meta.k = k;
    meta.window = window;
    meta.n = n;
    meta.anosov_warning = exceeds_anosov_bound(k);
    return {Matrix(d.asDiagonal()), meta};
}

inline Propagator position_shear_propagator(double chi, int n) {
    if (n < 2) throw std::invalid_argument("position_shear_propagator: N must be >= 2");
    Vector d = detail::position_shear_diagonal(chi, n);
    double defect = (d.cwiseAbs2().array() - 1.0).abs().maxCoeff();
    if (!(defect < unitarity_tolerance(n)))
        throw UnitarityError("position_shear_propagator: phase diagonal not unit modulus");
    PropagatorMeta meta;
    meta.kind = PerturbationKind::DoubleShear;
    meta.k = chi / double(n);
    meta.n = n;
    return {Matrix(d.asDiagonal()), meta};
}

// U = U_G U_P (shear first, then the map, as in the classical composition).
inline Propagator compose_momentum_perturbed(const CatMap& map, double k, int n,
                                             const ShearWindow& window = ShearWindow::global()) {
    detail::check_quantizable(map, n);
    Matrix u = detail::cat_matrix(map, n);
    Vector d = detail::momentum_shear_diagonal(k, n, window);
    for (int j = 0; j < n; ++j) u.col(j) *= d[j];
    require_unitary(u, "compose_momentum_perturbed(" + map.label + ")");
    return {std::move(u),
            detail::make_meta(map, PerturbationKind::MomentumShear, k, 0.0, window, n)};
}

// U = U_P U_G F^+ U_Q F with the same chi = k N in both shears.
inline Propagator compose_double_shear(const CatMap& map, double k, int n) {
    detail::check_quantizable(map, n);
    const double chi = k * double(n);
    Matrix f = dft_matrix(n);
    Vector dq = detail::position_shear_diagonal(chi, n);
    Vector dp = detail::momentum_shear_diagonal(k, n, ShearWindow::global());

    Matrix qf = dq.asDiagonal() * f;
    Matrix b = f.adjoint() * qf;
    Matrix u = detail::cat_matrix(map, n) * b;
    for (int l = 0; l < n; ++l) u.row(l) *= dp[l];

    require_unitary(u, "compose_double_shear(" + map.label + ")");
    return {std::move(u),
            detail::make_meta(map, PerturbationKind::DoubleShear, k, 0.0,
                              ShearWindow::global(), n)};
}

// Propagator for a perturbation spec at its own strength spec.k.
inline Propagator build_propagator(const CatMap& map, const PerturbationSpec& spec, int n) {
    Propagator prop = (spec.kind == PerturbationKind::DoubleShear)
                          ? compose_double_shear(map, spec.k, n)
                          : compose_momentum_perturbed(map, spec.k, n, spec.window);
    prop.meta.k0 = spec.k0;
    return prop;
}

} // namespace qcat
