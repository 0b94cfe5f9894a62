// spectral.hpp — eigenphase spectra, LDOS construction, width estimation
//
// Unitary matrices are normal, so their Schur form is diagonal: a zgees
// decomposition returns orthonormal eigenvectors (the Schur basis) and the
// eigenvalues on the diagonal, with the off-diagonal remainder serving as a
// residual certificate. Eigenphases live on (-pi, pi].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <lapacke.h>

#include "qcat/errors.hpp"
#include "qcat/quantize.hpp"
#include "qcat/rng.hpp"

namespace qcat {

// wrap to (-pi, pi]
inline double wrap_phase(double x) {
    double y = std::remainder(x, kTwoPi);
    if (y <= -std::numbers::pi) y += kTwoPi;
    return y;
}

struct EigenSystem {
    Eigen::VectorXd phases;   // ascending, in (-pi, pi]
    Matrix states;            // column j is the eigenvector of phases[j]
    int dim() const { return int(phases.size()); }
};

namespace detail {

inline EigenSystem schur_decompose(Matrix a) {
    const int n = int(a.rows());
    std::vector<Complex> w(n);
    Matrix vs(n, n);
    lapack_int sdim = 0;
    lapack_int info = LAPACKE_zgees(
        LAPACK_COL_MAJOR, 'V', 'N', nullptr, n,
        reinterpret_cast<lapack_complex_double*>(a.data()), n, &sdim,
        reinterpret_cast<lapack_complex_double*>(w.data()),
        reinterpret_cast<lapack_complex_double*>(vs.data()), n);
    if (info != 0)
        throw ConvergenceError("zgees failed with info=" + std::to_string(info));

    // normality residual: column norms of the strictly upper part of T
    double max_resid = 0.0;
    for (int j = 1; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < j; ++i) s += std::norm(a(i, j));
        max_resid = std::max(max_resid, std::sqrt(s));
    }
    if (!(max_resid < 1e-8))
        throw ConvergenceError("eigendecomposition residual " + std::to_string(max_resid) +
                               " exceeds 1e-8 (input not normal enough)");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> phases(n);
    for (int j = 0; j < n; ++j) phases[j] = wrap_phase(std::arg(w[j]));
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return phases[i] < phases[j]; });

    EigenSystem es;
    es.phases.resize(n);
    es.states.resize(n, n);
    for (int j = 0; j < n; ++j) {
        es.phases[j] = phases[order[j]];
        es.states.col(j) = vs.col(order[j]);
    }
    return es;
}

} // namespace detail

// Decompose an arbitrary matrix; rejects non-unitary input.
inline EigenSystem eigendecompose_matrix(const Matrix& u) {
    if (u.rows() != u.cols()) throw DimensionMismatch("eigendecompose: matrix must be square");
    double defect = unitarity_defect(u);
    if (!(defect < unitarity_tolerance(int(u.rows()))))
        throw NonUnitaryInput("eigendecompose: unitarity defect " + std::to_string(defect));
    return detail::schur_decompose(u);
}

// Propagators are unitarity-checked at construction; skip the O(N^3) recheck.
inline EigenSystem eigendecompose(const Propagator& u) {
    return detail::schur_decompose(u.matrix);
}

// ----------------------------------- LDOS ----------------------------------

struct LdosSample {
    double dphi;    // eigenphase difference in (-pi, pi]
    double weight;  // |<psi_j(k)|psi_i(k0)>|^2
};

struct LdosMeta {
    double k0{0.0};
    double k{0.0};
    int n{0};
    int n_averaged_states{0};
};

struct LdosDistribution {
    std::vector<LdosSample> samples;
    LdosMeta meta;

    double total_weight() const {
        double s = 0.0;
        for (const auto& x : samples) s += x.weight;
        return s;
    }
};

inline LdosDistribution ldos_single(const EigenSystem& ref, const EigenSystem& pert, int i) {
    if (ref.dim() != pert.dim())
        throw DimensionMismatch("ldos_single: eigen systems differ in dimension");
    if (i < 0 || i >= ref.dim())
        throw std::out_of_range("ldos_single: state index out of range");

    const int n = ref.dim();
    Vector ov = pert.states.adjoint() * ref.states.col(i);
    LdosDistribution dist;
    dist.samples.resize(n);
    for (int j = 0; j < n; ++j) {
        dist.samples[j].weight = std::norm(ov[j]);
        dist.samples[j].dphi = wrap_phase(pert.phases[j] - ref.phases[i]);
    }
    dist.meta.n = n;
    dist.meta.n_averaged_states = 1;
    return dist;
}

inline LdosDistribution ldos_averaged(const EigenSystem& ref, const EigenSystem& pert,
                                      const std::vector<int>& state_sample) {
    if (state_sample.empty()) throw EmptySample("ldos_averaged: empty state sample");
    if (ref.dim() != pert.dim())
        throw DimensionMismatch("ldos_averaged: eigen systems differ in dimension");

    const int n = ref.dim();
    const int m = int(state_sample.size());
    Matrix ref_cols(n, m);
    for (int c = 0; c < m; ++c) {
        int i = state_sample[c];
        if (i < 0 || i >= n) throw std::out_of_range("ldos_averaged: state index out of range");
        ref_cols.col(c) = ref.states.col(i);
    }
    Matrix ov = pert.states.adjoint() * ref_cols;

    LdosDistribution dist;
    dist.samples.resize(std::size_t(n) * m);
    const double wnorm = 1.0 / double(m);
    std::size_t idx = 0;
    for (int c = 0; c < m; ++c) {
        double phi_i = ref.phases[state_sample[c]];
        for (int j = 0; j < n; ++j, ++idx) {
            dist.samples[idx].weight = std::norm(ov(j, c)) * wnorm;
            dist.samples[idx].dphi = wrap_phase(pert.phases[j] - phi_i);
        }
    }
    dist.meta.n = n;
    dist.meta.n_averaged_states = m;
    return dist;
}

// ------------------------------- width sigma --------------------------------

struct WidthEstimate {
    double sigma{0.0};      // half-width, radians per map step, in [0, pi]
    double mean_dphi{0.0};
    double fraction{0.7};
    bool degenerate{false};
};

// Half distance around the weighted mean containing `fraction` of the
// probability. The interval lives on the circle (distances capped at pi);
// the reported sigma is the exact smallest s at which the inclusive coverage
// reaches the fraction.
inline WidthEstimate ldos_width(const LdosDistribution& dist, double fraction = 0.7) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("ldos_width: fraction must lie in (0, 1)");
    if (dist.samples.empty()) throw EmptySample("ldos_width: empty distribution");
    double total = dist.total_weight();
    if (std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("ldos_width: distribution not normalized (sum=" +
                                    std::to_string(total) + ")");

    double mean = 0.0;
    for (const auto& s : dist.samples) mean += s.weight * s.dphi;

    std::vector<std::pair<double, double>> by_dist;
    by_dist.reserve(dist.samples.size());
    for (const auto& s : dist.samples)
        by_dist.emplace_back(std::abs(wrap_phase(s.dphi - mean)), s.weight);
    std::sort(by_dist.begin(), by_dist.end());

    const double target = fraction * total - 1e-12;
    double cum = 0.0;
    double sigma = std::numbers::pi;
    for (const auto& [d, w] : by_dist) {
        cum += w;
        if (cum >= target) {
            sigma = d;
            break;
        }
    }

    WidthEstimate est;
    est.sigma = sigma;
    est.mean_dphi = mean;
    est.fraction = fraction;
    est.degenerate = sigma <= 1e-12;
    return est;
}

// ------------------------------- sigma curve --------------------------------

struct StateSamplePolicy {
    enum class Mode { Auto, FullBasis, RandomSubset };
    Mode mode{Mode::Auto};
    int count{50};

    // Auto: full basis up to N=600, beyond that a random subset keeps the
    // overlap matrices and sample lists desk-sized.
    std::vector<int> resolve(int n, std::uint64_t seed) const {
        bool full = mode == Mode::FullBasis || (mode == Mode::Auto && n <= 600) ||
                    (mode == Mode::RandomSubset && count >= n);
        if (full) {
            std::vector<int> all(n);
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        return sample_distinct_indices(n, count, derive_seed(seed, 0x5d05ULL));
    }
};

struct SigmaPoint {
    double chi{0.0};
    double k{0.0};
    double sigma{0.0};
    WidthEstimate width;
    int n_states{0};
    bool ok{false};
    std::string error;
};

struct SigmaCurveParams {
    CatMap map{maps::G2};
    PerturbationKind kind{PerturbationKind::MomentumShear};
    ShearWindow window{ShearWindow::global()};
    double k0{0.02};
    std::vector<double> chi_grid;
    int n{300};
    StateSamplePolicy states{};
    std::uint64_t seed{0};
};

// Width of the averaged LDOS vs scaled strength chi = (k - k0) N.
// `make_eigensystem(k)` supplies decompositions (and is the cache hook);
// `for_each` runs the per-point closures (sequentially by default).
inline std::vector<SigmaPoint> sigma_curve(
    const SigmaCurveParams& params,
    const std::function<EigenSystem(double)>& make_eigensystem,
    const std::function<void(std::vector<std::function<void()>>&)>& for_each = {}) {
    for (std::size_t i = 0; i < params.chi_grid.size(); ++i) {
        if (params.chi_grid[i] < 0.0 || (i > 0 && params.chi_grid[i] <= params.chi_grid[i - 1]))
            throw std::invalid_argument("sigma_curve: chi grid must be nonnegative ascending");
    }

    const EigenSystem ref = make_eigensystem(params.k0);
    const std::vector<int> sample = params.states.resolve(params.n, params.seed);

    std::vector<SigmaPoint> points(params.chi_grid.size());
    std::vector<std::function<void()>> tasks;
    tasks.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        tasks.push_back([&, i] {
            SigmaPoint& pt = points[i];
            pt.chi = params.chi_grid[i];
            pt.k = params.k0 + pt.chi / double(params.n);
            pt.n_states = int(sample.size());
            try {
                EigenSystem pert = make_eigensystem(pt.k);
                LdosDistribution dist = ldos_averaged(ref, pert, sample);
                pt.width = ldos_width(dist);
                pt.sigma = pt.width.sigma;
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
