#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "qcat/echo.hpp"
#include "qcat/quantize.hpp"
#include "qcat/rng.hpp"

using namespace qcat;

TEST_CASE("coherent_state_norm_and_localization") {
    Rng rng(21);
    for (int rep = 0; rep < 10; ++rep) {
        TorusPoint c{rng.next_double(), rng.next_double()};
        CoherentState psi = coherent_state(c, 100);
        CHECK(psi.vector.norm() == Catch::Approx(1.0).margin(1e-12));
    }

    // well-separated packets are exponentially orthogonal
    CoherentState a = coherent_state({0.2, 0.2}, 100);
    CoherentState b = coherent_state({0.7, 0.7}, 100);
    CHECK(std::norm(b.vector.dot(a.vector)) < std::exp(-100.0 / 10.0));

    // position expectation sits on the center
    CoherentState c = coherent_state({0.3, 0.5}, 100);
    CHECK(position_expectation(c.vector) == Catch::Approx(0.3).margin(2.0 / 10.0));
    CoherentState d = coherent_state({0.3, 0.5}, 400);
    CHECK(position_expectation(d.vector) == Catch::Approx(0.3).margin(2.0 / 20.0));
}

TEST_CASE("coherent_state_matches_direct_formula") {
    const int n = 16;
    TorusPoint c{0.37, 0.81};
    CoherentState psi = coherent_state(c, n);
    Vector ref(n);
    for (int j = 0; j < n; ++j) {
        oracle::Complex amp = 0.0;
        for (int m = -3; m <= 3; ++m) {
            double y = double(j) / n - c.q + m;
            amp += std::exp(oracle::Complex(-oracle::kPi * n * y * y,
                                            2.0 * oracle::kPi * n * c.p * y));
        }
        ref[j] = amp;
    }
    ref.normalize();
    CHECK((psi.vector - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("loschmidt_echo_identical_evolutions") {
    Propagator u = compose_momentum_perturbed(maps::G2, 0.02, 60);
    CoherentState psi = coherent_state({0.4, 0.6}, 60);
    EchoCurve curve = loschmidt_echo(u, u, psi, 30);
    for (int t = 0; t <= 30; ++t) CHECK(curve.m[t] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("loschmidt_echo_n4_matches_matrix_power_oracle") {
    const int n = 4;
    Propagator ur = compose_momentum_perturbed(maps::G2, 0.02, n);
    Propagator up = compose_momentum_perturbed(maps::G2, 0.07, n);
    CoherentState psi = coherent_state({0.25, 0.5}, n);
    EchoCurve curve = loschmidt_echo(ur, up, psi, 12);
    CHECK(curve.m[0] == Catch::Approx(1.0).margin(1e-12));
    for (int t = 1; t <= 12; ++t) {
        Matrix rt = oracle::matrix_power(ur.matrix, t);
        Matrix pt = oracle::matrix_power(up.matrix, t);
        oracle::Complex overlap = (pt * psi.vector).dot(rt * psi.vector);
        CHECK(curve.m[t] == Catch::Approx(std::norm(overlap)).margin(1e-8));
    }
}

TEST_CASE("echo_norm_preservation_and_bounds") {
    Propagator u = compose_double_shear(maps::G3, 0.03, 50);
    CoherentState psi = coherent_state({0.1, 0.9}, 50);
    Vector v = psi.vector;
    for (int t = 0; t < 200; ++t) {
        v = u.matrix * v;
        CHECK(v.norm() == Catch::Approx(1.0).margin(1e-9));
    }
    Propagator ur = compose_momentum_perturbed(maps::G3, 0.02, 50);
    EchoCurve curve = loschmidt_echo(ur, u, psi, 50);
    for (double m : curve.m) {
        CHECK(m >= 0.0);
        CHECK(m <= 1.0 + 1e-9);
    }
}

TEST_CASE("echo_global_phase_and_swap_invariance") {
    const int n = 40;
    Propagator ur = compose_momentum_perturbed(maps::G2, 0.02, n);
    Propagator up = compose_momentum_perturbed(maps::G2, 0.06, n);
    CoherentState psi = coherent_state({0.6, 0.2}, n);

    EchoCurve base = loschmidt_echo(ur, up, psi, 20);

    Propagator up_phase = up;
    up_phase.matrix *= std::polar(1.0, 1.234);
    EchoCurve phased = loschmidt_echo(ur, up_phase, psi, 20);
    EchoCurve swapped = loschmidt_echo(up, ur, psi, 20);
    for (int t = 0; t <= 20; ++t) {
        CHECK(phased.m[t] == Catch::Approx(base.m[t]).margin(1e-12));
        CHECK(swapped.m[t] == Catch::Approx(base.m[t]).margin(1e-12));
    }
}

TEST_CASE("echo_long_time_average_scales_inverse_n") {
    // strongly perturbed G2 at N=400: saturation near c/N with c of order one
    const int n = 400;
    Propagator ur = compose_momentum_perturbed(maps::G2, 0.02, n);
    Propagator up = compose_momentum_perturbed(maps::G2, 0.02 + 40.0 / n, n);
    EchoCurve curve = echo_ensemble(ur, up, 8, 150, 2024);
    double acc = 0.0;
    int count = 0;
    for (int t = 50; t <= 150; ++t) {
        acc += curve.m[t];
        ++count;
    }
    double saturation = acc / count;
    CHECK(saturation > 0.2 / n);
    CHECK(saturation < 5.0 / n);
}

TEST_CASE("echo_ensemble_statistics") {
    const int n = 200;
    Propagator ur = compose_momentum_perturbed(maps::G2, 0.02, n);
    Propagator up = compose_momentum_perturbed(maps::G2, 0.05, n);

    // n_states = 1 equals the bare echo at that center
    auto centers = random_centers(1, 7);
    EchoCurve one = echo_ensemble(ur, up, 1, 25, 7);
    EchoCurve direct = loschmidt_echo(ur, up, coherent_state(centers[0], n), 25);
    for (int t = 0; t <= 25; ++t) {
        CHECK(one.m[t] == direct.m[t]);
        CHECK(one.sem[t] == 0.0);
    }

    EchoCurve mean = echo_ensemble(ur, up, 20, 25, 99);
    CHECK(mean.m[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(mean.sem[0] == Catch::Approx(0.0).margin(1e-12));

    // bit-identical rerun for the same seed
    EchoCurve rerun = echo_ensemble(ur, up, 20, 25, 99);
    for (int t = 0; t <= 25; ++t) CHECK(mean.m[t] == rerun.m[t]);

    // statistically reproducible across independent seeds
    EchoCurve other = echo_ensemble(ur, up, 20, 25, 100);
    for (int t = 1; t <= 25; ++t) {
        double tol = 3.0 * (mean.sem[t] + other.sem[t]) + 1e-6;
        CHECK(std::abs(mean.m[t] - other.m[t]) < tol);
    }
}

TEST_CASE("fit_decay_rate_synthetic") {
    // exact exponential: gamma recovered to machine precision
    EchoCurve exact;
    exact.m.resize(41);
    exact.sem.assign(41, 0.0);
    for (int t = 0; t <= 40; ++t) exact.m[t] = std::exp(-0.5 * t);
    DecayFit fit = fit_decay_rate(exact, 1000000);
    CHECK(fit.gamma == Catch::Approx(0.5).margin(1e-9));
    CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
    CHECK(fit.t_start == 1);
    CHECK(fit.quality == FitQuality::Ok);

    // additive noise floor: still within 5%
    EchoCurve noisy;
    noisy.m.resize(31);
    noisy.sem.assign(31, 0.0);
    for (int t = 0; t <= 30; ++t) noisy.m[t] = std::exp(-0.5 * t) + 0.001;
    DecayFit nf = fit_decay_rate(noisy, 1000);
    CHECK(nf.gamma == Catch::Approx(0.5).epsilon(0.05));
}

TEST_CASE("fit_decay_rate_degenerate_cases") {
    // no decay at all
    EchoCurve flat;
    flat.m.assign(31, 1.0);
    flat.sem.assign(31, 0.0);
    DecayFit fit = fit_decay_rate(flat, 500);
    CHECK(fit.gamma == 0.0);
    CHECK(fit.quality == FitQuality::NoDecay);

    // immediate collapse: window cannot reach 3 points
    EchoCurve cliff;
    cliff.m = {1.0, 1e-9, 1e-9, 1e-9, 1e-9, 1e-9};
    cliff.sem.assign(6, 0.0);
    CHECK_THROWS_AS(fit_decay_rate(cliff, 100), FitWindowTooShort);

    EchoCurve tiny;
    tiny.m = {1.0, 0.5};
    tiny.sem.assign(2, 0.0);
    CHECK_THROWS_AS(fit_decay_rate(tiny, 100), std::invalid_argument);
}

TEST_CASE("fit_decay_rate_widened_threshold") {
    // saturation crossing at t=2 under 5/N but t=3 under 2/N
    const int n = 100;
    EchoCurve curve;
    curve.m.resize(21);
    curve.sem.assign(21, 0.0);
    for (int t = 0; t <= 20; ++t) curve.m[t] = std::exp(-2.0 * t);
    // m(2) = 0.018 < 5/N = 0.05 -> widened; m(3) = 0.0025 just above 2/N = 0.02? no:
    // e^{-6}=0.0025 < 0.02, first crossing of 2/N is t=2 as well (0.018 < 0.02)
    // so construct explicitly
    curve.m = {1.0, 0.2, 0.03, 0.015, 0.01, 0.008, 0.007, 0.006, 0.005, 0.005, 0.005};
    curve.sem.assign(curve.m.size(), 0.0);
    DecayFit fit = fit_decay_rate(curve, n);  // 5/N = 0.05 crosses at t=2; 2/N = 0.02 at t=3
    CHECK(fit.quality == FitQuality::Widened);
    CHECK(fit.t_end == 3);
    CHECK(fit.gamma > 0.0);
}

TEST_CASE("gamma_curve_zero_and_positive_points") {
    GammaCurveParams params;
    params.map = maps::G2;
    params.kind = PerturbationKind::MomentumShear;
    params.k0 = 0.02;
    params.chi_grid = {0.0, 30.0};
    params.n = 120;
    params.n_states = 6;
    params.t_steps = 40;
    params.seed = 11;
    auto build = [&](double k) { return compose_momentum_perturbed(maps::G2, k, params.n); };
    auto pts = gamma_curve(params, build);
    REQUIRE(pts.size() == 2);
    // chi = 0: identical propagators, flagged as no decay
    if (pts[0].ok) {
        CHECK(pts[0].fit.quality == FitQuality::NoDecay);
        CHECK(pts[0].fit.gamma == 0.0);
    }
    REQUIRE(pts[1].ok);
    CHECK(pts[1].fit.gamma > 0.1);
    CHECK(pts[1].fit.quality != FitQuality::NoDecay);

    // determinism: same seed, same curve
    auto again = gamma_curve(params, build);
    CHECK(again[1].fit.gamma == pts[1].fit.gamma);
}
