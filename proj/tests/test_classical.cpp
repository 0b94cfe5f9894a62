#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qcat/classical.hpp"
#include "qcat/rng.hpp"

using namespace qcat;

TEST_CASE("cat_map_construction_rejects_invalid") {
    CHECK_THROWS_AS(CatMap(2, 1, 1, 2, "bad_det"), std::invalid_argument);    // det 3
    CHECK_THROWS_AS(CatMap(1, 0, 0, 1, "identity"), std::invalid_argument);   // trace 2
    CHECK_THROWS_AS(CatMap(0, 1, -1, 0, "rotation"), std::invalid_argument);  // trace 0
    CHECK(maps::G1.det() == 1);
    CHECK(maps::G4.trace() == 16);
}

TEST_CASE("apply_cat_map_examples") {
    TorusPoint origin = apply_cat_map(maps::G1, {0.0, 0.0});
    CHECK(origin.q == 0.0);
    CHECK(origin.p == 0.0);

    TorusPoint a = apply_cat_map(maps::G1, {0.5, 0.5});
    CHECK(a.q == Catch::Approx(0.5).margin(1e-15));
    CHECK(a.p == Catch::Approx(0.0).margin(1e-15));

    TorusPoint b = apply_cat_map(maps::G2, {0.25, 0.1});
    CHECK(b.q == Catch::Approx(0.6).margin(1e-15));
    CHECK(b.p == Catch::Approx(0.95).margin(1e-15));
}

TEST_CASE("mod1_keeps_unit_interval") {
    CHECK(mod1(1.0) == 0.0);
    CHECK(mod1(-0.25) == Catch::Approx(0.75));
    CHECK(mod1(3.75) == Catch::Approx(0.75));
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        double x = 50.0 * (rng.next_double() - 0.5);
        double y = mod1(x);
        CHECK(y >= 0.0);
        CHECK(y < 1.0);
    }
}

TEST_CASE("shear_profile_examples") {
    CHECK(shear_profile(0.0, 0.37) == Catch::Approx(0.0).margin(1e-15));
    CHECK(shear_profile(0.5, kTwoPi) == Catch::Approx(-2.0).margin(1e-12));
    ShearWindow w(0.2098, 0.1);
    CHECK(shear_profile(0.5, kTwoPi, w) == 0.0);
}

TEST_CASE("shear_profile_periodic_and_window_semantics") {
    Rng rng(5);
    ShearWindow win(0.31, 0.25);
    for (int i = 0; i < 300; ++i) {
        double q = rng.next_double();
        double k = 0.2 * rng.next_double();
        CHECK(shear_profile(mod1(q), k) == Catch::Approx(shear_profile(mod1(q + 1.0), k)).margin(1e-12));
        // w=1 window equals the global shear pointwise
        CHECK(shear_profile(q, k, ShearWindow(0.77, 1.0)) == shear_profile(q, k));
        // outside/inside agree with wrapped distance
        double d = q - win.q0;
        d -= std::floor(d + 0.5);
        bool inside = d >= -win.w / 2 && d < win.w / 2;
        CHECK(win.contains(q) == inside);
    }
}

TEST_CASE("shear_profile_peak_location") {
    // argmax of cos(2pi q) - cos(4pi q) sits at cos(2pi q) = 1/4
    double q0 = shear_profile_peak_q();
    CHECK(q0 == Catch::Approx(0.2098).margin(5e-4));
    // golden-section maximization agrees
    double lo = 0.1, hi = 0.3;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [](double q) { return std::cos(kTwoPi * q) - std::cos(2.0 * kTwoPi * q); };
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    for (int i = 0; i < 200; ++i) {
        if (f(a) > f(b)) hi = b; else lo = a;
        a = hi - gr * (hi - lo);
        b = lo + gr * (hi - lo);
    }
    CHECK(q0 == Catch::Approx(0.5 * (lo + hi)).margin(1e-9));
}

TEST_CASE("apply_perturbed_map_matches_hand_composition") {
    // k = 0 reduces to the bare map
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        TorusPoint pt{rng.next_double(), rng.next_double()};
        TorusPoint bare = apply_cat_map(maps::G3, pt);
        TorusPoint pert = apply_perturbed_map(maps::G3, 0.0, ShearWindow::global(), pt);
        CHECK(pert.q == bare.q);
        CHECK(pert.p == bare.p);
    }

    TorusPoint fixed = apply_perturbed_map(maps::G1, 0.05, ShearWindow::global(), {0.0, 0.0});
    CHECK(fixed.q == 0.0);
    CHECK(fixed.p == 0.0);

    // direct evaluation of the composition for G2 at (0.25, 0.1)
    double eps = 0.05 / kTwoPi * (std::cos(kTwoPi * 0.25) - std::cos(2.0 * kTwoPi * 0.25));
    double p1 = 0.1 + eps;
    TorusPoint got = apply_perturbed_map(maps::G2, 0.05, ShearWindow::global(), {0.25, 0.1});
    CHECK(got.q == Catch::Approx(mod1(2 * 0.25 + p1)).margin(1e-14));
    CHECK(got.p == Catch::Approx(mod1(3 * 0.25 + 2 * p1)).margin(1e-14));
}

TEST_CASE("perturbed_map_preserves_area") {
    // finite-difference Jacobian determinant = 1 at sampled points
    const double h = 1e-6;
    ShearWindow win(shear_profile_peak_q(), 0.3);
    Rng rng(23);
    for (int i = 0; i < 60; ++i) {
        TorusPoint pt{rng.next_double(), rng.next_double()};
        // skip points within h of the window edge (hard cutoff there)
        double d = pt.q - win.q0;
        d -= std::floor(d + 0.5);
        if (std::abs(std::abs(d) - win.w / 2) < 1e-3) continue;
        auto step = [&](double q, double p) {
            // unwrapped variant of the perturbed map for differentiation
            double pk = p + shear_profile(mod1(q), 0.08, win);
            return std::pair<double, double>(2 * q + 1 * pk, 3 * q + 2 * pk);
        };
        auto [qpp, ppp] = step(pt.q + h, pt.p);
        auto [qpm, ppm] = step(pt.q - h, pt.p);
        auto [qqp, pqp] = step(pt.q, pt.p + h);
        auto [qqm, pqm] = step(pt.q, pt.p - h);
        double j11 = (qpp - qpm) / (2 * h), j12 = (qqp - qqm) / (2 * h);
        double j21 = (ppp - ppm) / (2 * h), j22 = (pqp - pqm) / (2 * h);
        CHECK(j11 * j22 - j12 * j21 == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("lyapunov_closed_form_values") {
    CHECK(lyapunov_closed_form(maps::G1) == Catch::Approx(0.9624).margin(5e-5));
    CHECK(lyapunov_closed_form(maps::G2) == Catch::Approx(1.3170).margin(5e-5));
    CHECK(lyapunov_closed_form(maps::G3) == Catch::Approx(2.0634).margin(5e-5));
    CHECK(lyapunov_closed_form(maps::G4) == Catch::Approx(2.7687).margin(5e-5));
    CHECK(lyapunov_closed_form(maps::G1) == Catch::Approx(std::log(0.5 * (3 + std::sqrt(5.0)))));
    CHECK(lyapunov_closed_form(maps::G2) == Catch::Approx(std::log(2 + std::sqrt(3.0))));
    CHECK(lyapunov_closed_form(maps::G3) == Catch::Approx(std::log(4 + std::sqrt(15.0))));
    CHECK(lyapunov_closed_form(maps::G4) == Catch::Approx(std::log(8 + 3 * std::sqrt(7.0))));
}

TEST_CASE("lyapunov_numeric_unperturbed_matches_closed_form") {
    for (const CatMap* map : {&maps::G1, &maps::G2, &maps::G3, &maps::G4}) {
        auto est = lyapunov_numeric(*map, 0.0, ShearWindow::global(), 400, 10, 99);
        double closed = lyapunov_closed_form(*map);
        CHECK(std::abs(est.value - closed) <= 3.0 * est.std_error + 1e-9);
    }
    // linear map: a single sample is already exact
    auto single = lyapunov_numeric(maps::G3, 0.0, ShearWindow::global(), 400, 1, 7);
    CHECK(single.value == Catch::Approx(2.0634).margin(1e-3));
    CHECK(single.std_error == 0.0);
}

TEST_CASE("lyapunov_numeric_perturbed_stays_close") {
    auto est = lyapunov_numeric(maps::G2, 0.05, ShearWindow::global(), 2000, 24, 31);
    CHECK(est.value == Catch::Approx(1.3170).epsilon(0.05));
    CHECK(est.converged);
    // deterministic for a fixed seed
    auto again = lyapunov_numeric(maps::G2, 0.05, ShearWindow::global(), 2000, 24, 31);
    CHECK(est.value == again.value);
    CHECK_THROWS_AS(lyapunov_numeric(maps::G2, 0.0, ShearWindow::global(), 0, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("anosov_bound_flag") {
    CHECK_FALSE(exceeds_anosov_bound(0.05));
    CHECK(exceeds_anosov_bound(0.12));
}
