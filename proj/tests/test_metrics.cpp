// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qpp/metrics.hpp"

using namespace qpp;
using Catch::Approx;

namespace {

// width of c*exp(-(x/s)^2) between its p crossings, by analytic inversion
double gaussian_width(double c, double s, double p) {
    return 2.0 * s * std::sqrt(std::log(c / p));
}

ScanConfig synthetic_cfg(double step = 1e-3, double bisect = 1e-7) {
    ScanConfig cfg;
    cfg.lo = -0.3;
    cfg.hi = 0.3;
    cfg.coarse_step = step;
    cfg.bisect_tol = bisect;
    return cfg;
}

} // namespace

TEST_CASE("max_transient_pf on synthetic trajectories", "[metrics]") {
    QutritTrajectory traj;
    const int n = 2001;
    const double T = 50.0;
    for (int i = 0; i < n; ++i) {
        const double t = -T / 2 + T * i / (n - 1.0);
        traj.times.push_back(t);
        traj.p_f.push_back(0.01 * std::pow(std::cos(std::numbers::pi * t / T), 2));
    }
    CHECK(max_transient_pf(traj) == Approx(0.01).margin(1e-9));

    // the quadratic refinement recovers an off-grid vertex
    QutritTrajectory off;
    for (int i = 0; i < n; ++i) {
        const double t = -T / 2 + T * i / (n - 1.0);
        off.times.push_back(t);
        off.p_f.push_back(0.02 - 0.001 * (t - 0.0137) * (t - 0.0137));
    }
    CHECK(max_transient_pf(off) == Approx(0.02).margin(1e-12));
    CHECK(max_transient_pf(off) >= off.p_f.back());
}

TEST_CASE("robustness width of the analytic Gaussian curve", "[metrics]") {
    // p_e(delta) = 0.9995 * exp(-(delta/0.05)^2); the 0.99 crossings enclose a
    // qualified interval of width 2*0.05*sqrt(ln(0.9995/0.99))
    auto pe = [](double x) { return 0.9995 * std::exp(-(x / 0.05) * (x / 0.05)); };
    const ScanCurve curve = scan_function(ScanAxis::Detuning, synthetic_cfg(), pe);
    const double expect = gaussian_width(0.9995, 0.05, 0.99);
    CHECK(expect == Approx(0.0097725180029607).epsilon(1e-10));
    CHECK(robustness_width(curve) == Approx(expect).margin(2e-7));
    REQUIRE(curve.crossings.size() == 2);
    const RobustInterval* iv = qualified_interval(curve);
    REQUIRE(iv != nullptr);
    CHECK(iv->lo < 0.0);
    CHECK(iv->hi > 0.0);
    CHECK_FALSE(iv->lo_unbounded);
    CHECK_FALSE(iv->hi_unbounded);
}

TEST_CASE("qualification rule skips an unqualified first lobe", "[metrics]") {
    // first lobe peaks at 0.995 (above threshold, below qualification), the
    // second reaches 0.9995: the width must come from the second lobe
    auto pe = [](double x) {
        const double a = (x + 0.1) / 0.02, b = (x - 0.1) / 0.02;
        return 0.995 * std::exp(-a * a) + 0.9995 * std::exp(-b * b);
    };
    const ScanCurve curve = scan_function(ScanAxis::Detuning, synthetic_cfg(), pe);
    REQUIRE(curve.intervals.size() == 2);
    CHECK_FALSE(curve.intervals[0].qualified);
    CHECK(curve.intervals[1].qualified);
    const double expect = gaussian_width(0.9995, 0.02, 0.99);
    CHECK(robustness_width(curve) == Approx(expect).margin(2e-7));
}

TEST_CASE("no qualified interval means zero width", "[metrics]") {
    SECTION("never reaches threshold") {
        auto pe = [](double x) { return 0.9 * std::exp(-x * x); };
        const ScanCurve curve = scan_function(ScanAxis::Detuning, synthetic_cfg(), pe);
        CHECK(curve.intervals.empty());
        CHECK(robustness_width(curve) == 0.0);
    }
    SECTION("above threshold but never qualified") {
        auto pe = [](double x) { return 0.995 * std::exp(-(x / 0.05) * (x / 0.05)); };
        const ScanCurve curve = scan_function(ScanAxis::Detuning, synthetic_cfg(), pe);
        REQUIRE(curve.intervals.size() == 1);
        CHECK_FALSE(curve.intervals[0].qualified);
        CHECK(robustness_width(curve) == 0.0);
    }
}

TEST_CASE("whole-range plateau is flagged unbounded", "[metrics]") {
    auto pe = [](double) { return 0.9995; };
    const ScanCurve curve = scan_function(ScanAxis::Detuning, synthetic_cfg(), pe);
    CHECK(curve.crossings.empty());
    REQUIRE(curve.intervals.size() == 1);
    const RobustInterval& iv = curve.intervals[0];
    CHECK(iv.lo_unbounded);
    CHECK(iv.hi_unbounded);
    CHECK(iv.qualified);
    CHECK(robustness_width(curve) == Approx(0.6));
}

TEST_CASE("width is invariant under coarse-grid refinement", "[metrics]") {
    auto pe = [](double x) {
        return 0.9995 * std::exp(-std::pow((x - 0.03) / 0.07, 4));
    };
    const double w1 = robustness_width(
        scan_function(ScanAxis::Detuning, synthetic_cfg(2e-3, 1e-7), pe));
    const double w2 = robustness_width(
        scan_function(ScanAxis::Detuning, synthetic_cfg(1e-3, 1e-7), pe));
    CHECK(std::abs(w1 - w2) < 2e-7);
}

TEST_CASE("scan grids", "[metrics]") {
    SECTION("inverted range rejected") {
        ScanConfig bad = synthetic_cfg();
        bad.lo = 0.3;
        bad.hi = -0.3;
        CHECK_THROWS_AS(scan_function(ScanAxis::Detuning, bad, [](double) { return 0.0; }),
                        ConfigError);
    }
    SECTION("log spacing is strictly increasing and hits both ends") {
        ScanConfig cfg = default_amplitude_scan_config();
        cfg.log_points = 50;
        const ScanCurve curve =
            scan_function(ScanAxis::Amplitude, cfg, [](double) { return 0.0; });
        REQUIRE(curve.samples.size() == 50);
        CHECK(curve.samples.front().x == cfg.lo);
        CHECK(curve.samples.back().x == cfg.hi);
        for (std::size_t i = 1; i < curve.samples.size(); ++i) {
            CHECK(curve.samples[i].x > curve.samples[i - 1].x);
            if (i >= 2) {
                const double r1 = curve.samples[i].x / curve.samples[i - 1].x;
                const double r0 = curve.samples[i - 1].x / curve.samples[i - 2].x;
                CHECK(r1 == Approx(r0).epsilon(1e-6));
            }
        }
    }
    SECTION("log spacing rejects a zero lower bound") {
        ScanConfig cfg = default_amplitude_scan_config();
        cfg.lo = 0.0;
        CHECK_THROWS_AS(scan_function(ScanAxis::Amplitude, cfg, [](double) { return 0.0; }),
                        ConfigError);
    }
}

TEST_CASE("zero pulse gives an all-zero scan and infeasible objectives", "[metrics]") {
    const PulseModel m =
        model_from_vector("SG1", std::vector<double>{0.0, 2.0, -3.0, 0.1}, 50.0);
    const PhysicsConstants c;
    ScanConfig cfg = synthetic_cfg(0.01); // coarse; the curve is identically 0
    const ScanCurve curve = detuning_scan(m, c, cfg, {.rel_tol = 1e-8});
    for (const auto& s : curve.samples) CHECK(s.pe_final == Approx(0.0).margin(1e-12));
    CHECK(curve.crossings.empty());

    ObjectivesConfig oc;
    oc.det_scan = cfg;
    oc.evolve.rel_tol = 1e-8;
    const ObjectivePoint p = objectives(m, c, oc);
    CHECK(p.max_pf == Approx(0.0).margin(1e-12));
    CHECK(p.det_rob == 0.0);
    CHECK_FALSE(p.feasible);

    // a pulse whose amplitude never reaches the adiabatic threshold has zero
    // amplitude robustness
    ScanConfig amp;
    amp.lo = 1e-6;
    amp.hi = 1e-4;
    amp.log_spaced = true;
    amp.log_points = 5;
    const ScanCurve ampcurve = amplitude_scan(m, c, amp, {.rel_tol = 1e-8});
    for (const auto& s : ampcurve.samples) CHECK(s.pe_final < 1e-4);
    CHECK(robustness_width(ampcurve) == 0.0);
}

TEST_CASE("shrinking the amplitude drives the robustness to zero", "[metrics]") {
    // monotone sanity on the paper-style SECH3 pulse (k1 sign per Eq. 1)
    const PhysicsConstants c;
    ScanConfig cfg = synthetic_cfg(5e-3, 1e-5);
    EvolveOptions opt{.rel_tol = 1e-8, .abs_tol = 1e-11};
    double prev = 1.0;
    for (double omega0 : {0.1, 0.05, 0.02, 0.005}) {
        const PulseModel m = model_from_vector(
            "SECH3", std::vector<double>{omega0, 0.995, 2.0, 0.161, 1.92}, 50.0);
        const double w = robustness_width(detuning_scan(m, c, cfg, opt, 2));
        CHECK(w <= prev + 1e-9);
        prev = w;
    }
    CHECK(prev == 0.0); // omega0 = 0.005 is far below the adiabatic threshold
}

TEST_CASE("paper SECH3 pulse has a qualified interval containing zero", "[metrics]") {
    // light version of the acceptance check (coarser scan, T = 50 ns only)
    const PulseModel m = model_from_vector(
        "SECH3", std::vector<double>{0.1, 0.995, 2.0, 0.161, 1.92}, 50.0);
    ScanConfig cfg = synthetic_cfg(4e-3, 1e-5);
    const ScanCurve curve = detuning_scan(m, PhysicsConstants{}, cfg,
                                          {.rel_tol = 1e-8, .abs_tol = 1e-11}, 2);
    const RobustInterval* iv = qualified_interval(curve);
    REQUIRE(iv != nullptr);
    CHECK(iv->lo < 0.0);
    CHECK(iv->hi > 0.0);
    CHECK(iv->width() > 0.10);
}
