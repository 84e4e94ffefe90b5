// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qpp/dynamics.hpp"
#include "qpp/parallel.hpp"
#include "qpp/pulse.hpp"

namespace qpp {

enum class ScanAxis { Detuning, Amplitude };

struct ScanSample {
    double x;        // GHz (delta or Omega0 depending on the axis)
    double pe_final; // p_e(T/2)
};

// One contiguous region with p_e(T/2) >= p_thresh. `qualified` means a coarse
// sample inside reaches p_qualify. Edges that coincide with the scan range
// (no crossing found there) are flagged unbounded.
struct RobustInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool qualified = false;
    bool lo_unbounded = false;
    bool hi_unbounded = false;

    double width() const { return hi - lo; }
};

struct ScanCurve {
    ScanAxis axis = ScanAxis::Detuning;
    std::vector<ScanSample> samples;     // sorted strictly ascending in x
    std::vector<double> crossings;       // refined x with p_e(T/2) = p_thresh
    std::vector<RobustInterval> intervals;
    double p_thresh = 0.99;
    double p_qualify = 0.999;
};

// Sweep layout and thresholds. Linear spacing uses coarse_step; log spacing
// uses log_points between lo and hi (lo must be positive in that case).
struct ScanConfig {
    double lo = -0.3;          // GHz
    double hi = 0.3;           // GHz
    double coarse_step = 1e-3; // GHz
    bool log_spaced = false;
    int log_points = 400;
    double bisect_tol = 1e-5;  // GHz, crossing refinement
    double p_thresh = 0.99;
    double p_qualify = 0.999;
};

// Pareto objective pair: transient |f> leakage (minimized) and the detuning
// robustness width (maximized). Infeasible means no qualified interval.
struct ObjectivePoint {
    double max_pf = 0.0;  // probability
    double det_rob = 0.0; // GHz
    bool feasible = false;
};

// Largest transient p_f over the reporting grid, with a local quadratic fit
// around the grid argmax to take out the discretization bias.
inline double max_transient_pf(const QutritTrajectory& traj) {
    const auto it = std::max_element(traj.p_f.begin(), traj.p_f.end());
    const std::size_t i = static_cast<std::size_t>(it - traj.p_f.begin());
    double best = *it;
    if (i > 0 && i + 1 < traj.p_f.size()) {
        const double y0 = traj.p_f[i - 1], y1 = best, y2 = traj.p_f[i + 1];
        const double curv = y0 - 2.0 * y1 + y2;
        if (curv < 0.0) {
            const double d = y0 - y2;
            best = std::min(y1 - d * d / (8.0 * curv), 1.0);
        }
    }
    return best;
}

namespace detail {

inline std::vector<double> scan_grid(const ScanConfig& cfg) {
    if (!(cfg.lo < cfg.hi)) throw ConfigError("scan range requires lo < hi");
    std::vector<double> xs;
    if (cfg.log_spaced) {
        if (!(cfg.lo > 0.0))
            throw ConfigError("log-spaced scan requires a positive lower bound");
        if (cfg.log_points < 2) throw ConfigError("log_points must be >= 2");
        const double llo = std::log(cfg.lo), lhi = std::log(cfg.hi);
        xs.resize(cfg.log_points);
        for (int i = 0; i < cfg.log_points; ++i)
            xs[i] = std::exp(llo + (lhi - llo) * i / (cfg.log_points - 1));
        xs.front() = cfg.lo;
        xs.back() = cfg.hi;
    } else {
        if (!(cfg.coarse_step > 0.0)) throw ConfigError("coarse_step must be positive");
        const int n = static_cast<int>(std::round((cfg.hi - cfg.lo) / cfg.coarse_step)) + 1;
        xs.resize(std::max(n, 2));
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = cfg.lo + cfg.coarse_step * i;
        xs.back() = std::min(xs.back(), cfg.hi);
    }
    return xs;
}

// Bisect p_e(x) - p_thresh between two samples of opposite side.
inline double refine_crossing(const std::function<double(double)>& pe, double x_lo,
                              double x_hi, bool rising, double thresh, double tol) {
    double a = x_lo, b = x_hi;
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const bool above = pe(m) >= thresh;
        if (above == rising)
            b = m; // crossing is left of m for a rising edge already above
        else
            a = m;
    }
    return 0.5 * (a + b);
}

} // namespace detail

// Scan driver over an arbitrary p_e(T/2) functional: sample the grid (in
// parallel), then locate and refine the threshold crossings and assemble the
// qualified intervals. The physical scans below and the synthetic-curve tests
// both go through here.
inline ScanCurve scan_function(ScanAxis axis, const ScanConfig& cfg,
                               const std::function<double(double)>& pe_final,
                               int threads = 1) {
    const std::vector<double> xs = detail::scan_grid(cfg);
    ScanCurve curve;
    curve.axis = axis;
    curve.p_thresh = cfg.p_thresh;
    curve.p_qualify = cfg.p_qualify;
    curve.samples.resize(xs.size());
    parallel_for(xs.size(), threads,
                 [&](std::size_t i) { curve.samples[i] = {xs[i], pe_final(xs[i])}; });

    const double th = cfg.p_thresh;
    bool inside = curve.samples.front().pe_final >= th;
    RobustInterval cur;
    if (inside) {
        cur.lo = curve.samples.front().x;
        cur.lo_unbounded = true;
        cur.qualified = curve.samples.front().pe_final >= cfg.p_qualify;
    }
    for (std::size_t i = 1; i < curve.samples.size(); ++i) {
        const auto& prev = curve.samples[i - 1];
        const auto& s = curve.samples[i];
        const bool above = s.pe_final >= th;
        if (above && !inside) {
            const double c = detail::refine_crossing(pe_final, prev.x, s.x, true, th,
                                             cfg.bisect_tol);
            curve.crossings.push_back(c);
            cur = RobustInterval{};
            cur.lo = c;
            inside = true;
        } else if (!above && inside) {
            const double c = detail::refine_crossing(pe_final, prev.x, s.x, false, th,
                                             cfg.bisect_tol);
            curve.crossings.push_back(c);
            cur.hi = c;
            curve.intervals.push_back(cur);
            inside = false;
        }
        if (inside && s.pe_final >= cfg.p_qualify) cur.qualified = true;
    }
    if (inside) {
        cur.hi = curve.samples.back().x;
        cur.hi_unbounded = true;
        curve.intervals.push_back(cur);
    }
    return curve;
}

// p_e(T/2) versus the static offset delta.
inline ScanCurve detuning_scan(const PulseModel& model, const PhysicsConstants& constants,
                               const ScanConfig& cfg = {}, const EvolveOptions& opt = {},
                               int threads = 1) {
    auto pe = [&](double delta) {
        try {
            return std::norm(evolve_final(model, delta, constants, opt)[1]);
        } catch (const IntegrationError& e) {
            throw NumericalError("detuning scan failed at delta = " +
                                 std::to_string(delta) + " GHz: " + e.what());
        }
    };
    return scan_function(ScanAxis::Detuning, cfg, pe, threads);
}

// p_e(T/2) versus the envelope amplitude Omega0, at the model's fixed delta
// offset (nominally 0).
inline ScanCurve amplitude_scan(const PulseModel& model, const PhysicsConstants& constants,
                                const ScanConfig& cfg, const EvolveOptions& opt = {},
                                int threads = 1) {
    if (cfg.lo < 0.0) throw ConfigError("amplitude scan requires lo >= 0");
    auto pe = [&](double omega0) {
        PulseModel m = model;
        m.envelope.omega0 = omega0;
        try {
            return std::norm(evolve_final(m, m.delta_offset, constants, opt)[1]);
        } catch (const IntegrationError& e) {
            throw NumericalError("amplitude scan failed at omega0 = " +
                                 std::to_string(omega0) + " GHz: " + e.what());
        }
    };
    return scan_function(ScanAxis::Amplitude, cfg, pe, threads);
}

inline ScanConfig default_amplitude_scan_config() {
    ScanConfig cfg;
    cfg.lo = 1e-3;
    cfg.hi = 0.3;
    cfg.log_spaced = true;
    cfg.log_points = 400;
    return cfg;
}

// First qualified interval in ascending x, or nullptr.
inline const RobustInterval* qualified_interval(const ScanCurve& curve) {
    for (const auto& iv : curve.intervals)
        if (iv.qualified) return &iv;
    return nullptr;
}

// Width of the curve between the first up-crossing and the next down-crossing
// of p_thresh such that the enclosed interval reaches p_qualify; 0 when no
// interval qualifies.
inline double robustness_width(const ScanCurve& curve) {
    const RobustInterval* iv = qualified_interval(curve);
    return iv ? iv->width() : 0.0;
}

struct ObjectivesConfig {
    ScanConfig det_scan{};   // defaults: [-0.3, 0.3] GHz, 1 MHz coarse step
    EvolveOptions evolve{};
};

// The Pareto objective pair: max_pf from the delta = 0 trajectory, det_rob
// from the detuning scan.
inline ObjectivePoint objectives(const PulseModel& model, const PhysicsConstants& constants,
                                 const ObjectivesConfig& cfg = {}, int threads = 1) {
    ObjectivePoint p;
    p.max_pf = max_transient_pf(evolve(model, 0.0, constants, cfg.evolve));
    const ScanCurve curve = detuning_scan(model, constants, cfg.det_scan, cfg.evolve, threads);
    p.det_rob = robustness_width(curve);
    p.feasible = p.det_rob > 0.0;
    return p;
}

} // namespace qpp
