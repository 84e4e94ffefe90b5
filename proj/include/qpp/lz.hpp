// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qpp/dynamics.hpp"
#include "qpp/metrics.hpp"
#include "qpp/pulse.hpp"

namespace qpp {

// Analytic robustness bound from the Landau-Zener diabatic transition
// probability p_LZ = exp(-2*pi*Gamma), Gamma = Omega(t0)^2 / (4|v|) with t0
// the detuning zero and v the detuning slope there (angular units).
struct LZBound {
    double delta_minus = 0.0; // GHz
    double delta_plus = 0.0;  // GHz
    double width = 0.0;       // GHz, delta_plus - delta_minus
    bool feasible = false;    // threshold reachable at delta = 0
};

// All detuning zeros in [-T/2, T/2], ascending. Brackets come from a uniform
// sample; each is polished by bisection.
inline std::vector<double> detuning_roots(const DetuningParams& det, double delta,
                                          double T, int samples = 4001) {
    std::vector<double> roots;
    auto f = [&](double t) { return detuning_value(det, t, T, delta); };
    double t_prev = -T / 2;
    double f_prev = f(t_prev);
    for (int i = 1; i < samples; ++i) {
        const double t = -T / 2 + T * static_cast<double>(i) / (samples - 1);
        const double ft = f(t);
        if (f_prev == 0.0) {
            roots.push_back(t_prev);
        } else if ((f_prev < 0.0) != (ft < 0.0)) {
            double a = t_prev, b = t;
            while (b - a > 1e-13 * T) {
                const double m = 0.5 * (a + b);
                if ((f(m) < 0.0) == (f_prev < 0.0))
                    a = m;
                else
                    b = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        t_prev = t;
        f_prev = ft;
    }
    if (f_prev == 0.0) roots.push_back(t_prev);
    return roots;
}

// The detuning zero closest to t = 0 (the paper's LZ treatment assumes one
// dominant crossing; extra roots are surfaced through detuning_roots).
inline double crossing_time(const DetuningParams& det, double delta, double T) {
    const auto roots = detuning_roots(det, delta, T);
    if (roots.empty())
        throw NoCrossingError("detuning has no zero in the pulse window (delta = " +
                              std::to_string(delta) + " GHz)");
    return *std::min_element(roots.begin(), roots.end(),
                             [](double a, double b) { return std::abs(a) < std::abs(b); });
}

// Gamma = Omega(t0)^2 / (4 |Delta'(t0)|) in angular units; with GHz inputs the
// conversion leaves a single factor 2*pi.
inline double lz_gamma(const PulseModel& model, double delta) {
    const double T = model.duration_t;
    const double t0 = crossing_time(model.detuning, delta, T);
    const double v = detuning_slope(model.detuning, t0, T);
    if (v == 0.0)
        throw DegenerateVelocityError(
            "detuning slope vanishes at the crossing t0 = " + std::to_string(t0) + " ns");
    const double om = envelope_value(model.envelope, t0, T);
    return kGhzToAngular * om * om / (4.0 * std::abs(v));
}

namespace detail {

// Gamma threshold equivalent to 1 - exp(-2*pi*Gamma) >= p.
inline double gamma_threshold(double p) {
    return std::log(1.0 / (1.0 - p)) / (2.0 * std::numbers::pi);
}

} // namespace detail

// Solve 1 - exp(-2*pi*Gamma(delta)) = p_thresh on each side of delta = 0 by
// marching outward and bisecting; a delta whose detuning never crosses zero
// counts as below threshold.
inline LZBound lz_robustness(const PulseModel& model, double p_thresh = 0.99,
                             double delta_max = 1.0, double tol = 1e-5) {
    const double gamma_star = detail::gamma_threshold(p_thresh);
    auto above = [&](double delta) {
        try {
            return lz_gamma(model, delta) >= gamma_star;
        } catch (const NumericalError&) {
            return false;
        }
    };

    LZBound bound;
    if (!above(0.0)) return bound; // threshold fails at the best point
    bound.feasible = true;

    auto edge = [&](double direction) {
        double inside = 0.0;
        double step = 2e-3;
        double probe = step * direction;
        while (std::abs(probe) <= delta_max && above(probe)) {
            inside = probe;
            step *= 1.5;
            probe += step * direction;
        }
        if (std::abs(probe) > delta_max) return direction * delta_max;
        double a = inside, b = probe; // a above, b below
        while (std::abs(b - a) > tol) {
            const double m = 0.5 * (a + b);
            if (above(m))
                a = m;
            else
                b = m;
        }
        return 0.5 * (a + b);
    };
    bound.delta_plus = edge(+1.0);
    bound.delta_minus = edge(-1.0);
    bound.width = bound.delta_plus - bound.delta_minus;
    return bound;
}

// The stricter variant of the bound: additionally require that somewhere in
// [delta_minus, delta_plus] the LZ transfer reaches p_qualify.
inline bool lz_qualified(const PulseModel& model, const LZBound& bound,
                         double p_qualify = 0.999, int samples = 201) {
    if (!bound.feasible) return false;
    const double gamma_q = detail::gamma_threshold(p_qualify);
    for (int i = 0; i < samples; ++i) {
        const double d = bound.delta_minus +
                         (bound.delta_plus - bound.delta_minus) * i / (samples - 1);
        try {
            if (lz_gamma(model, d) >= gamma_q) return true;
        } catch (const NumericalError&) {
        }
    }
    return false;
}

// One point of the Fig. 2(a)-style theoretical band: the LZ robustness width
// paired with the adiabatic-trajectory estimate of max_t p_f at delta = 0.
struct BandPoint {
    std::string model;
    double t_ns = 0.0;
    double det_rob_lz = 0.0;      // GHz
    double max_pf_adiabatic = 0.0;
    bool constrained_ok = false;  // stricter p_qualify variant satisfied
};

inline BandPoint band_point(const PulseModel& model, const PhysicsConstants& constants,
                            double p_thresh = 0.99, double p_qualify = 0.999) {
    BandPoint pt;
    pt.model = model.name;
    pt.t_ns = model.duration_t;
    const LZBound bound = lz_robustness(model, p_thresh);
    pt.det_rob_lz = bound.width;
    pt.constrained_ok = lz_qualified(model, bound, p_qualify);
    const AdiabaticCurve curve = adiabatic_pf_trajectory(model, 0.0, constants);
    pt.max_pf_adiabatic = *std::max_element(curve.p_f.begin(), curve.p_f.end());
    return pt;
}

inline std::vector<BandPoint> adiabatic_band(const std::vector<PulseModel>& models,
                                             const PhysicsConstants& constants,
                                             double p_thresh = 0.99,
                                             double p_qualify = 0.999) {
    std::vector<BandPoint> band;
    band.reserve(models.size());
    for (const auto& m : models)
        band.push_back(band_point(m, constants, p_thresh, p_qualify));
    return band;
}

} // namespace qpp
