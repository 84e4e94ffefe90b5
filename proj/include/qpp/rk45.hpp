// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>

#include "qpp/errors.hpp"

namespace qpp {

// Dormand-Prince 5(4) embedded Runge-Kutta pair with the standard quartic
// continuous extension (coefficients as in Hairer, Norsett & Wanner, DOPRI5).
// The state type Vec must behave like an Eigen fixed-size vector over a real
// or complex scalar.
//
// integrate() advances y from t0 to t1 (t0 < t1), calling dense(t) for every
// requested report time in order. Report times must be sorted ascending and
// lie in [t0, t1]; the endpoint value is the RK solution, not interpolated.
template <class Vec>
class Dopri5 {
public:
    struct Options {
        double rel_tol = 1e-9;
        double abs_tol = 1e-12;
        double initial_step = 0.0; // 0 -> (t1 - t0) / 100
        std::int64_t max_steps = 50'000'000;
    };

    // deriv(t, y, dydt); report(t, y) is invoked for each report time.
    template <class Deriv, class Report>
    static void integrate(Deriv&& deriv, double t0, double t1, Vec& y,
                          std::span<const double> report_times, Report&& report,
                          const Options& opt = {}) {
        const double span = t1 - t0;
        std::size_t next_report = 0;
        // report times that coincide with t0
        while (next_report < report_times.size() && report_times[next_report] <= t0) {
            report(report_times[next_report], y);
            ++next_report;
        }
        if (span <= 0.0) return;

        double t = t0;
        double h = opt.initial_step > 0 ? opt.initial_step : span / 100.0;
        h = std::min(h, span);
        const double h_min = span * 1e-15;

        Vec k1, k2, k3, k4, k5, k6, k7, y_new, y_err;
        deriv(t, y, k1);

        for (std::int64_t step = 0; step < opt.max_steps; ++step) {
            if (t >= t1) break;
            h = std::min(h, t1 - t);
            if (h < h_min)
                throw IntegrationError("step size underflow in Dopri5", t);

            Vec yt;
            yt = y + h * (a21 * k1);
            deriv(t + c2 * h, yt, k2);
            yt = y + h * (a31 * k1 + a32 * k2);
            deriv(t + c3 * h, yt, k3);
            yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            deriv(t + c4 * h, yt, k4);
            yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            deriv(t + c5 * h, yt, k5);
            yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            deriv(t + h, yt, k6);
            y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            deriv(t + h, y_new, k7); // FSAL
            y_err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            // scaled RMS error norm
            double err = 0.0;
            for (int i = 0; i < y.size(); ++i) {
                const double sc =
                    opt.abs_tol +
                    opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                const double e = std::abs(y_err[i]) / sc;
                err += e * e;
            }
            err = std::sqrt(err / static_cast<double>(y.size()));

            if (err <= 1.0) {
                // accepted: serve report times inside (t, t+h] from the dense
                // interpolant, the exact endpoint from the step solution
                if (next_report < report_times.size() &&
                    report_times[next_report] <= t + h) {
                    const Vec dy = y_new - y;
                    const Vec bspl = h * k1 - dy;
                    const Vec r4 = dy - h * k7 - bspl;
                    const Vec r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 +
                                        d6 * k6 + d7 * k7);
                    while (next_report < report_times.size() &&
                           report_times[next_report] <= t + h) {
                        const double tr = report_times[next_report];
                        if (tr >= t + h) {
                            report(tr, y_new);
                        } else {
                            const double s = (tr - t) / h;
                            const double s1 = 1.0 - s;
                            const Vec yi =
                                y + s * (dy + s1 * (bspl + s * (r4 + s1 * r5)));
                            report(tr, yi);
                        }
                        ++next_report;
                    }
                }
                t += h;
                y = y_new;
                k1 = k7;
                const double factor =
                    err == 0.0 ? 5.0
                               : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h *= factor;
            } else {
                h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            }
        }
        if (t < t1) throw IntegrationError("step budget exhausted in Dopri5", t);
        // report times pinned to the exact right endpoint
        while (next_report < report_times.size()) {
            report(report_times[next_report], y);
            ++next_report;
        }
    }

private:
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                            c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                            a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                            a76 = 11.0 / 84.0;
    // 5th-order minus 4th-order weights
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                            e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    // dense-output coefficients
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

} // namespace qpp
