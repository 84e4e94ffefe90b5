// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qpp/pulse.hpp"
#include "qpp/rk45.hpp"

namespace qpp {

using Vector3cd = Eigen::Vector3cd;
using Matrix3d = Eigen::Matrix3d;

// All stored frequencies (Omega, Delta, E_C, ...) are cyclic frequencies in
// GHz; they enter the equations of motion as angular frequencies. This factor
// is the single place where the conversion happens.
inline constexpr double kGhzToAngular = 2.0 * std::numbers::pi; // rad/ns per GHz

// Ladder-qutrit constants: anharmonicity E_C (GHz, with hbar = 1) and the
// ratio of the e-f to g-e drive coupling. The transmon values are the
// defaults (E_C = 0.3 GHz, ratio sqrt(2)); setting coupling_ratio = 0
// decouples |f> and reduces the dynamics to a two-level problem.
struct PhysicsConstants {
    double e_c = 0.3;                           // GHz
    double coupling_ratio = std::sqrt(2.0);     // g_ef / g_ge
};

// Rotating-frame qutrit Hamiltonian with entries in GHz:
//   [ -Delta     Omega/2        0          ]
//   [ Omega/2    0              r*Omega/2  ]
//   [ 0          r*Omega/2      Delta-E_C  ]
// with r the coupling ratio (sqrt(2) -> the (2,3) entry is Omega/sqrt(2)).
// The equations of motion scale this by kGhzToAngular; eigenvectors (used by
// the adiabatic tracker) are invariant under that uniform scaling.
inline Matrix3d hamiltonian(double omega, double delta_t, const PhysicsConstants& c) {
    Matrix3d h;
    const double g2 = c.coupling_ratio * omega / 2.0;
    h << -delta_t, omega / 2.0, 0.0,
         omega / 2.0, 0.0, g2,
         0.0, g2, delta_t - c.e_c;
    return h;
}

// Time grid with the three complex amplitudes (c_g, c_e, c_f) and the derived
// populations per point. Populations sum to 1 within integrator tolerance;
// max_norm_drift records max_t | ||psi||^2 - 1 | over the grid.
struct QutritTrajectory {
    std::vector<double> times;        // ns
    std::vector<Vector3cd> states;
    std::vector<double> p_g, p_e, p_f;
    double max_norm_drift = 0.0;

    Vector3cd final_state() const { return states.back(); }
    double p_e_final() const { return p_e.back(); }
};

// rel_tol / abs_tol are delivered-accuracy targets: the stepper runs a factor
// kToleranceSafety tighter, which keeps the worst-case norm drift within an
// order of magnitude of rel_tol (the drift constant of the 5(4) pair is ~200
// per unit of controller tolerance on the steepest in-range detunings).
struct EvolveOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int grid_points = 2001; // reporting grid over [-T/2, T/2]
    std::int64_t max_steps = 50'000'000;
};

inline constexpr double kToleranceSafety = 1.0 / 32.0;

namespace detail {

// d/dt psi = -i H(t) psi, written out against the tridiagonal structure.
struct SchrodingerRhs {
    const PulseModel* model;
    const PhysicsConstants* constants;
    double delta;

    void operator()(double t, const Vector3cd& y, Vector3cd& dydt) const {
        const double T = model->duration_t;
        // adaptive steppers may poke just outside the window by rounding
        const double tc = std::clamp(t, -T / 2, T / 2);
        const double om = kGhzToAngular * envelope_value(model->envelope, tc, T);
        const double dl =
            kGhzToAngular * detuning_value(model->detuning, tc, T, delta);
        const double ec = kGhzToAngular * constants->e_c;
        const double h01 = om / 2.0;
        const double h12 = constants->coupling_ratio * om / 2.0;
        const std::complex<double> mi(0.0, -1.0);
        dydt[0] = mi * (-dl * y[0] + h01 * y[1]);
        dydt[1] = mi * (h01 * y[0] + h12 * y[2]);
        dydt[2] = mi * (h12 * y[1] + (dl - ec) * y[2]);
    }
};

inline std::vector<double> uniform_grid(double T, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = -T / 2 + T * static_cast<double>(i) / static_cast<double>(n - 1);
    g.front() = -T / 2;
    g.back() = T / 2;
    return g;
}

// Integrate in two segments split at t = 0 so the |2t/T|^n derivative cusp
// (n < 1, and the kink for any non-even n) lands on a step boundary.
template <class Report>
inline Vector3cd integrate_pulse(const PulseModel& model, double delta,
                                 const PhysicsConstants& constants,
                                 const EvolveOptions& opt,
                                 std::span<const double> report_times, Report&& report,
                                 Vector3cd psi = Vector3cd(1.0, 0.0, 0.0)) {
    SchrodingerRhs rhs{&model, &constants, delta};
    const double T = model.duration_t;
    typename Dopri5<Vector3cd>::Options iopt;
    iopt.rel_tol = opt.rel_tol * kToleranceSafety;
    iopt.abs_tol = opt.abs_tol * kToleranceSafety;
    iopt.max_steps = opt.max_steps;

    auto mid = std::lower_bound(report_times.begin(), report_times.end(), 0.0);
    // a report time exactly at 0 belongs to the first segment's endpoint
    if (mid != report_times.end() && *mid == 0.0) ++mid;
    const std::size_t n_left = static_cast<std::size_t>(mid - report_times.begin());
    Dopri5<Vector3cd>::integrate(rhs, -T / 2, 0.0, psi,
                                 report_times.subspan(0, n_left), report, iopt);
    Dopri5<Vector3cd>::integrate(rhs, 0.0, T / 2, psi, report_times.subspan(n_left),
                                 report, iopt);
    return psi;
}

} // namespace detail

// Integrate i d/dt psi = H(t) psi from |g> at t = -T/2 over the full pulse,
// reporting on a uniform grid of opt.grid_points times.
inline QutritTrajectory evolve(const PulseModel& model, double delta,
                               const PhysicsConstants& constants,
                               const EvolveOptions& opt = {}) {
    QutritTrajectory traj;
    const int n = opt.grid_points;
    traj.times = detail::uniform_grid(model.duration_t, n);
    traj.states.reserve(n);
    traj.p_g.reserve(n);
    traj.p_e.reserve(n);
    traj.p_f.reserve(n);

    detail::integrate_pulse(model, delta, constants, opt, traj.times,
                            [&](double /*t*/, const Vector3cd& y) {
                                traj.states.push_back(y);
                                const double pg = std::norm(y[0]);
                                const double pe = std::norm(y[1]);
                                const double pf = std::norm(y[2]);
                                traj.p_g.push_back(pg);
                                traj.p_e.push_back(pe);
                                traj.p_f.push_back(pf);
                                traj.max_norm_drift =
                                    std::max(traj.max_norm_drift,
                                             std::abs(pg + pe + pf - 1.0));
                            });
    return traj;
}

// Final state only; used by the scan machinery where the transient is not needed.
inline Vector3cd evolve_final(const PulseModel& model, double delta,
                              const PhysicsConstants& constants,
                              const EvolveOptions& opt = {}) {
    return detail::integrate_pulse(model, delta, constants, opt, {},
                                   [](double, const Vector3cd&) {});
}

// Instantaneous-eigenstate |f> weight along the branch continuously connected
// to |g> at t = -T/2. Continuation projects the previous branch vector onto
// the (possibly degenerate) eigenspaces of the next grid point and follows the
// largest projection; the projection also fixes the eigenvector phase. A
// projection norm below 1/sqrt(2) for every candidate aborts with a tracking
// error.
struct AdiabaticCurve {
    std::vector<double> times;
    std::vector<double> p_f;
};

inline AdiabaticCurve adiabatic_pf_trajectory(const PulseModel& model, double delta,
                                              const PhysicsConstants& constants,
                                              int grid_points = 2001) {
    AdiabaticCurve curve;
    curve.times = detail::uniform_grid(model.duration_t, grid_points);
    curve.p_f.reserve(grid_points);

    const double T = model.duration_t;
    Eigen::Vector3d branch(1.0, 0.0, 0.0); // |g> seed at t = -T/2
    Eigen::SelfAdjointEigenSolver<Matrix3d> solver;

    for (double t : curve.times) {
        const double om = envelope_value(model.envelope, t, T);
        const double dl = detuning_value(model.detuning, t, T, delta);
        solver.compute(hamiltonian(om, dl, constants));
        const auto& vals = solver.eigenvalues();
        const auto& vecs = solver.eigenvectors();

        const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
        const double degeneracy_tol = 1e-12 * scale;

        // group eigenvalues, project the running branch vector onto each group
        double best_norm2 = -1.0;
        Eigen::Vector3d best = Eigen::Vector3d::Zero();
        for (int i = 0; i < 3;) {
            int j = i + 1;
            while (j < 3 && vals[j] - vals[j - 1] <= degeneracy_tol) ++j;
            Eigen::Vector3d proj = Eigen::Vector3d::Zero();
            for (int k = i; k < j; ++k)
                proj += vecs.col(k).dot(branch) * vecs.col(k);
            const double n2 = proj.squaredNorm();
            if (n2 > best_norm2) {
                best_norm2 = n2;
                best = proj;
            }
            i = j;
        }
        if (best_norm2 < 0.5)
            throw TrackingError("eigenbranch continuation ambiguous", t);
        branch = best / std::sqrt(best_norm2);
        curve.p_f.push_back(branch[2] * branch[2]);
    }
    return curve;
}

} // namespace qpp
