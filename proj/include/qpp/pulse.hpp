// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpp/errors.hpp"

namespace qpp {

enum class EnvelopeKind { SuperGaussian, Sech };
enum class DetuningKind { Linear, Quintic, Tanh, TanhSech };

inline double sech(double x) { return 1.0 / std::cosh(x); }

// Envelope Omega(t): amplitude omega0 (GHz), order n, and one shape parameter:
// beta < 0 for the super-Gaussian family, epsilon > 0 for the hyperbolic
// secant family. Both variants are normalized so that Omega(0) = omega0 and
// Omega(+-T/2) = 0 exactly.
struct EnvelopeParams {
    EnvelopeKind kind = EnvelopeKind::SuperGaussian;
    double omega0 = 0.0; // GHz
    double order = 2.0;  // n, dimensionless
    double shape = -2.0; // beta (SuperGaussian) or epsilon (Sech)
};

// Detuning Delta(t) - delta: prefactors k1..k5 (GHz) and steepness parameters
// gamma1, gamma2 (dimensionless). Which entries are live depends on the kind:
//   Linear    k1
//   Quintic   k1..k5
//   Tanh      k1, gamma1
//   TanhSech  k1, k2, gamma1, gamma2
// Unused entries are kept at zero. Every kind satisfies Delta(0) - delta = 0.
struct DetuningParams {
    DetuningKind kind = DetuningKind::Linear;
    std::array<double, 5> k{};     // GHz
    std::array<double, 2> gamma{}; // dimensionless
};

// One of the eight named pulse models: envelope variant + detuning variant +
// duration + static frequency offset delta (nominally 0; swept by the metrics
// layer).
struct PulseModel {
    std::string name; // SG1..SG4, SECH1..SECH4
    EnvelopeParams envelope;
    DetuningParams detuning;
    double duration_t = 50.0;  // ns
    double delta_offset = 0.0; // GHz
};

namespace detail {
inline void check_window(double t, double T, const char* who) {
    if (!(std::abs(t) <= T / 2)) {
        throw NumericalError(std::string(who) + ": t = " + std::to_string(t) +
                             " ns outside the pulse window [-T/2, T/2], T = " +
                             std::to_string(T) + " ns");
    }
}
} // namespace detail

// Omega(t) in GHz. t must lie in [-T/2, T/2]. The normalized shape factor is
// computed first so that Omega(0) = omega0 and Omega(+-T/2) = 0 hold exactly.
inline double envelope_value(const EnvelopeParams& env, double t, double T) {
    detail::check_window(t, T, "envelope_value");
    const double u = std::pow(std::abs(2.0 * t / T), env.order);
    double factor;
    if (env.kind == EnvelopeKind::SuperGaussian) {
        const double eb = std::exp(env.shape);
        factor = (std::exp(env.shape * u) - eb) / (1.0 - eb);
    } else {
        const double se = sech(env.shape);
        factor = (sech(env.shape * u) - se) / (1.0 - se);
    }
    return env.omega0 * factor;
}

// Delta(t) in GHz including the static offset delta.
inline double detuning_value(const DetuningParams& det, double t, double T, double delta) {
    detail::check_window(t, T, "detuning_value");
    const double x = 2.0 * t / T;
    switch (det.kind) {
    case DetuningKind::Linear:
        return det.k[0] * x + delta;
    case DetuningKind::Quintic: {
        // Horner over k1..k5
        double acc = 0.0;
        for (int j = 4; j >= 0; --j) acc = acc * x + det.k[j];
        return acc * x + delta;
    }
    case DetuningKind::Tanh:
        return det.k[0] * std::tanh(det.gamma[0] * x) + delta;
    case DetuningKind::TanhSech:
        return det.k[0] * std::tanh(det.gamma[0] * x) +
               det.k[1] * (sech(det.gamma[1] * x) - 1.0) + delta;
    }
    return delta; // unreachable
}

// d Delta / dt in GHz/ns (independent of the offset delta), analytic per kind.
inline double detuning_slope(const DetuningParams& det, double t, double T) {
    detail::check_window(t, T, "detuning_slope");
    const double x = 2.0 * t / T;
    const double dx = 2.0 / T;
    switch (det.kind) {
    case DetuningKind::Linear:
        return det.k[0] * dx;
    case DetuningKind::Quintic: {
        double acc = 0.0;
        for (int j = 4; j >= 1; --j) acc = acc * x + (j + 1) * det.k[j];
        return (acc * x + det.k[0]) * dx;
    }
    case DetuningKind::Tanh: {
        const double s = sech(det.gamma[0] * x);
        return det.k[0] * det.gamma[0] * s * s * dx;
    }
    case DetuningKind::TanhSech: {
        const double s1 = sech(det.gamma[0] * x);
        const double u2 = det.gamma[1] * x;
        return (det.k[0] * det.gamma[0] * s1 * s1 -
                det.k[1] * det.gamma[1] * sech(u2) * std::tanh(u2)) *
               dx;
    }
    }
    return 0.0; // unreachable
}

// --- Model family metadata -------------------------------------------------

// Closed/open interval bound for one gene. GA sampling stays inside
// [ga_lo(), hi]; validation enforces open endpoints strictly.
struct GeneBound {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double v) const {
        if (lo_open ? !(v > lo) : !(v >= lo)) return false;
        if (hi_open ? !(v < hi) : !(v <= hi)) return false;
        return true;
    }
    // Effective lower/upper edges for box-constrained search: open endpoints
    // are pulled inward by a fixed small fraction of the interval.
    double ga_lo() const { return lo_open ? lo + 1e-6 * (hi - lo) : lo; }
    double ga_hi() const { return hi_open ? hi - 1e-6 * (hi - lo) : hi; }
    std::string interval() const {
        auto fmt = [](double v) {
            std::string s = std::to_string(v);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        };
        return std::string(lo_open ? "(" : "[") + fmt(lo) + ", " + fmt(hi) +
               (hi_open ? ")" : "]");
    }
};

struct ModelFamily {
    std::string name;
    EnvelopeKind envelope;
    DetuningKind detuning;
    std::size_t num_genes; // length of the flat parameter vector
};

inline const std::array<ModelFamily, 8>& model_families() {
    static const std::array<ModelFamily, 8> families = {{
        {"SG1", EnvelopeKind::SuperGaussian, DetuningKind::Linear, 4},
        {"SG2", EnvelopeKind::SuperGaussian, DetuningKind::Quintic, 8},
        {"SG3", EnvelopeKind::SuperGaussian, DetuningKind::Tanh, 5},
        {"SG4", EnvelopeKind::SuperGaussian, DetuningKind::TanhSech, 7},
        {"SECH1", EnvelopeKind::Sech, DetuningKind::Linear, 4},
        {"SECH2", EnvelopeKind::Sech, DetuningKind::Quintic, 8},
        {"SECH3", EnvelopeKind::Sech, DetuningKind::Tanh, 5},
        {"SECH4", EnvelopeKind::Sech, DetuningKind::TanhSech, 7},
    }};
    return families;
}

inline const ModelFamily& model_family(std::string_view name) {
    for (const auto& f : model_families())
        if (f.name == name) return f;
    throw ConfigError("unknown model name '" + std::string(name) +
                      "' (expected SG1..SG4 or SECH1..SECH4)");
}

// Search-range bounds, gene order [omega0, n, beta|epsilon, k1, ...].
inline std::vector<GeneBound> gene_bounds(const ModelFamily& fam) {
    std::vector<GeneBound> b;
    b.push_back({"omega0", 0.0, 0.1, false, false});
    b.push_back({"n", 0.0, 10.0, true, false});
    if (fam.envelope == EnvelopeKind::SuperGaussian)
        b.push_back({"beta", -6.0, 0.0, false, true});
    else
        b.push_back({"epsilon", 0.0, 6.0, true, false});
    b.push_back({"k1", -0.3, 0.3, false, false});
    switch (fam.detuning) {
    case DetuningKind::Linear:
        break;
    case DetuningKind::Quintic:
        for (int j = 2; j <= 5; ++j)
            b.push_back({"k" + std::to_string(j), -0.1, 0.1, false, false});
        break;
    case DetuningKind::Tanh:
        b.push_back({"gamma1", 0.0, 8.0, true, false});
        break;
    case DetuningKind::TanhSech:
        b.push_back({"k2", -0.1, 0.1, false, false});
        b.push_back({"gamma1", 0.0, 8.0, true, false});
        b.push_back({"gamma2", 0.0, 8.0, true, false});
        break;
    }
    return b;
}

inline std::vector<GeneBound> gene_bounds(std::string_view name) {
    return gene_bounds(model_family(name));
}

// Flat vector -> typed model. Gene order is fixed and matches gene_bounds().
inline PulseModel model_from_vector(std::string_view name, std::span<const double> v,
                                    double T) {
    const ModelFamily& fam = model_family(name);
    if (v.size() != fam.num_genes) throw ArityError(fam.name, fam.num_genes, v.size());

    PulseModel m;
    m.name = fam.name;
    m.duration_t = T;
    m.envelope.kind = fam.envelope;
    m.envelope.omega0 = v[0];
    m.envelope.order = v[1];
    m.envelope.shape = v[2];
    m.detuning.kind = fam.detuning;
    m.detuning.k[0] = v[3];
    switch (fam.detuning) {
    case DetuningKind::Linear:
        break;
    case DetuningKind::Quintic:
        for (int j = 1; j < 5; ++j) m.detuning.k[j] = v[3 + j];
        break;
    case DetuningKind::Tanh:
        m.detuning.gamma[0] = v[4];
        break;
    case DetuningKind::TanhSech:
        m.detuning.k[1] = v[4];
        m.detuning.gamma[0] = v[5];
        m.detuning.gamma[1] = v[6];
        break;
    }
    return m;
}

inline std::vector<double> vector_from_model(const PulseModel& m) {
    const ModelFamily& fam = model_family(m.name);
    std::vector<double> v = {m.envelope.omega0, m.envelope.order, m.envelope.shape,
                             m.detuning.k[0]};
    switch (fam.detuning) {
    case DetuningKind::Linear:
        break;
    case DetuningKind::Quintic:
        for (int j = 1; j < 5; ++j) v.push_back(m.detuning.k[j]);
        break;
    case DetuningKind::Tanh:
        v.push_back(m.detuning.gamma[0]);
        break;
    case DetuningKind::TanhSech:
        v.push_back(m.detuning.k[1]);
        v.push_back(m.detuning.gamma[0]);
        v.push_back(m.detuning.gamma[1]);
        break;
    }
    return v;
}

// Search-range validation. Violations are data, not exceptions: each
// out-of-range field is reported with its legal interval. Also checks that
// the name's envelope/detuning kinds agree with the stored ones and that the
// duration is positive.
inline std::vector<std::string> validate(const PulseModel& m) {
    std::vector<std::string> issues;
    const ModelFamily* fam = nullptr;
    try {
        fam = &model_family(m.name);
    } catch (const ConfigError& e) {
        issues.emplace_back(e.what());
        return issues;
    }
    if (m.envelope.kind != fam->envelope)
        issues.push_back(m.name + ": envelope kind does not match the model table");
    if (m.detuning.kind != fam->detuning)
        issues.push_back(m.name + ": detuning kind does not match the model table");
    if (!(m.duration_t > 0)) issues.push_back("T_ns must be positive");
    if (!issues.empty()) return issues;

    const auto bounds = gene_bounds(*fam);
    const auto genes = vector_from_model(m);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!bounds[i].contains(genes[i])) {
            const bool ghz = bounds[i].name[0] == 'k' || bounds[i].name == "omega0";
            issues.push_back(bounds[i].name + " ∉ " + bounds[i].interval() +
                             (ghz ? " GHz" : ""));
        }
    }
    return issues;
}

} // namespace qpp
