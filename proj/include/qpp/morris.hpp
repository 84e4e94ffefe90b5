// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qpp/parallel.hpp"
#include "qpp/pareto.hpp"

namespace qpp {

enum class MorrisOutput { MaxPf, DetRob, AmpRob };

inline const char* to_string(MorrisOutput o) {
    switch (o) {
    case MorrisOutput::MaxPf: return "max_pf";
    case MorrisOutput::DetRob: return "det_rob";
    case MorrisOutput::AmpRob: return "amp_rob";
    }
    return "?";
}

inline MorrisOutput morris_output_from_string(const std::string& s) {
    if (s == "max_pf") return MorrisOutput::MaxPf;
    if (s == "det_rob") return MorrisOutput::DetRob;
    if (s == "amp_rob") return MorrisOutput::AmpRob;
    throw ConfigError("unknown morris output '" + s +
                      "' (expected max_pf, det_rob or amp_rob)");
}

// Relative elementary effect of gene `param_index` at base point x:
//   E = [(f(x') - f(x)) / (-rel_step * x_i)] / f(x)
// where x' moves the gene by rel_step * |x_i| away from its value (a
// percentage-of-magnitude step). The denominator carries the sign of x_i, so
// E measures correlation with the parameter *magnitude*: ratio +1 means
// "pushing the parameter further from zero raises f". This is the sign
// convention under which the shape parameters (beta < 0 and epsilon > 0) and
// the two-signed prefactors report one consistent column.
inline double relative_elementary_effect(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, std::size_t param_index, double rel_step = 5e-5) {
    const double base = f(x);
    if (base == 0.0)
        throw UndefinedEffectError("unperturbed output is zero; relative effect undefined");
    const double xi = x[param_index];
    if (xi == 0.0)
        throw ZeroBaseError("parameter value is zero; relative perturbation undefined");
    std::vector<double> xp = x;
    xp[param_index] = xi - rel_step * std::abs(xi);
    return ((f(xp) - base) / (-rel_step * xi)) / base;
}

struct MorrisSummary {
    double mu_star = 0.0;
    double sigma = 0.0;
    double mu = 0.0;
    double ratio = 0.0; // mu / mu_star, in [-1, 1]; 0 when mu_star = 0
};

// Mean absolute effect, signed mean, and the N-1 sample standard deviation.
inline MorrisSummary morris_summary(std::span<const double> effects) {
    const std::size_t n = effects.size();
    if (n < 2)
        throw InsufficientSamplesError("morris_summary needs >= 2 valid effects, got " +
                                       std::to_string(n));
    MorrisSummary s;
    for (double e : effects) {
        s.mu += e;
        s.mu_star += std::abs(e);
    }
    s.mu /= static_cast<double>(n);
    s.mu_star /= static_cast<double>(n);
    double ss = 0.0;
    for (double e : effects) ss += (e - s.mu) * (e - s.mu);
    s.sigma = std::sqrt(ss / static_cast<double>(n - 1));
    s.ratio = s.mu_star == 0.0 ? 0.0 : s.mu / s.mu_star;
    return s;
}

// Per-(parameter, output) aggregate over the Pareto-optimal base points.
struct SensitivityRecord {
    std::string model;
    double t_ns = 0.0;
    MorrisOutput output = MorrisOutput::MaxPf;
    std::string param;
    double mu_star = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    int n_valid = 0;
    int n_excluded = 0;
    bool flagged = false; // > 20% exclusions, or too few valid samples
};

struct MorrisConfig {
    int n_samples = 175;   // base points per parameter
    double rel_step = 5e-5; // 5e-3 percent decrease
};

// Modified Morris screening over the archive's rank-1 entries: one-at-a-time
// relative effects at N Pareto-optimal base points, aggregated per parameter
// for each requested output. Base outputs are computed once and shared across
// parameters through the evaluator cache. Samples whose base output is zero,
// whose gene is zero, or whose evaluation fails are excluded and counted.
// Evaluator needs max_pf/det_rob/amp_rob(genes) and must be thread-safe
// (ObjectiveEvaluator, or a closed-form stand-in in tests).
template <class Evaluator>
std::vector<SensitivityRecord> morris_study(const ParetoArchive& archive,
                                            Evaluator& eval,
                                            std::span<const MorrisOutput> outputs,
                                            const MorrisConfig& cfg = {},
                                            int threads = 1) {
    const int n = cfg.n_samples;
    if (static_cast<int>(archive.entries.size()) < n)
        throw InsufficientSamplesError(
            "archive has " + std::to_string(archive.entries.size()) +
            " rank-1 entries; morris_study needs " + std::to_string(n) +
            " (densify the front first)");

    // evenly spaced base points along the det_rob-sorted front
    std::vector<const std::vector<double>*> base(n);
    const std::size_t m = archive.entries.size();
    for (int b = 0; b < n; ++b) {
        const std::size_t idx =
            n == 1 ? 0 : (b * (m - 1)) / static_cast<std::size_t>(n - 1);
        base[b] = &archive.entries[idx].genes;
    }

    const auto bounds = gene_bounds(archive.family);
    const std::size_t genes = bounds.size();
    std::vector<SensitivityRecord> records;

    for (MorrisOutput output : outputs) {
        auto f = [&eval, output](const std::vector<double>& g) {
            switch (output) {
            case MorrisOutput::MaxPf: return eval.max_pf(g);
            case MorrisOutput::DetRob: return eval.det_rob(g);
            case MorrisOutput::AmpRob: return eval.amp_rob(g);
            }
            return 0.0;
        };

        // warm the cache with the base outputs
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t b) {
            try {
                f(*base[b]);
            } catch (const NumericalError&) {
            }
        });

        // effects matrix, NaN = excluded
        std::vector<std::vector<double>> effects(
            genes, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
        parallel_for(static_cast<std::size_t>(n) * genes, threads, [&](std::size_t t) {
            const std::size_t p = t / n;
            const std::size_t b = t % n;
            try {
                effects[p][b] = relative_elementary_effect(f, *base[b], p, cfg.rel_step);
            } catch (const NumericalError&) {
            }
        });

        for (std::size_t p = 0; p < genes; ++p) {
            SensitivityRecord rec;
            rec.model = archive.family;
            rec.t_ns = archive.t_ns;
            rec.output = output;
            rec.param = bounds[p].name;
            std::vector<double> valid;
            valid.reserve(n);
            for (double e : effects[p])
                if (!std::isnan(e)) valid.push_back(e);
            rec.n_valid = static_cast<int>(valid.size());
            rec.n_excluded = n - rec.n_valid;
            rec.flagged = rec.n_excluded > n / 5;
            if (valid.size() >= 2) {
                const MorrisSummary s = morris_summary(valid);
                rec.mu_star = s.mu_star;
                rec.sigma = s.sigma;
                rec.mu = s.mu;
                rec.ratio = s.ratio;
            } else {
                rec.flagged = true;
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

} // namespace qpp
