// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "qpp/errors.hpp"
#include "qpp/metrics.hpp"
#include "qpp/pulse.hpp"

namespace qpp {

// Pareto dominance on (max_pf minimized, det_rob maximized). A feasible point
// dominates any infeasible one; among equals in feasibility the usual
// objective-wise rule applies.
inline bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    if (a.feasible != b.feasible) return a.feasible;
    const bool no_worse = a.max_pf <= b.max_pf && a.det_rob >= b.det_rob;
    const bool strictly = a.max_pf < b.max_pf || a.det_rob > b.det_rob;
    return no_worse && strictly;
}

// Deb's fast non-dominated sort: returns fronts F1, F2, ... as index lists.
// Every input index appears in exactly one front.
inline std::vector<std::vector<int>> non_dominated_sort(std::span<const ObjectivePoint> pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> count(n, 0);
    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dominates(pts[i], pts[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (dominates(pts[j], pts[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int i : current)
            for (int j : dominated[i])
                if (--count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

// Crowding distance within one front: per objective, boundary points get
// infinity and interior points accumulate the normalized neighbor gap; an
// objective with zero range contributes nothing.
inline std::vector<double> crowding_distance(std::span<const ObjectivePoint> front) {
    const int n = static_cast<int>(front.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<int> idx(n);
    for (int obj = 0; obj < 2; ++obj) {
        auto key = [&](int i) { return obj == 0 ? front[i].max_pf : front[i].det_rob; };
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return key(a) < key(b); });
        dist[idx.front()] = inf;
        dist[idx.back()] = inf;
        const double range = key(idx.back()) - key(idx.front());
        if (range <= 0.0) continue;
        for (int i = 1; i + 1 < n; ++i)
            if (dist[idx[i]] != inf)
                dist[idx[i]] += (key(idx[i + 1]) - key(idx[i - 1])) / range;
    }
    return dist;
}

// 2-D hypervolume of the feasible non-dominated set in (max_pf, det_rob)
// space with reference point (ref_max_pf, ref_det_rob); used for the
// stagnation stop and the per-generation log.
inline double hypervolume_2d(std::span<const ObjectivePoint> pts, double ref_max_pf = 1.0,
                             double ref_det_rob = 0.0) {
    std::vector<std::pair<double, double>> v; // (max_pf asc, det_rob)
    for (const auto& p : pts)
        if (p.feasible && p.max_pf <= ref_max_pf && p.det_rob >= ref_det_rob)
            v.emplace_back(p.max_pf, p.det_rob);
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    // sweep ascending max_pf; each point adds the rectangle between its
    // det_rob and the best det_rob already covered
    double hv = 0.0;
    double best = ref_det_rob;
    for (const auto& [pf, rob] : v) {
        if (rob > best) {
            hv += (ref_max_pf - pf) * (rob - best);
            best = rob;
        }
    }
    return hv;
}

struct GAConfig {
    int population = 96;       // even, >= 8
    int generations = 60;
    double p_crossover = 0.9;  // SBX probability per pair
    double eta_c = 15.0;       // SBX distribution index
    double p_mutation = -1.0;  // per-gene; < 0 -> 1/num_genes
    double eta_m = 20.0;       // polynomial mutation index
    int stagnation_window = 15; // 0 disables the hypervolume stop
    double stagnation_rel_tol = 1e-9;
};

inline void validate_ga(const GAConfig& cfg) {
    if (cfg.population < 8 || cfg.population % 2 != 0)
        throw ConfigError("population must be even and >= 8, got " +
                          std::to_string(cfg.population));
    if (cfg.generations < 1) throw ConfigError("generations must be >= 1");
    if (cfg.p_crossover < 0.0 || cfg.p_crossover > 1.0)
        throw ConfigError("p_crossover must be in [0, 1]");
    if (cfg.p_mutation > 1.0) throw ConfigError("p_mutation must be <= 1");
    if (cfg.eta_c < 1.0 || cfg.eta_m < 1.0)
        throw ConfigError("distribution indices must be >= 1");
}

struct GAProgress {
    int generation = 0;
    std::size_t evaluations = 0;
    double hypervolume = 0.0;
    double best_max_pf = std::numeric_limits<double>::quiet_NaN();
    double best_det_rob = std::numeric_limits<double>::quiet_NaN();
};

struct NsgaResult {
    std::vector<std::vector<double>> genomes;   // final population
    std::vector<ObjectivePoint> objectives;
    std::vector<int> rank;                      // 1-based front index
    std::vector<double> crowding;
    std::vector<GAProgress> log;
    int generations_run = 0;
};

namespace detail {

inline double clamp_gene(double v, const GeneBound& b) {
    return std::clamp(v, b.ga_lo(), b.ga_hi());
}

// Bounded simulated binary crossover (Deb & Agrawal).
inline void sbx_crossover(std::vector<double>& c1, std::vector<double>& c2,
                          const std::vector<GeneBound>& bounds, double eta,
                          std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < c1.size(); ++j) {
        if (u(rng) > 0.5) continue;
        double y1 = c1[j], y2 = c2[j];
        if (std::abs(y1 - y2) < 1e-14) continue;
        const bool swapped = y1 > y2;
        if (swapped) std::swap(y1, y2);
        const double yl = bounds[j].ga_lo(), yu = bounds[j].ga_hi();
        const double r = u(rng);
        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return r <= 1.0 / alpha ? std::pow(r * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta + 1.0));
        };
        const double bq1 = spread(1.0 + 2.0 * (y1 - yl) / (y2 - y1));
        const double bq2 = spread(1.0 + 2.0 * (yu - y2) / (y2 - y1));
        double a = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
        double b = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
        a = std::clamp(a, yl, yu);
        b = std::clamp(b, yl, yu);
        if (u(rng) <= 0.5) std::swap(a, b);
        c1[j] = swapped ? b : a;
        c2[j] = swapped ? a : b;
    }
}

// Bounded polynomial mutation (Deb).
inline void polynomial_mutation(std::vector<double>& genes,
                                const std::vector<GeneBound>& bounds, double p_mut,
                                double eta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < genes.size(); ++j) {
        if (u(rng) > p_mut) continue;
        const double yl = bounds[j].ga_lo(), yu = bounds[j].ga_hi();
        const double span = yu - yl;
        if (span <= 0.0) continue;
        const double y = genes[j];
        const double d1 = (y - yl) / span, d2 = (yu - y) / span;
        const double r = u(rng);
        const double mp = 1.0 / (eta + 1.0);
        double dq;
        if (r <= 0.5) {
            const double xy = 1.0 - d1;
            dq = std::pow(2.0 * r + (1.0 - 2.0 * r) * std::pow(xy, eta + 1.0), mp) - 1.0;
        } else {
            const double xy = 1.0 - d2;
            dq = 1.0 - std::pow(2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(xy, eta + 1.0), mp);
        }
        genes[j] = std::clamp(y + dq * span, yl, yu);
    }
}

} // namespace detail

// Elitist NSGA-II over real genomes in box bounds. BatchEval maps a list of
// genomes to ObjectivePoints (order-preserving); all randomness is drawn
// sequentially from one seeded generator, so results depend only on the seed
// regardless of how the evaluator parallelizes internally. Optional
// seed_genomes are injected (clamped) into the initial population.
template <class BatchEval>
NsgaResult nsga2_optimize(const std::vector<GeneBound>& bounds, const GAConfig& cfg,
                          BatchEval&& evaluate, std::uint64_t seed,
                          const std::vector<std::vector<double>>& seed_genomes = {}) {
    validate_ga(cfg);
    const int n = cfg.population;
    const std::size_t genes = bounds.size();
    const double p_mut = cfg.p_mutation < 0.0
                             ? 1.0 / static_cast<double>(genes)
                             : cfg.p_mutation;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, n - 1);

    NsgaResult res;
    res.genomes.resize(n, std::vector<double>(genes));
    for (int i = 0; i < n; ++i) {
        if (i < static_cast<int>(seed_genomes.size()) &&
            seed_genomes[i].size() == genes) {
            for (std::size_t j = 0; j < genes; ++j)
                res.genomes[i][j] = detail::clamp_gene(seed_genomes[i][j], bounds[j]);
        } else {
            for (std::size_t j = 0; j < genes; ++j)
                res.genomes[i][j] =
                    bounds[j].ga_lo() + u(rng) * (bounds[j].ga_hi() - bounds[j].ga_lo());
        }
    }
    res.objectives = evaluate(res.genomes);
    std::size_t evaluations = n;

    auto assign_rank_crowding = [&]() {
        const auto fronts = non_dominated_sort(res.objectives);
        res.rank.assign(n, 0);
        res.crowding.assign(n, 0.0);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            std::vector<ObjectivePoint> pts;
            pts.reserve(fronts[f].size());
            for (int i : fronts[f]) pts.push_back(res.objectives[i]);
            const auto cd = crowding_distance(pts);
            for (std::size_t t = 0; t < fronts[f].size(); ++t) {
                res.rank[fronts[f][t]] = static_cast<int>(f) + 1;
                res.crowding[fronts[f][t]] = cd[t];
            }
        }
    };
    assign_rank_crowding();

    auto log_generation = [&](int gen) {
        GAProgress p;
        p.generation = gen;
        p.evaluations = evaluations;
        p.hypervolume = hypervolume_2d(res.objectives);
        for (const auto& o : res.objectives) {
            if (!o.feasible) continue;
            if (std::isnan(p.best_max_pf) || o.max_pf < p.best_max_pf)
                p.best_max_pf = o.max_pf;
            if (std::isnan(p.best_det_rob) || o.det_rob > p.best_det_rob)
                p.best_det_rob = o.det_rob;
        }
        res.log.push_back(p);
    };
    log_generation(0);

    auto tournament = [&]() {
        const int a = pick(rng), b = pick(rng);
        if (res.rank[a] != res.rank[b]) return res.rank[a] < res.rank[b] ? a : b;
        if (res.crowding[a] != res.crowding[b])
            return res.crowding[a] > res.crowding[b] ? a : b;
        return u(rng) < 0.5 ? a : b;
    };

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        // variation: N offspring from binary tournaments + SBX + mutation
        std::vector<std::vector<double>> offspring;
        offspring.reserve(n);
        for (int i = 0; i < n / 2; ++i) {
            std::vector<double> c1 = res.genomes[tournament()];
            std::vector<double> c2 = res.genomes[tournament()];
            if (u(rng) <= cfg.p_crossover)
                detail::sbx_crossover(c1, c2, bounds, cfg.eta_c, rng);
            detail::polynomial_mutation(c1, bounds, p_mut, cfg.eta_m, rng);
            detail::polynomial_mutation(c2, bounds, p_mut, cfg.eta_m, rng);
            offspring.push_back(std::move(c1));
            offspring.push_back(std::move(c2));
        }
        const auto off_objs = evaluate(offspring);
        evaluations += offspring.size();

        // merge and truncate
        std::vector<std::vector<double>> all_genomes = res.genomes;
        all_genomes.insert(all_genomes.end(), offspring.begin(), offspring.end());
        std::vector<ObjectivePoint> all_objs = res.objectives;
        all_objs.insert(all_objs.end(), off_objs.begin(), off_objs.end());

        const auto fronts = non_dominated_sort(all_objs);
        std::vector<int> survivors;
        survivors.reserve(n);
        for (const auto& front : fronts) {
            if (static_cast<int>(survivors.size() + front.size()) <= n) {
                survivors.insert(survivors.end(), front.begin(), front.end());
            } else {
                std::vector<ObjectivePoint> pts;
                pts.reserve(front.size());
                for (int i : front) pts.push_back(all_objs[i]);
                const auto cd = crowding_distance(pts);
                std::vector<int> order(front.size());
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                    return cd[a] > cd[b];
                });
                for (int t : order) {
                    if (static_cast<int>(survivors.size()) == n) break;
                    survivors.push_back(front[t]);
                }
                break;
            }
            if (static_cast<int>(survivors.size()) == n) break;
        }

        std::vector<std::vector<double>> next_genomes(n);
        std::vector<ObjectivePoint> next_objs(n);
        for (int i = 0; i < n; ++i) {
            next_genomes[i] = std::move(all_genomes[survivors[i]]);
            next_objs[i] = all_objs[survivors[i]];
        }
        res.genomes = std::move(next_genomes);
        res.objectives = std::move(next_objs);
        assign_rank_crowding();
        log_generation(gen);
        res.generations_run = gen;

        if (cfg.stagnation_window > 0 &&
            static_cast<int>(res.log.size()) > cfg.stagnation_window) {
            const double now = res.log.back().hypervolume;
            const double past =
                res.log[res.log.size() - 1 - cfg.stagnation_window].hypervolume;
            const double scale = std::max(std::abs(now), 1e-300);
            if (now > 0.0 && std::abs(now - past) / scale < cfg.stagnation_rel_tol)
                break;
        }
    }
    return res;
}

} // namespace qpp
