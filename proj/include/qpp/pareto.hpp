// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qpp/csv.hpp"
#include "qpp/lz.hpp"
#include "qpp/metrics.hpp"
#include "qpp/nsga2.hpp"
#include "qpp/parallel.hpp"
#include "qpp/pulse.hpp"

namespace qpp {

// Everything needed to score a genome of a given family/duration.
struct EvalConfig {
    PhysicsConstants constants{};
    ScanConfig det_scan{};                               // detuning robustness sweep
    ScanConfig amp_scan = default_amplitude_scan_config(); // post-hoc amplitude sweep
    EvolveOptions evolve{};
    int threads = 1;
};

// Cached objective evaluation for one model family. Keys quantize genes to 12
// significant digits, so tournament-duplicated individuals are integrated
// once. An evaluation failure marks the candidate infeasible with max_pf = 1
// and the run continues. Thread-safe; the batch path evaluates distinct
// genomes in parallel.
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(std::string family, double t_ns, EvalConfig cfg)
        : family_(std::move(family)), t_ns_(t_ns), cfg_(std::move(cfg)) {}

    const std::string& family() const { return family_; }
    double t_ns() const { return t_ns_; }
    const EvalConfig& config() const { return cfg_; }
    std::size_t evaluations() const { return evaluations_; }
    std::size_t failures() const { return failures_; }

    // Order-preserving batch evaluation; the NSGA-II loop calls this once per
    // generation.
    std::vector<ObjectivePoint> operator()(const std::vector<std::vector<double>>& genomes) {
        std::vector<ObjectivePoint> out(genomes.size());
        std::vector<std::pair<std::size_t, std::string>> misses;
        {
            std::lock_guard lock(mutex_);
            for (std::size_t i = 0; i < genomes.size(); ++i) {
                std::string key = cache_key(genomes[i]);
                auto it = objective_cache_.find(key);
                if (it != objective_cache_.end())
                    out[i] = it->second;
                else
                    misses.emplace_back(i, std::move(key));
            }
        }
        // drop duplicate keys within the batch, keeping the first occurrence
        std::vector<std::pair<std::size_t, std::string>> unique;
        for (auto& m : misses) {
            bool seen = false;
            for (const auto& u : unique)
                if (u.second == m.second) { seen = true; break; }
            if (!seen) unique.push_back(m);
        }
        std::vector<ObjectivePoint> fresh(unique.size());
        parallel_for(unique.size(), cfg_.threads, [&](std::size_t t) {
            fresh[t] = compute_objectives(genomes[unique[t].first]);
        });
        {
            std::lock_guard lock(mutex_);
            for (std::size_t t = 0; t < unique.size(); ++t)
                objective_cache_.emplace(unique[t].second, fresh[t]);
            for (auto& m : misses) out[m.first] = objective_cache_.at(m.second);
        }
        return out;
    }

    // Scalar output functionals used by the sensitivity study. max_pf skips
    // the detuning scan (a single trajectory suffices).
    double max_pf(const std::vector<double>& genes) {
        const std::string key = cache_key(genes);
        {
            std::lock_guard lock(mutex_);
            if (auto it = objective_cache_.find(key); it != objective_cache_.end())
                return it->second.max_pf;
            if (auto it = maxpf_cache_.find(key); it != maxpf_cache_.end())
                return it->second;
        }
        const PulseModel m = model_from_vector(family_, genes, t_ns_);
        const double v = max_transient_pf(evolve(m, 0.0, cfg_.constants, cfg_.evolve));
        std::lock_guard lock(mutex_);
        maxpf_cache_.emplace(key, v);
        return v;
    }
    double det_rob(const std::vector<double>& genes) { return full(genes).det_rob; }
    double amp_rob(const std::vector<double>& genes) {
        const std::string key = cache_key(genes);
        {
            std::lock_guard lock(mutex_);
            auto it = amp_cache_.find(key);
            if (it != amp_cache_.end()) return it->second;
        }
        const PulseModel m = model_from_vector(family_, genes, t_ns_);
        const ScanCurve curve = amplitude_scan(m, cfg_.constants, cfg_.amp_scan, cfg_.evolve);
        const double w = robustness_width(curve);
        std::lock_guard lock(mutex_);
        amp_cache_.emplace(key, w);
        return w;
    }

    ObjectivePoint full(const std::vector<double>& genes) {
        const std::string key = cache_key(genes);
        {
            std::lock_guard lock(mutex_);
            auto it = objective_cache_.find(key);
            if (it != objective_cache_.end()) return it->second;
        }
        const ObjectivePoint p = compute_objectives(genes);
        std::lock_guard lock(mutex_);
        objective_cache_.emplace(key, p);
        return p;
    }

private:
    std::string cache_key(const std::vector<double>& genes) const {
        std::string key;
        key.reserve(genes.size() * 20);
        for (double g : genes) {
            key += format_double_sig(g, 12);
            key += ';';
        }
        return key;
    }

    ObjectivePoint compute_objectives(const std::vector<double>& genes) {
        ++evaluations_;
        try {
            const PulseModel m = model_from_vector(family_, genes, t_ns_);
            ObjectivesConfig oc{cfg_.det_scan, cfg_.evolve};
            return objectives(m, cfg_.constants, oc, /*threads=*/1);
        } catch (const NumericalError&) {
            ++failures_;
            return ObjectivePoint{1.0, 0.0, false};
        }
    }

    std::string family_;
    double t_ns_;
    EvalConfig cfg_;
    std::mutex mutex_;
    std::unordered_map<std::string, ObjectivePoint> objective_cache_;
    std::unordered_map<std::string, double> maxpf_cache_;
    std::unordered_map<std::string, double> amp_cache_;
    std::atomic<std::size_t> evaluations_{0};
    std::atomic<std::size_t> failures_{0};
};

struct ParetoEntry {
    std::vector<double> genes;
    ObjectivePoint obj;
    int rank = 1;
    double crowding = 0.0;
};

// Final rank-1 front of a run (feasible entries only), sorted by det_rob
// ascending, plus the metadata needed to reproduce the run.
struct ParetoArchive {
    std::string family;
    double t_ns = 0.0;
    std::uint64_t seed = 0;
    GAConfig ga{};
    int generations_run = 0;
    std::size_t evaluations = 0;
    std::size_t failures = 0;
    std::vector<ParetoEntry> entries;
    std::vector<GAProgress> log;

    bool empty_front() const { return entries.empty(); }
};

namespace detail {

inline void sort_entries(std::vector<ParetoEntry>& entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.obj.det_rob != b.obj.det_rob) return a.obj.det_rob < b.obj.det_rob;
        return a.obj.max_pf < b.obj.max_pf;
    });
}

// Keep the mutually non-dominated feasible subset, dropping exact genome
// duplicates.
inline std::vector<ParetoEntry> non_dominated_feasible(std::vector<ParetoEntry> entries) {
    std::vector<ParetoEntry> kept;
    for (auto& e : entries) {
        if (!e.obj.feasible) continue;
        bool dominated_or_dup = false;
        for (const auto& k : kept) {
            if (dominates(k.obj, e.obj) || k.genes == e.genes) {
                dominated_or_dup = true;
                break;
            }
        }
        if (dominated_or_dup) continue;
        std::erase_if(kept, [&](const ParetoEntry& k) { return dominates(e.obj, k.obj); });
        kept.push_back(std::move(e));
    }
    sort_entries(kept);
    return kept;
}

} // namespace detail

// One NSGA-II run for a family/duration; the archive holds the feasible
// rank-1 front.
inline ParetoArchive pareto_optimize(const std::string& family, double t_ns,
                                     const GAConfig& ga, const EvalConfig& eval_cfg,
                                     std::uint64_t seed,
                                     const std::vector<std::vector<double>>& seed_genomes = {}) {
    ObjectiveEvaluator eval(family, t_ns, eval_cfg);
    const auto bounds = gene_bounds(family);
    NsgaResult res = nsga2_optimize(bounds, ga, std::ref(eval), seed, seed_genomes);

    ParetoArchive archive;
    archive.family = family;
    archive.t_ns = t_ns;
    archive.seed = seed;
    archive.ga = ga;
    archive.generations_run = res.generations_run;
    archive.evaluations = eval.evaluations();
    archive.failures = eval.failures();
    archive.log = std::move(res.log);

    std::vector<ParetoEntry> entries;
    for (std::size_t i = 0; i < res.genomes.size(); ++i) {
        if (res.rank[i] != 1) continue;
        entries.push_back({std::move(res.genomes[i]), res.objectives[i], 1,
                           res.crowding[i]});
    }
    archive.entries = detail::non_dominated_feasible(std::move(entries));
    return archive;
}

// Grow the archive's rank-1 front to at least `target` entries by re-running
// the GA seeded with the current front (enlarged population, shortened
// generation budget), merging the non-dominated union after each round.
inline void densify_front(ParetoArchive& archive, std::size_t target,
                          const EvalConfig& eval_cfg, int max_rounds = 4) {
    int round = 0;
    while (archive.entries.size() < target && round < max_rounds) {
        GAConfig ga = archive.ga;
        ga.population = std::max(ga.population,
                                 static_cast<int>((target + 32 + 1) / 2 * 2));
        ga.generations = std::max(10, archive.ga.generations / 4);
        ga.stagnation_window = 0;
        std::vector<std::vector<double>> seeds;
        seeds.reserve(archive.entries.size());
        for (const auto& e : archive.entries) seeds.push_back(e.genes);
        const std::uint64_t round_seed = archive.seed + 1000 + static_cast<std::uint64_t>(round);
        ParetoArchive extra =
            pareto_optimize(archive.family, archive.t_ns, ga, eval_cfg, round_seed, seeds);
        archive.evaluations += extra.evaluations;
        archive.failures += extra.failures;

        std::vector<ParetoEntry> merged = archive.entries;
        merged.insert(merged.end(), extra.entries.begin(), extra.entries.end());
        archive.entries = detail::non_dominated_feasible(std::move(merged));
        ++round;
    }
}

// Archive CSV: gene_* columns, both objectives, post-hoc amplitude
// robustness, rank. An all-infeasible run writes a single explicit
// empty-front marker row.
inline void write_archive_csv(const std::string& path, const ParetoArchive& archive,
                              const std::vector<double>* amp_rob = nullptr) {
    CsvWriter csv(path);
    const auto bounds = gene_bounds(archive.family);
    csv.field("model");
    csv.field("T_ns");
    for (const auto& b : bounds) csv.field("gene_" + b.name);
    csv.field("max_pf");
    csv.field("det_rob_GHz");
    csv.field("amp_rob_GHz");
    csv.field("rank");
    csv.end_row();
    if (archive.empty_front()) {
        csv.field(archive.family);
        csv.field(archive.t_ns);
        for (std::size_t j = 0; j < bounds.size(); ++j) csv.empty_field();
        csv.empty_field();
        csv.empty_field();
        csv.empty_field();
        csv.field("empty_front");
        csv.end_row();
        csv.close();
        return;
    }
    for (std::size_t i = 0; i < archive.entries.size(); ++i) {
        const auto& e = archive.entries[i];
        csv.field(archive.family);
        csv.field(archive.t_ns);
        for (double g : e.genes) csv.field(g);
        csv.field(e.obj.max_pf);
        csv.field(e.obj.det_rob);
        if (amp_rob && i < amp_rob->size())
            csv.field((*amp_rob)[i]);
        else
            csv.empty_field();
        csv.field(e.rank);
        csv.end_row();
    }
    csv.close();
}

// Amplitude robustness of every archive entry (Appendix-C style post-hoc
// computation).
inline std::vector<double> archive_amp_rob(const ParetoArchive& archive,
                                           ObjectiveEvaluator& eval, int threads = 1) {
    std::vector<double> out(archive.entries.size());
    parallel_for(out.size(), threads,
                 [&](std::size_t i) { out[i] = eval.amp_rob(archive.entries[i].genes); });
    return out;
}

} // namespace qpp
