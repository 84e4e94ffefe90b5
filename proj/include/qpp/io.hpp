// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpp/csv.hpp"
#include "qpp/dynamics.hpp"
#include "qpp/lz.hpp"
#include "qpp/metrics.hpp"
#include "qpp/morris.hpp"
#include "qpp/pareto.hpp"
#include "qpp/pulse.hpp"
#include "qpp/version.hpp"

namespace qpp {

using json = nlohmann::json;

// --- JSON plumbing ----------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

// Reject unknown keys: configs must spell every field exactly.
inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
}

inline const json& require_key(const json& j, const std::string& key,
                               const std::string& context) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError("missing required key '" + key + "' in " + context);
    return *it;
}

inline double get_number(const json& j, const std::string& key, const std::string& context) {
    const json& v = require_key(j, key, context);
    if (!v.is_number()) throw ConfigError("key '" + key + "' in " + context + " must be a number");
    return v.get<double>();
}

inline double get_number_or(const json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError("key '" + key + "' must be a number");
    return it->get<double>();
}

inline std::string get_string(const json& j, const std::string& key,
                              const std::string& context) {
    const json& v = require_key(j, key, context);
    if (!v.is_string()) throw ConfigError("key '" + key + "' in " + context + " must be a string");
    return v.get<std::string>();
}

// --- Pulse model serialization ----------------------------------------------
//
// {name, T_ns, omega0_GHz, n, beta|epsilon, k_GHz: [...], gamma: [...]}
// k_GHz holds only the live prefactors for the kind (1/5/1/2 entries); gamma
// is present for the tanh kinds. Values round-trip bit-exactly (shortest
// round-trip doubles on output).

inline json model_to_json(const PulseModel& m) {
    const ModelFamily& fam = model_family(m.name);
    json j;
    j["name"] = m.name;
    j["T_ns"] = m.duration_t;
    j["omega0_GHz"] = m.envelope.omega0;
    j["n"] = m.envelope.order;
    j[fam.envelope == EnvelopeKind::SuperGaussian ? "beta" : "epsilon"] = m.envelope.shape;
    json k = json::array();
    const int nk = fam.detuning == DetuningKind::Quintic ? 5
                   : fam.detuning == DetuningKind::TanhSech ? 2
                                                            : 1;
    for (int i = 0; i < nk; ++i) k.push_back(m.detuning.k[i]);
    j["k_GHz"] = std::move(k);
    if (fam.detuning == DetuningKind::Tanh) j["gamma"] = json::array({m.detuning.gamma[0]});
    if (fam.detuning == DetuningKind::TanhSech)
        j["gamma"] = json::array({m.detuning.gamma[0], m.detuning.gamma[1]});
    return j;
}

inline PulseModel model_from_json(const json& j, const std::string& context = "model") {
    const std::string name = get_string(j, "name", context);
    const ModelFamily& fam = model_family(name);
    const std::string shape_key =
        fam.envelope == EnvelopeKind::SuperGaussian ? "beta" : "epsilon";
    check_keys(j, {"name", "T_ns", "omega0_GHz", "n", shape_key, "k_GHz", "gamma"}, context);

    std::vector<double> genes;
    genes.push_back(get_number(j, "omega0_GHz", context));
    genes.push_back(get_number(j, "n", context));
    genes.push_back(get_number(j, shape_key, context));

    const json& k = require_key(j, "k_GHz", context);
    if (!k.is_array()) throw ConfigError("'k_GHz' in " + context + " must be an array");
    const std::size_t nk = fam.detuning == DetuningKind::Quintic ? 5
                           : fam.detuning == DetuningKind::TanhSech ? 2
                                                                    : 1;
    if (k.size() != nk)
        throw ConfigError("'k_GHz' in " + context + " must have " + std::to_string(nk) +
                          " entries for " + name);
    std::vector<double> gammas;
    if (fam.detuning == DetuningKind::Tanh || fam.detuning == DetuningKind::TanhSech) {
        const json& g = require_key(j, "gamma", context);
        const std::size_t ng = fam.detuning == DetuningKind::Tanh ? 1 : 2;
        if (!g.is_array() || g.size() != ng)
            throw ConfigError("'gamma' in " + context + " must have " + std::to_string(ng) +
                              " entries for " + name);
        for (const auto& v : g) gammas.push_back(v.get<double>());
    } else if (j.contains("gamma")) {
        throw ConfigError("'gamma' does not apply to " + name);
    }

    // flat gene order: omega0, n, shape, k1, [k2..k5 | gamma1 | k2 gamma1 gamma2]
    genes.push_back(k[0].get<double>());
    switch (fam.detuning) {
    case DetuningKind::Linear:
        break;
    case DetuningKind::Quintic:
        for (std::size_t i = 1; i < 5; ++i) genes.push_back(k[i].get<double>());
        break;
    case DetuningKind::Tanh:
        genes.push_back(gammas[0]);
        break;
    case DetuningKind::TanhSech:
        genes.push_back(k[1].get<double>());
        genes.push_back(gammas[0]);
        genes.push_back(gammas[1]);
        break;
    }
    return model_from_vector(name, genes, get_number(j, "T_ns", context));
}

// --- Run manifests ------------------------------------------------------------

// Every run directory gets a manifest sufficient to re-run bit-identically
// single-threaded: command, effective config, seed, version, unit convention
// and the fixed-delta assumptions.
inline void write_manifest(const std::filesystem::path& dir, const std::string& command,
                           const json& effective_config, int threads) {
    json m;
    m["command"] = command;
    m["config"] = effective_config;
    m["threads"] = threads;
    m["artifact_version"] = kVersion;
    m["units"] = kUnitsNote;
    m["assumptions"] = {{"max_pf_delta_GHz", 0.0}, {"amplitude_scan_delta_GHz", 0.0}};
    write_json_file((dir / "manifest.json").string(), m);
}

// --- CSV writers ---------------------------------------------------------------

inline void write_trajectory_csv(const std::string& path, const QutritTrajectory& traj) {
    CsvWriter csv(path);
    csv.header({"t_ns", "p_g", "p_e", "p_f", "re_cg", "im_cg", "re_ce", "im_ce",
                "re_cf", "im_cf"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        csv.row(traj.times[i], traj.p_g[i], traj.p_e[i], traj.p_f[i], s[0].real(),
                s[0].imag(), s[1].real(), s[1].imag(), s[2].real(), s[2].imag());
    }
    csv.close();
}

// Omega(t) and Delta(t) profiles (Fig. 2(b)-style data).
inline void write_pulse_profile_csv(const std::string& path, const PulseModel& m,
                                    double delta, int points = 1001) {
    CsvWriter csv(path);
    csv.header({"t_ns", "omega_GHz", "delta_GHz"});
    const double T = m.duration_t;
    for (int i = 0; i < points; ++i) {
        double t = -T / 2 + T * static_cast<double>(i) / (points - 1);
        if (i == points - 1) t = T / 2;
        csv.row(t, envelope_value(m.envelope, t, T), detuning_value(m.detuning, t, T, delta));
    }
    csv.close();
}

inline void write_scan_csv(const std::string& path, const ScanCurve& curve) {
    CsvWriter csv(path);
    csv.header({"x", "p_e_final"});
    for (const auto& s : curve.samples) csv.row(s.x, s.pe_final);
    csv.close();
}

// Sidecar JSON: refined crossings, the measured width and its qualification.
inline json scan_sidecar_json(const ScanCurve& curve) {
    json j;
    j["crossings_GHz"] = curve.crossings;
    const RobustInterval* iv = qualified_interval(curve);
    j["width_GHz"] = iv ? iv->width() : 0.0;
    j["qualified"] = iv != nullptr;
    if (iv) {
        j["interval_GHz"] = {iv->lo, iv->hi};
        j["unbounded"] = iv->lo_unbounded || iv->hi_unbounded;
    }
    json ivs = json::array();
    for (const auto& v : curve.intervals)
        ivs.push_back({{"lo_GHz", v.lo},
                       {"hi_GHz", v.hi},
                       {"qualified", v.qualified},
                       {"lo_unbounded", v.lo_unbounded},
                       {"hi_unbounded", v.hi_unbounded}});
    j["intervals"] = std::move(ivs);
    return j;
}

inline void write_band_csv(const std::string& path, const std::vector<BandPoint>& band) {
    CsvWriter csv(path);
    csv.header({"det_rob_LZ_GHz", "max_pf_adiabatic", "model", "T_ns", "constrained_flag"});
    for (const auto& p : band)
        csv.row(p.det_rob_lz, p.max_pf_adiabatic, p.model, p.t_ns,
                static_cast<int>(p.constrained_ok));
    csv.close();
}

// Min/max envelope of the band points over a uniform det_rob binning, one
// (duration, bin) row per band region. The raw points stay authoritative;
// this is the labeled hull construction for band plots.
inline void write_band_envelope_csv(const std::string& path,
                                    const std::vector<BandPoint>& band, int bins = 40) {
    CsvWriter csv(path);
    csv.header({"T_ns", "det_rob_LZ_lo_GHz", "det_rob_LZ_hi_GHz", "max_pf_adiabatic_min",
                "max_pf_adiabatic_max", "count"});
    std::vector<double> durations;
    for (const auto& p : band)
        if (std::find(durations.begin(), durations.end(), p.t_ns) == durations.end())
            durations.push_back(p.t_ns);
    std::sort(durations.begin(), durations.end());
    for (double t_ns : durations) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& p : band)
            if (p.t_ns == t_ns) {
                lo = std::min(lo, p.det_rob_lz);
                hi = std::max(hi, p.det_rob_lz);
            }
        if (!(hi > lo)) continue;
        const double step = (hi - lo) / bins;
        for (int b = 0; b < bins; ++b) {
            const double blo = lo + b * step, bhi = blo + step;
            double pf_min = std::numeric_limits<double>::infinity(), pf_max = 0.0;
            int count = 0;
            for (const auto& p : band) {
                if (p.t_ns != t_ns) continue;
                if (p.det_rob_lz < blo || (p.det_rob_lz >= bhi && b != bins - 1)) continue;
                pf_min = std::min(pf_min, p.max_pf_adiabatic);
                pf_max = std::max(pf_max, p.max_pf_adiabatic);
                ++count;
            }
            if (count > 0) csv.row(t_ns, blo, bhi, pf_min, pf_max, count);
        }
    }
    csv.close();
}

inline void write_hypervolume_log_csv(const std::string& path,
                                      const std::vector<GAProgress>& log) {
    CsvWriter csv(path);
    csv.header({"generation", "evaluations", "hypervolume", "best_max_pf",
                "best_det_rob_GHz"});
    for (const auto& p : log)
        csv.row(p.generation, static_cast<long long>(p.evaluations), p.hypervolume,
                p.best_max_pf, p.best_det_rob);
    csv.close();
}

// Appendix-A-layout ratio table: one row per archive, mu/mu* per parameter
// column, empty cells where a parameter does not exist for the model.
inline const std::vector<std::string>& morris_table_columns() {
    static const std::vector<std::string> cols = {
        "omega0", "n", "beta_epsilon", "k1", "k2", "k3", "k4", "k5", "gamma1", "gamma2"};
    return cols;
}

inline void write_morris_ratio_csv(const std::string& path, MorrisOutput output,
                                   const std::vector<SensitivityRecord>& records) {
    CsvWriter csv(path);
    csv.field("model");
    csv.field("T_ns");
    for (const auto& c : morris_table_columns()) csv.field(c);
    csv.end_row();

    // group rows by (model, T) preserving first-appearance order
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& r : records) {
        if (r.output != output) continue;
        std::pair<std::string, double> key{r.model, r.t_ns};
        if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    }
    for (const auto& [model, t_ns] : rows) {
        csv.field(model);
        csv.field(t_ns);
        for (const auto& col : morris_table_columns()) {
            const SensitivityRecord* found = nullptr;
            for (const auto& r : records) {
                const std::string norm = r.param == "beta" || r.param == "epsilon"
                                             ? "beta_epsilon"
                                             : r.param;
                if (r.output == output && r.model == model && r.t_ns == t_ns && norm == col) {
                    found = &r;
                    break;
                }
            }
            if (found && !std::isnan(found->ratio))
                csv.field(found->ratio);
            else
                csv.empty_field();
        }
        csv.end_row();
    }
    csv.close();
}

// Read back an archive written by write_archive_csv (our own numeric CSV; no
// quoted fields). The GA metadata is not stored in the CSV; callers take it
// from the run manifest.
inline ParetoArchive read_archive_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (c != '\r' && c != '\n') {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty archive CSV '" + path + "'");
    const auto header = split(line);
    std::size_t n_genes = 0;
    for (const auto& h : header)
        if (h.rfind("gene_", 0) == 0) ++n_genes;
    if (n_genes == 0 || header.size() != n_genes + 6)
        throw ConfigError("'" + path + "' is not an archive CSV");

    ParetoArchive archive;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw ConfigError("ragged row in archive CSV '" + path + "'");
        archive.family = cells[0];
        archive.t_ns = std::stod(cells[1]);
        if (cells.back() == "empty_front") continue;
        ParetoEntry e;
        for (std::size_t g = 0; g < n_genes; ++g) e.genes.push_back(std::stod(cells[2 + g]));
        e.obj.max_pf = std::stod(cells[2 + n_genes]);
        e.obj.det_rob = std::stod(cells[3 + n_genes]);
        e.obj.feasible = e.obj.det_rob > 0.0;
        e.rank = 1;
        archive.entries.push_back(std::move(e));
    }
    if (archive.family.empty())
        throw ConfigError("archive CSV '" + path + "' has no rows");
    return archive;
}

// Fig. 3-style scatter data.
inline void write_morris_scatter_csv(const std::string& path,
                                     const std::vector<SensitivityRecord>& records) {
    CsvWriter csv(path);
    csv.header({"model", "T_ns", "output", "param", "mu_star", "sigma"});
    for (const auto& r : records)
        csv.row(r.model, r.t_ns, to_string(r.output), r.param, r.mu_star, r.sigma);
    csv.close();
}

inline void write_morris_records_csv(const std::string& path,
                                     const std::vector<SensitivityRecord>& records) {
    CsvWriter csv(path);
    csv.header({"model", "T_ns", "output", "param", "mu_star", "sigma", "mu", "ratio",
                "n_valid", "n_excluded", "flagged"});
    for (const auto& r : records)
        csv.row(r.model, r.t_ns, to_string(r.output), r.param, r.mu_star, r.sigma, r.mu,
                r.ratio, r.n_valid, r.n_excluded, static_cast<int>(r.flagged));
    csv.close();
}

} // namespace qpp
