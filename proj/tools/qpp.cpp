// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch CLI for the qutrit pulse pipeline:
//   simulate  integrate one pulse, write trajectory + profile + summary
//   scan      detuning or amplitude sweep of p_e(T/2) with width extraction
//   pareto    NSGA-II Pareto front for one model family (or a job list)
//   lz        Landau-Zener robustness bounds / adiabatic band points
//   morris    parameter sensitivity on a Pareto run directory
//
// Configuration comes from a JSON file (--config); a few flags override the
// file and the effective configuration is echoed into the run manifest.
// Exit codes: 0 success, 2 config/validation error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpp/io.hpp"

namespace fs = std::filesystem;
using qpp::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;   // overrides config out_dir
    int threads = 0;       // 0 = unset
    double delta_ghz = std::numeric_limits<double>::quiet_NaN();
    double rel_tol = 0.0;  // 0 = unset
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int resolve_threads(const json& cfg, const CommonFlags& flags) {
    if (flags.threads > 0) return flags.threads;
    if (cfg.contains("threads")) {
        const int t = cfg["threads"].get<int>();
        if (t < 1) throw qpp::ConfigError("threads must be >= 1");
        return t;
    }
    if (const char* env = std::getenv("QPP_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

fs::path resolve_out_dir(const json& cfg, const CommonFlags& flags, const std::string& cmd) {
    std::string dir = flags.out_dir;
    if (dir.empty() && cfg.contains("out_dir")) dir = cfg["out_dir"].get<std::string>();
    if (dir.empty())
        throw qpp::ConfigError("missing required key 'out_dir' in " + cmd + " config");
    fs::create_directories(dir);
    return dir;
}

qpp::EvolveOptions evolve_options(const json& cfg, const CommonFlags& flags) {
    qpp::EvolveOptions opt;
    opt.rel_tol = qpp::get_number_or(cfg, "rel_tol", opt.rel_tol);
    if (flags.rel_tol > 0) opt.rel_tol = flags.rel_tol;
    opt.abs_tol = qpp::get_number_or(cfg, "abs_tol", opt.abs_tol);
    const double gp = qpp::get_number_or(cfg, "grid_points", opt.grid_points);
    opt.grid_points = static_cast<int>(gp);
    if (opt.grid_points < 3) throw qpp::ConfigError("grid_points must be >= 3");
    return opt;
}

qpp::PulseModel required_model(const json& cfg, const std::string& context) {
    const json& mj = qpp::require_key(cfg, "model", context);
    qpp::PulseModel model = qpp::model_from_json(mj, context + ".model");
    const auto issues = qpp::validate(model);
    if (!issues.empty()) {
        std::string msg = "invalid model in " + context + ":";
        for (const auto& s : issues) msg += "\n  " + s;
        throw qpp::ConfigError(msg);
    }
    return model;
}

json effective_config(json cfg, const CommonFlags& flags) {
    if (!flags.out_dir.empty()) cfg["out_dir"] = flags.out_dir;
    if (!std::isnan(flags.delta_ghz)) cfg["delta_GHz"] = flags.delta_ghz;
    if (flags.rel_tol > 0) cfg["rel_tol"] = flags.rel_tol;
    if (flags.threads > 0) cfg["threads"] = flags.threads;
    if (flags.seed_set) cfg["seed"] = flags.seed;
    return cfg;
}

// ---- simulate -----------------------------------------------------------------

int cmd_simulate(const CommonFlags& flags) {
    json cfg = effective_config(qpp::load_json_file(flags.config_path), flags);
    qpp::check_keys(cfg,
                    {"model", "delta_GHz", "rel_tol", "abs_tol", "grid_points",
                     "out_dir", "threads"},
                    "simulate config");
    const qpp::PulseModel model = required_model(cfg, "simulate config");
    const double delta = qpp::get_number_or(cfg, "delta_GHz", 0.0);
    const qpp::EvolveOptions opt = evolve_options(cfg, flags);
    const int threads = resolve_threads(cfg, flags);
    const fs::path out = resolve_out_dir(cfg, flags, "simulate");

    const qpp::PhysicsConstants constants;
    const qpp::QutritTrajectory traj = qpp::evolve(model, delta, constants, opt);
    const qpp::AdiabaticCurve adiabatic =
        qpp::adiabatic_pf_trajectory(model, delta, constants, opt.grid_points);

    qpp::write_trajectory_csv((out / "trajectory.csv").string(), traj);
    qpp::write_pulse_profile_csv((out / "pulse_profile.csv").string(), model, delta);
    {
        qpp::CsvWriter csv((out / "adiabatic_pf.csv").string());
        csv.header({"t_ns", "p_f_adiabatic"});
        for (std::size_t i = 0; i < adiabatic.times.size(); ++i)
            csv.row(adiabatic.times[i], adiabatic.p_f[i]);
        csv.close();
    }
    json summary;
    summary["max_pf"] = qpp::max_transient_pf(traj);
    summary["p_e_final"] = traj.p_e_final();
    summary["max_pf_adiabatic"] =
        *std::max_element(adiabatic.p_f.begin(), adiabatic.p_f.end());
    summary["max_norm_drift"] = traj.max_norm_drift;
    summary["delta_GHz"] = delta;
    qpp::write_json_file((out / "summary.json").string(), summary);
    qpp::write_manifest(out, "simulate", cfg, threads);
    std::cout << "simulate: wrote " << out.string() << "\n";
    return 0;
}

// ---- scan ----------------------------------------------------------------------

qpp::ScanConfig scan_config_from_json(const json& cfg, bool amplitude) {
    qpp::ScanConfig sc;
    if (amplitude) sc = qpp::default_amplitude_scan_config();
    sc.lo = qpp::get_number_or(cfg, "lo_GHz", sc.lo);
    sc.hi = qpp::get_number_or(cfg, "hi_GHz", sc.hi);
    sc.coarse_step = qpp::get_number_or(cfg, "coarse_step_GHz", sc.coarse_step);
    if (cfg.contains("log_spaced")) sc.log_spaced = cfg["log_spaced"].get<bool>();
    sc.log_points = static_cast<int>(qpp::get_number_or(cfg, "log_points", sc.log_points));
    sc.bisect_tol = qpp::get_number_or(cfg, "bisect_tol_GHz", sc.bisect_tol);
    sc.p_thresh = qpp::get_number_or(cfg, "p_thresh", sc.p_thresh);
    sc.p_qualify = qpp::get_number_or(cfg, "p_qualify", sc.p_qualify);
    if (!(sc.lo < sc.hi)) throw qpp::ConfigError("scan range requires lo_GHz < hi_GHz");
    return sc;
}

int cmd_scan(const CommonFlags& flags) {
    json cfg = effective_config(qpp::load_json_file(flags.config_path), flags);
    qpp::check_keys(cfg,
                    {"model", "axis", "lo_GHz", "hi_GHz", "coarse_step_GHz", "log_spaced",
                     "log_points", "bisect_tol_GHz", "p_thresh", "p_qualify", "delta_GHz",
                     "rel_tol", "abs_tol", "out_dir", "threads"},
                    "scan config");
    qpp::PulseModel model = required_model(cfg, "scan config");
    const std::string axis = qpp::get_string(cfg, "axis", "scan config");
    if (axis != "detuning" && axis != "amplitude")
        throw qpp::ConfigError("axis must be 'detuning' or 'amplitude'");
    const bool amplitude = axis == "amplitude";
    const qpp::ScanConfig sc = scan_config_from_json(cfg, amplitude);
    qpp::EvolveOptions opt;
    opt.rel_tol = qpp::get_number_or(cfg, "rel_tol", opt.rel_tol);
    if (flags.rel_tol > 0) opt.rel_tol = flags.rel_tol;
    opt.abs_tol = qpp::get_number_or(cfg, "abs_tol", opt.abs_tol);
    const int threads = resolve_threads(cfg, flags);
    const fs::path out = resolve_out_dir(cfg, flags, "scan");
    model.delta_offset = qpp::get_number_or(cfg, "delta_GHz", 0.0);

    const qpp::PhysicsConstants constants;
    const qpp::ScanCurve curve =
        amplitude ? qpp::amplitude_scan(model, constants, sc, opt, threads)
                  : qpp::detuning_scan(model, constants, sc, opt, threads);

    qpp::write_scan_csv((out / "curve.csv").string(), curve);
    json sidecar = qpp::scan_sidecar_json(curve);
    sidecar["axis"] = axis;
    if (amplitude) sidecar["delta_GHz_fixed"] = model.delta_offset;
    qpp::write_json_file((out / "width.json").string(), sidecar);
    qpp::write_manifest(out, "scan", cfg, threads);
    std::cout << "scan: width_GHz = " << sidecar["width_GHz"].dump() << ", wrote "
              << out.string() << "\n";
    return 0;
}

// ---- pareto ----------------------------------------------------------------------

qpp::GAConfig ga_config_from_json(const json& cfg) {
    qpp::GAConfig ga;
    ga.population = static_cast<int>(qpp::get_number_or(cfg, "population", ga.population));
    ga.generations = static_cast<int>(qpp::get_number_or(cfg, "generations", ga.generations));
    ga.p_crossover = qpp::get_number_or(cfg, "p_crossover", ga.p_crossover);
    ga.eta_c = qpp::get_number_or(cfg, "eta_c", ga.eta_c);
    ga.p_mutation = qpp::get_number_or(cfg, "p_mutation", ga.p_mutation);
    ga.eta_m = qpp::get_number_or(cfg, "eta_m", ga.eta_m);
    ga.stagnation_window =
        static_cast<int>(qpp::get_number_or(cfg, "stagnation_window", ga.stagnation_window));
    ga.stagnation_rel_tol =
        qpp::get_number_or(cfg, "stagnation_rel_tol", ga.stagnation_rel_tol);
    qpp::validate_ga(ga);
    return ga;
}

qpp::EvalConfig eval_config_from_json(const json& cfg, int threads) {
    qpp::EvalConfig ec;
    if (cfg.contains("scan")) {
        qpp::check_keys(cfg["scan"],
                        {"lo_GHz", "hi_GHz", "coarse_step_GHz", "bisect_tol_GHz",
                         "p_thresh", "p_qualify"},
                        "pareto scan block");
        ec.det_scan = scan_config_from_json(cfg["scan"], false);
    }
    ec.evolve.rel_tol = qpp::get_number_or(cfg, "rel_tol", ec.evolve.rel_tol);
    ec.evolve.abs_tol = qpp::get_number_or(cfg, "abs_tol", ec.evolve.abs_tol);
    ec.threads = threads;
    return ec;
}

void run_pareto_job(const json& cfg, int threads, const fs::path& out) {
    const std::string family = qpp::get_string(cfg, "model_name", "pareto config");
    qpp::model_family(family); // validates the name
    const double t_ns = qpp::get_number(cfg, "T_ns", "pareto config");
    if (!(t_ns > 0)) throw qpp::ConfigError("T_ns must be positive");
    if (!cfg.contains("seed"))
        throw qpp::ConfigError("missing required key 'seed' in pareto config "
                               "(runs must be reproducible)");
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const qpp::GAConfig ga = ga_config_from_json(cfg);
    const qpp::EvalConfig ec = eval_config_from_json(cfg, threads);
    const auto densify_to = static_cast<std::size_t>(qpp::get_number_or(cfg, "densify_to", 0));
    bool with_amp = true;
    if (cfg.contains("amp_rob")) with_amp = cfg["amp_rob"].get<bool>();

    qpp::ParetoArchive archive = qpp::pareto_optimize(family, t_ns, ga, ec, seed);
    if (densify_to > 0) qpp::densify_front(archive, densify_to, ec);

    std::optional<std::vector<double>> amp;
    if (with_amp && !archive.empty_front()) {
        qpp::ObjectiveEvaluator eval(family, t_ns, ec);
        amp = qpp::archive_amp_rob(archive, eval, threads);
    }
    fs::create_directories(out);
    qpp::write_archive_csv((out / "archive.csv").string(), archive,
                           amp ? &*amp : nullptr);
    qpp::write_hypervolume_log_csv((out / "hypervolume_log.csv").string(), archive.log);
    qpp::write_manifest(out, "pareto", cfg, threads);
    std::cout << "pareto: " << family << " T=" << t_ns << "ns, "
              << archive.entries.size() << " front entries ("
              << archive.generations_run << " generations, " << archive.evaluations
              << " evaluations, " << archive.failures << " failures), wrote "
              << out.string() << "\n";
}

int cmd_pareto(const CommonFlags& flags) {
    json cfg = effective_config(qpp::load_json_file(flags.config_path), flags);
    const std::set<std::string> job_keys = {
        "model_name", "T_ns",  "seed",       "population",        "generations",
        "p_crossover", "eta_c", "p_mutation", "eta_m",             "stagnation_window",
        "stagnation_rel_tol",  "scan",       "rel_tol",           "abs_tol",
        "densify_to",  "amp_rob"};
    std::set<std::string> top_keys = job_keys;
    top_keys.insert("out_dir");
    top_keys.insert("threads");
    top_keys.insert("jobs");
    qpp::check_keys(cfg, top_keys, "pareto config");
    const int threads = resolve_threads(cfg, flags);
    const fs::path out = resolve_out_dir(cfg, flags, "pareto");

    if (cfg.contains("jobs")) {
        const json& jobs = cfg["jobs"];
        if (!jobs.is_array() || jobs.empty())
            throw qpp::ConfigError("'jobs' must be a non-empty array");
        for (const json& job : jobs) {
            qpp::check_keys(job, job_keys, "pareto job");
            json merged = cfg;
            merged.erase("jobs");
            merged.update(job);
            const std::string family = qpp::get_string(merged, "model_name", "pareto job");
            const double t_ns = qpp::get_number(merged, "T_ns", "pareto job");
            char sub[64];
            std::snprintf(sub, sizeof sub, "%s_%gns", family.c_str(), t_ns);
            run_pareto_job(merged, threads, out / sub);
        }
        return 0;
    }
    run_pareto_job(cfg, threads, out);
    return 0;
}

// ---- lz -------------------------------------------------------------------------

int cmd_lz(const CommonFlags& flags) {
    json cfg = effective_config(qpp::load_json_file(flags.config_path), flags);
    qpp::check_keys(cfg,
                    {"model", "models", "archive_csv", "p_thresh", "p_qualify",
                     "out_dir", "threads"},
                    "lz config");
    const double p_thresh = qpp::get_number_or(cfg, "p_thresh", 0.99);
    const double p_qualify = qpp::get_number_or(cfg, "p_qualify", 0.999);
    const int threads = resolve_threads(cfg, flags);
    const fs::path out = resolve_out_dir(cfg, flags, "lz");
    const qpp::PhysicsConstants constants;

    std::vector<qpp::PulseModel> models;
    if (cfg.contains("model")) {
        models.push_back(required_model(cfg, "lz config"));
    } else if (cfg.contains("models")) {
        for (const json& mj : cfg["models"])
            models.push_back(qpp::model_from_json(mj, "lz config.models"));
    } else if (cfg.contains("archive_csv")) {
        const qpp::ParetoArchive archive =
            qpp::read_archive_csv(cfg["archive_csv"].get<std::string>());
        for (const auto& e : archive.entries)
            models.push_back(qpp::model_from_vector(archive.family, e.genes, archive.t_ns));
    } else {
        throw qpp::ConfigError("lz config needs one of 'model', 'models', 'archive_csv'");
    }

    std::vector<qpp::BandPoint> band(models.size());
    qpp::parallel_for(models.size(), threads, [&](std::size_t i) {
        band[i] = qpp::band_point(models[i], constants, p_thresh, p_qualify);
    });
    qpp::write_band_csv((out / "band.csv").string(), band);
    if (models.size() > 1)
        qpp::write_band_envelope_csv((out / "band_envelope.csv").string(), band);
    if (models.size() == 1) {
        const qpp::LZBound bound = qpp::lz_robustness(models[0], p_thresh);
        json bj;
        bj["delta_minus_GHz"] = bound.delta_minus;
        bj["delta_plus_GHz"] = bound.delta_plus;
        bj["width_GHz"] = bound.width;
        bj["feasible"] = bound.feasible;
        bj["constrained_ok"] = band[0].constrained_ok;
        bj["max_pf_adiabatic"] = band[0].max_pf_adiabatic;
        // all detuning zeros at delta = 0; the bound uses the one nearest 0
        bj["crossing_roots_ns"] =
            qpp::detuning_roots(models[0].detuning, 0.0, models[0].duration_t);
        qpp::write_json_file((out / "bound.json").string(), bj);
    }
    qpp::write_manifest(out, "lz", cfg, threads);
    std::cout << "lz: " << band.size() << " band points, wrote " << out.string() << "\n";
    return 0;
}

// ---- morris ----------------------------------------------------------------------

int cmd_morris(const CommonFlags& flags) {
    json cfg = effective_config(qpp::load_json_file(flags.config_path), flags);
    qpp::check_keys(cfg,
                    {"pareto_run_dir", "outputs", "N", "rel_step", "densify", "out_dir",
                     "threads"},
                    "morris config");
    const std::string run_dir = qpp::get_string(cfg, "pareto_run_dir", "morris config");
    const int threads = resolve_threads(cfg, flags);
    const fs::path out = resolve_out_dir(cfg, flags, "morris");

    qpp::MorrisConfig mc;
    mc.n_samples = static_cast<int>(qpp::get_number_or(cfg, "N", mc.n_samples));
    if (mc.n_samples < 2)
        throw qpp::ConfigError("N must be >= 2 (got " + std::to_string(mc.n_samples) + ")");
    mc.rel_step = qpp::get_number_or(cfg, "rel_step", mc.rel_step);

    std::vector<qpp::MorrisOutput> outputs;
    if (cfg.contains("outputs")) {
        for (const json& o : cfg["outputs"])
            outputs.push_back(qpp::morris_output_from_string(o.get<std::string>()));
    } else {
        outputs = {qpp::MorrisOutput::MaxPf, qpp::MorrisOutput::DetRob,
                   qpp::MorrisOutput::AmpRob};
    }

    const json manifest = qpp::load_json_file((fs::path(run_dir) / "manifest.json").string());
    const json& run_cfg = qpp::require_key(manifest, "config", "pareto manifest");
    qpp::ParetoArchive archive =
        qpp::read_archive_csv((fs::path(run_dir) / "archive.csv").string());
    archive.ga = ga_config_from_json(run_cfg);
    archive.seed = run_cfg.contains("seed") ? run_cfg["seed"].get<std::uint64_t>() : 0;
    qpp::EvalConfig ec = eval_config_from_json(run_cfg, threads);

    bool densify = true;
    if (cfg.contains("densify")) densify = cfg["densify"].get<bool>();
    if (densify && archive.entries.size() < static_cast<std::size_t>(mc.n_samples))
        qpp::densify_front(archive, mc.n_samples, ec);

    qpp::ObjectiveEvaluator eval(archive.family, archive.t_ns, ec);
    const auto records = qpp::morris_study(archive, eval, outputs, mc, threads);

    for (qpp::MorrisOutput o : outputs)
        qpp::write_morris_ratio_csv(
            (out / (std::string("morris_ratio_") + qpp::to_string(o) + ".csv")).string(), o,
            records);
    qpp::write_morris_scatter_csv((out / "morris_scatter.csv").string(), records);
    qpp::write_morris_records_csv((out / "morris_records.csv").string(), records);
    qpp::write_manifest(out, "morris", cfg, threads);
    std::cout << "morris: " << records.size() << " records over "
              << archive.entries.size() << " front entries, wrote " << out.string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qutrit pulse Pareto pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("-c,--config", flags.config_path, "JSON config file")->required();
        sub->add_option("-o,--out", flags.out_dir, "output directory (overrides config)");
        sub->add_option("--threads", flags.threads, "worker threads (overrides config)");
        sub->add_option("--rel-tol", flags.rel_tol, "integrator relative tolerance");
        if (with_seed)
            sub->add_option("--seed", flags.seed, "RNG seed (overrides config)")
                ->each([&](const std::string&) { flags.seed_set = true; });
    };

    CLI::App* simulate = app.add_subcommand("simulate", "integrate one pulse");
    add_common(simulate, false);
    simulate->add_option("--delta-GHz", flags.delta_ghz, "static detuning offset");

    CLI::App* scan = app.add_subcommand("scan", "detuning/amplitude sweep");
    add_common(scan, false);
    scan->add_option("--delta-GHz", flags.delta_ghz,
                     "fixed detuning offset (amplitude scans)");

    CLI::App* pareto = app.add_subcommand("pareto", "NSGA-II Pareto front");
    add_common(pareto, true);

    CLI::App* lz = app.add_subcommand("lz", "Landau-Zener bounds");
    add_common(lz, false);

    CLI::App* morris = app.add_subcommand("morris", "Morris sensitivity study");
    add_common(morris, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(simulate)) return cmd_simulate(flags);
        if (app.got_subcommand(scan)) return cmd_scan(flags);
        if (app.got_subcommand(pareto)) return cmd_pareto(flags);
        if (app.got_subcommand(lz)) return cmd_lz(flags);
        if (app.got_subcommand(morris)) return cmd_morris(flags);
    } catch (const qpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qpp::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
