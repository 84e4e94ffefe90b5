// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "qpp/io.hpp"

using namespace qpp;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "qpp_io_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("model JSON round trip is bit exact", "[io]") {
    for (const char* name : {"SG1", "SG2", "SG3", "SG4", "SECH1", "SECH2", "SECH3", "SECH4"}) {
        const ModelFamily& fam = model_family(name);
        std::vector<double> genes;
        // decimal inputs with <= 12 significant digits
        const double pool[] = {0.0123456789, 1.23456789012, -2.71828182845,
                               0.099999999999, 3.14159265358, -0.1, 0.25, 5.5};
        for (std::size_t i = 0; i < fam.num_genes; ++i)
            genes.push_back(std::abs(pool[i % 8]) *
                            (gene_bounds(fam)[i].hi >= 0 ? 0.01 : -0.01));
        const PulseModel m = model_from_vector(name, genes, 50.0);
        const json j = model_to_json(m);
        const PulseModel back = model_from_json(j);
        CHECK(vector_from_model(back) == genes);
        CHECK(model_to_json(back).dump() == j.dump());
    }
}

TEST_CASE("model JSON parses decimal strings exactly", "[io]") {
    const json j = json::parse(R"({"name":"SECH3","T_ns":50,"omega0_GHz":0.1,
        "n":0.995,"epsilon":2,"k_GHz":[-0.161],"gamma":[1.92]})");
    const PulseModel m = model_from_json(j);
    CHECK(m.envelope.omega0 == 0.1);
    CHECK(m.envelope.order == 0.995);
    CHECK(m.detuning.k[0] == -0.161);
    CHECK(m.detuning.gamma[0] == 1.92);
    // shortest round-trip output re-parses to the same doubles
    const json j2 = model_to_json(m);
    CHECK(model_from_json(j2).detuning.k[0] == -0.161);
}

TEST_CASE("model JSON schema is strict", "[io]") {
    SECTION("unknown key") {
        const json j = json::parse(R"({"name":"SG1","T_ns":50,"omega0_GHz":0.05,
            "n":2,"beta":-3,"k_GHz":[0.1],"chirp":1})");
        CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("chirp"));
    }
    SECTION("missing T_ns") {
        const json j = json::parse(R"({"name":"SG1","omega0_GHz":0.05,
            "n":2,"beta":-3,"k_GHz":[0.1]})");
        CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("T_ns"));
    }
    SECTION("wrong k arity") {
        const json j = json::parse(R"({"name":"SG2","T_ns":50,"omega0_GHz":0.05,
            "n":2,"beta":-3,"k_GHz":[0.1,0.02]})");
        CHECK_THROWS_AS(model_from_json(j), ConfigError);
    }
    SECTION("gamma on a linear model") {
        const json j = json::parse(R"({"name":"SG1","T_ns":50,"omega0_GHz":0.05,
            "n":2,"beta":-3,"k_GHz":[0.1],"gamma":[2.0]})");
        CHECK_THROWS_AS(model_from_json(j), ConfigError);
    }
    SECTION("epsilon key on an SG model") {
        const json j = json::parse(R"({"name":"SG1","T_ns":50,"omega0_GHz":0.05,
            "n":2,"epsilon":3,"k_GHz":[0.1]})");
        CHECK_THROWS_AS(model_from_json(j), ConfigError);
    }
}

TEST_CASE("config key checking", "[io]") {
    const json j = json::parse(R"({"a": 1, "b": 2})");
    CHECK_NOTHROW(check_keys(j, {"a", "b", "c"}, "test config"));
    CHECK_THROWS_WITH(check_keys(j, {"a"}, "test config"),
                      Catch::Matchers::ContainsSubstring("'b'"));
    CHECK_THROWS_WITH(require_key(j, "missing", "test config"),
                      Catch::Matchers::ContainsSubstring("missing"));
    CHECK(get_number_or(j, "a", 7.0) == 1.0);
    CHECK(get_number_or(j, "z", 7.0) == 7.0);
}

TEST_CASE("CSV records use CRLF and shortest round-trip doubles", "[io]") {
    const fs::path path = temp_dir() / "fmt.csv";
    {
        CsvWriter csv(path.string());
        csv.header({"a", "b"});
        csv.row(0.1, std::string("x,y"));
        csv.close();
    }
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "a,b\r\n0.1,\"x,y\"\r\n");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("scan sidecar carries crossings, width and qualification", "[io]") {
    auto pe = [](double x) { return 0.9995 * std::exp(-(x / 0.05) * (x / 0.05)); };
    ScanConfig cfg;
    cfg.coarse_step = 1e-3;
    cfg.bisect_tol = 1e-6;
    const ScanCurve curve = scan_function(ScanAxis::Detuning, cfg, pe);
    const json sidecar = scan_sidecar_json(curve);
    CHECK(sidecar["qualified"].get<bool>());
    CHECK(sidecar["width_GHz"].get<double>() == Approx(0.009772518).margin(3e-6));
    CHECK(sidecar["crossings_GHz"].size() == 2);
    CHECK(sidecar["intervals"].size() == 1);
}

TEST_CASE("archive CSV round trip", "[io]") {
    ParetoArchive archive;
    archive.family = "SECH3";
    archive.t_ns = 50.0;
    archive.seed = 42;
    for (int i = 0; i < 5; ++i) {
        ParetoEntry e;
        e.genes = {0.01 * (i + 1), 0.995, 2.0, 0.161, 1.92};
        e.obj = {1e-4 * i, 0.01 * (i + 1), true};
        e.rank = 1;
        e.crowding = 0.5;
        archive.entries.push_back(std::move(e));
    }
    const fs::path path = temp_dir() / "archive.csv";
    const std::vector<double> amp = {0.01, 0.02, 0.03, 0.04, 0.05};
    write_archive_csv(path.string(), archive, &amp);
    const ParetoArchive back = read_archive_csv(path.string());
    CHECK(back.family == "SECH3");
    CHECK(back.t_ns == 50.0);
    REQUIRE(back.entries.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(back.entries[i].genes == archive.entries[i].genes);
        CHECK(back.entries[i].obj.det_rob == archive.entries[i].obj.det_rob);
    }
}

TEST_CASE("empty front writes an explicit marker row", "[io]") {
    ParetoArchive archive;
    archive.family = "SG1";
    archive.t_ns = 200.0;
    const fs::path path = temp_dir() / "empty.csv";
    write_archive_csv(path.string(), archive);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(row.find("empty_front") != std::string::npos);
    const ParetoArchive back = read_archive_csv(path.string());
    CHECK(back.entries.empty());
    CHECK(back.family == "SG1");
}

TEST_CASE("morris ratio table layout", "[io]") {
    std::vector<SensitivityRecord> records;
    for (const char* param : {"omega0", "n", "epsilon", "k1", "gamma1"}) {
        SensitivityRecord r;
        r.model = "SECH3";
        r.t_ns = 50.0;
        r.output = MorrisOutput::MaxPf;
        r.param = param;
        r.ratio = param == std::string("epsilon") ? -1.0 : 1.0;
        r.n_valid = 10;
        records.push_back(r);
    }
    const fs::path path = temp_dir() / "ratios.csv";
    write_morris_ratio_csv(path.string(), MorrisOutput::MaxPf, records);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.find("beta_epsilon") != std::string::npos);
    // SECH3 has no k2..k5/gamma2: those cells are empty
    CHECK(row.find("SECH3,50,1,1,-1,1,,,,,1,") != std::string::npos);
}

TEST_CASE("manifest records reproducibility metadata", "[io]") {
    const fs::path dir = temp_dir();
    json cfg;
    cfg["seed"] = 7;
    write_manifest(dir, "pareto", cfg, 2);
    const json m = load_json_file((dir / "manifest.json").string());
    CHECK(m["command"] == "pareto");
    CHECK(m["config"]["seed"] == 7);
    CHECK(m["threads"] == 2);
    CHECK(m["artifact_version"].get<std::string>() == kVersion);
    CHECK(m["units"].get<std::string>().find("GHz") != std::string::npos);
    CHECK(m["assumptions"].contains("max_pf_delta_GHz"));
}
