// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qpp/pulse.hpp"

using namespace qpp;
using Catch::Approx;

namespace {

// uniform draw inside the search box of a family
std::vector<double> random_genes(const ModelFamily& fam, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> g;
    for (const auto& b : gene_bounds(fam))
        g.push_back(b.ga_lo() + u(rng) * (b.ga_hi() - b.ga_lo()));
    return g;
}

} // namespace

TEST_CASE("envelope endpoint construction", "[pulse]") {
    std::mt19937_64 rng(7);
    for (const auto& fam : model_families()) {
        for (int rep = 0; rep < 20; ++rep) {
            const double T = rep % 2 ? 50.0 : 200.0;
            const PulseModel m = model_from_vector(fam.name, random_genes(fam, rng), T);
            CHECK(envelope_value(m.envelope, 0.0, T) == m.envelope.omega0);
            CHECK(envelope_value(m.envelope, T / 2, T) == 0.0);
            CHECK(envelope_value(m.envelope, -T / 2, T) == 0.0);
            CHECK(detuning_value(m.detuning, 0.0, T, 0.125) == 0.125);
        }
    }
}

TEST_CASE("envelope closed-form value", "[pulse]") {
    // super-Gaussian, omega0 = 0.1, n = 2, beta = -6, t = T/4:
    // 0.1 * (exp(-6/4) - exp(-6)) / (1 - exp(-6)), evaluated independently
    EnvelopeParams env{EnvelopeKind::SuperGaussian, 0.1, 2.0, -6.0};
    CHECK(envelope_value(env, 12.5, 50.0) ==
          Approx(0.022119970722753168).epsilon(1e-14));
    // nonnegative across the window
    for (int i = 0; i <= 100; ++i) {
        const double t = -25.0 + 0.5 * i;
        CHECK(envelope_value(env, t, 50.0) >= 0.0);
    }
}

TEST_CASE("envelope domain error outside the window", "[pulse]") {
    EnvelopeParams env{EnvelopeKind::Sech, 0.1, 1.0, 2.0};
    CHECK_THROWS_AS(envelope_value(env, 25.0001, 50.0), NumericalError);
    CHECK_THROWS_AS(envelope_value(env, -26.0, 50.0), NumericalError);
}

TEST_CASE("detuning closed-form values", "[pulse]") {
    SECTION("linear endpoint") {
        DetuningParams det{DetuningKind::Linear, {0.3}, {}};
        CHECK(detuning_value(det, 25.0, 50.0, 0.0) == Approx(0.3).epsilon(1e-15));
    }
    SECTION("tanh-sech at T/2") {
        // 0.1*tanh(4) + 0.05*(sech(4) - 1), evaluated independently
        DetuningParams det{DetuningKind::TanhSech, {0.1, 0.05}, {4.0, 4.0}};
        CHECK(detuning_value(det, 25.0, 50.0, 0.0) ==
              Approx(0.051763879647591031).epsilon(1e-14));
    }
    SECTION("quintic matches the monomial sum") {
        DetuningParams det{DetuningKind::Quintic, {0.1, -0.05, 0.02, 0.08, -0.03}, {}};
        const double T = 80.0, t = 13.0, x = 2.0 * t / T;
        double ref = 0.0;
        for (int j = 1; j <= 5; ++j) ref += det.k[j - 1] * std::pow(x, j);
        CHECK(detuning_value(det, t, T, 0.01) == Approx(ref + 0.01).epsilon(1e-14));
    }
}

TEST_CASE("envelope parity and detuning antisymmetry", "[pulse]") {
    std::mt19937_64 rng(11);
    for (const auto& fam : model_families()) {
        const double T = 120.0;
        auto genes = random_genes(fam, rng);
        PulseModel m = model_from_vector(fam.name, genes, T);
        // quintic becomes odd once the even-power terms are removed
        if (fam.detuning == DetuningKind::Quintic)
            m.detuning.k[1] = m.detuning.k[3] = 0.0;
        const bool odd_kind = fam.detuning != DetuningKind::TanhSech;
        for (int i = 1; i < 40; ++i) {
            const double t = T / 2 * i / 40.0;
            CHECK(envelope_value(m.envelope, -t, T) ==
                  Approx(envelope_value(m.envelope, t, T)).margin(1e-15));
            if (odd_kind) {
                CHECK(detuning_value(m.detuning, -t, T, 0.0) ==
                      Approx(-detuning_value(m.detuning, t, T, 0.0)).margin(1e-15));
            }
        }
    }
}

TEST_CASE("detuning slope matches finite differences", "[pulse]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.45, 0.45);
    for (const auto& fam : model_families()) {
        const double T = 64.0;
        const PulseModel m = model_from_vector(fam.name, random_genes(fam, rng), T);
        for (int rep = 0; rep < 10; ++rep) {
            const double t = u(rng) * T;
            const double h = 1e-6 * T;
            const double fd = (detuning_value(m.detuning, t + h, T, 0.0) -
                               detuning_value(m.detuning, t - h, T, 0.0)) /
                              (2 * h);
            const double an = detuning_slope(m.detuning, t, T);
            CHECK(an == Approx(fd).epsilon(1e-6).margin(1e-12));
        }
    }
}

TEST_CASE("validate accepts in-range models and reports violations", "[pulse]") {
    PulseModel ok = model_from_vector("SG1", std::vector<double>{0.05, 2.0, -3.0, 0.1}, 50.0);
    CHECK(validate(ok).empty());

    PulseModel bad = ok;
    bad.envelope.omega0 = 0.2;
    const auto issues = validate(bad);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("omega0") != std::string::npos);
    CHECK(issues[0].find("[0, 0.1]") != std::string::npos);
    CHECK(issues[0].find("GHz") != std::string::npos);

    PulseModel sech3 =
        model_from_vector("SECH3", std::vector<double>{0.05, 1.0, 2.0, 0.1, 0.0}, 50.0);
    const auto gamma_issues = validate(sech3);
    REQUIRE(gamma_issues.size() == 1);
    CHECK(gamma_issues[0].find("gamma1") != std::string::npos);
    CHECK(gamma_issues[0].find("(0, 8]") != std::string::npos);

    // open bounds reject sign flips rather than silently negating
    PulseModel flipped = ok;
    flipped.envelope.shape = 3.0; // beta must stay negative
    CHECK_FALSE(validate(flipped).empty());
}

TEST_CASE("model_from_vector maps the paper SECH3 pulses", "[pulse]") {
    const PulseModel m50 =
        model_from_vector("SECH3", std::vector<double>{0.1, 0.995, 2.0, -0.161, 1.92}, 50.0);
    CHECK(m50.envelope.kind == EnvelopeKind::Sech);
    CHECK(m50.detuning.kind == DetuningKind::Tanh);
    CHECK(m50.envelope.omega0 == 0.1);
    CHECK(m50.envelope.order == 0.995);
    CHECK(m50.envelope.shape == 2.0);
    CHECK(m50.detuning.k[0] == -0.161);
    CHECK(m50.detuning.gamma[0] == 1.92);
    CHECK(m50.duration_t == 50.0);

    const PulseModel m200 = model_from_vector(
        "SECH3", std::vector<double>{0.0582, 1.14, 3.15, -0.152, 2.92}, 200.0);
    CHECK(m200.detuning.k[0] == -0.152);
    CHECK(m200.duration_t == 200.0);
}

TEST_CASE("model_from_vector arity and name errors", "[pulse]") {
    CHECK_THROWS_AS(
        model_from_vector("SG1", std::vector<double>{0.05, 2.0, -3.0, 0.1, 1.0}, 50.0),
        ArityError);
    CHECK_THROWS_AS(model_from_vector("SG9", std::vector<double>{0.05, 2.0, -3.0, 0.1}, 50.0),
                    ConfigError);
}

TEST_CASE("vector round trip is the identity", "[pulse]") {
    std::mt19937_64 rng(17);
    for (const auto& fam : model_families()) {
        for (int rep = 0; rep < 25; ++rep) {
            const auto genes = random_genes(fam, rng);
            const PulseModel m = model_from_vector(fam.name, genes, 50.0);
            CHECK(vector_from_model(m) == genes);
            CHECK(validate(m).empty());
        }
    }
}

TEST_CASE("gene counts per family", "[pulse]") {
    CHECK(model_family("SG1").num_genes == 4);
    CHECK(model_family("SECH1").num_genes == 4);
    CHECK(model_family("SG2").num_genes == 8);
    CHECK(model_family("SECH2").num_genes == 8);
    CHECK(model_family("SG3").num_genes == 5);
    CHECK(model_family("SECH3").num_genes == 5);
    CHECK(model_family("SG4").num_genes == 7);
    CHECK(model_family("SECH4").num_genes == 7);
}
