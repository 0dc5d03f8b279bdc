#include "doctest.h"

#include "chaosmap/errors.hpp"
#include "chaosmap/lyapunov.hpp"
#include "chaosmap/models.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace chaosmap;

namespace {

SamplePoint at(const SystemDefinition& sys, Vector y)
{
    SamplePoint s = default_point(sys);
    s.initial_state = std::move(y);
    return s;
}

}  // namespace

TEST_CASE("linear system: exact spectrum")
{
    auto sys = make_linear_diag();
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    auto spec = spectrum_fixed_T(*sys, at(*sys, {1, 1}), 100.0, cfg, 10);
    REQUIRE(spec);
    CHECK(std::abs((*spec)[0] + 1.0) <= 1e-6);
    CHECK(std::abs((*spec)[1] + 2.0) <= 1e-6);

    auto spec2 = spectrum_fixed_T(*sys, at(*sys, {1, 1}), 200.0, cfg, 10);
    REQUIRE(spec2);
    CHECK(std::abs((*spec)[0] - (*spec2)[0]) <= 1e-8);
    CHECK(std::abs((*spec)[1] - (*spec2)[1]) <= 1e-8);
}

TEST_CASE("spectrum is sorted regardless of column order")
{
    auto sys = make_linear_diag(-3.0, 0.5);
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    auto spec = spectrum_fixed_T(*sys, at(*sys, {1, 1}), 20.0, cfg, 10);
    REQUIRE(spec);
    CHECK((*spec)[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK((*spec)[1] == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("doubling on the linear system converges after one doubling")
{
    auto sys = make_linear_diag();
    LyapunovConfig cfg;
    cfg.integration.dt = 1e-3;
    cfg.T0 = 100.0;
    LyapunovResult r = spectrum_with_doubling(*sys, at(*sys, {1, 1}), cfg);
    CHECK(r.converged);
    CHECK(r.doublings == 1);
    CHECK(r.t_final == 200.0);
    CHECK(r.signs == SignPattern{0, 0, 2});
    CHECK(r.mle == r.spectrum[0]);
    CHECK(std::abs(r.spectrum[0] + 1.0) <= 1e-6);
    CHECK(std::abs(r.spectrum[1] + 2.0) <= 1e-6);
    CHECK(r.t_final == cfg.T0 * std::pow(2.0, r.doublings));
}

TEST_CASE("Lorenz: spectrum against independent oracles")
{
    auto sys = make_lorenz();
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    auto spec = spectrum_fixed_T(*sys, at(*sys, {1, 1, 1}), 500.0, cfg, 10);
    REQUIRE(spec);
    const double oracle = testing::two_trajectory_mle(*sys, sys->default_params(), {1, 1, 1}, 500.0, 1e-3, 50.0);
    CHECK(oracle >= 0.8);
    CHECK(oracle <= 1.0);
    CHECK((*spec)[0] >= 0.8);
    CHECK((*spec)[0] <= 1.0);
    CHECK(std::abs((*spec)[0] - oracle) <= 0.05);
    const double sum = (*spec)[0] + (*spec)[1] + (*spec)[2];
    const double divergence = -(10.0 + 1.0 + 8.0 / 3.0);
    CHECK(std::abs(sum - divergence) <= 0.02 * std::abs(divergence));
    CHECK(std::abs((*spec)[1]) <= 0.01);  // exponent along the flow
}

TEST_CASE("blowup gives a non-converged NaN result")
{
    auto sys = make_square_blowup();
    LyapunovConfig cfg;
    CHECK_FALSE(spectrum_fixed_T(*sys, default_point(*sys), 10.0, cfg.integration, 10).has_value());
    LyapunovResult r = spectrum_with_doubling(*sys, default_point(*sys), cfg);
    CHECK_FALSE(r.converged);
    CHECK(std::isnan(r.mle));
    CHECK(r.spectrum.empty());
    CHECK(classify(divergence_at(*sys, default_point(*sys)), r) != Classification::chaotic);
    CHECK(to_json(r)["mle"].is_null());
}

TEST_CASE("sign patterns use the zero band")
{
    const Vector s{0.5, 5e-4, -5e-4, -0.002};
    CHECK(sign_pattern(s, 1e-3) == SignPattern{1, 2, 1});
    CHECK(sign_pattern(s, 1e-4) == SignPattern{2, 0, 2});
}

TEST_CASE("classify")
{
    LyapunovResult converged;
    converged.spectrum = {0.05, -1};
    converged.mle = 0.05;
    converged.converged = true;
    LyapunovResult open = converged;
    open.converged = false;

    CHECK(classify(-1.0, converged) == Classification::chaotic);
    CHECK(classify(0.1, converged) == Classification::non_chaotic);
    CHECK(classify(-1.0, open) == Classification::indeterminate);
    LyapunovResult small = converged;
    small.mle = 5e-4;
    CHECK(classify(-1.0, small) == Classification::non_chaotic);
    CHECK(classify(-1.0, small, 1e-4) == Classification::chaotic);
    // Pure: repeated calls agree.
    for (int i = 0; i < 10; ++i)
        CHECK(classify(-1.0, converged) == Classification::chaotic);
    CHECK(std::string(to_string(Classification::indeterminate)) == "indeterminate");
}

TEST_CASE("configuration validation")
{
    auto sys = make_linear_diag();
    LyapunovConfig cfg;
    cfg.T0 = 0.0;
    CHECK_THROWS_AS(spectrum_with_doubling(*sys, default_point(*sys), cfg), ContractError);
    cfg = {};
    cfg.max_doublings = 0;
    CHECK_THROWS_AS(spectrum_with_doubling(*sys, default_point(*sys), cfg), ContractError);
    cfg = {};
    cfg.renorm_every = 0;
    CHECK_THROWS_AS(spectrum_with_doubling(*sys, default_point(*sys), cfg), ContractError);
}

TEST_CASE("result JSON")
{
    auto sys = make_linear_diag();
    LyapunovConfig cfg;
    cfg.T0 = 10.0;
    auto j = to_json(spectrum_with_doubling(*sys, at(*sys, {1, 1}), cfg));
    for (const char* key : {"spectrum", "mle", "t_final", "doublings", "converged", "sign_pattern"})
        CHECK(j.contains(key));
    CHECK(j["sign_pattern"] == nlohmann::json::array({0, 0, 2}));
}
