#include "doctest.h"

#include "chaosmap/errors.hpp"
#include "chaosmap/integrator.hpp"
#include "chaosmap/models.hpp"

#include "support.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace chaosmap;

namespace {

SamplePoint at(const SystemDefinition& sys, Vector y)
{
    SamplePoint s = default_point(sys);
    s.initial_state = std::move(y);
    return s;
}

Vector identity(std::size_t n)
{
    Vector I(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        I[i * n + i] = 1.0;
    return I;
}

double gram_deviation(const Vector& M, std::size_t n)
{
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dot += M[i * n + a] * M[i * n + b];
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

}  // namespace

TEST_CASE("exponential decay matches the closed form")
{
    auto sys = make_relaxation(0.0);
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    Trajectory tr = integrate(*sys, at(*sys, {1.0}), 1.0, cfg);
    CHECK_FALSE(tr.terminated_early);
    CHECK(tr.termination_reason == Termination::completed);
    CHECK(tr.times.back() == 1.0);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-1.0)) <= 1e-9);
}

TEST_CASE("RK4 global error shrinks sixteenfold when dt halves")
{
    auto sys = make_relaxation(0.0);
    auto err = [&](double dt) {
        IntegrationConfig cfg;
        cfg.dt = dt;
        return std::abs(integrate(*sys, at(*sys, {1.0}), 1.0, cfg).states.back()[0] - std::exp(-1.0));
    };
    for (double dt : {0.1, 0.05, 0.02}) {
        const double ratio = err(dt) / err(dt / 2);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }
}

TEST_CASE("steps agree with an independent RK4 implementation")
{
    auto sys = make_lorenz();
    const Vector y0{1.0, 1.0, 1.0};
    const Vector p = sys->default_params();
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    Vector lib = integrate(*sys, at(*sys, y0), 2.0, cfg).states.back();
    Vector ref = testing::rk4_reference(
        [&](double t, const Vector& y) {
            Vector f(3);
            sys->rhs(t, y, p, f);
            return f;
        },
        y0, 2.0, 2000);
    for (int i = 0; i < 3; ++i)
        CHECK(lib[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("the last step is shortened to land on t_end")
{
    auto sys = make_relaxation(0.0);
    IntegrationConfig cfg;
    cfg.dt = 0.3;
    cfg.record_stride = 1;
    Trajectory tr = integrate(*sys, at(*sys, {1.0}), 1.0, cfg);
    CHECK(tr.times == std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0});
    for (std::size_t i = 1; i < tr.times.size(); ++i)
        CHECK(tr.times[i] > tr.times[i - 1]);
    CHECK(step_count(0.0, 1.0, 0.3) == 4);
    CHECK(step_count(0.0, 1.0, 0.1) == 10);
    CHECK(step_count(0.0, 1.0, 1e-3) == 1000);
}

TEST_CASE("record stride keeps start, every stride-th step and the end")
{
    auto sys = make_relaxation(0.0);
    IntegrationConfig cfg;
    cfg.dt = 0.1;
    cfg.record_stride = 3;
    Trajectory tr = integrate(*sys, at(*sys, {1.0}), 1.0, cfg);
    CHECK(tr.times.size() == 5);  // 0, 0.3, 0.6, 0.9, 1.0
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.0);
    cfg.record_stride = 0;
    CHECK(integrate(*sys, at(*sys, {1.0}), 1.0, cfg).states.size() == 1);
}

TEST_CASE("zero field leaves the state unchanged")
{
    auto sys = make_quadratic3({});
    IntegrationConfig cfg;
    cfg.record_stride = 10;
    Trajectory tr = integrate(*sys, at(*sys, {1, -2, 3}), 5.0, cfg);
    CHECK(tr.termination_reason == Termination::completed);
    for (const auto& row : tr.states)
        CHECK(row == Vector{1, -2, 3});
}

TEST_CASE("finite-time singularity terminates with reason blowup")
{
    auto sys = make_square_blowup();
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    cfg.record_stride = 1;
    Trajectory tr = integrate(*sys, at(*sys, {1.0}), 2.0, cfg);
    CHECK(tr.terminated_early);
    CHECK(tr.termination_reason == Termination::blowup);
    CHECK(tr.times.back() < 1.01);  // singularity at t = 1, lagged slightly by the discretization
    CHECK(tr.times.size() == tr.states.size());
    for (const auto& row : tr.states) {
        CHECK(std::isfinite(row[0]));
        CHECK(std::abs(row[0]) <= cfg.blowup_cap);
    }
}

TEST_CASE("non-finite derivatives terminate with reason nonfinite")
{
    auto sys = std::make_shared<const SystemDefinition>(
        "nan_after_half", std::vector<std::string>{"y"},
        std::vector<ParamDescriptor>{{"k", 1.0, "dimensionless", ""}}, Vector{0.0}, true,
        [](double t, std::span<const double>, std::span<const double>, std::span<double> out) {
            out[0] = t > 0.5 ? std::nan("") : 1.0;
        });
    IntegrationConfig cfg;
    cfg.dt = 0.1;
    cfg.record_stride = 1;
    Trajectory tr = integrate(*sys, default_point(*sys), 1.0, cfg);
    CHECK(tr.terminated_early);
    CHECK(tr.termination_reason == Termination::nonfinite);
    CHECK(tr.times.back() <= 0.5 + 1e-12);
    for (const auto& row : tr.states)
        CHECK(std::isfinite(row[0]));
}

TEST_CASE("integration config is validated")
{
    auto sys = make_relaxation();
    IntegrationConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(integrate(*sys, default_point(*sys), 1.0, cfg), ContractError);
    cfg = {};
    cfg.blowup_cap = -1.0;
    CHECK_THROWS_AS(integrate(*sys, default_point(*sys), 1.0, cfg), ContractError);
    cfg = {};
    CHECK_THROWS_AS(integrate(*sys, default_point(*sys), 0.0, cfg), ContractError);
}

TEST_CASE("augmented integration")
{
    SUBCASE("linear flow: log-norm growth rates are the eigenvalues")
    {
        auto sys = make_linear_diag();
        IntegrationConfig cfg;
        cfg.dt = 1e-3;
        AugmentedResult r = integrate_augmented(*sys, at(*sys, {1, 1}), 10.0, cfg, identity(2), 10);
        CHECK_FALSE(r.terminated_early);
        CHECK(std::abs(r.log_norm_sums[0] / 10.0 + 1.0) <= 1e-6);
        CHECK(std::abs(r.log_norm_sums[1] / 10.0 + 2.0) <= 1e-6);
    }
    SUBCASE("zero field: tangent stays the identity")
    {
        auto sys = make_quadratic3({});
        AugmentedResult r = integrate_augmented(*sys, at(*sys, {1, 2, 3}), 3.0, {}, identity(3), 10);
        CHECK(r.final_tangent == identity(3));
        CHECK(r.log_norm_sums == Vector{0, 0, 0});
    }
    SUBCASE("fiducial orbit is bit-identical to the plain integrator")
    {
        for (auto sys : {make_lorenz(), make_kot_monod_default(), make_becks_rescaled(becks_rescale_params({}, 0.5, 1e-5))}) {
            IntegrationConfig cfg;
            cfg.dt = 1e-2;
            SamplePoint s = default_point(*sys);
            if (sys->id() == "lorenz")
                s.initial_state = {1, 1, 1};
            Vector plain = integrate(*sys, s, 7.3, cfg).states.back();
            AugmentedResult aug = integrate_augmented(*sys, s, 7.3, cfg, identity(sys->dim()), 7);
            CHECK(plain == aug.final_state);
        }
    }
    SUBCASE("columns are orthonormal after every pass")
    {
        auto sys = make_lorenz();
        IntegrationConfig cfg;
        cfg.dt = 1e-3;
        std::size_t passes = 0;
        AugmentedResult r = integrate_augmented(*sys, at(*sys, {1, 1, 1}), 5.0, cfg, identity(3), 10,
                                                [&](std::size_t, double, std::span<const double>) { ++passes; });
        CHECK(passes >= 500);
        CHECK(gram_deviation(r.final_tangent, 3) <= 1e-10);
    }
    SUBCASE("blowup is reported")
    {
        auto sys = make_square_blowup();
        IntegrationConfig cfg;
        cfg.dt = 1e-3;
        AugmentedResult r = integrate_augmented(*sys, at(*sys, {1.0}), 2.0, cfg, identity(1), 10);
        CHECK(r.terminated_early);
        CHECK(r.termination_reason == Termination::blowup);
        CHECK(r.t_reached < 1.01);
    }
    SUBCASE("bad arguments")
    {
        auto sys = make_linear_diag();
        CHECK_THROWS_AS(integrate_augmented(*sys, at(*sys, {1, 1}), 1.0, {}, identity(3), 10), ContractError);
        CHECK_THROWS_AS(integrate_augmented(*sys, at(*sys, {1, 1}), 1.0, {}, identity(2), 0), ContractError);
    }
}

TEST_CASE("modified Gram-Schmidt")
{
    std::mt19937_64 rng(9);
    for (std::size_t n : {1u, 2u, 3u, 4u, 6u}) {
        Vector M(n * n);
        for (double& v : M)
            v = testing::uniform(rng, -3, 3);
        Vector original = M, norms(n);
        orthonormalize_columns(M, n, norms);
        CHECK(gram_deviation(M, n) <= 1e-10);
        // First column keeps its direction; its norm is the raw column norm.
        double norm0 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            norm0 += original[i * n] * original[i * n];
        CHECK(norms[0] == doctest::Approx(std::sqrt(norm0)).epsilon(1e-14));
        // Product of norms is |det|.
        if (n == 2) {
            const double det = original[0] * original[3] - original[1] * original[2];
            CHECK(norms[0] * norms[1] == doctest::Approx(std::abs(det)).epsilon(1e-12));
        }
    }
}

TEST_CASE("trajectory CSV")
{
    auto sys = make_linear_diag();
    IntegrationConfig cfg;
    cfg.dt = 0.5;
    cfg.record_stride = 1;
    std::ostringstream out;
    write_trajectory_csv(out, *sys, integrate(*sys, at(*sys, {1, 1}), 1.0, cfg));
    std::string text = out.str();
    CHECK(text.rfind("t,y1,y2\n0,1,1\n0.5,", 0) == 0);
    CHECK(text.find("terminated_early") == std::string::npos);

    auto blow = make_square_blowup();
    std::ostringstream out2;
    write_trajectory_csv(out2, *blow, integrate(*blow, at(*blow, {1.0}), 2.0, cfg));
    CHECK(out2.str().find("# terminated_early,blowup\n") != std::string::npos);
}
