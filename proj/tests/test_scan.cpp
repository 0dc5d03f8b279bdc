#include "doctest.h"

#include "chaosmap/errors.hpp"
#include "chaosmap/models.hpp"
#include "chaosmap/scan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace chaosmap;

namespace {

BifurcationConfig relax_cfg(int points, int samples)
{
    BifurcationConfig c;
    c.param_name = "p";
    c.lo = -1.0;
    c.hi = 2.0;
    c.n_param_points = points;
    c.t_total = 50.0;
    c.window_start = 40.0;
    c.window_samples = samples;
    return c;
}

IntegrationConfig coarse()
{
    IntegrationConfig c;
    c.dt = 1e-2;
    return c;
}

}  // namespace

TEST_CASE("parameter grid")
{
    CHECK(parameter_grid(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parameter_grid(3.0, 7.0, 1) == std::vector<double>{3.0});
    auto g = parameter_grid(0.1, 0.7, 7);
    CHECK(g.front() == 0.1);
    CHECK(g.back() == 0.7);
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(g[i] - g[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("window times")
{
    BifurcationConfig c = relax_cfg(2, 11);
    auto w = window_times(c);
    REQUIRE(w.size() == 11);
    CHECK(w.front() == 40.0);
    CHECK(w.back() == 50.0);
    c.window_samples = 1;
    CHECK(window_times(c) == std::vector<double>{50.0});
}

TEST_CASE("relaxation settles on its fixed point at every grid value")
{
    auto sys = make_relaxation();
    ScanResult r = bifurcation_scan(*sys, default_point(*sys), relax_cfg(4, 5), coarse());
    CHECK(r.param_name == "p");
    REQUIRE(r.columns.size() == 4);
    for (const auto& col : r.columns) {
        CHECK_FALSE(col.flagged);
        CHECK(col.observable == "y");
        REQUIRE(col.values.size() == 5);
        CHECK(col.times.size() == 5);
        for (double v : col.values)
            CHECK(std::abs(v - col.param_value) <= 1e-6);
    }
}

TEST_CASE("a single window sample is the final state")
{
    auto sys = make_relaxation();
    ScanResult r = bifurcation_scan(*sys, default_point(*sys), relax_cfg(3, 1), coarse());
    for (const auto& col : r.columns) {
        REQUIRE(col.values.size() == 1);
        CHECK(col.times[0] == 50.0);
    }
}

TEST_CASE("blowup flags only the affected columns")
{
    // y' = k y^2 from y = 1 blows up at t = 1/k; k = 0 stays put.
    auto sys = make_square_blowup();
    BifurcationConfig c;
    c.param_name = "k";
    c.lo = 0.0;
    c.hi = 1.0;
    c.n_param_points = 3;
    c.t_total = 5.0;
    c.window_start = 4.0;
    c.window_samples = 3;
    ScanResult r = bifurcation_scan(*sys, default_point(*sys), c, coarse());
    REQUIRE(r.columns.size() == 3);
    CHECK_FALSE(r.columns[0].flagged);
    CHECK(r.columns[0].values == std::vector<double>{1.0, 1.0, 1.0});
    for (int i : {1, 2}) {
        CHECK(r.columns[i].flagged);
        CHECK(r.columns[i].values.empty());
        CHECK(r.columns[i].reason == Termination::blowup);
    }
    std::ostringstream csv;
    write_scan_csv(csv, r);
    CHECK(csv.str().find("0.5,y,,blowup\n") != std::string::npos);
    CHECK(to_json(r)["columns"][1]["flagged"] == true);
}

TEST_CASE("observables select states and shape the output")
{
    auto sys = make_lorenz();
    SamplePoint base = default_point(*sys);
    base.initial_state = {1, 1, 1};
    BifurcationConfig c;
    c.param_name = "r";
    c.lo = 10;
    c.hi = 30;
    c.n_param_points = 3;
    c.t_total = 20;
    c.window_start = 15;
    c.window_samples = 6;
    c.observables = {"z", "x"};
    ScanResult r = bifurcation_scan(*sys, base, c, coarse());
    REQUIRE(r.columns.size() == 6);
    CHECK(r.columns[0].observable == "z");
    CHECK(r.columns[1].observable == "x");
    CHECK(r.columns[0].param_value == r.columns[1].param_value);
    CHECK(r.columns[2].param_value == 20.0);

    c.observables = {};
    CHECK(bifurcation_scan(*sys, base, c, coarse()).columns.size() == 9);
}

TEST_CASE("scan output does not depend on the worker count")
{
    auto sys = make_kot_monod_default();
    BifurcationConfig c;
    c.param_name = "eps";
    c.lo = 0.0;
    c.hi = 0.6;
    c.n_param_points = 7;
    c.t_total = 60;
    c.window_start = 40;
    c.window_samples = 20;
    std::ostringstream a, b;
    write_scan_csv(a, bifurcation_scan(*sys, default_point(*sys), c, coarse(), 1));
    write_scan_csv(b, bifurcation_scan(*sys, default_point(*sys), c, coarse(), 4));
    CHECK(a.str() == b.str());
}

TEST_CASE("scan configuration is validated")
{
    auto sys = make_relaxation();
    BifurcationConfig c = relax_cfg(3, 3);
    c.param_name = "nope";
    CHECK_THROWS_AS(validate(*sys, c), ContractError);
    c = relax_cfg(0, 3);
    CHECK_THROWS_AS(validate(*sys, c), ContractError);
    c = relax_cfg(3, 0);
    CHECK_THROWS_AS(validate(*sys, c), ContractError);
    c = relax_cfg(3, 3);
    c.window_start = 60.0;
    CHECK_THROWS_AS(validate(*sys, c), ContractError);
    c = relax_cfg(3, 3);
    c.observables = {"q"};
    CHECK_THROWS_AS(validate(*sys, c), ContractError);
    CHECK_NOTHROW(validate(*sys, relax_cfg(3, 3)));
}

TEST_CASE("trajectory export")
{
    SUBCASE("stable linear system decays monotonically")
    {
        auto sys = make_linear_diag();
        SamplePoint s = default_point(*sys);
        s.initial_state = {1, 1};
        std::ostringstream out;
        Trajectory tr = export_trajectory(out, *sys, s, 5.0, coarse(), 10);
        CHECK(tr.times.size() == 51);
        for (std::size_t i = 1; i < tr.states.size(); ++i) {
            CHECK(tr.states[i][0] < tr.states[i - 1][0]);
            CHECK(tr.states[i][1] < tr.states[i - 1][1]);
        }
        CHECK(out.str().rfind("t,y1,y2\n", 0) == 0);
    }
    SUBCASE("forced chemostat orbit stays bounded and keeps moving")
    {
        auto sys = make_kot_monod_default();
        std::ostringstream out;
        Trajectory tr = export_trajectory(out, *sys, default_point(*sys), 200.0, coarse(), 5);
        CHECK_FALSE(tr.terminated_early);
        for (const auto& row : tr.states)
            for (double v : row) {
                CHECK(v >= -1e-9);
                CHECK(v <= 10.0);
            }
        const std::size_t tail = tr.states.size() / 10;
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = tr.states.size() - tail; i < tr.states.size(); ++i) {
            lo = std::min(lo, tr.states[i][0]);
            hi = std::max(hi, tr.states[i][0]);
        }
        CHECK(hi - lo > 1e-3);
    }
    SUBCASE("stride must be positive")
    {
        auto sys = make_linear_diag();
        std::ostringstream out;
        CHECK_THROWS_AS(export_trajectory(out, *sys, default_point(*sys), 1.0, coarse(), 0), ContractError);
    }
}
