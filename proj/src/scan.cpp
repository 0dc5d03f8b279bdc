#include "chaosmap/scan.hpp"

#include "chaosmap/errors.hpp"
#include "chaosmap/io.hpp"
#include "chaosmap/worker_pool.hpp"

#include <cmath>
#include <ostream>

namespace chaosmap {

void validate(const SystemDefinition& system, const BifurcationConfig& cfg)
{
    require(system.param_index(cfg.param_name).has_value(),
            "unknown parameter '" + cfg.param_name + "' for system '" + system.id() + "'");
    require(std::isfinite(cfg.lo) && std::isfinite(cfg.hi) && cfg.lo < cfg.hi,
            "bifurcation: need lo < hi");
    require(cfg.n_param_points >= 1, "bifurcation: n_param_points must be >= 1");
    require(cfg.window_samples >= 1, "bifurcation: window_samples must be >= 1");
    require(cfg.window_start >= 0.0 && cfg.window_start < cfg.t_total,
            "bifurcation: need 0 <= window_start < t_total");
    for (const auto& o : cfg.observables)
        require(system.state_index(o).has_value(),
                "unknown observable '" + o + "' for system '" + system.id() + "'");
}

std::vector<double> parameter_grid(double lo, double hi, int n)
{
    require(n >= 1, "parameter_grid: n must be >= 1");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    g.back() = hi;
    return g;
}

std::vector<double> window_times(const BifurcationConfig& cfg)
{
    if (cfg.window_samples == 1)
        return {cfg.t_total};
    return parameter_grid(cfg.window_start, cfg.t_total, cfg.window_samples);
}

namespace {

struct Run {
    std::vector<Vector> states;  // one per window time
    bool flagged = false;
    Termination reason = Termination::completed;
};

Run run_one(const SystemDefinition& system, SamplePoint point, const std::vector<double>& times,
            IntegrationConfig cfg)
{
    Run run;
    cfg.record_stride = 0;
    for (double t : times) {
        if (t > cfg.t0) {
            const Trajectory tr = integrate(system, point, t, cfg);
            if (tr.terminated_early) {
                run.flagged = true;
                run.reason = tr.termination_reason;
                run.states.clear();
                return run;
            }
            point.initial_state = tr.states.back();
            cfg.t0 = t;
        }
        run.states.push_back(point.initial_state);
    }
    return run;
}

}  // namespace

ScanResult bifurcation_scan(const SystemDefinition& system, const SamplePoint& base,
                            const BifurcationConfig& cfg, const IntegrationConfig& int_cfg,
                            int workers)
{
    validate(system, cfg);
    validate(int_cfg);
    validate_point(system, base);
    require(workers >= 1, "bifurcation: workers must be >= 1");

    const std::size_t pindex = *system.param_index(cfg.param_name);
    std::vector<std::size_t> obs;
    std::vector<std::string> obs_names = cfg.observables;
    if (obs_names.empty())
        obs_names = system.state_names();
    for (const auto& o : obs_names)
        obs.push_back(*system.state_index(o));

    const auto grid = parameter_grid(cfg.lo, cfg.hi, cfg.n_param_points);
    auto times = window_times(cfg);
    IntegrationConfig run_cfg = int_cfg;
    run_cfg.t0 = 0.0;

    std::vector<Run> runs(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        SamplePoint p = base;
        p.param_values[pindex] = grid[i];
        runs[i] = run_one(system, std::move(p), times, run_cfg);
    });

    ScanResult result;
    result.param_name = cfg.param_name;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k < obs.size(); ++k) {
            ScanColumn col;
            col.param_value = grid[i];
            col.observable = obs_names[k];
            col.flagged = runs[i].flagged;
            col.reason = runs[i].reason;
            if (!col.flagged) {
                col.times = times;
                col.values.reserve(times.size());
                for (const auto& s : runs[i].states)
                    col.values.push_back(s[obs[k]]);
            }
            result.columns.push_back(std::move(col));
        }
    }
    return result;
}

void write_scan_csv(std::ostream& out, const ScanResult& result)
{
    out << "param_value,observable,t,value\n";
    for (const auto& col : result.columns) {
        const std::string p = format_double(col.param_value);
        if (col.flagged) {
            out << p << ',' << col.observable << ",," << to_string(col.reason) << '\n';
            continue;
        }
        for (std::size_t j = 0; j < col.values.size(); ++j)
            out << p << ',' << col.observable << ',' << format_double(col.times[j]) << ','
                << format_double(col.values[j]) << '\n';
    }
}

nlohmann::json to_json(const ScanResult& result)
{
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : result.columns)
        cols.push_back({{"param_value", c.param_value},
                        {"observable", c.observable},
                        {"times", c.times},
                        {"values", c.values},
                        {"flagged", c.flagged},
                        {"reason", to_string(c.reason)}});
    return {{"param_name", result.param_name}, {"columns", std::move(cols)}};
}

Trajectory export_trajectory(std::ostream& out, const SystemDefinition& system,
                             const SamplePoint& sample, double t_end,
                             const IntegrationConfig& int_cfg, int stride)
{
    require(stride >= 1, "export_trajectory: stride must be >= 1");
    IntegrationConfig cfg = int_cfg;
    cfg.record_stride = stride;
    Trajectory tr = integrate(system, sample, t_end, cfg);
    write_trajectory_csv(out, system, tr);
    return tr;
}

}  // namespace chaosmap
