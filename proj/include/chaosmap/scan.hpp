#pragma once

#include "chaosmap/integrator.hpp"
#include "chaosmap/model.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace chaosmap {

struct BifurcationConfig {
    std::string param_name;
    double lo = 0.0;
    double hi = 1.0;
    int n_param_points = 10;
    double t_total = 7500.0;
    double window_start = 7000.0;
    int window_samples = 500;
    std::vector<std::string> observables;  // state names; empty means all states
};

void validate(const SystemDefinition& system, const BifurcationConfig& cfg);

/// Evenly spaced grid over [lo, hi] including both ends (just lo when n = 1).
std::vector<double> parameter_grid(double lo, double hi, int n);

/// Evenly spaced sample times over [window_start, t_total] (just t_total when
/// window_samples = 1).
std::vector<double> window_times(const BifurcationConfig& cfg);

/// Long-run values of one observable at one parameter value. A run that blows
/// up leaves `times`/`values` empty and sets `flagged`.
struct ScanColumn {
    double param_value = 0.0;
    std::string observable;
    std::vector<double> times;
    std::vector<double> values;
    bool flagged = false;
    Termination reason = Termination::completed;
};

struct ScanResult {
    std::string param_name;
    std::vector<ScanColumn> columns;  // grid order, then observable order
};

/// For each grid value, integrates from `base` (same initial state every time)
/// and samples each observable on the window. Parameter values run on a pool
/// of `workers` threads; output is in grid order.
ScanResult bifurcation_scan(const SystemDefinition& system, const SamplePoint& base,
                            const BifurcationConfig& cfg, const IntegrationConfig& int_cfg,
                            int workers = 1);

/// Long format `param_value,observable,t,value`. A flagged column is one row
/// with an empty t and the termination reason in the value field.
void write_scan_csv(std::ostream& out, const ScanResult& result);

/// {param_name, columns: [{param_value, observable, times, values, flagged, reason}]}.
nlohmann::json to_json(const ScanResult& result);

/// Integrates with the given stride and writes the trajectory CSV.
Trajectory export_trajectory(std::ostream& out, const SystemDefinition& system,
                             const SamplePoint& sample, double t_end,
                             const IntegrationConfig& int_cfg, int stride);

}  // namespace chaosmap
