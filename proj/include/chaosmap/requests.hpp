#pragma once

#include "chaosmap/integrator.hpp"
#include "chaosmap/lyapunov.hpp"
#include "chaosmap/model.hpp"
#include "chaosmap/sampler.hpp"
#include "chaosmap/scan.hpp"

#include "json.hpp"

#include <string_view>

namespace chaosmap {

// JSON run requests shared by the job service and the C API. Every request
// names a system ("system_id", optional "system_config") and may override
// parameters or initial states with "set": {name: value} ("ic.<state>").

enum class JobKind { sample_batch, bifurcation, lyapunov_single };

const char* to_string(JobKind k) noexcept;
JobKind kind_from_string(std::string_view s);

/// Unknown system ids surface as ContractError here.
SystemPtr resolve_system(const nlohmann::json& req);
SamplePoint resolve_base(const SystemDefinition& system, const nlohmann::json& req);

/// {box, k, mh_config, lyap_config}
struct BatchSpec {
    SystemPtr system;
    SearchBox box;
    int k = 0;
    MHConfig mh;
    LyapunovConfig lyap;
    SamplePoint base;
};
BatchSpec resolve_batch(const nlohmann::json& req);

/// {param, lo, hi, points, t_total, window_start, window_samples, observables, integration}
struct ScanSpec {
    SystemPtr system;
    BifurcationConfig cfg;
    IntegrationConfig integration;
    SamplePoint base;
};
ScanSpec resolve_scan(const nlohmann::json& req);

/// {lyap_config}
struct SingleSpec {
    SystemPtr system;
    SamplePoint point;
    LyapunovConfig lyap;
};
SingleSpec resolve_single(const nlohmann::json& req);

/// {t_end, stride, integration}
struct TrajectorySpec {
    SystemPtr system;
    SamplePoint point;
    double t_end = 100.0;
    int stride = 1;
    IntegrationConfig integration;
};
TrajectorySpec resolve_trajectory(const nlohmann::json& req);

/// The request with every default filled in ("kind" defaults to
/// sample_batch). Re-running a normalized request reproduces its outputs.
/// Throws ContractError on any invalid field.
nlohmann::json normalize_request(const nlohmann::json& req);
nlohmann::json normalize_trajectory_request(const nlohmann::json& req);

/// Number of progress units of a normalized request.
std::size_t progress_total(JobKind kind, const nlohmann::json& normalized);

/// LyapunovResult JSON plus divergence, classification and the point.
nlohmann::json lyapunov_report(const SingleSpec& spec);

}  // namespace chaosmap
