#include "chaosmap/requests.hpp"

#include "chaosmap/catalog.hpp"
#include "chaosmap/errors.hpp"
#include "chaosmap/io.hpp"

namespace chaosmap {

using json = nlohmann::json;

namespace {

int read_int(const json& req, const char* key, int fallback)
{
    if (!req.contains(key))
        return fallback;
    require(req[key].is_number_integer(), std::string(key) + " must be an integer");
    return req[key].get<int>();
}

double read_double(const json& req, const char* key, double fallback)
{
    if (!req.contains(key))
        return fallback;
    require(req[key].is_number(), std::string(key) + " must be a number");
    return req[key].get<double>();
}

}  // namespace

const char* to_string(JobKind k) noexcept
{
    switch (k) {
    case JobKind::sample_batch: return "sample_batch";
    case JobKind::bifurcation: return "bifurcation";
    case JobKind::lyapunov_single: return "lyapunov_single";
    }
    return "?";
}

JobKind kind_from_string(std::string_view s)
{
    for (auto k : {JobKind::sample_batch, JobKind::bifurcation, JobKind::lyapunov_single})
        if (s == to_string(k))
            return k;
    throw ContractError("unknown job kind '" + std::string(s) + "'");
}

SystemPtr resolve_system(const json& req)
{
    require(req.contains("system_id") && req["system_id"].is_string(), "request needs a string system_id");
    json config = req.value("system_config", json::object());
    require(config.is_object(), "system_config must be an object");
    try {
        return make_system(req["system_id"].get<std::string>(), config);
    } catch (const NotFoundError& e) {
        throw ContractError(e.what());
    }
}

SamplePoint resolve_base(const SystemDefinition& system, const json& req)
{
    SamplePoint p = default_point(system);
    if (!req.contains("set"))
        return p;
    const json& set = req["set"];
    require(set.is_object(), "set must be an object of name: value");
    for (const auto& [name, value] : set.items()) {
        require(value.is_number(), "set." + name + " must be a number");
        apply_assignment(system, p, name, value.get<double>());
    }
    return p;
}

BatchSpec resolve_batch(const json& req)
{
    BatchSpec s;
    s.system = resolve_system(req);
    require(req.contains("box"), "sample_batch request needs a box");
    s.box = box_from_json(req["box"]);
    validate_box(*s.system, s.box);
    s.k = read_int(req, "k", 0);
    require(s.k >= 1, "k must be >= 1");
    s.mh = mh_config_from_json(req.value("mh_config", json::object()));
    s.lyap = lyapunov_config_from_json(req.value("lyap_config", json::object()));
    s.base = resolve_base(*s.system, req);
    return s;
}

ScanSpec resolve_scan(const json& req)
{
    ScanSpec s;
    s.system = resolve_system(req);
    require(req.contains("param") && req["param"].is_string(), "bifurcation request needs a string param");
    s.cfg.param_name = req["param"].get<std::string>();
    s.cfg.lo = read_double(req, "lo", s.cfg.lo);
    s.cfg.hi = read_double(req, "hi", s.cfg.hi);
    s.cfg.n_param_points = read_int(req, "points", s.cfg.n_param_points);
    s.cfg.t_total = read_double(req, "t_total", s.cfg.t_total);
    s.cfg.window_start = read_double(req, "window_start", s.cfg.window_start);
    s.cfg.window_samples = read_int(req, "window_samples", s.cfg.window_samples);
    if (req.contains("observables")) {
        require(req["observables"].is_array(), "observables must be an array of state names");
        for (const auto& o : req["observables"]) {
            require(o.is_string(), "observables must be an array of state names");
            s.cfg.observables.push_back(o.get<std::string>());
        }
    }
    validate(*s.system, s.cfg);
    s.integration = integration_config_from_json(req.value("integration", json::object()));
    s.base = resolve_base(*s.system, req);
    return s;
}

SingleSpec resolve_single(const json& req)
{
    SingleSpec s;
    s.system = resolve_system(req);
    s.point = resolve_base(*s.system, req);
    s.lyap = lyapunov_config_from_json(req.value("lyap_config", json::object()));
    return s;
}

// Full request with every default filled in; what gets stored and re-run.
json normalize_request(const json& req)
{
    require(req.is_object(), "request must be a JSON object");
    JobKind kind = kind_from_string(req.value("kind", std::string("sample_batch")));
    json out = {{"kind", to_string(kind)},
                {"system_id", req.value("system_id", json())},
                {"system_config", req.value("system_config", json::object())},
                {"set", req.value("set", json::object())}};
    switch (kind) {
    case JobKind::sample_batch: {
        BatchSpec s = resolve_batch(req);
        out["box"] = to_json(s.box);
        out["k"] = s.k;
        out["mh_config"] = to_json(s.mh);
        out["lyap_config"] = to_json(s.lyap);
        break;
    }
    case JobKind::bifurcation: {
        ScanSpec s = resolve_scan(req);
        out["param"] = s.cfg.param_name;
        out["lo"] = s.cfg.lo;
        out["hi"] = s.cfg.hi;
        out["points"] = s.cfg.n_param_points;
        out["t_total"] = s.cfg.t_total;
        out["window_start"] = s.cfg.window_start;
        out["window_samples"] = s.cfg.window_samples;
        out["observables"] = s.cfg.observables;
        out["integration"] = to_json(s.integration);
        break;
    }
    case JobKind::lyapunov_single: {
        SingleSpec s = resolve_single(req);
        out["lyap_config"] = to_json(s.lyap);
        break;
    }
    }
    return out;
}

std::size_t progress_total(JobKind kind, const json& request)
{
    switch (kind) {
    case JobKind::sample_batch: return request["k"].get<std::size_t>();
    case JobKind::bifurcation: return request["points"].get<std::size_t>();
    case JobKind::lyapunov_single: return 1;
    }
    return 0;
}

TrajectorySpec resolve_trajectory(const json& req)
{
    TrajectorySpec s;
    s.system = resolve_system(req);
    s.point = resolve_base(*s.system, req);
    s.t_end = read_double(req, "t_end", s.t_end);
    s.stride = read_int(req, "stride", s.stride);
    require(s.stride >= 1, "stride must be >= 1");
    s.integration = integration_config_from_json(req.value("integration", json::object()));
    require(s.t_end > s.integration.t0, "t_end must exceed t0");
    return s;
}

json normalize_trajectory_request(const json& req)
{
    require(req.is_object(), "request must be a JSON object");
    TrajectorySpec s = resolve_trajectory(req);
    return {{"system_id", req["system_id"]},
            {"system_config", req.value("system_config", json::object())},
            {"set", req.value("set", json::object())},
            {"t_end", s.t_end},
            {"stride", s.stride},
            {"integration", to_json(s.integration)}};
}

json lyapunov_report(const SingleSpec& s)
{
    LyapunovResult lr = spectrum_with_doubling(*s.system, s.point, s.lyap);
    double div = divergence_at(*s.system, s.point);
    json doc = to_json(lr);
    doc["divergence"] = div;
    doc["classification"] = to_string(classify(div, lr, s.lyap.zero_band));
    doc["point"] = to_json(s.point);
    return doc;
}

}  // namespace chaosmap
