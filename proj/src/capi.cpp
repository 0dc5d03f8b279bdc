#include "chaosmap/chaosmap.h"

#include "chaosmap/catalog.hpp"
#include "chaosmap/errors.hpp"
#include "chaosmap/io.hpp"
#include "chaosmap/requests.hpp"
#include "chaosmap/service.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stop_token>

using json = nlohmann::json;
using namespace chaosmap;

struct cm_system {
    SystemPtr system;
};

struct cm_cancel {
    std::stop_source source;
};

struct cm_service {
    std::unique_ptr<JobStore> store;
    std::unique_ptr<HttpService> http;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Every entry point funnels exceptions through here; nothing escapes the C boundary.
template <class F>
cm_status guarded(F&& f) noexcept
{
    try {
        g_last_error.clear();
        f();
        return CM_OK;
    } catch (const ContractError& e) {
        g_last_error = e.what();
        return CM_INVALID_ARGUMENT;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return CM_INVALID_ARGUMENT;
    } catch (const NotFoundError& e) {
        g_last_error = e.what();
        return CM_NOT_FOUND;
    } catch (const NumericalBlowup& e) {
        g_last_error = e.what();
        return CM_NUMERICAL;
    } catch (const Cancelled& e) {
        g_last_error = e.what();
        return CM_CANCELLED;
    } catch (const std::ios_base::failure& e) {
        g_last_error = e.what();
        return CM_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CM_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CM_INTERNAL;
    }
}

json parse_request(const char* text)
{
    require(text != nullptr, "request is NULL");
    return json::parse(text);
}

std::ofstream open_output(const char* path)
{
    require(path != nullptr && *path != '\0', "output path is empty");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::ios_base::failure(std::string("cannot open ") + path + " for writing");
    return out;
}

void close_output(std::ofstream& out, const char* path)
{
    out.close();
    if (!out)
        throw std::ios_base::failure(std::string("error writing ") + path);
}

}  // namespace

extern "C" {

const char* cm_version(void)
{
    return "0.1.0";
}

const char* cm_last_error(void)
{
    return g_last_error.c_str();
}

void cm_string_free(char* s)
{
    std::free(s);
}

cm_status cm_catalog_json(int include_hidden, char** out_json)
{
    return guarded([&] {
        require(out_json != nullptr, "out_json is NULL");
        *out_json = dup_string(catalog_json(include_hidden != 0).dump());
    });
}

cm_status cm_system_create(const char* id, const char* config_json, cm_system** out)
{
    return guarded([&] {
        require(id != nullptr && out != nullptr, "id and out must not be NULL");
        json config = config_json && *config_json ? json::parse(config_json) : json::object();
        auto sys = std::make_unique<cm_system>();
        sys->system = make_system(id, config);
        *out = sys.release();
    });
}

void cm_system_destroy(cm_system* sys)
{
    delete sys;
}

size_t cm_system_dim(const cm_system* sys)
{
    return sys ? sys->system->dim() : 0;
}

size_t cm_system_param_count(const cm_system* sys)
{
    return sys ? sys->system->param_count() : 0;
}

cm_status cm_system_rhs(const cm_system* sys, double t, const double* y, const double* p, double* dydt)
{
    return guarded([&] {
        require(sys && y && dydt && (p || sys->system->param_count() == 0), "NULL argument");
        std::size_t n = sys->system->dim(), m = sys->system->param_count();
        Vector f = eval_rhs(*sys->system, t, {y, n}, {p, m});
        std::copy(f.begin(), f.end(), dydt);
    });
}

cm_status cm_system_jacobian(const cm_system* sys, double t, const double* y, const double* p, double* jac)
{
    return guarded([&] {
        require(sys && y && jac && (p || sys->system->param_count() == 0), "NULL argument");
        std::size_t n = sys->system->dim(), m = sys->system->param_count();
        Vector j = eval_jacobian(*sys->system, t, {y, n}, {p, m});
        std::copy(j.begin(), j.end(), jac);
    });
}

cm_cancel* cm_cancel_create(void)
{
    return new (std::nothrow) cm_cancel();
}

void cm_cancel_request(cm_cancel* c)
{
    if (c)
        c->source.request_stop();
}

void cm_cancel_destroy(cm_cancel* c)
{
    delete c;
}

cm_status cm_lyapunov(const char* request_json, char** out_json)
{
    return guarded([&] {
        require(out_json != nullptr, "out_json is NULL");
        json req = parse_request(request_json);
        req["kind"] = "lyapunov_single";
        json normalized = normalize_request(req);
        json report = lyapunov_report(resolve_single(normalized));
        report["request"] = normalized;
        *out_json = dup_string(report.dump());
    });
}

cm_status cm_sample_batch(const char* request_json, int workers, const char* csv_path,
                          const char* jsonl_path, cm_progress_fn progress, void* user,
                          cm_cancel* cancel, char** out_summary)
{
    return guarded([&] {
        require(workers >= 1, "workers must be >= 1");
        json req = parse_request(request_json);
        req["kind"] = "sample_batch";
        json normalized = normalize_request(req);
        BatchSpec s = resolve_batch(normalized);

        std::ofstream csv = open_output(csv_path);
        std::ofstream jsonl;
        if (jsonl_path)
            jsonl = open_output(jsonl_path);

        std::mutex progress_mutex;
        std::size_t done = 0;
        RecordCallback on_record;
        if (progress)
            on_record = [&](std::size_t, const SampleRecord&) {
                std::lock_guard lk(progress_mutex);
                progress(++done, static_cast<std::size_t>(s.k), user);
            };
        auto records = sample_batch(*s.system, s.box, s.k, s.mh, s.lyap, workers, s.base, on_record,
                                    cancel ? cancel->source.get_token() : std::stop_token{});

        write_samples_csv(csv, s.box, records);
        close_output(csv, csv_path);
        if (jsonl_path) {
            for (const auto& r : records)
                jsonl << sample_row_json(s.box, r).dump() << '\n';
            close_output(jsonl, jsonl_path);
        }

        json summary = {{"request", normalized}, {"records", records.size()}};
        for (Phase ph : {Phase::success, Phase::phase1_failed, Phase::phase2_failed})
            summary[to_string(ph)] =
                std::count_if(records.begin(), records.end(), [&](const SampleRecord& r) { return r.phase == ph; });
        if (out_summary)
            *out_summary = dup_string(summary.dump());
    });
}

cm_status cm_bifurcate(const char* request_json, int workers, const char* csv_path, char** out_summary)
{
    return guarded([&] {
        require(workers >= 1, "workers must be >= 1");
        json req = parse_request(request_json);
        req["kind"] = "bifurcation";
        json normalized = normalize_request(req);
        ScanSpec s = resolve_scan(normalized);
        std::ofstream csv = open_output(csv_path);
        ScanResult result = bifurcation_scan(*s.system, s.base, s.cfg, s.integration, workers);
        write_scan_csv(csv, result);
        close_output(csv, csv_path);
        std::size_t flagged = std::count_if(result.columns.begin(), result.columns.end(),
                                            [](const ScanColumn& c) { return c.flagged; });
        if (out_summary)
            *out_summary = dup_string(
                json{{"request", normalized}, {"columns", result.columns.size()}, {"flagged", flagged}}.dump());
    });
}

cm_status cm_trajectory(const char* request_json, const char* csv_path, char** out_summary)
{
    return guarded([&] {
        json normalized = normalize_trajectory_request(parse_request(request_json));
        TrajectorySpec s = resolve_trajectory(normalized);
        std::ofstream csv = open_output(csv_path);
        Trajectory tr = export_trajectory(csv, *s.system, s.point, s.t_end, s.integration, s.stride);
        close_output(csv, csv_path);
        if (out_summary)
            *out_summary = dup_string(json{{"request", normalized},
                                           {"rows", tr.times.size()},
                                           {"terminated_early", tr.terminated_early},
                                           {"termination_reason", to_string(tr.termination_reason)}}
                                          .dump());
    });
}

cm_status cm_service_create(const char* data_dir, int workers, const char* static_dir, cm_service** out)
{
    return guarded([&] {
        require(data_dir != nullptr && *data_dir != '\0' && out != nullptr, "data_dir and out are required");
        auto svc = std::make_unique<cm_service>();
        svc->store = std::make_unique<JobStore>(data_dir, workers);
        std::optional<std::filesystem::path> dir;
        if (static_dir && *static_dir)
            dir = static_dir;
        svc->http = std::make_unique<HttpService>(*svc->store, dir);
        *out = svc.release();
    });
}

cm_status cm_service_bind(cm_service* svc, const char* host, int port, int* out_port)
{
    cm_status st = guarded([&] {
        require(svc != nullptr, "service is NULL");
        require(port >= 0 && port <= 65535, "port out of range");
        if (!svc->http->bind(host ? host : "127.0.0.1", port))
            throw std::runtime_error("cannot bind port " + std::to_string(port));
        if (out_port)
            *out_port = svc->http->port();
    });
    return st == CM_INTERNAL ? CM_UNAVAILABLE : st;
}

cm_status cm_service_run(cm_service* svc)
{
    return guarded([&] {
        require(svc != nullptr, "service is NULL");
        svc->http->serve();
    });
}

void cm_service_stop(cm_service* svc)
{
    if (svc)
        svc->http->stop();
}

void cm_service_destroy(cm_service* svc)
{
    if (!svc)
        return;
    svc->http.reset();
    svc->store->shutdown();
    delete svc;
}

}  // extern "C"
