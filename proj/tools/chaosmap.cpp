#include "chaosmap/chaosmap.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::json;

namespace {

enum ExitCode { exit_ok = 0, exit_usage = 2, exit_indeterminate = 3, exit_failure = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunFailure : std::runtime_error {
    int code;
    RunFailure(const std::string& what, int c) : std::runtime_error(what), code(c) {}
};

void check(cm_status st)
{
    if (st == CM_OK)
        return;
    std::string msg = cm_last_error();
    if (st == CM_INVALID_ARGUMENT || st == CM_NOT_FOUND)
        throw UsageError(msg);
    if (st == CM_CANCELLED)
        throw RunFailure("interrupted: " + msg, exit_failure);
    throw RunFailure(msg, exit_failure);
}

json take_json(char* text)
{
    json doc = json::parse(text);
    cm_string_free(text);
    return doc;
}

// Signals are blocked in every thread and consumed here, so an interrupt
// never lands inside library code.
class SignalWatcher {
public:
    SignalWatcher()
    {
        sigemptyset(&set_);
        sigaddset(&set_, SIGINT);
        sigaddset(&set_, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set_, nullptr);
        std::thread([this] {
            int sig = 0;
            while (sigwait(&set_, &sig) == 0) {
                std::function<void()> action;
                {
                    std::lock_guard lk(mutex_);
                    action = action_;
                }
                if (!action || interrupted_.exchange(true))
                    std::_Exit(128 + sig);
                action();
            }
        }).detach();
    }

    void on_interrupt(std::function<void()> action)
    {
        std::lock_guard lk(mutex_);
        action_ = std::move(action);
    }

private:
    sigset_t set_{};
    std::mutex mutex_;
    std::function<void()> action_;
    std::atomic<bool> interrupted_{false};
};

double parse_double(std::string_view text, std::string_view what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw UsageError("invalid number '" + std::string(text) + "' in " + std::string(what));
    return v;
}

std::pair<double, double> parse_range(std::string_view text, std::string_view what)
{
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
        throw UsageError(std::string(what) + " must be lo:hi, got '" + std::string(text) + "'");
    return {parse_double(text.substr(0, colon), what), parse_double(text.substr(colon + 1), what)};
}

// "name=lo:hi"
json parse_box(const std::vector<std::string>& args)
{
    if (args.empty())
        throw UsageError("at least one --box name=lo:hi is required");
    json box = json::array();
    for (const auto& a : args) {
        auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("box must be name=lo:hi, got '" + a + "'");
        auto [lo, hi] = parse_range(std::string_view(a).substr(eq + 1), "--box " + a);
        box.push_back({{"name", a.substr(0, eq)}, {"lo", lo}, {"hi", hi}});
    }
    return box;
}

// "name=value"
json parse_sets(const std::vector<std::string>& args)
{
    json set = json::object();
    for (const auto& a : args) {
        auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("--set must be name=value, got '" + a + "'");
        set[a.substr(0, eq)] = parse_double(std::string_view(a).substr(eq + 1), "--set " + a);
    }
    return set;
}

// Inline JSON, or @path to read it from a file.
json parse_config(const std::string& text)
{
    if (text.empty())
        return json::object();
    std::string body = text;
    if (text.front() == '@') {
        std::ifstream in(text.substr(1));
        if (!in)
            throw UsageError("cannot read " + text.substr(1));
        std::ostringstream ss;
        ss << in.rdbuf();
        body = ss.str();
    }
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid --system-config JSON: ") + e.what());
    }
}

std::string utc_now()
{
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out)
        throw RunFailure("cannot write " + path, exit_failure);
}

struct Timer {
    std::string started_at = utc_now();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// Written next to every output file. `request` is the fully resolved request;
// `chaosmap replay <manifest>` re-runs it.
void write_manifest(const std::string& output, const std::string& command, const json& request,
                    const json& extra, const Timer& timer)
{
    json seed = nullptr;
    if (request.contains("mh_config"))
        seed = request["mh_config"]["seed"];
    json m = {{"tool", "chaosmap"},
              {"version", cm_version()},
              {"command", command},
              {"request", request},
              {"seed", seed},
              {"outputs", json::array({output})},
              {"timings", {{"started_at", timer.started_at}, {"wall_seconds", timer.seconds()}}}};
    for (const auto& [k, v] : extra.items())
        m[k] = v;
    write_text(output + ".manifest.json", m.dump(2) + "\n");
}

struct Common {
    std::string system;
    std::string system_config;
    std::vector<std::string> sets;

    void add_to(CLI::App* cmd, bool system_required = true)
    {
        auto* opt = cmd->add_option("--system", system, "System id (see `chaosmap systems`)");
        if (system_required)
            opt->required();
        cmd->add_option("--system-config", system_config, "System configuration JSON, or @file");
        cmd->add_option("--set", sets, "Override name=value (states as ic.<state>)")->take_all();
    }

    json request() const
    {
        return {{"system_id", system}, {"system_config", parse_config(system_config)}, {"set", parse_sets(sets)}};
    }
};

unsigned default_workers()
{
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// ---- systems ---------------------------------------------------------------

int run_systems(bool as_json, bool all)
{
    char* text = nullptr;
    check(cm_catalog_json(all ? 1 : 0, &text));
    json catalog = take_json(text);
    if (as_json) {
        std::cout << catalog.dump(2) << "\n";
        return exit_ok;
    }
    for (const auto& s : catalog) {
        std::cout << s["id"].get<std::string>() << "  (dim " << s["dim"] << (s["time_dependent"] ? ", forced" : "")
                  << ")\n    " << s["description"].get<std::string>() << "\n    states:";
        for (std::size_t i = 0; i < s["state_names"].size(); ++i) {
            std::cout << " " << s["state_names"][i].get<std::string>();
            if (!s["default_state"].is_null())
                std::cout << "=" << s["default_state"][i].dump();
        }
        std::cout << "\n    params:";
        for (const auto& p : s["params"]) {
            std::cout << " " << p["name"].get<std::string>();
            if (!p["default"].is_null())
                std::cout << "=" << p["default"].dump();
            if (p["units"] != "dimensionless")
                std::cout << "[" << p["units"].get<std::string>() << "]";
        }
        std::cout << "\n";
    }
    return exit_ok;
}

// ---- lyapunov --------------------------------------------------------------

int lyapunov_request(const json& request, const std::string& out)
{
    Timer timer;
    char* text = nullptr;
    check(cm_lyapunov(request.dump().c_str(), &text));
    json report = take_json(text);
    json normalized = report["request"];
    report.erase("request");
    std::cout << report.dump(2) << "\n";
    if (!out.empty()) {
        write_text(out, report.dump(2) + "\n");
        write_manifest(out, "lyapunov", normalized, json::object(), timer);
    }
    return report["converged"].get<bool>() ? exit_ok : exit_indeterminate;
}

// ---- sample ----------------------------------------------------------------

struct Progress {
    bool enabled = false;
};

void print_progress(size_t completed, size_t total, void* user)
{
    if (!static_cast<Progress*>(user)->enabled)
        return;
    std::fprintf(stderr, "\rsample: %zu/%zu", completed, total);
    if (completed == total)
        std::fputc('\n', stderr);
    std::fflush(stderr);
}

int sample_request(const json& request, int workers, const std::string& out, const std::string& jsonl,
                   bool quiet, SignalWatcher& signals)
{
    Timer timer;
    cm_cancel* cancel = cm_cancel_create();
    signals.on_interrupt([cancel] { cm_cancel_request(cancel); });
    Progress progress{!quiet && isatty(STDERR_FILENO)};
    char* text = nullptr;
    cm_status st = cm_sample_batch(request.dump().c_str(), workers, out.c_str(),
                                   jsonl.empty() ? nullptr : jsonl.c_str(), print_progress, &progress,
                                   cancel, &text);
    signals.on_interrupt({});
    cm_cancel_destroy(cancel);
    check(st);
    json summary = take_json(text);
    json counts = {{"records", summary["records"]},
                   {"success", summary["success"]},
                   {"phase1_failed", summary["phase1_failed"]},
                   {"phase2_failed", summary["phase2_failed"]}};
    write_manifest(out, "sample", summary["request"],
                   {{"summary", counts}, {"outputs", jsonl.empty() ? json::array({out}) : json::array({out, jsonl})}},
                   timer);
    std::cout << summary["records"] << " records: " << summary["success"] << " success, "
              << summary["phase1_failed"] << " phase1_failed, " << summary["phase2_failed"]
              << " phase2_failed -> " << out << "\n";
    return exit_ok;
}

// ---- bifurcate / trajectory ------------------------------------------------

int bifurcate_request(const json& request, int workers, const std::string& out)
{
    Timer timer;
    char* text = nullptr;
    check(cm_bifurcate(request.dump().c_str(), workers, out.c_str(), &text));
    json summary = take_json(text);
    write_manifest(out, "bifurcate", summary["request"], json::object(), timer);
    std::cout << summary["columns"] << " columns (" << summary["flagged"] << " flagged) -> " << out << "\n";
    return exit_ok;
}

int trajectory_request(const json& request, const std::string& out)
{
    Timer timer;
    char* text = nullptr;
    check(cm_trajectory(request.dump().c_str(), out.c_str(), &text));
    json summary = take_json(text);
    write_manifest(out, "trajectory", summary["request"], json::object(), timer);
    std::cout << summary["rows"] << " rows";
    if (summary["terminated_early"].get<bool>())
        std::cout << " (terminated early: " << summary["termination_reason"].get<std::string>() << ")";
    std::cout << " -> " << out << "\n";
    return exit_ok;
}

// ---- serve -----------------------------------------------------------------

int serve(const std::string& host, int port, const std::string& data_dir, int workers,
          const std::string& static_dir, SignalWatcher& signals)
{
    cm_service* svc = nullptr;
    if (cm_service_create(data_dir.c_str(), workers, static_dir.empty() ? nullptr : static_dir.c_str(), &svc) !=
        CM_OK)
        throw RunFailure(std::string("cannot start service: ") + cm_last_error(), exit_failure);
    int bound = 0;
    if (cm_service_bind(svc, host.c_str(), port, &bound) != CM_OK) {
        std::string msg = cm_last_error();
        cm_service_destroy(svc);
        throw RunFailure("cannot start service: " + msg, exit_failure);
    }
    signals.on_interrupt([svc] { cm_service_stop(svc); });
    std::cout << "listening on http://" << host << ":" << bound << "  (data: " << data_dir << ")" << std::endl;
    cm_status st = cm_service_run(svc);
    signals.on_interrupt({});
    std::cerr << "shutting down; finishing records in flight" << std::endl;
    cm_service_destroy(svc);
    check(st);
    return exit_ok;
}

// ---- replay ----------------------------------------------------------------

int replay(const std::string& manifest_path, const std::string& out, int workers, SignalWatcher& signals)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw UsageError("cannot read " + manifest_path);
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid manifest: ") + e.what());
    }
    if (!m.contains("command") || !m.contains("request"))
        throw UsageError("manifest lacks command or request");
    const std::string command = m["command"].get<std::string>();
    const json& request = m["request"];
    if (command == "lyapunov")
        return lyapunov_request(request, out);
    if (out.empty())
        throw UsageError("replay of '" + command + "' needs --out");
    if (command == "sample")
        return sample_request(request, workers, out, "", true, signals);
    if (command == "bifurcate")
        return bifurcate_request(request, workers, out);
    if (command == "trajectory")
        return trajectory_request(request, out);
    throw UsageError("unknown manifest command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv)
{
    SignalWatcher signals;

    CLI::App app{"Search parameter and initial-condition spaces of ODE systems for chaos"};
    app.set_version_flag("--version", std::string(cm_version()));
    app.require_subcommand(1);

    // systems
    bool systems_json = false, systems_all = false;
    auto* c_systems = app.add_subcommand("systems", "List built-in systems");
    c_systems->add_flag("--json", systems_json, "Emit the catalog as JSON");
    c_systems->add_flag("--all", systems_all, "Include hidden reference systems");

    // lyapunov
    Common ly;
    double ly_t0 = 0.0, ly_dt = 1e-2, ly_T0 = 100.0, ly_zero_band = 1e-3;
    int ly_doublings = 6, ly_renorm = 10;
    std::string ly_out;
    auto* c_ly = app.add_subcommand("lyapunov", "Lyapunov spectrum with horizon doubling");
    ly.add_to(c_ly);
    c_ly->add_option("--t0", ly_t0, "Start time")->capture_default_str();
    c_ly->add_option("--dt", ly_dt, "RK4 step")->capture_default_str();
    c_ly->add_option("--T0", ly_T0, "Initial horizon")->capture_default_str();
    c_ly->add_option("--max-doublings", ly_doublings, "Horizon doublings before giving up")->capture_default_str();
    c_ly->add_option("--renorm-every", ly_renorm, "Steps between Gram-Schmidt passes")->capture_default_str();
    c_ly->add_option("--zero-band", ly_zero_band, "Exponents within this band count as zero")->capture_default_str();
    c_ly->add_option("--out", ly_out, "Also write the result JSON (and its manifest) here");

    // sample
    Common sa;
    std::vector<std::string> sa_box;
    int sa_k = 10, sa_steps = 1000, sa_phase1 = 300, sa_workers = static_cast<int>(default_workers());
    int sa_doublings = 6;
    double sa_alpha = 20.0, sa_scale = 0.05, sa_dt = 1e-2, sa_T0 = 100.0;
    std::uint64_t sa_seed = 0;
    std::string sa_out, sa_jsonl;
    bool sa_quiet = false;
    auto* c_sa = app.add_subcommand("sample", "Two-phase Metropolis-Hastings search for chaotic points");
    sa.add_to(c_sa);
    c_sa->add_option("--box", sa_box, "Search coordinate name=lo:hi (states as ic.<state>)")->take_all();
    c_sa->add_option("--k", sa_k, "Number of records")->capture_default_str();
    c_sa->add_option("--steps", sa_steps, "Phase-2 walk length")->capture_default_str();
    c_sa->add_option("--phase1-steps", sa_phase1, "Phase-1 walk length")->capture_default_str();
    c_sa->add_option("--alpha-max", sa_alpha, "Final annealing sharpness")->capture_default_str();
    c_sa->add_option("--proposal-scale", sa_scale, "Proposal sigma as a fraction of box width")->capture_default_str();
    c_sa->add_option("--seed", sa_seed, "Base seed; record i uses seed + i")->capture_default_str();
    c_sa->add_option("--workers", sa_workers, "Worker threads")->capture_default_str();
    c_sa->add_option("--dt", sa_dt, "RK4 step for Lyapunov estimates")->capture_default_str();
    c_sa->add_option("--T0", sa_T0, "Initial Lyapunov horizon")->capture_default_str();
    c_sa->add_option("--max-doublings", sa_doublings, "Horizon doublings")->capture_default_str();
    c_sa->add_option("--out", sa_out, "Batch CSV path")->required();
    c_sa->add_option("--jsonl", sa_jsonl, "Also write rows as JSON lines");
    c_sa->add_flag("--quiet", sa_quiet, "No progress output");

    // bifurcate
    Common bi;
    std::string bi_param, bi_range, bi_window, bi_out;
    int bi_points = 10, bi_samples = 500, bi_workers = static_cast<int>(default_workers());
    double bi_t_total = 7500.0, bi_dt = 1e-2;
    std::vector<std::string> bi_obs;
    auto* c_bi = app.add_subcommand("bifurcate", "Long-run observable values across a parameter range");
    bi.add_to(c_bi);
    c_bi->add_option("--param", bi_param, "Parameter to vary")->required();
    c_bi->add_option("--range", bi_range, "lo:hi")->required();
    c_bi->add_option("--points", bi_points, "Grid points (inclusive of both ends)")->capture_default_str();
    auto* o_total = c_bi->add_option("--t-total", bi_t_total, "Integration end time")->capture_default_str();
    c_bi->add_option("--window", bi_window, "Sampling window start, or start:end (end = t-total)");
    c_bi->add_option("--samples", bi_samples, "Samples per window")->capture_default_str();
    c_bi->add_option("--observable", bi_obs, "State to record (repeatable; default all)");
    c_bi->add_option("--dt", bi_dt, "RK4 step")->capture_default_str();
    c_bi->add_option("--workers", bi_workers, "Worker threads")->capture_default_str();
    c_bi->add_option("--out", bi_out, "Scan CSV path")->required();

    // trajectory
    Common tr;
    double tr_t_end = 100.0, tr_dt = 1e-2;
    int tr_stride = 1;
    std::string tr_out;
    auto* c_tr = app.add_subcommand("trajectory", "Integrate one orbit and write it as CSV");
    tr.add_to(c_tr);
    c_tr->add_option("--t-end", tr_t_end, "End time")->capture_default_str();
    c_tr->add_option("--dt", tr_dt, "RK4 step")->capture_default_str();
    c_tr->add_option("--stride", tr_stride, "Record every n-th step")->capture_default_str();
    c_tr->add_option("--out", tr_out, "Trajectory CSV path")->required();

    // serve
    std::string sv_host = "127.0.0.1", sv_data = "chaosmap-data", sv_static;
    int sv_port = 8080, sv_workers = static_cast<int>(default_workers());
    auto* c_sv = app.add_subcommand("serve", "Run the job service (HTTP API under /api)");
    c_sv->add_option("--host", sv_host, "Listen address")->capture_default_str();
    c_sv->add_option("--port", sv_port, "Listen port (0 picks one)")->capture_default_str();
    c_sv->add_option("--data-dir", sv_data, "Job storage directory")->capture_default_str();
    c_sv->add_option("--workers", sv_workers, "Worker threads per job")->capture_default_str();
    c_sv->add_option("--static", sv_static, "Directory served at /");

    // replay
    std::string rp_manifest, rp_out;
    int rp_workers = static_cast<int>(default_workers());
    auto* c_rp = app.add_subcommand("replay", "Re-run the request recorded in a manifest");
    c_rp->add_option("manifest", rp_manifest, "Manifest JSON")->required();
    c_rp->add_option("--out", rp_out, "Output path");
    c_rp->add_option("--workers", rp_workers, "Worker threads")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*c_systems)
            return run_systems(systems_json, systems_all);

        if (*c_ly) {
            json req = ly.request();
            req["lyap_config"] = {{"t0", ly_t0},
                                  {"dt", ly_dt},
                                  {"T0", ly_T0},
                                  {"max_doublings", ly_doublings},
                                  {"renorm_every", ly_renorm},
                                  {"zero_band", ly_zero_band}};
            return lyapunov_request(req, ly_out);
        }

        if (*c_sa) {
            json req = sa.request();
            req["box"] = parse_box(sa_box);
            req["k"] = sa_k;
            req["mh_config"] = {{"steps", sa_steps},
                                {"phase1_steps", sa_phase1},
                                {"alpha_max", sa_alpha},
                                {"proposal_scale", sa_scale},
                                {"seed", sa_seed}};
            req["lyap_config"] = {{"dt", sa_dt}, {"T0", sa_T0}, {"max_doublings", sa_doublings}};
            return sample_request(req, sa_workers, sa_out, sa_jsonl, sa_quiet, signals);
        }

        if (*c_bi) {
            json req = bi.request();
            auto [lo, hi] = parse_range(bi_range, "--range");
            double window_start = bi_t_total - 500.0;
            if (!bi_window.empty()) {
                auto colon = bi_window.rfind(':');
                if (colon == std::string::npos) {
                    window_start = parse_double(bi_window, "--window");
                } else {
                    auto [ws, we] = parse_range(bi_window, "--window");
                    if (o_total->count() > 0 && we != bi_t_total)
                        throw UsageError("--window end must equal --t-total");
                    window_start = ws;
                    bi_t_total = we;
                }
            }
            req["param"] = bi_param;
            req["lo"] = lo;
            req["hi"] = hi;
            req["points"] = bi_points;
            req["t_total"] = bi_t_total;
            req["window_start"] = window_start;
            req["window_samples"] = bi_samples;
            req["observables"] = bi_obs;
            req["integration"] = {{"dt", bi_dt}};
            return bifurcate_request(req, bi_workers, bi_out);
        }

        if (*c_tr) {
            json req = tr.request();
            req["t_end"] = tr_t_end;
            req["stride"] = tr_stride;
            req["integration"] = {{"dt", tr_dt}};
            return trajectory_request(req, tr_out);
        }

        if (*c_sv)
            return serve(sv_host, sv_port, sv_data, sv_workers, sv_static, signals);

        if (*c_rp)
            return replay(rp_manifest, rp_out, rp_workers, signals);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const RunFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}
