#pragma once

#include "chaosmap/requests.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace chaosmap {

enum class JobStatus { queued, running, done, failed };

const char* to_string(JobStatus s) noexcept;

/// Per-axis range used by sample queries; `name` is a row field such as
/// "omega", "ic.x" or "mle".
struct AxisFilter {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

/// Parses "name:lo:hi".
AxisFilter parse_axis_filter(std::string_view text);

/// Jobs persisted under `<data_dir>/jobs/<id>/` as request.json, status.json,
/// results.csv and results.jsonl (lyapunov and bifurcation jobs write
/// results.json, bifurcations also results.csv). One background thread runs
/// jobs in submission order; each job fans out over `workers` threads.
///
/// Jobs found queued or running at startup are re-run from scratch; done and
/// failed jobs are loaded as-is.
class JobStore {
public:
    JobStore(std::filesystem::path data_dir, int workers);
    ~JobStore();

    JobStore(const JobStore&) = delete;
    JobStore& operator=(const JobStore&) = delete;

    /// Validates and enqueues. Throws ContractError on invalid requests
    /// (including unknown system ids); nothing is persisted in that case.
    std::string create_job(const nlohmann::json& request);

    /// New sample_batch job with the parent's request but `box`, which must
    /// name the parent's coordinates in order and lie inside the parent box.
    std::string refine_job(const std::string& parent_id, const nlohmann::json& box);

    /// Throws NotFoundError for unknown ids.
    nlohmann::json job_document(const std::string& id) const;

    /// Completed rows (run-index order) matching every filter.
    nlohmann::json samples(const std::string& id, const std::vector<AxisFilter>& filters) const;

    /// Batch CSV of the completed rows; byte-equal to results.csv once done.
    std::string results_csv(const std::string& id) const;

    std::vector<std::string> job_ids() const;

    /// Result document of a lyapunov_single or bifurcation job once done.
    nlohmann::json result_json(const std::string& id) const;

    /// Blocks until the job is done or failed, or the timeout expires.
    bool wait_finished(const std::string& id, std::chrono::milliseconds timeout) const;

    const std::filesystem::path& data_dir() const noexcept { return root_; }

    /// Stops the executor. Records already being computed finish and are
    /// written; the interrupted job stays "running" on disk and is re-run on
    /// the next start.
    void shutdown();

private:
    struct Job;

    std::shared_ptr<Job> find(const std::string& id) const;
    std::string new_id();
    void enqueue(const std::shared_ptr<Job>& job);
    void load_existing();
    void run_loop(std::stop_token stop);
    void execute(Job& job, std::stop_token stop);
    void persist_status(Job& job);

    std::filesystem::path root_;
    int workers_;

    mutable std::mutex mutex_;
    mutable std::condition_variable_any changed_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::uint64_t next_seq_ = 1;
    std::jthread executor_;
};

/// HTTP+JSON front end for a JobStore (all routes under /api).
class HttpService {
public:
    explicit HttpService(JobStore& store, std::optional<std::filesystem::path> static_dir = {});
    ~HttpService();

    /// Binds; returns false if the port is unavailable. Port 0 picks a free port.
    bool bind(const std::string& host, int port);
    int port() const noexcept { return port_; }

    /// Serves until stop() is called.
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace chaosmap
