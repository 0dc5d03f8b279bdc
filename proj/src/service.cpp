#include "chaosmap/service.hpp"

#include "chaosmap/catalog.hpp"
#include "chaosmap/errors.hpp"
#include "chaosmap/io.hpp"
#include "chaosmap/lyapunov.hpp"
#include "chaosmap/sampler.hpp"
#include "chaosmap/scan.hpp"

#include "httplib.h"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace chaosmap {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* to_string(JobStatus s) noexcept
{
    switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
    }
    return "?";
}

namespace {

JobStatus status_from_string(std::string_view s)
{
    for (auto st : {JobStatus::queued, JobStatus::running, JobStatus::done, JobStatus::failed})
        if (s == to_string(st))
            return st;
    throw ContractError("unknown job status '" + std::string(s) + "'");
}

std::string now_iso()
{
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Readers never see a half-written file: content goes to a sibling and is renamed.
void write_atomic(const fs::path& path, std::string_view content)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_number(std::string_view text, std::string_view what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    require(ec == std::errc() && ptr == text.data() + text.size(),
            "invalid number '" + std::string(text) + "' in " + std::string(what));
    return v;
}

}  // namespace

AxisFilter parse_axis_filter(std::string_view text)
{
    auto last = text.rfind(':');
    require(last != std::string_view::npos && last > 0, "axis filter must be name:lo:hi");
    auto mid = text.rfind(':', last - 1);
    require(mid != std::string_view::npos && mid > 0, "axis filter must be name:lo:hi");
    AxisFilter f;
    f.name = std::string(text.substr(0, mid));
    f.lo = parse_number(text.substr(mid + 1, last - mid - 1), "axis filter");
    f.hi = parse_number(text.substr(last + 1), "axis filter");
    return f;
}

struct JobStore::Job {
    std::string id;
    JobKind kind = JobKind::sample_batch;
    json request;
    JobStatus status = JobStatus::queued;
    std::size_t completed = 0;
    std::size_t total = 0;
    std::string created_at;
    std::string finished_at;
    std::optional<std::string> parent_id;
    std::string error;
    fs::path dir;

    // sample_batch rows received so far, keyed by run index. The CSV text is
    // empty for rows reloaded from disk; those jobs serve results.csv directly.
    SearchBox box;
    std::map<std::size_t, std::pair<std::string, json>> rows;

    json document() const
    {
        json doc = {{"id", id},
                    {"kind", to_string(kind)},
                    {"status", to_string(status)},
                    {"progress", {{"completed", completed}, {"total", total}}},
                    {"created_at", created_at},
                    {"finished_at", finished_at.empty() ? json() : json(finished_at)},
                    {"parent_id", parent_id ? json(*parent_id) : json()},
                    {"request", request}};
        if (!error.empty())
            doc["error"] = error;
        return doc;
    }
};

JobStore::JobStore(fs::path data_dir, int workers) : root_(std::move(data_dir)), workers_(workers)
{
    require(workers >= 1, "workers must be >= 1");
    std::error_code ec;
    if (fs::exists(root_, ec) && !fs::is_directory(root_, ec))
        throw ContractError("data directory '" + root_.string() + "' is not a directory");
    fs::create_directories(root_ / "jobs", ec);
    if (ec)
        throw ContractError("cannot create data directory '" + root_.string() + "': " + ec.message());
    try {
        write_atomic(root_ / ".probe", "ok");
        fs::remove(root_ / ".probe");
    } catch (const std::exception&) {
        throw ContractError("data directory '" + root_.string() + "' is not writable");
    }
    load_existing();
    executor_ = std::jthread([this](std::stop_token stop) { run_loop(stop); });
}

JobStore::~JobStore()
{
    shutdown();
}

void JobStore::shutdown()
{
    if (!executor_.joinable())
        return;
    executor_.request_stop();
    changed_.notify_all();
    executor_.join();
}

void JobStore::persist_status(Job& job)
{
    write_atomic(job.dir / "status.json", job.document().dump(2) + "\n");
}

std::string JobStore::new_id()
{
    std::string digits = std::to_string(next_seq_++);
    return "job-" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

void JobStore::load_existing()
{
    std::vector<std::shared_ptr<Job>> pending;
    for (const auto& entry : fs::directory_iterator(root_ / "jobs")) {
        if (!entry.is_directory())
            continue;
        auto job = std::make_shared<Job>();
        job->dir = entry.path();
        try {
            json status = json::parse(read_file(job->dir / "status.json"));
            job->request = json::parse(read_file(job->dir / "request.json"));
            job->id = status.at("id").get<std::string>();
            job->kind = kind_from_string(status.at("kind").get<std::string>());
            job->status = status_from_string(status.at("status").get<std::string>());
            job->completed = status.at("progress").at("completed").get<std::size_t>();
            job->total = status.at("progress").at("total").get<std::size_t>();
            job->created_at = status.value("created_at", std::string());
            if (status.contains("finished_at") && status["finished_at"].is_string())
                job->finished_at = status["finished_at"].get<std::string>();
            if (status.contains("parent_id") && status["parent_id"].is_string())
                job->parent_id = status["parent_id"].get<std::string>();
            job->error = status.value("error", std::string());
            if (job->kind == JobKind::sample_batch)
                job->box = box_from_json(job->request.at("box"));
            if (job->status == JobStatus::done && job->kind == JobKind::sample_batch) {
                std::istringstream lines(read_file(job->dir / "results.jsonl"));
                std::string line;
                std::size_t i = 0;
                while (std::getline(lines, line))
                    if (!line.empty())
                        job->rows.emplace(i++, std::pair{std::string(), json::parse(line)});
            }
        } catch (const std::exception& e) {
            std::cerr << "skipping unreadable job directory " << job->dir << ": " << e.what() << "\n";
            continue;
        }

        if (job->id.size() > 4 && job->id.starts_with("job-")) {
            std::uint64_t seq = 0;
            auto tail = std::string_view(job->id).substr(4);
            if (std::from_chars(tail.data(), tail.data() + tail.size(), seq).ec == std::errc())
                next_seq_ = std::max(next_seq_, seq + 1);
        }

        if (job->status == JobStatus::queued || job->status == JobStatus::running) {
            job->status = JobStatus::queued;
            job->completed = 0;
            job->rows.clear();
            for (const char* f : {"results.csv", "results.jsonl", "results.json"})
                fs::remove(job->dir / f);
            persist_status(*job);
            pending.push_back(job);
        }
        jobs_.emplace(job->id, job);
    }
    std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a->id < b->id; });
    for (auto& job : pending)
        queue_.push_back(job);
}

std::shared_ptr<JobStore::Job> JobStore::find(const std::string& id) const
{
    std::lock_guard lk(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end())
        throw NotFoundError("no job '" + id + "'");
    return it->second;
}

void JobStore::enqueue(const std::shared_ptr<Job>& job)
{
    std::lock_guard lk(mutex_);
    job->id = new_id();
    job->dir = root_ / "jobs" / job->id;
    job->created_at = now_iso();
    fs::create_directories(job->dir);
    write_atomic(job->dir / "request.json", job->request.dump(2) + "\n");
    persist_status(*job);
    jobs_.emplace(job->id, job);
    queue_.push_back(job);
    changed_.notify_all();
}

std::string JobStore::create_job(const json& request)
{
    auto job = std::make_shared<Job>();
    job->request = normalize_request(request);
    job->kind = kind_from_string(job->request["kind"].get<std::string>());
    job->total = progress_total(job->kind, job->request);
    if (job->kind == JobKind::sample_batch)
        job->box = box_from_json(job->request["box"]);
    enqueue(job);
    return job->id;
}

std::string JobStore::refine_job(const std::string& parent_id, const json& box_doc)
{
    auto parent = find(parent_id);
    require(parent->kind == JobKind::sample_batch, "only sample_batch jobs can be refined");
    SearchBox given = box_from_json(box_doc);

    // Match coordinates by name so the object form (which loses order) works.
    SearchBox box;
    for (const auto& pc : parent->box.coords) {
        auto it = std::find_if(given.coords.begin(), given.coords.end(), [&](const BoxCoord& c) {
            return c.qualified_name() == pc.qualified_name();
        });
        require(it != given.coords.end(), "refine box is missing coordinate '" + pc.qualified_name() + "'");
        box.coords.push_back(*it);
    }
    require(given.coords.size() == box.coords.size(), "refine box must name exactly the parent's coordinates");
    require(parent->box.contains_box(box), "refine box is not contained in the parent box");

    json request = parent->request;
    request["box"] = to_json(box);
    auto job = std::make_shared<Job>();
    job->request = normalize_request(request);
    job->kind = JobKind::sample_batch;
    job->total = progress_total(job->kind, job->request);
    job->box = box;
    job->parent_id = parent->id;
    enqueue(job);
    return job->id;
}

json JobStore::job_document(const std::string& id) const
{
    auto job = find(id);
    std::lock_guard lk(mutex_);
    return job->document();
}

std::vector<std::string> JobStore::job_ids() const
{
    std::lock_guard lk(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, job] : jobs_)
        ids.push_back(id);
    return ids;
}

json JobStore::samples(const std::string& id, const std::vector<AxisFilter>& filters) const
{
    auto job = find(id);
    std::lock_guard lk(mutex_);
    require(job->kind == JobKind::sample_batch, "job '" + id + "' is not a sample_batch");
    auto columns = sample_columns(job->box);
    for (const auto& f : filters)
        require(std::find(columns.begin(), columns.end(), f.name) != columns.end(),
                "unknown axis '" + f.name + "'");
    json out = json::array();
    for (const auto& [index, row] : job->rows) {
        const json& r = row.second;
        bool keep = std::all_of(filters.begin(), filters.end(), [&](const AxisFilter& f) {
            const json& v = r[f.name];
            if (!v.is_number())
                return false;
            double x = v.get<double>();
            return f.lo <= x && x <= f.hi;
        });
        if (keep)
            out.push_back(r);
    }
    return out;
}

std::string JobStore::results_csv(const std::string& id) const
{
    auto job = find(id);
    std::lock_guard lk(mutex_);
    if (job->status == JobStatus::done && job->kind != JobKind::lyapunov_single)
        return read_file(job->dir / "results.csv");
    require(job->kind == JobKind::sample_batch, "job '" + id + "' has no CSV results yet");
    std::string out = sample_csv_header(job->box) + "\n";
    for (const auto& [index, row] : job->rows)
        out += row.first + "\n";
    return out;
}

json JobStore::result_json(const std::string& id) const
{
    auto job = find(id);
    std::lock_guard lk(mutex_);
    require(job->kind != JobKind::sample_batch, "sample_batch results are served as samples or CSV");
    require(job->status == JobStatus::done, "job '" + id + "' is not done");
    return json::parse(read_file(job->dir / "results.json"));
}

bool JobStore::wait_finished(const std::string& id, std::chrono::milliseconds timeout) const
{
    auto job = find(id);
    std::unique_lock lk(mutex_);
    return changed_.wait_for(lk, timeout, [&] {
        return job->status == JobStatus::done || job->status == JobStatus::failed;
    });
}

void JobStore::run_loop(std::stop_token stop)
{
    while (true) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lk(mutex_);
            if (!changed_.wait(lk, stop, [&] { return !queue_.empty(); }))
                return;
            job = queue_.front();
            queue_.pop_front();
        }
        execute(*job, stop);
        if (stop.stop_requested())
            return;
    }
}

void JobStore::execute(Job& job, std::stop_token stop)
{
    {
        std::lock_guard lk(mutex_);
        job.status = JobStatus::running;
        persist_status(job);
        changed_.notify_all();
    }
    try {
        switch (job.kind) {
        case JobKind::sample_batch: {
            BatchSpec s = resolve_batch(job.request);
            auto on_record = [&](std::size_t i, const SampleRecord& rec) {
                std::string csv = sample_csv_row(rec);
                json row = sample_row_json(s.box, rec);
                std::lock_guard lk(mutex_);
                job.rows[i] = {std::move(csv), std::move(row)};
                job.completed = job.rows.size();
                persist_status(job);
                changed_.notify_all();
            };
            auto records = sample_batch(*s.system, s.box, s.k, s.mh, s.lyap, workers_, s.base, on_record, stop);
            std::ostringstream csv;
            write_samples_csv(csv, s.box, records);
            std::string jsonl;
            for (const auto& rec : records)
                jsonl += sample_row_json(s.box, rec).dump() + "\n";
            write_atomic(job.dir / "results.csv", csv.str());
            write_atomic(job.dir / "results.jsonl", jsonl);
            break;
        }
        case JobKind::bifurcation: {
            ScanSpec s = resolve_scan(job.request);
            ScanResult result = bifurcation_scan(*s.system, s.base, s.cfg, s.integration, workers_);
            std::ostringstream csv;
            write_scan_csv(csv, result);
            write_atomic(job.dir / "results.csv", csv.str());
            write_atomic(job.dir / "results.json", to_json(result).dump() + "\n");
            break;
        }
        case JobKind::lyapunov_single: {
            json doc = lyapunov_report(resolve_single(job.request));
            write_atomic(job.dir / "results.json", doc.dump() + "\n");
            break;
        }
        }
        std::lock_guard lk(mutex_);
        job.completed = job.total;
        job.status = JobStatus::done;
        job.finished_at = now_iso();
        persist_status(job);
        changed_.notify_all();
    } catch (const Cancelled&) {
        // Left as running on disk; re-run on the next start.
    } catch (const std::exception& e) {
        std::lock_guard lk(mutex_);
        job.status = JobStatus::failed;
        job.error = e.what();
        job.finished_at = now_iso();
        persist_status(job);
        changed_.notify_all();
    }
}

struct HttpService::Impl {
    JobStore& store;
    httplib::Server server;

    explicit Impl(JobStore& s) : store(s)
    {
        // SO_REUSEADDR only: httplib's default SO_REUSEPORT lets a second server share a busy port.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
        });
    }

    static void send_json(httplib::Response& res, int status, const json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    template <class F>
    static httplib::Server::Handler guarded(F f)
    {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const NotFoundError& e) {
                send_json(res, 404, {{"error", "not_found"}, {"detail", e.what()}});
            } catch (const ContractError& e) {
                send_json(res, 422, {{"error", "validation"}, {"detail", e.what()}});
            } catch (const json::exception& e) {
                send_json(res, 400, {{"error", "bad_request"}, {"detail", e.what()}});
            } catch (const std::exception& e) {
                send_json(res, 500, {{"error", "internal"}, {"detail", e.what()}});
            }
        };
    }
};

HttpService::HttpService(JobStore& store, std::optional<fs::path> static_dir)
    : impl_(std::make_unique<Impl>(store))
{
    auto& srv = impl_->server;
    auto& st = impl_->store;
    using Req = httplib::Request;
    using Res = httplib::Response;

    srv.Get("/api/systems", Impl::guarded([](const Req& req, Res& res) {
        bool hidden = req.has_param("include_hidden") && req.get_param_value("include_hidden") != "0";
        Impl::send_json(res, 200, catalog_json(hidden));
    }));
    srv.Post("/api/jobs", Impl::guarded([&st](const Req& req, Res& res) {
        std::string id = st.create_job(json::parse(req.body));
        Impl::send_json(res, 201, {{"id", id}});
    }));
    srv.Get("/api/jobs", Impl::guarded([&st](const Req&, Res& res) {
        json out = json::array();
        for (const auto& id : st.job_ids())
            out.push_back(st.job_document(id));
        Impl::send_json(res, 200, out);
    }));
    srv.Get(R"(/api/jobs/([^/]+))", Impl::guarded([&st](const Req& req, Res& res) {
        Impl::send_json(res, 200, st.job_document(req.matches[1]));
    }));
    srv.Get(R"(/api/jobs/([^/]+)/samples)", Impl::guarded([&st](const Req& req, Res& res) {
        std::vector<AxisFilter> filters;
        std::size_t n = req.get_param_value_count("axis");
        for (std::size_t i = 0; i < n; ++i)
            filters.push_back(parse_axis_filter(req.get_param_value("axis", i)));
        Impl::send_json(res, 200, st.samples(req.matches[1], filters));
    }));
    srv.Post(R"(/api/jobs/([^/]+)/refine)", Impl::guarded([&st](const Req& req, Res& res) {
        json body = json::parse(req.body);
        require(body.is_object() && body.contains("box"), "refine body must be {\"box\": ...}");
        std::string id = st.refine_job(req.matches[1], body["box"]);
        Impl::send_json(res, 201, {{"id", id}});
    }));
    srv.Get(R"(/api/jobs/([^/]+)/results\.csv)", Impl::guarded([&st](const Req& req, Res& res) {
        res.status = 200;
        res.set_content(st.results_csv(req.matches[1]), "text/csv");
    }));
    srv.Get(R"(/api/jobs/([^/]+)/result)", Impl::guarded([&st](const Req& req, Res& res) {
        Impl::send_json(res, 200, st.result_json(req.matches[1]));
    }));

    if (static_dir)
        require(srv.set_mount_point("/", static_dir->string()),
                "static directory '" + static_dir->string() + "' does not exist");
}

HttpService::~HttpService()
{
    stop();
}

bool HttpService::bind(const std::string& host, int port)
{
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        return port_ > 0;
    }
    if (!impl_->server.bind_to_port(host, port))
        return false;
    port_ = port;
    return true;
}

void HttpService::serve()
{
    impl_->server.listen_after_bind();
}

void HttpService::stop()
{
    impl_->server.stop();
}

}  // namespace chaosmap
