#include "doctest.h"

#include "chaosmap/errors.hpp"
#include "chaosmap/service.hpp"

#include "httplib.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

using namespace chaosmap;
using nlohmann::json;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("chaosmap-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json status_of(const fs::path& root, const std::string& id)
{
    return json::parse(slurp(root / "jobs" / id / "status.json"));
}

// A small Lorenz batch that finishes in well under a second.
json quick_batch(int k = 4, std::uint64_t seed = 7)
{
    return {{"system_id", "lorenz"},
            {"box", json::array({{{"name", "r"}, {"lo", 20}, {"hi", 30}},
                                 {{"name", "ic.x"}, {"lo", -5}, {"hi", 5}}})},
            {"k", k},
            {"mh_config", {{"steps", 10}, {"phase1_steps", 10}, {"seed", seed}}},
            {"lyap_config", {{"T0", 10}, {"dt", 0.01}, {"max_doublings", 3}}}};
}

}  // namespace

TEST_CASE("axis filters")
{
    AxisFilter f = parse_axis_filter("ic.x:-1.5:2");
    CHECK(f.name == "ic.x");
    CHECK(f.lo == -1.5);
    CHECK(f.hi == 2.0);
    CHECK(parse_axis_filter("a:b:1:2").name == "a:b");
    for (const char* bad : {"x", "x:1", ":1:2", "x:a:2", "x:1:b"})
        CHECK_THROWS_AS(parse_axis_filter(bad), ContractError);
}

TEST_CASE("job lifecycle and persisted files")
{
    TempDir dir;
    JobStore store(dir.path, 2);
    const std::string id = store.create_job(quick_batch());
    CHECK(id == "job-000001");
    json doc = store.job_document(id);
    CHECK(doc["kind"] == "sample_batch");
    CHECK(doc["progress"]["total"] == 4);
    CHECK(doc["parent_id"].is_null());
    CHECK(doc["request"]["mh_config"]["alpha_max"] == MHConfig{}.alpha_max);

    REQUIRE(store.wait_finished(id, 60s));
    doc = store.job_document(id);
    CHECK(doc["status"] == "done");
    CHECK(doc["progress"]["completed"] == 4);
    CHECK(doc["finished_at"].is_string());

    const fs::path jd = dir.path / "jobs" / id;
    for (const char* f : {"request.json", "status.json", "results.csv", "results.jsonl"})
        CHECK(fs::exists(jd / f));
    CHECK(status_of(dir.path, id)["status"] == "done");
    CHECK(store.results_csv(id) == slurp(jd / "results.csv"));
    CHECK(store.samples(id, {}).size() == 4);
    CHECK(store.job_ids() == std::vector<std::string>{id});
    CHECK_THROWS_AS(store.result_json(id), ContractError);
    CHECK_THROWS_AS(store.job_document("job-999999"), NotFoundError);
}

TEST_CASE("invalid requests are rejected without persisting anything")
{
    TempDir dir;
    JobStore store(dir.path, 1);
    json bad = quick_batch();
    bad["system_id"] = "nope";
    CHECK_THROWS_AS(store.create_job(bad), ContractError);
    bad = quick_batch();
    bad["box"][0]["name"] = "q";
    CHECK_THROWS_AS(store.create_job(bad), ContractError);
    bad = quick_batch();
    bad["k"] = 0;
    CHECK_THROWS_AS(store.create_job(bad), ContractError);
    CHECK(store.job_ids().empty());
    CHECK(fs::is_empty(dir.path / "jobs"));
}

TEST_CASE("identical submissions are distinct jobs with identical results")
{
    TempDir dir;
    JobStore store(dir.path, 1);
    const std::string a = store.create_job(quick_batch());
    const std::string b = store.create_job(quick_batch());
    CHECK(a != b);
    REQUIRE(store.wait_finished(a, 60s));
    REQUIRE(store.wait_finished(b, 60s));
    CHECK(store.results_csv(a) == store.results_csv(b));
}

TEST_CASE("sample filters")
{
    TempDir dir;
    JobStore store(dir.path, 1);
    const std::string id = store.create_job(quick_batch(6));
    REQUIRE(store.wait_finished(id, 60s));
    CHECK(store.samples(id, {{"r", 20, 30}, {"ic.x", -5, 5}}).size() == 6);
    CHECK(store.samples(id, {{"r", 30, 20}}).empty());
    for (const auto& row : store.samples(id, {{"r", 20, 25}})) {
        CHECK(row["r"].get<double>() >= 20);
        CHECK(row["r"].get<double>() <= 25);
    }
    // Rows with a null value never match a filter on that axis.
    for (const auto& row : store.samples(id, {{"mle", -1e9, 1e9}}))
        CHECK(row["mle"].is_number());
    CHECK_THROWS_AS(store.samples(id, {{"sigma", 0, 1}}), ContractError);
}

TEST_CASE("refinement")
{
    TempDir dir;
    JobStore store(dir.path, 1);
    const std::string parent = store.create_job(quick_batch());

    json inner = json::array({{{"name", "r"}, {"lo", 22}, {"hi", 24}}, {{"name", "ic.x"}, {"lo", 0}, {"hi", 1}}});
    const std::string child = store.refine_job(parent, inner);
    json doc = store.job_document(child);
    CHECK(doc["parent_id"] == parent);
    CHECK(doc["request"]["k"] == 4);
    CHECK(doc["request"]["box"][0]["lo"] == 22);
    CHECK(doc["request"]["mh_config"] == store.job_document(parent)["request"]["mh_config"]);

    // Object form loses key order; coordinates are matched by name.
    const std::string byname = store.refine_job(parent, json::parse(R"({"ic.x":[0,1],"r":[22,24]})"));
    CHECK(store.job_document(byname)["request"]["box"] == doc["request"]["box"]);

    // The parent box itself is contained.
    CHECK_NOTHROW(store.refine_job(parent, store.job_document(parent)["request"]["box"]));

    json outside = inner;
    outside[0]["hi"] = 31;
    CHECK_THROWS_AS(store.refine_job(parent, outside), ContractError);
    json missing = json::array({inner[0]});
    CHECK_THROWS_AS(store.refine_job(parent, missing), ContractError);
    json extra = inner;
    extra.push_back({{"name", "sigma"}, {"lo", 9}, {"hi", 11}});
    CHECK_THROWS_AS(store.refine_job(parent, extra), ContractError);
    CHECK_THROWS_AS(store.refine_job("job-424242", inner), NotFoundError);

    REQUIRE(store.wait_finished(child, 60s));
    for (const auto& row : store.samples(child, {})) {
        CHECK(row["r"].get<double>() >= 22);
        CHECK(row["r"].get<double>() <= 24);
    }
}

TEST_CASE("other job kinds")
{
    TempDir dir;
    JobStore store(dir.path, 2);
    const std::string ly = store.create_job({{"kind", "lyapunov_single"},
                                             {"system_id", "linear_diag"},
                                             {"set", {{"ic.y1", 1}, {"ic.y2", 1}}},
                                             {"lyap_config", {{"T0", 10}}}});
    const std::string bif = store.create_job({{"kind", "bifurcation"},
                                              {"system_id", "relaxation"},
                                              {"param", "p"},
                                              {"lo", 0},
                                              {"hi", 1},
                                              {"points", 3},
                                              {"t_total", 30},
                                              {"window_start", 20},
                                              {"window_samples", 2}});
    REQUIRE(store.wait_finished(ly, 60s));
    REQUIRE(store.wait_finished(bif, 60s));
    json r = store.result_json(ly);
    CHECK(r["classification"] == "non_chaotic");
    CHECK(r["mle"].get<double>() == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(store.result_json(bif)["columns"].size() == 3);
    CHECK(store.results_csv(bif).rfind("param_value,observable,t,value\n", 0) == 0);
    CHECK_THROWS_AS(store.samples(ly, {}), ContractError);
    CHECK_THROWS_AS(store.results_csv(ly), ContractError);
}

TEST_CASE("restart reloads finished jobs and re-runs unfinished ones")
{
    TempDir dir;
    std::string done_id, requeued_id, done_csv;
    {
        JobStore store(dir.path, 1);
        done_id = store.create_job(quick_batch(3, 1));
        requeued_id = store.create_job(quick_batch(3, 2));
        REQUIRE(store.wait_finished(done_id, 60s));
        REQUIRE(store.wait_finished(requeued_id, 60s));
        done_csv = store.results_csv(done_id);
    }
    const fs::path rq = dir.path / "jobs" / requeued_id;
    const std::string expected = slurp(rq / "results.csv");
    // Simulate a crash mid-run: status says running, partial output only.
    json st = status_of(dir.path, requeued_id);
    st["status"] = "running";
    st["progress"]["completed"] = 1;
    st["finished_at"] = nullptr;
    std::ofstream(rq / "status.json") << st.dump();
    fs::remove(rq / "results.jsonl");

    JobStore store(dir.path, 3);
    CHECK(store.job_document(done_id)["status"] == "done");
    CHECK(store.results_csv(done_id) == done_csv);
    CHECK(store.samples(done_id, {}).size() == 3);
    REQUIRE(store.wait_finished(requeued_id, 60s));
    CHECK(store.job_document(requeued_id)["status"] == "done");
    CHECK(slurp(rq / "results.csv") == expected);
    // New ids continue after the highest existing one.
    CHECK(store.create_job(quick_batch(1)) == "job-000003");
}

TEST_CASE("shutdown leaves an interrupted job resumable")
{
    TempDir dir;
    std::string id;
    {
        JobStore store(dir.path, 1);
        json slow = quick_batch(200);
        slow["mh_config"]["steps"] = 50;
        id = store.create_job(slow);
        for (int i = 0; i < 2000 && store.job_document(id)["progress"]["completed"] == 0; ++i)
            std::this_thread::sleep_for(5ms);
        store.shutdown();
        CHECK(store.job_document(id)["status"] == "running");
    }
    CHECK(status_of(dir.path, id)["status"] == "running");
    CHECK_FALSE(fs::exists(dir.path / "jobs" / id / "results.csv"));
    JobStore store(dir.path, 1);
    CHECK(store.job_document(id)["status"] == "queued");
    CHECK(store.job_document(id)["progress"]["completed"] == 0);
}

TEST_CASE("invalid data directories")
{
    TempDir dir;
    std::ofstream(dir.path / "file") << "x";
    CHECK_THROWS_AS(JobStore(dir.path / "file", 1), ContractError);
    CHECK_THROWS_AS(JobStore(dir.path, 0), ContractError);
    if (::geteuid() != 0) {
        fs::create_directories(dir.path / "ro");
        fs::permissions(dir.path / "ro", fs::perms::owner_read | fs::perms::owner_exec);
        CHECK_THROWS_AS(JobStore(dir.path / "ro", 1), ContractError);
        fs::permissions(dir.path / "ro", fs::perms::owner_all);
    }
}

TEST_CASE("HTTP API")
{
    TempDir dir;
    JobStore store(dir.path, 2);
    HttpService http(store);
    REQUIRE(http.bind("127.0.0.1", 0));
    std::thread server([&] { http.serve(); });
    httplib::Client cli("127.0.0.1", http.port());
    cli.set_read_timeout(30, 0);

    auto systems = cli.Get("/api/systems?include_hidden=1");
    REQUIRE(systems);
    CHECK(systems->status == 200);
    json catalog = json::parse(systems->body);
    CHECK(catalog.is_array());
    bool has_lorenz = false;
    for (const auto& s : catalog)
        has_lorenz |= s["id"] == "lorenz";
    CHECK(has_lorenz);

    json bad = quick_batch();
    bad["system_id"] = "nope";
    auto r422 = cli.Post("/api/jobs", bad.dump(), "application/json");
    REQUIRE(r422);
    CHECK(r422->status == 422);
    CHECK(json::parse(r422->body).contains("error"));

    auto r400 = cli.Post("/api/jobs", "{not json", "application/json");
    REQUIRE(r400);
    CHECK(r400->status == 400);

    auto created = cli.Post("/api/jobs", quick_batch().dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["id"];
    REQUIRE(store.wait_finished(id, 60s));

    auto doc = cli.Get("/api/jobs/" + id);
    REQUIRE(doc);
    CHECK(doc->status == 200);
    CHECK(json::parse(doc->body)["status"] == "done");

    auto list = cli.Get("/api/jobs");
    REQUIRE(list);
    CHECK(json::parse(list->body).size() == 1);

    auto samples = cli.Get("/api/jobs/" + id + "/samples?axis=r:20:30&axis=ic.x:-5:5");
    REQUIRE(samples);
    CHECK(samples->status == 200);
    CHECK(json::parse(samples->body).size() == 4);
    auto empty = cli.Get("/api/jobs/" + id + "/samples?axis=r:29:21");
    REQUIRE(empty);
    CHECK(json::parse(empty->body).empty());
    auto badaxis = cli.Get("/api/jobs/" + id + "/samples?axis=zz:0:1");
    REQUIRE(badaxis);
    CHECK(badaxis->status == 422);

    auto csv = cli.Get("/api/jobs/" + id + "/results.csv");
    REQUIRE(csv);
    CHECK(csv->status == 200);
    CHECK(csv->body == slurp(dir.path / "jobs" / id / "results.csv"));

    json inner = {{"box", json::array({{{"name", "r"}, {"lo", 21}, {"hi", 22}}, {{"name", "ic.x"}, {"lo", 0}, {"hi", 1}}})}};
    auto refined = cli.Post("/api/jobs/" + id + "/refine", inner.dump(), "application/json");
    REQUIRE(refined);
    CHECK(refined->status == 201);
    const std::string child = json::parse(refined->body)["id"];
    CHECK(store.job_document(child)["parent_id"] == id);
    inner["box"][0]["hi"] = 99;
    auto outside = cli.Post("/api/jobs/" + id + "/refine", inner.dump(), "application/json");
    REQUIRE(outside);
    CHECK(outside->status == 422);

    auto missing = cli.Get("/api/jobs/job-777777");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    // A second server cannot take the same port.
    HttpService other(store);
    CHECK_FALSE(other.bind("127.0.0.1", http.port()));

    http.stop();
    server.join();
    REQUIRE(store.wait_finished(child, 60s));
}
