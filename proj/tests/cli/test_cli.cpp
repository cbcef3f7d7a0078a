#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "understory/sha256.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
    std::string error;
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::filesystem::path& cwd) {
    const auto out_file = cwd / "_stdout.txt";
    const auto err_file = cwd / "_stderr.txt";
    std::string cmd = "cd '" + cwd.string() + "' && '" + UNDERSTORY_CLI_PATH + "' " + args + " > '" +
                      out_file.string() + "' 2> '" + err_file.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = slurp(out_file);
    result.error = slurp(err_file);
    std::filesystem::remove(out_file);
    std::filesystem::remove(err_file);
    return result;
}

// every failure path must leave machine-readable JSON on stderr
void check_error_json(const RunResult& result, int code) {
    CHECK(result.exit_code == code);
    const json j = json::parse(result.error, nullptr, false);
    REQUIRE_FALSE(j.is_discarded());
    CHECK(j.at("error").at("code") == code);
    CHECK(j.at("error").contains("message"));
}

// small, fast experiment config shared by the scenarios
const char* kSmallOverrides =
    "--set camera_array.image_width=96 --set camera_array.image_height=96 "
    "--set camera_array.fx=80 --set camera_array.fy=80 --set camera_array.grid=[2,2] "
    "--set scene.tree_count=4 --set scene.extent.x_min=-10 --set scene.extent.y_min=-10 "
    "--set scene.extent.x_max=10 --set scene.extent.y_max=10";

} // namespace

TEST_CASE("gen-scene writes a deterministic scene") {
    testutil::TempDir dir("cli_gen");
    const std::string cmd = std::string("gen-scene --seed 5 --out s1 ") + kSmallOverrides;
    CHECK(run_cli(cmd, dir.path()).exit_code == 0);
    CHECK(run_cli(std::string("gen-scene --seed 5 --out s2 ") + kSmallOverrides, dir.path()).exit_code == 0);
    const std::string a = slurp(dir / "s1/scene.json");
    const std::string b = slurp(dir / "s2/scene.json");
    CHECK(a == b);
    CHECK_FALSE(a.empty());

    // different seed -> different bytes
    CHECK(run_cli(std::string("gen-scene --seed 6 --out s3 ") + kSmallOverrides, dir.path()).exit_code == 0);
    CHECK(slurp(dir / "s3/scene.json") != a);
}

TEST_CASE("gen-scene degenerate and invalid inputs") {
    testutil::TempDir dir("cli_gen_err");
    // empty forest is a valid degenerate config
    const auto empty = run_cli("gen-scene --seed 1 --out empty --set scene.tree_count=0", dir.path());
    CHECK(empty.exit_code == 0);
    const json scene = json::parse(slurp(dir / "empty/scene.json"));
    CHECK(scene.at("occluders").empty());

    // bad config value -> exit 2
    check_error_json(run_cli("gen-scene --out x --set scene.tree_count=-3", dir.path()), 2);
    // missing --out -> exit 2
    check_error_json(run_cli("gen-scene --seed 1", dir.path()), 2);
    // unsatisfiable packing -> exit 4
    check_error_json(
        run_cli("gen-scene --out y --set scene.tree_count=200 --set scene.min_separation=40",
                dir.path()),
        4);
    // unknown flag -> exit 2
    check_error_json(run_cli("gen-scene --frobnicate", dir.path()), 2);
}

TEST_CASE("render produces the advertised artifacts deterministically") {
    testutil::TempDir dir("cli_render");
    REQUIRE(run_cli(std::string("gen-scene --seed 7 --out scene ") + kSmallOverrides, dir.path())
                .exit_code == 0);
    const std::string render_cmd =
        std::string("render --scene scene/scene.json --seed 7 --out views ") + kSmallOverrides;
    REQUIRE(run_cli(render_cmd, dir.path()).exit_code == 0);
    for (const char* name :
         {"views/cameras.json", "views/ground_truth.json", "views/scene.json",
          "views/view_000_vis.png", "views/view_000_thm.png", "views/view_003_thm.png"})
        CHECK(std::filesystem::exists(dir / name));

    const json cameras = json::parse(slurp(dir / "views/cameras.json"));
    CHECK(cameras.at("views").size() == 4);
    CHECK(cameras.at("intrinsics").at("width") == 96);

    // byte-identical re-render
    REQUIRE(run_cli(std::string("render --scene scene/scene.json --seed 7 --out views2 ") +
                        kSmallOverrides,
                    dir.path())
                .exit_code == 0);
    CHECK(slurp(dir / "views/view_002_thm.png") == slurp(dir / "views2/view_002_thm.png"));
    CHECK(slurp(dir / "views/cameras.json") == slurp(dir / "views2/cameras.json"));

    // missing scene file -> exit 3
    check_error_json(run_cli("render --scene nope.json --out z", dir.path()), 3);
}

TEST_CASE("refocus emits integral, coverage and sweep report") {
    testutil::TempDir dir("cli_refocus");
    REQUIRE(run_cli(std::string("gen-scene --seed 9 --out scene ") + kSmallOverrides, dir.path())
                .exit_code == 0);
    REQUIRE(run_cli(std::string("render --scene scene/scene.json --seed 9 --out views ") +
                        kSmallOverrides,
                    dir.path())
                .exit_code == 0);

    const auto res = run_cli(
        "refocus --views views --plane-height 0 --plane-height 2.5 --out focus", dir.path());
    REQUIRE(res.exit_code == 0);
    for (const char* name : {"focus/integral_0.png", "focus/coverage_0.png",
                             "focus/integral_2.5.png", "focus/coverage_2.5.png",
                             "focus/sweep_report.json"})
        CHECK(std::filesystem::exists(dir / name));

    const json report = json::parse(slurp(dir / "focus/sweep_report.json"));
    CHECK(report.at("channel") == "thermal");
    CHECK(report.at("n_views") == 4);
    REQUIRE(report.at("planes").size() == 2);
    CHECK(report.at("planes")[0].contains("mean_visibility"));
    // ground plane should be at least as salient as the canopy plane
    const double ground = report.at("planes")[0].at("mean_visibility");
    const double canopy = report.at("planes")[1].at("mean_visibility");
    CHECK(ground > canopy);

    // focal plane through the camera altitude -> exit 4
    check_error_json(run_cli("refocus --views views --plane-height 30 --out bad", dir.path()), 4);
    // bad channel -> exit 2
    check_error_json(run_cli("refocus --views views --channel fused --out bad2", dir.path()), 2);
    // missing views dir -> exit 3
    check_error_json(run_cli("refocus --views nowhere --out bad3", dir.path()), 3);
}

TEST_CASE("fuse runs on co-registered pairs and rejects mismatches") {
    testutil::TempDir dir("cli_fuse");
    REQUIRE(run_cli(std::string("gen-scene --seed 4 --out scene ") + kSmallOverrides, dir.path())
                .exit_code == 0);
    REQUIRE(run_cli(std::string("render --scene scene/scene.json --seed 4 --out views ") +
                        kSmallOverrides,
                    dir.path())
                .exit_code == 0);

    const auto res = run_cli(
        "fuse --visible views/view_000_vis.png --thermal views/view_000_thm.png --out f_fused.png",
        dir.path());
    REQUIRE(res.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "f_fused.png"));

    // determinism
    REQUIRE(run_cli("fuse --visible views/view_000_vis.png --thermal views/view_000_thm.png "
                    "--out f2_fused.png",
                    dir.path())
                .exit_code == 0);
    CHECK(slurp(dir / "f_fused.png") == slurp(dir / "f2_fused.png"));

    // mismatched input sizes -> exit 2 (no implicit resize)
    REQUIRE(run_cli(std::string("render --scene scene/scene.json --seed 4 --out small ") +
                        kSmallOverrides +
                        " --set camera_array.image_width=64 --set camera_array.image_height=64",
                    dir.path())
                .exit_code == 0);
    check_error_json(
        run_cli("fuse --visible views/view_000_vis.png --thermal small/view_000_thm.png "
                "--out bad.png",
                dir.path()),
        2);
    // missing file -> exit 3
    check_error_json(run_cli("fuse --visible nope.png --thermal views/view_000_thm.png --out b.png",
                             dir.path()),
                     3);
}

TEST_CASE("evaluate scores the hand fixture") {
    testutil::TempDir dir("cli_eval");
    std::ofstream(dir / "gt.json")
        << R"([{"image_id":"a","class":"person","box":[0,0,10,10]},)"
        << R"({"image_id":"a","class":"person","box":[40,40,50,50]}])";
    std::ofstream(dir / "dets.json")
        << R"([{"image_id":"a","class":"person","box":[0,0,10,10],"score":0.9},)"
        << R"({"image_id":"a","class":"person","box":[70,70,80,80],"score":0.8},)"
        << R"({"image_id":"a","class":"person","box":[40,40,50,50],"score":0.7}])";

    const auto res = run_cli(
        "evaluate --detections dets.json --ground-truth gt.json --out report.json --pr-csv pr.csv",
        dir.path());
    REQUIRE(res.exit_code == 0);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report.at("map").get<double>() == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    REQUIRE(report.at("classes").size() == 1);
    CHECK(report.at("classes")[0].at("n_gt") == 2);
    CHECK(std::filesystem::exists(dir / "pr.csv"));

    // empty inputs -> no defined AP -> exit 2
    std::ofstream(dir / "empty.json") << "[]";
    check_error_json(
        run_cli("evaluate --detections empty.json --ground-truth empty.json --out r.json",
                dir.path()),
        2);
    // invalid score names the row -> exit 2
    std::ofstream(dir / "bad.json")
        << R"([{"image_id":"a","class":"person","box":[0,0,10,10],"score":1.5}])";
    const auto bad = run_cli("evaluate --detections bad.json --ground-truth gt.json --out r.json",
                             dir.path());
    check_error_json(bad, 2);
    CHECK(bad.error.find("row 0") != std::string::npos);
    // out-of-range threshold -> exit 2
    check_error_json(run_cli("evaluate --detections dets.json --ground-truth gt.json "
                             "--iou-threshold 0 --out r.json",
                             dir.path()),
                     2);
}

TEST_CASE("class-summary prints and writes the count table") {
    testutil::TempDir dir("cli_summary");
    std::ofstream(dir / "gt.json") << R"([{"image_id":"a","class":"person","box":[0,0,10,10]},)"
                                   << R"({"image_id":"a","class":"car","box":[20,20,30,30]},)"
                                   << R"({"image_id":"b","class":"car","box":[0,0,10,10]}])";
    const auto res = run_cli("class-summary --ground-truth gt.json --out counts.json", dir.path());
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("car") != std::string::npos);
    const json counts = json::parse(slurp(dir / "counts.json"));
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].at("class") == "car"); // sorted by ground-truth count
    CHECK(counts[0].at("ground_truth") == 2);

    // empty ground truth is a valid degenerate input
    std::ofstream(dir / "empty.json") << "[]";
    const auto empty = run_cli("class-summary --ground-truth empty.json --out e.json", dir.path());
    CHECK(empty.exit_code == 0);
    CHECK(json::parse(slurp(dir / "e.json")).empty());

    check_error_json(run_cli("class-summary --ground-truth missing.json", dir.path()), 3);
}

TEST_CASE("version flag") {
    testutil::TempDir dir("cli_version");
    const auto res = run_cli("--version", dir.path());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("understory") != std::string::npos);
}

TEST_CASE("pipeline manifests are byte-identical across runs and thread counts") {
    testutil::TempDir dir("cli_pipeline");
    const std::string base = std::string("pipeline --seed 11 ") + kSmallOverrides +
                             " --set scene.noise_sigma=0.02 --set focal_planes=[0]";
    REQUIRE(run_cli(base + " --threads 1 --out p1", dir.path()).exit_code == 0);
    REQUIRE(run_cli(base + " --threads 3 --out p2", dir.path()).exit_code == 0);
    const std::string m1 = slurp(dir / "p1/manifest.json");
    CHECK_FALSE(m1.empty());
    CHECK(m1 == slurp(dir / "p2/manifest.json"));

    // manifest hashes actually match the artifact bytes
    const json manifest = json::parse(m1);
    REQUIRE(manifest.at("artifacts").size() > 5);
    for (const auto& entry : manifest.at("artifacts")) {
        const auto path = dir / "p1" / entry.at("path").get<std::string>();
        CHECK(understory::sha256_file_hex(path) == entry.at("sha256").get<std::string>());
    }

    // fused output exists per focal plane
    CHECK(std::filesystem::exists(dir / "p1/fused/fused_0.png"));

    // missing config file -> exit 3
    check_error_json(run_cli("pipeline --config missing.json --out p3", dir.path()), 3);
}
