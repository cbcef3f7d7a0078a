#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <fstream>

#include "test_util.hpp"
#include "understory/camera_array.hpp"
#include "understory/errors.hpp"
#include "understory/geometry.hpp"

using namespace understory;

namespace {

Intrinsics simple_intrinsics() {
    Intrinsics intr;
    intr.fx = intr.fy = 100.0;
    intr.cx = intr.cy = 50.0;
    intr.width = intr.height = 100;
    return intr;
}

// Camera with a random attitude placed above the ground, tilted toward it.
Pose random_downward_pose(SeededRng& rng) {
    Pose pose;
    // start from nadir and perturb by a random small rotation
    const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double angle = rng.uniform(0.0, 0.35);
    pose.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * nadir_rotation();
    const Eigen::Vector3d center(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(15.0, 40.0));
    pose.translation = -pose.rotation * center;
    return pose;
}

Eigen::Vector2d dehomogenize(const Eigen::Vector3d& p) { return {p.x() / p.z(), p.y() / p.z()}; }

} // namespace

TEST_CASE("point on the optical axis projects to the principal point") {
    const Intrinsics intr = simple_intrinsics();
    const Pose pose = testutil::nadir_pose(0.0, 0.0, 12.0);
    const auto px = project(intr, pose, Eigen::Vector3d(0, 0, 0));
    REQUIRE(px);
    CHECK(px->x() == doctest::Approx(50.0));
    CHECK(px->y() == doctest::Approx(50.0));
}

TEST_CASE("hand-evaluated projection for a down-looking camera") {
    const Intrinsics intr = simple_intrinsics();
    const Pose pose = testutil::nadir_pose(0.0, 0.0, 10.0);
    const auto px = project(intr, pose, Eigen::Vector3d(1, 0, 0));
    REQUIRE(px);
    CHECK(px->x() == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(px->y() == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("points behind the camera are absent") {
    const Intrinsics intr = simple_intrinsics();
    const Pose pose = testutil::nadir_pose(0.0, 0.0, 10.0);
    CHECK_FALSE(project(intr, pose, Eigen::Vector3d(0, 0, 20.0))); // above the camera
    CHECK_FALSE(project(intr, pose, Eigen::Vector3d(0, 0, 10.0))); // on the camera plane
}

TEST_CASE("pose validation rejects non-orthonormal rotations") {
    Pose pose;
    pose.rotation(0, 0) = 1.5;
    CHECK_THROWS_AS(pose.validate(), ConfigError);
    Pose mirrored;
    mirrored.rotation = Eigen::Matrix3d::Identity();
    mirrored.rotation(2, 2) = -1.0; // det -1
    CHECK_THROWS_AS(mirrored.validate(), ConfigError);
}

TEST_CASE("intrinsics validation") {
    Intrinsics intr = simple_intrinsics();
    intr.fx = 0.0;
    CHECK_THROWS_AS(intr.validate(), ConfigError);
    intr = simple_intrinsics();
    intr.cx = 120.0;
    CHECK_THROWS_AS(intr.validate(), ConfigError);
}

TEST_CASE("homography from a camera to itself is the identity up to scale") {
    const Intrinsics intr = simple_intrinsics();
    const Pose pose = testutil::nadir_pose(1.0, -2.0, 20.0);
    const WorldPlane ground;
    Eigen::Matrix3d h = plane_homography(intr, pose, ground, intr, pose);
    h /= h(2, 2);
    CHECK((h - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("translation parallel to the plane gives a pure 2D pixel shift") {
    const Intrinsics intr = simple_intrinsics();
    const Pose ref = testutil::nadir_pose(0.0, 0.0, 20.0);
    const Pose src = testutil::nadir_pose(3.0, 1.0, 20.0);
    const WorldPlane ground;
    Eigen::Matrix3d h = plane_homography(intr, src, ground, intr, ref);
    h /= h(2, 2);
    CHECK(h(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(h(0, 1)) < 1e-12);
    CHECK(std::abs(h(1, 0)) < 1e-12);
    CHECK(std::abs(h(2, 0)) < 1e-15);
    CHECK(std::abs(h(2, 1)) < 1e-15);
    // shift = f * baseline / altitude
    CHECK(h(0, 2) == doctest::Approx(-100.0 * 3.0 / 20.0).epsilon(1e-9));
    CHECK(h(1, 2) == doctest::Approx(100.0 * 1.0 / 20.0).epsilon(1e-9));
}

TEST_CASE("homography agrees with direct projection on random on-plane points") {
    SeededRng rng(2024);
    const Intrinsics intr = simple_intrinsics();
    for (int trial = 0; trial < 20; ++trial) {
        const Pose ref = random_downward_pose(rng);
        const Pose src = random_downward_pose(rng);
        WorldPlane plane;
        plane.normal = Eigen::Vector3d(rng.normal() * 0.05, rng.normal() * 0.05, 1.0).normalized();
        plane.offset = rng.uniform(-1.0, 1.0);
        const Eigen::Matrix3d h = plane_homography(intr, src, plane, intr, ref);
        for (int i = 0; i < 100; ++i) {
            // random point on the plane near the ground footprint
            Eigen::Vector3d p(rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0), 0.0);
            p.z() = (plane.offset - plane.normal.head<2>().dot(p.head<2>())) / plane.normal.z();
            const auto ref_px = project(intr, ref, p);
            const auto src_px = project(intr, src, p);
            if (!ref_px || !src_px) continue;
            const Eigen::Vector2d mapped = dehomogenize(h * Eigen::Vector3d(ref_px->x(), ref_px->y(), 1.0));
            CHECK((mapped - *src_px).norm() < 1e-6);
        }
    }
}

TEST_CASE("homography composition is consistent over a shared plane") {
    SeededRng rng(99);
    const Intrinsics intr = simple_intrinsics();
    const WorldPlane ground;
    for (int trial = 0; trial < 10; ++trial) {
        const Pose a = random_downward_pose(rng);
        const Pose b = random_downward_pose(rng);
        const Pose c = random_downward_pose(rng);
        Eigen::Matrix3d ac = plane_homography(intr, c, ground, intr, a);
        Eigen::Matrix3d composed = plane_homography(intr, c, ground, intr, b) *
                                   plane_homography(intr, b, ground, intr, a);
        ac /= ac.norm();
        composed /= composed.norm();
        if ((ac + composed).norm() < (ac - composed).norm()) composed *= -1.0;
        CHECK((ac - composed).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("focal plane through a camera center is degenerate") {
    const Intrinsics intr = simple_intrinsics();
    const Pose pose = testutil::nadir_pose(0.0, 0.0, 10.0);
    WorldPlane plane;
    plane.offset = 10.0; // z = 10 contains the camera center
    CHECK_THROWS_WITH_AS(plane_homography(intr, pose, plane, intr, testutil::nadir_pose(1, 1, 20)),
                         doctest::Contains("focal plane through camera center"), NumericError);
}

TEST_CASE("identity warp reproduces the image with full weight") {
    const ImagePlane src = testutil::random_image(24, 18, Channel::visible, 5);
    const auto [out, weight] = warp_to_reference(src, Eigen::Matrix3d::Identity());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) {
            CHECK(out.at(x, y) == src.at(x, y));
            CHECK(weight.at(x, y) == 1.0f);
        }
}

TEST_CASE("fully out-of-frustum warp yields zero weight everywhere") {
    const ImagePlane src = testutil::random_image(16, 16, Channel::visible, 6);
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(0, 2) = 16.0; // shift by a full width
    const auto [out, weight] = warp_to_reference(src, h);
    for (const float w : weight.data()) CHECK(w == 0.0f);
    for (const float v : out.data()) CHECK(v == 0.0f);
}

TEST_CASE("half-pixel shift interpolates midpoints on a horizontal ramp") {
    ImagePlane ramp(10, 4, Channel::visible);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 10; ++x) ramp.at(x, y) = 0.1f * x;
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(0, 2) = 0.5;
    const auto [out, weight] = warp_to_reference(ramp, h);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 9; ++x) {
            CHECK(weight.at(x, y) == 1.0f);
            const double expected = 0.5 * (ramp.at(x, y) + ramp.at(x + 1, y));
            CHECK(out.at(x, y) == doctest::Approx(expected).epsilon(1e-6));
        }
}

TEST_CASE("singular homography is rejected") {
    const ImagePlane src(4, 4, Channel::visible, 0.5f);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    CHECK_THROWS_AS(warp_to_reference(src, h), NumericError);
}

TEST_CASE("camera array files use the fixed interchange field names") {
    testutil::TempDir dir("camera_array");
    CameraArray array;
    array.intrinsics = simple_intrinsics();
    ViewRecord rec;
    rec.pose = testutil::nadir_pose(1.0, 2.0, 30.0);
    rec.image_vis = "view_000_vis.png";
    rec.image_thm = "view_000_thm.png";
    array.views.push_back(rec);
    save_camera_array(array, dir / "cameras.json");

    // file carries exactly the interchange keys
    nlohmann::json j;
    std::ifstream(dir / "cameras.json") >> j;
    REQUIRE(j.contains("intrinsics"));
    for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"})
        CHECK(j.at("intrinsics").contains(key));
    REQUIRE(j.at("views").size() == 1);
    const auto& view = j.at("views")[0];
    CHECK(view.at("rotation").size() == 9);
    CHECK(view.at("translation").size() == 3);
    CHECK(view.at("image_vis") == "view_000_vis.png");
    CHECK(view.at("image_thm") == "view_000_thm.png");

    const CameraArray loaded = load_camera_array(dir / "cameras.json");
    REQUIRE(loaded.views.size() == 1);
    CHECK((loaded.views[0].pose.rotation - rec.pose.rotation).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.views[0].pose.translation - rec.pose.translation).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.intrinsics.fx == array.intrinsics.fx);
}

TEST_CASE("camera array loading validates rotations and shapes") {
    testutil::TempDir dir("camera_array_bad");
    const char* base = R"({"intrinsics":{"fx":100,"fy":100,"cx":50,"cy":50,"width":100,"height":100},)";

    std::ofstream(dir / "bad_rot.json")
        << base
        << R"("views":[{"rotation":[2,0,0,0,1,0,0,0,1],"translation":[0,0,0],)"
        << R"("image_vis":"a.png","image_thm":"b.png"}]})";
    CHECK_THROWS_WITH_AS(load_camera_array(dir / "bad_rot.json"), doctest::Contains("view 0"),
                         ConfigError);

    std::ofstream(dir / "short_rot.json")
        << base
        << R"("views":[{"rotation":[1,0,0],"translation":[0,0,0],)"
        << R"("image_vis":"a.png","image_thm":"b.png"}]})";
    CHECK_THROWS_AS(load_camera_array(dir / "short_rot.json"), ConfigError);

    std::ofstream(dir / "missing_img.json")
        << base << R"("views":[{"rotation":[1,0,0,0,1,0,0,0,1],"translation":[0,0,0]}]})";
    CHECK_THROWS_AS(load_camera_array(dir / "missing_img.json"), ConfigError);

    CHECK_THROWS_AS(load_camera_array(dir / "nope.json"), IoError);
}
