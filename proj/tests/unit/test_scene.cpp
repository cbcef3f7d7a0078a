#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "test_util.hpp"
#include "understory/errors.hpp"
#include "understory/scene.hpp"

using namespace understory;
using namespace understory::scene;

namespace {

TargetSpec person_at(double x, double y) {
    TargetSpec t;
    t.class_label = "person";
    t.center_x = x;
    t.center_y = y;
    t.length = 2.0;
    t.width = 2.0;
    t.visible_albedo = 0.9;
    t.thermal_intensity = 0.9;
    return t;
}

GenerationConfig small_config() {
    GenerationConfig config;
    config.extent = {-15.0, -15.0, 15.0, 15.0};
    config.tree_count = 6;
    config.min_separation = 3.0;
    config.targets = {person_at(0.0, 0.0)};
    return config;
}

Intrinsics nadir_intrinsics(int size = 128) {
    Intrinsics intr;
    intr.fx = intr.fy = 100.0;
    intr.cx = intr.cy = (size - 1) / 2.0;
    intr.width = intr.height = size;
    return intr;
}

int count_pixels_at(const ImagePlane& img, float value) {
    int n = 0;
    for (const float v : img.data())
        if (v == value) ++n;
    return n;
}

} // namespace

TEST_CASE("zero trees yields an empty occluder list") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    const SceneDescription scene = generate_scene(config, 1);
    CHECK(scene.occluders.empty());
    CHECK(scene.targets.size() == 1);
}

TEST_CASE("generation is deterministic at the byte level") {
    const GenerationConfig config = small_config();
    const std::string a = scene_to_json_string(generate_scene(config, 11));
    const std::string b = scene_to_json_string(generate_scene(config, 11));
    CHECK(a == b);
}

TEST_CASE("different seeds give different layouts") {
    const GenerationConfig config = small_config();
    const std::string a = scene_to_json_string(generate_scene(config, 1));
    const std::string b = scene_to_json_string(generate_scene(config, 2));
    CHECK(a != b);
}

TEST_CASE("tree placement honors the minimum separation") {
    GenerationConfig config = small_config();
    config.tree_count = 12;
    const SceneDescription scene = generate_scene(config, 5);
    REQUIRE(scene.occluders.size() == 12);
    for (std::size_t i = 0; i < scene.occluders.size(); ++i)
        for (std::size_t j = i + 1; j < scene.occluders.size(); ++j) {
            const double dx = scene.occluders[i].center_x - scene.occluders[j].center_x;
            const double dy = scene.occluders[i].center_y - scene.occluders[j].center_y;
            CHECK(std::sqrt(dx * dx + dy * dy) >= config.min_separation);
        }
}

TEST_CASE("infeasible packing reports cannot satisfy separation") {
    GenerationConfig config = small_config();
    config.extent = {-5.0, -5.0, 5.0, 5.0};
    config.tree_count = 50;
    config.min_separation = 5.0;
    config.targets.clear();
    CHECK_THROWS_WITH_AS(generate_scene(config, 3), doctest::Contains("cannot satisfy separation"),
                         NumericError);
}

TEST_CASE("scene json survives a save/load round trip byte-identically") {
    testutil::TempDir dir("scene_json");
    const SceneDescription scene = generate_scene(small_config(), 21);
    save_scene(scene, dir / "scene.json");
    const SceneDescription loaded = load_scene(dir / "scene.json");
    CHECK(scene_to_json_string(loaded) == scene_to_json_string(scene));
}

TEST_CASE("unoccluded thermal nadir view is piecewise constant") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    const SceneDescription scene = generate_scene(config, 1);
    const Intrinsics intr = nadir_intrinsics();
    const ImagePlane img =
        render_view(scene, intr, testutil::nadir_pose(0, 0, 20.0), Channel::thermal, 0);

    // target footprint: |x|,|y| < 1 m -> 10x10 pixels around the principal point
    CHECK(img.at(63, 63) == 0.9f);
    CHECK(img.at(59, 59) == 0.9f);
    CHECK(img.at(5, 5) == 0.3f);
    CHECK(count_pixels_at(img, 0.9f) == 100);
    CHECK(count_pixels_at(img, 0.3f) == 128 * 128 - 100);
}

TEST_CASE("rendering is deterministic, including noise and thread count") {
    GenerationConfig config = small_config();
    config.noise_sigma = 0.05;
    const SceneDescription scene = generate_scene(config, 9);
    const Intrinsics intr = nadir_intrinsics(64);
    const Pose pose = testutil::nadir_pose(0, 0, 25.0);
    const ImagePlane a = render_view(scene, intr, pose, Channel::thermal, 77, 1);
    const ImagePlane b = render_view(scene, intr, pose, Channel::thermal, 77, 3);
    CHECK(a.data() == b.data());
    const ImagePlane c = render_view(scene, intr, pose, Channel::thermal, 78);
    CHECK(a.data() != c.data());
}

TEST_CASE("a leaf disc between camera and target paints the center pixel") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    SceneDescription scene = generate_scene(config, 1);
    OccluderSpec occ;
    occ.center_x = 0.0;
    occ.center_y = 0.0;
    occ.z_min = 2.0;
    occ.z_max = 3.0;
    occ.canopy_radius = 0.6;
    occ.leaf_count = 1;
    occ.leaf_radius = 0.3;
    occ.leaf_thermal = 0.25;
    occ.leaves = {Eigen::Vector3d(0.0, 0.0, 2.5)};
    scene.occluders.push_back(occ);

    const Intrinsics intr = nadir_intrinsics();
    const Pose pose = testutil::nadir_pose(0, 0, 20.0);
    const ImagePlane img = render_view(scene, intr, pose, Channel::thermal, 0);

    // oracle: the pixel (63,63) ray meets the leaf plane z=2.5 at
    // 0.875 * (-0.1, 0.1), i.e. 0.124 m from the disc axis -- inside the
    // 0.3 m radius, so the leaf paints it.
    CHECK(img.at(63, 63) == 0.25f);
    // a target pixel well away from the disc footprint stays hot
    CHECK(img.at(59, 59) == 0.9f);
}

TEST_CASE("adding leaves never increases target-colored pixels") {
    GenerationConfig config = small_config();
    config.tree_count = 3;
    SceneDescription scene = generate_scene(config, 13);
    const Intrinsics intr = nadir_intrinsics();
    const Pose pose = testutil::nadir_pose(0, 0, 25.0);

    int previous = count_pixels_at(render_view(scene, intr, pose, Channel::thermal, 0), 0.9f);
    SeededRng rng(55);
    for (int step = 0; step < 8; ++step) {
        OccluderSpec& occ = scene.occluders[step % scene.occluders.size()];
        occ.leaves.emplace_back(occ.center_x + rng.uniform(-0.5, 0.5),
                                occ.center_y + rng.uniform(-0.5, 0.5),
                                rng.uniform(occ.z_min, occ.z_max));
        occ.leaf_count += 1;
        const int now = count_pixels_at(render_view(scene, intr, pose, Channel::thermal, 0), 0.9f);
        CHECK(now <= previous);
        previous = now;
    }
}

TEST_CASE("camera below ground is rejected") {
    const SceneDescription scene = generate_scene(small_config(), 1);
    const Intrinsics intr = nadir_intrinsics();
    CHECK_THROWS_AS(render_view(scene, intr, testutil::nadir_pose(0, 0, -5.0), Channel::thermal, 0),
                    ConfigError);
}

TEST_CASE("renderable channels are visible and thermal only") {
    const SceneDescription scene = generate_scene(small_config(), 1);
    const Intrinsics intr = nadir_intrinsics();
    const Pose pose = testutil::nadir_pose(0, 0, 20.0);
    CHECK_THROWS_AS(render_view(scene, intr, pose, Channel::fused, 0), ConfigError);
}

TEST_CASE("visible channel carries ground texture and target albedo") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    const SceneDescription scene = generate_scene(config, 31);
    const Intrinsics intr = nadir_intrinsics();
    const ImagePlane img =
        render_view(scene, intr, testutil::nadir_pose(0, 0, 20.0), Channel::visible, 0);
    CHECK(img.at(63, 63) == 0.9f); // target albedo
    std::set<float> background;
    for (int x = 0; x < 40; ++x) background.insert(img.at(x, 5));
    CHECK(background.size() > 10); // textured, not constant
    for (const float v : background) {
        CHECK(v >= 0.25f);
        CHECK(v <= 0.75f);
    }
}

TEST_CASE("ground truth is empty for a target outside the frustum") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    config.targets = {person_at(500.0, 0.0)};
    config.extent = {-600, -600, 600, 600};
    const SceneDescription scene = generate_scene(config, 1);
    const Intrinsics intr = nadir_intrinsics();
    CHECK(export_ground_truth(scene, intr, testutil::nadir_pose(0, 0, 20.0)).empty());
}

TEST_CASE("centered target yields a box centered on the principal point") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    const SceneDescription scene = generate_scene(config, 1);
    const Intrinsics intr = nadir_intrinsics();
    const auto records = export_ground_truth(scene, intr, testutil::nadir_pose(0, 0, 20.0), "img0");
    REQUIRE(records.size() == 1);
    CHECK(records[0].image_id == "img0");
    CHECK(records[0].class_label == "person");
    const BBoxPx& box = records[0].box;
    CHECK((box.x_min + box.x_max) / 2 == doctest::Approx(intr.cx).epsilon(1e-9));
    CHECK((box.y_min + box.y_max) / 2 == doctest::Approx(intr.cy).epsilon(1e-9));
    CHECK(box.x_max - box.x_min == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("off-axis box equals the hull of the projected corners") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    config.targets = {person_at(4.0, -3.0)};
    const SceneDescription scene = generate_scene(config, 1);
    const Intrinsics intr = nadir_intrinsics();
    const Pose pose = testutil::nadir_pose(1.0, 0.5, 22.0);
    const auto records = export_ground_truth(scene, intr, pose);
    REQUIRE(records.size() == 1);

    double u_min = 1e9, u_max = -1e9, v_min = 1e9, v_max = -1e9;
    for (const double dx : {-1.0, 1.0})
        for (const double dy : {-1.0, 1.0}) {
            const auto px = project(intr, pose, Eigen::Vector3d(4.0 + dx, -3.0 + dy, 0.0));
            REQUIRE(px);
            u_min = std::min(u_min, px->x());
            u_max = std::max(u_max, px->x());
            v_min = std::min(v_min, px->y());
            v_max = std::max(v_max, px->y());
        }
    CHECK(records[0].box.x_min == doctest::Approx(u_min).epsilon(1e-12));
    CHECK(records[0].box.x_max == doctest::Approx(u_max).epsilon(1e-12));
    CHECK(records[0].box.y_min == doctest::Approx(v_min).epsilon(1e-12));
    CHECK(records[0].box.y_max == doctest::Approx(v_max).epsilon(1e-12));
}

TEST_CASE("ground-truth boxes are clipped to the image bounds") {
    GenerationConfig config = small_config();
    config.tree_count = 0;
    config.targets = {person_at(12.5, 0.0)}; // straddles the right image edge at h=20
    const SceneDescription scene = generate_scene(config, 1);
    const Intrinsics intr = nadir_intrinsics();
    const auto records = export_ground_truth(scene, intr, testutil::nadir_pose(0, 0, 20.0));
    REQUIRE(records.size() == 1);
    CHECK(records[0].box.valid());
    CHECK(records[0].box.x_max <= intr.width - 1);
    CHECK(records[0].box.x_min >= 0.0);
}

TEST_CASE("scene validation rejects cold targets and bad occluders") {
    GenerationConfig config = small_config();
    config.targets[0].thermal_intensity = 0.2; // colder than ambient 0.3
    CHECK_THROWS_AS(generate_scene(config, 1), ConfigError);

    SceneDescription scene = generate_scene(small_config(), 1);
    scene.occluders.push_back(OccluderSpec{});
    CHECK_THROWS_AS(scene.validate(), ConfigError);
}
