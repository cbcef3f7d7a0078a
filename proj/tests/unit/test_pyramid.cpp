#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "understory/errors.hpp"
#include "understory/pyramid.hpp"

using namespace understory;
using namespace understory::fusion;

namespace {

double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
    REQUIRE(a.same_shape(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(double(a.data()[i]) - double(b.data()[i])));
    return worst;
}

double energy(const ImagePlane& img) {
    double e = 0.0;
    for (const float v : img.data()) e += double(v) * v;
    return e;
}

} // namespace

TEST_CASE("constant images decompose to zero details and a constant base") {
    const ImagePlane img(32, 32, Channel::visible, 0.37f);
    const Pyramid pyr = pyramid_decompose(img, 3);
    REQUIRE(pyr.levels.size() == 3);
    for (const auto& level : pyr.levels)
        for (const float v : level.data()) CHECK(std::abs(v) < 1e-6f);
    for (const float v : pyr.base.data()) CHECK(v == doctest::Approx(0.37).epsilon(1e-6));
}

TEST_CASE("level dimensions follow ceil halving") {
    const ImagePlane img = testutil::random_image(65, 41, Channel::visible, 1);
    const Pyramid pyr = pyramid_decompose(img, 3);
    CHECK(pyr.levels[0].width() == 65);
    CHECK(pyr.levels[1].width() == 33);
    CHECK(pyr.levels[2].width() == 17);
    CHECK(pyr.base.width() == 9);
    CHECK(pyr.levels[1].height() == 21);
    CHECK(pyr.levels[2].height() == 11);
    CHECK(pyr.base.height() == 6);
}

TEST_CASE("reconstruction inverts decomposition within 1e-5") {
    SeededRng rng(404);
    for (int trial = 0; trial < 12; ++trial) {
        const int w = 32 + static_cast<int>(rng.uniform_index(97));
        const int h = 32 + static_cast<int>(rng.uniform_index(97));
        const ImagePlane img = testutil::random_image(w, h, Channel::visible, 500 + trial);
        const int max_depth = static_cast<int>(std::floor(std::log2(std::min(w, h) / 4.0)));
        for (int depth = 1; depth <= std::min(4, max_depth); ++depth) {
            const ImagePlane back = pyramid_reconstruct(pyramid_decompose(img, depth));
            CHECK(max_abs_diff(img, back) <= 1e-5);
        }
    }
}

TEST_CASE("an impulse concentrates its energy in the finest level") {
    ImagePlane img(32, 32, Channel::visible, 0.0f);
    img.at(16, 16) = 1.0f;
    const Pyramid pyr = pyramid_decompose(img, 3);
    double total = energy(pyr.base);
    for (const auto& level : pyr.levels) total += energy(level);
    CHECK(energy(pyr.levels[0]) / total > 0.5);
}

TEST_CASE("excessive depth is rejected") {
    const ImagePlane img(32, 32, Channel::visible, 0.5f);
    CHECK_THROWS_AS(pyramid_decompose(img, 4), ConfigError); // 32/16 = 2 < 4
    CHECK_THROWS_AS(pyramid_decompose(img, 0), ConfigError);
    CHECK_NOTHROW(pyramid_decompose(img, 3));
}

TEST_CASE("empty-detail pyramids reconstruct to the upsampled base") {
    const ImagePlane base = testutil::random_image(8, 8, Channel::visible, 9);
    Pyramid pyr;
    pyr.depth = 2;
    pyr.levels.emplace_back(32, 32, Channel::visible, 0.0f);
    pyr.levels.emplace_back(16, 16, Channel::visible, 0.0f);
    pyr.base = base;
    const ImagePlane out = pyramid_reconstruct(pyr);
    const ImagePlane expected = upsample_to(upsample_to(base, 16, 16), 32, 32);
    CHECK(max_abs_diff(out, expected) == 0.0);
}

TEST_CASE("inconsistent level dimensions are rejected") {
    Pyramid pyr;
    pyr.depth = 2;
    pyr.levels.emplace_back(32, 32, Channel::visible, 0.0f);
    pyr.levels.emplace_back(20, 16, Channel::visible, 0.0f); // should be 16x16
    pyr.base = ImagePlane(8, 8, Channel::visible, 0.0f);
    CHECK_THROWS_AS(pyramid_reconstruct(pyr), ConfigError);

    Pyramid bad_base = pyr;
    bad_base.levels[1] = ImagePlane(16, 16, Channel::visible, 0.0f);
    bad_base.base = ImagePlane(9, 8, Channel::visible, 0.0f);
    CHECK_THROWS_AS(pyramid_reconstruct(bad_base), ConfigError);
}

TEST_CASE("reconstruct-then-decompose reproduces level energies") {
    const ImagePlane img = testutil::random_image(64, 48, Channel::visible, 77);
    const Pyramid pyr = pyramid_decompose(img, 3);
    const Pyramid again = pyramid_decompose(pyramid_reconstruct(pyr), 3);
    for (int k = 0; k < 3; ++k)
        CHECK(energy(again.levels[k]) == doctest::Approx(energy(pyr.levels[k])).epsilon(1e-4));
    CHECK(energy(again.base) == doctest::Approx(energy(pyr.base)).epsilon(1e-4));
}

TEST_CASE("blur preserves constants and stays in range") {
    const ImagePlane img(16, 16, Channel::visible, 0.6f);
    const ImagePlane blurred = gaussian_blur5(img);
    for (const float v : blurred.data()) CHECK(v == doctest::Approx(0.6).epsilon(1e-7));
}

TEST_CASE("upsample rejects impossible target dimensions") {
    const ImagePlane img(8, 8, Channel::visible, 0.5f);
    CHECK_THROWS_AS(upsample_to(img, 20, 16), ConfigError);
    CHECK_NOTHROW(upsample_to(img, 16, 16));
    CHECK_NOTHROW(upsample_to(img, 15, 16)); // ceil(15/2) == 8
}
