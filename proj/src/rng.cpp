#include "understory/rng.hpp"

#include <cmath>

namespace understory {

namespace {

double lattice_value(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
    const std::uint64_t h = splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL) ^
                                       static_cast<std::uint64_t>(iy) * 0xc2b2ae3d27d4eb4fULL);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double noise_octave(double x, double y, std::uint64_t seed) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx);
    const auto iy = static_cast<std::int64_t>(fy);
    const double tx = smoothstep(x - fx);
    const double ty = smoothstep(y - fy);
    const double v00 = lattice_value(ix, iy, seed);
    const double v10 = lattice_value(ix + 1, iy, seed);
    const double v01 = lattice_value(ix, iy + 1, seed);
    const double v11 = lattice_value(ix + 1, iy + 1, seed);
    const double top = v00 + (v10 - v00) * tx;
    const double bot = v01 + (v11 - v01) * tx;
    return top + (bot - top) * ty;
}

} // namespace

double value_noise(double x, double y, std::uint64_t seed) {
    // base frequency one cycle per meter, three octaves
    double sum = 0.0;
    double amp = 1.0;
    double freq = 1.0;
    double norm = 0.0;
    for (int octave = 0; octave < 3; ++octave) {
        sum += amp * noise_octave(x * freq, y * freq, splitmix64(seed + octave));
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    return sum / norm;
}

} // namespace understory
