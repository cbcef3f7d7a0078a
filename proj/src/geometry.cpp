#include "understory/geometry.hpp"

#include <cmath>

#include "understory/errors.hpp"
#include "understory/parallel.hpp"

namespace understory {

namespace {
constexpr double kMinDepth = 1e-6;          // meters in front of the camera plane
constexpr double kPlaneCenterEps = 1e-9;    // camera-center-on-plane degeneracy
constexpr double kSingularEps = 1e-12;
} // namespace

void Intrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: focal lengths must be positive");
    if (width < 1 || height < 1) throw ConfigError("intrinsics: sensor size must be >= 1 px");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw ConfigError("intrinsics: principal point outside sensor");
}

void Pose::validate(double tol) const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
        throw ConfigError("pose: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > tol)
        throw ConfigError("pose: rotation determinant is not +1");
}

void WorldPlane::validate(double tol) const {
    if (std::abs(normal.norm() - 1.0) > tol) throw ConfigError("plane: normal is not unit length");
}

Eigen::Matrix3d nadir_rotation() {
    Eigen::Matrix3d r;
    r << 1, 0, 0,
         0, -1, 0,
         0, 0, -1;
    return r;
}

std::optional<Eigen::Vector2d> project(const Intrinsics& intr, const Pose& pose,
                                       const Eigen::Vector3d& point) {
    const Eigen::Vector3d pc = pose.rotation * point + pose.translation;
    if (pc.z() <= kMinDepth) return std::nullopt;
    return Eigen::Vector2d(intr.fx * pc.x() / pc.z() + intr.cx,
                           intr.fy * pc.y() / pc.z() + intr.cy);
}

namespace {

Eigen::Matrix3d calibration(const Intrinsics& intr) {
    Eigen::Matrix3d k;
    k << intr.fx, 0, intr.cx,
         0, intr.fy, intr.cy,
         0, 0, 1;
    return k;
}

} // namespace

Eigen::Matrix3d plane_homography(const Intrinsics& src_intr, const Pose& src_pose,
                                 const WorldPlane& plane, const Intrinsics& ref_intr,
                                 const Pose& ref_pose) {
    if (std::abs(plane.signed_distance(ref_pose.camera_center())) < kPlaneCenterEps ||
        std::abs(plane.signed_distance(src_pose.camera_center())) < kPlaneCenterEps)
        throw NumericError("focal plane through camera center");

    // Express the plane in the reference camera frame: n_ref . X_c = d_ref.
    const Eigen::Vector3d n_ref = ref_pose.rotation * plane.normal;
    const double d_ref = plane.offset + plane.normal.dot(ref_pose.rotation.transpose() * ref_pose.translation);

    // Relative transform reference -> source.
    const Eigen::Matrix3d r_rel = src_pose.rotation * ref_pose.rotation.transpose();
    const Eigen::Vector3d t_rel = src_pose.translation - r_rel * ref_pose.translation;

    const Eigen::Matrix3d k_ref_inv = calibration(ref_intr).inverse();
    return calibration(src_intr) * (r_rel + t_rel * n_ref.transpose() / d_ref) * k_ref_inv;
}

std::pair<ImagePlane, ImagePlane> warp_to_reference(const ImagePlane& src, const Eigen::Matrix3d& H,
                                                    int out_width, int out_height, int threads) {
    if (std::abs(H.determinant()) <= kSingularEps) throw NumericError("singular homography");
    const int w = out_width > 0 ? out_width : src.width();
    const int h = out_height > 0 ? out_height : src.height();

    ImagePlane out(w, h, src.channel());
    ImagePlane weight(w, h, Channel::weight);
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const Eigen::Vector3d q = H * Eigen::Vector3d(x, y, 1.0);
            if (std::abs(q.z()) < kSingularEps) continue;
            if (const auto v = sample_bilinear(src, q.x() / q.z(), q.y() / q.z())) {
                out.at(x, y) = *v;
                weight.at(x, y) = 1.0f;
            }
        }
    });
    return {std::move(out), std::move(weight)};
}

} // namespace understory
