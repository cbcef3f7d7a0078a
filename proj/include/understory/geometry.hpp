#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "understory/image.hpp"

namespace understory {

// Pinhole intrinsics. fx, fy, cx, cy in pixels; width/height is the sensor
// size the camera renders into.
struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const; // throws ConfigError on violated invariants
};

// Rigid world->camera transform: X_cam = rotation * X_world + translation.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void validate(double tol = 1e-9) const; // orthonormal, det = +1
    Eigen::Vector3d camera_center() const { return -rotation.transpose() * translation; }
};

// Plane {x : normal . x = offset} with unit normal.
struct WorldPlane {
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
    double offset = 0.0;

    void validate(double tol = 1e-12) const;
    double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

// World-z-up nadir orientation (camera z axis pointing straight down).
Eigen::Matrix3d nadir_rotation();

// Projects a world point. Returns nullopt when the point is behind or on the
// camera plane (Z_cam <= 1e-6 m).
std::optional<Eigen::Vector2d> project(const Intrinsics& intr, const Pose& pose,
                                       const Eigen::Vector3d& point);

// Homography H mapping reference-image homogeneous pixels to source-view
// pixels, exact for world points on `plane`. Throws NumericError when the
// plane passes through either camera center.
Eigen::Matrix3d plane_homography(const Intrinsics& src_intr, const Pose& src_pose,
                                 const WorldPlane& plane, const Intrinsics& ref_intr,
                                 const Pose& ref_pose);

// Resamples src through H: output pixel (u,v) = sample_bilinear(src, H.(u,v,1)).
// The weight plane holds 1 where sampling succeeded and 0 where the mapped
// coordinate left the source frame. Output dimensions default to the source's.
std::pair<ImagePlane, ImagePlane> warp_to_reference(const ImagePlane& src,
                                                    const Eigen::Matrix3d& H, int out_width = 0,
                                                    int out_height = 0, int threads = 1);

} // namespace understory
