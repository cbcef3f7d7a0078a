#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "understory/aos.hpp"
#include "understory/camera_array.hpp"
#include "understory/deteval.hpp"
#include "understory/errors.hpp"
#include "understory/fusion.hpp"
#include "understory/geometry.hpp"
#include "understory/image.hpp"
#include "understory/image_io.hpp"
#include "understory/scene.hpp"

namespace py = pybind11;
using namespace understory;

namespace {

ImagePlane image_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> array,
                            Channel channel) {
    if (array.ndim() != 2) throw ConfigError("expected a 2D array (height, width)");
    const int h = static_cast<int>(array.shape(0));
    const int w = static_cast<int>(array.shape(1));
    ImagePlane img(w, h, channel);
    std::memcpy(img.data().data(), array.data(), sizeof(float) * img.size());
    img.check_finite("ImagePlane from array");
    return img;
}

py::array_t<float> image_to_array(const ImagePlane& img) {
    py::array_t<float> array({img.height(), img.width()});
    std::memcpy(array.mutable_data(), img.data().data(), sizeof(float) * img.size());
    return array;
}

aos::ViewSet views_from_tuples(
    const std::vector<std::tuple<Intrinsics, Pose, ImagePlane>>& views) {
    aos::ViewSet set;
    for (const auto& [intr, pose, img] : views) set.views.push_back({intr, pose, img});
    return set;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Synthetic forest rendering, synthetic-aperture refocusing, visible-thermal "
              "MST-SR fusion and detection metrics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::enum_<Channel>(m, "Channel")
        .value("visible", Channel::visible)
        .value("thermal", Channel::thermal)
        .value("fused", Channel::fused)
        .value("weight", Channel::weight);

    py::class_<ImagePlane>(m, "ImagePlane", py::buffer_protocol())
        .def(py::init(&image_from_array), py::arg("array"), py::arg("channel") = Channel::visible)
        .def_property_readonly("width", &ImagePlane::width)
        .def_property_readonly("height", &ImagePlane::height)
        .def_property_readonly("channel", &ImagePlane::channel)
        .def("to_numpy", &image_to_array)
        .def("at", [](const ImagePlane& img, int x, int y) {
            if (x < 0 || x >= img.width() || y < 0 || y >= img.height())
                throw ConfigError("pixel index out of range");
            return img.at(x, y);
        })
        .def_buffer([](ImagePlane& img) {
            return py::buffer_info(img.data().data(), sizeof(float),
                                   py::format_descriptor<float>::format(), 2,
                                   {static_cast<std::size_t>(img.height()),
                                    static_cast<std::size_t>(img.width())},
                                   {sizeof(float) * img.width(), sizeof(float)});
        });

    py::class_<BBoxPx>(m, "BBoxPx")
        .def(py::init([](double x_min, double y_min, double x_max, double y_max) {
                 return BBoxPx{x_min, y_min, x_max, y_max};
             }),
             py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
        .def_readwrite("x_min", &BBoxPx::x_min)
        .def_readwrite("y_min", &BBoxPx::y_min)
        .def_readwrite("x_max", &BBoxPx::x_max)
        .def_readwrite("y_max", &BBoxPx::y_max)
        .def("valid", &BBoxPx::valid)
        .def("area", &BBoxPx::area);

    m.def("sample_bilinear", &sample_bilinear, py::arg("image"), py::arg("u"), py::arg("v"));
    m.def("read_image", &read_image, py::arg("path"), py::arg("fallback") = Channel::visible);
    m.def(
        "write_image",
        [](const ImagePlane& img, const std::filesystem::path& path, int bits) {
            if (bits != 8 && bits != 16) throw ConfigError("bit depth must be 8 or 16");
            write_image(img, path, bits == 8 ? BitDepth::eight : BitDepth::sixteen);
        },
        py::arg("image"), py::arg("path"), py::arg("bits") = 16);

    py::class_<Intrinsics>(m, "Intrinsics")
        .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
                 Intrinsics intr{fx, fy, cx, cy, width, height};
                 intr.validate();
                 return intr;
             }),
             py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
             py::arg("height"))
        .def_readwrite("fx", &Intrinsics::fx)
        .def_readwrite("fy", &Intrinsics::fy)
        .def_readwrite("cx", &Intrinsics::cx)
        .def_readwrite("cy", &Intrinsics::cy)
        .def_readwrite("width", &Intrinsics::width)
        .def_readwrite("height", &Intrinsics::height);

    py::class_<Pose>(m, "Pose")
        .def(py::init([](const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
                 Pose pose{rotation, translation};
                 pose.validate();
                 return pose;
             }),
             py::arg("rotation"), py::arg("translation"))
        .def_readwrite("rotation", &Pose::rotation)
        .def_readwrite("translation", &Pose::translation)
        .def("camera_center", &Pose::camera_center)
        .def_static("nadir_at", [](double x, double y, double altitude) {
            Pose pose;
            pose.rotation = nadir_rotation();
            pose.translation = -pose.rotation * Eigen::Vector3d(x, y, altitude);
            return pose;
        });

    py::class_<WorldPlane>(m, "WorldPlane")
        .def(py::init([](const Eigen::Vector3d& normal, double offset) {
                 WorldPlane plane{normal, offset};
                 plane.validate();
                 return plane;
             }),
             py::arg("normal") = Eigen::Vector3d(0, 0, 1), py::arg("offset") = 0.0)
        .def_readwrite("normal", &WorldPlane::normal)
        .def_readwrite("offset", &WorldPlane::offset);

    m.def(
        "project",
        [](const Intrinsics& intr, const Pose& pose, const Eigen::Vector3d& point)
            -> std::optional<std::pair<double, double>> {
            const auto px = project(intr, pose, point);
            if (!px) return std::nullopt;
            return std::make_pair(px->x(), px->y());
        },
        py::arg("intrinsics"), py::arg("pose"), py::arg("point"));
    m.def("plane_homography", &plane_homography, py::arg("src_intrinsics"), py::arg("src_pose"),
          py::arg("plane"), py::arg("ref_intrinsics"), py::arg("ref_pose"));
    m.def("warp_to_reference", &warp_to_reference, py::arg("image"), py::arg("homography"),
          py::arg("out_width") = 0, py::arg("out_height") = 0, py::arg("threads") = 1);

    py::class_<scene::TargetSpec>(m, "TargetSpec")
        .def(py::init<>())
        .def_readwrite("class_label", &scene::TargetSpec::class_label)
        .def_readwrite("center_x", &scene::TargetSpec::center_x)
        .def_readwrite("center_y", &scene::TargetSpec::center_y)
        .def_readwrite("length", &scene::TargetSpec::length)
        .def_readwrite("width", &scene::TargetSpec::width)
        .def_readwrite("visible_albedo", &scene::TargetSpec::visible_albedo)
        .def_readwrite("thermal_intensity", &scene::TargetSpec::thermal_intensity);

    py::class_<scene::Extent>(m, "Extent")
        .def(py::init([](double x_min, double y_min, double x_max, double y_max) {
                 return scene::Extent{x_min, y_min, x_max, y_max};
             }),
             py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
        .def_readwrite("x_min", &scene::Extent::x_min)
        .def_readwrite("y_min", &scene::Extent::y_min)
        .def_readwrite("x_max", &scene::Extent::x_max)
        .def_readwrite("y_max", &scene::Extent::y_max);

    py::class_<scene::GenerationConfig>(m, "GenerationConfig")
        .def(py::init<>())
        .def_readwrite("extent", &scene::GenerationConfig::extent)
        .def_readwrite("tree_count", &scene::GenerationConfig::tree_count)
        .def_readwrite("min_separation", &scene::GenerationConfig::min_separation)
        .def_readwrite("canopy_radius_min", &scene::GenerationConfig::canopy_radius_min)
        .def_readwrite("canopy_radius_max", &scene::GenerationConfig::canopy_radius_max)
        .def_readwrite("trunk_height_min", &scene::GenerationConfig::trunk_height_min)
        .def_readwrite("trunk_height_max", &scene::GenerationConfig::trunk_height_max)
        .def_readwrite("canopy_depth_min", &scene::GenerationConfig::canopy_depth_min)
        .def_readwrite("canopy_depth_max", &scene::GenerationConfig::canopy_depth_max)
        .def_readwrite("leaf_count_min", &scene::GenerationConfig::leaf_count_min)
        .def_readwrite("leaf_count_max", &scene::GenerationConfig::leaf_count_max)
        .def_readwrite("leaf_radius", &scene::GenerationConfig::leaf_radius)
        .def_readwrite("leaf_albedo", &scene::GenerationConfig::leaf_albedo)
        .def_readwrite("leaf_thermal", &scene::GenerationConfig::leaf_thermal)
        .def_readwrite("ambient_thermal", &scene::GenerationConfig::ambient_thermal)
        .def_readwrite("noise_sigma", &scene::GenerationConfig::noise_sigma)
        .def_readwrite("targets", &scene::GenerationConfig::targets);

    py::class_<scene::SceneDescription>(m, "SceneDescription")
        .def_readonly("ambient_thermal", &scene::SceneDescription::ambient_thermal)
        .def_readonly("noise_sigma", &scene::SceneDescription::noise_sigma)
        .def_readonly("targets", &scene::SceneDescription::targets)
        .def_property_readonly("occluder_count",
                               [](const scene::SceneDescription& sc) { return sc.occluders.size(); })
        .def("to_json", &scene::scene_to_json_string);

    m.def("generate_scene", &scene::generate_scene, py::arg("config"), py::arg("seed"));
    m.def("render_view", &scene::render_view, py::arg("scene"), py::arg("intrinsics"),
          py::arg("pose"), py::arg("channel"), py::arg("noise_seed") = 0, py::arg("threads") = 1);
    m.def("export_ground_truth", &scene::export_ground_truth, py::arg("scene"),
          py::arg("intrinsics"), py::arg("pose"), py::arg("image_id") = "");
    m.def("load_scene", &scene::load_scene, py::arg("path"));
    m.def("save_scene", &scene::save_scene, py::arg("scene"), py::arg("path"));

    py::class_<aos::IntegralImage>(m, "IntegralImage")
        .def_readonly("image", &aos::IntegralImage::image)
        .def_readonly("coverage", &aos::IntegralImage::coverage)
        .def_readonly("n_views", &aos::IntegralImage::n_views)
        .def_property_readonly("valid", [](const aos::IntegralImage& ii) {
            py::array_t<bool> array({ii.image.height(), ii.image.width()});
            auto* out = array.mutable_data();
            for (std::size_t i = 0; i < ii.valid.size(); ++i) out[i] = ii.valid[i] != 0;
            return array;
        });

    py::enum_<aos::Weighting>(m, "Weighting")
        .value("uniform", aos::Weighting::uniform)
        .value("mask", aos::Weighting::mask);

    m.def(
        "integrate",
        [](const std::vector<std::tuple<Intrinsics, Pose, ImagePlane>>& views,
           const WorldPlane& plane, const Intrinsics& ref_intrinsics, const Pose& ref_pose,
           aos::Weighting weighting, const std::optional<std::vector<ImagePlane>>& masks,
           int threads) {
            return aos::integrate(views_from_tuples(views), plane, ref_intrinsics, ref_pose,
                                  weighting, masks ? &*masks : nullptr, threads);
        },
        py::arg("views"), py::arg("plane"), py::arg("ref_intrinsics"), py::arg("ref_pose"),
        py::arg("weighting") = aos::Weighting::uniform, py::arg("masks") = std::nullopt,
        py::arg("threads") = 1);
    m.def(
        "focal_sweep",
        [](const std::vector<std::tuple<Intrinsics, Pose, ImagePlane>>& views,
           const std::vector<WorldPlane>& planes, const Intrinsics& ref_intrinsics,
           const Pose& ref_pose, int threads) {
            return aos::focal_sweep(views_from_tuples(views), planes, ref_intrinsics, ref_pose,
                                    aos::Weighting::uniform, nullptr, threads);
        },
        py::arg("views"), py::arg("planes"), py::arg("ref_intrinsics"), py::arg("ref_pose"),
        py::arg("threads") = 1);
    m.def("visibility_score", &aos::visibility_score, py::arg("image"), py::arg("target_region"),
          py::arg("background_region"));

    py::class_<fusion::FusionConfig>(m, "FusionConfig")
        .def(py::init<>())
        .def_readwrite("depth", &fusion::FusionConfig::depth)
        .def_readwrite("patch_size", &fusion::FusionConfig::patch_size)
        .def_readwrite("stride", &fusion::FusionConfig::stride)
        .def_readwrite("atoms_per_dim", &fusion::FusionConfig::atoms_per_dim)
        .def_readwrite("max_atoms", &fusion::FusionConfig::max_atoms)
        .def_readwrite("omp_tol", &fusion::FusionConfig::omp_tol);

    py::class_<fusion::Pyramid>(m, "Pyramid")
        .def_readonly("levels", &fusion::Pyramid::levels)
        .def_readonly("base", &fusion::Pyramid::base)
        .def_readonly("depth", &fusion::Pyramid::depth);

    py::class_<fusion::AtomDictionary>(m, "AtomDictionary")
        .def_property_readonly("atoms",
                               [](const fusion::AtomDictionary& d) { return d.atoms; })
        .def_property_readonly("signal_dim", &fusion::AtomDictionary::signal_dim)
        .def_property_readonly("atom_count", &fusion::AtomDictionary::atom_count);

    py::class_<fusion::SparseCode>(m, "SparseCode")
        .def_readonly("support", &fusion::SparseCode::support)
        .def_readonly("coefficients", &fusion::SparseCode::coefficients)
        .def_readonly("residual_norm", &fusion::SparseCode::residual_norm);

    m.def("pyramid_decompose", &fusion::pyramid_decompose, py::arg("image"), py::arg("depth"));
    m.def("pyramid_reconstruct", &fusion::pyramid_reconstruct, py::arg("pyramid"));
    m.def("dct_dictionary", &fusion::dct_dictionary, py::arg("patch_size"),
          py::arg("atoms_per_dim"));
    m.def("omp", &fusion::omp, py::arg("signal"), py::arg("dictionary"), py::arg("max_atoms"),
          py::arg("tol"));
    m.def("fuse_detail_max", &fusion::fuse_detail_max, py::arg("level_v"), py::arg("level_t"));
    m.def("mst_sr_fuse", &fusion::mst_sr_fuse, py::arg("visible"), py::arg("thermal"),
          py::arg("config") = fusion::FusionConfig{}, py::arg("threads") = 1);

    py::class_<det::DetectionRecord>(m, "DetectionRecord")
        .def(py::init([](std::string image_id, std::string class_label, BBoxPx box, double score) {
                 return det::DetectionRecord{std::move(image_id), std::move(class_label), box,
                                             score};
             }),
             py::arg("image_id"), py::arg("class_label"), py::arg("box"), py::arg("score"))
        .def_readwrite("image_id", &det::DetectionRecord::image_id)
        .def_readwrite("class_label", &det::DetectionRecord::class_label)
        .def_readwrite("box", &det::DetectionRecord::box)
        .def_readwrite("score", &det::DetectionRecord::score);

    py::class_<det::GroundTruthRecord>(m, "GroundTruthRecord")
        .def(py::init([](std::string image_id, std::string class_label, BBoxPx box) {
                 return det::GroundTruthRecord{std::move(image_id), std::move(class_label), box};
             }),
             py::arg("image_id"), py::arg("class_label"), py::arg("box"))
        .def_readwrite("image_id", &det::GroundTruthRecord::image_id)
        .def_readwrite("class_label", &det::GroundTruthRecord::class_label)
        .def_readwrite("box", &det::GroundTruthRecord::box);

    py::class_<det::PRPoint>(m, "PRPoint")
        .def_readonly("recall", &det::PRPoint::recall)
        .def_readonly("precision", &det::PRPoint::precision);

    py::class_<det::PRCurve>(m, "PRCurve")
        .def_readonly("points", &det::PRCurve::points)
        .def_readonly("n_gt", &det::PRCurve::n_gt);

    py::class_<det::ClassEval>(m, "ClassEval")
        .def_readonly("class_label", &det::ClassEval::class_label)
        .def_readonly("n_gt", &det::ClassEval::n_gt)
        .def_readonly("n_detections", &det::ClassEval::n_detections)
        .def_readonly("curve", &det::ClassEval::curve)
        .def_readonly("ap", &det::ClassEval::ap);

    py::class_<det::EvalReport>(m, "EvalReport")
        .def_readonly("per_class", &det::EvalReport::per_class)
        .def_readonly("map", &det::EvalReport::map)
        .def_readonly("iou_threshold", &det::EvalReport::iou_threshold)
        .def_readonly("top_k", &det::EvalReport::top_k);

    m.def("iou", &det::iou, py::arg("a"), py::arg("b"));
    m.def("match_detections", &det::match_detections, py::arg("detections"),
          py::arg("ground_truth"), py::arg("iou_threshold"));
    m.def("evaluate_detections", &det::evaluate_detections, py::arg("detections"),
          py::arg("ground_truth"), py::arg("iou_threshold") = 0.5, py::arg("top_k") = 0);
    m.def("load_detections", &det::load_detections, py::arg("path"));
    m.def("load_ground_truth", &det::load_ground_truth, py::arg("path"));
    m.def("save_ground_truth", &det::save_ground_truth, py::arg("records"), py::arg("path"));

    m.attr("__version__") = "0.1.0";
}
