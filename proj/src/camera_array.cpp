#include "understory/camera_array.hpp"

#include "json_util.hpp"

namespace understory {

using detail::json;

namespace {

json intrinsics_to_json(const Intrinsics& intr) {
    return json{{"fx", intr.fx},     {"fy", intr.fy},         {"cx", intr.cx},
                {"cy", intr.cy},     {"width", intr.width},   {"height", intr.height}};
}

Intrinsics intrinsics_from_json(const json& j) {
    Intrinsics intr;
    intr.fx = detail::require<double>(j, "fx", "intrinsics");
    intr.fy = detail::require<double>(j, "fy", "intrinsics");
    intr.cx = detail::require<double>(j, "cx", "intrinsics");
    intr.cy = detail::require<double>(j, "cy", "intrinsics");
    intr.width = detail::require<int>(j, "width", "intrinsics");
    intr.height = detail::require<int>(j, "height", "intrinsics");
    intr.validate();
    return intr;
}

} // namespace

CameraArray load_camera_array(const std::filesystem::path& path) {
    const json j = detail::load_json_file(path, "camera array");
    CameraArray array;
    array.intrinsics = intrinsics_from_json(detail::require<json>(j, "intrinsics", "camera array"));

    const json views = detail::require<json>(j, "views", "camera array");
    if (!views.is_array()) throw ConfigError("camera array: 'views' must be an array");
    for (std::size_t i = 0; i < views.size(); ++i) {
        const json& v = views[i];
        const std::string ctx = "camera array view " + std::to_string(i);
        const auto rot = detail::require<std::vector<double>>(v, "rotation", ctx.c_str());
        const auto tr = detail::require<std::vector<double>>(v, "translation", ctx.c_str());
        if (rot.size() != 9) throw ConfigError(ctx + ": 'rotation' must hold 9 numbers");
        if (tr.size() != 3) throw ConfigError(ctx + ": 'translation' must hold 3 numbers");

        ViewRecord rec;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rec.pose.rotation(r, c) = rot[3 * r + c];
        rec.pose.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
        try {
            rec.pose.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
        rec.image_vis = detail::require<std::string>(v, "image_vis", ctx.c_str());
        rec.image_thm = detail::require<std::string>(v, "image_thm", ctx.c_str());
        array.views.push_back(std::move(rec));
    }
    return array;
}

void save_camera_array(const CameraArray& array, const std::filesystem::path& path) {
    array.intrinsics.validate();
    json views = json::array();
    for (const auto& v : array.views) {
        v.pose.validate();
        std::vector<double> rot(9);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rot[3 * r + c] = v.pose.rotation(r, c);
        views.push_back(json{{"rotation", rot},
                             {"translation", {v.pose.translation.x(), v.pose.translation.y(),
                                              v.pose.translation.z()}},
                             {"image_vis", v.image_vis},
                             {"image_thm", v.image_thm}});
    }
    detail::save_json_file(json{{"intrinsics", intrinsics_to_json(array.intrinsics)}, {"views", views}},
                           path, "camera array");
}

} // namespace understory
