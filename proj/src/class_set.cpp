#include "duskseg/class_set.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "duskseg/errors.hpp"
#include "duskseg/raster.hpp"

namespace duskseg {

ClassSet::ClassSet(std::vector<std::string> names, std::vector<int> dynamic_indices,
                   std::uint8_t ignore_value)
    : names_(std::move(names)), dynamic_indices_(std::move(dynamic_indices)),
      ignore_value_(ignore_value) {
    const int c = static_cast<int>(names_.size());
    if (c < 2)
        throw validation_error("class set needs at least 2 classes");
    if (c > 253)
        throw validation_error("class set too large for 8-bit rasters (max 253)");
    if (ignore_value_ < c)
        throw validation_error("ignore value collides with a class index");
    if (ignore_value_ == kInvalidLabel)
        throw validation_error("ignore value collides with the invalid sentinel (254)");
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size())
        throw validation_error("duplicate class names");
    std::sort(dynamic_indices_.begin(), dynamic_indices_.end());
    dynamic_indices_.erase(std::unique(dynamic_indices_.begin(), dynamic_indices_.end()),
                           dynamic_indices_.end());
    dynamic_mask_.assign(c, 0);
    for (int d : dynamic_indices_) {
        if (d < 0 || d >= c)
            throw validation_error("dynamic class index out of range");
        dynamic_mask_[d] = 1;
    }
}

const ClassSet& ClassSet::cityscapes19() {
    static const ClassSet instance{
        {"road", "sidewalk", "building", "wall", "fence", "pole", "traffic_light",
         "traffic_sign", "vegetation", "terrain", "sky", "person", "rider", "car", "truck",
         "bus", "train", "motorcycle", "bicycle"},
        // movable-object classes
        {11, 12, 13, 14, 15, 16, 17, 18},
        255};
    return instance;
}

ClassSet ClassSet::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open class config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("class config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.contains("names") || !j["names"].is_array())
        throw validation_error("class config needs a \"names\" array");
    std::vector<std::string> names = j["names"].get<std::vector<std::string>>();

    std::vector<int> dyn;
    if (j.contains("dynamic")) {
        for (const auto& item : j["dynamic"]) {
            if (item.is_number_integer()) {
                dyn.push_back(item.get<int>());
            } else {
                auto it = std::find(names.begin(), names.end(), item.get<std::string>());
                if (it == names.end())
                    throw validation_error("dynamic class not in names: " +
                                           item.get<std::string>());
                dyn.push_back(static_cast<int>(it - names.begin()));
            }
        }
    }
    const int ignore = j.value("ignore_value", 255);
    if (ignore < 0 || ignore > 255)
        throw validation_error("ignore_value must fit in 8 bits");
    return ClassSet(std::move(names), std::move(dyn), static_cast<std::uint8_t>(ignore));
}

ClassSet ClassSet::resolve(const std::string& config_path) {
    if (!config_path.empty())
        return from_json_file(config_path);
    if (const char* env = std::getenv("DUSKSEG_CLASS_CONFIG"); env && *env)
        return from_json_file(env);
    return cityscapes19();
}

} // namespace duskseg
