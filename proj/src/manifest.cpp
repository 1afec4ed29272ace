#include "duskseg/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "duskseg/errors.hpp"

namespace duskseg {

using ordered_json = nlohmann::ordered_json;

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open manifest: " + path.string());

    DatasetManifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::set<std::string> ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw validation_error(path.string() + ":" + std::to_string(lineno) +
                                   ": invalid JSON: " + e.what());
        }
        auto fail = [&](const std::string& msg) {
            throw validation_error(path.string() + ":" + std::to_string(lineno) + ": " + msg);
        };
        if (!j.contains("id") || !j["id"].is_string()) fail("record needs a string \"id\"");
        if (!j.contains("image") || !j["image"].is_string()) fail("record needs \"image\"");
        if (!j.contains("domain") || !j["domain"].is_string()) fail("record needs \"domain\"");

        ManifestRecord r;
        r.id = j["id"].get<std::string>();
        if (!ids.insert(r.id).second) fail("duplicate id: " + r.id);
        r.image_path = j["image"].get<std::string>();
        r.domain = j["domain"].get<std::string>();
        if (j.contains("label")) r.label_path = j["label"].get<std::string>();
        if (j.contains("invalid_mask")) r.invalid_mask_path = j["invalid_mask"].get<std::string>();
        if (j.contains("gps")) {
            const auto& g = j["gps"];
            if (!g.contains("lat") || !g.contains("lon")) fail("gps needs lat and lon");
            GpsFix fix{g["lat"].get<double>(), g["lon"].get<double>(), g.value("t", 0.0)};
            try {
                fix.check();
            } catch (const validation_error& e) {
                fail(e.what());
            }
            r.gps = fix;
        }
        if (j.contains("loss_weight")) r.loss_weight = j["loss_weight"].get<double>();
        if (j.contains("origin")) r.origin = j["origin"].get<std::string>();
        m.records.push_back(std::move(r));
    }
    return m;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path.string());
    for (const auto& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["image"] = r.image_path;
        if (r.label_path) j["label"] = *r.label_path;
        if (r.invalid_mask_path) j["invalid_mask"] = *r.invalid_mask_path;
        j["domain"] = r.domain;
        if (r.gps) j["gps"] = {{"lat", r.gps->lat}, {"lon", r.gps->lon}, {"t", r.gps->timestamp}};
        if (r.loss_weight) j["loss_weight"] = *r.loss_weight;
        if (r.origin) j["origin"] = *r.origin;
        out << j.dump() << '\n';
    }
}

} // namespace duskseg
