#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duskseg/gps.hpp"

namespace duskseg {

/// One dataset record. Paths are stored as written in the manifest and
/// resolved relative to the manifest's directory.
struct ManifestRecord {
    std::string id;
    std::string image_path;
    std::optional<std::string> label_path;
    std::optional<std::string> invalid_mask_path;
    std::string domain;
    std::optional<GpsFix> gps;
    std::optional<double> loss_weight;
    std::optional<std::string> origin;  // "labeled_synthetic" | "pseudo_real" in training manifests
};

/// JSON-lines manifest: one record object per line, streamable.
struct DatasetManifest {
    std::filesystem::path base_dir;  // directory of the manifest file
    std::vector<ManifestRecord> records;

    std::filesystem::path resolve(const std::string& rel) const { return base_dir / rel; }
};

/// Throws validation_error on malformed JSON, missing required fields,
/// duplicate ids, or out-of-range GPS fixes.
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Deterministic: fixed key order, records in vector order.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

} // namespace duskseg
