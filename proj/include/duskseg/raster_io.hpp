#pragma once

#include <filesystem>

#include "duskseg/class_set.hpp"
#include "duskseg/raster.hpp"

namespace duskseg {

/// Label rasters are 8-bit single-channel PNGs: class indices 0..C-1,
/// ignore 255, invalid sentinel 254. Paletted files are read as their
/// index values (the palette itself is ignored); 16-bit or multi-channel
/// PNGs are rejected with validation_error.
SemanticLabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const SemanticLabelMap& map);

/// Invalid masks share the label raster container. Values {0,1} pass
/// through, 255 normalizes to 1, anything else is rejected.
InvalidMask read_invalid_mask(const std::filesystem::path& path);
void write_invalid_mask(const std::filesystem::path& path, const InvalidMask& mask);

/// Camera frames: PNG or JPEG (sniffed from the file signature), decoded
/// to 8-bit RGB. Gray and RGBA PNGs are converted; 16-bit PNG channels are
/// reduced to 8.
RgbImage read_rgb_image(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& img);

} // namespace duskseg
