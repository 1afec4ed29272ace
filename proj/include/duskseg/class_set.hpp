#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace duskseg {

/// Ordered evaluation classes plus the subset treated as dynamic (movable)
/// content during guided fusion. Defaults to the 19 Cityscapes evaluation
/// classes with the movable-object classes marked dynamic; other datasets
/// are described by a small JSON config (see from_json_file).
class ClassSet {
public:
    ClassSet(std::vector<std::string> names, std::vector<int> dynamic_indices,
             std::uint8_t ignore_value = 255);

    static const ClassSet& cityscapes19();
    static ClassSet from_json_file(const std::filesystem::path& path);

    /// Resolves the class set for a CLI run: explicit path if given, else
    /// the DUSKSEG_CLASS_CONFIG environment variable, else cityscapes19().
    static ClassSet resolve(const std::string& config_path);

    int count() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int c) const { return names_[c]; }
    std::uint8_t ignore_value() const { return ignore_value_; }
    bool is_dynamic(int c) const { return dynamic_mask_[c] != 0; }
    const std::vector<int>& dynamic_indices() const { return dynamic_indices_; }

    bool is_class_index(int v) const { return v >= 0 && v < count(); }

private:
    std::vector<std::string> names_;
    std::vector<int> dynamic_indices_;
    std::vector<std::uint8_t> dynamic_mask_;
    std::uint8_t ignore_value_;
};

} // namespace duskseg
