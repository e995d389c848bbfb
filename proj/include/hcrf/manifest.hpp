#pragma once

#include <filesystem>
#include <vector>

namespace hcrf {

// One `image_path<TAB>label_path` line. Relative paths are resolved against
// the manifest's directory when read.
struct ManifestEntry {
    std::filesystem::path image;
    std::filesystem::path labels;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Writes entries verbatim (paths are not rebased).
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

}  // namespace hcrf
