#include "hcrf/manifest.hpp"

#include <fstream>
#include <string>

#include "hcrf/errors.hpp"

namespace hcrf {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    const std::filesystem::path base = path.parent_path();
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos ||
            tab == 0 || tab + 1 == line.size()) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'image_path<TAB>label_path'");
        }
        entries.push_back({resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))});
    }
    if (in.bad()) throw IoError("read failure on manifest '" + path.string() + "'");
    return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& e : entries) out << e.image.generic_string() << '\t' << e.labels.generic_string() << '\n';
    if (!out.flush()) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace hcrf
