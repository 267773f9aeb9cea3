#include "gfd/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gfd {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void write_dataset(const fs::path& root, std::span<const SynthSample> samples) {
    for (const char* sub : {"color", "thermal", "ann"}) fs::create_directories(root / sub);
    std::string meta = "id,time_tag\n";
    for (const auto& s : samples) {
        write_pnm(root / "color" / (s.pair.id + ".ppm"), s.pair.color);
        write_pnm(root / "thermal" / (s.pair.id + ".pgm"), s.pair.thermal);
        write_text(root / "ann" / (s.pair.id + ".txt"), serialize_annotations(s.gts));
        meta += s.pair.id + "," + to_string(s.pair.time_tag) + "\n";
    }
    write_text(root / "meta.csv", meta);
}

std::vector<Sample> load_dataset(const fs::path& root) {
    if (!fs::is_directory(root / "color"))
        throw std::runtime_error("dataset root " + root.string() + " has no color/ directory");

    std::map<std::string, TimeTag> tags;
    if (fs::exists(root / "meta.csv")) {
        std::istringstream in(read_text(root / "meta.csv"));
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (header) {
                header = false;
                continue;
            }
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("meta.csv: malformed line '" + line + "'");
            tags[line.substr(0, comma)] = parse_time_tag(line.substr(comma + 1));
        }
    }

    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root / "color"))
        if (entry.path().extension() == ".ppm") ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());

    std::vector<Sample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        Sample s;
        s.pair = load_image_pair(root / "color" / (id + ".ppm"), root / "thermal" / (id + ".pgm"));
        const fs::path ann = root / "ann" / (id + ".txt");
        if (fs::exists(ann)) {
            try {
                s.gts = parse_annotations(read_text(ann));
            } catch (const AnnotationError& e) {
                throw AnnotationError(ann.string() + ": " + e.what(), e.lines());
            }
        }
        if (auto it = tags.find(id); it != tags.end()) s.pair.time_tag = it->second;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace gfd
