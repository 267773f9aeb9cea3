#include "gfd/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "gfd/hash.hpp"

namespace gfd {

namespace {

constexpr const char* kMagic = "GFDSSD-CKPT 1";

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

struct Header {
    std::string fingerprint;
    std::string model;
    std::vector<std::pair<std::string, Shape>> params;
    std::size_t data_offset = 0;
};

// Returns the payload without its checksum.
std::string_view verified_payload(const std::string& bytes) {
    if (bytes.size() < 8) throw CheckpointError("checkpoint checksum error: file is truncated");
    const std::size_t body = bytes.size() - 8;
    if (fnv1a64(std::string_view(bytes).substr(0, body)) != get_u64(bytes, body))
        throw CheckpointError("checkpoint checksum error: file is corrupt or truncated");
    return std::string_view(bytes).substr(0, body);
}

Header parse_header(std::string_view payload) {
    Header h;
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const auto nl = payload.find('\n', pos);
        if (nl == std::string_view::npos) throw CheckpointError("checkpoint header is incomplete");
        std::string line(payload.substr(pos, nl - pos));
        pos = nl + 1;
        return line;
    };
    if (next_line() != kMagic) throw CheckpointError("not a checkpoint file (bad magic line)");
    auto field = [&](const std::string& key) {
        const std::string line = next_line();
        if (line.rfind(key + " ", 0) != 0)
            throw CheckpointError("checkpoint header: expected '" + key + "'");
        return line.substr(key.size() + 1);
    };
    h.fingerprint = field("fingerprint");
    h.model = field("model");
    const long count = std::stol(field("params"));
    for (long i = 0; i < count; ++i) {
        std::istringstream ls(next_line());
        std::string name;
        Shape s;
        if (!(ls >> name >> s.n >> s.c >> s.h >> s.w))
            throw CheckpointError("checkpoint header: malformed parameter line");
        h.params.emplace_back(name, s);
    }
    if (next_line() != "data") throw CheckpointError("checkpoint header: missing data marker");
    h.data_offset = pos;
    return h;
}

}  // namespace

std::string serialize_checkpoint(Detector& model) {
    const auto params = model.parameters();
    std::string out = std::string(kMagic) + "\n";
    out += "fingerprint " + model.config().fingerprint() + "\n";
    out += "model " + model.config().describe() + "\n";
    out += "params " + std::to_string(params.size()) + "\n";
    for (const Parameter* p : params) {
        const Shape& s = p->tensor.shape();
        out += p->name + " " + std::to_string(s.n) + " " + std::to_string(s.c) + " " +
               std::to_string(s.h) + " " + std::to_string(s.w) + "\n";
    }
    out += "data\n";
    for (const Parameter* p : params)
        for (double v : p->tensor.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    put_u64(out, fnv1a64(out));
    return out;
}

std::string checkpoint_fingerprint(const std::string& bytes) {
    return parse_header(verified_payload(bytes)).fingerprint;
}

void deserialize_checkpoint(const std::string& bytes, Detector& model) {
    const std::string_view payload = verified_payload(bytes);
    const Header h = parse_header(payload);
    const std::string expected = model.config().fingerprint();
    if (h.fingerprint != expected)
        throw CheckpointError("checkpoint fingerprint mismatch: file has " + h.fingerprint + " (" +
                              h.model + "), model expects " + expected + " (" +
                              model.config().describe() + ")");
    auto params = model.parameters();
    if (params.size() != h.params.size())
        throw CheckpointError("checkpoint holds " + std::to_string(h.params.size()) +
                              " parameters, model has " + std::to_string(params.size()));
    std::size_t total = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->name != h.params[i].first || params[i]->tensor.shape() != h.params[i].second)
            throw CheckpointError("checkpoint parameter " + h.params[i].first + " " +
                                  h.params[i].second.str() + " does not match model parameter " +
                                  params[i]->name + " " + params[i]->tensor.shape().str());
        total += params[i]->tensor.numel();
    }
    if (payload.size() - h.data_offset != total * 8)
        throw CheckpointError("checkpoint data length does not match its header");
    std::size_t pos = h.data_offset;
    for (Parameter* p : params) {
        auto values = p->tensor.mutable_values();
        for (double& v : values) {
            v = std::bit_cast<double>(get_u64(bytes, pos));
            pos += 8;
        }
    }
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

void save_checkpoint(const std::filesystem::path& path, Detector& model) {
    write_file_bytes(path, serialize_checkpoint(model));
}

void load_checkpoint(const std::filesystem::path& path, Detector& model) {
    deserialize_checkpoint(read_file_bytes(path), model);
}

}  // namespace gfd
