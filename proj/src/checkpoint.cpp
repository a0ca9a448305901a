#include "qforecast/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace qforecast::checkpoint {

namespace {

constexpr char kMagic[8] = {'Q', 'F', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) {
        throw IngestError("checkpoint truncated");
    }
    return v;
}

} // namespace

void save(const nn::ParameterBundle& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IngestError("cannot open checkpoint for writing: " + path.string());
    }
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(params.blocks.size()));
    for (const nn::ParamBlock& block : params.blocks) {
        write_u32(out, static_cast<std::uint32_t>(block.name.size()));
        out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
        write_u32(out, static_cast<std::uint32_t>(block.rows));
        write_u32(out, static_cast<std::uint32_t>(block.cols));
        out.write(reinterpret_cast<const char*>(block.value.data()),
                  static_cast<std::streamsize>(sizeof(double) * block.value.size()));
    }
    if (!out) {
        throw IngestError("failed writing checkpoint: " + path.string());
    }
}

void load(nn::ParameterBundle& params, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError("cannot open checkpoint: " + path.string());
    }
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IngestError("not a qforecast checkpoint: " + path.string());
    }
    const std::uint32_t count = read_u32(in);
    if (count != params.blocks.size()) {
        throw IngestError("checkpoint has " + std::to_string(count) + " blocks, model expects " +
                          std::to_string(params.blocks.size()));
    }
    for (nn::ParamBlock& block : params.blocks) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        if (!in || name != block.name || rows != static_cast<std::uint32_t>(block.rows) ||
            cols != static_cast<std::uint32_t>(block.cols)) {
            throw IngestError("checkpoint block mismatch: expected " + block.name + " (" +
                              std::to_string(block.rows) + "x" + std::to_string(block.cols) +
                              "), found " + name + " (" + std::to_string(rows) + "x" +
                              std::to_string(cols) + ")");
        }
        in.read(reinterpret_cast<char*>(block.value.data()),
                static_cast<std::streamsize>(sizeof(double) * block.value.size()));
        if (!in) {
            throw IngestError("checkpoint truncated in block " + block.name);
        }
    }
}

std::map<std::string, nn::MatrixXd> load_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError("cannot open checkpoint: " + path.string());
    }
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IngestError("not a qforecast checkpoint: " + path.string());
    }
    std::map<std::string, nn::MatrixXd> out;
    const std::uint32_t count = read_u32(in);
    for (std::uint32_t b = 0; b < count; ++b) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        nn::MatrixXd m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * rows * cols));
        if (!in) {
            throw IngestError("checkpoint truncated in block " + name);
        }
        out.emplace(std::move(name), std::move(m));
    }
    return out;
}

} // namespace qforecast::checkpoint
