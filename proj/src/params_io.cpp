#include "sschema/params_io.hpp"

#include <cstring>
#include <fstream>

#include "sschema/errors.hpp"

namespace sschema {

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_doubles(const std::filesystem::path& path, std::string_view magic8,
                  std::uint32_t version, const std::vector<double>& values) {
    if (magic8.size() != 8) throw ArgumentError("magic must be 8 bytes");
    std::string out;
    out.reserve(16 + values.size() * 8);
    out.append(magic8);
    put_u32le(out, version);
    put_u32le(out, static_cast<std::uint32_t>(values.size()));
    for (double d : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<double> load_doubles(const std::filesystem::path& path,
                                 std::string_view magic8,
                                 std::uint32_t expect_version) {
    if (magic8.size() != 8) throw ArgumentError("magic must be 8 bytes");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16) throw IoError("truncated params file: " + path.string());
    if (std::string_view(bytes.data(), 8) != magic8) {
        throw IoError("bad magic in params file: " + path.string());
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint32_t version = get_u32le(p + 8);
    if (version != expect_version) {
        throw IoError("unsupported params version " + std::to_string(version) + " in " +
                      path.string());
    }
    std::uint32_t count = get_u32le(p + 12);
    if (bytes.size() != 16 + static_cast<std::size_t>(count) * 8) {
        throw IoError("params payload size mismatch: " + path.string());
    }
    std::vector<double> values(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) {
            bits = (bits << 8) | p[16 + i * 8 + b];
        }
        std::memcpy(&values[i], &bits, 8);
    }
    return values;
}

}  // namespace sschema
