#include "sschema/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

#include "sschema/errors.hpp"

namespace sschema {

namespace {

bool is_pgm_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.pgm", index);
    return buf;
}

}  // namespace

std::uint8_t to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    double rounded = std::floor(y + 0.5);
    if (rounded < 0.0) rounded = 0.0;
    if (rounded > 255.0) rounded = 255.0;
    return static_cast<std::uint8_t>(rounded);
}

Frame decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
    const std::string where = name.empty() ? "<memory>" : name;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) -> DecodeError {
        return DecodeError("PGM decode error in " + where + ": " + what);
    };

    auto next_token = [&]() -> std::string {
        while (pos < bytes.size() && is_pgm_space(bytes[pos])) ++pos;
        std::size_t start = pos;
        while (pos < bytes.size() && !is_pgm_space(bytes[pos])) ++pos;
        return std::string(bytes.begin() + start, bytes.begin() + pos);
    };

    if (next_token() != "P5") throw fail("missing P5 signature");
    auto parse_int = [&](const char* field) -> long {
        std::string tok = next_token();
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
            throw fail(std::string("bad ") + field + " token");
        }
        return std::stol(tok);
    };
    long w = parse_int("width");
    long h = parse_int("height");
    long maxval = parse_int("maxval");
    if (w < 1 || h < 1) throw fail("dimensions must be >= 1");
    if (maxval != 255) throw fail("maxval must be 255");
    if (pos >= bytes.size() || !is_pgm_space(bytes[pos])) {
        throw fail("missing whitespace before raster");
    }
    ++pos;  // exactly one whitespace byte separates header and raster
    std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < expected) throw fail("truncated raster");
    if (bytes.size() - pos > expected) throw fail("trailing bytes after raster");

    Frame f;
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    f.luma.assign(bytes.begin() + pos, bytes.end());
    return f;
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
    if (frame.width < 1 || frame.height < 1 ||
        frame.luma.size() != static_cast<std::size_t>(frame.width) * frame.height) {
        throw ArgumentError("frame dimensions do not match luma size");
    }
    std::string header = "P5\n" + std::to_string(frame.width) + " " +
                         std::to_string(frame.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), frame.luma.begin(), frame.luma.end());
    return out;
}

Frame load_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_pgm(bytes, path.filename().string());
}

void save_pgm(const std::filesystem::path& path, const Frame& frame) {
    auto bytes = encode_pgm(frame);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

Clip load_frame_directory(const std::filesystem::path& dir, double fps) {
    if (!(fps > 0.0)) throw ArgumentError("fps must be positive");
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }

    static const std::regex kFramePattern(R"(frame_(\d{4,})\.pgm)");
    std::set<long> present;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch m;
        std::string fname = entry.path().filename().string();
        if (std::regex_match(fname, m, kFramePattern)) {
            present.insert(std::stol(m[1].str()));
        }
    }
    if (present.empty()) {
        throw SequenceError("no frame_NNNN.pgm files in " + dir.string());
    }
    long expected = 0;
    for (long idx : present) {
        if (idx != expected) {
            throw SequenceError("missing " + frame_filename(static_cast<int>(expected)) +
                                " in " + dir.string());
        }
        ++expected;
    }

    Clip clip;
    clip.clip_id = dir.filename().string();
    if (clip.clip_id.empty()) clip.clip_id = dir.parent_path().filename().string();
    clip.frames.reserve(present.size());
    for (long i = 0; i < expected; ++i) {
        Frame f = load_pgm(dir / frame_filename(static_cast<int>(i)));
        f.index = static_cast<int>(i);
        f.timestamp_ms = std::llround(static_cast<double>(i) * 1000.0 / fps);
        if (!clip.frames.empty() && (f.width != clip.frames[0].width ||
                                     f.height != clip.frames[0].height)) {
            throw DimensionError("mixed frame dimensions in " + dir.string() + " at " +
                                 frame_filename(static_cast<int>(i)));
        }
        clip.frames.push_back(std::move(f));
    }
    clip.start_ms = clip.frames.front().timestamp_ms;
    clip.end_ms = clip.frames.back().timestamp_ms;
    return clip;
}

std::vector<int> frame_sampler(const Clip& clip, int n) {
    if (n < 1) throw ArgumentError("sample count must be >= 1");
    const int t = static_cast<int>(clip.frames.size());
    std::vector<int> out;
    if (t <= n) {
        out.resize(t);
        for (int i = 0; i < t; ++i) out[i] = i;
        return out;
    }
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        out.push_back(static_cast<int>(
            std::llround(static_cast<double>(i) * (t - 1) / (n - 1))));
    }
    return out;
}

Frame downsample(const Frame& frame, int factor) {
    if (factor < 1) throw ArgumentError("factor must be >= 1");
    if (factor > frame.width || factor > frame.height) {
        throw ArgumentError("factor exceeds frame dimensions");
    }
    Frame out;
    out.width = frame.width / factor;
    out.height = frame.height / factor;
    out.timestamp_ms = frame.timestamp_ms;
    out.index = frame.index;
    out.luma.resize(static_cast<std::size_t>(out.width) * out.height);
    const long box = static_cast<long>(factor) * factor;
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            long sum = 0;
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) {
                    sum += frame.at(ox * factor + dx, oy * factor + dy);
                }
            }
            // round-half-up integer mean
            out.at(ox, oy) = static_cast<std::uint8_t>((2 * sum + box) / (2 * box));
        }
    }
    return out;
}

}  // namespace sschema
