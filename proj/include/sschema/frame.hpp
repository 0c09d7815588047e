#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sschema {

// One decoded grayscale frame of a screen recording.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> luma;  // row-major, width*height
    std::int64_t timestamp_ms = 0;
    int index = 0;

    std::uint8_t at(int x, int y) const {
        return luma[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return luma[static_cast<std::size_t>(y) * width + x];
    }
};

// A contiguous segment of a recording covering one user operation.
struct Clip {
    std::string clip_id;
    std::vector<Frame> frames;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
};

// BT.601 luma, round-half-up.
std::uint8_t to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Binary PGM (P5), maxval 255. Decoding is strict: whitespace-separated
// header tokens, exactly one whitespace byte before the raster, no
// trailing bytes. decode errors name `name` when given.
Frame decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& name = {});
std::vector<std::uint8_t> encode_pgm(const Frame& frame);
Frame load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Frame& frame);

// Loads `frame_%04d.pgm` files, contiguous from 0. timestamp_ms is
// round(index*1000/fps); clip_id is the directory basename.
Clip load_frame_directory(const std::filesystem::path& dir, double fps);

// Uniform sampling of up to n frame indices, always keeping the first
// and last frame when T >= n >= 2.
std::vector<int> frame_sampler(const Clip& clip, int n = 10);

// Box-mean downsampling by an integer factor; remainder rows/cols are
// dropped; each output pixel is the round-half-up mean of its box.
Frame downsample(const Frame& frame, int factor);

}  // namespace sschema
