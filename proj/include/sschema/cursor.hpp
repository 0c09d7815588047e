#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "sschema/frame.hpp"

namespace sschema {

// Cursor localizer: 3x3 conv (8) -> relu -> maxpool2 -> 3x3 conv (16) ->
// relu -> maxpool2 -> 1x1 conv (1) -> softmax over a 16x16 cell grid.
inline constexpr int kPatchSize = 64;
inline constexpr int kGridSize = 16;
inline constexpr int kGridCells = kGridSize * kGridSize;
inline constexpr int kCellPixels = kPatchSize / kGridSize;

// Flat parameter layout: conv1 weights [8][3][3], conv1 bias [8],
// conv2 weights [16][8][3][3], conv2 bias [16], conv3 weights [16],
// conv3 bias [1].
inline constexpr int kConv1WeightCount = 8 * 3 * 3;
inline constexpr int kConv1BiasCount = 8;
inline constexpr int kConv2WeightCount = 16 * 8 * 3 * 3;
inline constexpr int kConv2BiasCount = 16;
inline constexpr int kConv3WeightCount = 16;
inline constexpr int kConv3BiasCount = 1;
inline constexpr int kCnnParamCount = kConv1WeightCount + kConv1BiasCount +
                                      kConv2WeightCount + kConv2BiasCount +
                                      kConv3WeightCount + kConv3BiasCount;

struct CnnParams {
    std::vector<double> values;

    static CnnParams zeros();
    friend bool operator==(const CnnParams&, const CnnParams&) = default;
};

struct CursorSample {
    std::vector<double> patch;  // 64*64 luma in [0,1], row-major
    int label_row = 0;          // 16x16 grid
    int label_col = 0;
};

struct CursorPrediction {
    int x = 0;
    int y = 0;
    double confidence = 0.0;
};

// Weights uniform(-0.1, 0.1) in layout order, biases zero.
CnnParams init_cnn_params(std::uint64_t seed);

// Softmax probabilities over the 256 grid cells, row-major.
std::vector<double> cnn_forward(const CnnParams& params, const std::vector<double>& patch);

// Cross-entropy -log p[label] and its gradient, same flat layout.
std::pair<double, CnnParams> loss_and_grad(const CnnParams& params,
                                           const CursorSample& sample);

// Plain per-sample SGD with a per-epoch seeded shuffle; parameters are
// initialized from the same generator, so the result is a pure function
// of (dataset, epochs, lr, seed).
CnnParams train_sgd(const std::vector<CursorSample>& dataset, int epochs, double lr,
                    std::uint64_t seed);

// Deterministic core of augment: rotate/scale/translate about the patch
// center with nearest-neighbor resampling; the label cell is moved by the
// same map and clamped to the grid.
CursorSample augment_with(const CursorSample& sample, double angle_deg, double scale,
                          double tx, double ty);

// Random rotation (+-15 deg), scale (0.8..1.2), translation (+-8 px).
// Draw order: angle, scale, tx, ty.
CursorSample augment(const CursorSample& sample, std::mt19937_64& rng);

// One synthetic sample: random background (noise, flat fill, or
// rectangles) with an 11x7 arrow glyph stamped at a random position;
// label is the glyph hotspot cell. background_out, when given, receives
// the pre-stamp background patch; gx/gy_out the hotspot position.
CursorSample synth_sample(std::mt19937_64& rng, std::vector<double>* background_out = nullptr,
                          int* gx_out = nullptr, int* gy_out = nullptr);

std::vector<CursorSample> synth_dataset(std::mt19937_64& rng, int n);

// Box-mean resize to 64x64, forward pass, argmax cell mapped back to
// frame pixels (first-max tie-break). Frame must be at least 64x64.
CursorPrediction detect_cursor(const CnnParams& params, const Frame& frame);

void save_cnn_params(const std::filesystem::path& path, const CnnParams& params);
CnnParams load_cnn_params(const std::filesystem::path& path);

}  // namespace sschema
