#include "sschema/cursor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sschema/errors.hpp"
#include "sschema/params_io.hpp"

namespace sschema {

namespace {

constexpr int kOffC1W = 0;
constexpr int kOffC1B = kOffC1W + kConv1WeightCount;
constexpr int kOffC2W = kOffC1B + kConv1BiasCount;
constexpr int kOffC2B = kOffC2W + kConv2WeightCount;
constexpr int kOffC3W = kOffC2B + kConv2BiasCount;
constexpr int kOffC3B = kOffC3W + kConv3WeightCount;

constexpr int kL1 = kPatchSize;      // 64, conv1/pool1 input side
constexpr int kL2 = kPatchSize / 2;  // 32
constexpr int kL3 = kPatchSize / 4;  // 16

struct ForwardCache {
    std::vector<double> z1;    // 8 x 64 x 64 pre-relu
    std::vector<double> p1;    // 8 x 32 x 32
    std::vector<int> idx1;     // winner flat index into z1 per p1 element
    std::vector<double> z2;    // 16 x 32 x 32 pre-relu
    std::vector<double> p2;    // 16 x 16 x 16
    std::vector<int> idx2;     // winner flat index into z2 per p2 element
    std::vector<double> probs; // 256
};

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

void conv3x3(const double* in, int channels, int side, const double* weights,
             const double* bias, int filters, double* out) {
    // weights layout: [filter][channel][ky][kx], pad 1
    for (int f = 0; f < filters; ++f) {
        double* out_f = out + static_cast<std::size_t>(f) * side * side;
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                double acc = bias[f];
                for (int c = 0; c < channels; ++c) {
                    const double* in_c = in + static_cast<std::size_t>(c) * side * side;
                    const double* w = weights + ((f * channels + c) * 9);
                    for (int ky = 0; ky < 3; ++ky) {
                        int sy = y + ky - 1;
                        if (sy < 0 || sy >= side) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int sx = x + kx - 1;
                            if (sx < 0 || sx >= side) continue;
                            acc += w[ky * 3 + kx] * in_c[sy * side + sx];
                        }
                    }
                }
                out_f[y * side + x] = acc;
            }
        }
    }
}

void maxpool2(const double* in, int channels, int side, double* out, int* idx) {
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* in_c = in + static_cast<std::size_t>(c) * side * side;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                int base = (2 * y) * side + 2 * x;
                int best = base;
                double best_v = relu(in_c[base]);
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        int i = (2 * y + dy) * side + (2 * x + dx);
                        double v = relu(in_c[i]);
                        if (v > best_v) {
                            best_v = v;
                            best = i;
                        }
                    }
                }
                std::size_t o = static_cast<std::size_t>(c) * half * half + y * half + x;
                out[o] = best_v;
                idx[o] = c * side * side + best;
            }
        }
    }
}

ForwardCache forward_cached(const CnnParams& params, const std::vector<double>& patch) {
    if (params.values.size() != static_cast<std::size_t>(kCnnParamCount)) {
        throw DimensionError("cnn params have wrong size");
    }
    if (patch.size() != static_cast<std::size_t>(kPatchSize) * kPatchSize) {
        throw DimensionError("patch must be 64x64");
    }
    const double* v = params.values.data();
    ForwardCache cache;

    cache.z1.resize(8ul * kL1 * kL1);
    conv3x3(patch.data(), 1, kL1, v + kOffC1W, v + kOffC1B, 8, cache.z1.data());

    cache.p1.resize(8ul * kL2 * kL2);
    cache.idx1.resize(cache.p1.size());
    maxpool2(cache.z1.data(), 8, kL1, cache.p1.data(), cache.idx1.data());

    cache.z2.resize(16ul * kL2 * kL2);
    conv3x3(cache.p1.data(), 8, kL2, v + kOffC2W, v + kOffC2B, 16, cache.z2.data());

    cache.p2.resize(16ul * kL3 * kL3);
    cache.idx2.resize(cache.p2.size());
    maxpool2(cache.z2.data(), 16, kL2, cache.p2.data(), cache.idx2.data());

    // 1x1 conv across the 16 channels, then softmax over all cells
    std::vector<double> logits(kGridCells);
    for (int y = 0; y < kL3; ++y) {
        for (int x = 0; x < kL3; ++x) {
            double acc = v[kOffC3B];
            for (int c = 0; c < 16; ++c) {
                acc += v[kOffC3W + c] * cache.p2[static_cast<std::size_t>(c) * kL3 * kL3 +
                                                 y * kL3 + x];
            }
            logits[y * kL3 + x] = acc;
        }
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    cache.probs.resize(kGridCells);
    for (int i = 0; i < kGridCells; ++i) {
        cache.probs[i] = std::exp(logits[i] - max_logit);
        sum += cache.probs[i];
    }
    for (double& p : cache.probs) p /= sum;
    return cache;
}

}  // namespace

CnnParams CnnParams::zeros() {
    CnnParams p;
    p.values.assign(kCnnParamCount, 0.0);
    return p;
}

CnnParams init_cnn_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    CnnParams p = CnnParams::zeros();
    for (int i = kOffC1W; i < kOffC1B; ++i) p.values[i] = dist(rng);
    for (int i = kOffC2W; i < kOffC2B; ++i) p.values[i] = dist(rng);
    for (int i = kOffC3W; i < kOffC3B; ++i) p.values[i] = dist(rng);
    return p;
}

std::vector<double> cnn_forward(const CnnParams& params, const std::vector<double>& patch) {
    return forward_cached(params, patch).probs;
}

std::pair<double, CnnParams> loss_and_grad(const CnnParams& params,
                                           const CursorSample& sample) {
    if (sample.label_row < 0 || sample.label_row >= kGridSize || sample.label_col < 0 ||
        sample.label_col >= kGridSize) {
        throw ArgumentError("label cell outside grid");
    }
    ForwardCache cache = forward_cached(params, sample.patch);
    const int label = sample.label_row * kGridSize + sample.label_col;
    double loss = -std::log(std::max(cache.probs[label], 1e-300));

    CnnParams grad = CnnParams::zeros();
    double* g = grad.values.data();
    const double* v = params.values.data();

    // softmax + cross-entropy
    std::vector<double> dlogits = cache.probs;
    dlogits[label] -= 1.0;

    // conv3 (1x1): accumulate weight/bias grads, push into p2
    std::vector<double> dp2(cache.p2.size(), 0.0);
    for (int y = 0; y < kL3; ++y) {
        for (int x = 0; x < kL3; ++x) {
            double d = dlogits[y * kL3 + x];
            g[kOffC3B] += d;
            for (int c = 0; c < 16; ++c) {
                std::size_t pi = static_cast<std::size_t>(c) * kL3 * kL3 + y * kL3 + x;
                g[kOffC3W + c] += d * cache.p2[pi];
                dp2[pi] += d * v[kOffC3W + c];
            }
        }
    }

    // pool2 routing, relu mask on z2
    std::vector<double> dz2(cache.z2.size(), 0.0);
    for (std::size_t i = 0; i < dp2.size(); ++i) {
        int win = cache.idx2[i];
        if (cache.z2[win] > 0.0) dz2[win] += dp2[i];
    }

    // conv2 grads and input gradient into p1
    std::vector<double> dp1(cache.p1.size(), 0.0);
    for (int f = 0; f < 16; ++f) {
        const double* dz2_f = dz2.data() + static_cast<std::size_t>(f) * kL2 * kL2;
        for (int y = 0; y < kL2; ++y) {
            for (int x = 0; x < kL2; ++x) {
                double d = dz2_f[y * kL2 + x];
                if (d == 0.0) continue;
                g[kOffC2B + f] += d;
                for (int c = 0; c < 8; ++c) {
                    const double* p1_c = cache.p1.data() + static_cast<std::size_t>(c) * kL2 * kL2;
                    double* dp1_c = dp1.data() + static_cast<std::size_t>(c) * kL2 * kL2;
                    int wbase = kOffC2W + (f * 8 + c) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        int sy = y + ky - 1;
                        if (sy < 0 || sy >= kL2) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int sx = x + kx - 1;
                            if (sx < 0 || sx >= kL2) continue;
                            g[wbase + ky * 3 + kx] += d * p1_c[sy * kL2 + sx];
                            dp1_c[sy * kL2 + sx] += d * v[wbase + ky * 3 + kx];
                        }
                    }
                }
            }
        }
    }

    // pool1 routing, relu mask on z1
    std::vector<double> dz1(cache.z1.size(), 0.0);
    for (std::size_t i = 0; i < dp1.size(); ++i) {
        int win = cache.idx1[i];
        if (cache.z1[win] > 0.0) dz1[win] += dp1[i];
    }

    // conv1 grads against the raw patch
    for (int f = 0; f < 8; ++f) {
        const double* dz1_f = dz1.data() + static_cast<std::size_t>(f) * kL1 * kL1;
        for (int y = 0; y < kL1; ++y) {
            for (int x = 0; x < kL1; ++x) {
                double d = dz1_f[y * kL1 + x];
                if (d == 0.0) continue;
                g[kOffC1B + f] += d;
                int wbase = kOffC1W + f * 9;
                for (int ky = 0; ky < 3; ++ky) {
                    int sy = y + ky - 1;
                    if (sy < 0 || sy >= kL1) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        int sx = x + kx - 1;
                        if (sx < 0 || sx >= kL1) continue;
                        g[wbase + ky * 3 + kx] += d * sample.patch[sy * kL1 + sx];
                    }
                }
            }
        }
    }

    return {loss, std::move(grad)};
}

CnnParams train_sgd(const std::vector<CursorSample>& dataset, int epochs, double lr,
                    std::uint64_t seed) {
    if (dataset.empty()) throw ArgumentError("train_sgd: empty dataset");
    if (epochs < 0) throw ArgumentError("train_sgd: negative epochs");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    CnnParams params = CnnParams::zeros();
    for (int i = kOffC1W; i < kOffC1B; ++i) params.values[i] = dist(rng);
    for (int i = kOffC2W; i < kOffC2B; ++i) params.values[i] = dist(rng);
    for (int i = kOffC3W; i < kOffC3B; ++i) params.values[i] = dist(rng);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            auto [loss, grad] = loss_and_grad(params, dataset[i]);
            (void)loss;
            for (int p = 0; p < kCnnParamCount; ++p) {
                params.values[p] -= lr * grad.values[p];
            }
        }
    }
    return params;
}

CursorSample augment_with(const CursorSample& sample, double angle_deg, double scale,
                          double tx, double ty) {
    constexpr double kPi = 3.14159265358979323846;
    const double angle = angle_deg * kPi / 180.0;
    const double cx = (kPatchSize - 1) / 2.0;
    const double cos_a = std::cos(angle), sin_a = std::sin(angle);

    CursorSample out;
    out.patch.assign(sample.patch.size(), 0.0);
    // inverse map per output pixel: undo translation, rotation, scale
    for (int y = 0; y < kPatchSize; ++y) {
        for (int x = 0; x < kPatchSize; ++x) {
            double dx = x - cx - tx;
            double dy = y - cx - ty;
            double rx = (cos_a * dx + sin_a * dy) / scale;
            double ry = (-sin_a * dx + cos_a * dy) / scale;
            long sx = std::lround(rx + cx);
            long sy = std::lround(ry + cx);
            if (sx >= 0 && sx < kPatchSize && sy >= 0 && sy < kPatchSize) {
                out.patch[static_cast<std::size_t>(y) * kPatchSize + x] =
                    sample.patch[static_cast<std::size_t>(sy) * kPatchSize + sx];
            }
        }
    }

    // forward map of the label cell center, clamped to the grid
    double lx = sample.label_col * kCellPixels + (kCellPixels - 1) / 2.0;
    double ly = sample.label_row * kCellPixels + (kCellPixels - 1) / 2.0;
    double fx = scale * (cos_a * (lx - cx) - sin_a * (ly - cx)) + cx + tx;
    double fy = scale * (sin_a * (lx - cx) + cos_a * (ly - cx)) + cx + ty;
    out.label_col = std::clamp(static_cast<int>(std::floor(fx / kCellPixels)), 0, kGridSize - 1);
    out.label_row = std::clamp(static_cast<int>(std::floor(fy / kCellPixels)), 0, kGridSize - 1);
    return out;
}

CursorSample augment(const CursorSample& sample, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle_dist(-15.0, 15.0);
    std::uniform_real_distribution<double> scale_dist(0.8, 1.2);
    std::uniform_real_distribution<double> shift_dist(-8.0, 8.0);
    const double angle_deg = angle_dist(rng);
    const double scale = scale_dist(rng);
    const double tx = shift_dist(rng);
    const double ty = shift_dist(rng);
    return augment_with(sample, angle_deg, scale, tx, ty);
}

namespace {

// 11x7 arrow glyph: '#' outline (0), '+' body (255), '.' transparent.
// Hotspot is the top-left tip.
constexpr const char* kArrowGlyph[11] = {
    "#......",
    "##.....",
    "#+#....",
    "#++#...",
    "#+++#..",
    "#++++#.",
    "#+++++#",
    "#++####",
    "#+#....",
    "##.....",
    "#......",
};
constexpr int kGlyphH = 11;
constexpr int kGlyphW = 7;

}  // namespace

CursorSample synth_sample(std::mt19937_64& rng, std::vector<double>* background_out,
                          int* gx_out, int* gy_out) {
    std::uniform_int_distribution<int> bg_type(0, 2);
    std::uniform_int_distribution<int> level(0, 255);
    std::uniform_int_distribution<int> rect_count(3, 8);
    std::uniform_int_distribution<int> coord(0, kPatchSize - 1);
    std::uniform_int_distribution<int> gx_dist(0, kPatchSize - kGlyphW);
    std::uniform_int_distribution<int> gy_dist(0, kPatchSize - kGlyphH);

    std::vector<int> pixels(static_cast<std::size_t>(kPatchSize) * kPatchSize, 0);
    switch (bg_type(rng)) {
        case 0:
            for (int& p : pixels) p = level(rng);
            break;
        case 1: {
            int fill = level(rng);
            for (int& p : pixels) p = fill;
            break;
        }
        default: {
            int base = level(rng);
            for (int& p : pixels) p = base;
            int rects = rect_count(rng);
            for (int r = 0; r < rects; ++r) {
                int x0 = coord(rng), y0 = coord(rng);
                int x1 = coord(rng), y1 = coord(rng);
                if (x0 > x1) std::swap(x0, x1);
                if (y0 > y1) std::swap(y0, y1);
                int value = level(rng);
                for (int y = y0; y <= y1; ++y) {
                    for (int x = x0; x <= x1; ++x) {
                        pixels[static_cast<std::size_t>(y) * kPatchSize + x] = value;
                    }
                }
            }
        }
    }

    if (background_out) {
        background_out->resize(pixels.size());
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            (*background_out)[i] = pixels[i] / 255.0;
        }
    }

    int gx = gx_dist(rng);
    int gy = gy_dist(rng);
    for (int y = 0; y < kGlyphH; ++y) {
        for (int x = 0; x < kGlyphW; ++x) {
            char c = kArrowGlyph[y][x];
            if (c == '.') continue;
            pixels[static_cast<std::size_t>(gy + y) * kPatchSize + gx + x] =
                c == '#' ? 0 : 255;
        }
    }
    if (gx_out) *gx_out = gx;
    if (gy_out) *gy_out = gy;

    CursorSample sample;
    sample.patch.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        sample.patch[i] = pixels[i] / 255.0;
    }
    sample.label_row = gy / kCellPixels;
    sample.label_col = gx / kCellPixels;
    return sample;
}

std::vector<CursorSample> synth_dataset(std::mt19937_64& rng, int n) {
    if (n < 1) throw ArgumentError("synth_dataset: n must be >= 1");
    std::vector<CursorSample> out;
    out.reserve(n);
    for (int s = 0; s < n; ++s) out.push_back(synth_sample(rng));
    return out;
}

CursorPrediction detect_cursor(const CnnParams& params, const Frame& frame) {
    if (frame.width < kPatchSize || frame.height < kPatchSize) {
        throw DimensionError("detect_cursor: frame smaller than 64x64");
    }
    // box-mean resize to 64x64 over an integer grid partition
    std::vector<double> patch(static_cast<std::size_t>(kPatchSize) * kPatchSize);
    for (int oy = 0; oy < kPatchSize; ++oy) {
        int y0 = oy * frame.height / kPatchSize;
        int y1 = (oy + 1) * frame.height / kPatchSize;
        for (int ox = 0; ox < kPatchSize; ++ox) {
            int x0 = ox * frame.width / kPatchSize;
            int x1 = (ox + 1) * frame.width / kPatchSize;
            long sum = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) sum += frame.at(x, y);
            }
            long count = static_cast<long>(y1 - y0) * (x1 - x0);
            patch[static_cast<std::size_t>(oy) * kPatchSize + ox] =
                static_cast<double>(sum) / (count * 255.0);
        }
    }

    std::vector<double> probs = cnn_forward(params, patch);
    int best = 0;
    for (int i = 1; i < kGridCells; ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    int row = best / kGridSize, col = best % kGridSize;

    CursorPrediction pred;
    pred.x = std::min(frame.width - 1,
                      static_cast<int>((col + 0.5) * frame.width / kGridSize));
    pred.y = std::min(frame.height - 1,
                      static_cast<int>((row + 0.5) * frame.height / kGridSize));
    pred.confidence = probs[best];
    return pred;
}

namespace {
constexpr std::string_view kCnnMagic = "SSCURCNN";
constexpr std::uint32_t kCnnVersion = 1;
}  // namespace

void save_cnn_params(const std::filesystem::path& path, const CnnParams& params) {
    if (params.values.size() != static_cast<std::size_t>(kCnnParamCount)) {
        throw ArgumentError("cnn params have wrong size");
    }
    save_doubles(path, kCnnMagic, kCnnVersion, params.values);
}

CnnParams load_cnn_params(const std::filesystem::path& path) {
    CnnParams p;
    p.values = load_doubles(path, kCnnMagic, kCnnVersion);
    if (p.values.size() != static_cast<std::size_t>(kCnnParamCount)) {
        throw IoError("cnn params file has wrong element count: " + path.string());
    }
    return p;
}

}  // namespace sschema
