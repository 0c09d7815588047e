#pragma once

#include <cstdint>
#include <vector>

#include "sschema/frame.hpp"

namespace sschema {

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct ChangeMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row-major 0/1

    bool test(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
};

// Bit set iff |cur - prev| > delta at that pixel (strict inequality).
ChangeMask change_mask(const Frame& prev, const Frame& cur, int delta = 30);

// Bounding boxes of 8-connected components with pixel count >= min_area,
// sorted by (y, x, w, h).
std::vector<Rect> connected_components(const ChangeMask& mask, int min_area = 25);

// Fixpoint union of rects whose gap-expanded boxes intersect; output
// sorted by (y, x, w, h) and independent of input order.
std::vector<Rect> merge_rects(std::vector<Rect> rects, int gap = 4);

}  // namespace sschema
