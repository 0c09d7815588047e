#include "sschema/regions.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "sschema/errors.hpp"

namespace sschema {

namespace {

bool rect_order(const Rect& a, const Rect& b) {
    return std::tie(a.y, a.x, a.w, a.h) < std::tie(b.y, b.x, b.w, b.h);
}

bool expanded_intersect(const Rect& a, const Rect& b, int gap) {
    // both rects grown by `gap` on every side
    long ax0 = a.x - gap, ay0 = a.y - gap;
    long ax1 = a.x + a.w + gap, ay1 = a.y + a.h + gap;
    long bx0 = b.x - gap, by0 = b.y - gap;
    long bx1 = b.x + b.w + gap, by1 = b.y + b.h + gap;
    return ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1;
}

Rect rect_union(const Rect& a, const Rect& b) {
    int x0 = std::min(a.x, b.x);
    int y0 = std::min(a.y, b.y);
    int x1 = std::max(a.x + a.w, b.x + b.w);
    int y1 = std::max(a.y + a.h, b.y + b.h);
    return Rect{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

ChangeMask change_mask(const Frame& prev, const Frame& cur, int delta) {
    if (prev.width != cur.width || prev.height != cur.height) {
        throw DimensionError("change_mask: frame dimensions differ");
    }
    ChangeMask mask;
    mask.width = cur.width;
    mask.height = cur.height;
    mask.bits.resize(cur.luma.size());
    for (std::size_t i = 0; i < cur.luma.size(); ++i) {
        int diff = std::abs(static_cast<int>(cur.luma[i]) - static_cast<int>(prev.luma[i]));
        mask.bits[i] = diff > delta ? 1 : 0;
    }
    return mask;
}

std::vector<Rect> connected_components(const ChangeMask& mask, int min_area) {
    const int w = mask.width;
    const int h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Rect> rects;
    std::vector<std::pair<int, int>> stack;

    int next_label = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (mask.bits[idx] == 0 || label[idx] >= 0) continue;

            int minx = x, maxx = x, miny = y, maxy = y;
            long area = 0;
            stack.clear();
            stack.emplace_back(x, y);
            label[idx] = next_label;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                minx = std::min(minx, cx);
                maxx = std::max(maxx, cx);
                miny = std::min(miny, cy);
                maxy = std::max(maxy, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.bits[nidx] == 0 || label[nidx] >= 0) continue;
                        label[nidx] = next_label;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            ++next_label;
            if (area >= min_area) {
                rects.push_back(Rect{minx, miny, maxx - minx + 1, maxy - miny + 1});
            }
        }
    }
    std::sort(rects.begin(), rects.end(), rect_order);
    return rects;
}

std::vector<Rect> merge_rects(std::vector<Rect> rects, int gap) {
    // canonical input order makes the fixpoint independent of caller order
    std::sort(rects.begin(), rects.end(), rect_order);
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < rects.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < rects.size() && !merged; ++j) {
                if (expanded_intersect(rects[i], rects[j], gap)) {
                    rects[i] = rect_union(rects[i], rects[j]);
                    rects.erase(rects.begin() + static_cast<long>(j));
                    merged = true;
                }
            }
        }
    }
    std::sort(rects.begin(), rects.end(), rect_order);
    return rects;
}

}  // namespace sschema
