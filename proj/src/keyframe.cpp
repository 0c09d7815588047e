#include "sschema/keyframe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "sschema/errors.hpp"

namespace sschema {

std::vector<double> first_order_diff(const Clip& clip) {
    const std::size_t t = clip.frames.size();
    if (t < 2) throw SizeError("first_order_diff needs at least 2 frames");
    std::vector<double> d;
    d.reserve(t - 1);
    for (std::size_t i = 1; i < t; ++i) {
        const Frame& a = clip.frames[i - 1];
        const Frame& b = clip.frames[i];
        if (a.width != b.width || a.height != b.height) {
            throw DimensionError("frame dimension mismatch within clip");
        }
        long long sum = 0;
        const std::size_t n = a.luma.size();
        for (std::size_t p = 0; p < n; ++p) {
            sum += std::abs(static_cast<int>(b.luma[p]) - static_cast<int>(a.luma[p]));
        }
        d.push_back(static_cast<double>(sum) / static_cast<double>(n));
    }
    return d;
}

std::vector<double> second_order_diff(const std::vector<double>& first_order) {
    if (first_order.size() < 2) {
        throw SizeError("second_order_diff needs at least 2 first-order values");
    }
    std::vector<double> g;
    g.reserve(first_order.size() - 1);
    for (std::size_t i = 1; i < first_order.size(); ++i) {
        g.push_back(std::fabs(first_order[i] - first_order[i - 1]));
    }
    return g;
}

DiffSeries diff_series(const Clip& clip) {
    DiffSeries s;
    s.first_order = first_order_diff(clip);
    s.second_order = second_order_diff(s.first_order);
    return s;
}

KeyframeSelection select_keyframes(const Clip& clip, int k) {
    if (k < 1) throw ArgumentError("k must be >= 1");
    const int t = static_cast<int>(clip.frames.size());
    if (t < 3) throw SizeError("select_keyframes needs at least 3 frames");

    DiffSeries s = diff_series(clip);
    // second_order[i] scores frame index i+2 (the later frame of the pair).
    std::vector<int> order(s.second_order.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (s.second_order[a] != s.second_order[b]) {
            return s.second_order[a] > s.second_order[b];
        }
        return a < b;
    });

    const int take = std::min<int>(k, t - 2);
    KeyframeSelection sel;
    sel.k = k;
    sel.indices.reserve(take);
    for (int i = 0; i < take; ++i) sel.indices.push_back(order[i] + 2);
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

}  // namespace sschema
