#pragma once

#include <vector>

#include "sschema/frame.hpp"

namespace sschema {

// Mean-absolute frame deltas and their absolute second differences.
// first_order holds d_t for t = 1..T-1; second_order holds
// g_t = |d_t - d_{t-1}| for t = 2..T-1.
struct DiffSeries {
    std::vector<double> first_order;
    std::vector<double> second_order;
};

struct KeyframeSelection {
    std::vector<int> indices;  // ascending, each within [2, T-1]
    int k = 0;                 // requested count
};

std::vector<double> first_order_diff(const Clip& clip);
std::vector<double> second_order_diff(const std::vector<double>& first_order);
DiffSeries diff_series(const Clip& clip);

// Top min(k, T-2) frame indices by second-order change, ties broken
// toward earlier frames; result sorted ascending.
KeyframeSelection select_keyframes(const Clip& clip, int k);

}  // namespace sschema
