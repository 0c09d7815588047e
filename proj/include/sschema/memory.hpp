#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "sschema/matrix.hpp"

namespace sschema {

struct MemoryConfig {
    int q_tokens = 4;     // Q
    int dim = 8;          // D
    double alpha = 0.5;   // interpolation weight, in [0,1]
    std::uint64_t seed = 42;
};

// LSTM gate weights operate on flattened Q*D vectors; attention weights on
// D-dim rows. `query` is the learned Q x D query; `projection` maps the
// flattened embedding to the LSTM input.
struct MemoryParams {
    Matrix w_ix, w_ih;           // input gate, (QD) x (QD) each
    std::vector<double> b_i;
    Matrix w_fx, w_fh;           // forget gate
    std::vector<double> b_f;
    Matrix w_gx, w_gh;           // cell candidate
    std::vector<double> b_g;
    Matrix w_ox, w_oh;           // output gate
    std::vector<double> b_o;
    Matrix w_q, w_k, w_v;        // attention, D x D each
    Matrix query;                // z, Q x D
    Matrix projection;           // P, (QD) x (QD)

    friend bool operator==(const MemoryParams&, const MemoryParams&) = default;
};

struct MemoryState {
    std::vector<double> h;          // length Q*D, zero at t = 0
    std::vector<double> c;
    std::optional<Matrix> e_prev;   // previous step's embedding, absent at t = 0
    std::int64_t t = 0;

    friend bool operator==(const MemoryState&, const MemoryState&) = default;
};

// Bundles one session's memory; sessions are sequential by contract.
struct MemoryInstance {
    MemoryConfig config;
    MemoryParams params;
    MemoryState state;
};

// Parameters drawn uniform(-0.1, 0.1) from a seeded generator in
// declaration order (w_ix, w_ih, b_i, ..., w_q, w_k, w_v, query,
// projection); state zeroed.
std::pair<MemoryParams, MemoryState> memory_init(const MemoryConfig& config);
MemoryInstance make_memory(const MemoryConfig& config);

// One LSTM cell update over flattened vectors.
std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    const MemoryParams& params, const std::vector<double>& x,
    const std::vector<double>& h, const std::vector<double>& c);

// Cross-attention read: softmax(z Wq (h Wk)^T / sqrt(D)) (h Wv), with h
// reshaped row-major to Q x D.
Matrix attend(const MemoryParams& params, const std::vector<double>& h);

// alpha*E + (1-alpha)*O for t >= 1; E verbatim at t = 0.
Matrix interpolate(const Matrix& e, const Matrix& o, double alpha, std::int64_t t);

// Produces the embedding for the next generation and advances the state:
// output is e_t at t = 0, otherwise interpolate(e_prev, attend(h), alpha);
// then the LSTM consumes projection * flatten(e_t).
Matrix memory_step(const MemoryParams& params, MemoryState& state, const Matrix& e_t,
                   double alpha);
Matrix memory_step(MemoryInstance& memory, const Matrix& e_t);

void save_memory_params(const std::filesystem::path& path, const MemoryParams& params);
MemoryParams load_memory_params(const std::filesystem::path& path,
                                const MemoryConfig& config);

}  // namespace sschema
