#include "sschema/memory.hpp"

#include <cmath>
#include <random>

#include "sschema/errors.hpp"
#include "sschema/params_io.hpp"

namespace sschema {

namespace {

// y = M x
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (m.cols != static_cast<int>(x.size())) {
        throw DimensionError("matvec shape mismatch");
    }
    std::vector<double> y(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m.cols; ++c) acc += m.at(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

// C = A B
Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw DimensionError("matmul shape mismatch");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            double v = a.at(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c.at(i, j) += v * b.at(k, j);
        }
    }
    return c;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void fill_uniform(std::mt19937_64& rng, std::uniform_real_distribution<double>& dist,
                  Matrix& m) {
    for (double& v : m.data) v = dist(rng);
}

void fill_uniform(std::mt19937_64& rng, std::uniform_real_distribution<double>& dist,
                  std::vector<double>& v) {
    for (double& x : v) x = dist(rng);
}

void append_all(std::vector<double>& out, const Matrix& m) {
    out.insert(out.end(), m.data.begin(), m.data.end());
}

void append_all(std::vector<double>& out, const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
}

constexpr std::string_view kMemMagic = "SSMEMPRM";
constexpr std::uint32_t kMemVersion = 1;

MemoryParams allocate_params(const MemoryConfig& config) {
    const int qd = config.q_tokens * config.dim;
    const int d = config.dim;
    MemoryParams p;
    p.w_ix = Matrix(qd, qd); p.w_ih = Matrix(qd, qd); p.b_i.assign(qd, 0.0);
    p.w_fx = Matrix(qd, qd); p.w_fh = Matrix(qd, qd); p.b_f.assign(qd, 0.0);
    p.w_gx = Matrix(qd, qd); p.w_gh = Matrix(qd, qd); p.b_g.assign(qd, 0.0);
    p.w_ox = Matrix(qd, qd); p.w_oh = Matrix(qd, qd); p.b_o.assign(qd, 0.0);
    p.w_q = Matrix(d, d); p.w_k = Matrix(d, d); p.w_v = Matrix(d, d);
    p.query = Matrix(config.q_tokens, d);
    p.projection = Matrix(qd, qd);
    return p;
}

}  // namespace

std::pair<MemoryParams, MemoryState> memory_init(const MemoryConfig& config) {
    if (config.q_tokens < 1 || config.dim < 1) {
        throw ArgumentError("memory config needs Q >= 1 and D >= 1");
    }
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
        throw ArgumentError("alpha must be in [0,1]");
    }
    MemoryParams p = allocate_params(config);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    fill_uniform(rng, dist, p.w_ix); fill_uniform(rng, dist, p.w_ih); fill_uniform(rng, dist, p.b_i);
    fill_uniform(rng, dist, p.w_fx); fill_uniform(rng, dist, p.w_fh); fill_uniform(rng, dist, p.b_f);
    fill_uniform(rng, dist, p.w_gx); fill_uniform(rng, dist, p.w_gh); fill_uniform(rng, dist, p.b_g);
    fill_uniform(rng, dist, p.w_ox); fill_uniform(rng, dist, p.w_oh); fill_uniform(rng, dist, p.b_o);
    fill_uniform(rng, dist, p.w_q); fill_uniform(rng, dist, p.w_k); fill_uniform(rng, dist, p.w_v);
    fill_uniform(rng, dist, p.query);
    fill_uniform(rng, dist, p.projection);

    MemoryState s;
    s.h.assign(static_cast<std::size_t>(config.q_tokens) * config.dim, 0.0);
    s.c.assign(static_cast<std::size_t>(config.q_tokens) * config.dim, 0.0);
    s.t = 0;
    return {std::move(p), std::move(s)};
}

MemoryInstance make_memory(const MemoryConfig& config) {
    auto [params, state] = memory_init(config);
    return MemoryInstance{config, std::move(params), std::move(state)};
}

std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    const MemoryParams& params, const std::vector<double>& x,
    const std::vector<double>& h, const std::vector<double>& c) {
    const int qd = params.w_ix.rows;
    if (static_cast<int>(x.size()) != qd || static_cast<int>(h.size()) != qd ||
        static_cast<int>(c.size()) != qd) {
        throw DimensionError("lstm_cell input size mismatch");
    }
    auto ix = matvec(params.w_ix, x), ih = matvec(params.w_ih, h);
    auto fx = matvec(params.w_fx, x), fh = matvec(params.w_fh, h);
    auto gx = matvec(params.w_gx, x), gh = matvec(params.w_gh, h);
    auto ox = matvec(params.w_ox, x), oh = matvec(params.w_oh, h);

    std::vector<double> h_out(qd), c_out(qd);
    for (int j = 0; j < qd; ++j) {
        double i_g = sigmoid(ix[j] + ih[j] + params.b_i[j]);
        double f_g = sigmoid(fx[j] + fh[j] + params.b_f[j]);
        double g_g = std::tanh(gx[j] + gh[j] + params.b_g[j]);
        double o_g = sigmoid(ox[j] + oh[j] + params.b_o[j]);
        c_out[j] = f_g * c[j] + i_g * g_g;
        h_out[j] = o_g * std::tanh(c_out[j]);
    }
    return {std::move(h_out), std::move(c_out)};
}

Matrix attend(const MemoryParams& params, const std::vector<double>& h) {
    const int q = params.query.rows;
    const int d = params.query.cols;
    if (static_cast<int>(h.size()) != q * d) {
        throw DimensionError("attend: |h| must equal Q*D");
    }

    Matrix h_mat(q, d);
    h_mat.data.assign(h.begin(), h.end());  // row-major reshape

    Matrix qm = matmul(params.query, params.w_q);  // Q x D
    Matrix k = matmul(h_mat, params.w_k);          // Q x D
    Matrix v = matmul(h_mat, params.w_v);          // Q x D

    // scores = qm k^T / sqrt(D), row-wise softmax
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix weights(q, q);
    for (int i = 0; i < q; ++i) {
        double max_s = -1e300;
        for (int j = 0; j < q; ++j) {
            double s = 0.0;
            for (int e = 0; e < d; ++e) s += qm.at(i, e) * k.at(j, e);
            s *= scale;
            weights.at(i, j) = s;
            if (s > max_s) max_s = s;
        }
        double sum = 0.0;
        for (int j = 0; j < q; ++j) {
            weights.at(i, j) = std::exp(weights.at(i, j) - max_s);
            sum += weights.at(i, j);
        }
        for (int j = 0; j < q; ++j) weights.at(i, j) /= sum;
    }
    return matmul(weights, v);
}

Matrix interpolate(const Matrix& e, const Matrix& o, double alpha, std::int64_t t) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must be in [0,1]");
    if (t == 0) return e;
    if (!e.same_shape(o)) throw DimensionError("interpolate shape mismatch");
    if (alpha == 1.0) return e;  // bitwise identity
    if (alpha == 0.0) return o;
    Matrix out(e.rows, e.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = alpha * e.data[i] + (1.0 - alpha) * o.data[i];
    }
    return out;
}

Matrix memory_step(const MemoryParams& params, MemoryState& state, const Matrix& e_t,
                   double alpha) {
    const int q = params.query.rows;
    const int d = params.query.cols;
    if (e_t.rows != q || e_t.cols != d) {
        throw DimensionError("memory_step: embedding must be Q x D");
    }

    Matrix e_prime;
    if (state.t == 0) {
        e_prime = e_t;
    } else {
        Matrix o = attend(params, state.h);
        e_prime = interpolate(*state.e_prev, o, alpha, state.t);
    }

    std::vector<double> x = matvec(params.projection, e_t.data);
    auto [h_next, c_next] = lstm_cell(params, x, state.h, state.c);
    state.h = std::move(h_next);
    state.c = std::move(c_next);
    state.e_prev = e_t;
    state.t += 1;
    return e_prime;
}

Matrix memory_step(MemoryInstance& memory, const Matrix& e_t) {
    return memory_step(memory.params, memory.state, e_t, memory.config.alpha);
}

void save_memory_params(const std::filesystem::path& path, const MemoryParams& p) {
    std::vector<double> flat;
    append_all(flat, p.w_ix); append_all(flat, p.w_ih); append_all(flat, p.b_i);
    append_all(flat, p.w_fx); append_all(flat, p.w_fh); append_all(flat, p.b_f);
    append_all(flat, p.w_gx); append_all(flat, p.w_gh); append_all(flat, p.b_g);
    append_all(flat, p.w_ox); append_all(flat, p.w_oh); append_all(flat, p.b_o);
    append_all(flat, p.w_q); append_all(flat, p.w_k); append_all(flat, p.w_v);
    append_all(flat, p.query);
    append_all(flat, p.projection);
    save_doubles(path, kMemMagic, kMemVersion, flat);
}

MemoryParams load_memory_params(const std::filesystem::path& path,
                                const MemoryConfig& config) {
    const int qd = config.q_tokens * config.dim;
    const int d = config.dim;

    std::vector<double> flat = load_doubles(path, kMemMagic, kMemVersion);
    const std::size_t want = 8ul * qd * qd + 4ul * qd + 3ul * d * d +
                             static_cast<std::size_t>(config.q_tokens) * d +
                             1ul * qd * qd;
    if (flat.size() != want) {
        throw IoError("memory params element count does not match config: " + path.string());
    }

    MemoryParams p = allocate_params(config);
    std::size_t pos = 0;
    auto take_mat = [&](Matrix& m) {
        std::copy(flat.begin() + pos, flat.begin() + pos + m.data.size(), m.data.begin());
        pos += m.data.size();
    };
    auto take_vec = [&](std::vector<double>& v) {
        std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
        pos += v.size();
    };
    take_mat(p.w_ix); take_mat(p.w_ih); take_vec(p.b_i);
    take_mat(p.w_fx); take_mat(p.w_fh); take_vec(p.b_f);
    take_mat(p.w_gx); take_mat(p.w_gh); take_vec(p.b_g);
    take_mat(p.w_ox); take_mat(p.w_oh); take_vec(p.b_o);
    take_mat(p.w_q); take_mat(p.w_k); take_mat(p.w_v);
    take_mat(p.query);
    take_mat(p.projection);
    return p;
}

}  // namespace sschema
