#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "graphsmooth/dense.hpp"
#include "graphsmooth/graph.hpp"
#include "graphsmooth/rng.hpp"
#include "graphsmooth/stacked_signal.hpp"

namespace graphsmooth {

/// One measurement row, stored as (column, value) pairs. All paper models
/// produce rows with at most two nonzeros; dense custom rows are fine too.
struct SparseRow {
    std::vector<std::pair<int, double>> entries;
};

/// The m_t x n block C_t. m_t = 0 encodes an unmeasured node.
struct MeasurementBlock {
    std::vector<SparseRow> rows;
    int row_count() const { return static_cast<int>(rows.size()); }
};

/// Block-diagonal design C = diag(C_1, ..., C_T) with shared column count n.
class MeasurementSet {
public:
    MeasurementSet(int n, std::vector<MeasurementBlock> blocks)
        : n_(n), blocks_(std::move(blocks)) {
        if (n < 1) throw std::invalid_argument("MeasurementSet: n must be >= 1");
        total_rows_ = 0;
        for (const auto& block : blocks_) {
            for (const auto& row : block.rows)
                for (auto [col, val] : row.entries) {
                    (void)val;
                    if (col < 0 || col >= n)
                        throw std::invalid_argument("MeasurementSet: column out of range");
                }
            total_rows_ += block.row_count();
        }
    }

    int n() const { return n_; }
    int node_count() const { return static_cast<int>(blocks_.size()); }
    int total_rows() const { return total_rows_; }
    const std::vector<MeasurementBlock>& blocks() const { return blocks_; }
    const MeasurementBlock& block(int t) const { return blocks_[t]; }

    /// Dense view of one block, for oracle tests.
    Matrix block_dense(int t) const {
        const auto& blk = blocks_[t];
        Matrix m(blk.row_count(), n_);
        for (int r = 0; r < blk.row_count(); ++r)
            for (auto [col, val] : blk.rows[r].entries) m(r, col) += val;
        return m;
    }

    /// Dense view of the whole block-diagonal C, for oracle tests (small nT).
    Matrix dense() const {
        Matrix m(total_rows_, n_ * node_count());
        int row0 = 0;
        for (int t = 0; t < node_count(); ++t) {
            const auto& blk = blocks_[t];
            for (int r = 0; r < blk.row_count(); ++r)
                for (auto [col, val] : blk.rows[r].entries) m(row0 + r, t * n_ + col) += val;
            row0 += blk.row_count();
        }
        return m;
    }

private:
    int n_;
    std::vector<MeasurementBlock> blocks_;
    int total_rows_ = 0;
};

/// Sparse random measurements: each C_t is independently the zero 1 x n row
/// with probability 1-theta, otherwise e_i^T for i uniform on [n].
inline MeasurementSet sample_sparse_rows(int n, int node_count, double theta, Rng& rng) {
    if (n < 1 || node_count < 1)
        throw std::invalid_argument("sample_sparse_rows: n and T must be >= 1");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("sample_sparse_rows: theta must lie in [0,1]");
    std::vector<MeasurementBlock> blocks(node_count);
    for (auto& block : blocks) {
        SparseRow row;
        if (rng.bernoulli(theta)) row.entries.emplace_back(rng.uniform_index(n), 1.0);
        block.rows.push_back(std::move(row));
    }
    return MeasurementSet(n, std::move(blocks));
}

/// Incidence block of a measurement graph on n vertices: one row per edge
/// {i, j} with +1 at the smaller index and -1 at the larger. C^T C is the
/// Laplacian of the graph, for any orientation.
inline MeasurementBlock incidence_block(const Graph& measurement_graph) {
    MeasurementBlock block;
    block.rows.reserve(measurement_graph.edge_count());
    for (auto [a, b] : measurement_graph.edges()) {
        SparseRow row;
        row.entries.emplace_back(a, 1.0);
        row.entries.emplace_back(b, -1.0);
        block.rows.push_back(std::move(row));
    }
    return block;
}

struct ErLayers {
    MeasurementSet measurements;
    double p_sum = 0.0;
    double p_max = 0.0;
};

/// Independent Erdos-Renyi measurement graphs G_t ~ G(n, p_t), one incidence
/// block per layer.
inline ErLayers sample_er_layers(int n, const std::vector<double>& p, Rng& rng) {
    std::vector<MeasurementBlock> blocks;
    blocks.reserve(p.size());
    double p_sum = 0.0, p_max = 0.0;
    for (double pt : p) {
        if (!(pt >= 0.0 && pt <= 1.0))
            throw std::invalid_argument("sample_er_layers: p_t must lie in [0,1]");
        blocks.push_back(incidence_block(build_erdos_renyi(n, pt, rng)));
        p_sum += pt;
        p_max = std::max(p_max, pt);
    }
    return ErLayers{MeasurementSet(n, std::move(blocks)), p_sum, p_max};
}

/// y = C z, blocks concatenated in node order.
inline std::vector<double> design_apply(const MeasurementSet& m, const StackedSignal& z) {
    if (z.block_size != m.n() || z.node_count != m.node_count())
        throw std::invalid_argument("design_apply: dimension mismatch");
    std::vector<double> y(m.total_rows(), 0.0);
    int row0 = 0;
    for (int t = 0; t < m.node_count(); ++t) {
        const double* zt = z.block(t);
        const auto& blk = m.block(t);
        for (int r = 0; r < blk.row_count(); ++r) {
            double acc = 0.0;
            for (auto [col, val] : blk.rows[r].entries) acc += val * zt[col];
            y[row0 + r] = acc;
        }
        row0 += blk.row_count();
    }
    return y;
}

/// z = C^T y: block t receives C_t^T y_t.
inline StackedSignal design_apply_transpose(const MeasurementSet& m,
                                            const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != m.total_rows())
        throw std::invalid_argument("design_apply_transpose: length mismatch");
    StackedSignal z(m.n(), m.node_count());
    int row0 = 0;
    for (int t = 0; t < m.node_count(); ++t) {
        double* zt = z.block(t);
        const auto& blk = m.block(t);
        for (int r = 0; r < blk.row_count(); ++r)
            for (auto [col, val] : blk.rows[r].entries) zt[col] += val * y[row0 + r];
        row0 += blk.row_count();
    }
    return z;
}

/// Top eigenvalue of C_t^T C_t by power iteration (relative tolerance 1e-10,
/// capped at 10000 iterations), applied row-wise so the n x n matrix is never
/// formed.
inline double block_top_gram_eigenvalue(const MeasurementBlock& block, int n) {
    bool all_zero = true;
    for (const auto& row : block.rows)
        if (!row.entries.empty()) all_zero = false;
    if (all_zero) return 0.0;

    auto apply = [&](const std::vector<double>& z) {
        std::vector<double> out(n, 0.0);
        for (const auto& row : block.rows) {
            double rz = 0.0;
            for (auto [col, val] : row.entries) rz += val * z[col];
            for (auto [col, val] : row.entries) out[col] += val * rz;
        }
        return out;
    };

    Rng start(0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(n));
    std::vector<double> z(n);
    for (double& zi : z) zi = start.normal();
    double zn = norm2(z);
    for (double& zi : z) zi /= zn;

    double lambda = 0.0;
    for (int iter = 0; iter < 10000; ++iter) {
        std::vector<double> w = apply(z);
        const double wn = norm2(w);
        if (wn == 0.0) return 0.0;
        const double lambda_new = dot(z, w);
        for (int i = 0; i < n; ++i) z[i] = w[i] / wn;
        if (std::abs(lambda_new - lambda) <= 1e-10 * std::abs(lambda_new)) return lambda_new;
        lambda = lambda_new;
    }
    return lambda;
}

struct GramSummary {
    Matrix gram;                    // O_T^T O_T = sum_t C_t^T C_t, n x n
    double lambda_min = 0.0;        // lambda_n
    double lambda_second_min = 0.0; // lambda_{n-1}
    double lambda_max = 0.0;        // lambda_1
    double design_norm = 0.0;       // ||C||_2 = max_t sigma_max(C_t)
};

inline GramSummary gram_summary(const MeasurementSet& m) {
    const int n = m.n();
    GramSummary s;
    s.gram = Matrix(n, n);
    for (const auto& block : m.blocks())
        for (const auto& row : block.rows)
            for (auto [ci, vi] : row.entries)
                for (auto [cj, vj] : row.entries) s.gram(ci, cj) += vi * vj;

    const auto eig = symmetric_eigen(s.gram, false);
    s.lambda_max = eig.eigenvalues.front();
    s.lambda_min = eig.eigenvalues.back();
    s.lambda_second_min = n >= 2 ? eig.eigenvalues[n - 2] : s.lambda_min;

    double top = 0.0;
    for (const auto& block : m.blocks())
        top = std::max(top, block_top_gram_eigenvalue(block, n));
    s.design_norm = std::sqrt(top);
    return s;
}

/// Measurement CSV format. Header "node,row,col,val", one line per nonzero,
/// 1-indexed. Structured comments carry shape information that nonzeros
/// alone cannot: "#shape T n" and "#rows t m_t" for nodes whose row count is
/// not implied by their nonzeros.
inline void write_measurement_csv(std::ostream& os, const MeasurementSet& m) {
    os << "node,row,col,val\n";
    os << "#shape " << m.node_count() << ' ' << m.n() << '\n';
    os.precision(17);
    for (int t = 0; t < m.node_count(); ++t) {
        const auto& blk = m.block(t);
        int max_nonempty_row = 0;
        for (int r = 0; r < blk.row_count(); ++r)
            if (!blk.rows[r].entries.empty()) max_nonempty_row = r + 1;
        if (blk.row_count() != max_nonempty_row)
            os << "#rows " << (t + 1) << ' ' << blk.row_count() << '\n';
        for (int r = 0; r < blk.row_count(); ++r)
            for (auto [col, val] : blk.rows[r].entries)
                os << (t + 1) << ',' << (r + 1) << ',' << (col + 1) << ',' << val << '\n';
    }
}

inline MeasurementSet read_measurement_csv(std::istream& is) {
    std::string line;
    int node_count = 0, n = 0;
    std::vector<std::vector<std::vector<std::pair<int, double>>>> rows_per_node;
    std::vector<std::pair<int, int>> declared_rows;

    auto ensure_node = [&](int t) {
        if (t > node_count) node_count = t;
        if (static_cast<int>(rows_per_node.size()) < t) rows_per_node.resize(t);
    };

    while (std::getline(is, line)) {
        if (line.rfind("#shape", 0) == 0) {
            std::istringstream ls(line.substr(6));
            int t_decl = 0, n_decl = 0;
            if (!(ls >> t_decl >> n_decl))
                throw std::runtime_error("read_measurement_csv: bad #shape line");
            ensure_node(t_decl);
            n = std::max(n, n_decl);
            continue;
        }
        if (line.rfind("#rows", 0) == 0) {
            std::istringstream ls(line.substr(5));
            int t = 0, mt = 0;
            if (!(ls >> t >> mt) || t < 1 || mt < 0)
                throw std::runtime_error("read_measurement_csv: bad #rows line");
            declared_rows.emplace_back(t, mt);
            ensure_node(t);
            continue;
        }
        if (line.empty() || line[0] == '#' || line.rfind("node,", 0) == 0) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int t = 0, r = 0, col = 0;
        double val = 0.0;
        if (!(ls >> t >> r >> col >> val))
            throw std::runtime_error("read_measurement_csv: malformed line: " + line);
        if (t < 1 || r < 1 || col < 1)
            throw std::runtime_error("read_measurement_csv: indices are 1-based");
        ensure_node(t);
        n = std::max(n, col);
        auto& node_rows = rows_per_node[t - 1];
        if (static_cast<int>(node_rows.size()) < r) node_rows.resize(r);
        node_rows[r - 1].emplace_back(col - 1, val);
    }
    if (node_count == 0 || n == 0)
        throw std::runtime_error("read_measurement_csv: empty measurement set");

    rows_per_node.resize(node_count);
    std::vector<MeasurementBlock> blocks(node_count);
    for (int t = 0; t < node_count; ++t) {
        auto& node_rows = rows_per_node[t];
        blocks[t].rows.resize(node_rows.size());
        for (std::size_t r = 0; r < node_rows.size(); ++r)
            blocks[t].rows[r].entries = std::move(node_rows[r]);
    }
    for (auto [t, mt] : declared_rows) {
        if (static_cast<int>(blocks[t - 1].rows.size()) > mt)
            throw std::runtime_error("read_measurement_csv: #rows below referenced rows");
        blocks[t - 1].rows.resize(mt);
    }
    return MeasurementSet(n, std::move(blocks));
}

} // namespace graphsmooth
