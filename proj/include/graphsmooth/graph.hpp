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
#include "graphsmooth/rng.hpp"
#include "graphsmooth/stacked_signal.hpp"

namespace graphsmooth {

enum class GraphKind { complete, star, path, erdos_renyi, custom };

inline const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::complete: return "complete";
        case GraphKind::star: return "star";
        case GraphKind::path: return "path";
        case GraphKind::erdos_renyi: return "erdos_renyi";
        default: return "custom";
    }
}

/// Undirected simple graph on T vertices, stored as a sorted deduplicated
/// edge list with 0-based endpoints i < j. Immutable after construction.
class Graph {
public:
    Graph(int vertex_count, std::vector<std::pair<int, int>> edges,
          GraphKind kind = GraphKind::custom)
        : vertex_count_(vertex_count), kind_(kind) {
        if (vertex_count < 1) throw std::invalid_argument("Graph: vertex_count must be >= 1");
        for (auto& [a, b] : edges) {
            if (a == b) throw std::invalid_argument("Graph: self-loop");
            if (a < 0 || b < 0 || a >= vertex_count || b >= vertex_count)
                throw std::invalid_argument("Graph: endpoint out of range");
            if (a > b) std::swap(a, b);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);
    }

    int vertex_count() const { return vertex_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    GraphKind kind() const { return kind_; }

    std::vector<int> degrees() const {
        std::vector<int> deg(vertex_count_, 0);
        for (auto [a, b] : edges_) {
            ++deg[a];
            ++deg[b];
        }
        return deg;
    }

    int connected_component_count() const {
        std::vector<int> parent(vertex_count_);
        for (int i = 0; i < vertex_count_; ++i) parent[i] = i;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        int components = vertex_count_;
        for (auto [a, b] : edges_) {
            int ra = find(a), rb = find(b);
            if (ra != rb) {
                parent[ra] = rb;
                --components;
            }
        }
        return components;
    }

    bool is_connected() const { return connected_component_count() == 1; }

private:
    int vertex_count_ = 0;
    std::vector<std::pair<int, int>> edges_;
    GraphKind kind_;
};

inline Graph build_complete(int t) {
    if (t < 2) throw std::invalid_argument("build_complete: T must be >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(t) * (t - 1) / 2);
    for (int i = 0; i < t; ++i)
        for (int j = i + 1; j < t; ++j) edges.emplace_back(i, j);
    return Graph(t, std::move(edges), GraphKind::complete);
}

/// Star with the hub at vertex 0.
inline Graph build_star(int t) {
    if (t < 2) throw std::invalid_argument("build_star: T must be >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(t - 1);
    for (int j = 1; j < t; ++j) edges.emplace_back(0, j);
    return Graph(t, std::move(edges), GraphKind::star);
}

inline Graph build_path(int t) {
    if (t < 2) throw std::invalid_argument("build_path: T must be >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(t - 1);
    for (int j = 0; j + 1 < t; ++j) edges.emplace_back(j, j + 1);
    return Graph(t, std::move(edges), GraphKind::path);
}

/// G(n, p): every unordered pair drawn independently, in lexicographic order
/// of (i, j), so the edge set is a pure function of the stream state.
inline Graph build_erdos_renyi(int n, double p, Rng& rng) {
    if (n < 2) throw std::invalid_argument("build_erdos_renyi: n must be >= 2");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("build_erdos_renyi: p must lie in [0,1]");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
    return Graph(n, std::move(edges), GraphKind::erdos_renyi);
}

/// (L (x) I_n) z computed edge-wise; L is never materialized.
inline StackedSignal laplacian_apply(const Graph& g, const StackedSignal& z) {
    if (z.node_count != g.vertex_count())
        throw std::invalid_argument("laplacian_apply: node count mismatch");
    const int n = z.block_size;
    StackedSignal out(n, z.node_count);
    for (auto [a, b] : g.edges()) {
        const double* za = z.block(a);
        const double* zb = z.block(b);
        double* oa = out.block(a);
        double* ob = out.block(b);
        for (int i = 0; i < n; ++i) {
            const double d = za[i] - zb[i];
            oa[i] += d;
            ob[i] -= d;
        }
    }
    return out;
}

/// Dense T x T Laplacian, for spectra and oracle checks.
inline Matrix laplacian_dense(const Graph& g) {
    const int t = g.vertex_count();
    Matrix l(t, t);
    for (auto [a, b] : g.edges()) {
        l(a, a) += 1.0;
        l(b, b) += 1.0;
        l(a, b) -= 1.0;
        l(b, a) -= 1.0;
    }
    return l;
}

enum class SpectrumSource { closed_form, dense_solver };

struct LaplacianSpectrum {
    std::vector<double> eigenvalues; // descending, length T
    SpectrumSource source = SpectrumSource::dense_solver;
};

/// Laplacian eigenvalues, sorted descending. Complete graphs use the closed
/// form {T, ..., T, 0}; every other graph goes through the dense Jacobi
/// solver, which is authoritative.
inline LaplacianSpectrum laplacian_spectrum(const Graph& g) {
    const int t = g.vertex_count();
    if (g.kind() == GraphKind::complete) {
        LaplacianSpectrum s;
        s.eigenvalues.assign(t, static_cast<double>(t));
        s.eigenvalues.back() = 0.0;
        s.source = SpectrumSource::closed_form;
        return s;
    }
    LaplacianSpectrum s;
    s.eigenvalues = symmetric_eigen(laplacian_dense(g), false).eigenvalues;
    s.source = SpectrumSource::dense_solver;
    return s;
}

/// Fiedler eigenvalue lambda_{T-1}; strictly positive iff connected.
inline double fiedler_value(const Graph& g) {
    const int t = g.vertex_count();
    if (t < 2) return 0.0;
    return laplacian_spectrum(g).eigenvalues[t - 2];
}

/// Sum over edges of ||x_a - x_b||^2, i.e. ||M x||^2 = <x, (L (x) I_n) x>.
inline double quadratic_variation(const Graph& g, const StackedSignal& x) {
    if (x.node_count != g.vertex_count())
        throw std::invalid_argument("quadratic_variation: node count mismatch");
    double total = 0.0;
    for (auto [a, b] : g.edges()) {
        const double* xa = x.block(a);
        const double* xb = x.block(b);
        for (int i = 0; i < x.block_size; ++i) {
            const double d = xa[i] - xb[i];
            total += d * d;
        }
    }
    return total;
}

/// Edge-list text format: first line "T <int>", then one 1-indexed "t t'"
/// pair per line; '#' starts a comment.
inline void write_edge_list(std::ostream& os, const Graph& g) {
    os << "T " << g.vertex_count() << '\n';
    for (auto [a, b] : g.edges()) os << (a + 1) << ' ' << (b + 1) << '\n';
}

inline Graph read_edge_list(std::istream& is, GraphKind kind = GraphKind::custom) {
    std::string line;
    int t = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (t < 0) {
            std::string tag;
            if (!(ls >> tag)) continue;
            if (tag != "T") throw std::runtime_error("read_edge_list: expected 'T <int>' header");
            if (!(ls >> t) || t < 1) throw std::runtime_error("read_edge_list: bad vertex count");
            continue;
        }
        int a = 0, b = 0;
        if (!(ls >> a)) continue;
        if (!(ls >> b)) throw std::runtime_error("read_edge_list: dangling endpoint");
        edges.emplace_back(a - 1, b - 1);
    }
    if (t < 0) throw std::runtime_error("read_edge_list: missing header");
    return Graph(t, std::move(edges), kind);
}

} // namespace graphsmooth
