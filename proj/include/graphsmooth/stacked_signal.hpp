#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace graphsmooth {

/// Column-stacked node signals: node t (0-based) occupies entries
/// [t*n, (t+1)*n) of data.
struct StackedSignal {
    int block_size = 0; // n
    int node_count = 0; // T
    std::vector<double> data;

    StackedSignal() = default;
    StackedSignal(int n, int t)
        : block_size(n), node_count(t), data(static_cast<std::size_t>(n) * t, 0.0) {
        if (n < 1 || t < 1) throw std::invalid_argument("StackedSignal: n and T must be >= 1");
    }
    StackedSignal(int n, int t, std::vector<double> values)
        : block_size(n), node_count(t), data(std::move(values)) {
        if (n < 1 || t < 1) throw std::invalid_argument("StackedSignal: n and T must be >= 1");
        if (data.size() != static_cast<std::size_t>(n) * t)
            throw std::invalid_argument("StackedSignal: data length must be n*T");
    }

    double* block(int t) { return data.data() + static_cast<std::size_t>(t) * block_size; }
    const double* block(int t) const {
        return data.data() + static_cast<std::size_t>(t) * block_size;
    }

    double& at(int t, int coord) { return data[static_cast<std::size_t>(t) * block_size + coord]; }
    double at(int t, int coord) const {
        return data[static_cast<std::size_t>(t) * block_size + coord];
    }
};

/// Subtracts the per-node mean from every block: applies
/// P = I_T (x) (I_n - ones*ones^T/n). Each pairwise difference is projected
/// onto span(ones)^perp, so the quadratic variation can only shrink and the
/// smoothness bound S_T is preserved.
inline void center_blocks_inplace(StackedSignal& x) {
    for (int t = 0; t < x.node_count; ++t) {
        double* b = x.block(t);
        double mean = 0.0;
        for (int i = 0; i < x.block_size; ++i) mean += b[i];
        mean /= x.block_size;
        for (int i = 0; i < x.block_size; ++i) b[i] -= mean;
    }
}

inline StackedSignal center_blocks(StackedSignal x) {
    center_blocks_inplace(x);
    return x;
}

/// CSV serialization, one line per entry: node,coord,value (1-indexed).
inline void write_signal_csv(std::ostream& os, const StackedSignal& x) {
    os << "node,coord,value\n";
    os.precision(17);
    for (int t = 0; t < x.node_count; ++t)
        for (int i = 0; i < x.block_size; ++i)
            os << (t + 1) << ',' << (i + 1) << ',' << x.at(t, i) << '\n';
}

inline StackedSignal read_signal_csv(std::istream& is) {
    std::string line;
    int max_node = 0, max_coord = 0;
    std::vector<std::tuple<int, int, double>> entries;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("node,", 0) == 0) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int node = 0, coord = 0;
        double value = 0.0;
        if (!(ls >> node >> coord >> value))
            throw std::runtime_error("read_signal_csv: malformed line: " + line);
        entries.emplace_back(node, coord, value);
        max_node = std::max(max_node, node);
        max_coord = std::max(max_coord, coord);
    }
    if (entries.empty()) throw std::runtime_error("read_signal_csv: no entries");
    StackedSignal x(max_coord, max_node);
    for (auto& [node, coord, value] : entries) {
        if (node < 1 || coord < 1)
            throw std::runtime_error("read_signal_csv: indices are 1-based");
        x.at(node - 1, coord - 1) = value;
    }
    return x;
}

} // namespace graphsmooth
