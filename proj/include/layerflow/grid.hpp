#pragma once

// Flat cylinder T^{N-1} x (0,1), discretized with a uniform vertex-centered
// grid.  The normal direction x_N carries M cells (M+1 node planes); the
// periodic factor, present only in 2D, carries P cells (P nodes, wrapped).
// Nodes are enumerated normal-major: node = j*P + i with j the normal plane
// and i the periodic index.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace layerflow {

struct Grid {
    int dimension = 1;      // 1 or 2
    int cells_normal = 0;   // M
    int cells_periodic = 1; // P; forced to 1 in 1D

    double h() const { return 1.0 / cells_normal; }
    double hp() const { return 1.0 / cells_periodic; }

    int planes() const { return cells_normal + 1; }
    int node_count() const { return planes() * cells_periodic; }

    int node(int j, int i = 0) const { return j * cells_periodic + i; }
    int normal_index(int n) const { return n / cells_periodic; }
    int periodic_index(int n) const { return n % cells_periodic; }

    double normal_coord(int n) const { return normal_index(n) * h(); }
    double periodic_coord(int n) const { return periodic_index(n) * hp(); }

    bool on_boundary(int n) const {
        int j = normal_index(n);
        return j == 0 || j == cells_normal;
    }

    // Trapezoid quadrature weight of a node (cell area share).
    double quad_weight(int n) const {
        double wn = on_boundary(n) ? 0.5 * h() : h();
        return dimension == 2 ? wn * hp() : wn;
    }

    // Surface measure carried by one boundary node (per boundary component).
    double boundary_weight() const { return dimension == 2 ? hp() : 1.0; }
};

inline Grid build_grid(int dimension, int cells_normal, int cells_periodic = 0) {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("grid: dimension must be 1 or 2");
    if (cells_normal < 8)
        throw std::invalid_argument("grid too coarse: need at least 8 normal cells");
    Grid g;
    g.dimension = dimension;
    g.cells_normal = cells_normal;
    if (dimension == 1) {
        g.cells_periodic = 1;
    } else {
        if (cells_periodic < 4)
            throw std::invalid_argument("grid too coarse: need at least 4 periodic cells in 2D");
        g.cells_periodic = cells_periodic;
    }
    return g;
}

// Distance to the boundary planes x_N = 0 and x_N = 1.
inline double boundary_distance(const Grid& g, int n) {
    double x = g.normal_coord(n);
    return std::min(x, 1.0 - x);
}

// The layer Omega \ Omega_eps = {d(x) < eps}; eps must be an exact multiple
// of h so the layer interface falls on node planes.
struct LayerSpec {
    double epsilon = 0.0;
    int layer_cells = 0; // k = eps / h

    // Entire closed layer, interface plane included.
    bool in_closed_layer(const Grid& g, int n) const {
        int j = g.normal_index(n);
        return j <= layer_cells || j >= g.cells_normal - layer_cells;
    }
    // Open layer {d < eps}: interface plane excluded.
    bool in_open_layer(const Grid& g, int n) const {
        int j = g.normal_index(n);
        return j < layer_cells || j > g.cells_normal - layer_cells;
    }
    bool cell_in_layer(const Grid& g, int cell_j) const {
        return cell_j < layer_cells || cell_j >= g.cells_normal - layer_cells;
    }
};

inline LayerSpec layer_partition(const Grid& g, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw std::invalid_argument("layer: epsilon must lie in (0, 1/2)");
    double ratio = epsilon / g.h();
    int k = static_cast<int>(std::lround(ratio));
    if (k < 1 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("layer: epsilon = " + std::to_string(epsilon) +
                                    " is not a multiple of h = " + std::to_string(g.h()));
    if (2 * k >= g.cells_normal)
        throw std::invalid_argument("layer: layers overlap, need 2*eps < 1");
    LayerSpec ls;
    ls.epsilon = epsilon;
    ls.layer_cells = k;
    return ls;
}

} // namespace layerflow
