#pragma once

// Discrete elliptic operator K (face-assembled, symmetric) and capacity
// matrix B (diagonal, cell-based) for div(a grad .) and b * d/dt on the
// flat cylinder grid.  All bilinear forms below are plain Euclidean sums;
// quadrature weights live inside K, B and the diagnostic functions, so the
// backward-Euler algebra identities hold to rounding error.

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"

namespace layerflow {

struct Field {
    Grid grid;
    std::vector<double> values;

    double& operator[](int n) { return values[n]; }
    double operator[](int n) const { return values[n]; }
    int size() const { return static_cast<int>(values.size()); }
};

inline Field make_field(const Grid& g) {
    return Field{g, std::vector<double>(g.node_count(), 0.0)};
}

// f(x_N, x') sampled at nodes.
inline Field sample_field(const Grid& g,
                          const std::function<double(double, double)>& f) {
    Field u = make_field(g);
    for (int n = 0; n < u.size(); ++n)
        u[n] = f(g.normal_coord(n), g.periodic_coord(n));
    return u;
}

// One value per boundary node on each of the two components {x_N = 0},
// {x_N = 1}.  In 1D both are singletons.
struct BoundaryValues {
    std::vector<double> bottom, top;
};

inline BoundaryValues boundary_trace(const Field& u) {
    const Grid& g = u.grid;
    BoundaryValues bv;
    int P = g.cells_periodic;
    bv.bottom.resize(P);
    bv.top.resize(P);
    for (int i = 0; i < P; ++i) {
        bv.bottom[i] = u[g.node(0, i)];
        bv.top[i] = u[g.node(g.cells_normal, i)];
    }
    return bv;
}

// || v ||_{L^2(boundary)}^2 with the node weight hp (1 in 1D).
inline double boundary_norm_sq(const Grid& g, const BoundaryValues& bv) {
    double s = 0.0;
    for (double v : bv.bottom) s += v * v;
    for (double v : bv.top) s += v * v;
    return s * g.boundary_weight();
}

struct OperatorPair {
    Grid grid;
    LayerSpec layer;
    double epsilon = 0.0;
    double phi_value = 1.0; // b in the layer

    // a at normal face midpoints, size M (per plane pair j, j+1).
    std::vector<double> face_conductivity;
    // diagonal of B: piecewise-constant b integrated over the node's cells.
    std::vector<double> mass;
    // plain trapezoid node weights (B with b == 1).
    std::vector<double> weight;

    // K u: row sums of face differences.  2D couples periodic neighbours
    // with unit conductivity (profiles depend on d only).
    std::vector<double> apply_stiffness(const std::vector<double>& u) const {
        const Grid& g = grid;
        int M = g.cells_normal, P = g.cells_periodic;
        std::vector<double> r(u.size(), 0.0);
        double cn = (g.dimension == 2 ? g.hp() : 1.0) / g.h();
        for (int j = 0; j < M; ++j) {
            double c = face_conductivity[j] * cn;
            for (int i = 0; i < P; ++i) {
                int lo = g.node(j, i), hi = g.node(j + 1, i);
                double flux = c * (u[hi] - u[lo]);
                r[lo] -= flux;
                r[hi] += flux;
            }
        }
        if (g.dimension == 2) {
            for (int j = 0; j <= M; ++j) {
                double row = (j == 0 || j == M) ? 0.5 * g.h() : g.h();
                double c = row / g.hp();
                for (int i = 0; i < P; ++i) {
                    int lo = g.node(j, i), hi = g.node(j, (i + 1) % P);
                    double flux = c * (u[hi] - u[lo]);
                    r[lo] -= flux;
                    r[hi] += flux;
                }
            }
        }
        return r;
    }

    double energy(const std::vector<double>& u) const {
        std::vector<double> ku = apply_stiffness(u);
        double s = 0.0;
        for (size_t n = 0; n < u.size(); ++n) s += u[n] * ku[n];
        return 0.5 * s;
    }

    // I(u) = sum (K u)_n^2 / B_nn, the discrete \int (1/b) |div(a grad u)|^2.
    double dissipation(const std::vector<double>& u) const {
        std::vector<double> ku = apply_stiffness(u);
        double s = 0.0;
        for (size_t n = 0; n < u.size(); ++n) s += ku[n] * ku[n] / mass[n];
        return s;
    }

    double mass_norm_sq(const std::vector<double>& u) const {
        double s = 0.0;
        for (size_t n = 0; n < u.size(); ++n) s += mass[n] * u[n] * u[n];
        return s;
    }
};

// Face conductivities sample a at face midpoints (exact energy for
// piecewise-linear a with kinks on node planes, e.g. the canonical
// profile); the capacity is integrated cell-by-cell, which is exact for
// the piecewise-constant b_eps.
inline OperatorPair assemble_operators(const Grid& g, const LayerSpec& layer,
                                       const ConductivityProfile& a,
                                       const CapacityProfile& b) {
    OperatorPair op;
    op.grid = g;
    op.layer = layer;
    op.epsilon = layer.epsilon;
    op.phi_value = b.layer_value(layer.epsilon);

    int M = g.cells_normal, P = g.cells_periodic;
    double h = g.h();
    op.face_conductivity.resize(M);
    for (int j = 0; j < M; ++j) {
        double xm = (j + 0.5) * h;
        op.face_conductivity[j] = a(std::min(xm, 1.0 - xm), layer.epsilon);
    }

    op.mass.resize(g.node_count());
    op.weight.resize(g.node_count());
    double area = g.dimension == 2 ? g.hp() : 1.0;
    for (int j = 0; j <= M; ++j) {
        double m = 0.0, w = 0.0;
        if (j > 0) {
            double bc = layer.cell_in_layer(g, j - 1) ? op.phi_value : 1.0;
            m += 0.5 * h * bc;
            w += 0.5 * h;
        }
        if (j < M) {
            double bc = layer.cell_in_layer(g, j) ? op.phi_value : 1.0;
            m += 0.5 * h * bc;
            w += 0.5 * h;
        }
        for (int i = 0; i < P; ++i) {
            op.mass[g.node(j, i)] = m * area;
            op.weight[g.node(j, i)] = w * area;
        }
    }
    return op;
}

// Unit-coefficient operators (a == 1, b == 1) used by the limit problems.
inline OperatorPair assemble_unit_operators(const Grid& g) {
    LayerSpec none;
    none.epsilon = g.h(); // placeholder; no cell is flagged
    none.layer_cells = 0;
    return assemble_operators(g, none, make_conductivity(ProfileKind::unit),
                              CapacityProfile{[](double) { return 1.0; }, 0.0});
}

// \int_Omega b_eps dx by exact cell sums (the torus factor has measure 1).
inline double total_capacity(const Grid& g, const LayerSpec& layer,
                             const CapacityProfile& b) {
    double phi = b.layer_value(layer.epsilon);
    double acc = 0.0;
    for (int j = 0; j < g.cells_normal; ++j)
        acc += g.h() * (layer.cell_in_layer(g, j) ? phi : 1.0);
    return acc;
}

// Layer average m_eps u: trapezoid mean of u over depth [0, eps] along each
// boundary fiber.
inline BoundaryValues layer_average(const OperatorPair& op, const Field& u) {
    const Grid& g = op.grid;
    int M = g.cells_normal, P = g.cells_periodic, k = op.layer.layer_cells;
    if (k < 1) throw std::logic_error("layer_average: no layer present");
    BoundaryValues bv;
    bv.bottom.resize(P);
    bv.top.resize(P);
    double scale = g.h() / op.epsilon; // h / eps, trapezoid mean
    for (int i = 0; i < P; ++i) {
        double sb = 0.5 * (u[g.node(0, i)] + u[g.node(k, i)]);
        double st = 0.5 * (u[g.node(M, i)] + u[g.node(M - k, i)]);
        for (int j = 1; j < k; ++j) {
            sb += u[g.node(j, i)];
            st += u[g.node(M - j, i)];
        }
        bv.bottom[i] = sb * scale;
        bv.top[i] = st * scale;
    }
    return bv;
}

// Trace of u on the planes at depth delta from each boundary component;
// delta must sit on a node plane.
inline BoundaryValues depth_trace(const Grid& g, const Field& u, double delta) {
    double ratio = delta / g.h();
    int j = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - j) > 1e-9 || j < 0 || 2 * j > g.cells_normal)
        throw std::invalid_argument("depth_trace: depth must sit on a node plane");
    BoundaryValues bv;
    int P = g.cells_periodic;
    bv.bottom.resize(P);
    bv.top.resize(P);
    for (int i = 0; i < P; ++i) {
        bv.bottom[i] = u[g.node(j, i)];
        bv.top[i] = u[g.node(g.cells_normal - j, i)];
    }
    return bv;
}

// Element of the coupled limit space L^2(Omega) x L^2(boundary), with the
// kappa-weighted norm ||u||^2 + kappa ||w||^2_{boundary}.
struct CoupledState {
    Field interior;
    BoundaryValues boundary;
    double kappa = 1.0;
};

// iota_eps v = (v, m_eps v), the embedding into the coupled space.
inline CoupledState embed(const OperatorPair& op, const Field& v,
                          double kappa = 1.0) {
    return CoupledState{v, layer_average(op, v), kappa};
}

inline double coupled_norm_sq(const Grid& g, const CoupledState& s) {
    double interior = 0.0;
    for (int n = 0; n < s.interior.size(); ++n)
        interior += g.quad_weight(n) * s.interior[n] * s.interior[n];
    return interior + s.kappa * boundary_norm_sq(g, s.boundary);
}

inline double l2_norm_sq(const Field& u) {
    double s = 0.0;
    for (int n = 0; n < u.size(); ++n)
        s += u.grid.quad_weight(n) * u[n] * u[n];
    return s;
}

// Kinetic functional of a discrete trajectory,
//   F_eps = (1/2) sum_n dt <B v_n, v_n>,  v_n the forward quotient.
inline double functional_F(const std::vector<Field>& trajectory, double dt,
                           const OperatorPair& op) {
    if (trajectory.size() < 2)
        throw std::invalid_argument("F: need at least two snapshots");
    double acc = 0.0;
    for (size_t n = 0; n + 1 < trajectory.size(); ++n) {
        double s = 0.0;
        for (int i = 0; i < trajectory[n].size(); ++i) {
            double v = (trajectory[n + 1][i] - trajectory[n][i]) / dt;
            s += op.mass[i] * v * v;
        }
        acc += dt * s;
    }
    return 0.5 * acc;
}

inline double l2_distance(const Field& u, const Field& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("l2_distance: size mismatch");
    double s = 0.0;
    for (int n = 0; n < u.size(); ++n) {
        double d = u[n] - v[n];
        s += u.grid.quad_weight(n) * d * d;
    }
    return std::sqrt(s);
}

} // namespace layerflow
