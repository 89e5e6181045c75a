#pragma once

// Residual checks for the structural identities: the Reilly-type identity
// for the linearly degenerate conductivity, the trace/average gap bound,
// per-run energy bookkeeping, and convergence-rate estimation.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "operators.hpp"
#include "solvers.hpp"

namespace layerflow {

struct ReillyReport {
    double lhs = 0.0;           // \int |L u|^2, L the assembled operator
    double hessian_term = 0.0;  // weighted squared second derivatives
    double boundary_term = 0.0; // (1/eps) \int_{d = eps} |u_N|^2
    double residual = 0.0;      // |lhs - hessian - boundary| / max(lhs, 1)
};

// Reilly-type identity for the canonical profile a = min(d/eps, 1) and the
// operator L u = u_{x'x'} + (a u_N)_N (unit tangential conductivity, as
// assembled):
//   \int |L u|^2 = \int ( u_{x'x'}^2 + 2 a u_{x'N}^2 + a^2 u_{NN}^2 )
//                  + (1/eps) \int_{d = eps} u_N^2 .
// In 1D this reduces to \int ((a u')')^2 = \int a^2 u''^2 + (1/eps) sum u'^2
// at the two interface planes.  Second differences are centered, except at
// the two boundary planes (one-sided); the normal derivative on the
// interface planes is centered, which never straddles the conductivity kink
// in the terms where a multiplies it.
inline ReillyReport reilly_residual(const Field& u, const Grid& g,
                                    const LayerSpec& layer,
                                    const ConductivityProfile& a) {
    if (a.kind != ProfileKind::canonical)
        throw std::invalid_argument("reilly: identity stated for the canonical profile only");
    OperatorPair op = assemble_operators(
        g, layer, a, CapacityProfile{[](double) { return 1.0; }, 0.0});

    int M = g.cells_normal, P = g.cells_periodic;
    double h = g.h(), hp = g.hp();
    ReillyReport rep;

    // lhs: (K u)_n / w_n approximates -L u nodewise.
    std::vector<double> ku = op.apply_stiffness(u.values);
    for (int n = 0; n < u.size(); ++n) {
        double lu = ku[n] / op.weight[n];
        rep.lhs += op.weight[n] * lu * lu;
    }

    auto at = [&](int j, int i) {
        return u[g.node(j, ((i % P) + P) % P)];
    };
    for (int j = 0; j <= M; ++j) {
        double x = j * h;
        double av = a(std::min(x, 1.0 - x), layer.epsilon);
        for (int i = 0; i < P; ++i) {
            // u_NN: centered; one-sided at the boundary planes.
            double unn;
            if (j == 0)
                unn = (at(0, i) - 2.0 * at(1, i) + at(2, i)) / (h * h);
            else if (j == M)
                unn = (at(M, i) - 2.0 * at(M - 1, i) + at(M - 2, i)) / (h * h);
            else
                unn = (at(j + 1, i) - 2.0 * at(j, i) + at(j - 1, i)) / (h * h);
            double cell = av * av * unn * unn;
            if (g.dimension == 2) {
                double utt = (at(j, i + 1) - 2.0 * at(j, i) + at(j, i - 1)) /
                             (hp * hp);
                double utn;
                if (j == 0)
                    utn = (at(1, i + 1) - at(1, i - 1) - at(0, i + 1) +
                           at(0, i - 1)) / (2.0 * hp * h);
                else if (j == M)
                    utn = (at(M, i + 1) - at(M, i - 1) - at(M - 1, i + 1) +
                           at(M - 1, i - 1)) / (2.0 * hp * h);
                else
                    utn = (at(j + 1, i + 1) - at(j + 1, i - 1) -
                           at(j - 1, i + 1) + at(j - 1, i - 1)) /
                          (4.0 * hp * h);
                cell += utt * utt + 2.0 * av * utn * utn;
            }
            rep.hessian_term += op.weight[g.node(j, i)] * cell;
        }
    }

    // boundary term on the two interface planes d = eps.
    int k = layer.layer_cells;
    double bw = g.boundary_weight();
    for (int i = 0; i < P; ++i) {
        double un_b = (at(k + 1, i) - at(k - 1, i)) / (2.0 * h);
        double un_t = (at(M - k + 1, i) - at(M - k - 1, i)) / (2.0 * h);
        rep.boundary_term += bw * (un_b * un_b + un_t * un_t);
    }
    rep.boundary_term /= layer.epsilon;

    rep.residual = std::abs(rep.lhs - rep.hessian_term - rep.boundary_term) /
                   std::max(rep.lhs, 1.0);
    return rep;
}

// Max per-step energy-dissipation-balance defect, relative to max(E0, 1).
inline double edb_ledger_check(const RunLedger& led) {
    if (led.steps.empty()) throw std::invalid_argument("edb: empty ledger");
    double scale = std::max(led.steps.front().energy, 1.0);
    double worst = 0.0;
    for (const StepRecord& s : led.steps)
        worst = std::max(worst, std::abs(s.edb_residual));
    return worst / scale;
}

// Relative residual of the global energy equality (see solvers).
inline double energy_equality_check(const RunLedger& led) {
    double m0 = 0.5 * led.steps.front().mass_norm_sq;
    double raw = std::abs(energy_equality_residual(led));
    return m0 > 0.0 ? raw / m0 : raw;
}

// Trace/average gap against the non-degeneracy bound:
//   || trace u - m_eps u ||^2_{boundary} <= 2 E_eps(u) N_1(eps).
struct GapReport {
    double gap = 0.0;
    double bound = 0.0;
};

inline GapReport trace_average_gap(const Field& u, const OperatorPair& op,
                                   double energy_value, double nondeg_value) {
    BoundaryValues tr = boundary_trace(u);
    BoundaryValues av = layer_average(op, u);
    double s = 0.0;
    for (size_t i = 0; i < tr.bottom.size(); ++i) {
        double db = tr.bottom[i] - av.bottom[i];
        double dt_ = tr.top[i] - av.top[i];
        s += db * db + dt_ * dt_;
    }
    GapReport rep;
    rep.gap = s * op.grid.boundary_weight();
    rep.bound = 2.0 * energy_value * nondeg_value;
    return rep;
}

struct ErrorReport {
    double l2_interior = 0.0; // bulk distance at the final time
    double l2_boundary = 0.0; // trace path distance in L^2(boundary x (0,T))
    double sup_t_l2 = 0.0;    // sup of bulk distances over snapshot times
    double rate = 0.0;        // filled by rate_estimate when applicable
};

// L^2 distance on the bulk {d >= eps} (interface planes at half weight).
inline double l2_bulk_distance(const OperatorPair& op, const Field& u,
                               const Field& v) {
    const Grid& g = op.grid;
    int k = op.layer.layer_cells, M = g.cells_normal;
    double area = g.dimension == 2 ? g.hp() : 1.0;
    double s = 0.0;
    for (int j = k; j <= M - k; ++j) {
        double w = (j == k || j == M - k) ? 0.5 * g.h() : g.h();
        for (int i = 0; i < g.cells_periodic; ++i) {
            int n = g.node(j, i);
            double d = u[n] - v[n];
            s += w * area * d * d;
        }
    }
    return std::sqrt(s);
}

// Compare a boundary-layer ledger against a limit ledger on the same grid:
// interior distance on bulk nodes, boundary path distance between m_eps u
// and the limit trace w, and the sup over shared snapshot times.
inline ErrorReport compare_to_limit(const OperatorPair& op,
                                    const RunLedger& bl,
                                    const RunLedger& limit) {
    if (bl.steps.size() != limit.steps.size() ||
        std::abs(bl.dt - limit.dt) > 1e-15)
        throw std::invalid_argument("compare: ledgers use different time grids");
    ErrorReport rep;

    const Grid& g = op.grid;
    double path = 0.0;
    for (size_t n = 1; n < bl.boundary_path.size(); ++n) {
        const BoundaryValues& a = bl.boundary_path[n];
        const BoundaryValues& b = limit.boundary_path[n];
        double s = 0.0;
        for (size_t i = 0; i < a.bottom.size(); ++i) {
            double db = a.bottom[i] - b.bottom[i];
            double dt_ = a.top[i] - b.top[i];
            s += db * db + dt_ * dt_;
        }
        path += bl.dt * s * g.boundary_weight();
    }
    rep.l2_boundary = std::sqrt(path);

    rep.l2_interior = l2_bulk_distance(op, bl.final_field, limit.final_field);
    rep.sup_t_l2 = rep.l2_interior;
    for (const auto& [t, f] : bl.snapshots) {
        for (const auto& [tl, fl] : limit.snapshots) {
            if (std::abs(t - tl) <= 1e-12) {
                rep.sup_t_l2 =
                    std::max(rep.sup_t_l2, l2_bulk_distance(op, f, fl));
                break;
            }
        }
    }
    return rep;
}

// Least-squares slope of log(error) against log(param).
inline double rate_estimate(const std::vector<double>& params,
                            const std::vector<double>& errors) {
    if (params.size() != errors.size() || params.size() < 3)
        throw std::invalid_argument("rate: need >= 3 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        if (!(params[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("rate: entries must be positive");
        double x = std::log(params[i]), y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(params.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace layerflow
