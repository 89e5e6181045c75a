#pragma once

// Gamma-convergence probes with respect to the embedding
// iota_eps(v) = (v, m_eps v): recovery-sequence values for the energy
// E_eps -> E_0 and the kinetic functional F_eps -> F_bs, and a sampled
// lower-bound check for the dissipation I_eps.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "diagnostics.hpp"
#include "operators.hpp"
#include "solvers.hpp"

namespace layerflow {

struct GammaProbe {
    std::vector<double> epsilon_sweep;        // strictly decreasing
    std::vector<double> functional_values;    // per eps
    double limit_value = 0.0;                 // may be +inf (sentinel)
    std::vector<double> embedding_distances;  // || iota_eps(u) - (u, w) ||
    bool trace_consistent = true;             // false when w != trace u
};

namespace detail {

inline void check_sweep(const std::vector<double>& sweep) {
    if (sweep.empty())
        throw std::invalid_argument("gamma: empty epsilon sweep");
    for (size_t i = 1; i < sweep.size(); ++i)
        if (!(sweep[i] < sweep[i - 1]))
            throw std::invalid_argument("gamma: sweep must be strictly decreasing");
}

} // namespace detail

// Recovery sequence for the energy: the constant sequence v^eps = u, with
// E_eps(u) -> E_0(u, trace u) = (1/2) \int |grad u|^2.  If the target
// boundary datum w differs from trace u the limit is +inf (the Gamma-limit
// is finite only on the trace-consistent diagonal) and the probe is flagged.
inline GammaProbe recovery_E(const Field& u, const ConductivityProfile& a,
                             double kappa, const std::vector<double>& sweep,
                             const BoundaryValues* target_w = nullptr) {
    detail::check_sweep(sweep);
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("gamma: kappa must be finite and positive");
    const Grid& g = u.grid;
    GammaProbe probe;
    probe.epsilon_sweep = sweep;

    OperatorPair unit = assemble_unit_operators(g);
    probe.limit_value = unit.energy(u.values);
    BoundaryValues w = target_w ? *target_w : boundary_trace(u);
    if (target_w) {
        BoundaryValues tr = boundary_trace(u);
        for (size_t i = 0; i < w.bottom.size(); ++i)
            if (std::abs(w.bottom[i] - tr.bottom[i]) > 1e-14 ||
                std::abs(w.top[i] - tr.top[i]) > 1e-14) {
                probe.trace_consistent = false;
                probe.limit_value = std::numeric_limits<double>::infinity();
            }
    }

    CapacityProfile b = capacity_from_kappa(kappa);
    for (double eps : sweep) {
        LayerSpec layer = layer_partition(g, eps);
        OperatorPair op = assemble_operators(g, layer, a, b);
        probe.functional_values.push_back(op.energy(u.values));

        CoupledState emb = embed(op, u);
        double dist_sq = 0.0;
        for (size_t i = 0; i < w.bottom.size(); ++i) {
            double db = emb.boundary.bottom[i] - w.bottom[i];
            double dt_ = emb.boundary.top[i] - w.top[i];
            dist_sq += db * db + dt_ * dt_;
        }
        dist_sq *= kappa * g.boundary_weight(); // interior parts coincide
        probe.embedding_distances.push_back(std::sqrt(dist_sq));
    }
    return probe;
}

// Recovery sequence for F: splice the target pair (u(t), w(t)) across the
// layer and evaluate F_eps; the limit is
//   F_bs = (1/2) [ \int\int u_t^2 + kappa \int\int_boundary w_t^2 ].
inline GammaProbe recovery_F(const std::vector<Field>& u_traj,
                             const std::vector<BoundaryValues>& w_traj,
                             const CapacityProfile& b, double dt,
                             const std::vector<double>& sweep) {
    detail::check_sweep(sweep);
    double kappa = b.kappa;
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("gamma: F recovery needs finite kappa > 0");
    if (u_traj.size() != w_traj.size() || u_traj.size() < 2)
        throw std::invalid_argument("gamma: trajectory pair mismatch");

    const Grid& g = u_traj.front().grid;
    GammaProbe probe;
    probe.epsilon_sweep = sweep;

    double limit = 0.0;
    for (size_t n = 0; n + 1 < u_traj.size(); ++n) {
        double interior = 0.0;
        for (int i = 0; i < u_traj[n].size(); ++i) {
            double v = (u_traj[n + 1][i] - u_traj[n][i]) / dt;
            interior += g.quad_weight(i) * v * v;
        }
        double boundary = 0.0;
        for (size_t i = 0; i < w_traj[n].bottom.size(); ++i) {
            double vb = (w_traj[n + 1].bottom[i] - w_traj[n].bottom[i]) / dt;
            double vt = (w_traj[n + 1].top[i] - w_traj[n].top[i]) / dt;
            boundary += vb * vb + vt * vt;
        }
        limit += dt * (interior + kappa * boundary * g.boundary_weight());
    }
    probe.limit_value = 0.5 * limit;

    for (double eps : sweep) {
        LayerSpec layer = layer_partition(g, eps);
        OperatorPair op = assemble_operators(
            g, layer, make_conductivity(ProfileKind::canonical), b);
        std::vector<Field> spliced;
        spliced.reserve(u_traj.size());
        for (size_t n = 0; n < u_traj.size(); ++n)
            spliced.push_back(well_prepared_data(op, u_traj[n], w_traj[n]));
        probe.functional_values.push_back(functional_F(spliced, dt, op));
        probe.embedding_distances.push_back(
            std::abs(probe.functional_values.back() - probe.limit_value));
    }
    return probe;
}

// Sampled lower-bound probe for the dissipation: per sweep point, the
// time-integrated I_eps along the boundary-layer run against the limit-side
//   I_0 = \int\int |Lap u|^2 + (1/kappa) \int\int_boundary |du/dnu|^2
// accumulated by the limit solver.  A report of sampled inequalities, not a
// certificate.
struct LiminfReport {
    std::vector<double> epsilon_sweep;
    std::vector<double> dissipation_eps; // integrated I_eps per sweep point
    double limit_dissipation = 0.0;      // integrated I_0
    std::vector<double> margins;         // I_eps - I_0
};

inline double integrated_dissipation(const RunLedger& led) {
    double acc = 0.0;
    for (size_t n = 1; n < led.steps.size(); ++n)
        acc += led.dt * led.steps[n].dissipation;
    return acc;
}

inline LiminfReport liminf_probe_I(const std::vector<double>& sweep,
                                   const std::vector<RunLedger>& bl_runs,
                                   const RunLedger& limit_run) {
    if (sweep.size() != bl_runs.size())
        throw std::invalid_argument("liminf: sweep/ledger mismatch");
    LiminfReport rep;
    rep.epsilon_sweep = sweep;
    rep.limit_dissipation = integrated_dissipation(limit_run);
    for (const RunLedger& led : bl_runs) {
        rep.dissipation_eps.push_back(integrated_dissipation(led));
        rep.margins.push_back(rep.dissipation_eps.back() -
                              rep.limit_dissipation);
    }
    return rep;
}

} // namespace layerflow
