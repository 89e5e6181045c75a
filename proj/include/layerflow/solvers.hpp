#pragma once

// Backward-Euler evolution for the boundary-layer problem
//   B du/dt + K u = 0,   (B + dt K) u^{n+1} = B u^n,
// and for the three limit problems (dynamic boundary condition, Neumann,
// Dirichlet).  1D systems are tridiagonal and solved directly; 2D systems
// are symmetric positive definite and solved by conjugate gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "operators.hpp"

namespace layerflow {

// ---------------------------------------------------------------- linear

inline std::vector<double> thomas_solve(std::vector<double> lower,
                                        std::vector<double> diag,
                                        std::vector<double> upper,
                                        std::vector<double> rhs) {
    size_t n = diag.size();
    if (lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n)
        throw std::invalid_argument("thomas: band size mismatch");
    for (size_t i = 1; i < n; ++i) {
        double w = lower[i - 1] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

inline CgResult conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply,
    const std::vector<double>& b, std::vector<double> x, double rel_tol,
    int max_iterations) {
    auto dot = [](const std::vector<double>& p, const std::vector<double>& q) {
        double s = 0.0;
        for (size_t i = 0; i < p.size(); ++i) s += p[i] * q[i];
        return s;
    };
    std::vector<double> r = apply(x);
    for (size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
    double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) bnorm = 1.0;
    std::vector<double> p = r;
    double rr = dot(r, r);
    CgResult res;
    for (int it = 0; it < max_iterations; ++it) {
        if (std::sqrt(rr) <= rel_tol * bnorm) {
            res.converged = true;
            break;
        }
        std::vector<double> ap = apply(p);
        double alpha = rr / dot(p, ap);
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = dot(r, r);
        double beta = rr_new / rr;
        rr = rr_new;
        for (size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        res.iterations = it + 1;
    }
    if (std::sqrt(rr) <= rel_tol * bnorm) res.converged = true;
    res.relative_residual = std::sqrt(rr) / bnorm;
    res.x = std::move(x);
    return res;
}

// ------------------------------------------------------------- stepping

// Solve (Bm + dt K) u = rhs where Bm is a given diagonal.  pinned marks
// Dirichlet-eliminated rows (identity row, rhs value kept).
inline std::vector<double> solve_backward_euler_system(
    const OperatorPair& op, const std::vector<double>& mass_diag, double dt,
    const std::vector<double>& rhs, const std::vector<bool>* pinned = nullptr) {
    const Grid& g = op.grid;
    auto is_pinned = [&](int n) { return pinned && (*pinned)[n]; };
    if (g.dimension == 1) {
        int M = g.cells_normal;
        std::vector<double> lo(M), di(M + 1), up(M);
        double inv_h = 1.0 / g.h();
        for (int j = 0; j <= M; ++j) {
            di[j] = mass_diag[j];
            if (j > 0) di[j] += dt * op.face_conductivity[j - 1] * inv_h;
            if (j < M) di[j] += dt * op.face_conductivity[j] * inv_h;
        }
        for (int j = 0; j < M; ++j)
            lo[j] = up[j] = -dt * op.face_conductivity[j] * inv_h;
        std::vector<double> b = rhs;
        if (pinned) {
            for (int j = 0; j <= M; ++j) {
                if (!is_pinned(j)) continue;
                di[j] = 1.0;
                if (j > 0) { up[j - 1] = 0.0; lo[j - 1] = 0.0; }
                if (j < M) { up[j] = 0.0; lo[j] = 0.0; }
            }
        }
        return thomas_solve(lo, di, up, b);
    }
    auto apply = [&](const std::vector<double>& v) {
        std::vector<double> masked = v;
        if (pinned)
            for (size_t n = 0; n < masked.size(); ++n)
                if ((*pinned)[n]) masked[n] = 0.0;
        std::vector<double> r = op.apply_stiffness(masked);
        for (size_t n = 0; n < r.size(); ++n) {
            if (is_pinned(static_cast<int>(n)))
                r[n] = v[n];
            else
                r[n] = mass_diag[n] * v[n] + dt * r[n];
        }
        return r;
    };
    CgResult cg = conjugate_gradient(apply, rhs, rhs, 1e-12,
                                     40 * static_cast<int>(rhs.size()));
    if (!cg.converged)
        throw std::runtime_error("backward euler: CG stalled, residual " +
                                 std::to_string(cg.relative_residual));
    return cg.x;
}

// ----------------------------------------------------------------- runs

struct StepRecord {
    double time = 0.0;
    double energy = 0.0;           // E = (1/2) <K u, u>
    double mass_norm_sq = 0.0;     // <B u, u>
    double dissipation = 0.0;      // I = <K u, B^{-1} K u>
    double edb_residual = 0.0;     // energy-dissipation balance defect
};

struct RunLedger {
    Grid grid;
    double dt = 0.0;
    std::vector<StepRecord> steps;              // index n -> time n*dt
    std::vector<BoundaryValues> boundary_path;  // m_eps u (layer runs) or
                                                // gamma u / w (limit runs)
    std::vector<std::pair<double, Field>> snapshots;
    Field final_field;
};

namespace detail {

inline double dot(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) s += p[i] * q[i];
    return s;
}

} // namespace detail

// Evolve B u_t + K u = 0 by backward Euler and record the exact discrete
// energy-dissipation balance
//   E(u+) - E(u) + (1/dt) <B d, d> + (1/2) <K d, d> = 0,  d = u+ - u.
inline RunLedger run_boundary_layer(const OperatorPair& op, const Field& u0,
                                    double dt, double horizon,
                                    const std::vector<double>& snapshot_times = {}) {
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("run: dt and horizon must be positive");
    int steps = static_cast<int>(std::lround(horizon / dt));
    if (std::abs(steps * dt - horizon) > 1e-9 * horizon)
        throw std::invalid_argument("run: horizon must be a multiple of dt");

    RunLedger led;
    led.grid = op.grid;
    led.dt = dt;
    Field u = u0;

    auto record = [&](double t, const std::vector<double>& v, double edb) {
        StepRecord r;
        r.time = t;
        r.energy = op.energy(v);
        r.mass_norm_sq = op.mass_norm_sq(v);
        r.dissipation = op.dissipation(v);
        r.edb_residual = edb;
        led.steps.push_back(r);
        if (op.layer.layer_cells > 0)
            led.boundary_path.push_back(layer_average(op, u));
        else
            led.boundary_path.push_back(boundary_trace(u));
    };
    auto want_snapshot = [&](double t) {
        for (double s : snapshot_times)
            if (std::abs(s - t) <= 1e-9 * std::max(1.0, horizon)) return true;
        return false;
    };

    record(0.0, u.values, 0.0);
    if (want_snapshot(0.0)) led.snapshots.emplace_back(0.0, u);

    for (int n = 1; n <= steps; ++n) {
        std::vector<double> rhs(u.size());
        for (int i = 0; i < u.size(); ++i) rhs[i] = op.mass[i] * u[i];
        std::vector<double> next =
            solve_backward_euler_system(op, op.mass, dt, rhs);

        std::vector<double> delta(next.size());
        for (size_t i = 0; i < next.size(); ++i) delta[i] = next[i] - u.values[i];
        std::vector<double> kd = op.apply_stiffness(delta);
        double bd = 0.0;
        for (size_t i = 0; i < delta.size(); ++i)
            bd += op.mass[i] * delta[i] * delta[i];
        double e_old = op.energy(u.values);
        u.values = next;
        double edb = op.energy(u.values) - e_old + bd / dt +
                     0.5 * detail::dot(kd, delta);

        record(n * dt, u.values, edb);
        if (want_snapshot(n * dt)) led.snapshots.emplace_back(n * dt, u);
    }
    led.final_field = u;
    return led;
}

// Global energy equality along the discrete path:
//   (1/2)<B u_T, u_T> + 2 sum dt E(u^{n+1}) - (1/2)<B u_0, u_0>
// equals -(1/2) sum <B d, d>, an O(dt) defect.  Returns the left side.
inline double energy_equality_residual(const RunLedger& led) {
    double acc = 0.5 * led.steps.back().mass_norm_sq -
                 0.5 * led.steps.front().mass_norm_sq;
    for (size_t n = 1; n < led.steps.size(); ++n)
        acc += 2.0 * led.dt * led.steps[n].energy;
    return acc;
}

// ------------------------------------------------------- limit problems

enum class LimitKind { dynamic, neumann, dirichlet };

// Well-prepared initial data: u0 in the bulk, the boundary datum w0
// painted across the layer (so the layer average starts at w0).
inline Field well_prepared_data(const OperatorPair& op, const Field& u0,
                                const BoundaryValues& w0) {
    const Grid& g = op.grid;
    Field v = u0;
    int k = op.layer.layer_cells, M = g.cells_normal;
    for (int i = 0; i < g.cells_periodic; ++i) {
        for (int j = 0; j < k; ++j) {
            v[g.node(j, i)] = w0.bottom[i];
            v[g.node(M - j, i)] = w0.top[i];
        }
    }
    return v;
}

// Evolve the limit problem with unit coefficients on the same grid.
//  dynamic:   u_t = Lap u, with kappa w_t + du/dnu = 0, w = trace u,
//             realised by adding kappa to the boundary rows of the mass.
//  neumann:   plain homogeneous Neumann heat flow.
//  dirichlet: boundary rows pinned to zero.
inline RunLedger run_limit(const Grid& g, LimitKind kind, double kappa,
                           const Field& u0, double dt, double horizon,
                           const std::vector<double>& snapshot_times = {}) {
    if (kind == LimitKind::dynamic && (!(kappa > 0.0) || !std::isfinite(kappa)))
        throw std::invalid_argument("limit: dynamic problem needs finite kappa > 0");
    OperatorPair op = assemble_unit_operators(g);

    std::vector<double> mass_diag = op.weight;
    std::optional<std::vector<bool>> pinned;
    if (kind == LimitKind::dynamic) {
        double bw = g.boundary_weight();
        for (int n = 0; n < g.node_count(); ++n)
            if (g.on_boundary(n)) mass_diag[n] += kappa * bw;
    } else if (kind == LimitKind::dirichlet) {
        pinned.emplace(g.node_count(), false);
        for (int n = 0; n < g.node_count(); ++n)
            if (g.on_boundary(n)) (*pinned)[n] = true;
    }

    int steps = static_cast<int>(std::lround(horizon / dt));
    if (std::abs(steps * dt - horizon) > 1e-9 * horizon)
        throw std::invalid_argument("run: horizon must be a multiple of dt");

    RunLedger led;
    led.grid = g;
    led.dt = dt;
    Field u = u0;
    if (kind == LimitKind::dirichlet)
        for (int n = 0; n < g.node_count(); ++n)
            if (g.on_boundary(n)) u[n] = 0.0;

    auto coupled_mass = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t n = 0; n < v.size(); ++n) s += mass_diag[n] * v[n] * v[n];
        return s;
    };
    // Limit-side dissipation: \int |Lap u|^2 over interior nodes plus, for
    // the dynamic kind, (1/kappa) \int_boundary |du/dnu|^2 (second-order
    // one-sided normal derivative).
    auto limit_dissipation = [&](const std::vector<double>& v) {
        if (kind == LimitKind::dirichlet) return 0.0;
        std::vector<double> kv = op.apply_stiffness(v);
        double s = 0.0;
        for (int n = 0; n < g.node_count(); ++n)
            if (!g.on_boundary(n)) s += kv[n] * kv[n] / op.weight[n];
        if (kind == LimitKind::dynamic) {
            int M = g.cells_normal;
            double h = g.h(), bw = g.boundary_weight(), flux = 0.0;
            for (int i = 0; i < g.cells_periodic; ++i) {
                double db = (-3.0 * v[g.node(0, i)] + 4.0 * v[g.node(1, i)] -
                             v[g.node(2, i)]) / (2.0 * h);
                double dt_ = (-3.0 * v[g.node(M, i)] + 4.0 * v[g.node(M - 1, i)] -
                              v[g.node(M - 2, i)]) / (2.0 * h);
                flux += bw * (db * db + dt_ * dt_);
            }
            s += flux / kappa;
        }
        return s;
    };
    auto record = [&](double t, double edb) {
        StepRecord r;
        r.time = t;
        r.energy = op.energy(u.values);
        r.mass_norm_sq = coupled_mass(u.values);
        r.dissipation = limit_dissipation(u.values);
        r.edb_residual = edb;
        led.steps.push_back(r);
        led.boundary_path.push_back(boundary_trace(u));
    };
    auto want_snapshot = [&](double t) {
        for (double s : snapshot_times)
            if (std::abs(s - t) <= 1e-9 * std::max(1.0, horizon)) return true;
        return false;
    };

    record(0.0, 0.0);
    if (want_snapshot(0.0)) led.snapshots.emplace_back(0.0, u);

    for (int n = 1; n <= steps; ++n) {
        std::vector<double> rhs(u.size());
        for (int i = 0; i < u.size(); ++i) rhs[i] = mass_diag[i] * u[i];
        if (pinned)
            for (int i = 0; i < u.size(); ++i)
                if ((*pinned)[i]) rhs[i] = 0.0;
        std::vector<double> next = solve_backward_euler_system(
            op, mass_diag, dt, rhs, pinned ? &*pinned : nullptr);

        std::vector<double> delta(next.size());
        for (size_t i = 0; i < next.size(); ++i) delta[i] = next[i] - u.values[i];
        std::vector<double> kd = op.apply_stiffness(delta);
        double bd = 0.0;
        for (size_t i = 0; i < delta.size(); ++i)
            bd += mass_diag[i] * delta[i] * delta[i];
        double e_old = op.energy(u.values);
        u.values = next;
        double edb = op.energy(u.values) - e_old + bd / dt +
                     0.5 * detail::dot(kd, delta);

        record(n * dt, edb);
        if (want_snapshot(n * dt)) led.snapshots.emplace_back(n * dt, u);
    }
    led.final_field = u;
    return led;
}

// ----------------------------------------------------- eigenvalue roots

enum class ModeParity { odd, even };

namespace detail {

template <class F>
double bisect(const F& f, double lo, double hi, int iterations = 200) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (flo * f(hi) > 0.0)
        throw std::logic_error("bisect: endpoints do not bracket a root");
    for (int i = 0; i < iterations; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Eigenvalues of -v'' = lambda v on (0,1) with the dynamic boundary
// condition kappa * lambda * v = dv/dnu at both ends (from separating
// u = e^{-lambda t} v(x_N) with kappa w_t + du/dnu = 0, w = trace u).
// Modes are symmetric about x_N = 1/2:
//  odd  (v = sin(mu (x - 1/2))):  tan(mu/2) =  1 / (kappa mu)
//  even (v = cos(mu (x - 1/2))):  tan(mu/2) = -kappa mu, plus lambda = 0.
// Returns the first `count` eigenvalues lambda = mu^2 in increasing order.
inline std::vector<double> dynamic_eigenvalues(double kappa, int count,
                                               ModeParity parity) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("eigenvalues: kappa must be finite and positive");
    if (count < 1) throw std::invalid_argument("eigenvalues: count must be >= 1");
    const double pi = std::numbers::pi;
    std::vector<double> lam;
    if (parity == ModeParity::even) lam.push_back(0.0); // constant mode
    int m = 1;
    while (static_cast<int>(lam.size()) < count) {
        double lo, hi;
        std::function<double(double)> f;
        if (parity == ModeParity::odd) {
            // pole-free form: kappa mu sin(mu/2) - cos(mu/2) = 0 on
            // mu/2 in ((m-1) pi, (m-1) pi + pi/2)
            lo = 2.0 * (m - 1) * pi + 1e-12;
            hi = 2.0 * (m - 1) * pi + pi - 1e-12;
            f = [kappa](double mu) {
                return kappa * mu * std::sin(0.5 * mu) - std::cos(0.5 * mu);
            };
        } else {
            // sin(mu/2) + kappa mu cos(mu/2) = 0 on mu/2 in ((m-1/2) pi, m pi)
            lo = (2.0 * m - 1.0) * pi + 1e-12;
            hi = 2.0 * m * pi - 1e-12;
            f = [kappa](double mu) {
                return std::sin(0.5 * mu) + kappa * mu * std::cos(0.5 * mu);
            };
        }
        double mu = detail::bisect(f, lo, hi);
        lam.push_back(mu * mu);
        ++m;
    }
    lam.resize(count);
    return lam;
}

// The separated eigenmode v(x_N) for a given mu, normalized to max 1.
inline Field dynamic_eigenmode(const Grid& g, double mu, ModeParity parity) {
    return sample_field(g, [mu, parity](double x, double) {
        double s = x - 0.5;
        return parity == ModeParity::odd ? std::sin(mu * s) : std::cos(mu * s);
    });
}

} // namespace layerflow
