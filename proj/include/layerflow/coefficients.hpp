#pragma once

// Conductivity profiles a_eps(d) and capacity weights b_eps, both functions
// of the boundary distance d only, plus the non-degeneracy integral
//
//   N_p(eps) = (1/eps) \int_0^eps ( \int_s^eps dsigma / a(sigma) )^p ds
//
// whose boundedness as eps -> 0 separates profiles with a surviving boundary
// term from fully degenerate ones.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace layerflow {

enum class ProfileKind { unit, canonical, power, degenerate_cubic, tabulated };

// a_eps(d), normalized so a = 1 in the bulk (d >= eps).
struct ConductivityProfile {
    ProfileKind kind = ProfileKind::canonical;
    double alpha = 1.0; // power profile: a = min(1, d^alpha / eps^beta)
    double beta = 1.0;
    std::vector<std::pair<double, double>> table; // (d, value), d increasing

    double operator()(double d, double eps) const {
        d = std::abs(d);
        switch (kind) {
        case ProfileKind::unit:
            return 1.0;
        case ProfileKind::canonical:
            return d >= eps ? 1.0 : d / eps;
        case ProfileKind::power:
            return std::min(1.0, std::pow(d, alpha) / std::pow(eps, beta));
        case ProfileKind::degenerate_cubic:
            return std::min(1.0, d * d * d / eps);
        case ProfileKind::tabulated: {
            if (table.empty() || d < table.front().first ||
                d > table.back().first)
                throw std::out_of_range("conductivity: distance outside table");
            for (size_t i = 1; i < table.size(); ++i) {
                if (d <= table[i].first) {
                    double t = (d - table[i - 1].first) /
                               (table[i].first - table[i - 1].first);
                    return table[i - 1].second +
                           t * (table[i].second - table[i - 1].second);
                }
            }
            return table.back().second;
        }
        }
        return 1.0;
    }
};

inline ConductivityProfile make_conductivity(ProfileKind kind,
                                             double alpha = 1.0,
                                             double beta = 1.0) {
    if (kind == ProfileKind::power && (alpha <= 0.0 || beta <= 0.0))
        throw std::invalid_argument("conductivity: power profile needs alpha, beta > 0");
    ConductivityProfile p;
    p.kind = kind;
    p.alpha = alpha;
    p.beta = beta;
    return p;
}

// b_eps = 1 in the bulk, phi(eps) in the layer.  kappa = lim eps * phi(eps)
// classifies the limit problem: dynamic (0 < kappa < inf), Neumann (0),
// Dirichlet (inf).
struct CapacityProfile {
    std::function<double(double)> phi; // phi(eps)
    double kappa = 1.0;                // limit of eps * phi(eps); may be inf

    double layer_value(double eps) const { return phi(eps); }
    double operator()(double d, double eps) const {
        return std::abs(d) < eps ? phi(eps) : 1.0;
    }
};

// phi(eps) = kappa / eps, the exact scaling for a finite kappa > 0.
inline CapacityProfile capacity_from_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("capacity: kappa must be finite and positive");
    CapacityProfile c;
    c.kappa = kappa;
    c.phi = [kappa](double eps) { return kappa / eps; };
    return c;
}

// phi(eps) = eps^{-gamma}: gamma < 1 gives kappa = 0 (Neumann),
// gamma = 1 gives kappa = 1, gamma > 1 gives kappa = inf (Dirichlet).
inline CapacityProfile capacity_power(double gamma) {
    if (!(gamma >= 0.0))
        throw std::invalid_argument("capacity: power exponent must be >= 0");
    CapacityProfile c;
    if (gamma < 1.0)
        c.kappa = 0.0;
    else if (gamma == 1.0)
        c.kappa = 1.0;
    else
        c.kappa = std::numeric_limits<double>::infinity();
    c.phi = [gamma](double eps) { return std::pow(eps, -gamma); };
    return c;
}

namespace detail {

// Adaptive Simpson on [lo, hi].
template <class F>
double simpson_adapt(const F& f, double lo, double hi, double fl, double fm,
                     double fh, double whole, double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    double flm = f(lm), frm = f(rm);
    double left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
    double right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_adapt(f, lo, mid, fl, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_adapt(f, mid, hi, fm, frm, fh, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double lo, double hi, double tol = 1e-12) {
    if (hi <= lo) return 0.0;
    double fl = f(lo), fm = f(0.5 * (lo + hi)), fh = f(hi);
    double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
    return simpson_adapt(f, lo, hi, fl, fm, fh, whole, tol, 48);
}

} // namespace detail

// Inner resistance integral R(s) = \int_s^eps dsigma / a(sigma).
inline double resistance_integral(const ConductivityProfile& a, double s,
                                  double eps) {
    if (s >= eps) return 0.0;
    if (a.kind == ProfileKind::canonical) return eps * std::log(eps / s);
    if (a.kind == ProfileKind::unit) return eps - s;
    // Power-family profiles a = min(1, d^alpha / eps^beta): integrate
    // eps^beta * sigma^{-alpha} up to the crossover c where a reaches 1.
    double alpha = a.alpha, beta = a.beta;
    if (a.kind == ProfileKind::degenerate_cubic) { alpha = 3.0; beta = 1.0; }
    double c = std::min(eps, std::pow(eps, beta / alpha));
    double r = eps - std::max(s, c);
    if (s < c) {
        double scale = std::pow(eps, beta);
        if (std::abs(alpha - 1.0) < 1e-14)
            r += scale * std::log(c / s);
        else
            r += scale * (std::pow(c, 1.0 - alpha) - std::pow(s, 1.0 - alpha)) /
                 (1.0 - alpha);
    }
    return r;
}

// N_p(eps).  The integrand blows up slowly (logarithmically for the
// canonical profile) as s -> 0; substitute s = eps * exp(-t) so the outer
// integral becomes eps-free in range and smooth.
inline double nondegeneracy_integral(const ConductivityProfile& a, double eps,
                                     double p) {
    if (!(p > 0.0)) throw std::invalid_argument("nondegeneracy: p must be > 0");
    auto g = [&](double t) {
        double s = eps * std::exp(-t);
        double r = resistance_integral(a, s, eps);
        return std::exp(-t) * std::pow(r, p); // ds = -eps e^{-t} dt, outer 1/eps
    };
    // For fully degenerate profiles R(0+) = inf and the integral diverges.
    double r0 = resistance_integral(a, eps * std::exp(-40.0), eps);
    if (!std::isfinite(std::pow(r0, p)) || std::pow(r0, p) * std::exp(-35.0) > 1e3)
        return std::numeric_limits<double>::infinity();
    return detail::integrate(g, 0.0, 40.0, 1e-13);
}

inline double kappa_limit(const CapacityProfile& profile) {
    return profile.kappa;
}

// Whether N_p vanishes as eps -> 0 for the power family
// a = min(1, d^alpha / eps^beta).  For alpha < 1 + 1/p the integral is
// finite at each eps and scales like eps^{p(beta + 1 - alpha)}, so it
// decreases to 0 iff beta + 1 > alpha strictly; for alpha >= 1 + 1/p it is
// infinite.
inline bool power_profile_nondegenerate(double alpha, double beta, double p) {
    if (alpha >= 1.0 + 1.0 / p) return false; // R^p not integrable at d = 0
    return beta + 1.0 > alpha;
}

struct NondegeneracyReport {
    double p = 1.0;
    double value = 0.0;           // N_p(eps); +inf if divergent
    bool verdict_analytic = true; // power family only; true otherwise
};

inline NondegeneracyReport nondegeneracy_report(const ConductivityProfile& a,
                                                double eps, double p) {
    NondegeneracyReport rep;
    rep.p = p;
    rep.value = nondegeneracy_integral(a, eps, p);
    if (a.kind == ProfileKind::power)
        rep.verdict_analytic = power_profile_nondegenerate(a.alpha, a.beta, p);
    else if (a.kind == ProfileKind::degenerate_cubic)
        rep.verdict_analytic = power_profile_nondegenerate(3.0, 1.0, p);
    return rep;
}

} // namespace layerflow
