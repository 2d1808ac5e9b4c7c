#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "e1lab/envelope.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/geodesic.hpp"
#include "e1lab/grid.hpp"
#include "e1lab/parallel.hpp"

namespace e1lab {

/// Uniform grid of `count` points on [lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw DomainError("uniform_grid: need count >= 2 and hi > lo");
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k)
        g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    return g;
}

/// tau-indexed family of potentials; an empty entry is the bottom element.
struct TestCurve {
    std::vector<double> tau;
    std::vector<std::optional<Potential>> entries;
    Potential base;
    double tau_minus = 0.0;
    double tau_plus = 0.0;
    double c_psi = 0.0;
    /// Set by hat_transform where the infimum over t was reached at the horizon.
    std::vector<bool> horizon_flags;

    std::size_t size() const { return tau.size(); }
    bool finite(std::size_t k) const { return entries[k].has_value(); }

    /// Index of the largest finite tau; throws if every entry is bottom.
    std::size_t top_index() const {
        for (std::size_t k = entries.size(); k-- > 0;)
            if (entries[k]) return k;
        throw DomainError("TestCurve: every entry is bottom");
    }

    double spacing() const { return tau.size() > 1 ? tau[1] - tau[0] : 0.0; }
};

struct CurveCheck {
    double concavity_violation = 0.0;     ///< max of (mean of neighbours) - entry
    double monotonicity_violation = 0.0;  ///< max of entry(k+1) - entry(k)
    double base_violation = 0.0;          ///< max |entry - base| for tau <= tau_minus
    bool bottom_above_plus = true;        ///< entries bottom for tau > tau_plus
};

/// Grid tau-concavity and monotonicity, measured on full values.
inline CurveCheck check_curve(const TestCurve& c) {
    CurveCheck r;
    std::vector<std::vector<double>> full(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c.entries[k]) full[k] = c.entries[k]->full_values();
    const auto base = c.base.full_values();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!c.entries[k]) continue;
        const auto& f = full[k];
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (k + 1 < c.size() && c.entries[k + 1])
                r.monotonicity_violation = std::max(r.monotonicity_violation, full[k + 1][i] - f[i]);
            if (k > 0 && k + 1 < c.size() && c.entries[k - 1] && c.entries[k + 1])
                r.concavity_violation =
                    std::max(r.concavity_violation, 0.5 * (full[k - 1][i] + full[k + 1][i]) - f[i]);
            if (c.tau[k] <= c.tau_minus) r.base_violation = std::max(r.base_violation, std::abs(f[i] - base[i]));
        }
        if (c.tau[k] > c.tau_plus + 1e-12) r.bottom_above_plus = false;
    }
    return r;
}

/// psi_tau = P(V_theta, lambda(tau) G_p), lambda(tau) = s max(0, tau - tau_minus);
/// bottom once lambda > 1. The tau grid spans [tau_minus - 0.1, tau_plus + 0.1].
inline TestCurve preset_pole_curve(const Form& theta, std::size_t p, double tau_minus, double s, std::size_t m = 101) {
    if (!(s > 0.0)) throw DomainError("preset_pole_curve: slope must be positive");
    if (p >= theta.size()) throw DomainError("preset_pole_curve: pole node out of range");
    TestCurve c;
    c.base = v_theta(theta);
    c.tau_minus = tau_minus;
    c.tau_plus = tau_minus + 1.0 / s;
    c.c_psi = std::max({0.0, -tau_minus, c.tau_plus});
    c.tau = uniform_grid(tau_minus - 0.1, c.tau_plus + 0.1, m);
    c.entries.resize(m);
    const auto green = green_function(theta.grid(), p);
    parallel_for(m, [&](std::size_t k) {
        const double lambda = s * std::max(0.0, c.tau[k] - tau_minus);
        if (lambda > 1.0 + 1e-12) return;
        if (lambda == 0.0) {
            c.entries[k] = c.base;
            return;
        }
        const Potential pole(std::vector<double>(theta.size(), 0.0), {{p, std::min(lambda, 1.0)}});
        c.entries[k] = rooftop(theta, c.base, pole).value();
    });
    c.horizon_flags.assign(m, false);
    return c;
}

/// On a finite tau grid the only possible defect is a top entry that rises above
/// its left neighbour; it is replaced by that neighbour. Valid curves are unchanged.
inline TestCurve usc_regularize(const TestCurve& curve) {
    TestCurve out = curve;
    const std::size_t k = curve.top_index();
    if (k == 0 || !curve.entries[k - 1]) return out;
    const auto top = curve.entries[k]->full_values();
    const auto left = curve.entries[k - 1]->full_values();
    for (std::size_t i = 0; i < top.size(); ++i) {
        if (top[i] > left[i]) {
            out.entries[k] = curve.entries[k - 1];
            break;
        }
    }
    return out;
}

/// Entries replaced by P[psi_tau](phi).
inline TestCurve maximize_curve(const Form& theta, const TestCurve& curve) {
    TestCurve out = curve;
    parallel_for(curve.size(), [&](std::size_t k) {
        if (curve.entries[k]) out.entries[k] = envelope_singularity(theta, *curve.entries[k], curve.base);
    });
    return usc_regularize(out);
}

/// max over finite tau of sup |P[entry](phi) - entry| (regular parts).
inline double maximality_defect(const Form& theta, const TestCurve& curve) {
    std::vector<double> per(curve.size(), 0.0);
    parallel_for(curve.size(), [&](std::size_t k) {
        if (!curve.entries[k]) return;
        const auto again = envelope_singularity(theta, *curve.entries[k], curve.base);
        const auto a = again.regular();
        const auto b = curve.entries[k]->regular();
        double d = again.same_singularity_type(*curve.entries[k], 1e-15) ? 0.0 : 1.0;
        for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
        per[k] = d;
    });
    return *std::max_element(per.begin(), per.end());
}

struct Ray {
    std::vector<double> t;
    std::vector<Potential> slices;
    Potential origin;
    /// argmax[k][i]: index of the smallest tau attaining the max at (t_k, x_i).
    std::vector<std::vector<std::size_t>> argmax;

    std::size_t size() const { return t.size(); }

    /// Slices 0..last as a field on [0, t[last]].
    SpacetimeField restriction(std::size_t last) const {
        if (last == 0 || last >= t.size()) throw DomainError("Ray::restriction: bad slice index");
        SpacetimeField f(t[last] - t[0], last + 1, origin.size());
        for (std::size_t k = 0; k <= last; ++k) {
            const auto v = slices[k].regular();
            for (std::size_t i = 0; i < v.size(); ++i) f.at(k, i) = v[i];
        }
        return f;
    }
};

/// slice(t) = max over finite tau_k of entry(tau_k) + t tau_k.
inline Ray inverse_legendre(const TestCurve& curve, const std::vector<double>& t_grid) {
    std::vector<std::size_t> finite;
    for (std::size_t k = 0; k < curve.size(); ++k)
        if (curve.entries[k]) finite.push_back(k);
    if (finite.empty()) throw DomainError("inverse_legendre: every entry is bottom");
    std::vector<std::vector<double>> full;
    std::vector<Pole> poles = curve.entries[finite[0]]->poles();
    for (std::size_t k : finite) {
        full.push_back(curve.entries[k]->full_values());
        poles = merge_poles(poles, curve.entries[k]->poles(), [](double a, double b) { return std::min(a, b); });
    }
    Ray ray;
    ray.t = t_grid;
    ray.origin = curve.base;
    const std::size_t n = curve.base.size();
    ray.slices.resize(t_grid.size());
    ray.argmax.assign(t_grid.size(), std::vector<std::size_t>(n, 0));
    for (std::size_t q = 0; q < t_grid.size(); ++q) {
        const double t = t_grid[q];
        std::vector<double> best(n, kNegInf);
        for (std::size_t j = 0; j < finite.size(); ++j) {
            const double shift = t * curve.tau[finite[j]];
            for (std::size_t i = 0; i < n; ++i) {
                const double v = full[j][i] + shift;
                if (v > best[i]) {
                    best[i] = v;
                    ray.argmax[q][i] = finite[j];
                }
            }
        }
        ray.slices[q] = Potential::from_full_values(best, poles);
    }
    return ray;
}

/// entry(tau) = min over the t grid of slice(t) - t tau.
///
/// With tau_top the largest final slope of the ray, a minimum reached at the
/// horizon marks the entry as bottom when tau > tau_top, is the plateau value
/// when tau = tau_top, and means the horizon is too short when tau < tau_top.
inline TestCurve hat_transform(const Ray& ray, const std::vector<double>& tau_grid, double tol = 1e-9) {
    if (ray.size() < 2) throw DomainError("hat_transform: ray needs at least two slices");
    const std::size_t n = ray.origin.size();
    const std::size_t last = ray.size() - 1;
    std::vector<std::vector<double>> full;
    for (const auto& s : ray.slices) full.push_back(s.full_values());
    double tau_top = kNegInf;
    const double dt = ray.t[last] - ray.t[last - 1];
    for (std::size_t i = 0; i < n; ++i) tau_top = std::max(tau_top, (full[last][i] - full[last - 1][i]) / dt);

    TestCurve c;
    c.tau = tau_grid;
    c.base = ray.origin;
    c.entries.resize(tau_grid.size());
    c.horizon_flags.assign(tau_grid.size(), false);
    c.tau_minus = tau_grid.front();
    c.tau_plus = tau_grid.back();
    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
        const double tau = tau_grid[j];
        std::vector<double> best(n, std::numeric_limits<double>::infinity());
        std::vector<std::size_t> arg(n, 0);
        for (std::size_t q = 0; q <= last; ++q) {
            for (std::size_t i = 0; i < n; ++i) {
                const double v = full[q][i] - ray.t[q] * tau;
                if (v < best[i]) {
                    best[i] = v;
                    arg[i] = q;
                }
            }
        }
        const bool at_horizon = std::any_of(arg.begin(), arg.end(), [&](std::size_t q) { return q == last; });
        if (at_horizon) {
            c.horizon_flags[j] = true;
            if (tau > tau_top + tol) continue;
            if (tau < tau_top - tol) throw NumericalError("hat_transform: T too small");
        }
        c.entries[j] = Potential(std::move(best));
    }
    // tau_minus: largest tau whose entry equals the base; tau_plus: largest finite tau.
    const auto base = ray.origin.full_values();
    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
        if (!c.entries[j]) continue;
        c.tau_plus = tau_grid[j];
        const auto f = c.entries[j]->regular();
        bool same = true;
        for (std::size_t i = 0; i < n && same; ++i) same = std::abs(f[i] - base[i]) <= 1e-12 * (1.0 + std::abs(base[i]));
        if (same) c.tau_minus = tau_grid[j];
    }
    c.c_psi = std::max({0.0, -c.tau_minus, c.tau_plus});
    return c;
}

/// Horizon after which every node's maximum sits on the top finite entry.
inline double minimal_horizon(const TestCurve& curve) {
    const std::size_t k = curve.top_index();
    if (k == 0 || !curve.entries[k - 1]) return 0.0;
    const auto a = curve.entries[k - 1]->full_values();
    const auto b = curve.entries[k]->full_values();
    const double h = curve.tau[k] - curve.tau[k - 1];
    double t = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) t = std::max(t, (a[i] - b[i]) / h);
    return t;
}

/// Weak geodesic ray sup_tau (P[psi_tau](phi) + t tau).
inline Ray construct_ray(const Form& theta, const TestCurve& curve, const std::vector<double>& t_grid) {
    return inverse_legendre(maximize_curve(theta, curve), t_grid);
}

/// Ray built from the capped entries P(psi_tau + C, phi); increases to the
/// constructed ray as C grows.
inline Ray capped_ray(const Form& theta, const TestCurve& curve, double cap, const std::vector<double>& t_grid) {
    TestCurve capped = curve;
    parallel_for(curve.size(), [&](std::size_t k) {
        if (curve.entries[k]) capped.entries[k] = rooftop(theta, *curve.entries[k] + cap, curve.base).value();
    });
    return inverse_legendre(capped, t_grid);
}

}  // namespace e1lab
