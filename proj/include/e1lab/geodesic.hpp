#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <span>
#include <vector>

#include "e1lab/energy.hpp"
#include "e1lab/envelope.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/grid.hpp"

namespace e1lab {

/// Grid function U(t_k, x_i) on `slices` equally spaced times covering [0, length].
class SpacetimeField {
public:
    SpacetimeField(double length, std::size_t slices, std::size_t n)
        : length_(length), slices_(slices), n_(n), values_(slices * n, 0.0) {
        if (!(length > 0.0)) throw DomainError("SpacetimeField: length must be positive");
        if (slices < 2) throw DomainError("SpacetimeField: need at least two slices");
    }

    double length() const { return length_; }
    std::size_t slices() const { return slices_; }
    std::size_t size() const { return n_; }
    double dt() const { return length_ / static_cast<double>(slices_ - 1); }
    double time(std::size_t k) const { return dt() * static_cast<double>(k); }

    double& at(std::size_t k, std::size_t i) { return values_[k * n_ + i]; }
    double at(std::size_t k, std::size_t i) const { return values_[k * n_ + i]; }

    std::span<const double> slice_values(std::size_t k) const { return {values_.data() + k * n_, n_}; }

    Potential slice(std::size_t k) const {
        const auto s = slice_values(k);
        return Potential(std::vector<double>(s.begin(), s.end()));
    }

    std::size_t sweeps = 0;
    double residual = 0.0;

private:
    double length_;
    std::size_t slices_;
    std::size_t n_;
    std::vector<double> values_;
};

struct StencilDirection {
    int a;  ///< x-step
    int b;  ///< t-step
};

/// Primitive lattice directions (a, b) with max(|a|, |b|) <= radius, one per
/// +/- pair. Radius 2 gives the eight directions
/// (1,0) (0,1) (1,1) (1,-1) (2,1) (1,2) (2,-1) (1,-2).
inline std::vector<StencilDirection> geodesic_stencil(int radius) {
    if (radius < 1) throw DomainError("geodesic_stencil: radius must be >= 1");
    std::vector<StencilDirection> out{{1, 0}, {0, 1}};
    for (int a = 1; a <= radius; ++a)
        for (int b = -radius; b <= radius; ++b)
            if (b != 0 && std::gcd(a, std::abs(b)) == 1) out.push_back({a, b});
    return out;
}

struct GeodesicSettings {
    double tol_geo_rel = 1e-10;  ///< sup-update stop, times (1 + osc of boundary data)
    std::size_t max_sweeps = 10'000;
    int stencil_radius = 2;
};

namespace detail {

/// In-place lower convex hull of the points (j, c_j), evaluated at every j.
inline void convex_minorant(std::vector<double>& c, std::vector<std::size_t>& hull) {
    hull.clear();
    for (std::size_t k = 0; k < c.size(); ++k) {
        while (hull.size() >= 2) {
            const std::size_t p = hull[hull.size() - 2];
            const std::size_t q = hull.back();
            // Drop q when it is not strictly below the chord from p to k.
            if ((c[q] - c[p]) * static_cast<double>(k - p) >= (c[k] - c[p]) * static_cast<double>(q - p))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    for (std::size_t j = 0; j + 1 < hull.size(); ++j) {
        const std::size_t p = hull[j], q = hull[j + 1];
        for (std::size_t k = p + 1; k < q; ++k) {
            const double r = static_cast<double>(k - p) / static_cast<double>(q - p);
            c[k] = (1.0 - r) * c[p] + r * c[q];
        }
    }
}

}  // namespace detail

/// Weak geodesic segment between pole-free potentials.
///
/// With Theta a discrete primitive of theta (second differences h^2 theta),
/// U + Theta must be midpoint-convex along every stencil line. Starting from
/// the t-chord, each sweep replaces U on every stencil line by the largest
/// function satisfying that line's constraint: the convex minorant for lines
/// with a t-component, the slice envelope for x-lines. Values only decrease
/// and never cross the maximal solution.
inline SpacetimeField segment_solve(const Form& theta, const Potential& phi0, const Potential& phi1, double length,
                                    std::size_t slices, const GeodesicSettings& s = {}) {
    if (phi0.has_poles() || phi1.has_poles()) throw DomainError("segment_solve: endpoints must be pole-free");
    const std::size_t n = theta.size();
    if (phi0.size() != n || phi1.size() != n) throw DomainError("segment_solve: size mismatch");
    SpacetimeField u(length, slices, n);
    const std::size_t last = slices - 1;
    const auto a = phi0.regular();
    const auto b = phi1.regular();
    for (std::size_t k = 0; k <= last; ++k) {
        const double r = static_cast<double>(k) / static_cast<double>(last);
        for (std::size_t i = 0; i < n; ++i) u.at(k, i) = (1.0 - r) * a[i] + r * b[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        u.at(0, i) = a[i];
        u.at(last, i) = b[i];
    }
    if (last < 2) return u;

    const auto dirs = geodesic_stencil(s.stencil_radius);
    const auto ni = static_cast<std::ptrdiff_t>(n);
    const auto lastk = static_cast<std::ptrdiff_t>(last);
    // Primitive on the unwrapped index range reachable by any line.
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(s.stencil_radius) * lastk + 2;
    std::vector<double> prim(static_cast<std::size_t>(ni + 2 * off), 0.0);
    {
        const double h2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        auto th = [&](std::ptrdiff_t i) { return theta[static_cast<std::size_t>(((i % ni) + ni) % ni)]; };
        auto at = [&](std::ptrdiff_t i) -> double& { return prim[static_cast<std::size_t>(off + i)]; };
        for (std::ptrdiff_t i = 1; i + 1 < ni + off; ++i) at(i + 1) = 2.0 * at(i) - at(i - 1) + h2 * th(i);
        for (std::ptrdiff_t i = 0; i - 1 >= -off; --i) at(i - 1) = 2.0 * at(i) - at(i + 1) + h2 * th(i);
    }
    auto primitive = [&](std::ptrdiff_t i) { return prim[static_cast<std::size_t>(off + i)]; };
    auto wrap = [&](std::ptrdiff_t i) { return static_cast<std::size_t>(((i % ni) + ni) % ni); };

    const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
    const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    const double tol = s.tol_geo_rel * (1.0 + hi - lo);

    std::vector<double> line, f(n);
    std::vector<std::size_t> hull;
    std::vector<std::ptrdiff_t> xs, ks;
    for (std::size_t sweep = 1; sweep <= s.max_sweeps; ++sweep) {
        double update = 0.0;
        const bool forward = sweep % 2 == 1;
        for (std::size_t di = 0; di < dirs.size(); ++di) {
            const auto d = dirs[forward ? di : dirs.size() - 1 - di];
            if (d.b == 0) {
                for (std::size_t kk = 1; kk < last; ++kk) {
                    const std::size_t k = forward ? kk : last - kk;
                    for (std::size_t i = 0; i < n; ++i) f[i] = u.at(k, i);
                    const auto env = envelope_below(theta, Obstacle(f));
                    const auto w = env.value().regular();
                    for (std::size_t i = 0; i < n; ++i) {
                        if (w[i] < u.at(k, i)) {
                            update = std::max(update, u.at(k, i) - w[i]);
                            u.at(k, i) = w[i];
                        }
                    }
                }
                continue;
            }
            const std::ptrdiff_t db = std::abs(d.b);
            const std::ptrdiff_t da = d.b > 0 ? d.a : -d.a;
            for (std::ptrdiff_t k0 = 0; k0 < db; ++k0) {
                for (std::ptrdiff_t xx = 0; xx < ni; ++xx) {
                    const std::ptrdiff_t x0 = forward ? xx : ni - 1 - xx;
                    line.clear();
                    xs.clear();
                    ks.clear();
                    for (std::ptrdiff_t k = k0, x = x0; k <= lastk; k += db, x += da) {
                        ks.push_back(k);
                        xs.push_back(x);
                        line.push_back(u.at(static_cast<std::size_t>(k), wrap(x)) + primitive(x));
                    }
                    if (line.size() < 3) continue;
                    detail::convex_minorant(line, hull);
                    for (std::size_t j = 1; j + 1 < line.size(); ++j) {
                        const auto k = static_cast<std::size_t>(ks[j]);
                        const std::size_t i = wrap(xs[j]);
                        const double next = line[j] - primitive(xs[j]);
                        if (next < u.at(k, i)) {
                            update = std::max(update, u.at(k, i) - next);
                            u.at(k, i) = next;
                        }
                    }
                }
            }
        }
        u.sweeps = sweep;
        u.residual = update;
        if (update < tol) return u;
    }
    throw NumericalError("segment_solve: sweep cap reached", u.residual);
}

/// The elementary subgeodesic max(phi0 - A t, phi1 - A (length - t)),
/// A = sup |phi0 - phi1| / length.
inline SpacetimeField elementary_subgeodesic(const Potential& phi0, const Potential& phi1, double length,
                                             std::size_t slices) {
    const std::size_t n = phi0.size();
    SpacetimeField u(length, slices, n);
    const auto a = phi0.regular();
    const auto b = phi1.regular();
    double amax = 0.0;
    for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::abs(a[i] - b[i]));
    const double slope = amax / length;
    for (std::size_t k = 0; k < slices; ++k) {
        const double t = u.time(k);
        for (std::size_t i = 0; i < n; ++i) u.at(k, i) = std::max(a[i] - slope * t, b[i] - slope * (length - t));
    }
    return u;
}

struct SpeedConstants {
    double m = 0.0;                      ///< min over pairs of the per-pair infimum
    double M = 0.0;                      ///< max over pairs of the per-pair supremum
    double spread = 0.0;                 ///< range of the per-pair infima
    std::vector<double> pair_inf, pair_sup;
};

/// Difference quotients (U_{k+1} - U_k) / dt per adjacent slice pair.
inline SpeedConstants speed_constants(const SpacetimeField& u) {
    SpeedConstants sc;
    const double dt = u.dt();
    for (std::size_t k = 0; k + 1 < u.slices(); ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double q = (u.at(k + 1, i) - u.at(k, i)) / dt;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        sc.pair_inf.push_back(lo);
        sc.pair_sup.push_back(hi);
    }
    sc.m = *std::min_element(sc.pair_inf.begin(), sc.pair_inf.end());
    sc.M = *std::max_element(sc.pair_sup.begin(), sc.pair_sup.end());
    sc.spread = *std::max_element(sc.pair_inf.begin(), sc.pair_inf.end()) - sc.m;
    return sc;
}

struct GeodesicReport {
    double d1_endpoints = 0.0;
    double metric_deviation = 0.0;        ///< max |d1(U_t, U_s) - |t-s|/l d1(U_0, U_l)|
    double energy_chord_deviation = 0.0;  ///< max |I(U_t) - chord|
    double lipschitz = 0.0;               ///< max |U_{k+1} - U_k| / dt
    double lipschitz_bound = 0.0;         ///< sup |U_0 - U_l| / l
    double t_convexity_violation = 0.0;   ///< most negative second t-difference (as a positive number)
    double sh_violation = 0.0;            ///< worst slice cone violation (as a positive number)
    double boundary_oscillation = 0.0;
    std::vector<double> slice_energy;
};

/// Metric and energy diagnostics. d1 is evaluated on all pairs of a subset of
/// at most `max_metric_slices` evenly spaced slices (always including both ends).
inline GeodesicReport verify_geodesic(const Form& theta, const SpacetimeField& u, std::size_t max_metric_slices = 17) {
    GeodesicReport rep;
    const std::size_t last = u.slices() - 1;
    const double len = u.length();
    for (std::size_t k = 0; k <= last; ++k) rep.slice_energy.push_back(energy(theta, u.slice(k)).get());
    for (std::size_t k = 0; k <= last; ++k) {
        const double r = static_cast<double>(k) / static_cast<double>(last);
        const double chord = (1.0 - r) * rep.slice_energy.front() + r * rep.slice_energy.back();
        rep.energy_chord_deviation = std::max(rep.energy_chord_deviation, std::abs(rep.slice_energy[k] - chord));
        const auto chk = theta_sh_check(theta, u.slice(k), 0.0);
        rep.sh_violation = std::max(rep.sh_violation, -chk.worst_violation);
    }
    {
        std::vector<double> both(u.slice_values(0).begin(), u.slice_values(0).end());
        both.insert(both.end(), u.slice_values(last).begin(), u.slice_values(last).end());
        rep.boundary_oscillation = oscillation(both);
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        rep.lipschitz_bound = std::max(rep.lipschitz_bound, std::abs(u.at(0, i) - u.at(last, i)) / len);
        for (std::size_t k = 0; k < last; ++k)
            rep.lipschitz = std::max(rep.lipschitz, std::abs(u.at(k + 1, i) - u.at(k, i)) / u.dt());
        for (std::size_t k = 1; k < last; ++k)
            rep.t_convexity_violation =
                std::max(rep.t_convexity_violation, -(u.at(k + 1, i) - 2.0 * u.at(k, i) + u.at(k - 1, i)));
    }
    std::vector<std::size_t> idx;
    const std::size_t count = std::min(max_metric_slices, last + 1);
    for (std::size_t j = 0; j < count; ++j) idx.push_back((j * last) / (count - 1));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    rep.d1_endpoints = d1(theta, u.slice(0), u.slice(last));
    for (std::size_t p = 0; p < idx.size(); ++p) {
        for (std::size_t q = p + 1; q < idx.size(); ++q) {
            const double dist = d1(theta, u.slice(idx[p]), u.slice(idx[q]));
            const double expect =
                static_cast<double>(idx[q] - idx[p]) / static_cast<double>(last) * rep.d1_endpoints;
            rep.metric_deviation = std::max(rep.metric_deviation, std::abs(dist - expect));
        }
    }
    return rep;
}

}  // namespace e1lab
