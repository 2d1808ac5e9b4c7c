#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "e1lab/errors.hpp"
#include "e1lab/grid.hpp"

namespace e1lab {

struct EnvelopeSettings {
    double omega = 1.5;
    double tol_env_rel = 1e-12;      ///< sup-update stop, times (1 + osc f)
    std::size_t max_sweeps = 1'000'000;
    double drift_floor = 1e-6;
    int divergence_cycles = 50;
    double tol_contact_rel = 1e-8;   ///< times (1 + osc f)
    bool polish = true;              ///< exact active-set solve seeded by the sweeps
    double polish_start_rel = 1e-2;  ///< sweep update at which the first polish is tried; retried at each tenfold drop
};

/// Result of an obstacle problem. `potential` is empty for BOTTOM.
struct EnvelopeResult {
    std::optional<Potential> potential;
    std::vector<bool> contact_mask;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool polished = false;

    bool bottom() const { return !potential.has_value(); }

    const Potential& value() const {
        if (!potential) throw DomainError("envelope is BOTTOM (infeasible pole demand)");
        return *potential;
    }
};

namespace detail {

/// Exact solution of the complementarity system for a given contact set:
/// w = f on the set, theta' + L(w) = 0 on the free arcs between contacts.
inline std::vector<double> solve_on_contact_set(std::span<const double> theta_red, std::span<const double> f,
                                                const std::vector<std::size_t>& contacts) {
    const std::size_t n = f.size();
    const double h2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    std::vector<double> w(n);
    for (std::size_t k : contacts) w[k] = f[k];
    for (std::size_t j = 0; j < contacts.size(); ++j) {
        const std::size_t a = contacts[j];
        const std::size_t b = (j + 1 < contacts.size()) ? contacts[j + 1] : contacts[0] + n;
        if (b <= a + 1) continue;
        const std::size_t m = b - a - 1;
        std::vector<double> r(m), out(m);
        for (std::size_t q = 0; q < m; ++q) r[q] = -h2 * theta_red[(a + 1 + q) % n];
        dirichlet_second_difference(r, f[a], f[b % n], out);
        for (std::size_t q = 0; q < m; ++q) w[(a + 1 + q) % n] = out[q];
    }
    return w;
}

/// Primal-dual active-set iteration started from the sweep iterate. Returns
/// an empty vector if it does not settle on a consistent contact set.
inline std::vector<double> active_set_polish(std::span<const double> theta_red, std::span<const double> f,
                                             std::span<const double> start, double tol_pos) {
    const std::size_t n = f.size();
    const double c = static_cast<double>(n) * static_cast<double>(n);
    std::vector<bool> active(n);
    {
        // Initial guess: nodes where the sweep iterate rests on the obstacle
        // to within the resolution of its own updates.
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double gap = start[i] - f[i];
            if (gap > best) {
                best = gap;
                arg = i;
            }
            const double mu = theta_red[i] + laplacian_at(start, i);
            active[i] = mu + c * gap > 0.0;
        }
        active[arg] = true;
    }
    const double gap_tol = 1e-12 * (1.0 + oscillation(f));
    for (int iter = 0; iter < 64; ++iter) {
        std::vector<std::size_t> contacts;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) contacts.push_back(i);
        if (contacts.empty()) return {};
        auto w = solve_on_contact_set(theta_red, f, contacts);
        // Free nodes satisfy the equation by construction, so feasibility
        // (w <= f, theta_red + L(w) >= 0) certifies the complementarity solution.
        // Degenerate nodes (both sides zero) make the set itself ambiguous.
        double worst_mu = 0.0;
        double worst_gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            worst_mu = std::min(worst_mu, theta_red[i] + laplacian_at(w, i));
            worst_gap = std::max(worst_gap, w[i] - f[i]);
        }
        if (worst_mu >= -tol_pos && worst_gap <= gap_tol) return w;
        std::vector<bool> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = active[i] ? theta_red[i] + laplacian_at(w, i) : 0.0;
            next[i] = mu + c * (w[i] - f[i]) > 0.0;
        }
        if (next == active) return {};
        active = std::move(next);
    }
    return {};
}

}  // namespace detail

/// Largest theta-subharmonic potential below the obstacle.
///
/// Poles are handled by reduction: with c the obstacle's pole masses, the
/// result is g + sum c_p G_p where g is the largest solution of
/// g <= f - sum c_p G_p, theta - sum c_p + L(g) >= 0 at every node.
inline EnvelopeResult envelope_below(const Form& theta, const Obstacle& f, const EnvelopeSettings& s = {}) {
    const std::size_t n = theta.size();
    if (f.size() != n) throw DomainError("envelope_below: size mismatch");
    const double cap = f.total_pole_mass();
    const double h2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));

    std::vector<double> theta_red(n);
    for (std::size_t i = 0; i < n; ++i) theta_red[i] = theta[i] - cap;
    const auto fr = f.regular();
    const double osc = oscillation(fr);
    const double tol_env = s.tol_env_rel * (1.0 + osc);
    const double tol_contact = s.tol_contact_rel * (1.0 + osc);

    EnvelopeResult res;
    // Negative reduced mass: the cone is empty. No sweeps needed to know it.
    if (cap > theta.mass() + 1e-12) return res;

    std::vector<double> w(fr.begin(), fr.end());
    double last_gap = 0.0;
    int drift_cycles = 0;
    bool converged = false;
    double polish_at = s.polish_start_rel * (1.0 + osc);
    for (std::size_t sweep = 1; sweep <= s.max_sweeps; ++sweep) {
        double update = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double left = w[(i + n - 1) % n];
            const double right = w[(i + 1) % n];
            const double gs = 0.5 * (left + right + h2 * theta_red[i]);
            const double next = std::min(fr[i], w[i] + s.omega * (gs - w[i]));
            update = std::max(update, std::abs(next - w[i]));
            w[i] = next;
        }
        res.iterations = sweep;
        res.residual = update;
        if (update < tol_env) {
            converged = true;
            break;
        }
        // Once the contact set has settled the exact solve finishes the job.
        if (s.polish && update < polish_at) {
            polish_at = update * 0.1;
            auto exact = detail::active_set_polish(theta_red, fr, w, theta.tol_pos());
            if (!exact.empty()) {
                w = std::move(exact);
                res.polished = true;
                converged = true;
                break;
            }
        }
        if (sweep % n == 0) {
            double gap = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, w[i] - fr[i]);
            drift_cycles = (last_gap - gap > s.drift_floor) ? drift_cycles + 1 : 0;
            last_gap = gap;
            if (drift_cycles >= s.divergence_cycles) return res;
        }
    }
    if (!converged)
        throw NumericalError("envelope_below: iteration cap reached", res.residual);

    if (s.polish && !res.polished) {
        auto exact = detail::active_set_polish(theta_red, fr, w, theta.tol_pos());
        if (!exact.empty()) {
            w = std::move(exact);
            res.polished = true;
        }
    }
    res.contact_mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.contact_mask[i] = w[i] >= fr[i] - tol_contact;
    res.potential = Potential(std::move(w), f.poles());
    return res;
}

/// V_theta = P(0), computed once per Form and shared by its copies.
inline Potential v_theta(const Form& theta) {
    auto& cache = theta.cache();
    std::call_once(cache.once, [&] {
        auto r = envelope_below(theta, Obstacle(std::vector<double>(theta.size(), 0.0)));
        auto reg = r.value().regular();
        cache.v_theta.assign(reg.begin(), reg.end());
    });
    return Potential(cache.v_theta);
}

/// P(u, v).
inline EnvelopeResult rooftop(const Form& theta, const Potential& u, const Potential& v,
                              const EnvelopeSettings& s = {}) {
    return envelope_below(theta, min_obstacle(u, v), s);
}

/// P(u_1, ..., u_k).
inline EnvelopeResult multi_rooftop(const Form& theta, std::span<const Potential> items,
                                    const EnvelopeSettings& s = {}) {
    return envelope_below(theta, min_obstacle(items), s);
}

/// P[psi](phi): the limit of P(psi + C, phi) over C = 1, 2, 4, ...
inline Potential envelope_singularity(const Form& theta, const Potential& psi, const Potential& phi,
                                      const EnvelopeSettings& s = {}) {
    if (phi.has_poles()) throw DomainError("envelope_singularity: phi must be pole-free");
    std::optional<Potential> prev;
    for (double c = 1.0; c <= 1048576.0; c *= 2.0) {
        auto r = rooftop(theta, psi + c, phi, s);
        const Potential& cur = r.value();
        if (prev) {
            double diff = 0.0;
            const auto a = cur.regular();
            const auto b = prev->regular();
            for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
            if (diff < s.tol_env_rel * (1.0 + oscillation(phi.regular()))) return cur;
        }
        prev = cur;
    }
    throw NumericalError("envelope_singularity diverged");
}

/// max(u, V_theta - C) as a pole-free potential.
inline Potential truncate(const Form& theta, const Potential& u, double c) {
    if (c < 0.0) throw DomainError("truncate: C must be >= 0");
    const Potential vt = v_theta(theta);
    const auto v = vt.regular();
    auto full = u.full_values();
    for (std::size_t i = 0; i < full.size(); ++i) full[i] = std::max(full[i], v[i] - c);
    return Potential(std::move(full));
}

}  // namespace e1lab
