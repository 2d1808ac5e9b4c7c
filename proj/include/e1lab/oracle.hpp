#pragma once

// Brute-force reference solvers for small grids. They share no code with the
// production solvers beyond the data types.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "e1lab/errors.hpp"
#include "e1lab/grid.hpp"

namespace e1lab::oracle {

/// Gaussian elimination with partial pivoting on a dense row-major system.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw DomainError("dense_solve: shape mismatch");
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        if (std::abs(a[piv * n + c]) < 1e-300) throw NumericalError("dense_solve: singular matrix");
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
        x[r] = s / a[r * n + r];
    }
    return x;
}

/// Green vector by a dense solve of L(G) = e_p / h - 1 with G_p pinned, then
/// shifted to max 0.
inline std::vector<double> green_function(std::size_t n, std::size_t p) {
    const double c = static_cast<double>(n) * static_cast<double>(n);
    std::vector<double> a(n * n, 0.0), b(n, -1.0);
    b[p] += static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + (i + n - 1) % n] += c;
        a[i * n + i] -= 2.0 * c;
        a[i * n + (i + 1) % n] += c;
    }
    // The system has a one-dimensional kernel; replace row p by G_p = 0.
    for (std::size_t k = 0; k < n; ++k) a[p * n + k] = 0.0;
    a[p * n + p] = 1.0;
    b[p] = 0.0;
    auto g = dense_solve(std::move(a), std::move(b));
    double mx = g[0];
    for (double x : g) mx = std::max(mx, x);
    for (double& x : g) x -= mx;
    return g;
}

/// Solution of L(g) = rhs (mean zero) with max g = 0, by dense solve.
inline std::vector<double> poisson(std::span<const double> rhs) {
    const std::size_t n = rhs.size();
    const double c = static_cast<double>(n) * static_cast<double>(n);
    std::vector<double> a(n * n, 0.0), b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + (i + n - 1) % n] += c;
        a[i * n + i] -= 2.0 * c;
        a[i * n + (i + 1) % n] += c;
    }
    for (std::size_t k = 0; k < n; ++k) a[k] = 0.0;
    a[0] = 1.0;
    b[0] = 0.0;
    auto g = dense_solve(std::move(a), std::move(b));
    double mx = g[0];
    for (double x : g) mx = std::max(mx, x);
    for (double& x : g) x -= mx;
    return g;
}

/// Largest w with w <= f and dens + L(w) >= 0, by enumerating all nonempty
/// contact sets (n <= 16). Each candidate solves w = f on the set and
/// dens + L(w) = 0 elsewhere as one dense system; the pointwise maximum of the
/// feasible candidates is returned. Empty if no candidate is feasible.
inline std::optional<std::vector<double>> envelope(std::span<const double> dens, std::span<const double> f,
                                                   double tol = 1e-11) {
    const std::size_t n = f.size();
    if (n > 16) throw DomainError("oracle::envelope: grid too large for enumeration");
    const double c = static_cast<double>(n) * static_cast<double>(n);
    std::optional<std::vector<double>> best;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<double> a(n * n, 0.0), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                a[i * n + i] = 1.0;
                b[i] = f[i];
            } else {
                a[i * n + (i + n - 1) % n] += c;
                a[i * n + i] -= 2.0 * c;
                a[i * n + (i + 1) % n] += c;
                b[i] = -dens[i];
            }
        }
        std::vector<double> w;
        try {
            w = dense_solve(std::move(a), std::move(b));
        } catch (const NumericalError&) {
            continue;
        }
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            const double lw = c * (w[(i + n - 1) % n] - 2.0 * w[i] + w[(i + 1) % n]);
            ok = w[i] <= f[i] + tol && dens[i] + lw >= -tol * c;
        }
        if (!ok) continue;
        if (!best) {
            best = std::move(w);
        } else {
            for (std::size_t i = 0; i < n; ++i) (*best)[i] = std::max((*best)[i], w[i]);
        }
    }
    return best;
}

/// Envelope of an obstacle with poles, through the same reduction used by
/// the production solver: theta - sum c and f - sum c G on the regular part.
inline std::optional<Potential> envelope(const Form& theta, const Obstacle& f) {
    const std::size_t n = theta.size();
    double cap = f.total_pole_mass();
    std::vector<double> dens(n), reg(f.finite_values().begin(), f.finite_values().end());
    for (std::size_t i = 0; i < n; ++i) dens[i] = theta[i] - cap;
    for (const auto& p : f.poles()) {
        const auto g = green_function(n, p.node);
        for (std::size_t i = 0; i < n; ++i) reg[i] -= p.mass * g[i];
    }
    auto w = envelope(dens, reg);
    if (!w) return std::nullopt;
    return Potential(std::move(*w), f.poles());
}

}  // namespace e1lab::oracle
