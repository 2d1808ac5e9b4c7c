#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "e1lab/errors.hpp"
#include "e1lab/rng.hpp"

namespace e1lab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Uniform grid on the circle R/Z with nodes x_i = i/N.
class CircleGrid {
public:
    explicit CircleGrid(std::size_t n) : n_(n) {
        if (n < 8) throw DomainError("CircleGrid: need at least 8 nodes");
    }

    std::size_t size() const { return n_; }
    double spacing() const { return 1.0 / static_cast<double>(n_); }
    double node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_); }

    std::size_t wrap(std::ptrdiff_t i) const {
        auto n = static_cast<std::ptrdiff_t>(n_);
        return static_cast<std::size_t>(((i % n) + n) % n);
    }

    bool operator==(const CircleGrid&) const = default;

private:
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// Periodic linear algebra

/// L(u)_i = (u_{i+1} - 2u_i + u_{i-1}) / h^2 with periodic indices.
inline std::vector<double> laplacian(std::span<const double> u) {
    const std::size_t n = u.size();
    const double inv_h2 = static_cast<double>(n) * static_cast<double>(n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = u[(i + n - 1) % n];
        const double right = u[(i + 1) % n];
        out[i] = (right - 2.0 * u[i] + left) * inv_h2;
    }
    return out;
}

inline double laplacian_at(std::span<const double> u, std::size_t i) {
    const std::size_t n = u.size();
    const double inv_h2 = static_cast<double>(n) * static_cast<double>(n);
    return (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) * inv_h2;
}

namespace detail {

/// Solves (u_{i+1} - 2u_i + u_{i-1}) = r_i for i in [1, m] with u_0 = left and
/// u_{m+1} = right, writing u_1..u_m into out. Thomas algorithm.
inline void dirichlet_second_difference(std::span<const double> r, double left, double right,
                                        std::span<double> out) {
    const std::size_t m = r.size();
    if (m == 0) return;
    std::vector<double> c(m), d(m);
    // Row i: u_{i-1} - 2u_i + u_{i+1} = r_i.
    double denom = -2.0;
    c[0] = 1.0 / denom;
    d[0] = (r[0] - left) / denom;
    for (std::size_t i = 1; i < m; ++i) {
        denom = -2.0 - c[i - 1];
        c[i] = 1.0 / denom;
        const double rhs = r[i] - (i + 1 == m ? right : 0.0);
        d[i] = (rhs - d[i - 1]) / denom;
    }
    if (m == 1) d[0] = (r[0] - left - right) / -2.0;
    out[m - 1] = d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
}

}  // namespace detail

/// Solves L(u) = rhs on the circle for a zero-mean right side, gauge max u = 0.
/// The node-0 value is pinned and the remaining system is a Dirichlet
/// tridiagonal solve; the node-0 equation then holds by mass balance.
inline std::vector<double> solve_periodic_poisson(std::span<const double> rhs) {
    const std::size_t n = rhs.size();
    const double h = 1.0 / static_cast<double>(n);
    double total = 0.0;
    double scale = 0.0;
    for (double r : rhs) {
        total += r;
        scale = std::max(scale, std::abs(r));
    }
    if (std::abs(total) * h > 1e-9 * (1.0 + scale)) {
        throw DomainError("solve_periodic_poisson: right side is not mean-zero");
    }
    std::vector<double> r(n - 1);
    for (std::size_t i = 1; i < n; ++i) r[i - 1] = rhs[i] * h * h;
    std::vector<double> u(n, 0.0);
    detail::dirichlet_second_difference(r, 0.0, 0.0, std::span<double>(u).subspan(1));
    const double top = *std::max_element(u.begin(), u.end());
    for (double& x : u) x -= top;
    return u;
}

inline std::vector<double> circular_shift(std::span<const double> v, std::ptrdiff_t k) {
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    std::vector<double> out(v.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(((i + k) % n + n) % n)] = v[static_cast<std::size_t>(i)];
    return out;
}

/// Green vector: L(G) = e_p/h - 1, max G = 0. Minimized at p.
inline std::vector<double> green_function(const CircleGrid& grid, std::size_t p) {
    if (p >= grid.size()) throw DomainError("green_function: node out of range");
    const std::size_t n = grid.size();
    std::vector<double> rhs(n, -1.0);
    rhs[0] += static_cast<double>(n);
    auto g0 = solve_periodic_poisson(rhs);
    return circular_shift(g0, static_cast<std::ptrdiff_t>(p));
}

// ---------------------------------------------------------------------------
// Potentials

struct Pole {
    std::size_t node;
    double mass;
    bool operator==(const Pole&) const = default;
};

/// sum_p c_p G_p.
inline std::vector<double> singular_part(std::size_t n, const std::vector<Pole>& poles) {
    std::vector<double> out(n, 0.0);
    if (poles.empty()) return out;
    const auto g0 = green_function(CircleGrid(n), 0);
    for (const auto& p : poles)
        for (std::size_t i = 0; i < n; ++i) out[i] += p.mass * g0[(i + n - p.node) % n];
    return out;
}

/// u = g + sum_p c_p G_p. `regular()` is g; poles are sorted by node with
/// strictly positive mass.
class Potential {
public:
    Potential() = default;

    explicit Potential(std::vector<double> regular, std::vector<Pole> poles = {})
        : regular_(std::move(regular)), poles_(normalize(std::move(poles), regular_.size())) {
        for (double x : regular_)
            if (!std::isfinite(x)) throw DomainError("Potential: non-finite regular value");
    }

    static Potential constant(const CircleGrid& grid, double c) {
        return Potential(std::vector<double>(grid.size(), c));
    }

    /// Builds the potential whose full values are `full` with the given poles.
    static Potential from_full_values(std::span<const double> full, std::vector<Pole> poles) {
        std::vector<double> g(full.begin(), full.end());
        const auto sing = singular_part(full.size(), poles);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= sing[i];
        return Potential(std::move(g), std::move(poles));
    }

    std::size_t size() const { return regular_.size(); }
    std::span<const double> regular() const { return regular_; }
    const std::vector<Pole>& poles() const { return poles_; }
    bool has_poles() const { return !poles_.empty(); }

    double pole_mass(std::size_t node) const {
        for (const auto& p : poles_)
            if (p.node == node) return p.mass;
        return 0.0;
    }

    double total_pole_mass() const {
        double s = 0.0;
        for (const auto& p : poles_) s += p.mass;
        return s;
    }

    /// Model values g + sum c_p G_p. Finite everywhere; pole nodes are the
    /// places where the singular part is deepest.
    std::vector<double> full_values() const {
        std::vector<double> out = regular_;
        if (poles_.empty()) return out;
        const auto sing = singular_part(size(), poles_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sing[i];
        return out;
    }

    Potential operator+(double c) const {
        Potential out = *this;
        for (double& x : out.regular_) x += c;
        return out;
    }
    Potential operator-(double c) const { return *this + (-c); }

    Potential shifted(std::ptrdiff_t k) const {
        std::vector<Pole> moved;
        const CircleGrid grid(size());
        for (const auto& p : poles_)
            moved.push_back({grid.wrap(static_cast<std::ptrdiff_t>(p.node) + k), p.mass});
        return Potential(circular_shift(regular_, k), std::move(moved));
    }

    bool same_singularity_type(const Potential& other, double tol = 0.0) const {
        if (poles_.size() != other.poles_.size()) return false;
        for (std::size_t i = 0; i < poles_.size(); ++i) {
            if (poles_[i].node != other.poles_[i].node) return false;
            if (std::abs(poles_[i].mass - other.poles_[i].mass) > tol) return false;
        }
        return true;
    }

private:
    static std::vector<Pole> normalize(std::vector<Pole> poles, std::size_t n) {
        std::vector<Pole> out;
        for (const auto& p : poles) {
            if (p.node >= n) throw DomainError("Potential: pole node out of range");
            if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) throw DomainError("Potential: pole mass must be >= 0");
            if (p.mass == 0.0) continue;
            auto it = std::find_if(out.begin(), out.end(), [&](const Pole& q) { return q.node == p.node; });
            if (it != out.end())
                it->mass += p.mass;
            else
                out.push_back(p);
        }
        std::sort(out.begin(), out.end(), [](const Pole& a, const Pole& b) { return a.node < b.node; });
        double total = 0.0;
        for (const auto& p : out) total += p.mass;
        if (total > 1.0 + 1e-12) throw DomainError("Potential: total pole mass exceeds 1");
        return out;
    }

    std::vector<double> regular_;
    std::vector<Pole> poles_;
};

/// Pole lists merged node-wise with `op` (min or max of masses; absent = 0).
template <class Op>
std::vector<Pole> merge_poles(const std::vector<Pole>& a, const std::vector<Pole>& b, Op op) {
    std::vector<Pole> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].node < b[j].node)) {
            out.push_back({a[i].node, op(a[i].mass, 0.0)});
            ++i;
        } else if (i == a.size() || b[j].node < a[i].node) {
            out.push_back({b[j].node, op(0.0, b[j].mass)});
            ++j;
        } else {
            out.push_back({a[i].node, op(a[i].mass, b[j].mass)});
            ++i;
            ++j;
        }
    }
    std::erase_if(out, [](const Pole& p) { return p.mass <= 0.0; });
    return out;
}

// ---------------------------------------------------------------------------
// Forms

namespace detail {
struct FormCache {
    std::once_flag once;
    std::vector<double> v_theta;
};
}  // namespace detail

/// Background density theta with unit mass h * sum theta_i = 1.
class Form {
public:
    Form(CircleGrid grid, std::vector<double> density) : Form(grid, std::move(density), 1.0) {
        if (std::abs(mass() - 1.0) > 1e-12) throw DomainError("Form: mass must be 1");
    }

    static Form uniform(CircleGrid grid) { return Form(grid, std::vector<double>(grid.size(), 1.0)); }

    /// theta = 1 + a cos(2 pi x), renormalized (the discrete mean of the cosine is 0).
    static Form cosine(CircleGrid grid, double a) {
        std::vector<double> d(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            d[i] = 1.0 + a * std::cos(2.0 * std::numbers::pi * grid.node(i));
        return from_samples(grid, std::move(d));
    }

    /// Rescales arbitrary samples to unit mass; the applied factor is kept.
    static Form from_samples(CircleGrid grid, std::vector<double> samples) {
        if (samples.size() != grid.size()) throw DomainError("Form: sample count mismatch");
        double m = 0.0;
        for (double x : samples) m += x;
        m *= grid.spacing();
        if (!(m > 0.0)) throw DomainError("Form: samples must have positive total mass");
        const double factor = 1.0 / m;
        for (double& x : samples) x *= factor;
        return Form(grid, std::move(samples), factor);
    }

    const CircleGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.size(); }
    std::span<const double> density() const { return *density_; }
    double operator[](std::size_t i) const { return (*density_)[i]; }
    double normalization_factor() const { return factor_; }

    double mass() const {
        double s = 0.0;
        for (double x : *density_) s += x;
        return s * grid_.spacing();
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : *density_) m = std::max(m, std::abs(x));
        return m;
    }

    /// Positivity tolerance 1e-9 (1 + max |theta|).
    double tol_pos() const { return 1e-9 * (1.0 + max_abs()); }

    Form shifted(std::ptrdiff_t k) const { return Form(grid_, circular_shift(*density_, k), factor_); }

    detail::FormCache& cache() const { return *cache_; }

private:
    Form(CircleGrid grid, std::vector<double> density, double factor)
        : grid_(grid),
          density_(std::make_shared<const std::vector<double>>(std::move(density))),
          factor_(factor),
          cache_(std::make_shared<detail::FormCache>()) {
        if (density_->size() != grid_.size()) throw DomainError("Form: density size mismatch");
    }

    CircleGrid grid_;
    std::shared_ptr<const std::vector<double>> density_;
    double factor_;
    std::shared_ptr<detail::FormCache> cache_;
};

// ---------------------------------------------------------------------------
// Cone membership and measures

struct ShCheck {
    bool ok = true;
    std::size_t worst_node = 0;
    double worst_violation = 0.0;  ///< most negative density (0 if none)
};

/// theta_i + L(g)_i - sum c_p >= -tol at every node without a positive pole.
inline ShCheck theta_sh_check(const Form& theta, const Potential& u, double tol) {
    if (u.size() != theta.size()) throw DomainError("theta_sh_check: size mismatch");
    const double shift = u.total_pole_mass();
    ShCheck rep;
    const auto reg = u.regular();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.pole_mass(i) > 0.0) continue;
        const double d = theta[i] + laplacian_at(reg, i) - shift;
        if (d < rep.worst_violation) {
            rep.worst_violation = d;
            rep.worst_node = i;
        }
    }
    rep.ok = rep.worst_violation >= -tol;
    return rep;
}

struct Measure {
    std::vector<double> density;
    double mass = 0.0;
    std::vector<std::size_t> pole_flags;  ///< nodes whose density was zeroed
    double defect = 0.0;                  ///< mass - (1 - sum c_p)

    double mass_where(const std::vector<bool>& mask) const {
        double s = 0.0;
        for (std::size_t i = 0; i < density.size(); ++i)
            if (mask[i]) s += density[i];
        return s / static_cast<double>(density.size());
    }
};

/// Density of theta + dd^c u including the atoms c_p / h at pole nodes.
inline std::vector<double> full_density(const Form& theta, const Potential& u) {
    const std::size_t n = u.size();
    const double shift = u.total_pole_mass();
    const auto reg = u.regular();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = theta[i] + laplacian_at(reg, i) - shift;
    for (const auto& p : u.poles()) d[p.node] += p.mass * static_cast<double>(n);
    return d;
}

/// Atom-stripped (non-pluripolar) measure.
inline Measure ma_measure(const Form& theta, const Potential& u) {
    const auto check = theta_sh_check(theta, u, theta.tol_pos());
    if (!check.ok)
        throw DomainError("ma_measure: potential is not theta-subharmonic (violation " +
                          std::to_string(check.worst_violation) + " at node " +
                          std::to_string(check.worst_node) + ")");
    const std::size_t n = u.size();
    const double shift = u.total_pole_mass();
    const auto reg = u.regular();
    Measure m;
    m.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.density[i] = theta[i] + laplacian_at(reg, i) - shift;
    for (const auto& p : u.poles()) {
        m.density[p.node] = 0.0;
        m.pole_flags.push_back(p.node);
    }
    double s = 0.0;
    for (double x : m.density) s += x;
    m.mass = s / static_cast<double>(n);
    m.defect = m.mass - (theta.mass() - shift);
    return m;
}

/// Pole-free potential with ma = m and max g = 0.
inline Potential poisson_solve(const Form& theta, std::span<const double> m) {
    const std::size_t n = theta.size();
    if (m.size() != n) throw DomainError("poisson_solve: size mismatch");
    double mass = 0.0;
    for (double x : m) {
        if (x < -theta.tol_pos()) throw DomainError("poisson_solve: negative target density");
        mass += x;
    }
    mass /= static_cast<double>(n);
    if (std::abs(mass - theta.mass()) > 1e-10) throw DomainError("poisson_solve: mass mismatch");
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = m[i] - theta[i];
    // Remove the rounding-level mean so the pinned solve is exact.
    const double mean = std::accumulate(rhs.begin(), rhs.end(), 0.0) / static_cast<double>(n);
    for (double& r : rhs) r -= mean;
    return Potential(solve_periodic_poisson(rhs));
}

// ---------------------------------------------------------------------------
// Pointwise operations

inline double sup_potential(const Potential& u) {
    const auto f = u.full_values();
    return *std::max_element(f.begin(), f.end());
}

inline double oscillation(std::span<const double> v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

/// Pointwise max; poles merge by componentwise min of masses.
inline Potential max_pot(const Potential& u, const Potential& v) {
    if (u.size() != v.size()) throw DomainError("max_pot: size mismatch");
    auto fu = u.full_values();
    const auto fv = v.full_values();
    for (std::size_t i = 0; i < fu.size(); ++i) fu[i] = std::max(fu[i], fv[i]);
    return Potential::from_full_values(fu, merge_poles(u.poles(), v.poles(),
                                                       [](double a, double b) { return std::min(a, b); }));
}

/// Pointwise convex combination (1-t)u + tv; pole masses combine linearly.
inline Potential blend(const Potential& u, const Potential& v, double t) {
    if (u.size() != v.size()) throw DomainError("blend: size mismatch");
    std::vector<double> g(u.size());
    const auto gu = u.regular();
    const auto gv = v.regular();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (1.0 - t) * gu[i] + t * gv[i];
    auto poles = merge_poles(u.poles(), v.poles(), [t](double a, double b) { return (1.0 - t) * a + t * b; });
    return Potential(std::move(g), std::move(poles));
}

/// Obstacle for envelope problems. `finite_values` are model values; nodes with
/// a positive pole mass are semantically -infinity (see `value`).
class Obstacle {
public:
    explicit Obstacle(std::vector<double> finite_values, std::vector<Pole> poles = {})
        : values_(std::move(finite_values)) {
        for (double x : values_)
            if (!std::isfinite(x)) throw DomainError("Obstacle: values must be finite");
        for (const auto& p : poles) {
            if (p.node >= values_.size()) throw DomainError("Obstacle: pole node out of range");
            if (!(p.mass >= 0.0)) throw DomainError("Obstacle: pole mass must be >= 0");
        }
        poles_ = merge_poles(poles, {}, [](double a, double b) { return a + b; });
    }

    static Obstacle from_potential(const Potential& u) { return Obstacle(u.full_values(), u.poles()); }

    std::size_t size() const { return values_.size(); }
    std::span<const double> finite_values() const { return values_; }
    const std::vector<Pole>& poles() const { return poles_; }

    double total_pole_mass() const {
        double s = 0.0;
        for (const auto& p : poles_) s += p.mass;
        return s;
    }

    double value(std::size_t i) const {
        for (const auto& p : poles_)
            if (p.node == i) return kNegInf;
        return values_[i];
    }

    /// Obstacle minus the singular part of its pole masses.
    std::vector<double> regular() const {
        std::vector<double> out = values_;
        const auto sing = singular_part(size(), poles_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= sing[i];
        return out;
    }

private:
    std::vector<double> values_;
    std::vector<Pole> poles_;
};

/// min(u, v) as an obstacle; the more singular pole mass wins node-wise.
inline Obstacle min_obstacle(std::span<const Potential> items) {
    if (items.empty()) throw DomainError("min_obstacle: empty list");
    auto vals = items[0].full_values();
    auto poles = items[0].poles();
    for (std::size_t k = 1; k < items.size(); ++k) {
        if (items[k].size() != vals.size()) throw DomainError("min_obstacle: size mismatch");
        const auto f = items[k].full_values();
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::min(vals[i], f[i]);
        poles = merge_poles(poles, items[k].poles(), [](double a, double b) { return std::max(a, b); });
    }
    return Obstacle(std::move(vals), std::move(poles));
}

inline Obstacle min_obstacle(const Potential& u, const Potential& v) {
    const Potential pair[] = {u, v};
    return min_obstacle(std::span<const Potential>(pair));
}

// ---------------------------------------------------------------------------
// Random theta-subharmonic potentials

struct RandomPotentialOptions {
    int modes = 4;             ///< trigonometric degree of the square root of the density
    double amplitude = 0.6;    ///< coefficient scale relative to the constant term
    double shift_range = 0.5;  ///< uniform additive constant in [-shift_range, shift_range]
};

/// Density (1 + sum a_k cos 2pi k x + b_k sin 2pi k x)^2 normalized to unit
/// mass, turned into a potential by poisson_solve, plus a random constant.
inline Potential random_potential(const Form& theta, SplitMix64& rng, const RandomPotentialOptions& opt = {}) {
    const std::size_t n = theta.size();
    std::vector<double> a(static_cast<std::size_t>(opt.modes)), b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double decay = 1.0 / static_cast<double>(k + 1);
        a[k] = opt.amplitude * decay * rng.uniform(-1.0, 1.0);
        b[k] = opt.amplitude * decay * rng.uniform(-1.0, 1.0);
    }
    const double shift = rng.uniform(-opt.shift_range, opt.shift_range);
    std::vector<double> m(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = theta.grid().node(i);
        double s = 1.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1) * x;
            s += a[k] * std::cos(w) + b[k] * std::sin(w);
        }
        m[i] = s * s;
        total += m[i];
    }
    const double scale = static_cast<double>(n) / total;
    for (double& x : m) x *= scale;
    return poisson_solve(theta, m) + shift;
}

}  // namespace e1lab
