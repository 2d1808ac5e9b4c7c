#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "e1lab/envelope.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/grid.hpp"

namespace e1lab {

struct EnergySettings {
    double tol_e_rel = 1e-10;
    double drain_ratio = 0.9;   ///< decrement ratio above which the limit is declared -inf
    int drain_window = 10;      ///< consecutive doublings with ratio above drain_ratio
    int max_doublings = 64;
    /// Pole mass within this of m(theta) counts as full capacity (energy -inf).
    double capacity_tol = 1e-12;
};

struct EnergyValue {
    double value = 0.0;
    bool neg_infinity = false;
    std::vector<std::pair<double, double>> truncation_trace;  ///< (C, I(u^C))

    bool finite() const { return !neg_infinity; }

    double get() const {
        if (neg_infinity) throw DomainError("energy is -infinity");
        return value;
    }
};

/// Density of theta_u used for energy-type integrals. For pole-free u it is
/// ma_measure; for pole-carrying u it is the limit of the truncations' measures,
/// which keeps the atoms c_p / h at pole nodes.
inline std::vector<double> energy_density(const Form& theta, const Potential& u) {
    const auto check = theta_sh_check(theta, u, theta.tol_pos());
    if (!check.ok) throw DomainError("energy_density: potential is not theta-subharmonic");
    return full_density(theta, u);
}

namespace detail {

inline double pole_free_energy(const Form& theta, std::span<const double> u) {
    const Potential vt = v_theta(theta);
    const auto v = vt.regular();
    const auto lu = laplacian(u);
    const auto lv = laplacian(v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += (u[i] - v[i]) * (2.0 * theta[i] + lu[i] + lv[i]);
    return 0.5 * s / static_cast<double>(u.size());
}

}  // namespace detail

/// Monge-Ampere energy. Pole-carrying inputs go through truncations
/// max(u, V_theta - C), C = 1, 2, 4, ...
inline EnergyValue energy(const Form& theta, const Potential& u, const EnergySettings& s = {}) {
    const auto check = theta_sh_check(theta, u, theta.tol_pos());
    if (!check.ok) throw DomainError("energy: potential is not theta-subharmonic");
    EnergyValue out;
    if (!u.has_poles()) {
        out.value = detail::pole_free_energy(theta, u.regular());
        return out;
    }
    if (u.total_pole_mass() >= theta.mass() - s.capacity_tol) {
        out.neg_infinity = true;
        return out;
    }
    double prev = 0.0, prev_dec = 0.0;
    int draining = 0;
    double c = 1.0;
    for (int k = 0; k < s.max_doublings; ++k, c *= 2.0) {
        const double cur = detail::pole_free_energy(theta, truncate(theta, u, c).regular());
        out.truncation_trace.emplace_back(c, cur);
        if (k > 0) {
            const double dec = prev - cur;
            if (std::abs(dec) < s.tol_e_rel * (1.0 + std::abs(cur))) {
                out.value = cur;
                return out;
            }
            if (k > 1 && prev_dec > 0.0 && dec / prev_dec > s.drain_ratio) {
                if (++draining >= s.drain_window) {
                    out.neg_infinity = true;
                    return out;
                }
            } else {
                draining = 0;
            }
            prev_dec = dec;
        }
        prev = cur;
    }
    throw NumericalError("energy: truncation limit did not settle");
}

/// (1/2) h sum (u - v)(theta_u + theta_v).
inline double energy_difference(const Form& theta, const Potential& u, const Potential& v) {
    if (u.total_pole_mass() >= theta.mass() - 1e-12 || v.total_pole_mass() >= theta.mass() - 1e-12)
        throw DomainError("energy_difference: operand has infinite energy");
    const auto du = energy_density(theta, u);
    const auto dv = energy_density(theta, v);
    const auto fu = u.full_values();
    const auto fv = v.full_values();
    double s = 0.0;
    for (std::size_t i = 0; i < du.size(); ++i) s += (fu[i] - fv[i]) * (du[i] + dv[i]);
    return 0.5 * s / static_cast<double>(du.size());
}

/// I_1(u, v) = h sum |u - v| (theta_u + theta_v).
inline double i1(const Form& theta, const Potential& u, const Potential& v) {
    const auto du = energy_density(theta, u);
    const auto dv = energy_density(theta, v);
    const auto fu = u.full_values();
    const auto fv = v.full_values();
    double s = 0.0;
    for (std::size_t i = 0; i < du.size(); ++i) s += std::abs(fu[i] - fv[i]) * (du[i] + dv[i]);
    return s / static_cast<double>(du.size());
}

/// d_1(u, v) = I(u) + I(v) - 2 I(P(u, v)).
inline double d1(const Form& theta, const Potential& u, const Potential& v, const EnvelopeSettings& es = {}) {
    const auto eu = energy(theta, u);
    const auto ev = energy(theta, v);
    if (!eu.finite() || !ev.finite()) throw DomainError("d1: operand has infinite energy");
    const auto p = rooftop(theta, u, v, es);
    if (p.bottom()) throw DomainError("d1: rooftop envelope is empty");
    const auto ep = energy(theta, p.value());
    if (!ep.finite()) throw DomainError("d1: rooftop envelope has infinite energy");
    return eu.value + ev.value - 2.0 * ep.value;
}

/// h sum (v - min(u, v)) ma(phi_t) with phi_t = P((1-t)u + tv, v).
inline double rooftop_derivative(const Form& theta, const Potential& u, const Potential& v, double t) {
    if (u.has_poles() || v.has_poles()) throw DomainError("rooftop_derivative: inputs must be pole-free");
    const auto phi = rooftop(theta, blend(u, v, t), v).value();
    const auto m = ma_measure(theta, phi);
    const auto gu = u.regular();
    const auto gv = v.regular();
    double s = 0.0;
    for (std::size_t i = 0; i < gu.size(); ++i) s += (gv[i] - std::min(gu[i], gv[i])) * m.density[i];
    return s / static_cast<double>(gu.size());
}

/// Composite midpoint rule for the integral of rooftop_derivative over [0, 1].
inline double energy_gap_quadrature(const Form& theta, const Potential& u, const Potential& v, int k = 32) {
    if (k < 1) throw DomainError("energy_gap_quadrature: K must be positive");
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += rooftop_derivative(theta, u, v, (j + 0.5) / k);
    return s / k;
}

struct DominationReport {
    bool hypothesis = false;   ///< ma(v) gives mass <= tol to {u > v + tol}
    bool conclusion = false;   ///< u <= v + tol everywhere
    double exceptional_mass = 0.0;
};

inline DominationReport domination_check(const Form& theta, const Potential& u, const Potential& v, double tol) {
    const auto m = ma_measure(theta, v);
    const auto fu = u.full_values();
    const auto fv = v.full_values();
    DominationReport r;
    r.conclusion = true;
    double s = 0.0;
    for (std::size_t i = 0; i < fu.size(); ++i) {
        if (fu[i] > fv[i] + tol) {
            s += m.density[i];
            r.conclusion = false;
        }
    }
    r.exceptional_mass = s / static_cast<double>(fu.size());
    r.hypothesis = r.exceptional_mass <= tol;
    return r;
}

}  // namespace e1lab
