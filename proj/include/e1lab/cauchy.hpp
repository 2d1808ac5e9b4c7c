#pragma once

#include <cmath>
#include <vector>

#include "e1lab/energy.hpp"
#include "e1lab/envelope.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/grid.hpp"
#include "e1lab/rng.hpp"

namespace e1lab {

/// Sequence phi_0, phi_1, ... with d1(phi_j, phi_{j+1}) = first * decay^j, so
/// d1(phi_j, phi_{j+1}) <= 2^-j whenever first <= 1 and decay <= 1/2. Each
/// step moves toward a fresh random potential; the blend weight is found by
/// bisection (the whole way if even the full step is shorter).
///
/// With decay < 1/3 the triangle inequality makes d1(phi_j, lim) decrease in j.
inline std::vector<Potential> cauchy_sequence(const Form& theta, SplitMix64& rng, std::size_t length,
                                              double first = 0.5, double decay = 0.25) {
    if (length < 2) throw DomainError("cauchy_sequence: need at least two terms");
    if (!(first > 0.0 && first <= 1.0)) throw DomainError("cauchy_sequence: first step must lie in (0, 1]");
    if (!(decay > 0.0 && decay <= 0.5)) throw DomainError("cauchy_sequence: decay must lie in (0, 1/2]");
    std::vector<Potential> seq{random_potential(theta, rng)};
    double target = first;
    for (std::size_t j = 0; j + 1 < length; ++j, target *= decay) {
        const auto goal = random_potential(theta, rng);
        const Potential& cur = seq.back();
        if (d1(theta, cur, goal) <= target) {
            seq.push_back(goal);
            continue;
        }
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            (d1(theta, cur, blend(cur, goal, mid)) <= target ? lo : hi) = mid;
        }
        seq.push_back(blend(cur, goal, lo));
    }
    return seq;
}

struct CauchyReport {
    /// excess[j][k] = d1(phi_j, psi_{j,k}) - 2^{1-j}, for j <= max_j, j <= k <= max_k.
    std::vector<std::vector<double>> excess;
    double worst_excess = -std::numeric_limits<double>::infinity();
    std::vector<double> step;          ///< d1(phi_j, phi_{j+1})
    std::vector<double> limit_dist;    ///< d1(phi_j, psi), psi the last psi_j
    double psi_monotonicity = 0.0;     ///< max over j of sup (psi_j - psi_{j+1}), should be <= 0
    std::size_t tail_start = 0;        ///< first j of the nonincreasing tail of limit_dist
};

/// psi_{j,k} = P(phi_j, ..., phi_k); psi_j is psi_{j,K} with K the last index.
inline CauchyReport cauchy_report(const Form& theta, const std::vector<Potential>& seq, std::size_t max_j,
                                  std::size_t max_k) {
    const std::size_t last = seq.size() - 1;
    if (max_k > last || max_j > max_k) throw DomainError("cauchy_report: index bounds exceed the sequence");
    CauchyReport rep;
    for (std::size_t j = 0; j < last; ++j) rep.step.push_back(d1(theta, seq[j], seq[j + 1]));
    rep.excess.resize(max_j + 1);
    for (std::size_t j = 0; j <= max_j; ++j) {
        for (std::size_t k = j; k <= max_k; ++k) {
            const auto psi = multi_rooftop(theta, std::span(seq).subspan(j, k - j + 1)).value();
            const double e = d1(theta, seq[j], psi) - std::ldexp(1.0, 1 - static_cast<int>(j));
            rep.excess[j].push_back(e);
            rep.worst_excess = std::max(rep.worst_excess, e);
        }
    }
    std::vector<Potential> psi;
    for (std::size_t j = 0; j <= last; ++j)
        psi.push_back(multi_rooftop(theta, std::span(seq).subspan(j)).value());
    for (std::size_t j = 0; j < last; ++j) {
        const auto a = psi[j].regular();
        const auto b = psi[j + 1].regular();
        for (std::size_t i = 0; i < a.size(); ++i) rep.psi_monotonicity = std::max(rep.psi_monotonicity, a[i] - b[i]);
    }
    for (std::size_t j = 0; j <= last; ++j) rep.limit_dist.push_back(d1(theta, seq[j], psi.back()));
    rep.tail_start = last;
    while (rep.tail_start > 0 && rep.limit_dist[rep.tail_start - 1] >= rep.limit_dist[rep.tail_start])
        --rep.tail_start;
    return rep;
}

}  // namespace e1lab
