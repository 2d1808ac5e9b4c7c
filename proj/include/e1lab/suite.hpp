#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "e1lab/cauchy.hpp"
#include "e1lab/corpus.hpp"
#include "e1lab/energy.hpp"
#include "e1lab/envelope.hpp"
#include "e1lab/geodesic.hpp"
#include "e1lab/grid.hpp"
#include "e1lab/oracle.hpp"
#include "e1lab/parallel.hpp"
#include "e1lab/rays.hpp"
#include "e1lab/record.hpp"
#include "e1lab/rng.hpp"

namespace e1lab {

struct SuiteSettings {
    std::uint64_t seed = 7;
    bool full = true;     ///< false: smaller sample counts, same resolutions and tolerances
    std::size_t n = 256;  ///< base circle size
    double cosine_a = 2.0;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Claim> claims;
    std::map<std::string, double> scalars;

    bool pass() const {
        return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.pass; });
    }
};

namespace suite {

inline double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double sup_full_diff(const Potential& a, const Potential& b) {
    return sup_abs_diff(a.full_values(), b.full_values());
}

/// h sum (u - v) w with full values.
inline double pair_integral(const Potential& u, const Potential& v, std::span<const double> w) {
    const auto fu = u.full_values();
    const auto fv = v.full_values();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += (fu[i] - fv[i]) * w[i];
    return s / static_cast<double>(w.size());
}

inline Form base_form(const SuiteSettings& s, std::size_t n) { return Form::cosine(CircleGrid(n), s.cosine_a); }

// ---------------------------------------------------------------------------
// 1-5: metric corpus

struct TripleOutcome {
    double asymmetry = 0.0;
    double negativity = 0.0;
    double triangle = -1.0;
    double indiscernible = 0.0;
    double pythagoras = 0.0;
    double lower_bound = -1.0;  ///< I1/24 - d1
    double upper_bound = -1.0;  ///< d1 - I1
    double ratio = 0.0;         ///< I1 / d1 where d1 > 0
    double halfway = -1.0;
    double contraction = -1.0;
    double rooftop_max = -1.0;
};

inline std::vector<CriterionResult> metric_criteria(const SuiteSettings& s) {
    const Form theta = base_form(s, s.n);
    const auto corpus = build_corpus(theta, s.seed);
    std::vector<std::unique_ptr<PairCache>> caches;
    for (const auto& c : corpus) caches.push_back(std::make_unique<PairCache>(theta, c));

    const std::size_t count = s.full ? 500 : 100;
    SplitMix64 rng = SplitMix64(s.seed).fork(1);
    struct Triple {
        std::size_t cls, i, j, k;
    };
    std::vector<Triple> triples;
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t c = rng.below(corpus.size());
        const std::size_t m = corpus[c].items.size();
        triples.push_back({c, rng.below(m), rng.below(m), rng.below(m)});
    }
    // Always exercise the duplicate pair of the pole-free class.
    triples[0] = {0, 3, corpus[0].items.size() - 1, 0};

    std::vector<TripleOutcome> out(triples.size());
    parallel_for(triples.size(), [&](std::size_t t) {
        const auto [c, i, j, k] = triples[t];
        PairCache& pc = *caches[c];
        const Potential& u = pc.item(i);
        const Potential& v = pc.item(j);
        const Potential& w = pc.item(k);
        TripleOutcome& o = out[t];
        const double dij = pc.d1(i, j);
        const double dji = pc.d1(j, i);
        o.asymmetry = std::abs(dij - dji);
        o.negativity = std::max(0.0, -dij);
        o.triangle = dij - pc.d1(i, k) - pc.d1(k, j);
        if (dij <= 1e-8) {
            const double scale = 1.0 + std::max(oscillation(u.regular()), oscillation(v.regular()));
            o.indiscernible = sup_full_diff(u, v) / scale;
        }
        const Potential& p = pc.roof(i, j);
        o.pythagoras = std::abs(dij - d1(theta, u, p) - d1(theta, v, p));
        const double i1v = i1(theta, u, v);
        o.lower_bound = i1v / 24.0 - dij;
        o.upper_bound = dij - i1v;
        o.ratio = dij > 1e-9 ? i1v / dij : 0.0;
        o.halfway = d1(theta, u, blend(u, v, 0.5)) - 3.0 * dij;
        o.contraction = d1(theta, pc.roof(i, k), pc.roof(j, k)) - dij;
        o.rooftop_max = d1(theta, v, p) - d1(theta, max_pot(u, v), u);
    });

    auto worst = [&](auto field) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& o : out) m = std::max(m, o.*field);
        return m;
    };
    double ratio_min = std::numeric_limits<double>::infinity(), ratio_max = 0.0;
    std::size_t zero_pairs = 0;
    for (const auto& o : out) {
        if (o.ratio > 0.0) {
            ratio_min = std::min(ratio_min, o.ratio);
            ratio_max = std::max(ratio_max, o.ratio);
        } else {
            ++zero_pairs;
        }
    }

    std::vector<CriterionResult> res(5);
    res[0] = {1, "metric axioms", {}, {}};
    res[0].claims.push_back(make_claim("max |d1(u,v) - d1(v,u)|", worst(&TripleOutcome::asymmetry), 0.0));
    res[0].claims.push_back(make_claim("max -d1(u,v)", worst(&TripleOutcome::negativity), 1e-8));
    res[0].claims.push_back(make_claim("max d1(u,v) - d1(u,w) - d1(w,v)", worst(&TripleOutcome::triangle), 1e-8));
    res[0].claims.push_back(
        make_claim("max sup|u-v|/scale over pairs with d1 <= 1e-8", worst(&TripleOutcome::indiscernible), 1e-6));
    res[0].scalars["triples"] = static_cast<double>(out.size());
    res[0].scalars["pairs with d1 <= 1e-9"] = static_cast<double>(zero_pairs);
    res[0].scalars["corpus items"] = static_cast<double>(
        std::accumulate(corpus.begin(), corpus.end(), std::size_t{0},
                        [](std::size_t a, const CorpusClass& c) { return a + c.items.size(); }));

    res[1] = {2, "Pythagorean formula", {}, {}};
    res[1].claims.push_back(
        make_claim("max |d1(u,v) - d1(u,P) - d1(v,P)|", worst(&TripleOutcome::pythagoras), 1e-9));

    res[2] = {3, "d1 / I1 double bound", {}, {}};
    res[2].claims.push_back(make_claim("max I1/24 - d1", worst(&TripleOutcome::lower_bound), 1e-12));
    res[2].claims.push_back(make_claim("max d1 - I1", worst(&TripleOutcome::upper_bound), 1e-9));
    res[2].scalars["min I1/d1"] = ratio_min;
    res[2].scalars["max I1/d1"] = ratio_max;

    res[3] = {4, "halfway estimate", {}, {}};
    res[3].claims.push_back(make_claim("max d1(u,(u+v)/2) - 3 d1(u,v)", worst(&TripleOutcome::halfway), 1e-9));

    res[4] = {5, "contraction and rooftop-max inequalities", {}, {}};
    res[4].claims.push_back(
        make_claim("max d1(P(u,w),P(v,w)) - d1(u,v)", worst(&TripleOutcome::contraction), 1e-9));
    res[4].claims.push_back(
        make_claim("max d1(v,P(u,v)) - d1(max(u,v),u)", worst(&TripleOutcome::rooftop_max), 1e-9));
    return res;
}

// ---------------------------------------------------------------------------
// 6: derivative formula and quadrature

inline CriterionResult derivative_criterion(const SuiteSettings& s) {
    const Form theta = base_form(s, s.n);
    const Potential vt = v_theta(theta);
    const std::size_t pairs = s.full ? 20 : 5;
    SplitMix64 rng = SplitMix64(s.seed).fork(6);
    struct Case {
        Potential u, v;
        double t;
    };
    std::vector<Case> cases;
    for (std::size_t k = 0; k < pairs; ++k) {
        auto u = random_potential(theta, rng);
        auto v = random_potential(theta, rng);
        if (k % 2 == 1) v = rooftop(theta, v, vt).value();
        cases.push_back({std::move(u), std::move(v), rng.uniform(0.2, 0.8)});
    }
    const double dt = 1e-3;
    std::vector<double> fd_err(pairs), q8(pairs), q16(pairs), q32(pairs);
    parallel_for(pairs, [&](std::size_t k) {
        const auto& [u, v, t] = cases[k];
        auto energy_at = [&](double tt) { return energy(theta, rooftop(theta, blend(u, v, tt), v).value()).get(); };
        const double analytic = rooftop_derivative(theta, u, v, t);
        const double fd = (energy_at(t + dt) - energy_at(t - dt)) / (2.0 * dt);
        fd_err[k] = std::abs(analytic - fd) / (1.0 + std::abs(analytic));
        const double gap = energy(theta, v).get() - energy(theta, rooftop(theta, u, v).value()).get();
        auto rel = [&](int kk) { return std::abs(energy_gap_quadrature(theta, u, v, kk) - gap) / (1.0 + std::abs(gap)); };
        q8[k] = rel(8);
        q16[k] = rel(16);
        q32[k] = rel(32);
    });
    CriterionResult r{6, "derivative formula and quadrature identity", {}, {}};
    auto mx = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
    r.claims.push_back(make_claim("max |analytic - central difference| / (1 + |analytic|)", mx(fd_err), 1e-2));
    r.claims.push_back(make_claim("max |Q_32 - (I(v) - I(P(u,v)))| / (1 + |gap|)", mx(q32), 1e-3));
    r.scalars["max relative quadrature error K=8"] = mx(q8);
    r.scalars["max relative quadrature error K=16"] = mx(q16);
    r.scalars["pairs"] = static_cast<double>(pairs);
    return r;
}

// ---------------------------------------------------------------------------
// 7: envelope oracle and contact concentration

/// h sum of |theta_P| over nodes outside the contact set.
inline double contact_defect(const Form& theta, const EnvelopeResult& r) {
    const auto m = full_density(theta, r.value());
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!r.contact_mask[i]) s += std::abs(m[i]);
    return s / static_cast<double>(m.size());
}

inline std::vector<double> smooth_obstacle(std::size_t n) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n);
        f[i] = 0.05 * std::sin(2.0 * std::numbers::pi * x) + 0.03 * std::cos(6.0 * std::numbers::pi * x);
    }
    return f;
}

inline CriterionResult envelope_criterion(const SuiteSettings& s) {
    const std::size_t count = s.full ? 50 : 12;
    SplitMix64 rng = SplitMix64(s.seed).fork(7);
    struct Case {
        Form theta;
        Obstacle f;
    };
    std::vector<Case> cases;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t n = 8 + 2 * (k % 3);
        const Form theta = Form::cosine(CircleGrid(n), rng.uniform(0.0, 2.5));
        std::vector<double> f(n);
        for (double& x : f) x = rng.uniform(-0.05, 0.05);
        std::vector<Pole> poles;
        if (k % 3 == 2) poles.push_back({rng.below(n), rng.uniform(0.1, 0.6)});
        cases.push_back({theta, Obstacle(std::move(f), std::move(poles))});
    }
    std::vector<double> err(count);
    std::vector<int> mismatch(count);
    parallel_for(count, [&](std::size_t k) {
        const auto prod = envelope_below(cases[k].theta, cases[k].f);
        const auto ref = oracle::envelope(cases[k].theta, cases[k].f);
        if (prod.bottom() != !ref.has_value()) {
            mismatch[k] = 1;
            return;
        }
        if (ref) err[k] = sup_abs_diff(prod.value().regular(), ref->regular());
    });
    CriterionResult r{7, "envelope correctness and contact concentration", {}, {}};
    r.claims.push_back(make_claim("max |P(f) - oracle| over seeded small obstacles",
                                  *std::max_element(err.begin(), err.end()), 1e-9));
    r.claims.push_back(make_claim("bottom/feasible disagreements with oracle",
                                  static_cast<double>(std::accumulate(mismatch.begin(), mismatch.end(), 0)), 0.0));

    double prev = 0.0;
    for (std::size_t n : {s.n, 2 * s.n}) {
        const Form theta = base_form(s, n);
        const auto env = envelope_below(theta, Obstacle(smooth_obstacle(n)));
        const double def = contact_defect(theta, env);
        r.scalars["contact defect N=" + std::to_string(n)] = def;
        if (n == s.n) {
            r.claims.push_back(make_claim("contact defect at N=" + std::to_string(n), def, 1e-6));
        } else {
            // Both levels sit at rounding error for an exact solve; the allowance
            // is the rounding scale of the discrete Laplacian at the finer grid.
            r.claims.push_back(make_claim("contact defect at 2N minus defect at N", def - prev, 1e-10));
        }
        prev = def;
    }
    return r;
}

// ---------------------------------------------------------------------------
// 8: energy estimates, truncations, sublevel masses

inline CriterionResult energy_criterion(const SuiteSettings& s) {
    const Form theta = base_form(s, s.n);
    const Potential vt = v_theta(theta);
    const auto vv = vt.regular();
    const auto corpus = build_corpus(theta, s.seed);
    CriterionResult r{8, "energy estimates, monotone continuity, sublevel masses", {}, {}};

    double est_lo = -1.0, est_hi = -1.0, cmp_lo = -1.0, cmp_hi = -1.0;
    double sup_floor = -std::numeric_limits<double>::infinity();
    double fit_b = -std::numeric_limits<double>::infinity();
    for (const auto& cls : corpus) {
        const std::size_t m = cls.items.size();
        std::vector<double> en(m);
        std::vector<std::vector<double>> dens(m);
        for (std::size_t i = 0; i < m; ++i) {
            en[i] = energy(theta, cls.items[i]).get();
            dens[i] = energy_density(theta, cls.items[i]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const auto& u = cls.items[i];
                const auto& v = cls.items[j];
                const double diff = en[i] - en[j];
                est_lo = std::max(est_lo, pair_integral(u, v, dens[i]) - diff);
                est_hi = std::max(est_hi, diff - pair_integral(u, v, dens[j]));
            }
            // Comparable pairs v = P(u, w) <= u.
            const auto& u = cls.items[i];
            const auto p = rooftop(theta, u, cls.items[(i + 1) % m]).value();
            const auto dp = energy_density(theta, p);
            const double diff = en[i] - energy(theta, p).get();
            cmp_lo = std::max(cmp_lo, 0.5 * pair_integral(u, p, dp) - diff);
            cmp_hi = std::max(cmp_hi, diff - pair_integral(u, p, dp));
        }
        if (cls.poles.empty()) {
            for (const auto& u : cls.items) {
                const double dv = d1(theta, vt, u);
                sup_floor = std::max(sup_floor, -dv - sup_potential(u));
                fit_b = std::max(fit_b, sup_potential(u) - dv);
            }
        }
    }
    r.claims.push_back(make_claim("max int(u-v) theta_u - (I(u)-I(v))", est_lo, 1e-9));
    r.claims.push_back(make_claim("max (I(u)-I(v)) - int(u-v) theta_v", est_hi, 1e-9));
    r.claims.push_back(make_claim("v <= u: max (1/2) int(u-v) theta_v - (I(u)-I(v))", cmp_lo, 1e-9));
    r.claims.push_back(make_claim("v <= u: max (I(u)-I(v)) - int(u-v) theta_v", cmp_hi, 1e-9));
    r.scalars["sup bound: max -d1(V,phi) - sup phi (<= 0 expected)"] = sup_floor;
    r.scalars["sup bound fit: A"] = 1.0;
    r.scalars["sup bound fit: B"] = fit_b;

    // Truncations of pole-carrying items.
    double i_increase = -1.0, i_final = 0.0, i1_increase = -1.0, i1_final = 0.0;
    double decay_increase = -1.0, decay_final = 0.0;
    double sublevel = -1.0;
    std::size_t sublevel_checks = 0;
    for (const auto& cls : corpus) {
        if (cls.poles.empty()) continue;
        for (std::size_t idx = 0; idx < cls.items.size(); ++idx) {
            const auto& u = cls.items[idx];
            const double iu = energy(theta, u).get();
            const auto fu = u.full_values();
            std::vector<double> ei, e1, decay;
            for (double c = 0.125; c <= 64.0; c *= 2.0) {
                const auto uc = truncate(theta, u, c);
                ei.push_back(energy(theta, uc).get());
                e1.push_back(i1(theta, uc, u));
                const auto mu = ma_measure(theta, uc);
                std::vector<bool> mask(fu.size());
                for (std::size_t i = 0; i < fu.size(); ++i) mask[i] = fu[i] <= vv[i] - c;
                decay.push_back(c * mu.mass_where(mask));
            }
            const std::size_t tail = ei.size() / 2;
            for (std::size_t k = 1; k < ei.size(); ++k) {
                i_increase = std::max(i_increase, ei[k] - ei[k - 1]);
                if (k >= tail) {
                    i1_increase = std::max(i1_increase, e1[k] - e1[k - 1]);
                    decay_increase = std::max(decay_increase, decay[k] - decay[k - 1]);
                }
            }
            i_final = std::max(i_final, std::abs(ei.back() - iu));
            i1_final = std::max(i1_final, e1.back());
            decay_final = std::max(decay_final, decay.back());

            // Sublevel masses for u' = P(v, w) <= v <= 0.
            const auto v = u - std::max(0.0, sup_potential(u));
            const auto& w0 = cls.items[(idx + 1) % cls.items.size()];
            const auto up = rooftop(theta, v, w0 - std::max(0.0, sup_potential(w0))).value();
            const auto dv = energy_density(theta, v);
            const auto du = energy_density(theta, up);
            const auto fv = v.full_values();
            const auto fp = up.full_values();
            for (double c = 0.05; c <= 3.2; c *= 2.0) {
                double mv = 0.0, mu = 0.0;
                bool nonempty = false;
                for (std::size_t i = 0; i < fv.size(); ++i) {
                    if (fv[i] <= vv[i] - c) {
                        mv += dv[i];
                        nonempty = true;
                    }
                    if (fp[i] <= vv[i] - 0.5 * c) mu += du[i];
                }
                if (!nonempty) continue;
                ++sublevel_checks;
                const double h = 1.0 / static_cast<double>(fv.size());
                sublevel = std::max(sublevel, h * mv - 2.0 * h * mu);
            }
        }
    }
    r.claims.push_back(make_claim("max increase of I(u^C) as C doubles", i_increase, 1e-9));
    r.claims.push_back(make_claim("max |I(u^C) - I(u)| at C=64", i_final, 1e-9));
    r.claims.push_back(make_claim("max tail increase of I1(u^C, u)", i1_increase, 1e-9));
    r.claims.push_back(make_claim("max I1(u^C, u) at C=64", i1_final, 1e-9));
    r.claims.push_back(make_claim("max tail increase of C theta_{u^C}(u <= V - C)", decay_increase, 1e-9));
    r.claims.push_back(make_claim("max C theta_{u^C}(u <= V - C) at C=64", decay_final, 1e-9));
    r.claims.push_back(make_claim("max theta_v(v <= V-C) - 2 theta_u(u <= V-C/2)", sublevel, 1e-9));
    r.scalars["sublevel checks"] = static_cast<double>(sublevel_checks);
    return r;
}

// ---------------------------------------------------------------------------
// 9: geodesic segments

struct GeodesicLevel {
    GeodesicReport report;
    double restriction = 0.0;
    double boundary = 0.0;
    double tol_geo = 0.0;
};

inline GeodesicLevel geodesic_level(const SuiteSettings& s, std::size_t n, std::size_t slices, int radius) {
    const Form theta = base_form(s, n);
    SplitMix64 rng = SplitMix64(s.seed).fork(9);
    const auto phi0 = random_potential(theta, rng);
    const auto phi1 = rooftop(theta, random_potential(theta, rng), v_theta(theta) + 0.05).value();
    GeodesicSettings gs;
    gs.stencil_radius = radius;
    const auto u = segment_solve(theta, phi0, phi1, 1.0, slices, gs);
    GeodesicLevel lv;
    lv.report = verify_geodesic(theta, u);
    lv.tol_geo = gs.tol_geo_rel * (1.0 + lv.report.boundary_oscillation);
    lv.boundary = std::max(sup_abs_diff(u.slice_values(0), phi0.regular()),
                           sup_abs_diff(u.slice_values(slices - 1), phi1.regular()));
    const std::size_t mid = (slices - 1) / 2;
    const auto half = segment_solve(theta, phi0, u.slice(mid), u.time(mid), mid + 1, gs);
    for (std::size_t k = 0; k <= mid; ++k)
        lv.restriction = std::max(lv.restriction, sup_abs_diff(u.slice_values(k), half.slice_values(k)));
    return lv;
}

inline CriterionResult geodesic_criterion(const SuiteSettings& s) {
    // The refined level doubles N, the interval count and the stencil radius.
    const auto base = geodesic_level(s, s.n, 65, 2);
    const auto fine = geodesic_level(s, 2 * s.n, 129, 4);
    CriterionResult r{9, "geodesic segments", {}, {}};
    const auto& b = base.report;
    const auto& f = fine.report;
    r.claims.push_back(make_claim("metric-speed deviation (base)", b.metric_deviation, 5e-2 * b.d1_endpoints));
    r.claims.push_back(
        make_claim("energy-chord deviation (base)", b.energy_chord_deviation, 2e-2 * b.boundary_oscillation));
    r.claims.push_back(make_claim("metric-speed deviation (refined) vs half of base", f.metric_deviation,
                                  0.5 * b.metric_deviation));
    r.claims.push_back(make_claim("energy-chord deviation (refined) vs half of base", f.energy_chord_deviation,
                                  0.5 * b.energy_chord_deviation));
    r.claims.push_back(make_claim("restriction to [0, l/2] (base)", base.restriction, 2.0 * base.tol_geo));
    r.claims.push_back(make_claim("boundary slices (base)", base.boundary, 2.0 * base.tol_geo));
    r.claims.push_back(make_claim("boundary slices (refined)", fine.boundary, 2.0 * fine.tol_geo));
    r.scalars["d1(phi0, phi1) base"] = b.d1_endpoints;
    r.scalars["d1(phi0, phi1) refined"] = f.d1_endpoints;
    r.scalars["boundary oscillation"] = b.boundary_oscillation;
    r.scalars["t-convexity violation base"] = b.t_convexity_violation;
    r.scalars["slice cone violation base"] = b.sh_violation;
    r.scalars["restriction (refined, informational)"] = fine.restriction;
    return r;
}

// ---------------------------------------------------------------------------
// 10: rays

struct RaySetup {
    double tau_minus = -0.25;
    double slope = 2.0;
    double horizon = 1.0;
    std::size_t legendre_slices = 257;  ///< t grid for Legendre round trips
    std::size_t geodesic_slices = 65;   ///< t grid for geodesic comparisons
};

inline double max_curve_diff(const TestCurve& a, const TestCurve& b, std::size_t& bottom_mismatch) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a.finite(k) != b.finite(k)) {
            ++bottom_mismatch;
            continue;
        }
        if (a.finite(k)) d = std::max(d, sup_full_diff(*a.entries[k], *b.entries[k]));
    }
    return d;
}

inline double max_ray_diff(const Ray& a, const Ray& b) {
    double d = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) d = std::max(d, sup_full_diff(a.slices[q], b.slices[q]));
    return d;
}

inline CriterionResult ray_criterion(const SuiteSettings& s, const RaySetup& rs = {}) {
    const Form theta = base_form(s, s.n);
    const std::size_t p = s.n / 2;
    const double tol = 1e-10;
    CriterionResult r{10, "geodesic rays from test curves", {}, {}};

    std::map<std::size_t, TestCurve> curves;
    for (std::size_t m : {101, 201, 401})
        curves.emplace(m, maximize_curve(theta, preset_pole_curve(theta, p, rs.tau_minus, rs.slope, m)));
    const double horizon = std::max(rs.horizon, 2.0 * minimal_horizon(curves.at(401)));
    const auto t_fine = uniform_grid(0.0, horizon, rs.legendre_slices);

    double worst_defect = 0.0;
    for (std::size_t m : {101, 201}) worst_defect = std::max(worst_defect, maximality_defect(theta, curves.at(m)));
    r.claims.push_back(make_claim("max maximality defect over tau (M=101, 201)", worst_defect, tol));

    // Curve -> ray -> curve on the curve's own tau grid.
    std::map<std::size_t, double> curve_rt;
    std::size_t mismatch = 0;
    for (std::size_t m : {101, 201}) {
        const auto& c = curves.at(m);
        const auto back = hat_transform(inverse_legendre(c, t_fine), c.tau);
        curve_rt[m] = max_curve_diff(c, back, mismatch);
        r.claims.push_back(make_claim("curve round trip M=" + std::to_string(m), curve_rt[m],
                                      c.spacing() * horizon + tol));
    }
    r.claims.push_back(make_claim("curve round trip bottom mismatches", static_cast<double>(mismatch), 0.0));
    r.claims.push_back(make_claim("curve round trip M=201 vs half of M=101", curve_rt[201], 0.5 * curve_rt[101] + tol));

    // Ray -> curve -> ray, the ray built from the finest curve.
    const auto ref = inverse_legendre(curves.at(401), t_fine);
    std::map<std::size_t, double> ray_rt;
    for (std::size_t m : {101, 201}) {
        const auto& grid = curves.at(m).tau;
        const auto again = inverse_legendre(hat_transform(ref, grid), t_fine);
        ray_rt[m] = max_ray_diff(ref, again);
        r.claims.push_back(make_claim("ray round trip M=" + std::to_string(m), ray_rt[m],
                                      curves.at(m).spacing() * horizon + tol));
    }
    r.claims.push_back(make_claim("ray round trip M=201 vs half of M=101", ray_rt[201], 0.5 * ray_rt[101] + tol));

    // Geodesic behaviour of the constructed ray.
    const auto t_geo = uniform_grid(0.0, horizon, rs.geodesic_slices);
    const auto ray = inverse_legendre(curves.at(101), t_geo);
    const std::size_t last = ray.size() - 1;
    double worst_restriction = 0.0;
    for (std::size_t q : {last / 4, last / 2, last}) {
        const auto field = ray.restriction(q);
        const auto seg = segment_solve(theta, ray.slices[0], ray.slices[q], ray.t[q], q + 1);
        double d = 0.0;
        for (std::size_t k = 0; k <= q; ++k) d = std::max(d, sup_abs_diff(field.slice_values(k), seg.slice_values(k)));
        std::vector<double> both(ray.slices[0].regular().begin(), ray.slices[0].regular().end());
        both.insert(both.end(), ray.slices[q].regular().begin(), ray.slices[q].regular().end());
        const double rel = d / oscillation(both);
        r.scalars["restriction deviation / osc, l=" + format_real(ray.t[q])] = rel;
        worst_restriction = std::max(worst_restriction, rel);
    }
    r.claims.push_back(make_claim("max restriction vs segment_solve / osc", worst_restriction, 5e-2));

    std::vector<double> en;
    for (const auto& sl : ray.slices) en.push_back(energy(theta, sl).get());
    double chord = 0.0;
    for (std::size_t q = 0; q <= last; ++q) {
        const double lin = en[0] + (en[last] - en[0]) * ray.t[q] / horizon;
        chord = std::max(chord, std::abs(en[q] - lin));
    }
    std::vector<double> both(ray.slices[0].regular().begin(), ray.slices[0].regular().end());
    both.insert(both.end(), ray.slices[last].regular().begin(), ray.slices[last].regular().end());
    const double osc = oscillation(both);
    r.claims.push_back(make_claim("energy-chord deviation along ray", chord, 2e-2 * osc));
    r.scalars["horizon T"] = horizon;
    r.scalars["ray oscillation"] = osc;
    return r;
}

// ---------------------------------------------------------------------------
// 11: completeness

inline CriterionResult cauchy_criterion(const SuiteSettings& s) {
    const Form theta = base_form(s, s.n);
    SplitMix64 rng = SplitMix64(s.seed).fork(11);
    const auto seq = cauchy_sequence(theta, rng, 17);
    const auto rep = cauchy_report(theta, seq, 6, 12);
    CriterionResult r{11, "completeness construction", {}, {}};
    r.claims.push_back(make_claim("max d1(phi_j, psi_jk) - 2^(1-j), j<=6, k<=12", rep.worst_excess, 1e-8));
    r.claims.push_back(make_claim("max sup(psi_j - psi_{j+1})", rep.psi_monotonicity, 1e-12));
    r.claims.push_back(make_claim("start of nonincreasing tail of d1(phi_j, psi)", static_cast<double>(rep.tail_start), 6.0));
    double steps = 0.0;
    for (std::size_t j = 0; j < rep.step.size(); ++j)
        steps = std::max(steps, rep.step[j] - std::ldexp(1.0, -static_cast<int>(j)));
    r.claims.push_back(make_claim("max d1(phi_j, phi_{j+1}) - 2^-j", steps, 0.0));
    for (std::size_t j = 0; j < rep.limit_dist.size(); ++j)
        r.scalars["d1(phi_" + std::to_string(j) + ", psi)"] = rep.limit_dist[j];
    return r;
}

}  // namespace suite

/// Criteria 1-11 (criterion 12 compares two CLI runs and lives outside).
inline std::vector<CriterionResult> run_suite(const SuiteSettings& s) {
    auto out = suite::metric_criteria(s);
    out.push_back(suite::derivative_criterion(s));
    out.push_back(suite::envelope_criterion(s));
    out.push_back(suite::energy_criterion(s));
    out.push_back(suite::geodesic_criterion(s));
    out.push_back(suite::ray_criterion(s));
    out.push_back(suite::cauchy_criterion(s));
    return out;
}

inline ResultRecord suite_record(const std::vector<CriterionResult>& results) {
    ResultRecord rec;
    rec.command = "check";
    for (const auto& c : results) {
        const std::string prefix = "AC" + std::to_string(c.id) + " ";
        for (const auto& cl : c.claims) rec.claims.push_back({prefix + cl.name, cl.value, cl.bound, cl.pass});
        for (const auto& [k, v] : c.scalars) rec.scalars[prefix + k] = v;
    }
    return rec;
}

}  // namespace e1lab
