#include <cmath>

#include <gtest/gtest.h>

#include "e1lab/corpus.hpp"
#include "e1lab/energy.hpp"
#include "e1lab/rng.hpp"

using namespace e1lab;

namespace {

Form cosine(std::size_t n, double a) { return Form::cosine(CircleGrid(n), a); }

// Independent truncation-limit oracle: I(max(u, V - C)) at a large C.
double truncation_oracle(const Form& theta, const Potential& u) {
    return detail::pole_free_energy(theta, truncate(theta, u, 1e4).regular());
}

}  // namespace

TEST(Energy, Constants) {
    const CircleGrid grid(64);
    EXPECT_NEAR(energy(Form::uniform(grid), Potential::constant(grid, 0.7)).get(), 0.7, 1e-14);
    const Form theta = cosine(64, 2.0);
    const auto vt = v_theta(theta);
    EXPECT_NEAR(energy(theta, vt + 0.3).get() - energy(theta, vt).get(), 0.3, 1e-13);
    EXPECT_NEAR(energy(cosine(64, 0.5), Potential::constant(grid, 0.0)).get(), 0.0, 1e-14);
}

TEST(Energy, HalfPoleFiniteAndFullPoleInfinite) {
    const std::size_t n = 12;
    const Form theta = Form::uniform(CircleGrid(n));
    const Potential half(std::vector<double>(n, 0.0), {{3, 0.5}});
    const auto e = energy(theta, half);
    ASSERT_TRUE(e.finite());
    EXPECT_NEAR(e.value, truncation_oracle(theta, half), 1e-9);
    const Potential full(std::vector<double>(n, 0.0), {{3, 1.0}});
    EXPECT_FALSE(energy(theta, full).finite());
}

TEST(EnergyDifference, Examples) {
    SplitMix64 rng(1);
    const Form theta = cosine(256, 1.0);
    const auto u = random_potential(theta, rng);
    const auto v = random_potential(theta, rng);
    EXPECT_EQ(energy_difference(theta, u, u), 0.0);
    EXPECT_NEAR(energy_difference(theta, u, u - 0.4), 0.4, 1e-13);
    EXPECT_NEAR(energy_difference(theta, u, v), energy(theta, u).get() - energy(theta, v).get(), 1e-10);
}

TEST(I1, Examples) {
    const CircleGrid grid(32);
    const Form theta = Form::uniform(grid);
    const auto zero = Potential::constant(grid, 0.0);
    EXPECT_EQ(i1(theta, zero, zero), 0.0);
    EXPECT_NEAR(i1(theta, zero, zero - 1.0), 2.0, 1e-14);
}

TEST(I1, PlurifineSplittingErrorShrinksWithN) {
    std::vector<double> err;
    for (std::size_t n : {64u, 256u, 1024u}) {
        SplitMix64 rng(9);
        const Form theta = cosine(n, 1.0);
        const auto u = random_potential(theta, rng);
        // Equal means, so the pair crosses.
        auto v = random_potential(theta, rng);
        double shift = 0.0;
        for (std::size_t i = 0; i < n; ++i) shift += u.regular()[i] - v.regular()[i];
        v = v + shift / static_cast<double>(n);
        const auto m = max_pot(u, v);
        err.push_back(std::abs(i1(theta, u, v) - i1(theta, m, u) - i1(theta, m, v)));
    }
    EXPECT_LT(err[1], err[0]);
    EXPECT_LT(err[2], err[1]);
}

TEST(D1, Examples) {
    const CircleGrid grid(32);
    const Form theta = Form::uniform(grid);
    EXPECT_NEAR(d1(theta, Potential::constant(grid, 0.0), Potential::constant(grid, -1.0)), 1.0, 1e-13);
    SplitMix64 rng(3);
    const Form cos_theta = cosine(128, 2.0);
    const auto u = random_potential(cos_theta, rng);
    const auto lower = rooftop(cos_theta, random_potential(cos_theta, rng), u).value();
    EXPECT_NEAR(d1(cos_theta, lower, u), energy(cos_theta, u).get() - energy(cos_theta, lower).get(), 1e-12);
    EXPECT_NEAR(d1(cos_theta, u, u), 0.0, 1e-13);
}

TEST(D1, TriangleInequalityOnSeededTriples) {
    SplitMix64 rng(17);
    const Form theta = cosine(128, 2.0);
    std::vector<Potential> pool;
    for (int k = 0; k < 12; ++k) pool.push_back(random_potential(theta, rng));
    int checked = 0;
    for (std::size_t a = 0; a < pool.size(); ++a)
        for (std::size_t b = a + 1; b < pool.size(); ++b)
            for (std::size_t c = 0; c < pool.size() && checked < 200; ++c) {
                if (c == a || c == b) continue;
                ++checked;
                EXPECT_LE(d1(theta, pool[a], pool[b]),
                          d1(theta, pool[a], pool[c]) + d1(theta, pool[c], pool[b]) + 1e-8);
            }
    EXPECT_EQ(checked, 200);
}

TEST(RooftopDerivative, ComparableCases) {
    const CircleGrid grid(64);
    const Form theta = Form::uniform(grid);
    SplitMix64 rng(5);
    const auto v = random_potential(theta, rng);
    EXPECT_EQ(rooftop_derivative(theta, v + 0.2, v, 0.4), 0.0);
    EXPECT_NEAR(rooftop_derivative(theta, v - 0.2, v, 0.4), 0.2, 1e-12);
    EXPECT_EQ(energy_gap_quadrature(theta, v + 0.2, v), 0.0);
    EXPECT_NEAR(energy_gap_quadrature(theta, v - 0.2, v), 0.2, 1e-12);
}

TEST(RooftopDerivative, CentralDifferenceOracle) {
    SplitMix64 rng(21);
    const Form theta = cosine(256, 2.0);
    for (int trial = 0; trial < 4; ++trial) {
        const auto u = random_potential(theta, rng);
        const auto v = random_potential(theta, rng);
        const double t = 0.3 + 0.1 * trial, dt = 1e-3;
        auto phi_energy = [&](double s) { return energy(theta, rooftop(theta, blend(u, v, s), v).value()).get(); };
        const double fd = (phi_energy(t + dt) - phi_energy(t - dt)) / (2.0 * dt);
        const double an = rooftop_derivative(theta, u, v, t);
        EXPECT_LE(std::abs(an - fd), 1e-2 * (1.0 + std::abs(an)));
    }
}

TEST(Quadrature, MatchesEnergyGap) {
    SplitMix64 rng(22);
    const Form theta = cosine(256, 2.0);
    const auto u = random_potential(theta, rng);
    const auto v = random_potential(theta, rng);
    const double gap = energy(theta, v).get() - energy(theta, rooftop(theta, u, v).value()).get();
    EXPECT_LE(std::abs(energy_gap_quadrature(theta, u, v, 32) - gap), 1e-3 * (1.0 + std::abs(gap)));
}

TEST(Domination, Examples) {
    SplitMix64 rng(2);
    const Form theta = cosine(128, 1.0);
    const auto v = random_potential(theta, rng);
    const auto below = domination_check(theta, v - 1.0, v, 1e-9);
    EXPECT_TRUE(below.hypothesis);
    EXPECT_TRUE(below.conclusion);
    EXPECT_FALSE(domination_check(theta, v + 1.0, v, 1e-9).hypothesis);
}

TEST(Domination, NoCounterexampleOnCorpus) {
    const Form theta = cosine(256, 2.0);
    const auto corpus = build_corpus(theta, 7);
    for (const auto& cls : corpus) {
        if (!cls.poles.empty()) continue;
        for (const auto& u : cls.items)
            for (const auto& v : cls.items) {
                const auto r = domination_check(theta, u, v, 1e-9);
                if (r.hypothesis) EXPECT_TRUE(r.conclusion);
            }
    }
}

// Exact discrete identity behind the energy estimates.
TEST(EnergyProperties, EstimatesHoldForRandomPairs) {
    SplitMix64 rng(41);
    const Form theta = cosine(256, 2.0);
    for (int trial = 0; trial < 8; ++trial) {
        const auto u = random_potential(theta, rng);
        const auto v = random_potential(theta, rng);
        const auto mu = ma_measure(theta, u).density;
        const auto mv = ma_measure(theta, v).density;
        double lo = 0.0, hi = 0.0;
        const auto gu = u.regular(), gv = v.regular();
        for (std::size_t i = 0; i < gu.size(); ++i) {
            lo += (gu[i] - gv[i]) * mu[i];
            hi += (gu[i] - gv[i]) * mv[i];
        }
        lo /= 256.0;
        hi /= 256.0;
        const double diff = energy(theta, u).get() - energy(theta, v).get();
        EXPECT_LE(lo, diff + 1e-9);
        EXPECT_LE(diff, hi + 1e-9);
    }
}

TEST(EnergyProperties, MonotoneAlongTruncations) {
    const Form theta = cosine(256, 2.0);
    const auto corpus = build_corpus(theta, 7);
    for (const auto& cls : corpus) {
        if (cls.poles.empty()) continue;
        for (const auto& u : cls.items) {
            double prev = std::numeric_limits<double>::infinity();
            for (double c = 0.125; c <= 64.0; c *= 2.0) {
                const double e = energy(theta, truncate(theta, u, c)).get();
                EXPECT_LE(e, prev + 1e-9);
                prev = e;
            }
            EXPECT_NEAR(prev, energy(theta, u).get(), 1e-9);
        }
    }
}
