#include <cmath>

#include <gtest/gtest.h>

#include "e1lab/oracle.hpp"
#include "e1lab/rays.hpp"
#include "e1lab/rng.hpp"

using namespace e1lab;

namespace {

Form cosine(std::size_t n, double a) { return Form::cosine(CircleGrid(n), a); }

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double sup_full_diff(const Potential& a, const Potential& b) { return sup_diff(a.full_values(), b.full_values()); }

// Constant curve phi on tau <= top, bottom above.
TestCurve flat_curve(const Potential& phi, double lo, double hi, std::size_t m, double top) {
    TestCurve c;
    c.base = phi;
    c.tau = uniform_grid(lo, hi, m);
    c.entries.resize(m);
    for (std::size_t k = 0; k < m; ++k)
        if (c.tau[k] <= top + 1e-12) c.entries[k] = phi;
    c.tau_minus = top;
    c.tau_plus = top;
    c.horizon_flags.assign(m, false);
    return c;
}

}  // namespace

TEST(PresetCurve, BaseBelowTauMinusAndBottomAbove) {
    const Form theta = cosine(64, 2.0);
    const auto c = preset_pole_curve(theta, 32, -0.25, 2.0, 41);
    const auto vt = v_theta(theta);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double lambda = 2.0 * std::max(0.0, c.tau[k] + 0.25);
        if (c.tau[k] <= -0.25) {
            ASSERT_TRUE(c.finite(k));
            EXPECT_LE(sup_full_diff(*c.entries[k], vt), 1e-15);
        }
        if (lambda > 1.0 + 1e-12) EXPECT_FALSE(c.finite(k));
        if (c.finite(k) && lambda > 0.0) EXPECT_NEAR(c.entries[k]->pole_mass(32), std::min(lambda, 1.0), 1e-15);
    }
    const auto chk = check_curve(c);
    EXPECT_LE(chk.concavity_violation, 1e-9);
    EXPECT_LE(chk.monotonicity_violation, 1e-9);
    EXPECT_TRUE(chk.bottom_above_plus);
}

TEST(PresetCurve, MidrangeEntryMatchesOracle) {
    const std::size_t n = 12;
    const Form theta = cosine(n, 1.0);
    const auto c = preset_pole_curve(theta, 6, 0.0, 1.0, 13);
    const std::size_t k = 6;  // tau = 0.5 on [-0.1, 1.1]
    ASSERT_NEAR(c.tau[k], 0.5, 1e-12);
    const Potential pole(std::vector<double>(n, 0.0), {{6, 0.5}});
    const auto ref = oracle::envelope(theta, min_obstacle(v_theta(theta), pole));
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(c.entries[k]->pole_mass(6), 0.5, 1e-15);
    EXPECT_LE(sup_diff(c.entries[k]->regular(), ref->regular()), 1e-9);
}

TEST(Usc, AlreadyUscUnchangedAndRaisedTopLowered) {
    const Form theta = cosine(32, 1.0);
    const auto c = preset_pole_curve(theta, 8, 0.0, 1.0, 21);
    const auto same = usc_regularize(c);
    for (std::size_t k = 0; k < c.size(); ++k) {
        ASSERT_EQ(same.finite(k), c.finite(k));
        if (c.finite(k)) EXPECT_EQ(sup_full_diff(*same.entries[k], *c.entries[k]), 0.0);
    }
    auto raised = c;
    const std::size_t top = c.top_index();
    raised.entries[top] = *c.entries[top - 1] + 0.5;
    const auto fixed = usc_regularize(raised);
    EXPECT_EQ(sup_full_diff(*fixed.entries[top], *c.entries[top - 1]), 0.0);
}

TEST(Maximize, PoleFreeCurveCollapsesToPhi) {
    SplitMix64 rng(3);
    const Form theta = cosine(64, 1.0);
    auto c = flat_curve(v_theta(theta), -0.5, 0.5, 11, 0.3);
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c.finite(k)) c.entries[k] = random_potential(theta, rng) - 2.0;
    const auto m = maximize_curve(theta, c);
    for (std::size_t k = 0; k < m.size(); ++k)
        if (m.finite(k)) EXPECT_LE(sup_full_diff(*m.entries[k], c.base), 1e-10);
}

TEST(Maximize, PresetKeepsMassesRisesAndIsIdempotent) {
    const Form theta = cosine(64, 2.0);
    const auto c = preset_pole_curve(theta, 16, -0.25, 2.0, 21);
    const auto m = maximize_curve(theta, c);
    for (std::size_t k = 0; k < c.size(); ++k) {
        ASSERT_EQ(m.finite(k), c.finite(k));
        if (!c.finite(k)) continue;
        EXPECT_EQ(m.entries[k]->poles(), c.entries[k]->poles());
        const auto a = m.entries[k]->full_values(), b = c.entries[k]->full_values();
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_GE(a[i], b[i] - 1e-12);
    }
    EXPECT_LE(maximality_defect(theta, m), 1e-10);
}

TEST(InverseLegendre, FlatCurveGivesLinearRay) {
    SplitMix64 rng(4);
    const Form theta = cosine(32, 1.0);
    const auto phi = random_potential(theta, rng);
    const double a = 0.4;
    const auto c = flat_curve(phi, -0.5, 1.0, 16, a);
    const auto t = uniform_grid(0.0, 2.0, 9);
    const auto ray = inverse_legendre(c, t);
    EXPECT_LE(sup_full_diff(ray.slices[0], phi), 1e-15);
    for (std::size_t q = 0; q < t.size(); ++q)
        EXPECT_LE(sup_full_diff(ray.slices[q], phi + t[q] * a), 1e-14);
}

TEST(HatTransform, LinearRayEntryAndBottomAbove) {
    SplitMix64 rng(5);
    const Form theta = cosine(32, 1.0);
    const auto phi = random_potential(theta, rng);
    const double a = 0.25;
    Ray ray;
    ray.t = uniform_grid(0.0, 2.0, 17);
    ray.origin = phi;
    for (double t : ray.t) ray.slices.push_back(phi + t * a);
    const auto tau = uniform_grid(-0.5, 1.0, 7);  // includes 0.25
    const auto c = hat_transform(ray, tau);
    for (std::size_t k = 0; k < tau.size(); ++k) {
        if (tau[k] > a + 1e-12) {
            EXPECT_FALSE(c.finite(k));
            EXPECT_TRUE(c.horizon_flags[k]);
        } else if (std::abs(tau[k] - a) < 1e-12) {
            ASSERT_TRUE(c.finite(k));
            EXPECT_LE(sup_full_diff(*c.entries[k], phi), 1e-14);
        }
    }
}

TEST(HatTransform, ShortHorizonIsReported) {
    const Form theta = cosine(64, 2.0);
    const auto c = maximize_curve(theta, preset_pole_curve(theta, 32, -0.25, 2.0, 41));
    const auto ray = inverse_legendre(c, uniform_grid(0.0, 1e-3, 3));
    EXPECT_THROW(hat_transform(ray, c.tau), NumericalError);
}

TEST(RoundTrip, MaximizedPresetWithinBudgetAndHalving) {
    const Form theta = cosine(64, 2.0);
    std::vector<double> err;
    for (std::size_t m : {41u, 81u}) {
        const auto c = maximize_curve(theta, preset_pole_curve(theta, 32, -0.25, 2.0, m));
        const double horizon = std::max(1.0, 2.0 * minimal_horizon(c));
        const auto back = hat_transform(inverse_legendre(c, uniform_grid(0.0, horizon, 257)), c.tau);
        double d = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            ASSERT_EQ(back.finite(k), c.finite(k));
            if (c.finite(k)) d = std::max(d, sup_full_diff(*back.entries[k], *c.entries[k]));
        }
        EXPECT_LE(d, c.spacing() * horizon + 1e-10);
        err.push_back(d);
    }
    EXPECT_LE(err[1], 0.5 * err[0] + 1e-10);
}

TEST(Ray, PoleFreeCurveGivesConstantSlopeRay) {
    SplitMix64 rng(6);
    const Form theta = cosine(32, 1.0);
    auto c = flat_curve(v_theta(theta), -0.5, 0.5, 11, 0.3);
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c.finite(k)) c.entries[k] = random_potential(theta, rng) - 1.0;
    const auto t = uniform_grid(0.0, 1.0, 5);
    const auto ray = construct_ray(theta, c, t);
    const double top = c.tau[c.top_index()];
    for (std::size_t q = 0; q < t.size(); ++q)
        EXPECT_LE(sup_full_diff(ray.slices[q], c.base + t[q] * top), 1e-10);
}

TEST(Ray, WellDefinedThroughMaximization) {
    const Form theta = cosine(64, 2.0);
    const auto c = preset_pole_curve(theta, 32, -0.25, 2.0, 21);
    auto lowered = c;
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c.finite(k) && c.tau[k] > -0.25) lowered.entries[k] = *c.entries[k] - 0.3;
    const auto t = uniform_grid(0.0, 1.0, 9);
    const auto a = construct_ray(theta, c, t);
    const auto b = construct_ray(theta, lowered, t);
    for (std::size_t q = 0; q < t.size(); ++q) EXPECT_LE(sup_full_diff(a.slices[q], b.slices[q]), 1e-9);
}

TEST(Ray, CappedRaysIncreaseToConstructedRay) {
    const Form theta = cosine(64, 2.0);
    const auto c = preset_pole_curve(theta, 32, -0.25, 2.0, 21);
    const auto t = uniform_grid(0.0, 1.0, 9);
    const auto full = construct_ray(theta, c, t);
    std::optional<Ray> prev;
    for (double cap : {0.01, 0.1, 1.0, 10.0}) {
        const auto r = capped_ray(theta, c, cap, t);
        for (std::size_t q = 0; q < t.size(); ++q) {
            const auto a = r.slices[q].full_values(), b = full.slices[q].full_values();
            for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(a[i], b[i] + 1e-9);
            if (prev) {
                const auto p = prev->slices[q].full_values();
                for (std::size_t i = 0; i < a.size(); ++i) EXPECT_GE(a[i], p[i] - 1e-9);
            }
        }
        prev = r;
    }
}
