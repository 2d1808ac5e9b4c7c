#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "e1lab/energy.hpp"
#include "e1lab/envelope.hpp"
#include "e1lab/grid.hpp"
#include "e1lab/parallel.hpp"
#include "e1lab/rng.hpp"

namespace e1lab {

/// Finite-energy potentials sharing one singularity type. d1 satisfies the
/// metric axioms within a class; pairs from different classes are not mixed.
struct CorpusClass {
    std::string label;
    std::vector<Pole> poles;
    std::vector<Potential> items;
};

struct CorpusOptions {
    std::size_t pole_free_items = 14;
    std::size_t items_per_pole_class = 10;
};

/// Seeded mixed corpus:
///  - pole-free: random potentials, V_theta and two shifts of it, rooftops of
///    random items with V_theta, and one exact duplicate;
///  - one class per pole set: P[sum c G](u) + shift for random u.
inline std::vector<CorpusClass> build_corpus(const Form& theta, std::uint64_t seed, const CorpusOptions& opt = {}) {
    const std::size_t n = theta.size();
    SplitMix64 rng(seed);
    std::vector<CorpusClass> out;
    const Potential vt = v_theta(theta);

    CorpusClass free{"pole-free", {}, {}};
    free.items.push_back(vt);
    free.items.push_back(vt - 0.25);
    free.items.push_back(vt + 0.1);
    while (free.items.size() < opt.pole_free_items) {
        auto u = random_potential(theta, rng);
        if (free.items.size() % 3 == 0) u = rooftop(theta, u, vt).value();
        free.items.push_back(std::move(u));
    }
    free.items.push_back(free.items[3]);
    out.push_back(std::move(free));

    const std::vector<std::pair<std::string, std::vector<Pole>>> types = {
        {"single-pole", {{n / 4, 0.3}}},
        {"two-pole", {{n / 2, 0.2}, {(3 * n) / 4, 0.25}}},
    };
    for (const auto& [label, poles] : types) {
        CorpusClass c{label, poles, {}};
        const Potential psi(std::vector<double>(n, 0.0), poles);
        std::vector<Potential> bases;
        std::vector<double> shifts;
        for (std::size_t k = 0; k < opt.items_per_pole_class; ++k) {
            bases.push_back(random_potential(theta, rng));
            shifts.push_back(rng.uniform(-0.3, 0.3));
        }
        c.items.resize(bases.size());
        parallel_for(bases.size(), [&](std::size_t k) {
            c.items[k] = envelope_singularity(theta, psi, bases[k]) + shifts[k];
        });
        out.push_back(std::move(c));
    }
    return out;
}

/// Memoized energies, rooftops and distances over one corpus class.
class PairCache {
public:
    PairCache(const Form& theta, const CorpusClass& cls) : theta_(theta), cls_(cls) {
        energies_.resize(cls.items.size());
        parallel_for(cls.items.size(), [&](std::size_t i) { energies_[i] = energy(theta_, cls_.items[i]).get(); });
    }

    const Potential& item(std::size_t i) const { return cls_.items[i]; }
    std::size_t size() const { return cls_.items.size(); }
    double energy_of(std::size_t i) const { return energies_[i]; }

    /// P(item i, item j), computed with i, j in the given order.
    const Potential& roof(std::size_t i, std::size_t j) {
        {
            std::lock_guard lock(mutex_);
            auto it = roofs_.find({i, j});
            if (it != roofs_.end()) return it->second.first;
        }
        auto p = rooftop(theta_, item(i), item(j)).value();
        const double e = energy(theta_, p).get();
        std::lock_guard lock(mutex_);
        return roofs_.try_emplace({i, j}, std::move(p), e).first->second.first;
    }

    double roof_energy(std::size_t i, std::size_t j) {
        roof(i, j);
        std::lock_guard lock(mutex_);
        return roofs_.at({i, j}).second;
    }

    /// I(u_i) + I(u_j) - 2 I(P(u_i, u_j)) in the given order.
    double d1(std::size_t i, std::size_t j) { return energies_[i] + energies_[j] - 2.0 * roof_energy(i, j); }

private:
    const Form& theta_;
    const CorpusClass& cls_;
    std::vector<double> energies_;
    std::map<std::pair<std::size_t, std::size_t>, std::pair<Potential, double>> roofs_;
    std::mutex mutex_;
};

}  // namespace e1lab
