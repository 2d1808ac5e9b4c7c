#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "e1lab/energy.hpp"
#include "e1lab/envelope.hpp"
#include "e1lab/geodesic.hpp"
#include "e1lab/grid.hpp"

namespace e1lab {

/// How one named potential is produced.
///   constant  value
///   random    seed (defaults to the run seed plus the slot index)
///   v_theta   shift
///   green     poles  (pure singular part, sum c G_p)
///   values    values (regular part) and optional poles
///   singular  poles and base: P[sum c G](base) + shift
struct PotentialSpec {
    std::string kind = "random";
    double value = 0.0;
    double shift = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<double> values;
    std::vector<Pole> poles;
    std::shared_ptr<PotentialSpec> base;
};

struct GeodesicParams {
    double length = 1.0;
    std::size_t slices = 65;
    int stencil_radius = 2;
};

struct RayParams {
    std::optional<std::size_t> pole;  ///< default n / 2
    double tau_minus = -0.25;
    double slope = 2.0;
    std::size_t tau_nodes = 101;
    std::size_t t_slices = 257;
    double horizon = 1.0;  ///< raised to twice the minimal horizon when too small
};

struct CauchyParams {
    std::size_t length = 17;
    std::size_t max_j = 6;
    std::size_t max_k = 12;
    double first = 0.5;
    double decay = 0.25;
};

/// Parsed and validated run description.
struct Scenario {
    std::size_t n = 256;
    std::string form_kind = "uniform";  ///< uniform | cosine | samples
    double cosine_a = 0.0;
    std::vector<double> form_samples;
    std::vector<std::size_t> marked_poles;  ///< allowed pole nodes; empty means any
    std::map<std::string, PotentialSpec> potentials;
    std::optional<std::vector<double>> obstacle_values;
    std::vector<Pole> obstacle_poles;
    GeodesicParams geodesic;
    RayParams ray;
    CauchyParams cauchy;
    EnvelopeSettings envelope_settings;
    EnergySettings energy_settings;
    GeodesicSettings geodesic_settings;
    std::uint64_t seed = 7;

    Form form() const;
    Potential potential(const Form& theta, const std::string& name) const;
    /// Canonical JSON of the resolved scenario (defaults filled in).
    nlohmann::json canonical() const;
};

struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
};

/// Throws SchemaError on malformed input (unknown keys included) and
/// DomainError on values outside their ranges.
Scenario parse_scenario(const nlohmann::json& j, const ScenarioOverrides& ov = {});
Scenario load_scenario(const std::string& path, const ScenarioOverrides& ov = {});

}  // namespace e1lab
