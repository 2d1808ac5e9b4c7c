#include "e1lab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "e1lab/errors.hpp"
#include "e1lab/rng.hpp"

namespace e1lab {

namespace {

using nlohmann::json;

void only_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(std::string(where) + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!known) throw SchemaError(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get(const json& j, const char* key, T fallback, const char* where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string(where) + "." + key + ": " + e.what());
    }
}

std::vector<double> real_array(const json& j, const char* where) {
    if (!j.is_array()) throw SchemaError(std::string(where) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw SchemaError(std::string(where) + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<Pole> parse_poles(const json& j, const char* where) {
    if (!j.is_array()) throw SchemaError(std::string(where) + ": expected an array of {node, mass}");
    std::vector<Pole> out;
    for (const auto& e : j) {
        only_keys(e, where, {"node", "mass"});
        if (!e.contains("node") || !e.contains("mass")) throw SchemaError(std::string(where) + ": pole needs node and mass");
        out.push_back({get<std::size_t>(e, "node", 0, where), get<double>(e, "mass", 0.0, where)});
    }
    return out;
}

json poles_json(const std::vector<Pole>& poles) {
    json a = json::array();
    for (const auto& p : poles) a.push_back({{"node", p.node}, {"mass", p.mass}});
    return a;
}

PotentialSpec parse_potential(const json& j, const std::string& where) {
    const char* w = where.c_str();
    only_keys(j, w, {"kind", "value", "shift", "seed", "values", "poles", "base"});
    PotentialSpec p;
    p.kind = get<std::string>(j, "kind", "", w);
    static const std::set<std::string> kinds = {"constant", "random", "v_theta", "green", "values", "singular"};
    if (!kinds.count(p.kind)) throw SchemaError(where + ": unknown kind '" + p.kind + "'");
    p.value = get<double>(j, "value", 0.0, w);
    p.shift = get<double>(j, "shift", 0.0, w);
    if (j.contains("seed")) p.seed = get<std::uint64_t>(j, "seed", 0, w);
    if (j.contains("values")) p.values = real_array(j.at("values"), w);
    if (j.contains("poles")) p.poles = parse_poles(j.at("poles"), w);
    if (j.contains("base")) p.base = std::make_shared<PotentialSpec>(parse_potential(j.at("base"), where + ".base"));
    if (p.kind == "values" && p.values.empty()) throw SchemaError(where + ": 'values' kind needs values");
    if ((p.kind == "green" || p.kind == "singular") && p.poles.empty())
        throw SchemaError(where + ": '" + p.kind + "' kind needs poles");
    return p;
}

json potential_json(const PotentialSpec& p) {
    json j{{"kind", p.kind}};
    if (p.kind == "constant") j["value"] = p.value;
    if (p.kind == "random" && p.seed) j["seed"] = *p.seed;
    if (p.kind == "v_theta" || p.kind == "singular" || p.kind == "random") j["shift"] = p.shift;
    if (p.kind == "values") j["values"] = p.values;
    if (!p.poles.empty()) j["poles"] = poles_json(p.poles);
    if (p.base) j["base"] = potential_json(*p.base);
    return j;
}

void check_poles(const Scenario& s, const std::vector<Pole>& poles, const std::string& where) {
    for (const auto& p : poles) {
        if (p.node >= s.n) throw DomainError(where + ": pole node out of range");
        if (!s.marked_poles.empty() &&
            std::find(s.marked_poles.begin(), s.marked_poles.end(), p.node) == s.marked_poles.end())
            throw DomainError(where + ": pole at node " + std::to_string(p.node) + " is not in marked_poles");
    }
}

void check_potential(const Scenario& s, const PotentialSpec& p, const std::string& where) {
    check_poles(s, p.poles, where);
    if (p.kind == "values" && p.values.size() != s.n)
        throw DomainError(where + ": values must have n = " + std::to_string(s.n) + " entries");
    if (p.kind == "singular" && p.base && p.base->kind != "singular") check_potential(s, *p.base, where + ".base");
    if (p.kind == "singular" && p.base && p.base->kind == "singular")
        throw DomainError(where + ": base of a singular potential must be pole-free");
}

}  // namespace

Form Scenario::form() const {
    const CircleGrid grid(n);
    if (form_kind == "uniform") return Form::uniform(grid);
    if (form_kind == "cosine") return Form::cosine(grid, cosine_a);
    return Form::from_samples(grid, form_samples);
}

namespace {

Potential build(const Scenario& s, const Form& theta, const PotentialSpec& p, std::uint64_t default_seed) {
    const CircleGrid& grid = theta.grid();
    if (p.kind == "constant") return Potential::constant(grid, p.value);
    if (p.kind == "random") {
        SplitMix64 rng(p.seed.value_or(default_seed));
        return random_potential(theta, rng) + p.shift;
    }
    if (p.kind == "v_theta") return v_theta(theta) + p.shift;
    if (p.kind == "green") return Potential(std::vector<double>(s.n, 0.0), p.poles);
    if (p.kind == "values") {
        Potential u(p.values, p.poles);
        const auto sh = theta_sh_check(theta, u, theta.tol_pos());
        if (!sh.ok) throw DomainError("potential values are not theta-subharmonic");
        return u;
    }
    // singular
    const Potential psi(std::vector<double>(s.n, 0.0), p.poles);
    const Potential phi = p.base ? build(s, theta, *p.base, default_seed) : v_theta(theta);
    return envelope_singularity(theta, psi, phi, s.envelope_settings) + p.shift;
}

}  // namespace

Potential Scenario::potential(const Form& theta, const std::string& name) const {
    auto it = potentials.find(name);
    if (it == potentials.end()) throw SchemaError("scenario has no potential named '" + name + "'");
    const auto slot = static_cast<std::uint64_t>(std::distance(potentials.begin(), it));
    return build(*this, theta, it->second, seed + slot);
}

json Scenario::canonical() const {
    json j;
    j["grid"] = {{"n", n}};
    json f{{"kind", form_kind}};
    if (form_kind == "cosine") f["a"] = cosine_a;
    if (form_kind == "samples") f["samples"] = form_samples;
    j["form"] = f;
    j["marked_poles"] = marked_poles;
    j["potentials"] = json::object();
    for (const auto& [k, p] : potentials) j["potentials"][k] = potential_json(p);
    if (obstacle_values) j["obstacle"] = {{"values", *obstacle_values}, {"poles", poles_json(obstacle_poles)}};
    j["geodesic"] = {{"length", geodesic.length}, {"slices", geodesic.slices}, {"stencil_radius", geodesic.stencil_radius},
                     {"max_sweeps", geodesic_settings.max_sweeps}};
    j["ray"] = {{"tau_minus", ray.tau_minus}, {"slope", ray.slope},     {"tau_nodes", ray.tau_nodes},
                {"t_slices", ray.t_slices},   {"horizon", ray.horizon}, {"pole", ray.pole.value_or(n / 2)}};
    j["cauchy"] = {{"length", cauchy.length}, {"max_j", cauchy.max_j}, {"max_k", cauchy.max_k},
                   {"first", cauchy.first},   {"decay", cauchy.decay}};
    j["tolerances"] = {{"tol_env_rel", envelope_settings.tol_env_rel},
                       {"tol_contact_rel", envelope_settings.tol_contact_rel},
                       {"tol_e_rel", energy_settings.tol_e_rel},
                       {"tol_geo_rel", geodesic_settings.tol_geo_rel}};
    j["seed"] = seed;
    return j;
}

Scenario parse_scenario(const json& j, const ScenarioOverrides& ov) {
    only_keys(j, "scenario",
              {"grid", "form", "marked_poles", "potentials", "obstacle", "geodesic", "ray", "cauchy", "tolerances", "seed"});
    Scenario s;
    if (j.contains("grid")) {
        only_keys(j.at("grid"), "grid", {"n"});
        s.n = get<std::size_t>(j.at("grid"), "n", s.n, "grid");
    }
    s.seed = get<std::uint64_t>(j, "seed", s.seed, "scenario");
    if (ov.n) s.n = *ov.n;
    if (ov.seed) s.seed = *ov.seed;
    if (s.n < 8) throw DomainError("grid.n must be at least 8");

    if (j.contains("form")) {
        const auto& f = j.at("form");
        only_keys(f, "form", {"kind", "a", "samples"});
        s.form_kind = get<std::string>(f, "kind", "uniform", "form");
        if (s.form_kind == "cosine") {
            s.cosine_a = get<double>(f, "a", 0.0, "form");
        } else if (s.form_kind == "samples") {
            if (!f.contains("samples")) throw SchemaError("form: 'samples' kind needs samples");
            s.form_samples = real_array(f.at("samples"), "form.samples");
            if (s.form_samples.size() != s.n) throw DomainError("form.samples must have n entries");
        } else if (s.form_kind != "uniform") {
            throw SchemaError("form: unknown kind '" + s.form_kind + "'");
        }
    }
    if (j.contains("marked_poles")) {
        try {
            s.marked_poles = j.at("marked_poles").get<std::vector<std::size_t>>();
        } catch (const json::exception& e) {
            throw SchemaError(std::string("marked_poles: ") + e.what());
        }
        for (auto p : s.marked_poles)
            if (p >= s.n) throw DomainError("marked_poles: node out of range");
    }
    if (j.contains("potentials")) {
        const auto& pj = j.at("potentials");
        if (!pj.is_object()) throw SchemaError("potentials: expected an object");
        for (auto it = pj.begin(); it != pj.end(); ++it)
            s.potentials[it.key()] = parse_potential(it.value(), "potentials." + it.key());
    }
    for (const auto& [k, p] : s.potentials) check_potential(s, p, "potentials." + k);
    if (j.contains("obstacle")) {
        const auto& o = j.at("obstacle");
        only_keys(o, "obstacle", {"values", "poles"});
        if (!o.contains("values")) throw SchemaError("obstacle needs values");
        s.obstacle_values = real_array(o.at("values"), "obstacle.values");
        if (s.obstacle_values->size() != s.n) throw DomainError("obstacle.values must have n entries");
        if (o.contains("poles")) s.obstacle_poles = parse_poles(o.at("poles"), "obstacle.poles");
        check_poles(s, s.obstacle_poles, "obstacle");
    }
    if (j.contains("geodesic")) {
        const auto& g = j.at("geodesic");
        only_keys(g, "geodesic", {"length", "slices", "stencil_radius", "max_sweeps"});
        s.geodesic.length = get<double>(g, "length", s.geodesic.length, "geodesic");
        s.geodesic.slices = get<std::size_t>(g, "slices", s.geodesic.slices, "geodesic");
        s.geodesic.stencil_radius = get<int>(g, "stencil_radius", s.geodesic.stencil_radius, "geodesic");
        s.geodesic_settings.max_sweeps =
            get<std::size_t>(g, "max_sweeps", s.geodesic_settings.max_sweeps, "geodesic");
        if (!(s.geodesic.length > 0.0) || s.geodesic.slices < 3 || s.geodesic.stencil_radius < 1 ||
            s.geodesic_settings.max_sweeps < 1)
            throw DomainError("geodesic: need length > 0, slices >= 3, stencil_radius >= 1, max_sweeps >= 1");
    }
    s.geodesic_settings.stencil_radius = s.geodesic.stencil_radius;
    if (j.contains("ray")) {
        const auto& r = j.at("ray");
        only_keys(r, "ray", {"pole", "tau_minus", "slope", "tau_nodes", "t_slices", "horizon"});
        if (r.contains("pole")) s.ray.pole = get<std::size_t>(r, "pole", 0, "ray");
        s.ray.tau_minus = get<double>(r, "tau_minus", s.ray.tau_minus, "ray");
        s.ray.slope = get<double>(r, "slope", s.ray.slope, "ray");
        s.ray.tau_nodes = get<std::size_t>(r, "tau_nodes", s.ray.tau_nodes, "ray");
        s.ray.t_slices = get<std::size_t>(r, "t_slices", s.ray.t_slices, "ray");
        s.ray.horizon = get<double>(r, "horizon", s.ray.horizon, "ray");
        if (!(s.ray.slope > 0.0) || s.ray.tau_nodes < 3 || s.ray.t_slices < 2 || !(s.ray.horizon > 0.0))
            throw DomainError("ray: need slope > 0, tau_nodes >= 3, t_slices >= 2, horizon > 0");
    }
    if (s.ray.pole) check_poles(s, {{*s.ray.pole, 1.0}}, "ray");
    if (j.contains("cauchy")) {
        const auto& c = j.at("cauchy");
        only_keys(c, "cauchy", {"length", "max_j", "max_k", "first", "decay"});
        s.cauchy.length = get<std::size_t>(c, "length", s.cauchy.length, "cauchy");
        s.cauchy.max_j = get<std::size_t>(c, "max_j", s.cauchy.max_j, "cauchy");
        s.cauchy.max_k = get<std::size_t>(c, "max_k", s.cauchy.max_k, "cauchy");
        s.cauchy.first = get<double>(c, "first", s.cauchy.first, "cauchy");
        s.cauchy.decay = get<double>(c, "decay", s.cauchy.decay, "cauchy");
        if (s.cauchy.max_k >= s.cauchy.length || s.cauchy.max_j > s.cauchy.max_k)
            throw DomainError("cauchy: need max_j <= max_k < length");
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        only_keys(t, "tolerances", {"tol_env_rel", "tol_contact_rel", "tol_e_rel", "tol_geo_rel"});
        s.envelope_settings.tol_env_rel = get<double>(t, "tol_env_rel", s.envelope_settings.tol_env_rel, "tolerances");
        s.envelope_settings.tol_contact_rel =
            get<double>(t, "tol_contact_rel", s.envelope_settings.tol_contact_rel, "tolerances");
        s.energy_settings.tol_e_rel = get<double>(t, "tol_e_rel", s.energy_settings.tol_e_rel, "tolerances");
        s.geodesic_settings.tol_geo_rel = get<double>(t, "tol_geo_rel", s.geodesic_settings.tol_geo_rel, "tolerances");
    }
    return s;
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& ov) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read scenario " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return parse_scenario(j, ov);
}

}  // namespace e1lab
