#include "e1lab/commands.hpp"

#include <filesystem>

#include "e1lab/cauchy.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/rays.hpp"
#include "e1lab/suite.hpp"

namespace e1lab {

namespace {

std::vector<double> nodes(const Form& theta) {
    std::vector<double> x(theta.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = theta.grid().node(i);
    return x;
}

Potential named(const Scenario& s, const Form& theta, const std::string& name) {
    if (s.potentials.count(name)) return s.potential(theta, name);
    SplitMix64 rng = SplitMix64(s.seed).fork(name == "u" ? 1 : name == "v" ? 2 : 3);
    return random_potential(theta, rng);
}

std::vector<double> slice_stat(const std::vector<Potential>& slices, int which) {
    std::vector<double> out;
    for (const auto& p : slices) {
        const auto v = p.full_values();
        if (which == 0) out.push_back(*std::min_element(v.begin(), v.end()));
        if (which == 1) out.push_back(*std::max_element(v.begin(), v.end()));
        if (which == 2) {
            double m = 0.0;
            for (double x : v) m += x;
            out.push_back(m / static_cast<double>(v.size()));
        }
    }
    return out;
}

void run_venv(const Scenario&, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    const Potential vt = v_theta(theta);
    const auto ma = ma_measure(theta, vt);
    const auto reg = vt.regular();
    std::size_t contact = 0;
    for (double x : reg) contact += x >= -1e-12 ? 1 : 0;
    rec.scalars["sup V_theta"] = sup_potential(vt);
    rec.scalars["osc V_theta"] = oscillation(reg);
    rec.scalars["ma(V_theta) mass"] = ma.mass;
    rec.scalars["contact nodes {V_theta = 0}"] = static_cast<double>(contact);
    const auto sh = theta_sh_check(theta, vt, theta.tol_pos());
    rec.residuals["theta-sh violation"] = -sh.worst_violation;
    rec.claims.push_back(make_claim("|sup V_theta|", std::abs(sup_potential(vt)), 1e-12));
    rec.claims.push_back(make_claim("theta-sh violation of V_theta", -sh.worst_violation, theta.tol_pos()));
    out.files["venv.csv"] = csv_table({"x", "theta", "V_theta", "ma"},
                                      {nodes(theta), std::vector<double>(theta.density().begin(), theta.density().end()),
                                       std::vector<double>(reg.begin(), reg.end()), ma.density});
}

void run_envelope(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    std::optional<Obstacle> ob;
    if (s.obstacle_values) {
        ob.emplace(*s.obstacle_values, s.obstacle_poles);
        rec.notes["obstacle"] = "scenario obstacle";
    } else {
        ob.emplace(min_obstacle(named(s, theta, "u"), named(s, theta, "v")));
        rec.notes["obstacle"] = "min(u, v)";
    }
    const auto r = envelope_below(theta, *ob, s.envelope_settings);
    rec.scalars["bottom"] = r.bottom() ? 1.0 : 0.0;
    std::vector<double> fvals(ob->size());
    for (std::size_t i = 0; i < fvals.size(); ++i) fvals[i] = ob->value(i);
    if (r.bottom()) {
        rec.notes["result"] = "BOTTOM: pole demand exceeds the mass of theta";
        out.files["envelope.csv"] = csv_table({"x", "obstacle"}, {nodes(theta), fvals});
        return;
    }
    const auto w = r.value().full_values();
    double above = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::isfinite(fvals[i])) above = std::max(above, w[i] - fvals[i]);
    const auto sh = theta_sh_check(theta, r.value(), theta.tol_pos());
    const double tol_contact = s.envelope_settings.tol_contact_rel * (1.0 + oscillation(r.value().regular()));
    rec.scalars["iterations"] = static_cast<double>(r.iterations);
    rec.scalars["polished"] = r.polished ? 1.0 : 0.0;
    rec.scalars["sup P(f)"] = sup_potential(r.value());
    rec.residuals["solver residual"] = r.residual;
    rec.residuals["contact defect"] = suite::contact_defect(theta, r);
    rec.claims.push_back(make_claim("max (P(f) - f)", above, tol_contact));
    rec.claims.push_back(make_claim("theta-sh violation of P(f)", -sh.worst_violation, theta.tol_pos()));
    rec.claims.push_back(make_claim("contact concentration defect", rec.residuals["contact defect"], 1e-6));
    std::vector<double> contact(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) contact[i] = r.contact_mask[i] ? 1.0 : 0.0;
    out.files["envelope.csv"] = csv_table({"x", "obstacle", "envelope", "contact"}, {nodes(theta), fvals, w, contact});
}

void run_energy(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    std::vector<std::string> names;
    for (const auto& [k, _] : s.potentials) names.push_back(k);
    if (names.empty()) names.push_back("u");
    std::vector<double> masses, values;
    for (const auto& name : names) {
        const auto u = named(s, theta, name);
        const auto e = energy(theta, u, s.energy_settings);
        rec.scalars["I(" + name + ")"] = e.finite() ? e.value : -std::numeric_limits<double>::infinity();
        rec.scalars["pole mass(" + name + ")"] = u.total_pole_mass();
        masses.push_back(u.total_pole_mass());
        values.push_back(rec.scalars["I(" + name + ")"]);
        std::vector<double> cs, is;
        for (const auto& [c, i] : e.truncation_trace) {
            cs.push_back(c);
            is.push_back(i);
        }
        if (!cs.empty()) out.files["energy_" + name + ".csv"] = csv_table({"C", "I_truncated"}, {cs, is});
    }
    // Rows follow the potential names in sorted order.
    out.files["energy.csv"] = csv_table({"pole_mass", "I"}, {masses, values});
}

void run_dist(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    const auto u = named(s, theta, "u");
    const auto v = named(s, theta, "v");
    const auto p = rooftop(theta, u, v, s.envelope_settings).value();
    const double iu = energy(theta, u, s.energy_settings).get();
    const double iv = energy(theta, v, s.energy_settings).get();
    const double ip = energy(theta, p, s.energy_settings).get();
    const double d = iu + iv - 2.0 * ip;
    const double j1 = i1(theta, u, v);
    rec.scalars["I(u)"] = iu;
    rec.scalars["I(v)"] = iv;
    rec.scalars["I(P(u,v))"] = ip;
    rec.scalars["d1"] = d;
    rec.scalars["I1"] = j1;
    rec.scalars["I1/24"] = j1 / 24.0;
    rec.claims.push_back(make_claim("I1/24 - d1", j1 / 24.0 - d, 1e-12));
    rec.claims.push_back(make_claim("d1 - I1", d - j1, 1e-9));
    rec.claims.push_back(make_claim("-d1", -d, 1e-8));
    out.files["dist.csv"] =
        csv_table({"x", "u", "v", "P"}, {nodes(theta), u.full_values(), v.full_values(), p.full_values()});
}

void run_geodesic(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    const auto u0 = named(s, theta, "u");
    const auto u1 = named(s, theta, "v");
    if (u0.has_poles() || u1.has_poles()) throw DomainError("geodesic: endpoints must be pole-free");
    const auto field = segment_solve(theta, u0, u1, s.geodesic.length, s.geodesic.slices, s.geodesic_settings);
    const auto rep = verify_geodesic(theta, field);
    const auto sc = speed_constants(field);
    const double tol_geo = s.geodesic_settings.tol_geo_rel * (1.0 + rep.boundary_oscillation);
    double boundary = std::max(suite::sup_abs_diff(field.slice_values(0), u0.regular()),
                               suite::sup_abs_diff(field.slice_values(field.slices() - 1), u1.regular()));
    rec.scalars["d1(phi0, phi1)"] = rep.d1_endpoints;
    rec.scalars["speed m"] = sc.m;
    rec.scalars["speed M"] = sc.M;
    rec.scalars["lipschitz"] = rep.lipschitz;
    rec.scalars["lipschitz bound sup|phi0 - phi1| / l"] = rep.lipschitz_bound;
    rec.residuals["metric-speed deviation"] = rep.metric_deviation;
    rec.residuals["energy-chord deviation"] = rep.energy_chord_deviation;
    rec.residuals["t-convexity violation"] = rep.t_convexity_violation;
    rec.residuals["slice theta-sh violation"] = rep.sh_violation;
    rec.claims.push_back(make_claim("metric-speed deviation", rep.metric_deviation, 5e-2 * rep.d1_endpoints));
    rec.claims.push_back(
        make_claim("energy-chord deviation", rep.energy_chord_deviation, 2e-2 * rep.boundary_oscillation));
    rec.claims.push_back(make_claim("boundary slices", boundary, 2.0 * tol_geo));
    rec.claims.push_back(make_claim("t-convexity violation", rep.t_convexity_violation, 2.0 * tol_geo));
    std::vector<Potential> slices;
    std::vector<double> t;
    for (std::size_t k = 0; k < field.slices(); ++k) {
        slices.push_back(field.slice(k));
        t.push_back(field.time(k));
    }
    out.files["geodesic.csv"] = csv_table({"t", "min", "max", "mean", "energy"},
                                          {t, slice_stat(slices, 0), slice_stat(slices, 1), slice_stat(slices, 2),
                                           rep.slice_energy});
}

void run_ray(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    const std::size_t p = s.ray.pole.value_or(s.n / 2);
    const auto curve = maximize_curve(theta, preset_pole_curve(theta, p, s.ray.tau_minus, s.ray.slope, s.ray.tau_nodes));
    const double horizon = std::max(s.ray.horizon, 2.0 * minimal_horizon(curve));
    const auto t = uniform_grid(0.0, horizon, s.ray.t_slices);
    const auto ray = inverse_legendre(curve, t);
    const auto back = hat_transform(ray, curve.tau);
    std::size_t mismatch = 0;
    const double rt = suite::max_curve_diff(curve, back, mismatch);
    const double defect = maximality_defect(theta, curve);
    const double budget = curve.spacing() * horizon + 1e-10;
    rec.scalars["horizon T"] = horizon;
    rec.scalars["tau_minus"] = curve.tau_minus;
    rec.scalars["tau_plus"] = curve.tau_plus;
    rec.residuals["maximality defect"] = defect;
    rec.residuals["curve round trip"] = rt;
    rec.claims.push_back(make_claim("maximality defect", defect, 1e-10));
    rec.claims.push_back(make_claim("curve round trip (budget h_tau T + 1e-10)", rt, budget));
    rec.claims.push_back(make_claim("round trip bottom mismatches", static_cast<double>(mismatch), 0.0));
    std::vector<double> en;
    for (const auto& sl : ray.slices) en.push_back(energy(theta, sl, s.energy_settings).get());
    out.files["ray.csv"] = csv_table({"t", "min", "max", "mean", "energy"},
                                     {ray.t, slice_stat(ray.slices, 0), slice_stat(ray.slices, 1),
                                      slice_stat(ray.slices, 2), en});
    std::vector<double> fin, sup;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        fin.push_back(curve.finite(k) ? 1.0 : 0.0);
        sup.push_back(curve.finite(k) ? sup_potential(*curve.entries[k]) : -std::numeric_limits<double>::infinity());
    }
    out.files["curve.csv"] = csv_table({"tau", "finite", "sup"}, {curve.tau, fin, sup});
}

void run_cauchy(const Scenario& s, const Form& theta, CommandOutput& out) {
    auto& rec = out.record;
    SplitMix64 rng = SplitMix64(s.seed).fork(11);
    const auto seq = cauchy_sequence(theta, rng, s.cauchy.length, s.cauchy.first, s.cauchy.decay);
    const auto rep = cauchy_report(theta, seq, s.cauchy.max_j, s.cauchy.max_k);
    rec.residuals["worst excess over 2^(1-j)"] = rep.worst_excess;
    rec.residuals["psi monotonicity"] = rep.psi_monotonicity;
    rec.scalars["tail start"] = static_cast<double>(rep.tail_start);
    rec.claims.push_back(make_claim("max d1(phi_j, psi_jk) - 2^(1-j)", rep.worst_excess, 1e-8));
    rec.claims.push_back(make_claim("max sup(psi_j - psi_{j+1})", rep.psi_monotonicity, 1e-12));
    rec.claims.push_back(make_claim("start of nonincreasing tail of d1(phi_j, psi)", static_cast<double>(rep.tail_start),
                                    static_cast<double>(s.cauchy.max_j)));
    std::vector<double> j, step, lim;
    for (std::size_t k = 0; k < rep.limit_dist.size(); ++k) {
        j.push_back(static_cast<double>(k));
        step.push_back(k < rep.step.size() ? rep.step[k] : 0.0);
        lim.push_back(rep.limit_dist[k]);
    }
    out.files["cauchy.csv"] = csv_table({"j", "d1_step", "d1_to_limit"}, {j, step, lim});
}

void run_check(const Scenario& s, const RunOptions& opt, CommandOutput& out) {
    SuiteSettings ss;
    ss.seed = s.seed;
    ss.n = s.n;
    ss.full = opt.full_check;
    const auto results = run_suite(ss);
    const auto sr = suite_record(results);
    out.record.claims = sr.claims;
    out.record.scalars = sr.scalars;
    std::vector<double> id, pass, count;
    for (const auto& c : results) {
        id.push_back(c.id);
        pass.push_back(c.pass() ? 1.0 : 0.0);
        count.push_back(static_cast<double>(c.claims.size()));
    }
    out.files["check.csv"] = csv_table({"criterion", "pass", "claims"}, {id, pass, count});
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"venv", "envelope", "energy", "dist",
                                                   "geodesic", "ray", "cauchy", "check"};
    return names;
}

std::string command_description(const std::string& command) {
    static const std::map<std::string, std::string> text = {
        {"venv", "envelope of the zero obstacle and its MA measure"},
        {"envelope", "envelope below an obstacle (default min(u, v))"},
        {"energy", "Monge-Ampere energy of each scenario potential"},
        {"dist", "d1(u, v), I1(u, v) and the rooftop envelope"},
        {"geodesic", "weak geodesic segment from u to v"},
        {"ray", "geodesic ray from the preset pole test curve"},
        {"cauchy", "limit of a d1-Cauchy decreasing sequence"},
        {"check", "full property and acceptance suite"}};
    const auto it = text.find(command);
    return it == text.end() ? std::string() : it->second;
}

CommandOutput run_command(const std::string& command, const Scenario& s, const RunOptions& opt) {
    CommandOutput out;
    out.record.command = command;
    auto inputs = s.canonical();
    inputs["command"] = command;
    if (command == "check") inputs["check_level"] = opt.full_check ? "full" : "fast";
    out.record.inputs_digest = hex64(fnv1a(dump_json(inputs, 0)));
    if (command == "check") {
        run_check(s, opt, out);
        return out;
    }
    const Form theta = s.form();
    out.record.scalars["form normalization factor"] = theta.normalization_factor();
    if (command == "venv") run_venv(s, theta, out);
    else if (command == "envelope") run_envelope(s, theta, out);
    else if (command == "energy") run_energy(s, theta, out);
    else if (command == "dist") run_dist(s, theta, out);
    else if (command == "geodesic") run_geodesic(s, theta, out);
    else if (command == "ray") run_ray(s, theta, out);
    else if (command == "cauchy") run_cauchy(s, theta, out);
    else throw SchemaError("unknown command '" + command + "'");
    return out;
}

void write_output(const CommandOutput& out, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw SchemaError("cannot create output directory " + dir + ": " + ec.message());
    const std::filesystem::path base(dir);
    write_text((base / "result.json").string(), dump_json(record_json(out.record)) + "\n");
    for (const auto& [name, text] : out.files) write_text((base / name).string(), text);
}

}  // namespace e1lab
