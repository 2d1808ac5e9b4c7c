// e1lab command-line driver.
//
//   e1lab <command> [--scenario FILE] [--out DIR] [--seed S] [--n N] [--check-level fast|full]
//
// Exit codes: 0 ok, 1 a checked property failed, 2 schema or domain error,
// 3 numerical divergence (residual.json is written to the output directory).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "e1lab/commands.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/record.hpp"

namespace {

void dump_residual(const std::string& dir, const std::string& command, const e1lab::NumericalError& e) {
    nlohmann::json j{{"command", command}, {"error", e.what()}, {"residual", e.residual()}};
    try {
        std::filesystem::create_directories(dir);
        e1lab::write_text((std::filesystem::path(dir) / "residual.json").string(), e1lab::dump_json(j) + "\n");
    } catch (const std::exception&) {
        // The exit code still reports the divergence.
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete finite-energy potential theory on the circle"};
    app.require_subcommand(1, 1);

    std::string scenario_path, out_dir = "e1lab_out", level = "full";
    std::optional<std::uint64_t> seed;
    std::size_t n = 0;
    for (const auto& name : e1lab::command_names()) {
        auto* sub = app.add_subcommand(name, e1lab::command_description(name));
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "run seed (default 7)");
        sub->add_option("--n", n, "grid size (overrides the scenario)");
        sub->add_option("--check-level", level, "property suite size")->check(CLI::IsMember({"fast", "full"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        e1lab::ScenarioOverrides ov;
        ov.seed = seed;
        if (n > 0) ov.n = n;
        const auto scenario =
            scenario_path.empty() ? e1lab::parse_scenario(nlohmann::json::object(), ov) : e1lab::load_scenario(scenario_path, ov);
        e1lab::RunOptions opt;
        opt.full_check = level == "full";
        const auto out = e1lab::run_command(command, scenario, opt);
        e1lab::write_output(out, out_dir);
        const auto digest = e1lab::record_digest(out.record);
        for (const auto& c : out.record.claims)
            if (!c.pass) std::fprintf(stderr, "FAIL %s: %.6g > %.6g\n", c.name.c_str(), c.value, c.bound);
        std::printf("%s %s digest %s\n", command.c_str(), out.record.pass() ? "pass" : "FAIL", digest.c_str());
        return out.record.pass() ? 0 : 1;
    } catch (const e1lab::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        dump_residual(out_dir, command, e);
        return 3;
    } catch (const e1lab::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const e1lab::DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 2;
    }
}
