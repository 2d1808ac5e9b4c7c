#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "e1lab/commands.hpp"
#include "e1lab/errors.hpp"
#include "e1lab/record.hpp"
#include "e1lab/scenario.hpp"

#include <sys/wait.h>

using namespace e1lab;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("e1lab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(E1LAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json constants_scenario() {
    return json::parse(R"({
        "grid": {"n": 64},
        "form": {"kind": "uniform"},
        "potentials": {"u": {"kind": "constant", "value": 0}, "v": {"kind": "constant", "value": -1}}
    })");
}

}  // namespace

TEST(Scenario, DefaultsAndCanonicalForm) {
    const auto s = parse_scenario(json::object());
    EXPECT_EQ(s.n, 256u);
    EXPECT_EQ(s.seed, 7u);
    EXPECT_EQ(s.form_kind, "uniform");
    const auto c = s.canonical();
    EXPECT_EQ(c["grid"]["n"], 256);
    EXPECT_EQ(parse_scenario(json::object(), {.seed = 9, .n = 32}).n, 32u);
}

TEST(Scenario, SamplesAreRenormalized) {
    json j = {{"grid", {{"n", 8}}}, {"form", {{"kind", "samples"}, {"samples", std::vector<double>(8, 2.0)}}}};
    const auto s = parse_scenario(j);
    const auto out = run_command("venv", s);
    EXPECT_DOUBLE_EQ(out.record.scalars.at("form normalization factor"), 0.5);
}

TEST(Scenario, SchemaErrors) {
    EXPECT_THROW(parse_scenario(json{{"bogus", 1}}), SchemaError);
    EXPECT_THROW(parse_scenario(json{{"form", {{"kind", "triangle"}}}}), SchemaError);
    EXPECT_THROW(parse_scenario(json{{"potentials", {{"u", {{"kind", "green"}}}}}}), SchemaError);
    EXPECT_THROW(parse_scenario(json{{"grid", {{"n", "big"}}}}), SchemaError);
}

TEST(Scenario, PolesMustBeMarked) {
    json j = json::parse(R"({"grid": {"n": 32}, "marked_poles": [4],
        "potentials": {"u": {"kind": "green", "poles": [{"node": 5, "mass": 0.2}]}}})");
    EXPECT_THROW(parse_scenario(j), DomainError);
    j["potentials"]["u"]["poles"][0]["node"] = 4;
    const auto s = parse_scenario(j);
    const auto u = s.potential(s.form(), "u");
    EXPECT_DOUBLE_EQ(u.pole_mass(4), 0.2);
}

TEST(Scenario, SingularPresetCarriesPole) {
    json j = json::parse(R"({"grid": {"n": 64}, "form": {"kind": "cosine", "a": 1.0},
        "potentials": {"u": {"kind": "singular", "poles": [{"node": 16, "mass": 0.3}], "base": {"kind": "random", "seed": 3}}}})");
    const auto s = parse_scenario(j);
    const auto theta = s.form();
    const auto u = s.potential(theta, "u");
    EXPECT_DOUBLE_EQ(u.pole_mass(16), 0.3);
    EXPECT_TRUE(theta_sh_check(theta, u, theta.tol_pos()).ok);
}

TEST(Commands, DistOnConstants) {
    const auto out = run_command("dist", parse_scenario(constants_scenario()));
    EXPECT_NEAR(out.record.scalars.at("d1"), 1.0, 1e-12);
    EXPECT_NEAR(out.record.scalars.at("I1"), 2.0, 1e-12);
    EXPECT_NEAR(out.record.scalars.at("I1/24"), 2.0 / 24.0, 1e-12);
    EXPECT_TRUE(out.record.pass());
    EXPECT_EQ(out.files.count("dist.csv"), 1u);
}

TEST(Commands, EveryCommandRunsOnSmallGrid) {
    json j = json::parse(R"({"grid": {"n": 32}, "form": {"kind": "cosine", "a": 1.5},
        "geodesic": {"slices": 9}, "ray": {"tau_nodes": 21, "t_slices": 65},
        "cauchy": {"length": 6, "max_j": 2, "max_k": 4}})");
    const auto s = parse_scenario(j);
    for (const auto& cmd : command_names()) {
        if (cmd == "check") continue;
        const auto out = run_command(cmd, s);
        EXPECT_EQ(out.record.command, cmd);
        EXPECT_FALSE(out.files.empty()) << cmd;
        EXPECT_EQ(record_digest(out.record), record_digest(run_command(cmd, s).record)) << cmd;
    }
}

TEST(Commands, BottomEnvelopeReported) {
    json j = constants_scenario();
    j["obstacle"] = {{"values", std::vector<double>(64, 0.0)}, {"poles", {{{"node", 3}, {"mass", 0.6}}, {{"node", 9}, {"mass", 0.6}}}}};
    const auto out = run_command("envelope", parse_scenario(j));
    EXPECT_EQ(out.record.scalars.at("bottom"), 1.0);
    j["obstacle"]["poles"] = {{{"node", 3}, {"mass", 0.6}}};
    EXPECT_EQ(run_command("envelope", parse_scenario(j)).record.scalars.at("bottom"), 0.0);
}

TEST(Record, CsvAndJsonFormatting) {
    EXPECT_EQ(csv_table({"a", "b"}, {{1.0, 0.1}, {2.0, -0.5}}), "a,b\n1,2\n0.10000000000000001,-0.5\n");
    EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "\"-inf\"");
    ResultRecord r;
    r.command = "x";
    r.scalars["v"] = 0.1;
    const auto text = dump_json(record_json(r));
    EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
    EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Cli, ExitCodesAndDeterminism) {
    const auto dir = scratch_dir("cli");
    const auto scen = dir / "dist.json";
    std::ofstream(scen) << constants_scenario().dump();
    EXPECT_EQ(run_cli("dist --scenario " + scen.string() + " --out " + (dir / "a").string()), 0);
    EXPECT_EQ(run_cli("dist --scenario " + scen.string() + " --out " + (dir / "b").string()), 0);
    const auto a = json::parse(read_file(dir / "a" / "result.json"));
    const auto b = json::parse(read_file(dir / "b" / "result.json"));
    EXPECT_EQ(a["digest"], b["digest"]);
    EXPECT_NEAR(a["scalars"]["d1"].get<double>(), 1.0, 1e-12);
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / "dist.csv"));

    const auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"grid": {"n": 32}, "surprise": true})";
    EXPECT_EQ(run_cli("venv --scenario " + bad.string() + " --out " + (dir / "c").string()), 2);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run_cli("venv --scenario " + (dir / "broken.json").string() + " --out " + (dir / "d").string()), 2);
    EXPECT_EQ(run_cli("venv --check-level medium"), 2);
}

TEST(Cli, DivergenceExitsThreeWithResidualDump) {
    const auto dir = scratch_dir("diverge");
    const auto scen = dir / "geo.json";
    std::ofstream(scen) << R"({"grid": {"n": 64}, "form": {"kind": "cosine", "a": 2.0},
        "geodesic": {"slices": 33, "max_sweeps": 1}})";
    EXPECT_EQ(run_cli("geodesic --scenario " + scen.string() + " --out " + dir.string()), 3);
    const auto dump = json::parse(read_file(dir / "residual.json"));
    EXPECT_EQ(dump["command"], "geodesic");
    EXPECT_TRUE(dump["residual"].is_number());
}
