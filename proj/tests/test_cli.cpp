#include "frontal/errors.hpp"
#include "frontal/parallel.hpp"
#include "frontal/report.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace frontal;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const json& verdict(const json& report, const std::string& name) {
    for (const auto& v : report["verdicts"])
        if (v["name"] == name)
            return v;
    throw std::runtime_error("no verdict " + name);
}

std::size_t error_line(const std::string& text) {
    try {
        parse_scene(text);
    } catch (const SceneError& e) {
        return e.line();
    } catch (const ParseError&) {
        return 1000;
    }
    return 0;
}

fs::path temp_dir() {
    const auto p = fs::temp_directory_path() / ("frontal_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const auto p = temp_dir() / name;
    std::ofstream(p) << text;
    return p;
}

struct Shell {
    int status = 0;
    std::string out;
};

Shell shell(const std::string& args) {
    const std::string cmd = std::string(FRONTAL_CLI_PATH) + " " + args + " 2>/dev/null";
    Shell r;
    FILE* p = ::popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
        r.out.append(buf.data(), n);
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

const std::string kCurve = "id = c\n"
                           "dim = 1\n"
                           "ambient = 2\n"
                           "domain = circle\n"
                           "[chart.t]\n"
                           "vars = t\n"
                           "box = (0, 2*pi)\n"
                           "periodic = true\n"
                           "f = (cos(t), sin(t))\n"
                           "tangent = (-sin(t), cos(t))\n";

RunOptions quick() {
    RunOptions o;
    o.samples = 200;
    return o;
}

} // namespace

TEST(SceneFile, ParseErrorsCarryLineAndColumn) {
    EXPECT_EQ(error_line("id = x\ndim = 1\nambient = 2\nfoo\n"), 4u);
    try {
        parse_scene("id = c\ndim = 1\nambient = 2\ndomain = circle\n[chart.t]\nvars = t\nbox = (0, 1)\n"
                    "f = (cos(s), t)\ntangent = (1, 0)\n");
        FAIL();
    } catch (const SceneError& e) {
        EXPECT_EQ(e.line(), 8u);
        EXPECT_EQ(e.column(), 10u);
        EXPECT_NE(std::string(e.what()).find("'s'"), std::string::npos);
    }
    EXPECT_EQ(error_line("id = x\ndim = 4\nambient = 5\ndomain = other\n"), 2u);
    EXPECT_GT(error_line(kCurve + "bogus = 1\n"), 0u);
    EXPECT_EQ(error_line(kCurve), 0u);
}

TEST(SceneFile, ParametersAndOverrides) {
    const std::string text = "param a = 2\n" + kCurve;
    const auto spec = parse_scene(text);
    EXPECT_EQ(spec.parameters.at("a"), 2.0);
    EXPECT_EQ(parse_scene(text, {{"a", 0.5}}).parameters.at("a"), 0.5);
    EXPECT_THROW(parse_scene(text, {{"b", 1.0}}), SceneError);
    const auto fk = load_catalog_scene("fk", {{"k", 0.25}});
    EXPECT_EQ(fk.spec().parameters.at("k"), 0.25);
    const double u[2] = {0.3, 0.2};
    const auto scaled = load_catalog_scene("fk", {{"k", 0.5}});
    EXPECT_NEAR(scaled.position(0, u)[2], 2.0 * fk.position(0, u)[2], 1e-15);
}

TEST(SceneFile, LetsResolveAcrossSections) {
    const std::string text = "id = c\ndim = 1\nambient = 2\ndomain = circle\n"
                             "let r = 1 + s^2\n"
                             "f = (r*cos(t), r*sin(t))\n"
                             "tangent = (-sin(t), cos(t))\n"
                             "[chart.t]\nvars = t\nbox = (0, 2*pi)\nperiodic = true\nlet s = 0\n";
    const auto s = load_scene_text(text);
    const double u[1] = {0.4};
    EXPECT_NEAR(s.position(0, u)[0], std::cos(0.4), 1e-15);
}

TEST(SceneFile, CatalogShapes) {
    const auto disk = load_catalog_scene("flat_disk");
    EXPECT_EQ(disk.chart_count(), 6);
    EXPECT_EQ(disk.spec().domain, DomainKind::Sphere);
    EXPECT_EQ(disk.spec().betti, (std::vector<int>{1, 0, 1}));
    const auto torus = load_catalog_scene("torus");
    EXPECT_EQ(torus.chart_count(), 1);
    EXPECT_EQ(torus.spec().betti, (std::vector<int>{1, 2, 1}));
    const auto germ = load_catalog_scene("a3_germ");
    EXPECT_EQ(germ.spec().domain, DomainKind::GermWindow);
    EXPECT_TRUE(germ.spec().betti.empty());
    EXPECT_FALSE(germ.closed());
    EXPECT_EQ(germ.n(), 3);
    EXPECT_EQ(germ.m(), 4);
    EXPECT_EQ(catalog_entries().size(), 9u);
    EXPECT_THROW(catalog_text("klein_bottle"), SceneError);
}

TEST(SceneFile, ValidationFailureIsSceneError) {
    auto text = testing_support::latlong_disk_text();
    text.replace(text.find("(0, 0, 1)"), 9, "(0, 0, 2)");
    try {
        load_scene_text(text);
        FAIL();
    } catch (const SceneError& e) {
        EXPECT_NE(std::string(e.what()).find("norm"), std::string::npos) << e.what();
    }
}

TEST(SceneFile, FileOrCatalogName) {
    const auto p = write_file("circle.scene", kCurve);
    EXPECT_EQ(load_scene(p.string()).id(), "c");
    EXPECT_EQ(load_scene("ellipse").id(), "ellipse");
    EXPECT_THROW(load_scene((temp_dir() / "missing.scene").string()), SceneError);
}

TEST(Report, VerifyFlatDisk) {
    const auto out = run("verify", "flat_disk", quick());
    EXPECT_EQ(out.exit_code, kExitOk);
    const auto& r = out.report;
    EXPECT_EQ(r["schema_version"], kSchemaVersion);
    EXPECT_EQ(r["scene"]["id"], "flat_disk");
    EXPECT_EQ(r["singular"]["admissibility"], "admissible");
    EXPECT_EQ(verdict(r, "convex_equality_case")["status"], "pass");
    EXPECT_EQ(verdict(r, "convex_equality_case")["values"]["equality_case"], 1.0);
    EXPECT_EQ(verdict(r, "lower_bound")["values"]["tight"], 1.0);
    EXPECT_FALSE(r.contains("error"));
}

TEST(Report, TauFk) {
    const auto out = run("tau", "fk", quick());
    EXPECT_EQ(out.exit_code, kExitOk);
    const double g = 4.0 * (1.0 - 1.0 / std::sqrt(2.0));
    EXPECT_NEAR(out.report["tau"]["tau"].get<double>(), 2.0 + g, 1e-5);
    EXPECT_NEAR(out.report["tau"]["singular_part"].get<double>(), 2.0, 1e-6);
    EXPECT_TRUE(out.report["morse"].is_null());
}

TEST(Report, VerifyTorusIsTight) {
    const auto out = run("verify", "torus", quick());
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_EQ(verdict(out.report, "lower_bound")["status"], "pass");
    EXPECT_EQ(verdict(out.report, "lower_bound")["values"]["tight"], 1.0);
    EXPECT_EQ(verdict(out.report, "sphere_recognition")["status"], "inapplicable");
}

TEST(Report, SingularGerm) {
    const auto out = run("singular", "a3_germ", quick());
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_EQ(out.report["singular"]["admissibility"], "admissible");
    EXPECT_GT(out.report["singular"]["second_kind"].size(), 0u);
}

TEST(Report, ErrorsMapToExitCodes) {
    auto missing = run("tau", (temp_dir() / "nope.scene").string(), quick());
    EXPECT_EQ(missing.exit_code, kExitInput);
    EXPECT_EQ(missing.report["error"]["kind"], "input");
    const auto bad = write_file("bad.scene", "id = x\ndim = 1\nambient = 2\nfoo\n");
    const auto parse = run("singular", bad.string(), quick());
    EXPECT_EQ(parse.exit_code, kExitInput);
    EXPECT_NE(parse.report["error"]["message"].get<std::string>().find("line 4"), std::string::npos);
    const auto cusp = write_file("cusp.scene", "id = flat_cusp\ndim = 1\nambient = 2\ndomain = circle\n"
                                               "[chart.t]\nvars = t\nbox = (0, 2*pi)\nperiodic = true\n"
                                               "f = (cos(t)^3 / 3 - cos(t), 0)\ntangent = (1, 0)\n");
    EXPECT_EQ(run("tau", cusp.string(), quick()).exit_code, kExitInput);
}

TEST(Report, GermHasNoTotalCurvature) {
    const auto out = run("tau", "a3_germ", quick());
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_TRUE(out.report["tau"].is_null());
}

TEST(Report, ByteReproducible) {
    set_thread_count(1);
    const auto a = format_json(run("all", "astroid", quick()).report);
    set_thread_count(4);
    const auto b = format_json(run("all", "astroid", quick()).report);
    const auto c = format_json(run("all", "astroid", quick()).report);
    set_thread_count(0);
    EXPECT_EQ(a, b);
    EXPECT_EQ(b, c);
}

TEST(Report, CatalogExpectedValuesHold) {
    const auto out = run_catalog("all", quick());
    ASSERT_TRUE(out.report.is_array());
    ASSERT_EQ(out.report.size(), catalog_entries().size());
    EXPECT_EQ(out.exit_code, kExitOk);
    for (const auto& r : out.report) {
        const std::string id = r["scene"]["id"];
        if (id == "a3_germ")
            continue;
        EXPECT_EQ(verdict(r, "catalog_expected")["status"], "pass") << id;
        EXPECT_EQ(verdict(r, "monte_carlo_consistency")["status"], "pass") << id;
    }
}

TEST(Report, FormatJson) {
    json doc;
    doc["x"] = 0.1;
    doc["n"] = std::numeric_limits<double>::quiet_NaN();
    doc["v"] = {1, 2.5, 3};
    doc["o"] = json::object();
    const auto text = format_json(doc);
    EXPECT_NE(text.find("\"x\": 0.10000000000000001"), std::string::npos) << text;
    EXPECT_NE(text.find("\"n\": null"), std::string::npos);
    EXPECT_NE(text.find("\"v\": [1, 2.5, 3]"), std::string::npos);
    EXPECT_EQ(json::parse(text)["v"][1], 2.5);
    EXPECT_EQ(text.back(), '\n');
}

TEST(Report, CatalogListing) {
    const auto list = catalog_listing()["catalog"];
    ASSERT_EQ(list.size(), 9u);
    EXPECT_EQ(list[0]["name"], "unit_circle");
    EXPECT_TRUE(is_subcommand("verify"));
    EXPECT_FALSE(is_subcommand("plot"));
}

TEST(Binary, VersionAndUsage) {
    const auto v = shell("--version");
    EXPECT_EQ(v.status, 0);
    EXPECT_NE(v.out.find(kToolVersion), std::string::npos);
    EXPECT_EQ(shell("plot flat_disk").status, kExitInput);
    EXPECT_EQ(shell("tau").status, kExitInput);
    EXPECT_EQ(shell("tau unit_circle --param k").status, kExitInput);
    EXPECT_EQ(shell("tau unit_circle --tol -1").status, kExitInput);
}

TEST(Binary, CatalogAndTau) {
    const auto c = shell("catalog");
    EXPECT_EQ(c.status, 0);
    EXPECT_EQ(json::parse(c.out)["catalog"].size(), 9u);
    const auto t = shell("tau astroid");
    EXPECT_EQ(t.status, 0);
    EXPECT_NEAR(json::parse(t.out)["tau"]["tau"].get<double>(), 6.0, 1e-6);
    const auto k = shell("tau fk --param k=0.25");
    EXPECT_EQ(k.status, 0);
    EXPECT_EQ(json::parse(k.out)["config"]["parameters"]["k"], 0.25);
    EXPECT_EQ(shell("tau " + (temp_dir() / "nope.scene").string()).status, kExitInput);
}

TEST(Binary, OutputFileAndCsv) {
    const auto dir = temp_dir() / "csv";
    fs::remove_all(dir);
    const auto file = temp_dir() / "report.json";
    const auto r = shell("all astroid --samples 100 --emit-csv " + dir.string() + " -o " + file.string());
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(r.out.empty());
    std::stringstream ss;
    ss << std::ifstream(file).rdbuf();
    auto from_file = json::parse(ss.str());
    auto from_stdout = json::parse(shell("all astroid --samples 100").out);
    EXPECT_EQ(from_file["config"]["emit_csv"], dir.string());
    from_file["config"].erase("emit_csv");
    from_stdout["config"].erase("emit_csv");
    EXPECT_EQ(from_file, from_stdout);
    for (const char* f : {"astroid_sigma.csv", "astroid_lambda.csv", "astroid_morse.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
}
