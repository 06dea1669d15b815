#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "nlbvp/geometry.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(NLBVP_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), n);
    int status = pclose(pipe);
    res.exit_code = WEXITSTATUS(status);
    return res;
}

std::string config_path(const char* name) {
    return std::string(NLBVP_CONFIG_DIR) + "/" + name;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "nlbvp_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("oracle subcommand evaluates the Example 2 determinant") {
    auto res = run("oracle --example 2 --c0 critical --lambda 7.2831853");
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(std::fabs(j["det"].get<double>()) <= 1e-9);
    REQUIRE(j["roots_critical"].size() == 6);
    CHECK(j["roots_critical"][1].get<double>() == doctest::Approx(7.283185307179586));
}

TEST_CASE("oracle subcommand classifies Example 1") {
    auto res = run("oracle --example 1 --g 0.15915494309189535 --lambda 1.3169578969248166 --bi 1");
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(j["lambda_star"].get<double>() == doctest::Approx(1.3169578969248166).epsilon(1e-9));
    CHECK(j["classification"] == "NoSolution");

    auto unique = run("oracle --example 1 --g 0.15915494309189535 --lambda 2.6 --bi 1");
    CHECK(json::parse(unique.output)["classification"] == "Unique");
}

TEST_CASE("classify subcommand reports Unique away from the root lattice") {
    auto res = run("classify --config " + config_path("example2.toml") + " --lambda 6.0");
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(j["classification"] == "Unique");
    CHECK(j["engine"] == "oracle");
    CHECK(j["det"].get<double>() < 0.0);

    // Determinism: identical invocations produce byte-identical output.
    auto again = run("classify --config " + config_path("example2.toml") + " --lambda 6.0");
    CHECK(again.output == res.output);
}

TEST_CASE("capacity subcommand hits the analytic annulus value") {
    auto out = (temp_dir() / "capacity").string();
    auto res = run("capacity --config " + config_path("annulus12.toml") + " --out " + out);
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(j["analytic_value"].get<double>() == doctest::Approx(9.064720283654388));
    CHECK(j["relative_error"].get<double>() < 0.01);
    CHECK(std::filesystem::exists(out + "/capacity.json"));
}

TEST_CASE("solve subcommand writes the field CSV and report") {
    auto out = (temp_dir() / "solve").string();
    auto res = run("solve --config " + config_path("example2_fem.toml") + " --out " + out);
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(j["classification"] == "Unique");
    CHECK(j["fixed_point_residual"].get<double>() <= 1e-6);
    CHECK(j["decay_envelope"]["M_star"].get<double>() > 0.0);
    CHECK(j["decay_envelope"]["max_margin"].get<double>() <= 1e-9);

    std::ifstream csv(out + "/solution.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "node,x,y,value");
}

TEST_CASE("mesh-file domains run through solve") {
    auto dir = temp_dir();
    auto mesh_path = (dir / "three.mesh").string();
    nlbvp::geom::write_mesh_file(
        nlbvp::geom::punch_hole(nlbvp::geom::generate_annulus_mesh(0.6, 3.0, 24, 48),
                                {1.8, 0.0}, 0.35, 2),
        mesh_path);

    auto cfg_path = (dir / "mesh_domain.toml").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "[domain]\nkind = \"mesh\"\nmesh_path = \"" << mesh_path
            << "\"\nlambda = 1.0\n\n[coefficients]\npreset = \"zero\"\nh = \"1\"\n\n"
            << "[boundary]\ncomponents = 3\nb = [0.3, 0.7, -0.2]\n"
            << "g = [\"0.05\", \"0.1*exp(-r)\", \"0.02\"]\n";
    }

    auto out = (dir / "mesh_solve").string();
    auto res = run("solve --config " + cfg_path + " --out " + out);
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(j["classification"] == "Unique");
    REQUIRE(j["B"].size() == 3);
    CHECK(j["fixed_point_residual"].get<double>() <= 1e-9);
    CHECK(std::filesystem::exists(out + "/solution.csv"));
}

TEST_CASE("sweep subcommand emits CSV, JSON and refined roots") {
    auto out = (temp_dir() / "sweep").string();
    auto res = run("sweep --config " + config_path("example2.toml") + " --out " + out);
    REQUIRE(res.exit_code == 0);

    std::ifstream csv(out + "/sweep.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "lambda,det,classification,B0,B1,cond,seconds");

    std::ifstream jf(out + "/sweep.json");
    REQUIRE(jf.good());
    json j = json::parse(jf);
    REQUIRE(j["roots"].size() == 3);
    CHECK(j["roots"][0]["root"].get<double>() == doctest::Approx(4.355890089177974).epsilon(1e-6));
    CHECK(j["roots"][1]["root"].get<double>() == doctest::Approx(7.283185307179586).epsilon(1e-6));
    CHECK(j["roots"][2]["root"].get<double>() == doctest::Approx(10.63907539635756).epsilon(1e-6));
}

namespace {

// CSV with the wall-time column blanked (timings vary run to run).
std::string strip_seconds(const std::string& csv) {
    std::string out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string::npos) eol = csv.size();
        std::string line = csv.substr(pos, eol - pos);
        auto comma = line.rfind(',');
        if (comma != std::string::npos) line.erase(comma);
        out += line + "\n";
        pos = eol + 1;
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("sweep output is deterministic apart from timings") {
    auto out1 = (temp_dir() / "det1").string();
    auto out2 = (temp_dir() / "det2").string();
    REQUIRE(run("sweep --config " + config_path("example2.toml") + " --out " + out1).exit_code == 0);
    REQUIRE(run("sweep --config " + config_path("example2.toml") + " --out " + out2).exit_code == 0);
    CHECK(strip_seconds(slurp(out1 + "/sweep.csv")) == strip_seconds(slurp(out2 + "/sweep.csv")));
}

TEST_CASE("config errors exit with code 2") {
    auto bad = temp_dir() / "broken.toml";
    std::ofstream f(bad);
    f << "[domain]\nkind = \"annulus\"\ninner_radius = \"2\"\nouter_radius = \"1\"\n";
    f.close();
    auto res = run("classify --config " + bad.string());
    CHECK(res.exit_code == 2);

    auto missing = run("classify --config /nonexistent/nowhere.toml");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("example1 config reports a near-zero FEM determinant at lambda*") {
    auto res = run("classify --config " + config_path("example1.toml") + " --engine fem");
    REQUIRE(res.exit_code == 0);
    auto j = json::parse(res.output);
    CHECK(std::fabs(j["det"].get<double>()) <= 5e-3);
}
