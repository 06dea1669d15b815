#include <doctest.h>

#include <cmath>

#include "nlbvp/config.hpp"
#include "nlbvp/pipeline.hpp"
#include "nlbvp/radial_oracle.hpp"

using namespace nlbvp;
using namespace nlbvp::config;

namespace {

const char* kExample2 = R"(
# Example 2 instance
[domain]
kind = "annulus"
inner_radius = "1"
outer_radius = "lambda"
dimension = 2
lambda = 4.0

[coefficients]
a_r = "1/r"
h = "1"

[boundary]
components = 2
b = [0.0, 1.0]
g = ["0", "0.5*exp(-r)*sin(r)/r"]

[discretization]
nr = 8
ntheta = 16
refinements = 1
n_points = 256

[sweep]
lambda_min = 1.5
lambda_max = 12.0
steps = 50
tol = 1e-6
engine = "oracle"

[classify]
kappa = 0.01

[oracle]
example = 2
c0 = 0.5
)";

}  // namespace

TEST_CASE("full config parses into the expected fields") {
    auto cfg = parse_config(kExample2);
    CHECK(cfg.kind == DomainKind::Annulus);
    CHECK(cfg.lambda == 4.0);
    CHECK(cfg.components == 2);
    REQUIRE(cfg.b.size() == 2);
    CHECK(cfg.b[1] == 1.0);
    REQUIRE(cfg.weights.size() == 2);
    CHECK(cfg.weight_sources[1] == "0.5*exp(-r)*sin(r)/r");
    CHECK(cfg.nr == 8);
    CHECK(cfg.refinements == 1);
    CHECK(cfg.steps == 50);
    CHECK(cfg.engine == "oracle");
    CHECK(cfg.example == 2);
    REQUIRE(cfg.c0.has_value());
    CHECK(*cfg.c0 == 0.5);
    CHECK(std::get_if<fem::RadialDrift>(&cfg.drift) != nullptr);

    expr::Bindings env;
    env.lambda(4.0);
    CHECK(cfg.outer_radius.eval(env) == 4.0);
}

TEST_CASE("critical keyword leaves c0 unset") {
    std::string text(kExample2);
    text.replace(text.find("c0 = 0.5"), 8, "c0 = \"critical\"");
    auto cfg = parse_config(text);
    CHECK_FALSE(cfg.c0.has_value());
}

TEST_CASE("defaults fill boundary data with zeros") {
    auto cfg = parse_config(R"(
[domain]
kind = "annulus"
inner_radius = "1"
outer_radius = "2"
lambda = 1.0
)");
    CHECK(cfg.components == 2);
    REQUIRE(cfg.b.size() == 2);
    CHECK(cfg.b[0] == 0.0);
    REQUIRE(cfg.weights.size() == 2);
}

TEST_CASE("config errors carry the offending line") {
    // Malformed section.
    CHECK_THROWS_AS(parse_config("[domain\nkind = \"annulus\"\n"), ParseError);
    // Key outside a section.
    CHECK_THROWS_AS(parse_config("kind = \"annulus\"\n"), ParseError);
    // Duplicate key.
    CHECK_THROWS_AS(parse_config("[domain]\nlambda = 1\nlambda = 2\n"), ParseError);
    // Unquoted string.
    CHECK_THROWS_AS(parse_config("[domain]\nkind = annulus\n"), ParseError);
    // Bad expression reports through ParseError with the line number.
    try {
        parse_config("[domain]\nkind = \"annulus\"\ninner_radius = \"(1+\"\nouter_radius = \"2\"\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("semantic validation") {
    // Mismatched counts.
    CHECK_THROWS_AS(parse_config(R"(
[domain]
kind = "annulus"
inner_radius = "1"
outer_radius = "2"
[boundary]
components = 2
b = [1.0]
)"),
                    InvariantViolation);
    // Bad engine.
    CHECK_THROWS_AS(parse_config(R"(
[domain]
kind = "annulus"
inner_radius = "1"
outer_radius = "2"
[sweep]
lambda_min = 1.0
lambda_max = 2.0
steps = 10
engine = "exact"
)"),
                    InvariantViolation);
    // Oracle engine demands radial data.
    CHECK_THROWS_AS(parse_config(R"(
[domain]
kind = "annulus"
inner_radius = "1"
outer_radius = "2"
[coefficients]
a_x = "1"
a_y = "0"
[sweep]
lambda_min = 1.0
lambda_max = 2.0
steps = 10
engine = "oracle"
)"),
                    InvariantViolation);
    // Radii must be positive at the configured lambda.
    CHECK_THROWS_AS(parse_config(R"(
[domain]
kind = "annulus"
inner_radius = "2"
outer_radius = "1"
)"),
                    InvalidRadii);
}

TEST_CASE("oracle engine weights must be radial") {
    std::string text(kExample2);
    text.replace(text.find("g = [\"0\", \"0.5*exp(-r)*sin(r)/r\"]"), 34,
                 "g = [\"0\", \"0.5*x\"]          ");
    CHECK_THROWS_AS(parse_config(text), InvariantViolation);
}

TEST_CASE("pipeline instantiates configured problems") {
    auto cfg = parse_config(kExample2);

    auto mesh = pipeline::build_mesh(cfg, 4.0);
    CHECK(mesh->component_count() == 2);
    // 8x16 refined once: (2*8+1) rings of 32 nodes.
    CHECK(mesh->node_count() == 17 * 32);

    double det_oracle = pipeline::det_at(cfg, pipeline::Engine::Oracle, 4.0);
    CHECK(det_oracle == doctest::Approx(oracle::example2_det(4.0, 0.5)).epsilon(1e-14));

    double det_fem = pipeline::det_at(cfg, pipeline::Engine::Fem, 4.0);
    CHECK(det_fem == doctest::Approx(det_oracle).epsilon(0.01));

    auto inst = pipeline::oracle_instance(cfg, 4.0);
    CHECK(inst.system.r(0, 0) == 0.0);
    CHECK(inst.system.r(0, 1) == 0.0);
    CHECK(inst.basis.size() == 2);
    // Sampled closed-form basis boundary values.
    CHECK(inst.basis[1].values.front() == doctest::Approx(1.0));
    CHECK(std::fabs(inst.basis[1].values.back()) <= 1e-14);

    auto cls = nonlocal::classify(inst.system, pipeline::eps_det_for(cfg, inst.system));
    REQUIRE(cls.kind == nonlocal::Kind::Unique);
    double resid = pipeline::oracle_fixed_point_residual(cfg, inst, cls.coefficients);
    CHECK(resid <= 1e-9 * 2.0);
}

TEST_CASE("generic oracle engine matches closed forms on Example 2 data") {
    std::string text(kExample2);
    text.replace(text.find("example = 2"), 11, "example = 0");
    auto cfg = parse_config(text);
    cfg.n_points = 4096;
    double det_fd = pipeline::det_at(cfg, pipeline::Engine::Oracle, 4.0);
    CHECK(det_fd == doctest::Approx(oracle::example2_det(4.0, 0.5)).epsilon(1e-5));
}
