#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlbvp/geometry.hpp"

using namespace nlbvp;
using namespace nlbvp::geom;

namespace {

constexpr double kPi = std::numbers::pi;

double min_angle(const Mesh& mesh) {
    double best = kPi;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const Point& a = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            const Point& b = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
            const Point& c = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)])];
            double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - a.x, vy = c.y - a.y;
            double cosang = (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy));
            best = std::min(best, std::acos(std::clamp(cosang, -1.0, 1.0)));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("domain scaling") {
    DomainSpec ann{Annulus{1.0, 2.0, 2}};
    DomainSpec scaled = scale(ann, 3.0);
    CHECK(scaled.annulus().inner_radius == doctest::Approx(3.0));
    CHECK(scaled.annulus().outer_radius == doctest::Approx(6.0));

    DomainSpec same = scale(ann, 1.0);
    CHECK(same.annulus().inner_radius == 1.0);
    CHECK(same.annulus().outer_radius == 2.0);

    DomainSpec mh{MultiHole{{{0.0, 0.0}, 5.0}, {{{2.0, 0.0}, 0.5}, {{0.0, 0.0}, 0.7}}}};
    DomainSpec mh2 = scale(mh, 2.0);
    const auto& holes = std::get<MultiHole>(mh2.shape).holes;
    CHECK(holes[0].center.x == doctest::Approx(4.0));
    CHECK(holes[0].radius == doctest::Approx(1.0));

    CHECK_THROWS_AS(scale(ann, 0.0), NonPositiveScale);
    CHECK_THROWS_AS(scale(ann, -2.0), NonPositiveScale);
}

TEST_CASE("multi-hole validation") {
    // Origin inside a hole: fine.
    DomainSpec ok{MultiHole{{{0.0, 0.0}, 5.0}, {{{0.0, 0.0}, 0.7}, {{2.0, 0.0}, 0.5}}}};
    CHECK_NOTHROW(ok.validate());
    // Origin inside the region: rejected.
    DomainSpec bad{MultiHole{{{0.0, 0.0}, 5.0}, {{{2.0, 0.0}, 0.5}}}};
    CHECK_THROWS_AS(bad.validate(), InvariantViolation);
    // Overlapping holes: rejected.
    DomainSpec overlap{MultiHole{{{10.0, 0.0}, 5.0}, {{{10.0, 0.0}, 1.0}, {{10.5, 0.0}, 1.0}}}};
    CHECK_THROWS_AS(overlap.validate(), InvariantViolation);
    // Hole escaping the outer disk: rejected.
    DomainSpec escape{MultiHole{{{10.0, 0.0}, 2.0}, {{{11.5, 0.0}, 1.0}}}};
    CHECK_THROWS_AS(escape.validate(), InvariantViolation);
}

TEST_CASE("annulus capacity closed form") {
    CHECK(annulus_capacity(1.0, 2.0) == doctest::Approx(9.064720283654388).epsilon(1e-14));
    CHECK(annulus_capacity(1.0, std::numbers::e) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    // Scale invariance in 2D.
    for (double lam : {0.5, 2.0, 17.0})
        CHECK(annulus_capacity(lam, 2.0 * lam) == doctest::Approx(annulus_capacity(1.0, 2.0)));
    // cap(A_{1,lambda}) decreases in lambda.
    CHECK(annulus_capacity(1.0, 3.0) > annulus_capacity(1.0, 4.0));
    CHECK_THROWS_AS(annulus_capacity(2.0, 1.0), InvalidRadii);
    CHECK_THROWS_AS(annulus_capacity(0.0, 1.0), InvalidRadii);
}

TEST_CASE("capacity scaling law") {
    CHECK(capacity_scaling(2, 7.3, 5.0) == doctest::Approx(5.0));
    CHECK(capacity_scaling(3, 2.0, 5.0) == doctest::Approx(10.0));
    CHECK(capacity_scaling(4, 3.0, 1.0) == doctest::Approx(9.0));
    CHECK_THROWS_AS(capacity_scaling(1, 2.0, 1.0), InvariantViolation);
    CHECK_THROWS_AS(capacity_scaling(3, 0.0, 1.0), NonPositiveScale);
}

TEST_CASE("distance to boundary") {
    DomainSpec ann{Annulus{1.0, 2.0, 2}};
    CHECK(dist_to_boundary(ann, {1.5, 0.0}) == doctest::Approx(0.5));
    CHECK(dist_to_boundary(ann, {0.0, 2.0}) == doctest::Approx(0.0));
    CHECK(dist_to_boundary(ann, {1.1, 0.0}) == doctest::Approx(0.1));
    CHECK_THROWS_AS(dist_to_boundary(ann, {0.5, 0.0}), PointOutsideDomain);
    CHECK_THROWS_AS(dist_to_boundary(ann, {3.0, 0.0}), PointOutsideDomain);

    for (double lam : {2.0, 5.0}) {
        DomainSpec scaled = scale(ann, lam);
        CHECK(dist_to_boundary(scaled, {1.5 * lam, 0.0}) == doctest::Approx(lam / 2.0));
    }

    // 1-Lipschitz along sampled segments.
    std::mt19937 rng(42u);
    std::uniform_real_distribution<double> radius(1.0, 2.0), angle(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 200; ++trial) {
        double r1 = radius(rng), th1 = angle(rng);
        double r2 = radius(rng), th2 = angle(rng);
        Point p{r1 * std::cos(th1), r1 * std::sin(th1)};
        Point q{r2 * std::cos(th2), r2 * std::sin(th2)};
        double dp = dist_to_boundary(ann, p), dq = dist_to_boundary(ann, q);
        CHECK(std::fabs(dp - dq) <= std::hypot(p.x - q.x, p.y - q.y) + 1e-12);
    }
}

TEST_CASE("structured annulus mesh generation") {
    Mesh mesh = generate_annulus_mesh(1.0, 2.0, 4, 8);
    CHECK(mesh.node_count() == 40);
    CHECK(mesh.triangle_count() == 64);
    CHECK(mesh.boundary_edges.size() == 16);
    CHECK_NOTHROW(mesh.validate());
    CHECK(mesh.component_count() == 2);

    for (int t = 0; t < mesh.triangle_count(); ++t) CHECK(mesh.triangle_area(t) > 0.0);

    // Node radii on the exact radial lattice.
    for (const Point& p : mesh.nodes) {
        double r = std::hypot(p.x, p.y);
        double idx = (r - 1.0) * 4.0;
        CHECK(std::fabs(idx - std::round(idx)) < 1e-12);
    }

    CHECK_THROWS_AS(generate_annulus_mesh(1.0, 2.0, 0, 8), InvalidResolution);
    CHECK_THROWS_AS(generate_annulus_mesh(1.0, 2.0, 4, 2), InvalidResolution);
    CHECK_THROWS_AS(generate_annulus_mesh(2.0, 1.0, 4, 8), InvalidRadii);
}

TEST_CASE("refinement splits each triangle in four and projects the boundary") {
    Mesh base = generate_annulus_mesh(1.0, 2.0, 3, 12);
    Mesh fine = refine(base);
    CHECK(fine.triangle_count() == base.triangle_count() * 4);
    CHECK(fine.boundary_edges.size() == base.boundary_edges.size() * 2);
    CHECK_NOTHROW(fine.validate());

    // Edge count doubles per component, not just in total.
    for (int tag : {0, 1}) {
        auto count = [tag](const Mesh& m) {
            std::size_t n = 0;
            for (const auto& e : m.boundary_edges) n += (e.tag == tag);
            return n;
        };
        CHECK(count(fine) == 2 * count(base));
    }

    // Boundary midpoints land on the exact circles.
    auto tags = fine.boundary_tag_of_node();
    for (int i = 0; i < fine.node_count(); ++i) {
        if (tags[static_cast<std::size_t>(i)] < 0) continue;
        double r = std::hypot(fine.nodes[static_cast<std::size_t>(i)].x, fine.nodes[static_cast<std::size_t>(i)].y);
        double target = tags[static_cast<std::size_t>(i)] == 1 ? 1.0 : 2.0;
        CHECK(r == doctest::Approx(target).epsilon(1e-14));
    }

    // Shape regularity: the minimum angle degrades by less than 2x.
    CHECK(min_angle(fine) >= 0.5 * min_angle(base));

    double area_base = base.total_area();
    double area_fine = fine.total_area();
    CHECK(area_fine >= area_base - 1e-12);  // projection only adds area near circles
}

TEST_CASE("mesh file format round-trips") {
    Mesh mesh = refine(generate_annulus_mesh(1.0, 2.5, 3, 10));
    std::ostringstream out;
    write_mesh(mesh, out);
    std::istringstream in(out.str());
    Mesh back = read_mesh(in);
    REQUIRE(back.node_count() == mesh.node_count());
    REQUIRE(back.triangle_count() == mesh.triangle_count());
    REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
    for (int i = 0; i < mesh.node_count(); ++i) {
        CHECK(back.nodes[static_cast<std::size_t>(i)].x == mesh.nodes[static_cast<std::size_t>(i)].x);
        CHECK(back.nodes[static_cast<std::size_t>(i)].y == mesh.nodes[static_cast<std::size_t>(i)].y);
    }
    for (int t = 0; t < mesh.triangle_count(); ++t)
        CHECK(back.triangles[static_cast<std::size_t>(t)] == mesh.triangles[static_cast<std::size_t>(t)]);
}

TEST_CASE("mesh reader rejects malformed and invalid input") {
    // Comments and blank lines are fine.
    std::istringstream ok("# comment\nNONLOCAL-MESH v1\nnodes 4\n0 0\n1 0  # inline\n1 1\n0 1\n"
                          "triangles 2\n0 1 2\n0 2 3\nboundary_edges 4\n0 1 0\n1 2 0\n2 3 0\n3 0 0\n");
    CHECK_NOTHROW(read_mesh(ok));

    std::istringstream bad_header("MESH v2\n");
    CHECK_THROWS_AS(read_mesh(bad_header), ParseError);

    std::istringstream truncated("NONLOCAL-MESH v1\nnodes 3\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(truncated), ParseError);

    // Zero-area triangle: invariant gate.
    std::istringstream degenerate("NONLOCAL-MESH v1\nnodes 4\n0 0\n1 0\n2 0\n0 1\n"
                                  "triangles 2\n0 1 2\n0 1 3\nboundary_edges 0\n");
    CHECK_THROWS_AS(read_mesh(degenerate), InvariantViolation);

    // Boundary edge that is not a triangle edge.
    std::istringstream phantom("NONLOCAL-MESH v1\nnodes 4\n0 0\n1 0\n1 1\n0 1\n"
                               "triangles 2\n0 1 2\n0 2 3\nboundary_edges 5\n0 1 0\n1 2 0\n2 3 0\n3 0 0\n1 3 3\n");
    CHECK_THROWS_AS(read_mesh(phantom), InvariantViolation);

    // Untagged boundary edge (missing from the list).
    std::istringstream missing("NONLOCAL-MESH v1\nnodes 4\n0 0\n1 0\n1 1\n0 1\n"
                               "triangles 2\n0 1 2\n0 2 3\nboundary_edges 3\n0 1 0\n1 2 0\n2 3 0\n");
    CHECK_THROWS_AS(read_mesh(missing), InvariantViolation);
}

TEST_CASE("punch_hole exposes a new tagged loop") {
    Mesh punched = punch_hole(generate_annulus_mesh(0.6, 3.0, 24, 48), {1.8, 0.0}, 0.35, 2);
    CHECK(punched.component_count() == 3);
    CHECK_NOTHROW(punched.validate());

    // Cutting into an existing boundary is rejected.
    CHECK_THROWS_AS(punch_hole(generate_annulus_mesh(0.6, 3.0, 24, 48), {3.0, 0.0}, 0.4, 2),
                    InvariantViolation);
}

TEST_CASE("scale_mesh dilates nodes and circle metadata") {
    Mesh mesh = generate_annulus_mesh(1.0, 2.0, 3, 8);
    Mesh big = scale_mesh(mesh, 3.0);
    CHECK(std::hypot(big.nodes[0].x, big.nodes[0].y) == doctest::Approx(3.0));
    CHECK(big.total_area() == doctest::Approx(9.0 * mesh.total_area()));
    CHECK_THROWS_AS(scale_mesh(mesh, 0.0), NonPositiveScale);
}

TEST_CASE("node boundary distance on the mesh polyline") {
    Mesh mesh = generate_annulus_mesh(1.0, 2.0, 4, 64);
    // A node on the middle ring is ~0.5 from both circles (polyline is
    // slightly inside, so allow the sagitta).
    int mid = 2 * 64;  // ring 2, sector 0
    double d = node_boundary_distance(mesh, mid);
    CHECK(d == doctest::Approx(0.5).epsilon(2e-3));
    // Boundary nodes have distance zero.
    CHECK(node_boundary_distance(mesh, 0) == doctest::Approx(0.0));
}
