#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlbvp/errors.hpp"

namespace nlbvp::geom {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Annular domain {R1 < |x| < R2} in dimension N. The full FEM path is
// two-dimensional; N >= 3 annuli are handled by the radial oracle only.
struct Annulus {
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    int dimension = 2;
};

struct Disk {
    Point center;
    double radius = 0.0;
};

// Outer disk with m disjoint hole disks; the origin must not lie in the
// closure of the resulting region so that radially singular coefficients
// stay well defined.
struct MultiHole {
    Disk outer;
    std::vector<Disk> holes;
};

struct ExternalMesh {
    std::string path;
};

struct DomainSpec {
    std::variant<Annulus, MultiHole, ExternalMesh> shape;

    void validate() const;
    bool is_annulus() const { return std::holds_alternative<Annulus>(shape); }
    const Annulus& annulus() const { return std::get<Annulus>(shape); }
};

// Dilation of the whole domain by factor `scale` (every radius and center
// is multiplied). Throws NonPositiveScale when scale <= 0.
DomainSpec scale(const DomainSpec& spec, double factor);

// H^1-capacity of the annulus {R1 < |x| < R2} in 2D: 2*pi / ln(R2/R1).
double annulus_capacity(double r1, double r2);

// cap(scaled domain) = scale^(N-2) * cap(base domain); constant in 2D.
double capacity_scaling(int dimension, double factor, double cap_base);

// Euclidean distance from x (inside the closed domain) to the union of
// boundary components. Throws PointOutsideDomain otherwise.
double dist_to_boundary(const DomainSpec& spec, Point x);

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int tag = 0;  // 0 = outer component, 1..m = inner components
};

// Circle metadata kept per boundary tag so refinement can project new
// boundary nodes back onto the exact circle. Meshes read from files do
// not carry this.
struct BoundaryCircle {
    int tag = 0;
    Point center;
    double radius = 0.0;
};

struct Mesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;   // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<BoundaryCircle> boundary_circles;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double triangle_area(int t) const;
    double total_area() const;

    // Number of distinct boundary tags (components).
    int component_count() const;

    // True when the node lies on some boundary edge; tag lookup.
    std::vector<int> boundary_tag_of_node() const;  // -1 for interior

    // Checks every structural invariant; throws InvariantViolation.
    void validate() const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// Structured polar grid on the annulus {R1 < |x| < R2}: (nr+1)*ntheta
// nodes, 2*nr*ntheta triangles, 2*ntheta boundary edges. Inner circle is
// tag 1, outer circle tag 0.
Mesh generate_annulus_mesh(double r1, double r2, int nr, int ntheta);

// Uniform refinement: each triangle splits into four via edge midpoints.
// Boundary midpoints are projected onto the exact circle when the parent
// mesh carries circle metadata for that tag.
Mesh refine(const Mesh& mesh);

// Removes every triangle within `radius` of `center`, tags the exposed
// edge loop with `new_tag`, and compacts node indices. The cut must not
// touch existing boundary components. Used to build multi-component test
// domains; the result is validated before being returned.
Mesh punch_hole(const Mesh& mesh, Point center, double radius, int new_tag);

// Scales all node coordinates by `factor` (the discrete dilation).
Mesh scale_mesh(const Mesh& mesh, double factor);

// Distance from a mesh node to the polyline boundary of its own mesh.
double node_boundary_distance(const Mesh& mesh, int node);

// Line-oriented ASCII format, '#' comments allowed:
//   NONLOCAL-MESH v1
//   nodes <n>             then n lines  "x y"
//   triangles <t>         then t lines  "i j k"
//   boundary_edges <e>    then e lines  "i j tag"
// Coordinates are written with 17 significant digits so write/read is
// the identity.
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

}  // namespace nlbvp::geom
