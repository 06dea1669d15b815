#include "nlbvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace nlbvp::geom {

namespace {

constexpr double kPi = std::numbers::pi;

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double point_segment_distance(Point p, Point a, Point b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return dist(p, a);
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace

void DomainSpec::validate() const {
    if (const auto* ann = std::get_if<Annulus>(&shape)) {
        if (!(ann->inner_radius > 0.0) || !(ann->outer_radius > ann->inner_radius))
            throw InvalidRadii("annulus requires 0 < R1 < R2");
        if (ann->dimension < 2)
            throw InvariantViolation("annulus dimension must be >= 2");
        return;
    }
    if (const auto* mh = std::get_if<MultiHole>(&shape)) {
        if (!(mh->outer.radius > 0.0))
            throw InvalidRadii("outer disk radius must be positive");
        for (std::size_t i = 0; i < mh->holes.size(); ++i) {
            const Disk& h = mh->holes[i];
            if (!(h.radius > 0.0))
                throw InvalidRadii("hole radius must be positive");
            if (dist(h.center, mh->outer.center) + h.radius >= mh->outer.radius)
                throw InvariantViolation("hole closure must lie inside the open outer disk");
            for (std::size_t j = 0; j < i; ++j)
                if (dist(h.center, mh->holes[j].center) <= h.radius + mh->holes[j].radius)
                    throw InvariantViolation("hole closures must be pairwise disjoint");
        }
        // The origin may not belong to the closure of the region: either it
        // is outside the outer disk or strictly inside one of the holes.
        Point origin{0.0, 0.0};
        bool outside = dist(origin, mh->outer.center) > mh->outer.radius;
        bool in_hole = false;
        for (const Disk& h : mh->holes)
            in_hole = in_hole || dist(origin, h.center) < h.radius;
        if (!outside && !in_hole)
            throw InvariantViolation("origin must not lie in the closure of the domain");
        return;
    }
    // ExternalMesh: validated when the file is read.
}

DomainSpec scale(const DomainSpec& spec, double factor) {
    if (!(factor > 0.0))
        throw NonPositiveScale("scale factor must be positive");
    DomainSpec out = spec;
    if (auto* ann = std::get_if<Annulus>(&out.shape)) {
        ann->inner_radius *= factor;
        ann->outer_radius *= factor;
    } else if (auto* mh = std::get_if<MultiHole>(&out.shape)) {
        mh->outer.center.x *= factor;
        mh->outer.center.y *= factor;
        mh->outer.radius *= factor;
        for (Disk& h : mh->holes) {
            h.center.x *= factor;
            h.center.y *= factor;
            h.radius *= factor;
        }
    }
    return out;
}

double annulus_capacity(double r1, double r2) {
    if (!(r1 > 0.0) || !(r2 > r1))
        throw InvalidRadii("annulus_capacity requires 0 < R1 < R2");
    return 2.0 * kPi / std::log(r2 / r1);
}

double capacity_scaling(int dimension, double factor, double cap_base) {
    if (dimension < 2)
        throw InvariantViolation("dimension must be >= 2");
    if (!(factor > 0.0))
        throw NonPositiveScale("scale factor must be positive");
    if (cap_base < 0.0)
        throw InvariantViolation("capacity must be non-negative");
    return std::pow(factor, dimension - 2) * cap_base;
}

double dist_to_boundary(const DomainSpec& spec, Point x) {
    const double tol = 1e-12;
    if (const auto* ann = std::get_if<Annulus>(&spec.shape)) {
        double r = std::hypot(x.x, x.y);
        double scale = ann->outer_radius;
        if (r < ann->inner_radius - tol * scale || r > ann->outer_radius + tol * scale)
            throw PointOutsideDomain("point outside annulus closure");
        return std::max(0.0, std::min(r - ann->inner_radius, ann->outer_radius - r));
    }
    if (const auto* mh = std::get_if<MultiHole>(&spec.shape)) {
        double scale = mh->outer.radius;
        double d_outer = mh->outer.radius - dist(x, mh->outer.center);
        if (d_outer < -tol * scale)
            throw PointOutsideDomain("point outside outer disk");
        double d = std::max(0.0, d_outer);
        for (const Disk& h : mh->holes) {
            double dh = dist(x, h.center) - h.radius;
            if (dh < -tol * scale)
                throw PointOutsideDomain("point inside a hole");
            d = std::min(d, std::max(0.0, dh));
        }
        return d;
    }
    throw InvariantViolation("dist_to_boundary needs an analytic domain; use node_boundary_distance for meshes");
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Point& a = nodes[static_cast<std::size_t>(tri[0])];
    const Point& b = nodes[static_cast<std::size_t>(tri[1])];
    const Point& c = nodes[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::total_area() const {
    double area = 0.0;
    for (int t = 0; t < triangle_count(); ++t) area += triangle_area(t);
    return area;
}

int Mesh::component_count() const {
    int max_tag = -1;
    for (const auto& e : boundary_edges) max_tag = std::max(max_tag, e.tag);
    return max_tag + 1;
}

std::vector<int> Mesh::boundary_tag_of_node() const {
    std::vector<int> tags(nodes.size(), -1);
    for (const auto& e : boundary_edges) {
        tags[static_cast<std::size_t>(e.a)] = e.tag;
        tags[static_cast<std::size_t>(e.b)] = e.tag;
    }
    return tags;
}

void Mesh::validate() const {
    const int n = node_count();
    if (n == 0) throw InvariantViolation("mesh has no nodes");
    for (const Point& p : nodes)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvariantViolation("non-finite node coordinate");

    auto check_index = [n](int i) {
        if (i < 0 || i >= n) throw InvariantViolation("node index out of range");
    };

    double area = 0.0;
    for (int t = 0; t < triangle_count(); ++t) {
        for (int k = 0; k < 3; ++k) check_index(triangles[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]);
        area += triangle_area(t);
    }
    if (!(area > 0.0)) throw InvariantViolation("mesh has non-positive total area");
    const double min_area = 1e-14 * area;
    for (int t = 0; t < triangle_count(); ++t)
        if (!(triangle_area(t) > min_area))
            throw InvariantViolation("triangle " + std::to_string(t) +
                                     " has signed area below 1e-14 of the domain area");

    // Count how many triangles own each undirected edge.
    std::map<std::pair<int, int>, int> edge_owners;
    for (const auto& tri : triangles)
        for (int k = 0; k < 3; ++k) {
            int a = tri[static_cast<std::size_t>(k)], b = tri[static_cast<std::size_t>((k + 1) % 3)];
            edge_owners[std::minmax(a, b)] += 1;
        }
    for (const auto& [edge, owners] : edge_owners)
        if (owners > 2)
            throw InvariantViolation("edge shared by more than two triangles");

    std::set<std::pair<int, int>> boundary_set;
    std::map<int, int> node_tag;
    for (const auto& e : boundary_edges) {
        check_index(e.a);
        check_index(e.b);
        if (e.tag < 0) throw InvariantViolation("negative boundary tag");
        auto key = std::minmax(e.a, e.b);
        if (!boundary_set.insert(key).second)
            throw InvariantViolation("duplicate boundary edge");
        auto it = edge_owners.find(key);
        if (it == edge_owners.end())
            throw InvariantViolation("boundary edge is not a triangle edge");
        if (it->second != 1)
            throw InvariantViolation("boundary edge belongs to more than one triangle");
        // A node on two components would make its Dirichlet value ambiguous.
        for (int v : {e.a, e.b}) {
            auto [pos, inserted] = node_tag.insert({v, e.tag});
            if (!inserted && pos->second != e.tag)
                throw InvariantViolation("node " + std::to_string(v) +
                                         " belongs to two boundary components");
        }
    }
    // Every edge with a single owning triangle must be tagged as boundary.
    for (const auto& [edge, owners] : edge_owners)
        if (owners == 1 && boundary_set.find(edge) == boundary_set.end())
            throw InvariantViolation("untagged boundary edge found");

    // The edges of each tag must form one closed simple loop.
    int components = component_count();
    std::vector<std::vector<std::pair<int, int>>> per_tag(static_cast<std::size_t>(std::max(components, 0)));
    for (const auto& e : boundary_edges) per_tag[static_cast<std::size_t>(e.tag)].push_back({e.a, e.b});
    for (int tag = 0; tag < components; ++tag) {
        const auto& edges = per_tag[static_cast<std::size_t>(tag)];
        if (edges.empty())
            throw InvariantViolation("boundary tag " + std::to_string(tag) + " has no edges");
        std::map<int, std::vector<int>> adj;
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (const auto& [node, nbrs] : adj)
            if (nbrs.size() != 2)
                throw InvariantViolation("boundary component " + std::to_string(tag) +
                                         " is not a simple loop");
        // Walk the loop; it must visit every edge of the tag.
        int start = edges.front().first;
        int prev = -1, cur = start;
        std::size_t steps = 0;
        do {
            const auto& nbrs = adj[cur];
            int next = (nbrs[0] == prev) ? nbrs[1] : nbrs[0];
            prev = cur;
            cur = next;
            if (++steps > edges.size())
                throw InvariantViolation("boundary component " + std::to_string(tag) +
                                         " splits into several loops");
        } while (cur != start);
        if (steps != edges.size())
            throw InvariantViolation("boundary component " + std::to_string(tag) +
                                     " splits into several loops");
    }
}

Mesh generate_annulus_mesh(double r1, double r2, int nr, int ntheta) {
    if (!(r1 > 0.0) || !(r2 > r1))
        throw InvalidRadii("generate_annulus_mesh requires 0 < R1 < R2");
    if (nr < 1 || ntheta < 3)
        throw InvalidResolution("generate_annulus_mesh requires nr >= 1, ntheta >= 3");

    Mesh mesh;
    mesh.nodes.reserve(static_cast<std::size_t>((nr + 1) * ntheta));
    for (int i = 0; i <= nr; ++i) {
        double r = r1 + (r2 - r1) * static_cast<double>(i) / nr;
        for (int j = 0; j < ntheta; ++j) {
            double th = 2.0 * kPi * static_cast<double>(j) / ntheta;
            mesh.nodes.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    auto id = [ntheta](int i, int j) { return i * ntheta + ((j % ntheta + ntheta) % ntheta); };
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < ntheta; ++j) {
            int a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
            mesh.triangles.push_back({a, c, d});
            mesh.triangles.push_back({a, d, b});
        }
    for (int j = 0; j < ntheta; ++j) {
        mesh.boundary_edges.push_back({id(0, j + 1), id(0, j), 1});       // inner circle
        mesh.boundary_edges.push_back({id(nr, j), id(nr, j + 1), 0});     // outer circle
    }
    mesh.boundary_circles.push_back({1, {0.0, 0.0}, r1});
    mesh.boundary_circles.push_back({0, {0.0, 0.0}, r2});
    return mesh;
}

Mesh refine(const Mesh& mesh) {
    Mesh out;
    out.nodes = mesh.nodes;
    out.boundary_circles = mesh.boundary_circles;

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Point& pa = mesh.nodes[static_cast<std::size_t>(a)];
        const Point& pb = mesh.nodes[static_cast<std::size_t>(b)];
        int idx = static_cast<int>(out.nodes.size());
        out.nodes.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
        midpoint[key] = idx;
        return idx;
    };

    out.triangles.reserve(mesh.triangles.size() * 4);
    for (const auto& tri : mesh.triangles) {
        int v0 = tri[0], v1 = tri[1], v2 = tri[2];
        int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
        out.triangles.push_back({v0, m01, m02});
        out.triangles.push_back({m01, v1, m12});
        out.triangles.push_back({m02, m12, v2});
        out.triangles.push_back({m01, m12, m02});
    }

    out.boundary_edges.reserve(mesh.boundary_edges.size() * 2);
    for (const auto& e : mesh.boundary_edges) {
        int m = mid(e.a, e.b);
        // Project new boundary nodes to the exact circle when known.
        for (const auto& circle : mesh.boundary_circles)
            if (circle.tag == e.tag) {
                Point& p = out.nodes[static_cast<std::size_t>(m)];
                double d = std::hypot(p.x - circle.center.x, p.y - circle.center.y);
                if (d > 0.0) {
                    p.x = circle.center.x + (p.x - circle.center.x) * circle.radius / d;
                    p.y = circle.center.y + (p.y - circle.center.y) * circle.radius / d;
                }
            }
        out.boundary_edges.push_back({e.a, m, e.tag});
        out.boundary_edges.push_back({m, e.b, e.tag});
    }
    return out;
}

Mesh punch_hole(const Mesh& mesh, Point center, double radius, int new_tag) {
    std::vector<bool> keep(mesh.triangles.size(), true);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        Point centroid{0.0, 0.0};
        bool near = false;
        for (int v : tri) {
            const Point& p = mesh.nodes[static_cast<std::size_t>(v)];
            centroid.x += p.x / 3.0;
            centroid.y += p.y / 3.0;
            near = near || dist(p, center) < radius;
        }
        if (near || dist(centroid, center) < radius) keep[t] = false;
    }

    Mesh out;
    std::vector<int> remap(mesh.nodes.size(), -1);
    auto map_node = [&](int old) {
        int& m = remap[static_cast<std::size_t>(old)];
        if (m < 0) {
            m = static_cast<int>(out.nodes.size());
            out.nodes.push_back(mesh.nodes[static_cast<std::size_t>(old)]);
        }
        return m;
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (keep[t]) {
            const auto& tri = mesh.triangles[t];
            out.triangles.push_back({map_node(tri[0]), map_node(tri[1]), map_node(tri[2])});
        }

    for (const auto& e : mesh.boundary_edges) {
        if (remap[static_cast<std::size_t>(e.a)] < 0 || remap[static_cast<std::size_t>(e.b)] < 0)
            throw InvariantViolation("punch_hole cut into an existing boundary component");
        out.boundary_edges.push_back({remap[static_cast<std::size_t>(e.a)],
                                      remap[static_cast<std::size_t>(e.b)], e.tag});
    }

    // Newly exposed edges: single-owner triangle edges not already tagged.
    std::map<std::pair<int, int>, int> edge_owners;
    for (const auto& tri : out.triangles)
        for (int k = 0; k < 3; ++k)
            edge_owners[std::minmax(tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)])] += 1;
    std::set<std::pair<int, int>> tagged;
    for (const auto& e : out.boundary_edges) tagged.insert(std::minmax(e.a, e.b));
    for (const auto& [edge, owners] : edge_owners)
        if (owners == 1 && tagged.find(edge) == tagged.end())
            out.boundary_edges.push_back({edge.first, edge.second, new_tag});

    for (const auto& circle : mesh.boundary_circles) out.boundary_circles.push_back(circle);

    out.validate();
    return out;
}

Mesh scale_mesh(const Mesh& mesh, double factor) {
    if (!(factor > 0.0))
        throw NonPositiveScale("scale factor must be positive");
    Mesh out = mesh;
    for (Point& p : out.nodes) {
        p.x *= factor;
        p.y *= factor;
    }
    for (BoundaryCircle& c : out.boundary_circles) {
        c.center.x *= factor;
        c.center.y *= factor;
        c.radius *= factor;
    }
    return out;
}

double node_boundary_distance(const Mesh& mesh, int node) {
    const Point& p = mesh.nodes[static_cast<std::size_t>(node)];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : mesh.boundary_edges)
        best = std::min(best, point_segment_distance(p, mesh.nodes[static_cast<std::size_t>(e.a)],
                                                     mesh.nodes[static_cast<std::size_t>(e.b)]));
    return best;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    char buf[64];
    out << "NONLOCAL-MESH v1\n";
    out << "nodes " << mesh.nodes.size() << "\n";
    for (const Point& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    out << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    out << "boundary_edges " << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges) out << e.a << ' ' << e.b << ' ' << e.tag << "\n";
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    write_mesh(mesh, f);
    if (!f) throw Error("write to '" + path + "' failed");
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty line with comments stripped; false at end of input.
    bool next(std::string& line) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++lineno_;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            auto last = raw.find_last_not_of(" \t\r");
            if (last == std::string::npos) continue;
            raw.erase(last + 1);
            line = raw;
            return true;
        }
        return false;
    }

    std::size_t lineno() const { return lineno_; }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line) || line != "NONLOCAL-MESH v1")
        throw ParseError("expected header 'NONLOCAL-MESH v1'", reader.lineno());

    auto read_count = [&](const char* keyword) {
        if (!reader.next(line))
            throw ParseError(std::string("expected '") + keyword + " <count>'", reader.lineno() + 1);
        std::istringstream ss(line);
        std::string word;
        long count = -1;
        if (!(ss >> word >> count) || word != keyword || count < 0)
            throw ParseError(std::string("expected '") + keyword + " <count>'", reader.lineno());
        return static_cast<std::size_t>(count);
    };

    Mesh mesh;
    std::size_t n = read_count("nodes");
    mesh.nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!reader.next(line)) throw ParseError("unexpected end of node list", reader.lineno() + 1);
        std::istringstream ss(line);
        Point p;
        if (!(ss >> p.x >> p.y)) throw ParseError("malformed node line", reader.lineno());
        mesh.nodes.push_back(p);
    }
    std::size_t t = read_count("triangles");
    mesh.triangles.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
        if (!reader.next(line)) throw ParseError("unexpected end of triangle list", reader.lineno() + 1);
        std::istringstream ss(line);
        std::array<int, 3> tri{};
        if (!(ss >> tri[0] >> tri[1] >> tri[2])) throw ParseError("malformed triangle line", reader.lineno());
        mesh.triangles.push_back(tri);
    }
    std::size_t e = read_count("boundary_edges");
    mesh.boundary_edges.reserve(e);
    for (std::size_t i = 0; i < e; ++i) {
        if (!reader.next(line)) throw ParseError("unexpected end of boundary edge list", reader.lineno() + 1);
        std::istringstream ss(line);
        BoundaryEdge be;
        if (!(ss >> be.a >> be.b >> be.tag)) throw ParseError("malformed boundary edge line", reader.lineno());
        mesh.boundary_edges.push_back(be);
    }

    mesh.validate();
    return mesh;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open mesh file '" + path + "'");
    return read_mesh(f);
}

}  // namespace nlbvp::geom
