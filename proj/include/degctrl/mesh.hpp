#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "degctrl/geometry.hpp"

namespace degctrl {

enum class NodeFlag : std::uint8_t { Interior = 0, Boundary = 1 };

struct BoundaryEdge {
    int a = -1;           // endpoints, ordered CCW along the boundary of the owning triangle
    int b = -1;
    int tri = -1;         // owning triangle
    Vec2 normal;          // outward unit normal
};

/// Conforming triangulation of a planar domain with the origin as a vertex.
/// Immutable after construction; triangles are CCW with positive area.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<NodeFlag> node_flags;

    std::optional<Domain> domain;   // descriptor; absent for imported meshes

    // Derived, filled by finalize().
    std::vector<double> areas;      // positive triangle areas
    std::vector<int> free_index;    // node -> free slot, -1 for boundary nodes
    std::vector<int> free_nodes;    // free slot -> node
    int origin_vertex = -1;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_free() const { return static_cast<int>(free_nodes.size()); }

    Vec2 barycenter(int t) const {
        const auto& tr = triangles[t];
        return (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]) * (1.0 / 3.0);
    }
    double diameter(int t) const;
    double total_area() const;
    double distance_to_origin(int t) const {
        const auto& tr = triangles[t];
        return point_triangle_distance({0, 0}, vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }

    /// Orients triangles CCW, computes areas, extracts boundary edges and
    /// node flags, locates the origin vertex, and builds the free-node map.
    void finalize();
};

/// Builds a graded triangulation of the domain. Local element size shrinks
/// toward the origin like target_h * (r/extent)^(grading_exponent - 1); the
/// origin is always a mesh vertex. grading_exponent = 1 gives a uniform mesh.
Mesh build_graded_mesh(const Domain& domain, double target_h, double grading_exponent);

/// Red refinement: every triangle split into four via edge midpoints.
/// Midpoints of disk boundary edges are projected back onto the circle.
Mesh refine_uniform(const Mesh& mesh);

std::vector<Vec2> boundary_normals(const Mesh& mesh);

/// Structural checks: positive areas, closed boundary loops, boundary flags
/// consistent, origin strictly inside. Throws ValidationError on violation.
void check_mesh(const Mesh& mesh);

/// Plain-text export: header "vertices N triangles M", then one vertex per
/// line (x y flag) and one triangle per line (i j k region-bitmask).
/// Bit 0 of the mask marks omega0 membership, bit 1 marks omega.
void write_mesh(std::ostream& out, const Mesh& mesh,
                const std::vector<std::uint8_t>* region_masks = nullptr);

struct MeshImport {
    Mesh mesh;
    std::vector<std::uint8_t> region_masks;
};

MeshImport read_mesh(std::istream& in, std::optional<Domain> domain = std::nullopt);

}  // namespace degctrl
