#include <doctest.h>

#include <sstream>

#include "degctrl/errors.hpp"
#include "degctrl/mesh.hpp"
#include "oracles.hpp"

using namespace degctrl;

TEST_CASE("uniform unit square has the grid vertex count") {
    const Mesh mesh = oracles::unit_square_mesh(0.5);
    CHECK(mesh.num_vertices() == 25);
    CHECK(mesh.num_triangles() == 32);
    CHECK(mesh.origin_vertex >= 0);
    CHECK(mesh.vertices[mesh.origin_vertex].norm() == 0.0);
}

TEST_CASE("element areas tile the rectangle") {
    for (double grading : {1.0, 2.0}) {
        const Mesh mesh = oracles::unit_square_mesh(0.3, grading);
        CHECK(mesh.total_area() == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("disk mesh area matches its inscribed polygon and approaches the disk") {
    const Mesh mesh = build_graded_mesh(DiskDomain{{0, 0}, 1.0}, 0.1, 1.0);
    double acc = 0.0;
    for (double a : mesh.areas) acc += a;
    CHECK(mesh.total_area() == doctest::Approx(acc).epsilon(1e-15));
    CHECK(mesh.total_area() < M_PI);
    CHECK(mesh.total_area() > M_PI * (1.0 - 5e-3));
}

TEST_CASE("grading shrinks elements near the origin") {
    const Mesh mesh = oracles::unit_square_mesh(0.1, 2.0);
    double dmin = 1e300;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (mesh.barycenter(t).norm() < 0.1) dmin = std::min(dmin, mesh.diameter(t));
    }
    CHECK(dmin <= 0.1 * 0.05);
}

TEST_CASE("boundary normals are outward unit vectors") {
    const Mesh mesh = oracles::unit_square_mesh(0.5);
    for (const auto& be : mesh.boundary_edges) {
        CHECK(be.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
        const Vec2 mid = (mesh.vertices[be.a] + mesh.vertices[be.b]) * 0.5;
        if (std::abs(mid.x - 1.0) < 1e-12) {
            CHECK(be.normal.x == doctest::Approx(1.0));
            CHECK(be.normal.y == doctest::Approx(0.0));
        }
        if (std::abs(mid.y - 1.0) < 1e-12) {
            CHECK(be.normal.x == doctest::Approx(0.0));
            CHECK(be.normal.y == doctest::Approx(1.0));
        }
        // outward: stepping along the normal leaves the domain
        CHECK(!domain_contains(*mesh.domain, mid + 1e-6 * be.normal));
    }
}

TEST_CASE("boundary vertices are flagged and lie on the boundary") {
    for (const Mesh& mesh : {oracles::unit_square_mesh(0.4, 1.5),
                             build_graded_mesh(DiskDomain{{0, 0}, 1.0}, 0.2, 1.0)}) {
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const double bd = domain_boundary_distance(*mesh.domain, mesh.vertices[v]);
            if (mesh.node_flags[v] == NodeFlag::Boundary)
                CHECK(std::abs(bd) <= 1e-12);
            else
                CHECK(bd > 0.0);
        }
    }
}

TEST_CASE("refinement preserves area and keeps the origin vertex") {
    const Mesh mesh = oracles::unit_square_mesh(0.5);
    const Mesh fine = refine_uniform(mesh);
    CHECK(fine.num_triangles() == 4 * mesh.num_triangles());
    CHECK(fine.total_area() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(fine.origin_vertex >= 0);
    CHECK_NOTHROW(check_mesh(fine));
}

TEST_CASE("mesh export import round trip") {
    const Mesh mesh = oracles::unit_square_mesh(0.5, 2.0);
    std::stringstream ss;
    write_mesh(ss, mesh);
    const MeshImport imp = read_mesh(ss, mesh.domain);
    REQUIRE(imp.mesh.num_vertices() == mesh.num_vertices());
    REQUIRE(imp.mesh.num_triangles() == mesh.num_triangles());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        CHECK(imp.mesh.vertices[v].x == mesh.vertices[v].x);
        CHECK(imp.mesh.vertices[v].y == mesh.vertices[v].y);
        CHECK(imp.mesh.node_flags[v] == mesh.node_flags[v]);
    }
}

TEST_CASE("invalid domains are rejected") {
    CHECK_THROWS_AS(build_graded_mesh(RectDomain{0.5, 1, -1, 1}, 0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(build_graded_mesh(RectDomain{-1, -1, -1, 1}, 0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(build_graded_mesh(DiskDomain{{2, 0}, 1.0}, 0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(build_graded_mesh(RectDomain{-1, 1, -1, 1}, -0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(build_graded_mesh(RectDomain{-1, 1, -1, 1}, 0.1, 0.5), ValidationError);
}

TEST_CASE("off-center disk still carries the origin as a vertex") {
    const Mesh mesh = build_graded_mesh(DiskDomain{{0.3, 0.1}, 1.0}, 0.15, 1.0);
    REQUIRE(mesh.origin_vertex >= 0);
    CHECK(mesh.vertices[mesh.origin_vertex].norm() == 0.0);
    CHECK_NOTHROW(check_mesh(mesh));
}
