#include "helpers.hpp"

#include "planehead/abstractor.hpp"
#include "planehead/fixtures.hpp"
#include "planehead/proxy.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <set>

using namespace planehead;

TEST_CASE("cube abstraction has one anchor per corner") {
    const Mesh m = fixtures::cube();
    const AbstractedMesh a = build_abstracted_mesh(m, fixtures::cube_face_labels());
    CHECK(a.K == 6);
    CHECK(a.anchors.size() == 8);
    std::set<int> sources;
    for (const auto& an : a.anchors) {
        sources.insert(an.source_vertex);
        CHECK_FALSE(an.on_open_boundary);
        CHECK((an.position - m.vertices()[an.source_vertex]).norm() == 0.0);
    }
    CHECK(sources.size() == 8);
    CHECK(a.edges.size() == 12);
    CHECK(a.region_pairs().size() == 12);
    for (int r = 1; r <= 6; ++r) {
        REQUIRE(a.loop(r).size() == 1);
        CHECK(a.loop(r)[0].size() == 4);
        CHECK(a.initial(r).area == doctest::Approx(1.0));
        // loop normal points out of the cube
        CHECK(a.initial(r).normal.dot(a.initial(r).centroid - Vec3(0.5, 0.5, 0.5)) > 0.0);
        CHECK((a.initial(r).normal - a.initial(r).surface_normal).norm() < 1e-12);
    }
    for (const auto& e : a.edges) CHECK(e.rest_length == doctest::Approx(1.0));
    CHECK(a.mean_edge_length == doctest::Approx(1.0));
}

TEST_CASE("two coplanar squares") {
    const auto h = fixtures::hinge(8, 0.0);
    const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
    CHECK(a.K == 2);
    bool top = false, bottom = false;
    for (const auto& an : a.anchors) {
        CHECK(an.on_open_boundary);
        top |= (an.position - Vec3(0, 1, 0)).norm() < 1e-12;
        bottom |= (an.position - Vec3(0, 0, 0)).norm() < 1e-12;
    }
    CHECK(top);
    CHECK(bottom);
    double shared = 0.0;
    for (const auto& p : a.polylines)
        if (p.region_right == 1 && p.region_left == 2) shared += p.length;
    CHECK(shared == doctest::Approx(1.0));
    CHECK(a.region_pairs() == std::vector<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("anchors lie on borders and respect the spacing") {
    const auto f = fixtures::face(60, 80, 32);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    const Mesh& m = f.mesh;
    // region set of every vertex
    std::vector<std::set<int>> vregions(m.vertex_count());
    for (int t = 0; t < m.face_count(); ++t)
        for (int v : m.triangles()[t]) vregions[v].insert(f.labels.face_labels[t]);
    std::vector<char> boundary(m.vertex_count(), 0);
    for (int e = 0; e < m.edge_count(); ++e)
        if (m.is_boundary_edge(e)) boundary[m.edges()[e][0]] = boundary[m.edges()[e][1]] = 1;
    for (const auto& an : a.anchors)
        CHECK((vregions[an.source_vertex].size() >= 2 || boundary[an.source_vertex]));
    for (const auto& e : a.edges) CHECK(e.rest_length <= a.spacing + 1e-12);
    for (int r = 1; r <= a.K; ++r) {
        CHECK(a.initial(r).area > 0.0);
        // every polyline incident to r appears in its loop
        std::set<int> in_loop;
        for (const auto& c : a.loop(r)) in_loop.insert(c.begin(), c.end());
        for (const auto& p : a.polylines)
            if (p.region_left == r || p.region_right == r)
                for (int id : p.anchors) CHECK(in_loop.count(id) == 1);
    }
}

TEST_CASE("full face fixture stays under 100 anchors") {
    const auto f = fixtures::face();
    CHECK(f.labels.K == 32);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    CHECK(a.anchors.size() < 100);
}

TEST_CASE("abstraction is deterministic and JSON round-trips") {
    const auto f = fixtures::face(40, 54, 16);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    const AbstractedMesh b = build_abstracted_mesh(f.mesh, f.labels);
    CHECK(to_json(a) == to_json(b));
    const AbstractedMesh c = abstracted_mesh_from_json(to_json(a));
    CHECK(to_json(c) == to_json(a));
}

TEST_CASE("abstraction errors") {
    const Mesh m = fixtures::cube();
    RegionLabeling labels = fixtures::cube_face_labels();
    labels.K = 7;
    CHECK_THROWS_AS(build_abstracted_mesh(m, labels), InvalidArgument);
}

TEST_CASE("ear clipping: square and hexagon") {
    const std::vector<Eigen::Vector2d> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(ear_clip(square).size() == 2);
    std::vector<Eigen::Vector2d> hex;
    for (int k = 0; k < 6; ++k) hex.emplace_back(std::cos(k * M_PI / 3), std::sin(k * M_PI / 3));
    const auto tris = ear_clip(hex);
    CHECK(tris.size() == 4);
    double area = 0.0;
    for (const auto& t : tris) {
        const Eigen::Vector2d a = hex[t[1]] - hex[t[0]], b = hex[t[2]] - hex[t[0]];
        const double cross = a.x() * b.y() - a.y() * b.x();
        CHECK(cross > 0.0);
        area += 0.5 * cross;
    }
    CHECK(area == doctest::Approx(1.5 * std::sqrt(3.0)));
    CHECK(is_simple_polygon(hex));
    const std::vector<Eigen::Vector2d> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_FALSE(is_simple_polygon(bowtie));
}

TEST_CASE("region triangulation is watertight with the loop as boundary") {
    const auto f = fixtures::face(60, 80, 32);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    const RegionTriangulation tri = triangulate_regions(a);
    std::set<int> fans(tri.fan_fallback_regions.begin(), tri.fan_fallback_regions.end());
    const int nanchors = static_cast<int>(a.anchors.size());
    for (int r = 1; r <= a.K; ++r) {
        // directed boundary edges of the patch
        std::map<std::pair<int, int>, int> directed;
        for (int t = 0; t < tri.mesh.face_count(); ++t) {
            if (tri.face_region[t] != r) continue;
            const auto& T = tri.mesh.triangles()[t];
            for (int k = 0; k < 3; ++k) ++directed[{T[k], T[(k + 1) % 3]}];
        }
        std::multiset<std::pair<int, int>> patch_boundary, loop_edges;
        for (const auto& [e, n] : directed)
            if (!directed.count({e.second, e.first})) patch_boundary.insert(e);
        for (const auto& c : a.loop(r))
            for (std::size_t k = 0; k < c.size(); ++k) loop_edges.insert({c[k], c[(k + 1) % c.size()]});
        CHECK(patch_boundary == loop_edges);
        if (!fans.count(r))
            for (const auto& [e, n] : directed) CHECK(e.first < nanchors);
    }
    if (fans.empty()) CHECK(tri.mesh.vertex_count() == nanchors);
}

TEST_CASE("proxy normal of a planar loop and its reversal") {
    std::vector<Vec3> sq{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    CHECK((proxy_normal(sq) - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK((proxy_centroid(sq) - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
    std::reverse(sq.begin(), sq.end());
    CHECK((proxy_normal(sq) - Vec3(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("proxy centroid is translation equivariant and matches the polygon centroid") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        // convex polygon: sorted angles on a perturbed circle
        const int n = 3 + trial % 7;
        std::vector<double> ang(n);
        for (auto& a : ang) a = M_PI * (u(rng) + 1);
        std::sort(ang.begin(), ang.end());
        std::vector<Vec3> loop;
        for (double a : ang) loop.emplace_back(std::cos(a), std::sin(a), 0.0);
        // shoelace centroid
        double A = 0, cx = 0, cy = 0;
        for (int i = 0; i < n; ++i) {
            const Vec3& p = loop[i];
            const Vec3& q = loop[(i + 1) % n];
            const double c = p.x() * q.y() - q.x() * p.y();
            A += c / 2;
            cx += (p.x() + q.x()) * c;
            cy += (p.y() + q.y()) * c;
        }
        cx /= 6 * A;
        cy /= 6 * A;
        if (A < 1e-3) continue;
        const Vec3 c = proxy_centroid(loop);
        CHECK((c - Vec3(cx, cy, 0)).norm() < 1e-12);
        const Vec3 t(u(rng), u(rng), u(rng));
        std::vector<Vec3> moved = loop;
        for (auto& p : moved) p += t;
        CHECK((proxy_centroid(moved) - (c + t)).norm() < 1e-12);
    }
}

TEST_CASE("degenerate loops fall back") {
    const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    bool deg = false;
    proxy_normal(line, &deg);
    CHECK(deg);
    bool cdeg = false;
    const Vec3 c = proxy_centroid(line, &cdeg);
    CHECK(cdeg);
    CHECK((c - Vec3(1, 0, 0)).norm() < 1e-15);
    const LoopGeometry g = loop_geometry(line, {{0, 1, 2}}, Vec3(0, 1, 0));
    CHECK(g.degenerate_normal);
    CHECK((g.normal - Vec3(0, 1, 0)).norm() == 0.0);
}

TEST_CASE("boundary normal equals area-weighted triangle normal on a patch") {
    const Mesh g = fixtures::grid(6, 1.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<Vec3> pts = g.vertices();
    for (auto& p : pts) p.z() = u(rng);
    const Mesh m(pts, g.triangles());
    Vec3 sum = Vec3::Zero();
    for (int f = 0; f < m.face_count(); ++f) sum += m.face_area_vector(f);
    // boundary loop of the grid, counter-clockwise
    std::vector<int> loop;
    const int n = 5;
    for (int i = 0; i < n; ++i) loop.push_back(i);
    for (int j = 0; j < n; ++j) loop.push_back(j * (n + 1) + n);
    for (int i = n; i > 0; --i) loop.push_back(n * (n + 1) + i);
    for (int j = n; j > 0; --j) loop.push_back(j * (n + 1));
    const LoopGeometry lg = loop_geometry(m.vertices(), {loop});
    CHECK((lg.normal - sum.normalized()).norm() < 1e-12);
    CHECK((0.5 * boundary_cross_sum(m.vertices(), {loop}) - sum).norm() < 1e-12);
    CHECK(lg.area == doctest::Approx(sum.norm()));
}
