#pragma once

#include "planehead/mesh.hpp"
#include "planehead/proxy.hpp"

#include <json.hpp>

#include <vector>

namespace planehead {

// Pseudo-region id for the open mesh boundary.
inline constexpr int kOpenBoundary = -1;

struct Anchor {
    Vec3 position;
    int source_vertex = -1;
    // Anchors on the open boundary or touching the outside area (label 0) stay fixed.
    bool on_open_boundary = false;
};

// Chain of border edges separating region_right and region_left
// (region_right < region_left, region_left >= 1). Anchors are ordered so that
// region_left lies on the left of the traversal.
struct BoundaryPolyline {
    int region_right = 0;
    int region_left = 0;
    bool closed = false;
    std::vector<int> anchors;
    std::vector<int> vertices;  // full-resolution vertex path between the anchors
    double length = 0.0;        // full-resolution path length
};

struct RegionInitials {
    // From the anchor loop at build time.
    double area = 0.0;
    Vec3 normal = Vec3::UnitZ();
    Vec3 centroid = Vec3::Zero();
    // From the full-resolution faces of the region.
    Vec3 surface_normal = Vec3::UnitZ();
    Vec3 surface_centroid = Vec3::Zero();
    double surface_area = 0.0;
};

struct BorderEdge {
    int a = -1, b = -1;
    int polyline = -1;
    double rest_length = 0.0;
};

struct AbstractedMesh {
    int K = 0;
    double spacing = 0.0;
    std::vector<Anchor> anchors;
    std::vector<BoundaryPolyline> polylines;
    std::vector<LoopCycles> loops;  // index r - 1
    std::vector<RegionInitials> initials;  // index r - 1
    std::vector<BorderEdge> edges;
    double mean_edge_length = 0.0;

    std::vector<Vec3> anchor_positions() const;
    const LoopCycles& loop(int r) const { return loops.at(r - 1); }
    const RegionInitials& initial(int r) const { return initials.at(r - 1); }
    // Regions >= 1 sharing a border, as (i, j) with i < j, and the matching polylines.
    std::vector<std::pair<int, int>> region_pairs() const;
};

struct AbstractOptions {
    // Maximum spacing between consecutive anchors, in units of the full mesh's mean edge length.
    double spacing_edge_factor = 8.0;
    // Lower bound on the spacing, in units of sqrt(labeled area / K).
    double spacing_area_factor = 1.0;
};

// Throws InvalidArgument for empty regions or regions whose border cannot form a loop.
AbstractedMesh build_abstracted_mesh(const Mesh& m, const RegionLabeling& labels,
                                     const AbstractOptions& options = {});

struct RegionTriangulation {
    Mesh mesh;
    std::vector<int> face_region;
    // Regions that fell back to a centroid fan (multi-cycle or self-intersecting loop).
    std::vector<int> fan_fallback_regions;
};

// Display triangulation of the anchor loops (ear clipping on the proxy plane).
RegionTriangulation triangulate_regions(const AbstractedMesh& a);

// Simple polygon check in 2D (no non-adjacent edge intersections).
bool is_simple_polygon(const std::vector<Eigen::Vector2d>& poly);
// Ear clipping for a simple counter-clockwise polygon; returns index triples.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Eigen::Vector2d>& poly);

nlohmann::json to_json(const AbstractedMesh& a);
AbstractedMesh abstracted_mesh_from_json(const nlohmann::json& j);

}  // namespace planehead
