#pragma once

#include "planehead/geometry.hpp"

#include <span>
#include <vector>

namespace planehead {

// Sculptor's plane of one region: unit normal and centroid.
struct PlaneProxy {
    int region = 0;
    Vec3 normal = Vec3::UnitZ();
    Vec3 centroid = Vec3::Zero();
};

// A region boundary: one or more closed anchor cycles, region on the left.
using LoopCycles = std::vector<std::vector<int>>;

struct LoopGeometry {
    Vec3 normal = Vec3::UnitZ();
    Vec3 centroid = Vec3::Zero();
    double area = 0.0;
    bool degenerate_normal = false;
    bool degenerate_area = false;
};

// Normal from oriented boundary edges only: normalize(sum_e v_e1 x v_e2).
// Interior-edge terms of the area-weighted triangle normal cancel, so this equals
// the area-weighted mean normal of any triangulation spanning the loop.
// `fallback` is returned (and degenerate_normal set) when the sum vanishes.
// Centroid: area-weighted centroid of the fan about the anchor mean, with fan
// areas measured along the normal. Area: fan area along the normal, which equals
// half the magnitude of the boundary cross-product sum.
LoopGeometry loop_geometry(std::span<const Vec3> positions, const LoopCycles& cycles,
                           const Vec3& fallback = Vec3::UnitZ());

// Single ordered loop conveniences.
Vec3 proxy_normal(std::span<const Vec3> loop, bool* degenerate = nullptr);
Vec3 proxy_centroid(std::span<const Vec3> loop, bool* degenerate = nullptr);

// sum_e v_e1 x v_e2 over the cycles (twice the vector area).
Vec3 boundary_cross_sum(std::span<const Vec3> positions, const LoopCycles& cycles);

}  // namespace planehead
