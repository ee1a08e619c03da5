#include "planehead/proxy.hpp"

#include <numeric>

namespace planehead {

Vec3 boundary_cross_sum(std::span<const Vec3> positions, const LoopCycles& cycles) {
    Vec3 sum = Vec3::Zero();
    for (const auto& cycle : cycles) {
        const std::size_t n = cycle.size();
        if (n == 0) continue;
        // Closed cycles are translation invariant; a local origin keeps precision.
        const Vec3 o = positions[cycle[0]];
        for (std::size_t k = 0; k < n; ++k)
            sum += (positions[cycle[k]] - o).cross(positions[cycle[(k + 1) % n]] - o);
    }
    return sum;
}

LoopGeometry loop_geometry(std::span<const Vec3> positions, const LoopCycles& cycles,
                           const Vec3& fallback) {
    LoopGeometry g;
    const Vec3 cross = boundary_cross_sum(positions, cycles);
    const double len = cross.norm();
    // Relative guard: the sum is a sum of O(|v|^2) terms.
    double scale = 0.0;
    std::size_t count = 0;
    Vec3 mean = Vec3::Zero();
    for (const auto& cycle : cycles)
        for (int a : cycle) {
            mean += positions[a];
            ++count;
        }
    if (count > 0) mean /= static_cast<double>(count);
    for (const auto& cycle : cycles)
        for (int a : cycle) scale = std::max(scale, (positions[a] - mean).squaredNorm());

    if (len > 1e-14 * std::max(scale, 1e-300) && len > 0.0) {
        g.normal = cross / len;
    } else {
        g.normal = fallback;
        g.degenerate_normal = true;
    }

    double area = 0.0;
    Vec3 weighted = Vec3::Zero();
    for (const auto& cycle : cycles) {
        const std::size_t n = cycle.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Vec3& a = positions[cycle[k]];
            const Vec3& b = positions[cycle[(k + 1) % n]];
            const double t = 0.5 * g.normal.dot((a - mean).cross(b - mean));
            area += t;
            weighted += t * (mean + a + b) / 3.0;
        }
    }
    g.area = area;
    if (std::abs(area) > 1e-14 * std::max(scale, 1e-300) && area != 0.0) {
        g.centroid = weighted / area;
    } else {
        g.centroid = mean;
        g.degenerate_area = true;
    }
    return g;
}

namespace {

LoopCycles single_cycle(std::size_t n) {
    LoopCycles c(1);
    c[0].resize(n);
    std::iota(c[0].begin(), c[0].end(), 0);
    return c;
}

}  // namespace

Vec3 proxy_normal(std::span<const Vec3> loop, bool* degenerate) {
    if (loop.size() < 3) throw InvalidArgument("loop needs at least 3 anchors");
    const auto g = loop_geometry(loop, single_cycle(loop.size()));
    if (degenerate) *degenerate = g.degenerate_normal;
    return g.normal;
}

Vec3 proxy_centroid(std::span<const Vec3> loop, bool* degenerate) {
    if (loop.size() < 3) throw InvalidArgument("loop needs at least 3 anchors");
    const auto g = loop_geometry(loop, single_cycle(loop.size()));
    if (degenerate) *degenerate = g.degenerate_area;
    return g.centroid;
}

}  // namespace planehead
