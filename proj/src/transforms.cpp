#include "planehead/transforms.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace planehead {

namespace {

Vec3 unit_or_warn(Vec3 v, const char* what) {
    const double len = v.norm();
    if (!(len > 0.0) || !std::isfinite(len)) throw InvalidArgument(std::string(what) + " is not a direction");
    if (std::abs(len - 1.0) > 1e-6) spdlog::warn("rotation_between: {} has length {}, normalizing", what, len);
    return v / len;
}

Mat3 skew(const Vec3& k) {
    Mat3 K;
    K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
    return K;
}

// Rotation for c = n.n' >= 0, well conditioned there.
Mat3 rotation_near(const Vec3& n, const Vec3& np) {
    const Vec3 k = n.cross(np);
    const double c = n.dot(np);
    if (std::atan2(k.norm(), c) < 1e-8) return Mat3::Identity();
    const Mat3 K = skew(k);
    return Mat3::Identity() + K + K * K / (1.0 + c);
}

// Half-turn about an axis perpendicular to n.
Mat3 half_turn(const Vec3& n) {
    int smallest = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(n[i]) < std::abs(n[smallest])) smallest = i;
    const Vec3 axis = n.cross(Vec3::Unit(smallest)).normalized();
    return 2.0 * axis * axis.transpose() - Mat3::Identity();
}

}  // namespace

Mat3 rotation_between(Vec3 n, Vec3 n_prime) {
    n = unit_or_warn(n, "n");
    n_prime = unit_or_warn(n_prime, "n'");
    if (n.dot(n_prime) >= 0.0) return rotation_near(n, n_prime);
    // Obtuse: n x n' == n x (n + n'), and the latter keeps the axis accurate near antiparallel.
    const Vec3 m = n + n_prime;
    const Vec3 k = n.cross(m);
    const double s = k.norm();
    if (s < 1e-12) return half_turn(n);
    const Vec3 a = k / s;
    const double c = 0.5 * m.squaredNorm() - 1.0;
    return c * Mat3::Identity() + s * skew(a) + (1.0 - c) * a * a.transpose();
}

AffineTransform rigid_part(const PlaneProxy& before, const PlaneProxy& after) {
    const Mat3 R = rotation_between(before.normal, after.normal);
    return {R, after.centroid - R * before.centroid};
}

AffineTransform planarize_part(const PlaneProxy& plane, double mu) {
    const Vec3& n = plane.normal;
    return {Mat3::Identity() - mu * n * n.transpose(), mu * n.dot(plane.centroid) * n};
}

AffineTransform region_transform(const PlaneProxy& before, const PlaneProxy& after, double mu) {
    return rigid_part(before, after) * planarize_part(before, mu);
}

AffineTransform stylization_transform(const PlaneProxy& before, const PlaneProxy& after,
                                      const PlaneProxy& plane, double mu) {
    return rigid_part(before, after) * planarize_part(plane, mu);
}

AffineTransform blend_transforms(const RegionWeights& weights,
                                 std::span<const AffineTransform> transforms) {
    Mat34 sum = Mat34::Zero();
    for (const auto& [r, w] : weights) {
        if (r == 0) {
            sum.leftCols<3>() += w * Mat3::Identity();
        } else {
            sum += w * transforms[r - 1].matrix();
        }
    }
    return AffineTransform::from_matrix(sum);
}

}  // namespace planehead
