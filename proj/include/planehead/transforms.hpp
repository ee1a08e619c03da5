#pragma once

#include "planehead/geometry.hpp"
#include "planehead/proxy.hpp"

#include <span>
#include <utility>
#include <vector>

namespace planehead {

// Sparse per-vertex region weights (region id, weight); region 0 is the identity.
using RegionWeights = std::vector<std::pair<int, double>>;

// Rotation taking unit n onto unit n_prime (Rodrigues). Exactly the identity below
// 1e-8 rad; antiparallel inputs rotate by pi about an axis perpendicular to n
// chosen from n's smallest component. Inputs off unit length by more than 1e-6
// are normalized with a warning.
Mat3 rotation_between(Vec3 n, Vec3 n_prime);

// [R(n, n') | c' - R(n, n') c]
AffineTransform rigid_part(const PlaneProxy& before, const PlaneProxy& after);

// [I - mu n n^T | mu (n.c) n]: scales signed distance to the plane by (1 - mu).
AffineTransform planarize_part(const PlaneProxy& plane, double mu);

// rigid_part(before, after) * planarize_part(before, mu)
AffineTransform region_transform(const PlaneProxy& before, const PlaneProxy& after, double mu);

// As region_transform, with planarization toward a separately supplied plane.
AffineTransform stylization_transform(const PlaneProxy& before, const PlaneProxy& after,
                                      const PlaneProxy& plane, double mu);

// sum_r w_r T_r, with T_0 = identity. transforms[r - 1] is the transform of region r.
AffineTransform blend_transforms(const RegionWeights& weights,
                                 std::span<const AffineTransform> transforms);

}  // namespace planehead
