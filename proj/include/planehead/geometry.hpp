#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace planehead {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// 3x4 affine map acting on homogeneous points: p -> linear * p + translation.
struct AffineTransform {
    Mat3 linear = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static AffineTransform identity() { return {}; }

    static AffineTransform from_matrix(const Mat34& m) {
        return {m.leftCols<3>(), m.col(3)};
    }

    Mat34 matrix() const {
        Mat34 m;
        m.leftCols<3>() = linear;
        m.col(3) = translation;
        return m;
    }

    Vec3 apply(const Vec3& p) const { return linear * p + translation; }

    // (a * b)(p) == a(b(p))
    friend AffineTransform operator*(const AffineTransform& a, const AffineTransform& b) {
        return {a.linear * b.linear, a.linear * b.translation + a.translation};
    }

    bool is_finite() const { return linear.allFinite() && translation.allFinite(); }
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace planehead
