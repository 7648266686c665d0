/// @file vec.hpp
/// @brief Small fixed-size vector types used throughout the solver.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tfd {

/// @brief Integer lattice index triple (global, may be negative).
struct Vec3i {
    int i = 0, j = 0, k = 0;

    friend constexpr bool operator==(const Vec3i& a, const Vec3i& b) {
        return a.i == b.i && a.j == b.j && a.k == b.k;
    }
    friend constexpr bool operator!=(const Vec3i& a, const Vec3i& b) { return !(a == b); }
    friend constexpr Vec3i operator+(const Vec3i& a, const Vec3i& b) {
        return {a.i + b.i, a.j + b.j, a.k + b.k};
    }
    friend constexpr Vec3i operator-(const Vec3i& a, const Vec3i& b) {
        return {a.i - b.i, a.j - b.j, a.k - b.k};
    }

    constexpr int operator[](int axis) const { return axis == 0 ? i : (axis == 1 ? j : k); }
    constexpr int& operator[](int axis) { return axis == 0 ? i : (axis == 1 ? j : k); }
};

/// @brief Lattice offset of +/-1 along one axis.
constexpr Vec3i unit_offset(int axis, int sign) {
    Vec3i e;
    e[axis] = sign;
    return e;
}

/// @brief Point / vector in R^3.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr Vec3 operator*(double s, const Vec3& a) {
        return {s * a.x, s * a.y, s * a.z};
    }
    friend constexpr Vec3 operator*(const Vec3& a, double s) { return s * a; }

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
    return std::max(std::abs(a.x), std::max(std::abs(a.y), std::abs(a.z)));
}

/// @brief Symmetric 3x3 matrix (stores full 9 entries for simplicity).
struct Mat3 {
    std::array<double, 9> m{};  // row-major

    double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }

    friend Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 out;
        for (int q = 0; q < 9; ++q) out.m[static_cast<size_t>(q)] = a.m[static_cast<size_t>(q)] + b.m[static_cast<size_t>(q)];
        return out;
    }
    friend Mat3 operator*(double s, const Mat3& a) {
        Mat3 out;
        for (int q = 0; q < 9; ++q) out.m[static_cast<size_t>(q)] = s * a.m[static_cast<size_t>(q)];
        return out;
    }
};

inline Vec3 mat_vec(const Mat3& a, const Vec3& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

}  // namespace tfd
