#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace cvqc {

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;

struct Mat2 {
    std::array<double, 4> e{};

    double& operator()(std::size_t i, std::size_t j) { return e[2 * i + j]; }
    double operator()(std::size_t i, std::size_t j) const { return e[2 * i + j]; }

    double trace() const { return e[0] + e[3]; }
    double det() const { return e[0] * e[3] - e[1] * e[2]; }

    static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
};

struct Mat4 {
    std::array<double, 16> e{};

    double& operator()(std::size_t i, std::size_t j) { return e[4 * i + j]; }
    double operator()(std::size_t i, std::size_t j) const { return e[4 * i + j]; }

    static Mat4 identity();
    static Mat4 zero() { return Mat4{}; }
};

Mat4 operator*(const Mat4& a, const Mat4& b);
Mat4 operator+(const Mat4& a, const Mat4& b);
Mat4 transpose(const Mat4& a);
Vec4 mul(const Mat4& a, const Vec4& x);
double dot(const Vec4& a, const Vec4& b);

double det(const Mat4& a);
/// Inverse by Gauss-Jordan elimination with partial pivoting.
/// Throws std::runtime_error on a (numerically) singular input.
Mat4 inverse(const Mat4& a);

double max_abs_asymmetry(const Mat4& a);

/// Eigenvalues of a dense symmetric matrix (row-major, n x n), ascending.
/// Cyclic Jacobi sweeps; intended for the small matrices used here.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

struct EigenSystem {
    std::vector<double> values;   ///< ascending
    std::vector<double> vectors;  ///< row-major; column j pairs with values[j]
};

/// Jacobi eigen decomposition with accumulated rotations.
EigenSystem symmetric_eigensystem(std::vector<double> a, std::size_t n);

}  // namespace cvqc
