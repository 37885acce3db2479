#include "cvqc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvqc {

Mat4 Mat4::identity() {
    Mat4 m;
    for (std::size_t i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
}

Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 c;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < 4; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Mat4 operator+(const Mat4& a, const Mat4& b) {
    Mat4 c;
    for (std::size_t i = 0; i < 16; ++i) c.e[i] = a.e[i] + b.e[i];
    return c;
}

Mat4 transpose(const Mat4& a) {
    Mat4 t;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) t(i, j) = a(j, i);
    return t;
}

Vec4 mul(const Mat4& a, const Vec4& x) {
    Vec4 y{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) y[i] += a(i, j) * x[j];
    return y;
}

double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

namespace {

// LU decomposition with partial pivoting, in place. Returns the permutation
// sign, or 0 if the matrix is singular to working precision.
int lu_decompose(Mat4& a, std::array<std::size_t, 4>& perm) {
    int sign = 1;
    for (std::size_t i = 0; i < 4; ++i) perm[i] = i;
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t row = col + 1; row < 4; ++row) {
            const double v = std::abs(a(row, col));
            if (v > best) {
                best = v;
                pivot = row;
            }
        }
        if (best < 1e-300) return 0;
        if (pivot != col) {
            for (std::size_t j = 0; j < 4; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(perm[col], perm[pivot]);
            sign = -sign;
        }
        for (std::size_t row = col + 1; row < 4; ++row) {
            const double factor = a(row, col) / a(col, col);
            a(row, col) = factor;
            for (std::size_t j = col + 1; j < 4; ++j) a(row, j) -= factor * a(col, j);
        }
    }
    return sign;
}

}  // namespace

double det(const Mat4& a) {
    Mat4 lu = a;
    std::array<std::size_t, 4> perm;
    const int sign = lu_decompose(lu, perm);
    if (sign == 0) return 0.0;
    double d = static_cast<double>(sign);
    for (std::size_t i = 0; i < 4; ++i) d *= lu(i, i);
    return d;
}

Mat4 inverse(const Mat4& a) {
    Mat4 lu = a;
    std::array<std::size_t, 4> perm;
    if (lu_decompose(lu, perm) == 0) throw std::runtime_error("linalg: singular 4x4 matrix");

    Mat4 inv;
    for (std::size_t col = 0; col < 4; ++col) {
        Vec4 x{};
        // forward substitution on the permuted unit vector
        for (std::size_t i = 0; i < 4; ++i) {
            double s = perm[i] == col ? 1.0 : 0.0;
            for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t ii = 4; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < 4; ++j) s -= lu(ii, j) * x[j];
            x[ii] = s / lu(ii, ii);
        }
        for (std::size_t i = 0; i < 4; ++i) inv(i, col) = x[i];
    }
    return inv;
}

double max_abs_asymmetry(const Mat4& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
    return worst;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
    return symmetric_eigensystem(std::move(a), n).values;
}

EigenSystem symmetric_eigensystem(std::vector<double> a, std::size_t n) {
    if (a.size() != n * n) throw std::invalid_argument("linalg: matrix size mismatch");
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    auto vt = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vt(k, p);
                    const double vkq = vt(k, q);
                    vt(k, p) = c * vkp - s * vkq;
                    vt(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // Sort columns by ascending eigenvalue.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return at(x, x) < at(y, y); });

    EigenSystem out;
    out.values.resize(n);
    out.vectors.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = at(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = vt(i, order[j]);
    }
    return out;
}

}  // namespace cvqc
