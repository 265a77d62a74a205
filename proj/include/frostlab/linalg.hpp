#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "frostlab/core.hpp"

// Small dense linear algebra for ambient dimension <= 3. The lab needs only
// projector matrices, symmetric eigenvalues and one smallest-singular-value
// check, so closed forms plus Jacobi sweeps beat an external dependency.

namespace frostlab {

struct Vec {
    int dim = 0;
    std::array<double, 3> v{};

    Vec() = default;
    Vec(int d) : dim(d) {}
    Vec(double x) : dim(1), v{x, 0, 0} {}
    Vec(double x, double y) : dim(2), v{x, y, 0} {}
    Vec(double x, double y, double z) : dim(3), v{x, y, z} {}

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

inline Vec operator+(Vec a, const Vec& b) {
    for (int i = 0; i < a.dim; ++i) a[i] += b[i];
    return a;
}
inline Vec operator-(Vec a, const Vec& b) {
    for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
    return a;
}
inline Vec operator*(double c, Vec a) {
    for (int i = 0; i < a.dim; ++i) a[i] *= c;
    return a;
}
inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
    return s;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// Row-major d x d working matrix; only the leading dim x dim block is used.
struct Mat {
    int dim = 0;
    std::array<std::array<double, 3>, 3> m{};

    static Mat zero(int d) {
        Mat a;
        a.dim = d;
        return a;
    }
    static Mat identity(int d) {
        Mat a = zero(d);
        for (int i = 0; i < d; ++i) a.m[i][i] = 1.0;
        return a;
    }
    double& at(int r, int c) { return m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    double at(int r, int c) const { return m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
};

inline Mat operator-(Mat a, const Mat& b) {
    for (int r = 0; r < a.dim; ++r)
        for (int c = 0; c < a.dim; ++c) a.m[r][c] -= b.m[r][c];
    return a;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    Vec y(a.dim);
    for (int r = 0; r < a.dim; ++r) {
        double s = 0;
        for (int c = 0; c < a.dim; ++c) s += a.at(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::array<double, 3> symmetric_eigenvalues(Mat a) {
    const int d = a.dim;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += std::abs(a.at(p, q));
        if (off < 1e-15) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) < 1e-18) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < d; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, 3> ev{0, 0, 0};
    for (int i = 0; i < d; ++i) ev[static_cast<std::size_t>(i)] = a.at(i, i);
    return ev;
}

// Operator norm of a symmetric matrix = max |eigenvalue|. Closed form for
// dim <= 2 (this is the hot path of the affine metric), Jacobi otherwise.
inline double symmetric_operator_norm(const Mat& a) {
    if (a.dim == 1) return std::abs(a.at(0, 0));
    if (a.dim == 2) {
        const double half_tr = 0.5 * (a.at(0, 0) + a.at(1, 1));
        const double half_diff = 0.5 * (a.at(0, 0) - a.at(1, 1));
        const double disc = std::sqrt(half_diff * half_diff + a.at(0, 1) * a.at(1, 0));
        return std::max(std::abs(half_tr + disc), std::abs(half_tr - disc));
    }
    auto ev = symmetric_eigenvalues(a);
    double r = 0;
    for (int i = 0; i < a.dim; ++i) r = std::max(r, std::abs(ev[static_cast<std::size_t>(i)]));
    return r;
}

// Smallest singular value of a square matrix, via eigenvalues of A^T A.
inline double smallest_singular_value(const Mat& a) {
    const int d = a.dim;
    Mat ata = Mat::zero(d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double s = 0;
            for (int k = 0; k < d; ++k) s += a.at(k, r) * a.at(k, c);
            ata.at(r, c) = s;
        }
    auto ev = symmetric_eigenvalues(ata);
    double mn = ev[0];
    for (int i = 1; i < d; ++i) mn = std::min(mn, ev[static_cast<std::size_t>(i)]);
    return std::sqrt(std::max(0.0, mn));
}

}  // namespace frostlab
