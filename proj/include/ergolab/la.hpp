#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "ergolab/error.hpp"

namespace ergolab {

// Points and matrices for ambient dimension 1 or 2. Dimension 1 uses the x
// component only; the dimension itself travels with the phase space / family,
// not with every value.
struct Vec {
    double x = 0.0;
    double y = 0.0;

    friend Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec a, Vec b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec a) { return std::sqrt(dot(a, a)); }

// 2x2 matrix in row-major order; 1D maps use entry a with b=c=0, d=1.
struct Mat {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    Vec apply(Vec v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    friend Mat operator*(const Mat& m, const Mat& n) {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
};

inline double det(const Mat& m) { return m.a * m.d - m.b * m.c; }

inline Mat inverse(const Mat& m) {
    double dd = det(m);
    require(std::abs(dd) > 1e-300, "singular-matrix", "matrix not invertible");
    return {m.d / dd, -m.b / dd, -m.c / dd, m.a / dd};
}

// Singular values of a 2x2 matrix in closed form (largest, smallest).
// For 1D matrices pass dim=1: both values are |a|.
struct SingularValues {
    double smax = 0.0;
    double smin = 0.0;
};

inline SingularValues singular_values(const Mat& m, int dim) {
    if (dim == 1) {
        double s = std::abs(m.a);
        return {s, s};
    }
    double e = 0.5 * (m.a + m.d);
    double f = 0.5 * (m.a - m.d);
    double g = 0.5 * (m.c + m.b);
    double h = 0.5 * (m.c - m.b);
    double q = std::hypot(e, h);
    double r = std::hypot(f, g);
    return {q + r, std::abs(q - r)};
}

inline double op_norm(const Mat& m, int dim) { return singular_values(m, dim).smax; }

// Operator norm of the inverse = 1/smin, computed from singular values of the
// forward matrix rather than by inverting (stable when smin is near 1).
inline double inv_op_norm(const Mat& m, int dim) {
    double s = singular_values(m, dim).smin;
    require(s > 1e-300, "singular-matrix", "Jacobian has vanishing singular value");
    return 1.0 / s;
}

inline double mat_det_dim(const Mat& m, int dim) { return dim == 1 ? m.a : det(m); }

}  // namespace ergolab
