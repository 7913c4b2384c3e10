#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qfsim/errors.hpp"
#include "qfsim/fourvec.hpp"

namespace qfsim {

using Vec2c = std::array<cd, 2>;
using Mat2c = std::array<std::array<cd, 2>, 2>;
using Vec4c = std::array<cd, 4>;
using Mat4c = std::array<std::array<cd, 4>, 4>;
using LorentzVecC = std::array<cd, 4>;  // contravariant components

inline Vec4c mat_vec(const Mat4c& m, const Vec4c& v) {
    Vec4c r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i] += m[i][j] * v[j];
    return r;
}

inline Mat4c mat_mul(const Mat4c& a, const Mat4c& b) {
    Mat4c r{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline Mat4c mat_add(const Mat4c& a, const Mat4c& b) {
    Mat4c r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = a[i][j] + b[i][j];
    return r;
}

inline Mat4c mat_scale(cd s, const Mat4c& a) {
    Mat4c r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = s * a[i][j];
    return r;
}

inline Mat4c identity4(cd s = cd(1.0, 0.0)) {
    Mat4c r{};
    for (int i = 0; i < 4; ++i) r[i][i] = s;
    return r;
}

// Dirac representation, metric (+,-,-,-):
//   gamma^0 = [[I,0],[0,-I]],  gamma^i = [[0,sigma_i],[-sigma_i,0]].
inline const Mat4c& gamma(int mu) {
    static const std::array<Mat4c, 4> g = [] {
        const cd o(1.0, 0.0), i(0.0, 1.0), z(0.0, 0.0);
        std::array<Mat4c, 4> m{};
        m[0] = Mat4c{{{o, z, z, z}, {z, o, z, z}, {z, z, -o, z}, {z, z, z, -o}}};
        m[1] = Mat4c{{{z, z, z, o}, {z, z, o, z}, {z, -o, z, z}, {-o, z, z, z}}};
        m[2] = Mat4c{{{z, z, z, -i}, {z, z, i, z}, {z, i, z, z}, {-i, z, z, z}}};
        m[3] = Mat4c{{{z, z, o, z}, {z, z, z, -o}, {-o, z, z, z}, {z, o, z, z}}};
        return m;
    }();
    return g[mu];
}

// gamma^mu q_mu with q contravariant real.
inline Mat4c slash(const FourMomentum& q) {
    Mat4c r = mat_scale(cd(q.e, 0.0), gamma(0));
    r = mat_add(r, mat_scale(cd(-q.px, 0.0), gamma(1)));
    r = mat_add(r, mat_scale(cd(-q.py, 0.0), gamma(2)));
    r = mat_add(r, mat_scale(cd(-q.pz, 0.0), gamma(3)));
    return r;
}

// Minkowski contraction of complex four-vectors, no conjugation.
inline cd lorentz_dot(const LorentzVecC& a, const LorentzVecC& b) {
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

// SU(2) rotation of the spin quantization frame. Identity means spin labels
// refer to the lab z axis.
struct SpinFrame {
    Mat2c d{{{cd(1.0, 0.0), cd(0.0, 0.0)}, {cd(0.0, 0.0), cd(1.0, 0.0)}}};

    static SpinFrame axis_angle(const std::array<double, 3>& axis, double angle) {
        double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
        if (n == 0.0) throw KinematicsError("zero rotation axis");
        double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
        double nx = axis[0] / n, ny = axis[1] / n, nz = axis[2] / n;
        // cos(a/2) I - i sin(a/2) n.sigma
        SpinFrame f;
        f.d = Mat2c{{{cd(c, -s * nz), cd(-s * ny, -s * nx)},
                     {cd(s * ny, -s * nx), cd(c, s * nz)}}};
        return f;
    }
};

inline Vec2c apply2(const Mat2c& m, const Vec2c& v) {
    return Vec2c{m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

inline Mat2c sigma_dot_p(const FourMomentum& p) {
    return Mat2c{{{cd(p.pz, 0.0), cd(p.px, -p.py)}, {cd(p.px, p.py), cd(-p.pz, 0.0)}}};
}

namespace detail {
inline Vec2c chi_of(double sigma) {
    if (sigma == 0.5) return Vec2c{cd(1.0, 0.0), cd(0.0, 0.0)};
    if (sigma == -0.5) return Vec2c{cd(0.0, 0.0), cd(1.0, 0.0)};
    throw SpinDomainError("fermion sigma must be +1/2 or -1/2");
}
// Charge-conjugate two-spinor: eta = -i sigma2 chi*.
inline Vec2c conj_spinor(const Vec2c& chi) {
    return Vec2c{-std::conj(chi[1]), std::conj(chi[0])};
}
}  // namespace detail

// Positive-energy solution, normalized to ubar u = 2m:
//   u = ( sqrt(E+m) chi, (sigma.p) chi / sqrt(E+m) ).
inline Vec4c u_spinor(const FourMomentum& p, double m, double sigma,
                      const SpinFrame& f = {}) {
    if (p.e + m <= 0.0) throw KinematicsError("u_spinor needs E+m > 0");
    Vec2c chi = apply2(f.d, detail::chi_of(sigma));
    double n = std::sqrt(p.e + m);
    Vec2c lower = apply2(sigma_dot_p(p), chi);
    return Vec4c{n * chi[0], n * chi[1], lower[0] / n, lower[1] / n};
}

// Negative-energy solution, vbar v = -2m. The two-spinor is the charge
// conjugate of the frame-rotated chi, so the same frame rotates both.
inline Vec4c v_spinor(const FourMomentum& p, double m, double sigma,
                      const SpinFrame& f = {}) {
    if (p.e + m <= 0.0) throw KinematicsError("v_spinor needs E+m > 0");
    Vec2c eta = detail::conj_spinor(apply2(f.d, detail::chi_of(sigma)));
    double n = std::sqrt(p.e + m);
    Vec2c upper = apply2(sigma_dot_p(p), eta);
    return Vec4c{upper[0] / n, upper[1] / n, n * eta[0], n * eta[1]};
}

// Dirac adjoint as a row vector: sbar = s^dagger gamma^0.
inline Vec4c bar(const Vec4c& s) {
    return Vec4c{std::conj(s[0]), std::conj(s[1]), -std::conj(s[2]), -std::conj(s[3])};
}

// j^mu = barrow gamma^mu ket, barrow already a row (see bar()).
inline LorentzVecC current(const Vec4c& barrow, const Vec4c& ket) {
    LorentzVecC j{};
    for (int mu = 0; mu < 4; ++mu) {
        const Mat4c& g = gamma(mu);
        cd acc(0.0, 0.0);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) acc += barrow[i] * g[i][k] * ket[k];
        j[mu] = acc;
    }
    return j;
}

inline cd row_mat_col(const Vec4c& row, const Mat4c& m, const Vec4c& col) {
    cd acc(0.0, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) acc += row[i] * m[i][k] * col[k];
    return acc;
}

// Transverse photon polarization vector for helicity lambda = +-1:
//   eps = -(lambda/sqrt(2)) (theta_hat + i lambda phi_hat), time part 0,
// with theta_hat, phi_hat the spherical unit vectors of the momentum
// direction. Satisfies eps.eps* = -1 and p.eps = 0.
inline LorentzVecC polarization_vector(const FourMomentum& p, double lambda) {
    if (lambda != 1.0 && lambda != -1.0)
        throw SpinDomainError("photon helicity must be +1 or -1");
    double pa = p.pabs();
    if (pa <= 0.0) throw KinematicsError("photon polarization needs |p| > 0");
    double ct = p.pz / pa;
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double cp = 1.0, sp = 0.0;
    double pt = std::hypot(p.px, p.py);
    if (pt > 0.0) {
        cp = p.px / pt;
        sp = p.py / pt;
    }
    const std::array<double, 3> th{ct * cp, ct * sp, -st};
    const std::array<double, 3> ph{-sp, cp, 0.0};
    const double r = -lambda / std::sqrt(2.0);
    LorentzVecC eps{};
    for (int i = 0; i < 3; ++i)
        eps[i + 1] = r * cd(th[i], lambda * ph[i]);
    return eps;
}

} // namespace qfsim
