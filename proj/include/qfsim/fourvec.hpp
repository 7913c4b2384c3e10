#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qfsim/errors.hpp"

namespace qfsim {

using cd = std::complex<double>;

// Minkowski four-vector, metric (+,-,-,-), natural units (hbar = c = 1).
struct FourMomentum {
    double e = 0.0;
    double px = 0.0;
    double py = 0.0;
    double pz = 0.0;

    constexpr FourMomentum() = default;
    constexpr FourMomentum(double e_, double px_, double py_, double pz_)
        : e(e_), px(px_), py(py_), pz(pz_) {}

    constexpr double operator[](int mu) const {
        return mu == 0 ? e : mu == 1 ? px : mu == 2 ? py : pz;
    }

    friend constexpr FourMomentum operator+(const FourMomentum& a, const FourMomentum& b) {
        return {a.e + b.e, a.px + b.px, a.py + b.py, a.pz + b.pz};
    }
    friend constexpr FourMomentum operator-(const FourMomentum& a, const FourMomentum& b) {
        return {a.e - b.e, a.px - b.px, a.py - b.py, a.pz - b.pz};
    }
    friend constexpr FourMomentum operator*(double s, const FourMomentum& a) {
        return {s * a.e, s * a.px, s * a.py, s * a.pz};
    }
    friend constexpr bool operator==(const FourMomentum& a, const FourMomentum& b) {
        return a.e == b.e && a.px == b.px && a.py == b.py && a.pz == b.pz;
    }

    constexpr double dot(const FourMomentum& o) const {
        return e * o.e - px * o.px - py * o.py - pz * o.pz;
    }
    constexpr double mass2() const { return dot(*this); }
    constexpr double p2() const { return px * px + py * py + pz * pz; }
    double pabs() const { return std::sqrt(p2()); }
};

inline double minkowski_dot(const FourMomentum& a, const FourMomentum& b) {
    return a.dot(b);
}

// Relative on-shell defect |e^2 - p^2 - m^2| / e^2.
inline double onshell_defect(const FourMomentum& p, double mass) {
    double lhs = p.e * p.e - p.p2() - mass * mass;
    double scale = p.e * p.e;
    return scale > 0.0 ? std::abs(lhs) / scale : std::abs(lhs);
}

inline bool is_onshell(const FourMomentum& p, double mass, double rel_tol = 1e-9) {
    return p.e > 0.0 && onshell_defect(p, mass) <= rel_tol;
}

// Builds the on-shell four-momentum for a given 3-momentum and mass.
inline FourMomentum onshell_momentum(double mass, double px, double py, double pz) {
    double e = std::sqrt(mass * mass + px * px + py * py + pz * pz);
    return {e, px, py, pz};
}

// Active Lorentz boost with velocity beta (boosts a rest-frame vector to
// velocity +beta).
inline FourMomentum boost(const FourMomentum& p, const std::array<double, 3>& beta) {
    double b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
    if (b2 <= 0.0) return p;
    if (b2 >= 1.0) throw KinematicsError("boost velocity >= c");
    double gamma = 1.0 / std::sqrt(1.0 - b2);
    double bp = beta[0] * p.px + beta[1] * p.py + beta[2] * p.pz;
    double coef = (gamma - 1.0) * bp / b2 + gamma * p.e;
    return {gamma * (p.e + bp),
            p.px + coef * beta[0],
            p.py + coef * beta[1],
            p.pz + coef * beta[2]};
}

// 3x3 rotation acting on the spatial part of four-vectors.
struct Rotation3 {
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    static Rotation3 axis_angle(std::array<double, 3> axis, double angle) {
        double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
        if (n == 0.0) throw KinematicsError("rotation axis is zero");
        for (auto& a : axis) a /= n;
        double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
        Rotation3 r;
        r.m = {{{t * axis[0] * axis[0] + c,
                 t * axis[0] * axis[1] - s * axis[2],
                 t * axis[0] * axis[2] + s * axis[1]},
                {t * axis[0] * axis[1] + s * axis[2],
                 t * axis[1] * axis[1] + c,
                 t * axis[1] * axis[2] - s * axis[0]},
                {t * axis[0] * axis[2] - s * axis[1],
                 t * axis[1] * axis[2] + s * axis[0],
                 t * axis[2] * axis[2] + c}}};
        return r;
    }

    FourMomentum apply(const FourMomentum& p) const {
        return {p.e,
                m[0][0] * p.px + m[0][1] * p.py + m[0][2] * p.pz,
                m[1][0] * p.px + m[1][1] * p.py + m[1][2] * p.pz,
                m[2][0] * p.px + m[2][1] * p.py + m[2][2] * p.pz};
    }

    std::array<double, 3> apply(const std::array<double, 3>& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
                m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
                m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
    }
};

} // namespace qfsim
