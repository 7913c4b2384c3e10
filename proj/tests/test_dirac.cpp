#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>

#include "qfsim/dirac.hpp"
#include "qfsim/rng.hpp"

using namespace qfsim;

namespace {

// Gammas rebuilt from Pauli blocks instead of literal entries, so the two
// constructions cross-check each other.
const std::array<Mat2c, 3> kPauli = {
    Mat2c{{{cd(0, 0), cd(1, 0)}, {cd(1, 0), cd(0, 0)}}},
    Mat2c{{{cd(0, 0), cd(0, -1)}, {cd(0, 1), cd(0, 0)}}},
    Mat2c{{{cd(1, 0), cd(0, 0)}, {cd(0, 0), cd(-1, 0)}}},
};

Mat4c block_gamma(int mu) {
    Mat4c g{};
    if (mu == 0) {
        for (int i = 0; i < 2; ++i) {
            g[i][i] = cd(1, 0);
            g[i + 2][i + 2] = cd(-1, 0);
        }
        return g;
    }
    const Mat2c& s = kPauli[mu - 1];
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            g[r][c + 2] = s[r][c];
            g[r + 2][c] = -s[r][c];
        }
    return g;
}

double max_abs_diff(const Mat4c& a, const Mat4c& b) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
    return m;
}

double vec_scale(const Vec4c& v) {
    double m = 0.0;
    for (const auto& c : v) m = std::max(m, std::abs(c));
    return m;
}

FourMomentum random_momentum(CounterRng& rng, double m) {
    double px = 200.0 * (rng.uniform() - 0.5);
    double py = 200.0 * (rng.uniform() - 0.5);
    double pz = 200.0 * (rng.uniform() - 0.5);
    return onshell_momentum(m, px, py, pz);
}

std::array<double, 3> rotate3(const std::array<double, 3>& v,
                              const std::array<double, 3>& axis, double ang) {
    double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    std::array<double, 3> k{axis[0] / n, axis[1] / n, axis[2] / n};
    std::array<double, 3> kxv{k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2],
                              k[0] * v[1] - k[1] * v[0]};
    double kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    std::array<double, 3> r;
    for (int i = 0; i < 3; ++i)
        r[i] = v[i] * std::cos(ang) + kxv[i] * std::sin(ang) +
               k[i] * kv * (1.0 - std::cos(ang));
    return r;
}

cd dot_conj(const LorentzVecC& a, const LorentzVecC& b) {
    // a . b* with the metric
    return a[0] * std::conj(b[0]) - a[1] * std::conj(b[1]) - a[2] * std::conj(b[2]) -
           a[3] * std::conj(b[3]);
}

}  // namespace

TEST_CASE("gamma matrices match the Pauli block construction") {
    for (int mu = 0; mu < 4; ++mu) REQUIRE(max_abs_diff(gamma(mu), block_gamma(mu)) == 0.0);
}

TEST_CASE("gammas satisfy the Clifford algebra") {
    const double g_metric[4] = {1.0, -1.0, -1.0, -1.0};
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            Mat4c anti = mat_add(mat_mul(gamma(mu), gamma(nu)), mat_mul(gamma(nu), gamma(mu)));
            Mat4c want = identity4(cd(mu == nu ? 2.0 * g_metric[mu] : 0.0, 0.0));
            REQUIRE(max_abs_diff(anti, want) == 0.0);
        }
}

TEST_CASE("spinors are normalized and solve the free equation") {
    CounterRng rng(41, RngPurpose::scratch);
    const double m = 0.51099895;
    for (int trial = 0; trial < 50; ++trial) {
        FourMomentum p = random_momentum(rng, m);
        for (double s : {0.5, -0.5}) {
            Vec4c u = u_spinor(p, m, s);
            Vec4c v = v_spinor(p, m, s);
            Vec4c ub = bar(u), vb = bar(v);

            cd uu{}, vv{};
            for (int i = 0; i < 4; ++i) {
                uu += ub[i] * u[i];
                vv += vb[i] * v[i];
            }
            REQUIRE(std::abs(uu - cd(2.0 * m, 0.0)) < 1e-11 * p.e);
            REQUIRE(std::abs(vv + cd(2.0 * m, 0.0)) < 1e-11 * p.e);

            Mat4c sp = slash(p);
            Vec4c ru = mat_vec(sp, u), rv = mat_vec(sp, v);
            for (int i = 0; i < 4; ++i) {
                REQUIRE(std::abs(ru[i] - m * u[i]) < 1e-11 * p.e * vec_scale(u));
                REQUIRE(std::abs(rv[i] + m * v[i]) < 1e-11 * p.e * vec_scale(v));
            }
        }
    }
}

TEST_CASE("spinors agree with the projector construction") {
    CounterRng rng(42, RngPurpose::scratch);
    const double m = 105.6583755;
    for (int trial = 0; trial < 50; ++trial) {
        FourMomentum p = random_momentum(rng, m);
        const double n = std::sqrt(p.e + m);
        for (double s : {0.5, -0.5}) {
            Vec2c chi = detail::chi_of(s);
            Vec4c w{chi[0], chi[1], cd(0, 0), cd(0, 0)};
            Vec4c u_alt = mat_vec(slash(p), w);
            for (int i = 0; i < 4; ++i) u_alt[i] = (u_alt[i] + m * w[i]) / n;
            Vec4c u = u_spinor(p, m, s);
            for (int i = 0; i < 4; ++i) REQUIRE(std::abs(u[i] - u_alt[i]) < 1e-13 * n * n);

            Vec2c eta = detail::conj_spinor(chi);
            Vec4c w2{cd(0, 0), cd(0, 0), eta[0], eta[1]};
            Vec4c v_alt = mat_vec(slash(p), w2);
            for (int i = 0; i < 4; ++i) v_alt[i] = (m * w2[i] - v_alt[i]) / n;
            Vec4c v = v_spinor(p, m, s);
            for (int i = 0; i < 4; ++i) REQUIRE(std::abs(v[i] - v_alt[i]) < 1e-13 * n * n);
        }
    }
}

TEST_CASE("spin sums reproduce the energy projectors") {
    CounterRng rng(43, RngPurpose::scratch);
    const double m = 1776.86;
    FourMomentum p = random_momentum(rng, m);

    Mat4c sum_u{}, sum_v{};
    for (double s : {0.5, -0.5}) {
        Vec4c u = u_spinor(p, m, s), ub = bar(u);
        Vec4c v = v_spinor(p, m, s), vb = bar(v);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                sum_u[i][j] += u[i] * ub[j];
                sum_v[i][j] += v[i] * vb[j];
            }
    }
    Mat4c want_u = mat_add(slash(p), identity4(cd(m, 0.0)));
    Mat4c want_v = mat_add(slash(p), identity4(cd(-m, 0.0)));
    REQUIRE(max_abs_diff(sum_u, want_u) < 1e-11 * p.e);
    REQUIRE(max_abs_diff(sum_v, want_v) < 1e-11 * p.e);
}

TEST_CASE("rotating momentum and frame together rotates the spinor") {
    CounterRng rng(44, RngPurpose::scratch);
    const double m = 0.51099895;
    const std::array<double, 3> axis{0.3, -1.1, 0.7};
    const double ang = 1.234;
    SpinFrame f = SpinFrame::axis_angle(axis, ang);

    for (int trial = 0; trial < 20; ++trial) {
        FourMomentum p = random_momentum(rng, m);
        auto pr3 = rotate3({p.px, p.py, p.pz}, axis, ang);
        FourMomentum pr{p.e, pr3[0], pr3[1], pr3[2]};
        for (double s : {0.5, -0.5}) {
            Vec4c u = u_spinor(p, m, s);
            // S = diag(D, D) acting on the bispinor
            Vec4c su{};
            Vec2c up = apply2(f.d, Vec2c{u[0], u[1]});
            Vec2c lo = apply2(f.d, Vec2c{u[2], u[3]});
            su = {up[0], up[1], lo[0], lo[1]};
            Vec4c ur = u_spinor(pr, m, s, f);
            for (int i = 0; i < 4; ++i) REQUIRE(std::abs(su[i] - ur[i]) < 1e-12 * p.e);
        }
    }
}

TEST_CASE("vector currents are conserved on shell") {
    CounterRng rng(45, RngPurpose::scratch);
    const double m = 0.51099895;
    for (int trial = 0; trial < 50; ++trial) {
        FourMomentum p1 = random_momentum(rng, m);
        FourMomentum p2 = random_momentum(rng, m);
        for (double s1 : {0.5, -0.5})
            for (double s2 : {0.5, -0.5}) {
                LorentzVecC j = current(bar(u_spinor(p2, m, s2)), u_spinor(p1, m, s1));
                LorentzVecC q{cd(p2.e - p1.e, 0), cd(p2.px - p1.px, 0),
                              cd(p2.py - p1.py, 0), cd(p2.pz - p1.pz, 0)};
                REQUIRE(std::abs(lorentz_dot(q, j)) < 1e-10 * p1.e * p2.e);
            }
    }
    // diagonal current gives the density 2E
    FourMomentum p = random_momentum(rng, m);
    LorentzVecC j = current(bar(u_spinor(p, m, 0.5)), u_spinor(p, m, 0.5));
    REQUIRE(std::abs(j[0] - cd(2.0 * p.e, 0.0)) < 1e-11 * p.e);
}

TEST_CASE("polarization vectors are transverse and orthonormal") {
    CounterRng rng(46, RngPurpose::scratch);
    for (int trial = 0; trial < 50; ++trial) {
        double px = rng.uniform() - 0.5, py = rng.uniform() - 0.5, pz = rng.uniform() - 0.5;
        FourMomentum k = onshell_momentum(0.0, 40 * px, 40 * py, 40 * pz);
        LorentzVecC ep = polarization_vector(k, 1.0);
        LorentzVecC em = polarization_vector(k, -1.0);
        LorentzVecC kc{cd(k.e, 0), cd(k.px, 0), cd(k.py, 0), cd(k.pz, 0)};

        REQUIRE(std::abs(dot_conj(ep, ep) + cd(1, 0)) < 1e-13);
        REQUIRE(std::abs(dot_conj(em, em) + cd(1, 0)) < 1e-13);
        REQUIRE(std::abs(dot_conj(ep, em)) < 1e-13);
        REQUIRE(std::abs(lorentz_dot(kc, ep)) < 1e-13 * k.e);
        REQUIRE(std::abs(lorentz_dot(kc, em)) < 1e-13 * k.e);

        // transverse completeness: sum_l eps^i eps*^j = delta_ij - khat_i khat_j
        double ka = k.pabs();
        std::array<double, 3> kh{k.px / ka, k.py / ka, k.pz / ka};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cd sum = ep[i + 1] * std::conj(ep[j + 1]) + em[i + 1] * std::conj(em[j + 1]);
                cd want((i == j ? 1.0 : 0.0) - kh[i] * kh[j], 0.0);
                REQUIRE(std::abs(sum - want) < 1e-13);
            }
    }
}

TEST_CASE("domain errors for bad spin labels") {
    FourMomentum p = onshell_momentum(1.0, 0, 0, 5.0);
    REQUIRE_THROWS_AS(u_spinor(p, 1.0, 0.3), SpinDomainError);
    REQUIRE_THROWS_AS(polarization_vector(p, 0.0), SpinDomainError);
    REQUIRE_THROWS_AS(polarization_vector(FourMomentum{1.0, 0, 0, 0}, 1.0), KinematicsError);
}
