#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qfsim/channels.hpp"
#include "qfsim/dirac.hpp"
#include "qfsim/errors.hpp"
#include "qfsim/fourvec.hpp"
#include "qfsim/particle.hpp"
#include "qfsim/qobject.hpp"

namespace qfsim {

// Per-type masses used by spinor construction. Defaults to the physical
// table; the massless-limit mode overrides the electron mass with a tiny
// value so spin sums can be compared against the massless formula.
struct MassTable {
    std::array<double, kNumParticleTypes> m{};

    MassTable() {
        for (int i = 0; i < kNumParticleTypes; ++i)
            m[i] = mass(static_cast<ParticleType>(i));
    }
    double of(ParticleType t) const { return m[static_cast<int>(t)]; }
    MassTable with(ParticleType t, double value) const {
        MassTable r = *this;
        r.m[static_cast<int>(t)] = value;
        r.m[static_cast<int>(antiparticle(t))] = value;
        return r;
    }
};

enum class SpinorKind : std::uint8_t { u, v, ubar, vbar };

struct DiracSpinor {
    Vec4c c{};
    ParticleType flavor = ParticleType::electron;
    SpinorKind kind = SpinorKind::u;
};

namespace detail {
inline void require_onshell(const FourMomentum& p, double m, double tol = 1e-9) {
    if (!is_onshell(p, m, tol))
        throw OnShellViolation("spinor momentum off shell for requested mass");
}
}  // namespace detail

inline DiracSpinor make_u(ParticleType t, const FourMomentum& p, double s,
                          const MassTable& masses = {}, const SpinFrame& f = {}) {
    if (!is_fermion(t)) throw SpinDomainError("u spinor needs a fermion type");
    detail::require_onshell(p, masses.of(t));
    return {u_spinor(p, masses.of(t), s, f), t, SpinorKind::u};
}

inline DiracSpinor make_v(ParticleType t, const FourMomentum& p, double s,
                          const MassTable& masses = {}, const SpinFrame& f = {}) {
    if (!is_fermion(t)) throw SpinDomainError("v spinor needs a fermion type");
    detail::require_onshell(p, masses.of(t));
    return {v_spinor(p, masses.of(t), s, f), t, SpinorKind::v};
}

// Bhabha external kinematics: e- in, e+ in, e- out, e+ out. One common mass
// for all four legs; physical by default, tiny in massless-limit mode.
struct BhabhaKinematics {
    FourMomentum p1, p2, p1p, p2p;
    double m = mass(ParticleType::electron);
};

struct BhabhaSpins {
    double s1, s2, s1p, s2p;
};

inline double mandelstam_s(const BhabhaKinematics& k) { return (k.p1 + k.p2).mass2(); }
inline double mandelstam_t(const BhabhaKinematics& k) { return (k.p1 - k.p1p).mass2(); }
inline double mandelstam_u(const BhabhaKinematics& k) { return (k.p1 - k.p2p).mass2(); }

// Head-on collision along z with the outgoing electron at (theta, phi).
inline BhabhaKinematics bhabha_cm_kinematics(double sqrt_s, double theta, double phi,
                                             double m) {
    if (sqrt_s <= 2.0 * m) throw KinematicsError("sqrt_s below the external mass pair");
    const double E = sqrt_s / 2.0;
    const double k = std::sqrt((E - m) * (E + m));
    BhabhaKinematics kin;
    kin.m = m;
    kin.p1 = {E, 0.0, 0.0, k};
    kin.p2 = {E, 0.0, 0.0, -k};
    const double st = std::sin(theta), ct = std::cos(theta);
    kin.p1p = {E, k * st * std::cos(phi), k * st * std::sin(phi), k * ct};
    kin.p2p = {E, -kin.p1p.px, -kin.p1p.py, -kin.p1p.pz};
    return kin;
}

namespace detail {
inline LorentzVecC to_complex(const FourMomentum& p) {
    return {cd(p.e, 0.0), cd(p.px, 0.0), cd(p.py, 0.0), cd(p.pz, 0.0)};
}

// j1_mu (g^{mu nu} + lambda q^mu q^nu) j2_nu
inline cd contract_photon(const LorentzVecC& j1, const LorentzVecC& j2,
                          const FourMomentum& q, double lambda) {
    cd r = lorentz_dot(j1, j2);
    if (lambda != 0.0) {
        LorentzVecC qc = to_complex(q);
        r += lambda * lorentz_dot(j1, qc) * lorentz_dot(j2, qc);
    }
    return r;
}
}  // namespace detail

// Annihilation-channel amplitude
//   (-ie)^2 [vbar(p2,s2) gamma_mu u(p1,s1)]
//           (-i g^{mu nu} / (p1+p2)^2)
//           [ubar(p1',s1') gamma_nu v(p2',s2')],
// with an optional lambda q^mu q^nu propagator-numerator shift for gauge
// checks. The spin frame rotates every quantization axis together.
inline cd bhabha_MA(const BhabhaKinematics& k, const BhabhaSpins& s, double e,
                    double lambda = 0.0, const SpinFrame& f = {}) {
    const FourMomentum q = k.p1 + k.p2;
    const double q2 = q.mass2();
    if (q2 == 0.0) throw PropagatorPoleError("annihilation propagator at the pole");
    const LorentzVecC j1 =
        current(bar(v_spinor(k.p2, k.m, s.s2, f)), u_spinor(k.p1, k.m, s.s1, f));
    const LorentzVecC j2 =
        current(bar(u_spinor(k.p1p, k.m, s.s1p, f)), v_spinor(k.p2p, k.m, s.s2p, f));
    const cd mie(0.0, -e);
    return mie * mie * (cd(0.0, -1.0) / q2) * detail::contract_photon(j1, j2, q, lambda);
}

// Exchange-channel amplitude
//   (-ie)^2 [ubar(p1',s1') gamma_mu u(p1,s1)]
//           (-i g^{mu nu} / (p1-p1')^2)
//           [vbar(p2,s2) gamma_nu v(p2',s2')].
inline cd bhabha_MB(const BhabhaKinematics& k, const BhabhaSpins& s, double e,
                    double lambda = 0.0, const SpinFrame& f = {}) {
    const FourMomentum q = k.p1 - k.p1p;
    const double q2 = q.mass2();
    if (q2 == 0.0) throw PropagatorPoleError("exchange propagator at the pole");
    const LorentzVecC j1 =
        current(bar(u_spinor(k.p1p, k.m, s.s1p, f)), u_spinor(k.p1, k.m, s.s1, f));
    const LorentzVecC j2 =
        current(bar(v_spinor(k.p2, k.m, s.s2, f)), v_spinor(k.p2p, k.m, s.s2p, f));
    const cd mie(0.0, -e);
    return mie * mie * (cd(0.0, -1.0) / q2) * detail::contract_photon(j1, j2, q, lambda);
}

inline cd bhabha_total(const BhabhaKinematics& k, const BhabhaSpins& s, double e,
                       double lambda = 0.0, const SpinFrame& f = {}) {
    return bhabha_MA(k, s, e, lambda, f) - bhabha_MB(k, s, e, lambda, f);
}

struct HelicityAmplitude {
    std::array<double, 4> spins{};
    cd value{};
    double coupling = 0.0;
};

// Spin-averaged squared Bhabha amplitude in the massless limit,
//   2 e^4 [ (s^2+u^2)/t^2 + 2 u^2/(s t) + (t^2+u^2)/s^2 ],
// implemented without spinors as an independent cross-check. Callers are
// expected to pass Mandelstam values with s + t + u = sum of external m^2.
inline double spin_averaged_M2(double s, double t, double u, double e) {
    if (t == 0.0 || s == 0.0) throw PropagatorPoleError("Mandelstam s or t vanishes");
    const double e4 = e * e * e * e;
    return 2.0 * e4 *
           ((s * s + u * u) / (t * t) + 2.0 * (u * u) / (s * t) +
            (t * t + u * u) / (s * s));
}

namespace detail {

struct VertexLeg {
    const StateElement* el;
    bool incoming;
};

// bar/ket assignment at a two-fermion vertex: the outgoing particle or the
// incoming antiparticle supplies the adjoint row.
inline LorentzVecC fermion_current(const VertexLeg& x, const VertexLeg& y,
                                   const MassTable& masses, const SpinFrame& f) {
    const VertexLeg* legs[2] = {&x, &y};
    const VertexLeg* barleg = nullptr;
    const VertexLeg* ketleg = nullptr;
    for (const VertexLeg* l : legs) {
        bool anti = is_antiparticle(l->el->ptype);
        if (l->incoming != anti) {
            if (ketleg) throw VertexError("vertex with two ket legs");
            ketleg = l;
        } else {
            if (barleg) throw VertexError("vertex with two adjoint legs");
            barleg = l;
        }
    }
    double mbar = masses.of(barleg->el->ptype);
    double mket = masses.of(ketleg->el->ptype);
    // incoming adjoint leg is an antiparticle (vbar), outgoing one a particle (ubar)
    Vec4c barrow = bar(barleg->incoming
                           ? v_spinor(barleg->el->p, mbar, barleg->el->sigma, f)
                           : u_spinor(barleg->el->p, mbar, barleg->el->sigma, f));
    Vec4c ket = ketleg->incoming ? u_spinor(ketleg->el->p, mket, ketleg->el->sigma, f)
                                 : v_spinor(ketleg->el->p, mket, ketleg->el->sigma, f);
    return current(barrow, ket);
}

inline Mat4c slash_c(const LorentzVecC& a) {
    Mat4c r = mat_scale(a[0], gamma(0));
    r = mat_add(r, mat_scale(-a[1], gamma(1)));
    r = mat_add(r, mat_scale(-a[2], gamma(2)));
    return mat_add(r, mat_scale(-a[3], gamma(3)));
}

inline LorentzVecC conj_vec(LorentzVecC v) {
    for (auto& x : v) x = std::conj(x);
    return v;
}

}  // namespace detail

// Amplitude of one generated out pair of a typed channel. The in states live
// on the channel (in_elements); the path holds the two out states. A photon
// internal line contracts the two fermion currents through
// -i (g^{mu nu} + lambda q^mu q^nu)/q^2; a fermion internal line is a single
// chain through i (slash(q) + m)/(q^2 - m^2) with explicit photon
// polarization vectors at both vertices.
inline cd channel_amplitude(const IaChannel& c, const Path& path, double e,
                            double lambda = 0.0, const MassTable& masses = {},
                            const SpinFrame& f = {}) {
    if (path.elements.size() != 2)
        throw StructureError("channel path must hold exactly two out states");
    const StateElement& in0 = c.in_elements[0];
    const StateElement& in1 = c.in_elements[1];
    const StateElement& out0 = path.elements[0];
    const StateElement& out1 = path.elements[1];
    const cd mie(0.0, -e);
    const bool combine_first = c.shape.order == ChannelShape::Order::combine_first;

    if (!is_fermion(c.intermediate)) {
        // two fermion currents tied by the photon line
        detail::VertexLeg a, b, x, y;
        if (combine_first) {
            a = {&in0, true};
            b = {&in1, true};
            x = {&out0, false};
            y = {&out1, false};
        } else {
            int si = c.shape.split_in, ex = c.exit_slot;
            a = {si == 0 ? &in0 : &in1, true};
            b = {ex == 0 ? &out0 : &out1, false};
            x = {si == 0 ? &in1 : &in0, true};
            y = {ex == 0 ? &out1 : &out0, false};
        }
        const FourMomentum q =
            combine_first ? in0.p + in1.p
                          : (c.shape.split_in == 0 ? in0.p : in1.p) -
                                (c.exit_slot == 0 ? out0.p : out1.p);
        const double q2 = q.mass2();
        if (q2 == 0.0) throw PropagatorPoleError("photon propagator at the pole");
        const LorentzVecC j1 = detail::fermion_current(a, b, masses, f);
        const LorentzVecC j2 = detail::fermion_current(x, y, masses, f);
        return mie * mie * (cd(0.0, -1.0) / q2) * detail::contract_photon(j1, j2, q, lambda);
    }

    // fermion internal line: exactly one photon and one fermion on each side
    const StateElement* fin = is_fermion(in0.ptype) ? &in0 : &in1;
    const StateElement* gin = is_fermion(in0.ptype) ? &in1 : &in0;
    const StateElement* fout = is_fermion(out0.ptype) ? &out0 : &out1;
    const StateElement* gout = is_fermion(out0.ptype) ? &out1 : &out0;
    if (!is_fermion(fin->ptype) || is_fermion(gin->ptype) || !is_fermion(fout->ptype) ||
        is_fermion(gout->ptype))
        throw VertexError("fermion-line channel needs one photon per vertex");

    const Mat4c eps_in = detail::slash_c(polarization_vector(gin->p, gin->sigma));
    const Mat4c eps_out =
        detail::slash_c(detail::conj_vec(polarization_vector(gout->p, gout->sigma)));
    // adjacency: absorb-then-emit for combine-first, emit-then-absorb for
    // split-first; q runs along fermion-number flow
    const bool anti = is_antiparticle(fin->ptype);
    FourMomentum q = combine_first ? fin->p + gin->p : fin->p - gout->p;
    if (anti) q = FourMomentum{0, 0, 0, 0} - q;
    const double mi = masses.of(c.intermediate);
    const double denom = q.mass2() - mi * mi;
    if (denom == 0.0) throw PropagatorPoleError("fermion propagator at the pole");
    const Mat4c sf = mat_scale(cd(0.0, 1.0) / denom, mat_add(slash(q), identity4(cd(mi, 0.0))));

    const double mf = masses.of(fin->ptype);
    Vec4c barrow, ket;
    Mat4c chain;
    if (!anti) {
        barrow = bar(u_spinor(fout->p, mf, fout->sigma, f));
        ket = u_spinor(fin->p, mf, fin->sigma, f);
        const Mat4c& near_ket = combine_first ? eps_in : eps_out;
        const Mat4c& near_bar = combine_first ? eps_out : eps_in;
        chain = mat_mul(near_bar, mat_mul(sf, near_ket));
    } else {
        barrow = bar(v_spinor(fin->p, mf, fin->sigma, f));
        ket = v_spinor(fout->p, mf, fout->sigma, f);
        const Mat4c& near_bar = combine_first ? eps_in : eps_out;
        const Mat4c& near_ket = combine_first ? eps_out : eps_in;
        chain = mat_mul(near_bar, mat_mul(sf, near_ket));
    }
    return mie * mie * row_mat_col(barrow, chain, ket);
}

} // namespace qfsim
