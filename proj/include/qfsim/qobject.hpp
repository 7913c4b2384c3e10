#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qfsim/errors.hpp"
#include "qfsim/fourvec.hpp"
#include "qfsim/particle.hpp"

namespace qfsim {

using Coord = std::vector<std::int64_t>;
using RealCoord = std::vector<double>;

inline constexpr double kDefaultOnShellTol = 1e-9;

// One particle/wave's state on one path: type, four-momentum, spin label,
// lattice position, and the free phase-evolution rate d(psi)/dt = -iE.
// The continuous position carries the sub-cell residue; the occupied cell
// is its floor.
struct StateElement {
    ParticleType ptype = ParticleType::photon;
    FourMomentum p;
    double sigma = 0.0;
    RealCoord pos;          // cell units, fractional
    cd phase_rate{0.0, 0.0};
    bool intermediate = false;  // internal line of an ia-channel; may be off-shell

    Coord cell() const {
        Coord c(pos.size());
        for (std::size_t i = 0; i < pos.size(); ++i)
            c[i] = static_cast<std::int64_t>(std::floor(pos[i]));
        return c;
    }
};

inline StateElement make_element(ParticleType t, const FourMomentum& p, double sigma,
                                 RealCoord pos) {
    StateElement el;
    el.ptype = t;
    el.p = p;
    el.sigma = sigma;
    el.pos = std::move(pos);
    el.phase_rate = cd(0.0, -p.e);
    return el;
}

// One alternative in a q-object's evolution: an ordered tuple of per-particle
// states plus a single complex amplitude.
struct Path {
    std::vector<StateElement> elements;
    cd amplitude{1.0, 0.0};
};

enum class QObjectKind : std::uint8_t { particle_wave, pw_collection, interaction_object };

inline const char* to_string(QObjectKind k) {
    switch (k) {
        case QObjectKind::particle_wave: return "particle_wave";
        case QObjectKind::pw_collection: return "pw_collection";
        default: return "interaction_object";
    }
}

struct IaChannel;  // defined in channels.hpp

// Aggregate quantum object: a set of alternative paths sharing one wave
// function. Operations treat QObjects as immutable values and return
// modified copies.
struct QObject {
    QObjectKind kind = QObjectKind::particle_wave;
    std::vector<Path> paths;
    std::uint64_t id = 0;
    // Populated only while kind == interaction_object.
    std::vector<IaChannel> channels;

    double norm2() const {
        double s = 0.0;
        for (const auto& p : paths) s += std::norm(p.amplitude);
        return s;
    }
};

inline void check_structure(const QObject& q) {
    if (q.paths.empty()) throw StructureError("q-object has no paths");
    std::size_t n = q.paths.front().elements.size();
    for (const auto& p : q.paths) {
        if (p.elements.empty()) throw StructureError("path has no elements");
        if (p.elements.size() != n)
            throw StructureError("paths differ in element count");
    }
    if (q.kind == QObjectKind::particle_wave && n != 1)
        throw StructureError("particle_wave must have exactly one element per path");
    if (q.kind == QObjectKind::pw_collection) {
        for (const auto& p : q.paths)
            for (std::size_t i = 0; i < n; ++i)
                if (p.elements[i].ptype != q.paths.front().elements[i].ptype)
                    throw StructureError("pw_collection paths carry differing type tuples");
    }
}

// The simplest q-object: a single particle/wave with one path, amplitude 1.
inline QObject make_particle_wave(ParticleType t, const FourMomentum& p, double sigma,
                                  RealCoord pos, double onshell_tol = kDefaultOnShellTol) {
    if (!sigma_valid(t, sigma))
        throw SpinDomainError("sigma label invalid for particle type");
    if (!is_onshell(p, mass(t), onshell_tol))
        throw OnShellViolation("four-momentum off shell for declared type");
    QObject q;
    q.kind = QObjectKind::particle_wave;
    q.paths.push_back(Path{{make_element(t, p, sigma, std::move(pos))}, cd(1.0, 0.0)});
    return q;
}

// Two-particle collection in the maximally entangled spin state
//   (|s1a, s2a> + |s1b, s2b>) / sqrt(2),
// path i pairing pw1_states[i] with pw2_states[i].
inline QObject make_entangled_pair(const std::pair<StateElement, StateElement>& pw1_states,
                                   const std::pair<StateElement, StateElement>& pw2_states) {
    auto same_but_sigma = [](const StateElement& a, const StateElement& b) {
        return a.ptype == b.ptype && a.p == b.p && a.pos == b.pos;
    };
    if (!same_but_sigma(pw1_states.first, pw1_states.second) ||
        !same_but_sigma(pw2_states.first, pw2_states.second))
        throw StructureError("entangled-pair alternatives must differ only in sigma");
    const double r = 1.0 / std::sqrt(2.0);
    QObject q;
    q.kind = QObjectKind::pw_collection;
    q.paths.push_back(Path{{pw1_states.first, pw2_states.first}, cd(r, 0.0)});
    q.paths.push_back(Path{{pw1_states.second, pw2_states.second}, cd(r, 0.0)});
    check_structure(q);
    return q;
}

// Rescales all amplitudes by one positive real so sum |amp|^2 = 1.
inline QObject normalize(QObject q) {
    double n2 = q.norm2();
    if (n2 <= 0.0) throw DegenerateObjectError("all path amplitudes vanish");
    double s = 1.0 / std::sqrt(n2);
    for (auto& p : q.paths) p.amplitude *= s;
    return q;
}

// Born weight of path i: |amp_i|^2 / sum_j |amp_j|^2.
inline double path_probability(const QObject& q, std::size_t i) {
    if (i >= q.paths.size()) throw IndexError("path index out of range");
    double n2 = q.norm2();
    if (n2 <= 0.0) throw DegenerateObjectError("all path amplitudes vanish");
    return std::norm(q.paths[i].amplitude) / n2;
}

} // namespace qfsim

// completes IaChannel so QObject::channels is usable wherever this header is
#include "qfsim/channels.hpp"
