#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qfsim/lattice.hpp"
#include "qfsim/particle.hpp"
#include "qfsim/rng.hpp"

namespace qfsim {

namespace detail {

// reference element for the object's clock: first element of the strongest
// path (ties resolved toward the lower path index, so the choice is stable)
inline const StateElement& clock_element(const QObject& q) {
    check_structure(q);
    std::size_t best = 0;
    double best_w = std::norm(q.paths[0].amplitude);
    for (std::size_t i = 1; i < q.paths.size(); ++i) {
        double w = std::norm(q.paths[i].amplitude);
        if (w > best_w) { best_w = w; best = i; }
    }
    return q.paths[best].elements.front();
}

inline std::uint64_t hash_candidate(const Coord& cell, PathRef a, PathRef b) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (auto v : cell) h = mix64(h ^ static_cast<std::uint64_t>(v));
    h = mix64(h ^ a.obj);
    h = mix64(h ^ static_cast<std::uint64_t>(a.path));
    h = mix64(h ^ b.obj);
    h = mix64(h ^ static_cast<std::uint64_t>(b.path));
    return h;
}

} // namespace detail

// propertimestep = fx * timestep with fx = m/E of the object's clock element;
// a photon has no rest frame, so its proper interval is zero and the update
// falls back to global time.
inline double proper_timestep(const QObject& q, double timestep) {
    const StateElement& el = detail::clock_element(q);
    if (el.p.e <= 0.0) throw KinematicsError("nonpositive energy in proper_timestep");
    double m2 = el.p.mass2();
    if (m2 <= 0.0) return 0.0;
    return std::sqrt(m2) / el.p.e * timestep;
}

// Advance every element of a free q-object by the given proper interval.
// Positions move with v = p/E in global time, which is recovered from the
// clock element (dt = dtau * E/m); phases rotate as exp(phase_rate * dtau).
// A zero proper interval means a light-like clock: positions and phases then
// advance in global time directly.
inline QObject pw_update(const QObject& q, double propertimestep, const SimConfig& cfg) {
    if (q.kind == QObjectKind::interaction_object)
        throw StructureError("pw_update applied to an interaction object");
    const StateElement& ref = detail::clock_element(q);

    double dt_global, phase_dt;
    if (propertimestep == 0.0) {
        dt_global = cfg.timestep;
        phase_dt = cfg.timestep;
    } else {
        double m = std::sqrt(ref.p.mass2());
        dt_global = propertimestep * ref.p.e / m;
        phase_dt = propertimestep;
    }

    QObject out = q;
    for (auto& path : out.paths) {
        for (auto& el : path.elements) {
            const double vel[3] = {el.p.px / el.p.e, el.p.py / el.p.e, el.p.pz / el.p.e};
            for (std::size_t d = 0; d < el.pos.size() && d < 3; ++d)
                el.pos[d] += vel[d] * dt_global / cfg.spacing;
            path.amplitude *= std::exp(el.phase_rate * phase_dt);
        }
    }
    return out;
}

struct Fluctuation {
    Coord position;
    PathRef pw1, pw2;
    enum class Outcome { nothing, interaction_collapse, interaction_volatile, decay } outcome =
        Outcome::nothing;
};

inline std::string to_string(Fluctuation::Outcome o) {
    switch (o) {
        case Fluctuation::Outcome::nothing: return "nothing";
        case Fluctuation::Outcome::interaction_collapse: return "interaction_collapse";
        case Fluctuation::Outcome::interaction_volatile: return "interaction_volatile";
        case Fluctuation::Outcome::decay: return "decay";
    }
    return "?";
}

// One candidate = a cell shared by paths of two distinct objects. Each
// candidate fires independently with probability
//   fluct_rate * (wA * wB)^fluct_exponent
// where w is the path's share of its object's norm. Among fired candidates a
// single one is chosen uniformly. Draws are keyed by (seed, step, candidate)
// so the result is independent of traversal and worker count.
inline std::optional<Fluctuation> sample_fluctuation(const SimState& state, std::uint64_t step) {
    if (state.cfg.fluct_rate <= 0.0) return std::nullopt;

    std::map<std::uint64_t, double> norm2;
    for (const auto& [id, q] : state.objects) norm2[id] = q.norm2();

    struct Candidate { Coord cell; PathRef a, b; };
    std::vector<Candidate> fired;
    for (const auto& [cell, refs] : state.lattice.by_cell) {
        for (auto ia = refs.begin(); ia != refs.end(); ++ia) {
            for (auto ib = std::next(ia); ib != refs.end(); ++ib) {
                if (ia->obj == ib->obj) continue;
                const QObject& qa = state.objects.at(ia->obj);
                const QObject& qb = state.objects.at(ib->obj);
                double wa = std::norm(qa.paths[ia->path].amplitude) / norm2[ia->obj];
                double wb = std::norm(qb.paths[ib->path].amplitude) / norm2[ib->obj];
                double prob = state.cfg.fluct_rate *
                              std::pow(wa * wb, state.cfg.fluct_exponent);
                prob = std::clamp(prob, 0.0, 1.0);
                CounterRng rng(state.cfg.seed, RngPurpose::fluctuation_fire, step,
                               detail::hash_candidate(cell, *ia, *ib));
                if (rng.uniform() < prob) fired.push_back({cell, *ia, *ib});
            }
        }
    }
    if (fired.empty()) return std::nullopt;

    CounterRng pick(state.cfg.seed, RngPurpose::fluctuation_pick, step);
    const Candidate& c = fired[pick.uniform_under(fired.size())];
    return Fluctuation{c.cell, c.a, c.b, Fluctuation::Outcome::nothing};
}

// volatile (no collapse) with probability volatile_prob, durable otherwise
inline Fluctuation::Outcome classify_outcome(std::uint64_t seed, std::uint64_t step,
                                             double volatile_prob) {
    CounterRng rng(seed, RngPurpose::outcome, step);
    return rng.uniform() < volatile_prob ? Fluctuation::Outcome::interaction_volatile
                                         : Fluctuation::Outcome::interaction_collapse;
}

// Advance every q-object by one global step and refresh the occupancy index.
// Object updates are pure and run on cfg.workers threads; results are applied
// in id order so the state never depends on scheduling.
inline void advance_objects(SimState& state, double timestep) {
    std::vector<std::uint64_t> ids;
    ids.reserve(state.objects.size());
    for (const auto& [id, q] : state.objects) ids.push_back(id);

    std::vector<QObject> updated(ids.size());
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const QObject& q = state.objects.at(ids[i]);
            updated[i] = pw_update(q, proper_timestep(q, timestep), state.cfg);
        }
    };
    std::size_t nw = std::max<std::size_t>(1, state.cfg.workers);
    if (nw <= 1 || ids.size() <= 1) {
        work(0, ids.size());
    } else {
        nw = std::min(nw, ids.size());
        std::vector<std::thread> pool;
        std::size_t chunk = (ids.size() + nw - 1) / nw;
        for (std::size_t w = 0; w < nw; ++w) {
            std::size_t lo = w * chunk, hi = std::min(ids.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    for (auto& q : updated) {
        state.wrap_positions(q);
        if (state.cfg.boundary == Boundary::absorb && !state.object_in_bounds(q)) {
            state.remove_object(q.id);
            continue;
        }
        state.replace_object(std::move(q));
    }
}

} // namespace qfsim
