#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfsim/errors.hpp"
#include "qfsim/particle.hpp"

namespace qfsim {

// One allowed elementary 2->1 fusion: combine(in.first, in.second) -> out.
// The pair is unordered; rules are stored with in.first <= in.second by enum
// value and queried the same way.
struct VertexRule {
    std::pair<ParticleType, ParticleType> in;
    ParticleType out;

    bool operator==(const VertexRule& o) const = default;
};

inline VertexRule make_rule(ParticleType a, ParticleType b, ParticleType out) {
    if (static_cast<int>(b) < static_cast<int>(a)) std::swap(a, b);
    return VertexRule{{a, b}, out};
}

// QED: fermion + its antiparticle fuse to a photon, and fermion + photon
// fuse to the same fermion (photon emission/absorption read in reverse).
inline std::vector<VertexRule> default_vertex_rules() {
    std::vector<VertexRule> rules;
    const ParticleType leptons[] = {ParticleType::electron, ParticleType::muon,
                                    ParticleType::tauon};
    for (ParticleType l : leptons) {
        ParticleType lbar = antiparticle(l);
        rules.push_back(make_rule(l, lbar, ParticleType::photon));
        rules.push_back(make_rule(l, ParticleType::photon, l));
        rules.push_back(make_rule(lbar, ParticleType::photon, lbar));
    }
    return rules;
}

// Fusion products of an unordered type pair under the given rules.
inline std::vector<ParticleType> combine_products(const std::vector<VertexRule>& rules,
                                                  ParticleType a, ParticleType b) {
    if (static_cast<int>(b) < static_cast<int>(a)) std::swap(a, b);
    std::vector<ParticleType> out;
    for (const auto& r : rules)
        if (r.in.first == a && r.in.second == b) out.push_back(r.out);
    return out;
}

// Type pairs a single particle may split into (the reverse reading of the
// combine rules).
inline std::vector<std::pair<ParticleType, ParticleType>>
split_products(const std::vector<VertexRule>& rules, ParticleType a) {
    std::vector<std::pair<ParticleType, ParticleType>> out;
    for (const auto& r : rules)
        if (r.out == a) out.push_back(r.in);
    return out;
}

// Parses one rule per line, "in1 in2 -> out", '#' comments, blank lines
// skipped. Particle names as in particle_from_name.
inline std::vector<VertexRule> parse_vertex_rules(const std::string& text) {
    std::vector<VertexRule> rules;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string a, b, arrow, out, extra;
        if (!(ls >> a)) continue;  // blank
        if (!(ls >> b >> arrow >> out) || arrow != "->" || (ls >> extra))
            throw ConfigError("vertex rule line " + std::to_string(lineno) +
                              ": expected 'in1 in2 -> out'");
        rules.push_back(make_rule(particle_from_name(a), particle_from_name(b),
                                  particle_from_name(out)));
    }
    return rules;
}

// Charge bookkeeping sanity for a rule set; throws VertexError on the first
// violating rule.
inline void check_charge_conservation(const std::vector<VertexRule>& rules) {
    for (const auto& r : rules) {
        if (charge(r.in.first) + charge(r.in.second) != charge(r.out)) {
            throw VertexError("rule violates charge conservation: " +
                              std::string(name(r.in.first)) + " " +
                              std::string(name(r.in.second)) + " -> " +
                              std::string(name(r.out)));
        }
    }
}

} // namespace qfsim
