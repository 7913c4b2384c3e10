#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "qfsim/errors.hpp"

namespace qfsim {

enum class ParticleType : std::uint8_t {
    electron,
    positron,
    photon,
    muon,
    antimuon,
    tauon,
    antitauon,
};

inline constexpr int kNumParticleTypes = 7;

enum class Statistics : std::uint8_t { fermion, boson };

struct ParticleProps {
    ParticleType type;
    std::string_view name;
    int charge;   // units of e, electron = -1
    double mass;  // MeV (natural units)
    Statistics statistics;
    ParticleType antiparticle;
};

// PDG masses in MeV.
inline constexpr std::array<ParticleProps, kNumParticleTypes> kParticleTable{{
    {ParticleType::electron, "electron", -1, 0.51099895, Statistics::fermion, ParticleType::positron},
    {ParticleType::positron, "positron", +1, 0.51099895, Statistics::fermion, ParticleType::electron},
    {ParticleType::photon, "photon", 0, 0.0, Statistics::boson, ParticleType::photon},
    {ParticleType::muon, "muon", -1, 105.6583755, Statistics::fermion, ParticleType::antimuon},
    {ParticleType::antimuon, "antimuon", +1, 105.6583755, Statistics::fermion, ParticleType::muon},
    {ParticleType::tauon, "tauon", -1, 1776.86, Statistics::fermion, ParticleType::antitauon},
    {ParticleType::antitauon, "antitauon", +1, 1776.86, Statistics::fermion, ParticleType::tauon},
}};

inline constexpr const ParticleProps& props(ParticleType t) {
    return kParticleTable[static_cast<std::size_t>(t)];
}

inline constexpr int charge(ParticleType t) { return props(t).charge; }
inline constexpr double mass(ParticleType t) { return props(t).mass; }
inline constexpr Statistics statistics(ParticleType t) { return props(t).statistics; }
inline constexpr ParticleType antiparticle(ParticleType t) { return props(t).antiparticle; }
inline constexpr std::string_view name(ParticleType t) { return props(t).name; }
inline constexpr bool is_fermion(ParticleType t) { return statistics(t) == Statistics::fermion; }
inline constexpr bool is_antiparticle(ParticleType t) { return charge(t) > 0; }

inline ParticleType particle_from_name(std::string_view s) {
    for (const auto& p : kParticleTable)
        if (p.name == s) return p.type;
    throw ConfigError("unknown particle type: " + std::string(s));
}

// Valid sigma labels: spin z-component +-1/2 for massive fermions,
// helicity +-1 for photons.
inline bool sigma_valid(ParticleType t, double sigma) {
    if (is_fermion(t)) return sigma == 0.5 || sigma == -0.5;
    return sigma == 1.0 || sigma == -1.0;
}

} // namespace qfsim
