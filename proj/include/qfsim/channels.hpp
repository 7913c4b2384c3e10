#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qfsim/errors.hpp"
#include "qfsim/fourvec.hpp"
#include "qfsim/particle.hpp"
#include "qfsim/qobject.hpp"
#include "qfsim/vertex.hpp"

namespace qfsim {

// Abstract channel shape over the symbols {pw1, pw2, a, b, c}. There are
// exactly five: one combine-first form and four split-first forms (which
// input is split x which split branch continues into the combine).
struct ChannelShape {
    enum class Order : std::uint8_t { combine_first, split_first };
    Order order = Order::combine_first;
    int split_in = -1;        // 0 = pw1, 1 = pw2; -1 for combine-first
    int through_branch = -1;  // 0 = branch a feeds the combine, 1 = branch b

    bool operator==(const ChannelShape&) const = default;
};

inline std::vector<ChannelShape> enumerate_shapes() {
    using O = ChannelShape::Order;
    return {
        {O::combine_first, -1, -1},
        {O::split_first, 0, 0},
        {O::split_first, 0, 1},
        {O::split_first, 1, 0},
        {O::split_first, 1, 1},
    };
}

inline std::string shape_text(const ChannelShape& s) {
    if (s.order == ChannelShape::Order::combine_first)
        return "combine(pw1,pw2) -> (a); split(a) -> (b,c)";
    std::string in = s.split_in == 0 ? "pw1" : "pw2";
    std::string other = s.split_in == 0 ? "pw2" : "pw1";
    std::string through = s.through_branch == 0 ? "a" : "b";
    // combine argument order follows the listing: the continuing branch sits
    // where the split input came from.
    std::string args = s.split_in == 0 ? through + "," + other : other + "," + through;
    return "split(" + in + ") -> (a,b); combine(" + args + ") -> (c)";
}

// Rule 1: starts from both in symbols, ends with exactly two out symbols.
// Rule 2: exactly one split and one combine. Both hold for every shape this
// header can express; the checks guard hand-built values in tests.
inline bool satisfies_rules(const ChannelShape& s) {
    if (s.order == ChannelShape::Order::combine_first)
        return s.split_in == -1 && s.through_branch == -1;
    return (s.split_in == 0 || s.split_in == 1) &&
           (s.through_branch == 0 || s.through_branch == 1);
}

// One typed interaction channel. out_types is the representative (first)
// flavor pair; combine-first channels may admit several flavor pairs, all
// kept in out_flavors in canonical order. prop_coeff expresses the internal
// line's momentum over the basis (p1, p2, k0) with k0 the momentum of out
// slot 0, sign-normalized so equivalent channels compare equal.
struct IaChannel {
    ChannelShape shape;
    int shape_index = 0;  // position in enumerate_shapes(), lowest contributing
    std::array<ParticleType, 2> in_types{};
    ParticleType intermediate = ParticleType::photon;
    std::array<ParticleType, 2> out_types{};
    std::vector<std::array<ParticleType, 2>> out_flavors;
    int exit_slot = -1;  // split-first: out slot fed directly by the split
    std::array<int, 3> prop_coeff{0, 0, 0};
    int sign = 1;  // relative to the first channel of the reduced list
    std::string label;
    std::array<StateElement, 2> in_elements{};  // filled during processing
    std::vector<Path> paths;                    // filled during processing
};

namespace detail {

inline std::array<ParticleType, 2> canonical_pair(ParticleType a, ParticleType b) {
    if (static_cast<int>(b) < static_cast<int>(a)) std::swap(a, b);
    return {a, b};
}

inline std::array<int, 3> normalize_coeff(std::array<int, 3> c) {
    for (int v : c) {
        if (v > 0) return c;
        if (v < 0) return {-c[0], -c[1], -c[2]};
    }
    return c;
}

inline std::array<int, 3> propagator_coeff(int split_in, int exit_slot) {
    if (split_in < 0) return {1, 1, 0};  // q = p1 + p2
    // q = p_i - k_j; eliminate k1 via k1 = p1 + p2 - k0.
    std::array<int, 3> c{};
    c[split_in] = 1;
    if (exit_slot == 0) {
        c[2] = -1;
    } else {
        c[0] -= 1;
        c[1] -= 1;
        c[2] = 1;
    }
    return normalize_coeff(c);
}

// Photon-mediated channels tie the four external fermion legs into two
// bar/ket pairs; the relative channel sign is the parity of one pairing
// against the other. Legs: in slots 0,1 then out slots 2,3. Fermion-line
// channels have a single two-leg chain and contribute even parity.
inline int pairing_parity(const IaChannel& c) {
    std::vector<std::array<int, 2>> pairs;
    if (is_fermion(c.intermediate)) {
        std::vector<int> legs;
        for (int i = 0; i < 2; ++i)
            if (is_fermion(c.in_types[i])) legs.push_back(i);
        for (int i = 0; i < 2; ++i)
            if (is_fermion(c.out_types[i])) legs.push_back(2 + i);
        if (legs.size() != 2) throw StructureError("fermion-line channel needs 2 fermion legs");
        pairs.push_back({legs[0], legs[1]});
    } else if (c.shape.order == ChannelShape::Order::combine_first) {
        pairs.push_back({0, 1});
        pairs.push_back({2, 3});
    } else {
        int i = c.shape.split_in, j = c.exit_slot;
        pairs.push_back({std::min(i, 2 + j), std::max(i, 2 + j)});
        pairs.push_back({std::min(1 - i, 2 + (1 - j)), std::max(1 - i, 2 + (1 - j))});
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> seq;
    for (auto& p : pairs) {
        seq.push_back(p[0]);
        seq.push_back(p[1]);
    }
    // parity of the permutation sorting seq
    int swaps = 0;
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = i + 1; j < seq.size(); ++j)
            if (seq[j] < seq[i]) ++swaps;
    return (swaps % 2 == 0) ? 1 : -1;
}

}  // namespace detail

// -1 when the two channels pair the identical external fermion legs with odd
// relative permutation (Fermi statistics), else +1.
inline int relative_sign(const IaChannel& c1, const IaChannel& c2) {
    if (c1.out_types != c2.out_types)
        throw StructureError("relative_sign needs channels sharing out types");
    return detail::pairing_parity(c1) * detail::pairing_parity(c2);
}

// All type-consistent channels for the in pair under the rule table, in
// canonical order (shape index, then intermediate). Identical typings that
// differ only in split-branch naming (shape 2 vs 3, 4 vs 5) collapse to the
// lower shape index.
//
// Split-first shapes are restricted to out type multisets equal to the in
// multiset: their split acts on an external particle, which scatters rather
// than annihilates, so the external lines keep their identities. Without
// this restriction the bare typing rules would admit pair-creation channels
// the model excludes at this level (e.g. a two-photon in state).
inline std::vector<IaChannel> instantiate_channels(ParticleType t1, ParticleType t2,
                                                   const std::vector<VertexRule>& rules) {
    if (rules.empty()) throw ConfigError("empty vertex rule table");
    const std::array<ParticleType, 2> in{t1, t2};
    const auto in_multiset = detail::canonical_pair(t1, t2);
    std::vector<IaChannel> out;

    auto already_have = [&](const IaChannel& c) {
        for (const auto& e : out)
            if (e.shape.split_in == c.shape.split_in && e.intermediate == c.intermediate &&
                e.out_types == c.out_types && e.prop_coeff == c.prop_coeff)
                return true;
        return false;
    };

    const auto shapes = enumerate_shapes();
    for (std::size_t si = 0; si < shapes.size(); ++si) {
        const ChannelShape& shape = shapes[si];
        if (shape.order == ChannelShape::Order::combine_first) {
            for (ParticleType inter : combine_products(rules, t1, t2)) {
                IaChannel c;
                c.shape = shape;
                c.shape_index = static_cast<int>(si);
                c.in_types = in;
                c.intermediate = inter;
                for (auto [u, v] : split_products(rules, inter)) {
                    auto pair = detail::canonical_pair(u, v);
                    if (std::find(c.out_flavors.begin(), c.out_flavors.end(), pair) ==
                        c.out_flavors.end())
                        c.out_flavors.push_back(pair);
                }
                if (c.out_flavors.empty()) continue;
                std::sort(c.out_flavors.begin(), c.out_flavors.end(),
                          [](const auto& a, const auto& b) {
                              return std::make_pair(static_cast<int>(a[0]), static_cast<int>(a[1])) <
                                     std::make_pair(static_cast<int>(b[0]), static_cast<int>(b[1]));
                          });
                c.out_types = c.out_flavors.front();
                c.prop_coeff = detail::propagator_coeff(-1, -1);
                out.push_back(std::move(c));
            }
        } else {
            ParticleType split_t = in[shape.split_in];
            ParticleType other_t = in[1 - shape.split_in];
            for (auto [u, v] : split_products(rules, split_t)) {
                for (auto [through, exit] :
                     {std::pair{u, v}, std::pair{v, u}}) {
                    for (ParticleType comb_out : combine_products(rules, through, other_t)) {
                        if (detail::canonical_pair(exit, comb_out) != in_multiset)
                            continue;  // scattering-only restriction, see above
                        IaChannel c;
                        c.shape = shape;
                        c.shape_index = static_cast<int>(si);
                        c.in_types = in;
                        c.intermediate = through;
                        c.out_types = detail::canonical_pair(exit, comb_out);
                        // slot of the direct split product after canonical
                        // ordering; ties keep the split product in slot 0
                        c.exit_slot = (c.out_types[0] == exit) ? 0 : 1;
                        c.out_flavors = {c.out_types};
                        c.prop_coeff = detail::propagator_coeff(shape.split_in, c.exit_slot);
                        if (!already_have(c)) out.push_back(std::move(c));
                    }
                }
            }
        }
    }
    if (out.empty()) throw EmptyChannelSetError(
        "no tree-level channel for (" + std::string(name(t1)) + ", " +
        std::string(name(t2)) + ")");

    // labels: CA for combine-first, CB1/CB2 by which input splits
    int n_ca = 0, n_cb1 = 0, n_cb2 = 0;
    for (auto& c : out) {
        if (c.shape.order == ChannelShape::Order::combine_first)
            c.label = ++n_ca == 1 ? "CA" : "CA" + std::to_string(n_ca);
        else if (c.shape.split_in == 0)
            c.label = ++n_cb1 == 1 ? "CB1" : "CB1." + std::to_string(n_cb1);
        else
            c.label = ++n_cb2 == 1 ? "CB2" : "CB2." + std::to_string(n_cb2);
    }
    return out;
}

// Equivalence: same intermediate line (up to antiparticle with reversed
// momentum), same out multiset, same propagator momentum expression. The
// representative is the member with the lowest shape index. A class that
// actually merged members drops the split-input suffix from its label
// (CB1 + CB2 -> CB).
inline std::vector<IaChannel> reduce_equivalent(const std::vector<IaChannel>& channels) {
    std::vector<IaChannel> out;
    std::vector<int> class_size;
    for (const auto& c : channels) {
        bool merged = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            IaChannel& r = out[i];
            bool same_inter = r.intermediate == c.intermediate ||
                              r.intermediate == antiparticle(c.intermediate);
            if (same_inter && r.out_types == c.out_types && r.prop_coeff == c.prop_coeff) {
                if (c.shape_index < r.shape_index) r = c;
                ++class_size[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.push_back(c);
            class_size.push_back(1);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        if (class_size[i] > 1 && out[i].shape.order == ChannelShape::Order::split_first)
            out[i].label = "CB";
    // signs relative to the first channel, where out types are shared
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].sign = (out[i].out_types == out[0].out_types)
                          ? relative_sign(out[0], out[i])
                          : 1;
    return out;
}

inline StateElement combine_elements(const StateElement& a, const StateElement& b,
                                     const std::vector<VertexRule>& rules) {
    auto prods = combine_products(rules, a.ptype, b.ptype);
    if (prods.empty())
        throw VertexError("no combine rule for (" + std::string(name(a.ptype)) +
                          ", " + std::string(name(b.ptype)) + ")");
    StateElement c;
    c.ptype = prods.front();
    c.p = a.p + b.p;
    c.sigma = 0.0;
    c.pos = a.pos;
    c.phase_rate = cd(0.0, -c.p.e);
    c.intermediate = true;
    return c;
}

namespace detail {

// Complement c with b + c == total under floating addition, when such a c
// exists; otherwise the correctly rounded complement, whose residual is the
// minimum reachable (below half an ulp of the larger leg). Exact closure is
// impossible when |total| is far below |b|: the complement would need more
// mantissa bits than a double holds. Zero and same-sign components always
// close exactly, so rest- and CM-frame totals are conserved bit for bit.
inline double exact_complement(double total, double b) {
    double c = total - b;
    for (int it = 0; it < 16; ++it) {
        double d = total - (b + c);
        if (d == 0.0) return c;
        double next = c + d;
        if (next == c) break;  // correction below 1 ulp of c; no exact closure
        c = next;
    }
    return total - b;
}

inline std::vector<double> spin_labels(ParticleType t) {
    if (is_fermion(t)) return {-0.5, 0.5};
    return {-1.0, 1.0};
}

}  // namespace detail

// Two-body decomposition of a timelike total momentum into an on-shell pair
// (mb, mc) over a graining x graining grid of (cos theta, phi) bin centers in
// the total's rest frame, z axis kept along the lab z. The b leg is exactly
// on-shell by construction; the c leg is the floating-point complement, which
// closes the sum bit for bit whenever a double can (see exact_complement).
inline std::vector<std::pair<FourMomentum, FourMomentum>>
two_body_partition(const FourMomentum& p_tot, double mb, double mc, int graining) {
    const double M2 = p_tot.mass2();
    if (M2 <= 0.0) throw KinematicsError("two-body partition needs a timelike total");
    const double M = std::sqrt(M2);
    if (mb + mc > M) return {};
    const double lam = (M2 - (mb + mc) * (mb + mc)) * (M2 - (mb - mc) * (mb - mc));
    const double k = std::sqrt(std::max(0.0, lam)) / (2.0 * M);
    const double eb_cm = (M2 + mb * mb - mc * mc) / (2.0 * M);
    const std::array<double, 3> beta{p_tot.px / p_tot.e, p_tot.py / p_tot.e,
                                     p_tot.pz / p_tot.e};
    const bool moving = p_tot.p2() > 0.0;

    std::vector<std::pair<FourMomentum, FourMomentum>> out;
    out.reserve(static_cast<std::size_t>(graining) * graining);
    for (int i = 0; i < graining; ++i) {
        const double ct = -1.0 + (2.0 * i + 1.0) / graining;
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < graining; ++j) {
            const double phi = 2.0 * std::numbers::pi * (j + 0.5) / graining;
            FourMomentum b{eb_cm, k * st * std::cos(phi), k * st * std::sin(phi), k * ct};
            if (moving) b = boost(b, beta);
            // pin b on shell, then close the sum exactly on c
            b = onshell_momentum(mb, b.px, b.py, b.pz);
            FourMomentum c;
            c.e = detail::exact_complement(p_tot.e, b.e);
            c.px = detail::exact_complement(p_tot.px, b.px);
            c.py = detail::exact_complement(p_tot.py, b.py);
            c.pz = detail::exact_complement(p_tot.pz, b.pz);
            out.emplace_back(b, c);
        }
    }
    return out;
}

// Discretized split of an intermediate element: every rule-allowed flavor
// pair above threshold, times graining^2 direction bins, times the four spin
// assignments. Four-momentum is conserved exactly pair by pair.
inline std::vector<std::pair<StateElement, StateElement>>
split_outcomes(const StateElement& a, int graining, const std::vector<VertexRule>& rules) {
    if (graining < 1) throw ConfigError("graining must be >= 1");
    const double M2 = a.p.mass2();
    if (M2 <= 0.0) throw KinematicsError("split needs a timelike intermediate");
    const double M = std::sqrt(M2);

    std::vector<std::array<ParticleType, 2>> flavors;
    for (auto [u, v] : split_products(rules, a.ptype)) {
        auto pair = detail::canonical_pair(u, v);
        if (mass(pair[0]) + mass(pair[1]) > M) continue;
        if (std::find(flavors.begin(), flavors.end(), pair) == flavors.end())
            flavors.push_back(pair);
    }
    std::sort(flavors.begin(), flavors.end(), [](const auto& x, const auto& y) {
        return std::make_pair(static_cast<int>(x[0]), static_cast<int>(x[1])) <
               std::make_pair(static_cast<int>(y[0]), static_cast<int>(y[1]));
    });

    std::vector<std::pair<StateElement, StateElement>> out;
    for (const auto& fl : flavors) {
        auto pairs = two_body_partition(a.p, mass(fl[0]), mass(fl[1]), graining);
        for (const auto& [pb, pc] : pairs) {
            for (double sb : detail::spin_labels(fl[0])) {
                for (double sc : detail::spin_labels(fl[1])) {
                    StateElement b = make_element(fl[0], pb, sb, a.pos);
                    StateElement c = make_element(fl[1], pc, sc, a.pos);
                    out.emplace_back(std::move(b), std::move(c));
                }
            }
        }
    }
    return out;
}

} // namespace qfsim
