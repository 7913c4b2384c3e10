#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <tuple>

#include "qfsim/channels.hpp"

using namespace qfsim;

namespace {

// Independent enumeration of every two-operation program over two inputs.
// Tokens: 0=pw1, 1=pw2. One split and one combine in either order; the
// program must end with two tokens and must connect both inputs.
std::set<std::tuple<int, int, int>> brute_force_shapes() {
    std::set<std::tuple<int, int, int>> shapes;  // (combine_first, split_in, through)

    // combine first: both inputs are consumed, the split eats the product.
    // Only one wiring exists.
    shapes.insert({1, -1, -1});

    // split first: pick the input to split, then combine one of its two
    // branches with the remaining input. Combining branch with branch would
    // leave the other input untouched, which is not an interaction of the
    // pair, and recombining the split input alone cannot consume two tokens.
    for (int split_in = 0; split_in < 2; ++split_in)
        for (int through = 0; through < 2; ++through)
            shapes.insert({0, split_in, through});

    return shapes;
}

std::tuple<int, int, int> as_tuple(const ChannelShape& s) {
    return {s.order == ChannelShape::Order::combine_first ? 1 : 0, s.split_in,
            s.through_branch};
}

}  // namespace

TEST_CASE("shape enumeration matches the brute force and keeps listing order") {
    auto shapes = enumerate_shapes();
    REQUIRE(shapes.size() == 5);

    std::set<std::tuple<int, int, int>> got;
    for (const auto& s : shapes) got.insert(as_tuple(s));
    REQUIRE(got == brute_force_shapes());

    // listing order: combine-first, then split pw1 through a / through b,
    // then split pw2 through a / through b
    REQUIRE(as_tuple(shapes[0]) == std::tuple<int, int, int>{1, -1, -1});
    REQUIRE(as_tuple(shapes[1]) == std::tuple<int, int, int>{0, 0, 0});
    REQUIRE(as_tuple(shapes[2]) == std::tuple<int, int, int>{0, 0, 1});
    REQUIRE(as_tuple(shapes[3]) == std::tuple<int, int, int>{0, 1, 0});
    REQUIRE(as_tuple(shapes[4]) == std::tuple<int, int, int>{0, 1, 1});

    for (const auto& s : shapes) REQUIRE(satisfies_rules(s));
}

TEST_CASE("electron-positron pair instantiates annihilation plus two exchanges") {
    auto rules = default_vertex_rules();
    auto chans = instantiate_channels(ParticleType::electron, ParticleType::positron, rules);
    REQUIRE(chans.size() == 3);

    auto by_label = [&](const std::string& l) -> const IaChannel& {
        for (const auto& c : chans)
            if (c.label == l) return c;
        FAIL("missing channel " << l);
        return chans.front();
    };
    const auto& ca = by_label("CA");
    REQUIRE(ca.shape.order == ChannelShape::Order::combine_first);
    REQUIRE(ca.intermediate == ParticleType::photon);
    REQUIRE(ca.prop_coeff == std::array<int, 3>{1, 1, 0});
    REQUIRE(ca.out_flavors.size() == 3);  // one charged pair per generation

    const auto& cb1 = by_label("CB1");
    const auto& cb2 = by_label("CB2");
    REQUIRE(cb1.shape.split_in == 0);
    REQUIRE(cb2.shape.split_in == 1);
    REQUIRE(cb1.prop_coeff == std::array<int, 3>{1, 0, -1});
    REQUIRE(cb2.prop_coeff == std::array<int, 3>{1, 0, -1});
    REQUIRE(cb1.out_flavors ==
            std::vector<std::array<ParticleType, 2>>{
                {ParticleType::electron, ParticleType::positron}});
}

TEST_CASE("reduction folds the two exchange channels and fixes the relative sign") {
    auto rules = default_vertex_rules();
    auto reduced = reduce_equivalent(
        instantiate_channels(ParticleType::electron, ParticleType::positron, rules));
    REQUIRE(reduced.size() == 2);
    REQUIRE(reduced[0].label == "CA");
    REQUIRE(reduced[0].sign == 1);
    REQUIRE(reduced[1].label == "CB");
    REQUIRE(reduced[1].sign == -1);
}

TEST_CASE("identical fermions keep two exchange classes with odd relative sign") {
    auto rules = default_vertex_rules();
    auto reduced = reduce_equivalent(
        instantiate_channels(ParticleType::electron, ParticleType::electron, rules));
    REQUIRE(reduced.size() == 2);
    std::set<std::array<int, 3>> coeffs{reduced[0].prop_coeff, reduced[1].prop_coeff};
    REQUIRE(coeffs == std::set<std::array<int, 3>>{{1, 0, -1}, {0, 1, -1}});
    REQUIRE(reduced[0].sign * reduced[1].sign == -1);
}

TEST_CASE("distinguishable fermions leave a single exchange class") {
    auto rules = default_vertex_rules();
    auto reduced = reduce_equivalent(
        instantiate_channels(ParticleType::electron, ParticleType::muon, rules));
    REQUIRE(reduced.size() == 1);
    REQUIRE(reduced[0].prop_coeff == std::array<int, 3>{1, 0, -1});
    REQUIRE(reduced[0].out_flavors ==
            std::vector<std::array<ParticleType, 2>>{
                {ParticleType::electron, ParticleType::muon}});
}

TEST_CASE("lepton-photon scattering folds the two internal-line orientations") {
    auto rules = default_vertex_rules();
    auto reduced = reduce_equivalent(
        instantiate_channels(ParticleType::electron, ParticleType::photon, rules));
    REQUIRE(reduced.size() == 2);
    for (const auto& c : reduced) {
        REQUIRE(is_fermion(c.intermediate));
        REQUIRE(c.sign == 1);
    }
    std::set<std::array<int, 3>> coeffs{reduced[0].prop_coeff, reduced[1].prop_coeff};
    REQUIRE(coeffs == std::set<std::array<int, 3>>{{1, 1, 0}, {0, 1, -1}});
}

TEST_CASE("photon pairs have no channel at this order") {
    auto rules = default_vertex_rules();
    REQUIRE_THROWS_AS(
        instantiate_channels(ParticleType::photon, ParticleType::photon, rules),
        EmptyChannelSetError);
}

TEST_CASE("relative sign demands a shared out pair") {
    auto rules = default_vertex_rules();
    auto chans = instantiate_channels(ParticleType::electron, ParticleType::positron, rules);
    IaChannel mu_out = chans[0];
    mu_out.out_types = {ParticleType::muon, ParticleType::antimuon};
    REQUIRE_THROWS_AS(relative_sign(chans[1], mu_out), StructureError);
}

TEST_CASE("two-body partition closes rest-frame totals bit for bit") {
    FourMomentum total{300.0, 0.0, 0.0, 0.0};
    const double mb = mass(ParticleType::muon), mc = mass(ParticleType::electron);
    auto pairs = two_body_partition(total, mb, mc, 6);
    REQUIRE(pairs.size() == 36);
    for (const auto& [b, c] : pairs) {
        REQUIRE(b.e + c.e == total.e);
        REQUIRE(b.px + c.px == total.px);
        REQUIRE(b.py + c.py == total.py);
        REQUIRE(b.pz + c.pz == total.pz);
        REQUIRE(is_onshell(b, mb));
        REQUIRE(is_onshell(c, mc, 1e-9));
        REQUIRE(b.e > 0.0);
        REQUIRE(c.e > 0.0);
    }
}

TEST_CASE("two-body partition of a head-on pair stays exact") {
    // equal and opposite beams: the summed total has exact zero transverse
    // and longitudinal components, the generic collision input
    FourMomentum p1 = onshell_momentum(mass(ParticleType::electron), 0, 0, 499.9);
    FourMomentum p2 = onshell_momentum(mass(ParticleType::electron), 0, 0, -499.9);
    FourMomentum total = p1 + p2;
    auto pairs = two_body_partition(total, mass(ParticleType::muon),
                                    mass(ParticleType::muon), 8);
    REQUIRE(pairs.size() == 64);
    for (const auto& [b, c] : pairs) {
        REQUIRE(b.e + c.e == total.e);
        REQUIRE(b.px + c.px == total.px);
        REQUIRE(b.py + c.py == total.py);
        REQUIRE(b.pz + c.pz == total.pz);
    }
}

TEST_CASE("two-body partition of a boosted total closes to the last ulp") {
    // A total component far smaller than the legs cannot be closed exactly
    // in doubles; the residual must stay below an ulp of the leg scale.
    FourMomentum total{300.0, 12.0, -5.0, 40.0};
    const double mb = mass(ParticleType::muon), mc = mass(ParticleType::electron);
    auto pairs = two_body_partition(total, mb, mc, 6);
    REQUIRE(pairs.size() == 36);
    for (const auto& [b, c] : pairs) {
        REQUIRE(b.e + c.e == total.e);  // same-sign sums always close
        const double scale = std::max({std::abs(b.px), std::abs(b.py), std::abs(b.pz),
                                       std::abs(c.px), std::abs(c.py), std::abs(c.pz)});
        REQUIRE(std::abs(b.px + c.px - total.px) <= 1e-15 * scale);
        REQUIRE(std::abs(b.py + c.py - total.py) <= 1e-15 * scale);
        REQUIRE(std::abs(b.pz + c.pz - total.pz) <= 1e-15 * scale);
        REQUIRE(is_onshell(b, mb));
        REQUIRE(is_onshell(c, mc, 1e-9));
    }
}

TEST_CASE("two-body partition respects thresholds and timelike totals") {
    FourMomentum rest{1.0, 0, 0, 0};
    REQUIRE(two_body_partition(rest, 0.6, 0.6, 4).empty());
    FourMomentum spacelike{1.0, 0, 0, 2.0};
    REQUIRE_THROWS_AS(two_body_partition(spacelike, 0.1, 0.1, 4), KinematicsError);
}

TEST_CASE("split outcomes cover every open flavor with all spin labels") {
    auto rules = default_vertex_rules();
    // a heavy virtual photon above the muon threshold but below the tauon one
    StateElement ph;
    ph.ptype = ParticleType::photon;
    ph.p = {400.0, 0, 0, 30.0};
    ph.pos = {1.0, 1.0, 1.0};
    ph.intermediate = true;
    auto outs = split_outcomes(ph, 3, rules);
    REQUIRE(outs.size() == 2u * 9u * 4u);  // e+e- and mu pairs, 3x3 bins, 4 spins
    for (const auto& [b, c] : outs) {
        REQUIRE(b.p.e + c.p.e == ph.p.e);
        REQUIRE(b.p.px + c.p.px == ph.p.px);  // zero components mirror exactly
        REQUIRE(b.p.py + c.p.py == ph.p.py);
        REQUIRE(charge(b.ptype) + charge(c.ptype) == 0);
        REQUIRE(b.pos == ph.pos);
    }
}

TEST_CASE("combine elements adds momenta and marks the product internal") {
    auto rules = default_vertex_rules();
    auto e1 = make_element(ParticleType::electron,
                           onshell_momentum(mass(ParticleType::electron), 0, 0, 50), 0.5,
                           {0, 0, 0});
    auto e2 = make_element(ParticleType::positron,
                           onshell_momentum(mass(ParticleType::electron), 0, 0, -50), 0.5,
                           {0, 0, 0});
    StateElement c = combine_elements(e1, e2, rules);
    REQUIRE(c.ptype == ParticleType::photon);
    REQUIRE(c.intermediate);
    REQUIRE(c.p.e == e1.p.e + e2.p.e);
    REQUIRE_THROWS_AS(combine_elements(e1, e1, rules), VertexError);
}
