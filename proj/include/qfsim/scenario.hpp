#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfsim/evolve.hpp"
#include "qfsim/stats.hpp"

namespace qfsim {

// All floating point output goes through one formatter so logs, reports and
// golden files agree to the last digit.
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string coord_text(const Coord& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(c[i]);
    }
    return s;
}

inline std::string combo_text(const std::array<ParticleType, 2>& c) {
    return std::string(name(c[0])) + "," + std::string(name(c[1]));
}

struct ObjectDecl {
    enum class Kind { pw, pair } kind = Kind::pw;
    ParticleType type = ParticleType::electron;
    ParticleType type2 = ParticleType::electron;
    std::array<double, 3> momentum{};
    std::array<double, 3> momentum2{};
    double sigma = 0.5;
    RealCoord pos, pos2;
};

struct Scenario {
    SimConfig cfg;
    std::string mode = "evolve";
    std::uint64_t trials = 10000;
    ParticleType in1 = ParticleType::electron;
    ParticleType in2 = ParticleType::positron;
    double sqrt_s = 1000.0;
    double theta_deg = 90.0;
    double phi_deg = 0.0;
    std::string mass_mode = "physical";
    std::vector<ObjectDecl> objects;
};

namespace detail {

inline double parse_double(const std::string& tok, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw ConfigError("");
        return v;
    } catch (...) {
        throw ConfigError("bad number '" + tok + "' for " + key);
    }
}

inline std::int64_t parse_int(const std::string& tok, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw ConfigError("");
        return v;
    } catch (...) {
        throw ConfigError("bad integer '" + tok + "' for " + key);
    }
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream is(body);
    std::vector<std::string> toks;
    for (std::string t; is >> t;) toks.push_back(std::move(t));
    return toks;
}

inline void want(const std::vector<std::string>& t, std::size_t n) {
    if (t.size() != n + 1)
        throw ConfigError("key '" + t[0] + "' expects " + std::to_string(n) + " value(s)");
}

}  // namespace detail

inline Scenario parse_scenario_text(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    ObjectDecl* blk = nullptr;
    ObjectDecl pending;

    while (std::getline(in, line)) {
        auto t = detail::tokenize(line);
        if (t.empty()) continue;
        const std::string& key = t[0];

        if (blk) {
            auto vec3 = [&](std::array<double, 3>& dst) {
                detail::want(t, 3);
                for (int i = 0; i < 3; ++i) dst[i] = detail::parse_double(t[i + 1], key);
            };
            auto posvec = [&](RealCoord& dst) {
                if (t.size() < 2) throw ConfigError("pos needs at least one value");
                dst.clear();
                for (std::size_t i = 1; i < t.size(); ++i)
                    dst.push_back(detail::parse_double(t[i], key));
            };
            if (key == "end") {
                sc.objects.push_back(pending);
                blk = nullptr;
            } else if (key == "type") {
                detail::want(t, 1);
                pending.type = particle_from_name(t[1]);
            } else if (key == "type1") {
                detail::want(t, 1);
                pending.type = particle_from_name(t[1]);
            } else if (key == "type2") {
                detail::want(t, 1);
                pending.type2 = particle_from_name(t[1]);
            } else if (key == "momentum" || key == "momentum1") {
                vec3(pending.momentum);
            } else if (key == "momentum2") {
                vec3(pending.momentum2);
            } else if (key == "sigma" || key == "sigma1") {
                detail::want(t, 1);
                pending.sigma = detail::parse_double(t[1], key);
            } else if (key == "pos" || key == "pos1") {
                posvec(pending.pos);
            } else if (key == "pos2") {
                posvec(pending.pos2);
            } else {
                throw ConfigError("unknown object key: " + key);
            }
            continue;
        }

        if (key == "object") {
            detail::want(t, 1);
            pending = ObjectDecl{};
            if (t[1] == "pw") pending.kind = ObjectDecl::Kind::pw;
            else if (t[1] == "pair") pending.kind = ObjectDecl::Kind::pair;
            else throw ConfigError("unknown object kind: " + t[1]);
            blk = &pending;
        } else if (key == "mode") {
            detail::want(t, 1);
            sc.mode = t[1];
        } else if (key == "dims") {
            if (t.size() < 2 || t.size() > 4) throw ConfigError("dims expects 1 to 3 values");
            sc.cfg.dims.clear();
            for (std::size_t i = 1; i < t.size(); ++i)
                sc.cfg.dims.push_back(detail::parse_int(t[i], key));
        } else if (key == "spacing") {
            detail::want(t, 1);
            sc.cfg.spacing = detail::parse_double(t[1], key);
        } else if (key == "timestep") {
            detail::want(t, 1);
            sc.cfg.timestep = detail::parse_double(t[1], key);
        } else if (key == "seed") {
            detail::want(t, 1);
            sc.cfg.seed = static_cast<std::uint64_t>(detail::parse_int(t[1], key));
        } else if (key == "fluct_rate") {
            detail::want(t, 1);
            sc.cfg.fluct_rate = detail::parse_double(t[1], key);
        } else if (key == "volatile_prob") {
            detail::want(t, 1);
            sc.cfg.volatile_prob = detail::parse_double(t[1], key);
        } else if (key == "fluct_exponent") {
            detail::want(t, 1);
            sc.cfg.fluct_exponent = detail::parse_double(t[1], key);
        } else if (key == "max_paths") {
            detail::want(t, 1);
            sc.cfg.max_paths = static_cast<int>(detail::parse_int(t[1], key));
        } else if (key == "graining") {
            detail::want(t, 1);
            sc.cfg.graining = static_cast<int>(detail::parse_int(t[1], key));
        } else if (key == "max_steps") {
            detail::want(t, 1);
            sc.cfg.max_steps = static_cast<int>(detail::parse_int(t[1], key));
        } else if (key == "boundary") {
            detail::want(t, 1);
            if (t[1] == "periodic") sc.cfg.boundary = Boundary::periodic;
            else if (t[1] == "absorb") sc.cfg.boundary = Boundary::absorb;
            else throw ConfigError("unknown boundary: " + t[1]);
        } else if (key == "alpha") {
            detail::want(t, 1);
            sc.cfg.alpha = detail::parse_double(t[1], key);
        } else if (key == "onshell_tol") {
            detail::want(t, 1);
            sc.cfg.onshell_tol = detail::parse_double(t[1], key);
        } else if (key == "prune_threshold") {
            detail::want(t, 1);
            sc.cfg.prune_threshold = detail::parse_double(t[1], key);
        } else if (key == "workers") {
            detail::want(t, 1);
            sc.cfg.workers = static_cast<int>(detail::parse_int(t[1], key));
        } else if (key == "trials") {
            detail::want(t, 1);
            sc.trials = static_cast<std::uint64_t>(detail::parse_int(t[1], key));
        } else if (key == "in1") {
            detail::want(t, 1);
            sc.in1 = particle_from_name(t[1]);
        } else if (key == "in2") {
            detail::want(t, 1);
            sc.in2 = particle_from_name(t[1]);
        } else if (key == "sqrt_s") {
            detail::want(t, 1);
            sc.sqrt_s = detail::parse_double(t[1], key);
        } else if (key == "theta_deg") {
            detail::want(t, 1);
            sc.theta_deg = detail::parse_double(t[1], key);
        } else if (key == "phi_deg") {
            detail::want(t, 1);
            sc.phi_deg = detail::parse_double(t[1], key);
        } else if (key == "mass_mode") {
            detail::want(t, 1);
            if (t[1] != "physical" && t[1] != "massless")
                throw ConfigError("mass_mode must be physical or massless");
            sc.mass_mode = t[1];
        } else {
            throw ConfigError("unknown scenario key: " + key);
        }
    }
    if (blk) throw ConfigError("object block not closed with 'end'");
    sc.cfg.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_scenario_text(buf.str());
}

inline QObject build_object(const ObjectDecl& d) {
    if (d.kind == ObjectDecl::Kind::pw) {
        FourMomentum p =
            onshell_momentum(mass(d.type), d.momentum[0], d.momentum[1], d.momentum[2]);
        return make_particle_wave(d.type, p, d.sigma, d.pos);
    }
    FourMomentum p1 =
        onshell_momentum(mass(d.type), d.momentum[0], d.momentum[1], d.momentum[2]);
    FourMomentum p2 = onshell_momentum(mass(d.type2), d.momentum2[0], d.momentum2[1],
                                       d.momentum2[2]);
    if (!sigma_valid(d.type, d.sigma) || !sigma_valid(d.type2, -d.sigma))
        throw ConfigError("pair sigma outside the spin domain");
    auto a1 = make_element(d.type, p1, d.sigma, d.pos);
    auto a2 = make_element(d.type, p1, -d.sigma, d.pos);
    auto b1 = make_element(d.type2, p2, -d.sigma, d.pos2);
    auto b2 = make_element(d.type2, p2, d.sigma, d.pos2);
    return make_entangled_pair({a1, a2}, {b1, b2});
}

inline SimState build_state(const Scenario& sc) {
    SimState st(sc.cfg);
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        try {
            st.add_object(build_object(sc.objects[i]));
        } catch (const StructureError& e) {
            throw ConfigError("object " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return st;
}

// ---------------------------------------------------------------- enumerate

inline std::string run_enumerate(const Scenario& sc) {
    const auto rules = default_vertex_rules();
    std::ostringstream os;
    os << "ia-channel shapes\n";
    auto shapes = enumerate_shapes();
    for (std::size_t i = 0; i < shapes.size(); ++i)
        os << "  " << (i + 1) << ": " << shape_text(shapes[i]) << "\n";

    auto chans = instantiate_channels(sc.in1, sc.in2, rules);
    os << "channels for " << name(sc.in1) << " + " << name(sc.in2) << "\n";
    auto channel_line = [&](const IaChannel& ch, bool with_sign) {
        os << "  " << ch.label << " shape " << (ch.shape_index + 1) << " intermediate "
           << name(ch.intermediate) << " coeff " << ch.prop_coeff[0] << ","
           << ch.prop_coeff[1] << "," << ch.prop_coeff[2];
        if (with_sign) os << " sign " << (ch.sign > 0 ? "+1" : "-1");
        os << " outs";
        for (const auto& fl : ch.out_flavors) os << " " << combo_text(fl);
        os << "\n";
    };
    for (const auto& ch : chans) channel_line(ch, false);

    auto reduced = reduce_equivalent(chans);
    os << "reduced classes\n";
    for (const auto& ch : reduced) channel_line(ch, true);
    return os.str();
}

// ---------------------------------------------------------------- amplitude

inline std::string run_amplitude(const Scenario& sc) {
    const double m = sc.mass_mode == "massless" ? 1e-6 * sc.sqrt_s
                                                : mass(ParticleType::electron);
    const double theta = sc.theta_deg * std::numbers::pi / 180.0;
    const double phi = sc.phi_deg * std::numbers::pi / 180.0;
    const BhabhaKinematics kin = bhabha_cm_kinematics(sc.sqrt_s, theta, phi, m);
    const double e = sc.cfg.coupling_e();
    const double s = mandelstam_s(kin), t = mandelstam_t(kin), u = mandelstam_u(kin);

    std::ostringstream os;
    os << "electron-positron scattering amplitudes\n";
    os << "sqrt_s " << g17(sc.sqrt_s) << " theta_deg " << g17(sc.theta_deg)
       << " phi_deg " << g17(sc.phi_deg) << " mass " << g17(m) << " coupling "
       << g17(e) << "\n";
    os << "s " << g17(s) << " t " << g17(t) << " u " << g17(u) << "\n";
    os << "s1 s2 s1p s2p re_MA im_MA re_MB im_MB re_M im_M\n";

    const double labels[2] = {-0.5, 0.5};
    double sum = 0.0;
    char sp[8];
    auto spin_text = [&](double v) {
        std::snprintf(sp, sizeof sp, "%+.1f", v);
        return std::string(sp);
    };
    for (double s1 : labels)
        for (double s2 : labels)
            for (double s1p : labels)
                for (double s2p : labels) {
                    const BhabhaSpins spins{s1, s2, s1p, s2p};
                    const cd a = bhabha_MA(kin, spins, e);
                    const cd b = bhabha_MB(kin, spins, e);
                    const cd mtot = a - b;
                    sum += std::norm(mtot);
                    os << spin_text(s1) << " " << spin_text(s2) << " " << spin_text(s1p)
                       << " " << spin_text(s2p) << " " << g17(a.real()) << " "
                       << g17(a.imag()) << " " << g17(b.real()) << " " << g17(b.imag())
                       << " " << g17(mtot.real()) << " " << g17(mtot.imag()) << "\n";
                }
    const double avg = sum / 4.0;
    const double e4 = e * e * e * e;
    const double closed = spin_averaged_M2(s, t, u, e);
    os << "spin_averaged_M2 " << g17(avg) << "\n";
    os << "spin_averaged_M2_over_e4 " << g17(avg / e4) << "\n";
    os << "massless_closed_form " << g17(closed) << " rel_diff "
       << g17(std::abs(avg - closed) / closed) << "\n";
    return os.str();
}

// ------------------------------------------------------------------ scatter

namespace detail {

// the one cell covered by every declared object, smallest first
inline Coord shared_cell(const SimState& st) {
    std::set<Coord> common;
    bool first = true;
    for (const auto& [id, q] : st.objects) {
        std::set<Coord> mine;
        for (const auto& p : q.paths)
            for (const auto& el : p.elements) mine.insert(el.cell());
        if (first) {
            common = std::move(mine);
            first = false;
        } else {
            std::set<Coord> keep;
            for (const auto& c : common)
                if (mine.count(c)) keep.insert(c);
            common = std::move(keep);
        }
    }
    if (common.empty())
        throw ConfigError("declared objects share no lattice cell");
    return *common.begin();
}

inline std::array<const QObject*, 2> two_objects(const SimState& st) {
    if (st.objects.size() != 2)
        throw ConfigError("this mode needs exactly two declared objects");
    auto it = st.objects.begin();
    const QObject* a = &it->second;
    const QObject* b = &std::next(it)->second;
    return {a, b};
}

}  // namespace detail

inline std::string run_scatter(const Scenario& sc) {
    SimState st = build_state(sc);
    auto [a, b] = detail::two_objects(st);
    const Coord cell = detail::shared_cell(st);
    RngCtx ctx{st.cfg.seed, 0};
    InteractionRecord rec =
        perform_interaction(*a, *b, cell, ctx, st.rules, st.cfg, st.masses);

    std::ostringstream os;
    os << "single interaction at cell " << coord_text(cell) << "\n";
    for (int i = 0; i < 2; ++i) {
        const auto& el = rec.in_elements[i];
        os << "in" << (i + 1) << " " << name(el.ptype) << " path "
           << rec.selected_paths[i] << " p " << g17(el.p.e) << " " << g17(el.p.px)
           << " " << g17(el.p.py) << " " << g17(el.p.pz) << " sigma " << g17(el.sigma)
           << "\n";
    }
    os << "channels";
    for (const auto& [label, sign] : rec.channel_summary)
        os << " " << label << (sign > 0 ? "(+1)" : "(-1)");
    os << "\n";
    double total = 0.0;
    for (const auto& [combo, w] : rec.combo_weights) total += w;
    for (const auto& [combo, w] : rec.combo_weights)
        os << "combo " << combo_text(combo) << " weight " << g17(w) << " prob "
           << g17(w / total) << "\n";
    os << "selected " << combo_text(rec.selected_out_types) << "\n";
    os << "out paths " << rec.out_collection.paths.size() << " pruned "
       << rec.pruned_paths << " truncated " << rec.truncated_paths << "\n";

    // strongest few outgoing alternatives
    std::vector<std::size_t> idx(rec.out_collection.paths.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return std::norm(rec.out_collection.paths[x].amplitude) >
               std::norm(rec.out_collection.paths[y].amplitude);
    });
    const std::size_t show = std::min<std::size_t>(5, idx.size());
    for (std::size_t r = 0; r < show; ++r) {
        const Path& p = rec.out_collection.paths[idx[r]];
        os << "  path " << idx[r] << " amp " << g17(p.amplitude.real()) << " "
           << g17(p.amplitude.imag());
        for (const auto& el : p.elements)
            os << " | " << name(el.ptype) << " p " << g17(el.p.e) << " " << g17(el.p.px)
               << " " << g17(el.p.py) << " " << g17(el.p.pz) << " sigma "
               << g17(el.sigma);
        os << "\n";
    }
    for (int i = 0; i < 2; ++i)
        os << "in" << (i + 1) << " discarded " << rec.discarded_path_counts[i]
           << (rec.survivors[i] ? " survivor kept" : " consumed") << "\n";
    return os.str();
}

// --------------------------------------------------------------- montecarlo

struct RunReport {
    std::uint64_t trials = 0;
    std::vector<std::array<ParticleType, 2>> combos;
    std::vector<std::uint64_t> counts;
    std::vector<double> expected;  // probabilities, sums to 1
    double pvalue = 1.0;
    std::uint64_t conservation_checks = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t anticorrelation_checks = 0;
    std::uint64_t anticorrelation_violations = 0;
    std::vector<std::pair<std::string, int>> channels;

    std::vector<double> frequencies() const {
        std::vector<double> f(counts.size(), 0.0);
        if (trials == 0) return f;
        for (std::size_t i = 0; i < counts.size(); ++i)
            f[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
        return f;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "trials " << trials << "\n";
        os << "channels";
        for (const auto& [label, sign] : channels)
            os << " " << label << (sign > 0 ? "(+1)" : "(-1)");
        os << "\n";
        auto freq = frequencies();
        for (std::size_t i = 0; i < combos.size(); ++i)
            os << "combo " << combo_text(combos[i]) << " count " << counts[i]
               << " freq " << g17(freq[i]) << " expected " << g17(expected[i]) << "\n";
        os << "chi_square_pvalue " << g17(pvalue) << "\n";
        os << "conservation failures " << conservation_failures << " of "
           << conservation_checks << "\n";
        if (anticorrelation_checks)
            os << "anticorrelation violations " << anticorrelation_violations << " of "
               << anticorrelation_checks << "\n";
        return os.str();
    }

    std::string to_records() const {
        std::ostringstream os;
        os << "# qfsim-run v1\n";
        os << "trials " << trials << "\n";
        auto freq = frequencies();
        for (std::size_t i = 0; i < combos.size(); ++i)
            os << "combo " << combo_text(combos[i]) << " count " << counts[i]
               << " freq " << g17(freq[i]) << " expected " << g17(expected[i]) << "\n";
        os << "pvalue " << g17(pvalue) << "\n";
        os << "conservation " << conservation_failures << "/" << conservation_checks
           << "\n";
        os << "anticorrelation " << anticorrelation_violations << "/"
           << anticorrelation_checks << "\n";
        return os.str();
    }
};

// Repeated interaction trials against one prepared encounter. The channel
// evaluation is deterministic given the selected in-paths, so it is cached
// per path pair and only the seeded selections are redrawn each trial.
inline RunReport run_montecarlo(const Scenario& sc) {
    if (sc.trials < 1) throw ConfigError("trials must be >= 1");
    SimState st = build_state(sc);
    auto [a, b] = detail::two_objects(st);
    const Coord cell = detail::shared_cell(st);

    struct Entry {
        MergedTable table;
        bool conserved = true;
    };
    std::map<std::pair<std::size_t, std::size_t>, Entry> cache;
    auto entry_for = [&](std::size_t s1, std::size_t s2) -> Entry& {
        auto key = std::make_pair(s1, s2);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const StateElement* els[2] = {nullptr, nullptr};
        const QObject* ins[2] = {a, b};
        const std::size_t sel[2] = {s1, s2};
        for (int i = 0; i < 2; ++i)
            for (const auto& el : ins[i]->paths[sel[i]].elements)
                if (el.cell() == cell) {
                    els[i] = &el;
                    break;
                }
        QObject ia = form_interaction_object(*els[0], *els[1]);
        process_channels(ia, st.rules, st.cfg, st.masses);
        Entry e;
        e.table = merged_out_table(ia);
        e.conserved = conserves_exactly(*els[0], *els[1], e.table);
        return cache.emplace(key, std::move(e)).first->second;
    };

    // exact expected combo distribution: Born path weights times merged
    // flavor weights, accumulated over every selectable path pair
    auto covering = [&](const QObject& q) {
        std::vector<std::pair<std::size_t, double>> w;
        double total = 0.0;
        for (std::size_t i = 0; i < q.paths.size(); ++i)
            for (const auto& el : q.paths[i].elements)
                if (el.cell() == cell) {
                    double n = std::norm(q.paths[i].amplitude);
                    w.emplace_back(i, n);
                    total += n;
                    break;
                }
        for (auto& [i, v] : w) v /= total;
        return w;
    };
    auto wa = covering(*a), wb = covering(*b);

    std::map<std::array<ParticleType, 2>, double> expect;
    for (const auto& [i, wi] : wa)
        for (const auto& [j, wj] : wb) {
            Entry& e = entry_for(i, j);
            for (const auto& blk : e.table.blocks)
                expect[blk.combo] += wi * wj * blk.weight / e.table.total;
        }

    RunReport rep;
    rep.trials = sc.trials;
    for (const auto& [combo, p] : expect) {
        rep.combos.push_back(combo);
        rep.expected.push_back(p);
    }
    rep.counts.assign(rep.combos.size(), 0);
    {
        auto type_at = [&](const QObject& q) {
            for (const auto& p : q.paths)
                for (const auto& el : p.elements)
                    if (el.cell() == cell) return el.ptype;
            throw CoverageError("no element at the interaction cell");
        };
        auto chans = reduce_equivalent(
            instantiate_channels(type_at(*a), type_at(*b), st.rules));
        for (const auto& ch : chans) rep.channels.emplace_back(ch.label, ch.sign);
    }

    auto combo_index = [&](const std::array<ParticleType, 2>& c) {
        for (std::size_t i = 0; i < rep.combos.size(); ++i)
            if (rep.combos[i] == c) return i;
        throw StructureError("sampled combo missing from the expected set");
    };

    for (std::uint64_t t = 0; t < sc.trials; ++t) {
        RngCtx ctx{st.cfg.seed, t};
        CounterRng r0 = ctx.stream(RngPurpose::path_select, 0);
        CounterRng r1 = ctx.stream(RngPurpose::path_select, 1);
        const std::size_t s1 = select_interacting_path(*a, cell, r0);
        const std::size_t s2 = select_interacting_path(*b, cell, r1);
        Entry& e = entry_for(s1, s2);

        CounterRng cr = ctx.stream(RngPurpose::combo_select);
        const auto& blk = e.table.blocks[detail::pick_block(e.table, cr)];
        rep.counts[combo_index(blk.combo)]++;

        rep.conservation_checks++;
        if (!e.conserved) rep.conservation_failures++;

        // entangled partners must come out with the opposite spin of the
        // branch that interacted
        const QObject* ins[2] = {a, b};
        const std::size_t sel[2] = {s1, s2};
        for (int i = 0; i < 2; ++i) {
            if (ins[i]->paths.size() < 2 || ins[i]->paths[sel[i]].elements.size() != 2)
                continue;
            std::size_t col = ins[i]->paths[sel[i]].elements[0].cell() == cell ? 0 : 1;
            auto res = detail::collapse_one(*ins[i], sel[i], col);
            rep.anticorrelation_checks++;
            const double picked = ins[i]->paths[sel[i]].elements[col].sigma;
            if (!res.survivor || res.survivor->paths.size() != 1 ||
                res.survivor->paths[0].elements.size() != 1 ||
                res.survivor->paths[0].elements[0].sigma != -picked)
                rep.anticorrelation_violations++;
        }
    }

    rep.pvalue = rep.combos.size() < 2
                     ? 1.0
                     : chi_square_gof_pvalue(rep.counts, rep.expected);
    return rep;
}

// ------------------------------------------------------------------- evolve

struct EvolveResult {
    std::vector<std::string> lines;  // event log, one record per line
    std::uint64_t fluctuations = 0;
    std::uint64_t interactions = 0;
    std::size_t final_objects = 0;
    double final_sum_amp2 = 0.0;

    std::string to_records() const {
        std::string s;
        for (const auto& l : lines) {
            s += l;
            s += '\n';
        }
        return s;
    }
    std::string to_text() const {
        std::ostringstream os;
        os << to_records();
        os << "final objects " << final_objects << " sum_amp2 " << g17(final_sum_amp2)
           << " fluctuations " << fluctuations << " interactions " << interactions
           << "\n";
        return os.str();
    }
};

inline void append_step_lines(EvolveResult& r, const StepRecord& rec) {
    std::ostringstream os;
    os << "step " << rec.step << " objects " << rec.objects << " sum_amp2 "
       << g17(rec.sum_amp2);
    r.lines.push_back(os.str());
    if (rec.fluct) {
        r.fluctuations++;
        std::ostringstream fs;
        fs << "fluct cell " << coord_text(rec.fluct->position) << " a "
           << rec.fluct->pw1.obj << ":" << rec.fluct->pw1.path << " b "
           << rec.fluct->pw2.obj << ":" << rec.fluct->pw2.path << " outcome "
           << to_string(rec.fluct->outcome);
        r.lines.push_back(fs.str());
    }
    if (rec.interaction) {
        r.interactions++;
        const auto& ir = *rec.interaction;
        std::ostringstream is;
        is << "interaction in " << name(ir.in_elements[0].ptype) << ","
           << name(ir.in_elements[1].ptype) << " out "
           << combo_text(ir.selected_out_types) << " paths "
           << ir.out_collection.paths.size() << " pruned " << ir.pruned_paths
           << " truncated " << ir.truncated_paths << " discarded "
           << ir.discarded_path_counts[0] << "," << ir.discarded_path_counts[1];
        r.lines.push_back(is.str());
    }
    if (!rec.aborted.empty()) r.lines.push_back("aborted " + rec.aborted);
}

inline EvolveResult run_evolve(const Scenario& sc) {
    SimState st = build_state(sc);
    EvolveResult r;
    r.lines.push_back("# qfsim-events v1");
    for (std::uint64_t step = 0; step < static_cast<std::uint64_t>(st.cfg.max_steps);
         ++step) {
        StepRecord rec = global_update(st, st.cfg.timestep);
        append_step_lines(r, rec);
        if (st.objects.empty()) break;
    }
    r.final_objects = st.objects.size();
    r.final_sum_amp2 = st.total_norm2();
    return r;
}

} // namespace qfsim
