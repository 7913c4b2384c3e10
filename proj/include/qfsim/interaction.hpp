#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfsim/amplitudes.hpp"
#include "qfsim/channels.hpp"
#include "qfsim/config.hpp"
#include "qfsim/qobject.hpp"
#include "qfsim/rng.hpp"
#include "qfsim/vertex.hpp"

namespace qfsim {

// Seeded stream bundle for one interaction attempt. frame is the step (or
// trial) index, so the same attempt replays identically regardless of how
// many attempts ran before it.
struct RngCtx {
    std::uint64_t seed = 1;
    std::uint64_t frame = 0;
    CounterRng stream(RngPurpose p, std::uint64_t k1 = 0) const {
        return CounterRng(seed, p, frame, k1);
    }
};

// Born-weighted draw among the paths that put an element in the given cell.
inline std::size_t select_interacting_path(const QObject& q, const Coord& position,
                                           CounterRng& rng) {
    check_structure(q);
    std::vector<std::size_t> covering;
    for (std::size_t i = 0; i < q.paths.size(); ++i)
        for (const auto& el : q.paths[i].elements)
            if (el.cell() == position) {
                covering.push_back(i);
                break;
            }
    if (covering.empty())
        throw CoverageError("no path of the q-object covers the interaction cell");
    double total = 0.0;
    for (auto i : covering) total += std::norm(q.paths[i].amplitude);
    if (total <= 0.0)
        throw DegenerateObjectError("covering paths all carry zero amplitude");
    double x = rng.uniform() * total, cum = 0.0;
    for (auto i : covering) {
        cum += std::norm(q.paths[i].amplitude);
        if (x < cum) return i;
    }
    return covering.back();
}

// The interaction object holds the single selected alternative of each
// partner: one path, two elements, unit amplitude.
inline QObject form_interaction_object(const StateElement& el1, const StateElement& el2) {
    if (el1.cell() != el2.cell())
        throw StructureError("interaction partners sit in different cells");
    QObject q;
    q.kind = QObjectKind::interaction_object;
    q.paths.push_back(Path{{el1, el2}, cd(1.0, 0.0)});
    return q;
}

namespace detail {

// Canonical out grid for one flavor pair: direction bins (bin-major), then
// both spin labels of each leg in ascending order. Identical inputs give an
// identical path list, which is what lets channels be summed slot by slot.
inline std::vector<Path> out_grid(const FourMomentum& p_tot,
                                  const std::array<ParticleType, 2>& flavor,
                                  const RealCoord& pos, int graining,
                                  const MassTable& masses) {
    auto pairs = two_body_partition(p_tot, masses.of(flavor[0]), masses.of(flavor[1]),
                                    graining);
    std::vector<Path> grid;
    grid.reserve(pairs.size() * 4);
    for (const auto& [pb, pc] : pairs)
        for (double sb : spin_labels(flavor[0]))
            for (double sc : spin_labels(flavor[1]))
                grid.push_back(Path{{make_element(flavor[0], pb, sb, pos),
                                     make_element(flavor[1], pc, sc, pos)},
                                    cd(1.0, 0.0)});
    return grid;
}

}  // namespace detail

// Instantiate, reduce, and evaluate all channels of an interaction object.
// Every channel gets the full amplitude table over a shared out grid; the
// channel's flavor list is narrowed to the kinematically open ones. Returns
// the channel list it stored on the object.
inline std::vector<IaChannel>& process_channels(QObject& ia,
                                                const std::vector<VertexRule>& rules,
                                                const SimConfig& cfg,
                                                const MassTable& masses = {}) {
    if (ia.kind != QObjectKind::interaction_object)
        throw StructureError("process_channels expects an interaction object");
    check_structure(ia);
    if (ia.paths.size() != 1 || ia.paths[0].elements.size() != 2)
        throw StructureError("interaction object must hold one path of two elements");

    const StateElement& a = ia.paths[0].elements[0];
    const StateElement& b = ia.paths[0].elements[1];
    auto chans = reduce_equivalent(instantiate_channels(a.ptype, b.ptype, rules));

    FourMomentum p_tot = a.p + b.p;
    if (p_tot.mass2() <= 0.0)
        throw KinematicsError("interaction total momentum is not timelike");

    // outgoing waves start at the center of the interaction cell
    RealCoord center(a.pos.size());
    for (std::size_t d = 0; d < center.size(); ++d)
        center[d] = std::floor(a.pos[d]) + 0.5;

    const double e = cfg.coupling_e();
    for (auto& ch : chans) {
        ch.in_elements = {a, b};
        std::vector<std::array<ParticleType, 2>> open;
        std::vector<Path> paths;
        for (const auto& fl : ch.out_flavors) {
            auto grid = detail::out_grid(p_tot, fl, center, cfg.graining, masses);
            if (grid.empty()) continue;  // below threshold
            open.push_back(fl);
            for (auto& g : grid) {
                g.amplitude = channel_amplitude(ch, g, e, 0.0, masses);
                paths.push_back(std::move(g));
            }
        }
        ch.out_flavors = std::move(open);
        ch.paths = std::move(paths);
    }
    ia.channels = std::move(chans);
    return ia.channels;
}

// Per-flavor view of the processed channels with the signed channel sum on
// every grid slot. weight is the Born weight of the whole flavor block.
struct OutBlock {
    std::array<ParticleType, 2> combo{};
    std::vector<Path> paths;
    double weight = 0.0;
};

struct MergedTable {
    std::vector<OutBlock> blocks;
    double total = 0.0;

    const OutBlock* find(const std::array<ParticleType, 2>& combo) const {
        for (const auto& b : blocks)
            if (b.combo == combo) return &b;
        return nullptr;
    }
};

inline MergedTable merged_out_table(const QObject& ia) {
    if (ia.channels.empty())
        throw EmptyChannelSetError("interaction object has no processed channels");

    std::vector<std::array<ParticleType, 2>> universe;
    for (const auto& ch : ia.channels)
        for (const auto& fl : ch.out_flavors)
            if (std::find(universe.begin(), universe.end(), fl) == universe.end())
                universe.push_back(fl);
    std::sort(universe.begin(), universe.end(), [](const auto& x, const auto& y) {
        return std::make_pair(static_cast<int>(x[0]), static_cast<int>(x[1])) <
               std::make_pair(static_cast<int>(y[0]), static_cast<int>(y[1]));
    });

    MergedTable table;
    for (const auto& fl : universe) {
        OutBlock blk;
        blk.combo = fl;
        bool first = true;
        for (const auto& ch : ia.channels) {
            auto it = std::find(ch.out_flavors.begin(), ch.out_flavors.end(), fl);
            if (it == ch.out_flavors.end()) continue;
            const std::size_t n = ch.paths.size() / ch.out_flavors.size();
            const std::size_t off =
                static_cast<std::size_t>(it - ch.out_flavors.begin()) * n;
            if (first) {
                blk.paths.assign(ch.paths.begin() + off, ch.paths.begin() + off + n);
                for (auto& p : blk.paths) p.amplitude = cd(0.0, 0.0);
                first = false;
            }
            if (blk.paths.size() != n)
                throw StructureError("channel out grids are misaligned");
            for (std::size_t k = 0; k < n; ++k)
                blk.paths[k].amplitude +=
                    static_cast<double>(ch.sign) * ch.paths[off + k].amplitude;
        }
        for (const auto& p : blk.paths) blk.weight += std::norm(p.amplitude);
        table.total += blk.weight;
        table.blocks.push_back(std::move(blk));
    }
    return table;
}

namespace detail {

inline std::size_t pick_block(const MergedTable& table, CounterRng& rng) {
    if (table.total <= 0.0)
        throw DegenerateObjectError("every out-combination has zero merged weight");
    double x = rng.uniform() * table.total, cum = 0.0;
    for (std::size_t i = 0; i < table.blocks.size(); ++i) {
        cum += table.blocks[i].weight;
        if (x < cum) return i;
    }
    return table.blocks.size() - 1;
}

}  // namespace detail

// Born draw over the merged flavor weights; returns the ordered out pair.
inline std::array<ParticleType, 2> select_out_combination(const QObject& ia,
                                                          CounterRng& rng) {
    MergedTable table = merged_out_table(ia);
    return table.blocks[detail::pick_block(table, rng)].combo;
}

struct MergeStats {
    std::size_t pruned = 0;     // slots dropped below the amplitude floor
    std::size_t truncated = 0;  // slots dropped by the path-count cap
};

// Collapse the channel set onto one flavor combination: signed sums become
// the paths of a pw_collection, tiny amplitudes are pruned, the path count is
// capped at the strongest cfg.max_paths, and the result is normalized.
inline QObject merge_channels(const MergedTable& table,
                              const std::array<ParticleType, 2>& combo,
                              const SimConfig& cfg, MergeStats* stats = nullptr) {
    const OutBlock* blk = table.find(combo);
    if (!blk)
        throw EmptyChannelSetError("selected out-combination has no channel support");

    QObject out;
    out.kind = QObjectKind::pw_collection;
    for (const auto& p : blk->paths)
        if (std::abs(p.amplitude) >= cfg.prune_threshold) out.paths.push_back(p);
    MergeStats ms;
    ms.pruned = blk->paths.size() - out.paths.size();

    if (out.paths.size() > static_cast<std::size_t>(cfg.max_paths)) {
        std::vector<std::size_t> idx(out.paths.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
            return std::norm(out.paths[x].amplitude) > std::norm(out.paths[y].amplitude);
        });
        idx.resize(static_cast<std::size_t>(cfg.max_paths));
        std::sort(idx.begin(), idx.end());  // keep grid order among survivors
        std::vector<Path> kept;
        kept.reserve(idx.size());
        for (auto i : idx) kept.push_back(std::move(out.paths[i]));
        ms.truncated = out.paths.size() - kept.size();
        out.paths = std::move(kept);
    }
    if (out.paths.empty())
        throw DegenerateObjectError("merged collection is empty after pruning");
    if (stats) *stats = ms;
    return normalize(std::move(out));
}

inline QObject merge_channels(const QObject& ia, const std::array<ParticleType, 2>& combo,
                              const SimConfig& cfg, MergeStats* stats = nullptr) {
    return merge_channels(merged_out_table(ia), combo, cfg, stats);
}

struct InteractionRecord {
    Coord position;
    std::array<std::uint64_t, 2> in_ids{};
    std::array<std::size_t, 2> selected_paths{};
    std::array<std::size_t, 2> interacting_columns{};
    std::array<StateElement, 2> in_elements{};
    std::array<ParticleType, 2> selected_out_types{};
    QObject out_collection;
    std::array<std::size_t, 2> discarded_path_counts{};
    std::array<std::optional<QObject>, 2> survivors;  // reduced partners, ids kept
    std::size_t pruned_paths = 0;
    std::size_t truncated_paths = 0;
    std::vector<std::pair<std::string, int>> channel_summary;  // label, relative sign
    std::vector<std::pair<std::array<ParticleType, 2>, double>> combo_weights;
};

namespace detail {

struct CollapseResult {
    std::optional<QObject> survivor;
    std::size_t discarded = 0;
};

// Keep only the selected path, remove the element that entered the
// interaction, and hand the rest back as a unit-amplitude object.
inline CollapseResult collapse_one(const QObject& q, std::size_t selected,
                                   std::size_t column) {
    if (selected >= q.paths.size()) throw IndexError("selected path out of range");
    if (column >= q.paths[selected].elements.size())
        throw IndexError("interacting column out of range");
    CollapseResult r;
    r.discarded = q.paths.size() - 1;
    Path kept = q.paths[selected];
    kept.elements.erase(kept.elements.begin() + static_cast<std::ptrdiff_t>(column));
    kept.amplitude = cd(1.0, 0.0);
    if (kept.elements.empty()) return r;  // fully consumed
    QObject s;
    s.id = q.id;
    s.kind = kept.elements.size() == 1 ? QObjectKind::particle_wave
                                       : QObjectKind::pw_collection;
    s.paths.push_back(std::move(kept));
    r.survivor = std::move(s);
    return r;
}

}  // namespace detail

// Apply the collapse to both in-collections: alternatives that did not
// interact are discarded, entangled partners keep only the selected branch.
inline void collapse_in_collections(InteractionRecord& record,
                                    const std::array<const QObject*, 2>& affected) {
    for (int i = 0; i < 2; ++i) {
        auto res = detail::collapse_one(*affected[i], record.selected_paths[i],
                                        record.interacting_columns[i]);
        record.discarded_path_counts[i] = res.discarded;
        record.survivors[i] = std::move(res.survivor);
    }
}

// The whole pipeline for one durable interaction at a cell: pick one path of
// each partner, build the interaction object, evaluate channels, pick the out
// flavor, merge, and collapse the inputs. Inputs are never mutated; the
// record carries everything the caller needs to rewrite the system state.
inline InteractionRecord perform_interaction(const QObject& pw1, const QObject& pw2,
                                             const Coord& position, const RngCtx& rng,
                                             const std::vector<VertexRule>& rules,
                                             const SimConfig& cfg,
                                             const MassTable& masses = {}) {
    InteractionRecord rec;
    rec.position = position;
    rec.in_ids = {pw1.id, pw2.id};
    const std::array<const QObject*, 2> ins{&pw1, &pw2};
    for (int i = 0; i < 2; ++i) {
        CounterRng r = rng.stream(RngPurpose::path_select, static_cast<std::uint64_t>(i));
        rec.selected_paths[i] = select_interacting_path(*ins[i], position, r);
        const Path& p = ins[i]->paths[rec.selected_paths[i]];
        std::size_t col = p.elements.size();
        for (std::size_t c = 0; c < p.elements.size(); ++c)
            if (p.elements[c].cell() == position) {
                col = c;
                break;
            }
        if (col == p.elements.size())
            throw CoverageError("selected path does not cover the interaction cell");
        rec.interacting_columns[i] = col;
        rec.in_elements[i] = p.elements[col];
    }

    QObject ia = form_interaction_object(rec.in_elements[0], rec.in_elements[1]);
    process_channels(ia, rules, cfg, masses);
    for (const auto& ch : ia.channels) rec.channel_summary.emplace_back(ch.label, ch.sign);

    MergedTable table = merged_out_table(ia);
    for (const auto& blk : table.blocks) rec.combo_weights.emplace_back(blk.combo, blk.weight);

    CounterRng cr = rng.stream(RngPurpose::combo_select);
    rec.selected_out_types = table.blocks[detail::pick_block(table, cr)].combo;

    MergeStats ms;
    rec.out_collection = merge_channels(table, rec.selected_out_types, cfg, &ms);
    rec.pruned_paths = ms.pruned;
    rec.truncated_paths = ms.truncated;

    collapse_in_collections(rec, ins);
    return rec;
}

// Construction-level conservation audit: every out path of every block must
// reproduce the in four-momentum sum bit for bit and the total charge.
inline bool conserves_exactly(const StateElement& in0, const StateElement& in1,
                              const MergedTable& table) {
    const FourMomentum p_tot = in0.p + in1.p;
    const int q_tot = charge(in0.ptype) + charge(in1.ptype);
    for (const auto& blk : table.blocks)
        for (const auto& p : blk.paths) {
            FourMomentum s = p.elements[0].p + p.elements[1].p;
            if (s.e != p_tot.e || s.px != p_tot.px || s.py != p_tot.py ||
                s.pz != p_tot.pz)
                return false;
            int q = 0;
            for (const auto& el : p.elements) q += charge(el.ptype);
            if (q != q_tot) return false;
        }
    return true;
}

} // namespace qfsim
