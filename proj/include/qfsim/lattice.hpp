#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "qfsim/amplitudes.hpp"
#include "qfsim/config.hpp"
#include "qfsim/errors.hpp"
#include "qfsim/qobject.hpp"
#include "qfsim/vertex.hpp"

namespace qfsim {

struct PathRef {
    std::uint64_t obj = 0;
    std::size_t path = 0;
    auto operator<=>(const PathRef&) const = default;
};

// Cell grid with the bidirectional occupancy index. Amplitudes stay on the
// q-object paths; cells only hold references.
struct Lattice {
    std::vector<std::int64_t> dims;
    double spacing = 1.0;
    std::uint64_t step = 0;
    std::map<Coord, std::set<PathRef>> by_cell;
    std::map<PathRef, std::set<Coord>> by_path;

    bool in_bounds(const Coord& c) const {
        if (c.size() != dims.size()) return false;
        for (std::size_t d = 0; d < dims.size(); ++d)
            if (c[d] < 0 || c[d] >= dims[d]) return false;
        return true;
    }

    void register_object(const QObject& q) {
        for (std::size_t pi = 0; pi < q.paths.size(); ++pi) {
            PathRef ref{q.id, pi};
            std::set<Coord> cells;
            for (const auto& el : q.paths[pi].elements) {
                Coord c = el.cell();
                if (!in_bounds(c)) throw StructureError("element cell outside lattice");
                cells.insert(std::move(c));
            }
            for (const auto& c : cells) by_cell[c].insert(ref);
            by_path[ref] = std::move(cells);
        }
    }

    void unregister_object(std::uint64_t id) {
        auto it = by_path.lower_bound(PathRef{id, 0});
        while (it != by_path.end() && it->first.obj == id) {
            for (const auto& c : it->second) {
                auto cit = by_cell.find(c);
                cit->second.erase(it->first);
                if (cit->second.empty()) by_cell.erase(cit);
            }
            it = by_path.erase(it);
        }
    }

    // full symmetry check of the occupancy index
    void audit() const {
        for (const auto& [cell, refs] : by_cell) {
            if (refs.empty()) throw StructureError("empty occupancy cell entry");
            for (const auto& r : refs) {
                auto it = by_path.find(r);
                if (it == by_path.end() || !it->second.count(cell))
                    throw StructureError("occupancy cell->path without reverse entry");
            }
        }
        for (const auto& [ref, cells] : by_path) {
            if (cells.empty()) throw StructureError("registered path covers no cell");
            for (const auto& c : cells) {
                auto it = by_cell.find(c);
                if (it == by_cell.end() || !it->second.count(ref))
                    throw StructureError("occupancy path->cell without reverse entry");
            }
        }
    }
};

// Whole-system state: config, grid, and the live q-objects keyed by id.
struct SimState {
    SimConfig cfg;
    Lattice lattice;
    std::map<std::uint64_t, QObject> objects;
    std::uint64_t next_id = 1;
    std::vector<VertexRule> rules = default_vertex_rules();
    MassTable masses;

    explicit SimState(SimConfig c = {}) : cfg(std::move(c)) {
        cfg.validate();
        lattice.dims = cfg.dims;
        lattice.spacing = cfg.spacing;
    }

    // periodic wrap into [0, dims); untouched for absorbing walls
    void wrap_positions(QObject& q) const {
        if (cfg.boundary != Boundary::periodic) return;
        for (auto& path : q.paths)
            for (auto& el : path.elements)
                for (std::size_t d = 0; d < el.pos.size(); ++d) {
                    const double L = static_cast<double>(cfg.dims[d]);
                    el.pos[d] -= L * std::floor(el.pos[d] / L);
                    if (el.pos[d] >= L) el.pos[d] = 0.0;  // guard fp edge
                }
    }

    bool object_in_bounds(const QObject& q) const {
        for (const auto& path : q.paths)
            for (const auto& el : path.elements)
                if (!lattice.in_bounds(el.cell())) return false;
        return true;
    }

    std::uint64_t add_object(QObject q) {
        check_structure(q);
        for (const auto& path : q.paths)
            for (const auto& el : path.elements)
                if (el.pos.size() != cfg.dims.size())
                    throw StructureError("element position rank differs from lattice");
        q.id = next_id++;
        wrap_positions(q);
        if (!object_in_bounds(q)) throw StructureError("object placed outside lattice");
        std::uint64_t id = q.id;
        lattice.register_object(q);
        objects.emplace(id, std::move(q));
        return id;
    }

    void remove_object(std::uint64_t id) {
        lattice.unregister_object(id);
        objects.erase(id);
    }

    // re-register one object after its paths changed shape
    void replace_object(QObject q) {
        lattice.unregister_object(q.id);
        wrap_positions(q);
        std::uint64_t id = q.id;
        lattice.register_object(q);
        objects[id] = std::move(q);
    }

    double total_norm2() const {
        double s = 0.0;
        for (const auto& [id, q] : objects) s += q.norm2();
        return s;
    }
};

} // namespace qfsim
