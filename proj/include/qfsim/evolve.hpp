#pragma once

#include <optional>
#include <utility>

#include "qfsim/engine.hpp"
#include "qfsim/interaction.hpp"

namespace qfsim {

struct StepRecord {
    std::uint64_t step = 0;
    std::size_t objects = 0;
    double sum_amp2 = 0.0;
    std::optional<Fluctuation> fluct;
    std::optional<InteractionRecord> interaction;
    std::string aborted;  // reason an attempted interaction left nothing durable
};

// Rewrite the system after a durable interaction: consumed inputs go away,
// reduced partners keep their ids, the merged collection enters as a new
// object.
inline void apply_interaction(SimState& state, const InteractionRecord& rec) {
    for (int i = 0; i < 2; ++i) {
        const std::uint64_t id = rec.in_ids[i];
        state.lattice.unregister_object(id);
        state.objects.erase(id);
        if (rec.survivors[i]) {
            QObject s = *rec.survivors[i];
            state.wrap_positions(s);
            state.lattice.register_object(s);
            state.objects.emplace(id, std::move(s));
        }
    }
    state.add_object(rec.out_collection);
}

// One global step: advance every object through its proper interval, then
// sample at most one pw-fluctuation, classify it, and carry a durable one
// through the interaction pipeline. A channel-less encounter aborts with the
// inputs untouched.
inline StepRecord global_update(SimState& state, double timestep) {
    const std::uint64_t step = state.lattice.step;
    advance_objects(state, timestep);

    StepRecord rec;
    rec.step = step;

    auto fluct = sample_fluctuation(state, step);
    if (fluct) {
        fluct->outcome =
            classify_outcome(state.cfg.seed, step, state.cfg.volatile_prob);
        if (fluct->outcome == Fluctuation::Outcome::interaction_collapse) {
            const QObject& a = state.objects.at(fluct->pw1.obj);
            const QObject& b = state.objects.at(fluct->pw2.obj);
            RngCtx ctx{state.cfg.seed, step};
            try {
                InteractionRecord ir = perform_interaction(
                    a, b, fluct->position, ctx, state.rules, state.cfg, state.masses);
                apply_interaction(state, ir);
                rec.interaction = std::move(ir);
            } catch (const EmptyChannelSetError& e) {
                fluct->outcome = Fluctuation::Outcome::nothing;
                rec.aborted = e.what();
            }
        }
        rec.fluct = std::move(fluct);
    }

    rec.objects = state.objects.size();
    rec.sum_amp2 = state.total_norm2();
    state.lattice.step = step + 1;
    return rec;
}

} // namespace qfsim
