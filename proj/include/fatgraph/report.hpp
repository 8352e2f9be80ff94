#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/doubling.hpp"
#include "fatgraph/graph.hpp"
#include "fatgraph/parallel.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/serialize.hpp"

#include <optional>

namespace fatgraph {

struct ReportOptions {
    int depth = 6;
    std::optional<Rat> epsilon;
    SweepOptions sweep;
};

/// One document with every check at the given depth. `flags` are the
/// checks the construction must pass and decide `pass`; `claims` records the
/// adjacent-ratio and one-index statements, which are measured, not assumed.
inline Json build_report(const Construction& cons, const ReportOptions& options) {
    const Params& params = cons.params();
    Json doc;
    Json flags = Json::object();
    Json config = to_json(params);
    config["depth"] = options.depth;
    config["epsilon"] = options.epsilon ? to_json(*options.epsilon) : Json(nullptr);
    if (cons.fault()) {
        const Fault& f = *cons.fault();
        config["fault"] = Json{{"cell", to_json(f.cell)}, {"value", std::string(1, letter(f.value))}};
    }
    doc["config"] = config;

    DoublingReport lemma = verify_lemma(options.depth, cons, options.sweep);
    doc["measure"] = to_json(lemma.measure);
    Json doubling = to_json(lemma);
    doubling.erase("measure");
    doubling.erase("claims");
    doc["doubling"] = doubling;
    doc["claims"] = to_json(lemma)["claims"];
    flags["c1_constant_weights"] = lemma.c1;
    flags["c2_refinement_stable"] = lemma.c2;
    flags["total_mass_one"] = lemma.measure.total_mass == Rat(1);

    if (cons.fault()) {
        // The graph module reads the construction, not the faulted weights.
        doc["bounds"] = nullptr;
        doc["graph"] = nullptr;
    } else {
        BoundsLedger ledger = bounds(cons);
        doc["bounds"] = to_json(ledger);
        flags["bounds_ledger"] = ledger.ok();

        Json graph = Json::object();
        Json masses = Json::array();
        Json discards = Json::array();
        bool above = true, balanced = true;
        for (int k = 0; k <= params.stage_count(); ++k) {
            Rat m = mu_S(k, cons);
            above = above && m >= ledger.partial(k);
            masses.push_back(to_json(m));
            if (k >= 1) {
                DiscardAccounting d = discard_accounting(k, cons);
                balanced = balanced && d.balanced();
                discards.push_back(to_json(d));
            }
        }
        graph["mu_S"] = masses;
        graph["discard"] = discards;
        doc["graph"] = graph;
        flags["mu_S_above_bound"] = above;
        flags["discard_balanced"] = balanced;

        if (options.epsilon) {
            flags["epsilon_ratio"] = params.q() / params.p() <= Rat(1) + *options.epsilon;
            flags["epsilon_mass"] = ledger.total > Rat(1) - *options.epsilon;
        }
    }

    bool pass = true;
    for (const auto& [name, value] : flags.items()) pass = pass && value.get<bool>();
    doc["flags"] = flags;
    doc["pass"] = pass;
    return doc;
}

} // namespace fatgraph
