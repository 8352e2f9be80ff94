#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/doubling.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/graph.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/measure.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/schedule.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fatgraph {

using Json = nlohmann::json; // std::map objects: keys always come out sorted

inline Json to_json(const Rat& r) { return r.str(); }

inline Rat rat_from_json(const Json& j) {
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
    fail(Errc::InvalidRational, "expected a rational string, got " + j.dump());
}

inline Json to_json(const Cell& c) { return Json{{"level", c.level}, {"col", c.col}, {"row", c.row}}; }

inline Json to_json(const RectQ& r) {
    return Json{{"l", to_json(r.l)}, {"r", to_json(r.r)}, {"b", to_json(r.b)}, {"t", to_json(r.t)}};
}

inline Json to_json(const CellPair& pair) { return Json::array({to_json(pair.first), to_json(pair.second)}); }

inline Json to_json(const Params& params) {
    Json stages = Json::array();
    for (const Stage& s : params.stages()) stages.push_back(Json{{"m", s.m}, {"n", s.n}});
    return Json{{"p", to_json(params.p())}, {"stages", stages}};
}

inline Params params_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("stages") || !j.at("stages").is_array()) {
        fail(Errc::InvalidArgument, "parameters need \"p\" and a \"stages\" array");
    }
    std::vector<Stage> stages;
    for (const Json& s : j.at("stages")) {
        if (!s.is_object() || !s.contains("m") || !s.contains("n") || !s.at("m").is_number_integer() ||
            !s.at("n").is_number_integer()) {
            fail(Errc::InvalidArgument, "each stage needs integer \"m\" and \"n\"");
        }
        stages.push_back(Stage{s.at("m").get<int>(), s.at("n").get<int>()});
    }
    return Params::validate(rat_from_json(j.at("p")), std::move(stages));
}

inline Json to_json(const MeasureReport& m) {
    Json out{{"depth", m.depth},
             {"total_mass", to_json(m.total_mass)},
             {"violations", m.violations},
             {"max_child_sum_error", to_json(m.max_child_sum_error)},
             {"parents_checked", m.parents_checked}};
    out["witness"] = m.witness ? to_json(*m.witness) : Json(nullptr);
    return out;
}

inline Json to_json(const RatioExtreme& r) {
    return Json{{"max_ratio", to_json(r.ratio)},
                {"witness", to_json(r.witness)},
                {"max_divergence", r.max_divergence},
                {"divergence_witness", to_json(r.divergence_witness)}};
}

inline Json to_json(const SampledEstimate& s) {
    Json out{{"mode", s.mode == SampledEstimate::Mode::Grid ? "grid" : "free"},
             {"trials", s.trials},
             {"seed", s.seed},
             {"resolution", s.resolution},
             {"certifying", false}};
    out["max_ratio"] = s.max_ratio ? to_json(*s.max_ratio) : Json(nullptr);
    out["max_ratio_decimal_estimate"] = s.max_ratio ? Json(s.decimal()) : Json(nullptr);
    out["witness"] = s.witness ? Json::array({to_json(s.witness->first), to_json(s.witness->second)}) : Json(nullptr);
    return out;
}

inline Json to_json(const DoublingReport& r) {
    Json out{{"depth", r.depth},
             {"conditions",
              Json{{"c1", r.c1}, {"c2", r.c2}, {"c3_epsilon", to_json(r.c3_epsilon())},
                   {"c3_epsilon_edge", to_json(r.c3_epsilon_edge())}}},
             {"c1_mismatches", r.c1_mismatches},
             {"measure", to_json(r.measure)},
             {"adjacent", to_json(r.sweep.all)},
             {"edge_adjacent", to_json(r.sweep.edge)},
             {"pairs_checked", r.sweep.pairs},
             {"max_divergence", r.max_divergence()},
             {"q_over_p", to_json(r.q_over_p)},
             {"claims",
              Json{{"ratio_within_q_over_p", r.ratio_within_q_over_p()},
                   {"one_index_divergence", r.one_index()},
                   {"edge_ratio_within_q_over_p", r.sweep.edge.ratio <= r.q_over_p},
                   {"edge_one_index_divergence", r.sweep.edge.max_divergence <= 1}}}};
    out["c1_witness"] = r.c1_witness ? to_json(*r.c1_witness) : Json(nullptr);
    if (r.sampled) out["sampled_general_ratio"] = to_json(*r.sampled);
    return out;
}

inline Json to_json(const BoundsLedger& b) {
    Json stages = Json::array();
    for (const StageBound& s : b.stages) {
        stages.push_back(Json{{"stage", s.stage},
                              {"tail_term", to_json(s.tail_term)},
                              {"tail_exact", to_json(s.tail_exact)},
                              {"tail_ok", s.tail_ok()},
                              {"leftover_term", to_json(s.leftover_term)},
                              {"leftover_exact", to_json(s.leftover_exact)},
                              {"leftover_in_graph", to_json(s.leftover_in_graph)},
                              {"leftover_ok", s.leftover_ok()},
                              {"retention", to_json(s.retention)}});
    }
    return Json{{"stages", stages},
                {"pq", to_json(b.pq)},
                {"pq_identity", b.pq_identity},
                {"pq_below_one", b.pq_below_one},
                {"total", to_json(b.total)},
                {"ok", b.ok()}};
}

inline Json to_json(const DiscardAccounting& d) {
    return Json{{"k", d.k},
                {"before", to_json(d.before)},
                {"after", to_json(d.after)},
                {"unchosen", to_json(d.unchosen)},
                {"leftover", to_json(d.leftover)},
                {"balanced", d.balanced()}};
}

inline Json to_json(const FEnclosure& e) {
    return Json{{"x", to_json(e.x)}, {"k", e.k}, {"lo", to_json(e.lo)}, {"hi", to_json(e.hi)}, {"path", e.path}};
}

inline Json to_json(const RegionClass& r) {
    Json out{{"kind", r.kind == RegionClass::Kind::InRect ? "InRect" : "LeftOver"},
             {"level", r.level},
             {"path", r.path},
             {"in_all_bands", r.in_all_bands},
             {"rect_extent", Json{{"lo", to_json(r.rect_extent.lo)}, {"hi", to_json(r.rect_extent.hi)}}}};
    if (r.column_count > 0) {
        out["first_column"] = r.first_column;
        out["column_count"] = r.column_count;
    }
    return out;
}

/// Everything a CLI run depends on. Either explicit parameters or an
/// epsilon (with a stage count) to plan them from.
struct RunConfig {
    std::optional<Params> params;
    std::optional<Rat> epsilon;
    std::optional<int> plan_stages;
    std::optional<int> depth;
    std::optional<int> k;
    std::optional<std::uint64_t> resolution;
    std::optional<std::uint64_t> pixels;
    std::optional<int> overlay;
    std::optional<std::string> out;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> exhaustive_limit;
    unsigned workers = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline Json to_json(const RunConfig& c) {
    Json out = Json::object();
    if (c.params) out["params"] = to_json(*c.params);
    if (c.epsilon) out["epsilon"] = to_json(*c.epsilon);
    if (c.plan_stages) out["plan_stages"] = *c.plan_stages;
    if (c.depth) out["depth"] = *c.depth;
    if (c.k) out["k"] = *c.k;
    if (c.resolution) out["resolution"] = *c.resolution;
    if (c.pixels) out["pixels"] = *c.pixels;
    if (c.overlay) out["overlay"] = *c.overlay;
    if (c.out) out["out"] = *c.out;
    if (c.trials) out["trials"] = *c.trials;
    if (c.seed) out["seed"] = *c.seed;
    if (c.exhaustive_limit) out["exhaustive_limit"] = *c.exhaustive_limit;
    out["workers"] = c.workers;
    return out;
}

/// Accepts a full RunConfig document or a bare parameter object.
inline RunConfig run_config_from_json(const Json& j) {
    if (!j.is_object()) fail(Errc::InvalidArgument, "configuration must be a JSON object");
    RunConfig c;
    if (j.contains("stages")) {
        c.params = params_from_json(j);
        return c;
    }
    try {
        if (j.contains("params")) c.params = params_from_json(j.at("params"));
        if (j.contains("epsilon")) c.epsilon = rat_from_json(j.at("epsilon"));
        if (j.contains("plan_stages")) c.plan_stages = j.at("plan_stages").get<int>();
        if (j.contains("depth")) c.depth = j.at("depth").get<int>();
        if (j.contains("k")) c.k = j.at("k").get<int>();
        if (j.contains("resolution")) c.resolution = j.at("resolution").get<std::uint64_t>();
        if (j.contains("pixels")) c.pixels = j.at("pixels").get<std::uint64_t>();
        if (j.contains("overlay")) c.overlay = j.at("overlay").get<int>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("exhaustive_limit")) c.exhaustive_limit = j.at("exhaustive_limit").get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidArgument, std::string("bad configuration field: ") + e.what());
    }
    return c;
}

} // namespace fatgraph
