#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/doubling.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/graph.hpp"
#include "fatgraph/render.hpp"
#include "fatgraph/report.hpp"
#include "fatgraph/schedule.hpp"
#include "fatgraph/serialize.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fatgraph::cli {

enum Exit : int { kOk = 0, kUsage = 2, kVerificationFailed = 3, kResourceLimit = 4 };

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) out.push_back(item);
    return out;
}

inline int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(Errc::InvalidArgument, "expected an integer for " + what + ", got '" + s + "'");
    }
}

/// "m1,n1,m2,n2,..."
inline std::vector<Stage> parse_stages(const std::string& text) {
    auto parts = split(text, ',');
    if (parts.empty() || parts.size() % 2 != 0) {
        fail(Errc::InvalidArgument, "--stages takes comma-separated pairs m,n");
    }
    std::vector<Stage> out;
    for (std::size_t j = 0; j < parts.size(); j += 2) {
        out.push_back(Stage{parse_int(parts[j], "m"), parse_int(parts[j + 1], "n")});
    }
    return out;
}

/// "level,col,row,value" with value one of p, q, 1.
inline Fault parse_fault(const std::string& text) {
    auto parts = split(text, ',');
    if (parts.size() != 4) fail(Errc::InvalidArgument, "--inject-fault takes level,col,row,value");
    Fault f;
    f.cell.level = parse_int(parts[0], "fault level");
    try {
        f.cell.col = std::stoull(parts[1]);
        f.cell.row = std::stoull(parts[2]);
    } catch (const std::exception&) {
        fail(Errc::InvalidArgument, "bad fault cell index");
    }
    if (parts[3] == "p" || parts[3] == "P") {
        f.value = WeightValue::P;
    } else if (parts[3] == "q" || parts[3] == "Q") {
        f.value = WeightValue::Q;
    } else if (parts[3] == "1") {
        f.value = WeightValue::One;
    } else {
        fail(Errc::InvalidArgument, "fault value must be p, q or 1");
    }
    return f;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::Io, "cannot write " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(Errc::Io, "write failed for " + path);
}

inline int exit_code(Errc code) {
    switch (code) {
    case Errc::SweepTooLarge:
    case Errc::CapTooCoarse:
        return kResourceLimit;
    default:
        return kUsage;
    }
}

inline void emit_error(std::ostream& err, std::string_view kind, const std::string& message) {
    err << Json{{"error", std::string(kind)}, {"message", message}}.dump() << "\n";
}

/// Options shared by every subcommand that needs a construction.
struct Common {
    std::string p;
    std::string stages;
    std::string config;
    std::string fault;
    unsigned workers = 1;
};

inline void add_common(CLI::App* cmd, Common& c, bool with_fault) {
    cmd->add_option("--p", c.p, "weight parameter p in (0,1), e.g. 1/2");
    cmd->add_option("--stages", c.stages, "stage list m1,n1[,m2,n2,...]");
    cmd->add_option("--config", c.config, "JSON configuration file");
    cmd->add_option("--workers", c.workers, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
    if (with_fault) cmd->add_option("--inject-fault", c.fault, "override one weight: level,col,row,value");
}

struct Resolved {
    RunConfig config;
    Params params;
    std::optional<Fault> fault;
    SweepOptions sweep;
};

inline Resolved resolve(const Common& c) {
    RunConfig config;
    if (!c.config.empty()) {
        Json j;
        try {
            j = Json::parse(read_file(c.config));
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::InvalidArgument, std::string("configuration is not valid JSON: ") + e.what());
        }
        config = run_config_from_json(j);
    }
    Rat p = config.params ? config.params->p() : Rat(1, 2);
    std::vector<Stage> stages = config.params ? config.params->stages() : std::vector<Stage>{Stage{3, 3}};
    if (!c.p.empty()) p = Rat::parse(c.p);
    if (!c.stages.empty()) stages = parse_stages(c.stages);
    if (c.workers != 1) config.workers = c.workers;

    Resolved out{config, Params::validate(p, stages), std::nullopt, SweepOptions{}};
    out.config.params = out.params;
    out.sweep.workers = std::max(1u, out.config.workers);
    if (out.config.exhaustive_limit) out.sweep.exhaustive_limit = *out.config.exhaustive_limit;
    if (const char* env = std::getenv("FATGRAPH_EXHAUSTIVE_LIMIT"); env && *env) {
        try {
            out.sweep.exhaustive_limit = std::stoull(env);
        } catch (const std::exception&) {
            fail(Errc::InvalidArgument, "FATGRAPH_EXHAUSTIVE_LIMIT must be a positive integer");
        }
    }
    if (!c.fault.empty()) out.fault = parse_fault(c.fault);
    return out;
}

inline void emit(std::ostream& out, const std::string& path, const Json& doc) {
    std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
        out << text;
    } else {
        write_file(path, text);
    }
}

} // namespace detail

/// Entry point for the command-line tool. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact construction and verification of a doubling measure that charges a graph."};
    app.require_subcommand(1);

    detail::Common common;

    // plan
    std::string plan_eps;
    int plan_stages = 1;
    auto* plan = app.add_subcommand("plan", "choose p and stage lengths for a target epsilon");
    plan->add_option("--epsilon", plan_eps, "target epsilon > 0")->required();
    plan->add_option("--stages", plan_stages, "number of stages K")->check(CLI::Range(0, kMaxStages));

    // verify
    int depth = 6;
    std::vector<std::uint64_t> sample;
    std::string sample_mode = "grid";
    std::string out_path;
    auto* verify = app.add_subcommand("verify", "exhaustive check of the doubling-lemma hypotheses");
    detail::add_common(verify, common, true);
    verify->add_option("--depth", depth, "sweep depth L");
    verify->add_option("--sample", sample, "random square pairs: trials seed")->expected(2);
    verify->add_option("--sample-mode", sample_mode, "grid or free")->check(CLI::IsMember({"grid", "free"}));
    verify->add_option("--out", out_path, "write JSON here instead of stdout");

    // graph-mass
    std::optional<int> k_opt;
    auto* gmass = app.add_subcommand("graph-mass", "exact mass of the graph approximation and the bound ledger");
    detail::add_common(gmass, common, false);
    gmass->add_option("--k", k_opt, "approximation level");
    gmass->add_option("--out", out_path, "write JSON here instead of stdout");

    // graph-export
    std::optional<std::uint64_t> resolution;
    auto* gexport = app.add_subcommand("graph-export", "CSV of chosen rectangles or graph samples");
    detail::add_common(gexport, common, false);
    gexport->add_option("--k", k_opt, "approximation level");
    gexport->add_option("--resolution", resolution, "sample count; omit to list chosen rectangles");
    gexport->add_option("--out", out_path, "CSV path")->required();

    // heatmap
    std::uint64_t pixels = 0;
    std::optional<int> overlay;
    auto* heat = app.add_subcommand("heatmap", "density image (P5, or P6 with --overlay)");
    detail::add_common(heat, common, true);
    heat->add_option("--depth", depth, "density depth L");
    heat->add_option("--pixels", pixels, "pixels per axis (divides 4^L); default min(4^L, 256)");
    heat->add_option("--overlay", overlay, "mark the chosen rectangles of this level");
    heat->add_option("--out", out_path, "image path")->required();

    // classify
    std::string cx, cy;
    int clevel = 0;
    auto* classify = app.add_subcommand("classify", "region class and weight word of the cell containing a point");
    detail::add_common(classify, common, true);
    classify->add_option("--x", cx, "x in [0,1]")->required();
    classify->add_option("--y", cy, "y in [0,1]")->required();
    classify->add_option("--level", clevel, "cell level")->required();

    // report
    std::string report_eps;
    auto* rep = app.add_subcommand("report", "every check in one JSON document");
    detail::add_common(rep, common, true);
    rep->add_option("--depth", depth, "sweep depth L");
    rep->add_option("--epsilon", report_eps, "epsilon target to check the parameters against");
    rep->add_option("--out", out_path, "write JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        detail::emit_error(err, "Usage", e.what());
        return kUsage;
    }

    try {
        if (plan->parsed()) {
            Rat eps = Rat::parse(plan_eps);
            Params params = plan_schedule(eps, plan_stages);
            Json doc = to_json(params);
            Rat total(1);
            for (const Stage& s : params.stages()) total -= tail_term(s.n, params.p()) + inv_pow4(s.m - 1);
            doc["q"] = to_json(params.q());
            doc["q_over_p"] = to_json(params.q() / params.p());
            doc["epsilon"] = to_json(eps);
            doc["bound_total"] = to_json(total);
            out << doc.dump(2) << "\n";
            return kOk;
        }

        detail::Resolved r = detail::resolve(common);
        Construction cons(r.params, r.fault);

        if (verify->parsed()) {
            DoublingReport report = verify_lemma(depth, cons, r.sweep);
            if (!sample.empty()) {
                auto mode = sample_mode == "free" ? SampledEstimate::Mode::Free : SampledEstimate::Mode::Grid;
                report.sampled = sampled_doubling_estimate(depth, sample[0], sample[1], cons, mode);
            }
            Json doc = to_json(report);
            doc["params"] = to_json(r.params);
            detail::emit(out, out_path, doc);
            return report.c1 && report.c2 ? kOk : kVerificationFailed;
        }

        int k = k_opt.value_or(r.params.stage_count());
        if (gmass->parsed()) {
            BoundsLedger ledger = bounds(cons);
            Rat mass = mu_S(k, cons);
            Json doc{{"k", k},
                     {"params", to_json(r.params)},
                     {"mu_S", to_json(mass)},
                     {"mu_S_closed_form", to_json(mu_S_closed_form(k, r.params))},
                     {"lower_bound", to_json(ledger.partial(k))},
                     {"above_bound", mass >= ledger.partial(k)},
                     {"bounds", to_json(ledger)}};
            doc["discard"] = k >= 1 ? to_json(discard_accounting(k, cons)) : Json(nullptr);
            detail::emit(out, out_path, doc);
            return ledger.ok() && mass >= ledger.partial(k) ? kOk : kVerificationFailed;
        }

        if (gexport->parsed()) {
            std::string csv;
            if (resolution) {
                GraphSampling s = sample_graph(k, *resolution, cons);
                csv = "x,y_lo,y_hi,y_mid\n";
                for (const GraphSample& g : s.samples) {
                    csv += g.x.str() + "," + g.y_lo.str() + "," + g.y_hi.str() + "," + g.y_mid.str() + "\n";
                }
            } else {
                csv = "x_lo,x_hi,y_lo,y_hi\n";
                for (const CRect& c : Approximation(cons, k).rects(r.sweep)) {
                    csv += c.bounds.l.str() + "," + c.bounds.r.str() + "," + c.bounds.b.str() + "," +
                           c.bounds.t.str() + "\n";
                }
            }
            detail::write_file(out_path, csv);
            return kOk;
        }

        if (heat->parsed()) {
            if (depth < 0 || depth > kMaxCellLevel) fail(Errc::OutOfRange, "heatmap depth outside [0, 31]");
            HeatmapSpec spec{depth, pixels == 0 ? std::min<std::uint64_t>(cells_per_side(depth), 256) : pixels, overlay};
            detail::write_file(out_path, render_heatmap(spec, cons).netpbm());
            return kOk;
        }

        if (classify->parsed()) {
            if (clevel < 0 || clevel > kMaxCellLevel) fail(Errc::OutOfRange, "level outside [0, 31]");
            Cell cell = cell_containing(Rat::parse(cx), Rat::parse(cy), clevel);
            // Deepest rectangle level whose boundaries are resolved at this level.
            int k_loc = 0;
            while (k_loc < r.params.stage_count() && r.params.last_uniform(k_loc + 1) <= clevel) ++k_loc;
            RegionClass region = locate(cell, k_loc, cons);
            auto word = weight_word(cell, cons);
            Rat density(1);
            for (WeightValue w : word) density *= value_of(w, r.params);
            Json doc{{"cell", to_json(cell)},
                     {"bounds", to_json(cell_bounds(cell))},
                     {"rect_level", k_loc},
                     {"region", to_json(region)},
                     {"weights", word_string(word)},
                     {"density", to_json(density)},
                     {"mass", to_json(density * Rat(BigInt(1), pow4(2 * clevel)))}};
            out << doc.dump(2) << "\n";
            return kOk;
        }

        if (rep->parsed()) {
            ReportOptions options;
            options.depth = depth;
            options.sweep = r.sweep;
            if (!report_eps.empty()) options.epsilon = Rat::parse(report_eps);
            Json doc = build_report(cons, options);
            detail::emit(out, out_path, doc);
            return doc.at("pass").get<bool>() ? kOk : kVerificationFailed;
        }
    } catch (const Error& e) {
        detail::emit_error(err, to_string(e.code()), e.what());
        return detail::exit_code(e.code());
    }
    return kUsage;
}

} // namespace fatgraph::cli
