#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/measure.hpp"
#include "fatgraph/parallel.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/words.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fatgraph {

using CellPair = std::pair<Cell, Cell>;

/// Number of steps i <= L at which two adjacent level-L cells carry
/// different weights.
inline int weight_divergence(const Cell& a, const Cell& b, const Construction& cons) {
    if (a.level != b.level) fail(Errc::ContractViolation, "weight divergence needs cells of equal level");
    if (!adjacent(a, b)) fail(Errc::ContractViolation, "weight divergence needs adjacent cells");
    if (a.level > cons.params().total_steps()) {
        fail(Errc::DepthExceeded, "cells deeper than the last configured step");
    }
    auto wa = weight_word(a, cons);
    auto wb = weight_word(b, cons);
    int out = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) out += wa[i] != wb[i] ? 1 : 0;
    return out;
}

/// Largest mass ratio mu(first)/mu(second) over a family of adjacent pairs.
struct RatioExtreme {
    Rat ratio{1};
    CellPair witness{};
    int max_divergence = 0;
    CellPair divergence_witness{};
};

struct AdjacentSweep {
    int depth = 0;
    /// All adjacent pairs, corner contact included.
    RatioExtreme all;
    /// Pairs sharing an edge.
    RatioExtreme edge;
    std::uint64_t pairs = 0;
};

namespace detail {

inline constexpr int kKeySpan = 127; // exponent differences lie in [-63, 63]

inline int key_index(int da, int db) { return (da + 63) * kKeySpan + (db + 63); }

struct PairTally {
    // First witness for every exponent difference (da, db) of mu(first)/mu(second).
    std::vector<std::optional<CellPair>> all;
    std::vector<std::optional<CellPair>> edge;
    int div_all = 0, div_edge = 0;
    std::optional<CellPair> div_all_witness, div_edge_witness;
    std::uint64_t pairs = 0;

    PairTally() : all(kKeySpan * kKeySpan), edge(kKeySpan * kKeySpan) {}

    void record(const Cell& a, const WeightWord& wa, const Cell& b, const WeightWord& wb, bool is_edge) {
        ++pairs;
        int da = wa.p_count() - wb.p_count();
        int db = wa.q_count() - wb.q_count();
        auto put = [&](std::vector<std::optional<CellPair>>& keys) {
            auto& fwd = keys[static_cast<std::size_t>(key_index(da, db))];
            if (!fwd) fwd = CellPair{a, b};
            auto& back = keys[static_cast<std::size_t>(key_index(-da, -db))];
            if (!back) back = CellPair{b, a};
        };
        put(all);
        if (is_edge) put(edge);

        int d = divergence(wa, wb);
        if (d > div_all) {
            div_all = d;
            div_all_witness = CellPair{a, b};
        }
        if (is_edge && d > div_edge) {
            div_edge = d;
            div_edge_witness = CellPair{a, b};
        }
    }

    void merge(const PairTally& later) {
        pairs += later.pairs;
        for (std::size_t j = 0; j < all.size(); ++j) {
            if (!all[j]) all[j] = later.all[j];
            if (!edge[j]) edge[j] = later.edge[j];
        }
        if (later.div_all > div_all) {
            div_all = later.div_all;
            div_all_witness = later.div_all_witness;
        }
        if (later.div_edge > div_edge) {
            div_edge = later.div_edge;
            div_edge_witness = later.div_edge_witness;
        }
    }
};

inline void resolve(RatioExtreme& out, const std::vector<std::optional<CellPair>>& keys, const Params& params) {
    for (int da = -63; da <= 63; ++da) {
        for (int db = -63; db <= 63; ++db) {
            const auto& w = keys[static_cast<std::size_t>(key_index(da, db))];
            if (!w) continue;
            Rat r = pow(params.p(), da) * pow(params.q(), db);
            if (r > out.ratio) {
                out.ratio = r;
                out.witness = *w;
            }
        }
    }
}

} // namespace detail

/// Exact maximum of mu(Q)/mu(G) over adjacent same-level cells at every
/// level 1..L. The level-L table is swept exhaustively; coarser levels are
/// swept as well since a cell's words only depend on its own level.
inline AdjacentSweep max_adjacent_ratio(int depth, const Construction& cons, const SweepOptions& options = {}) {
    check_sweep_size(depth, options);
    const Params& params = cons.params();
    if (depth > params.total_steps()) fail(Errc::DepthExceeded, "sweep deeper than the last configured step");

    AdjacentSweep out;
    out.depth = depth;
    out.all.witness = out.edge.witness = CellPair{Cell{}, Cell{}};
    out.all.divergence_witness = out.edge.divergence_witness = CellPair{Cell{}, Cell{}};

    detail::PairTally total;
    for (int level = 1; level <= depth; ++level) {
        LevelTable table(cons, level);
        std::uint64_t side = table.side();
        auto parts = run_chunks(side, options.workers, [&](std::uint64_t r0, std::uint64_t r1) {
            detail::PairTally tally;
            for (std::uint64_t r = r0; r < r1; ++r) {
                for (std::uint64_t c = 0; c < side; ++c) {
                    Cell a{level, c, r};
                    WeightWord wa = table.word(c, r);
                    if (c + 1 < side) tally.record(a, wa, Cell{level, c + 1, r}, table.word(c + 1, r), true);
                    if (r + 1 < side) {
                        tally.record(a, wa, Cell{level, c, r + 1}, table.word(c, r + 1), true);
                        if (c + 1 < side) {
                            tally.record(a, wa, Cell{level, c + 1, r + 1}, table.word(c + 1, r + 1), false);
                        }
                        if (c > 0) tally.record(a, wa, Cell{level, c - 1, r + 1}, table.word(c - 1, r + 1), false);
                    }
                }
            }
            return tally;
        });
        for (const auto& part : parts) total.merge(part);
    }

    out.pairs = total.pairs;
    detail::resolve(out.all, total.all, params);
    detail::resolve(out.edge, total.edge, params);
    out.all.max_divergence = total.div_all;
    if (total.div_all_witness) out.all.divergence_witness = *total.div_all_witness;
    out.edge.max_divergence = total.div_edge;
    if (total.div_edge_witness) out.edge.divergence_witness = *total.div_edge_witness;
    return out;
}

/// Empirical ratios over random square pairs; a lower bound on the doubling
/// constant, not a certificate.
struct SampledEstimate {
    enum class Mode { Grid, Free };

    Mode mode = Mode::Grid;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    int resolution = 0;
    /// Unset when there were no trials.
    std::optional<Rat> max_ratio;
    std::optional<std::pair<RectQ, RectQ>> witness;

    /// Decimal rendering of max_ratio, labelled as an estimate.
    std::string decimal() const {
        if (!max_ratio) return "";
        std::ostringstream os;
        os.precision(12);
        os << max_ratio->to_double();
        return os.str();
    }
};

/// Samples pairs of adjacent squares of side 4^{-l}, 1 <= l < resolution.
/// Grid mode snaps corners to multiples of the side; Free mode snaps them to
/// the 4^{-resolution} grid only. Every mass is exact because all corners
/// are 4-adic at level `resolution`. Each trial draws from its own generator
/// seeded by (seed, trial), so results do not depend on evaluation order.
inline SampledEstimate sampled_doubling_estimate(int resolution, std::uint64_t trials, std::uint64_t seed,
                                                 const Construction& cons,
                                                 SampledEstimate::Mode mode = SampledEstimate::Mode::Grid) {
    SampledEstimate out;
    out.mode = mode;
    out.trials = trials;
    out.seed = seed;
    out.resolution = resolution;
    if (trials == 0) return out;
    if (resolution < 2 || resolution > kMaxCellLevel || resolution > cons.params().total_steps()) {
        fail(Errc::OutOfRange, "sampling resolution must lie in [2, min(M_K, 31)]");
    }

    const std::array<std::pair<int, int>, 8> directions{
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
    std::uint64_t grid = cells_per_side(resolution);
    Rat unit(BigInt(1), pow4(resolution));

    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                               static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
        std::mt19937_64 rng(sequence);

        // Side level, then positions; redraw positions until both squares fit.
        int level = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(resolution - 1));
        std::uint64_t side = std::uint64_t{1} << (2 * (resolution - level)); // in grid units
        std::uint64_t step = mode == SampledEstimate::Mode::Grid ? side : 1;
        auto [dx, dy] = directions[rng() % directions.size()];
        std::uint64_t x0 = 0, y0 = 0;
        std::int64_t x1 = 0, y1 = 0;
        for (;;) {
            std::uint64_t slots = (grid - side) / step + 1;
            x0 = (rng() % slots) * step;
            y0 = (rng() % slots) * step;
            x1 = static_cast<std::int64_t>(x0) + dx * static_cast<std::int64_t>(side);
            y1 = static_cast<std::int64_t>(y0) + dy * static_cast<std::int64_t>(side);
            auto fits = [&](std::int64_t v) { return v >= 0 && static_cast<std::uint64_t>(v) + side <= grid; };
            if (fits(x1) && fits(y1)) break;
        }
        auto square = [&](std::uint64_t x, std::uint64_t y) {
            Rat l = Rat(BigInt(static_cast<unsigned long>(x))) * unit;
            Rat b = Rat(BigInt(static_cast<unsigned long>(y))) * unit;
            Rat s = Rat(BigInt(static_cast<unsigned long>(side))) * unit;
            return RectQ{l, l + s, b, b + s};
        };
        RectQ q1 = square(x0, y0);
        RectQ q2 = square(static_cast<std::uint64_t>(x1), static_cast<std::uint64_t>(y1));
        Rat m1 = mu_rect_exact(q1, cons, resolution);
        Rat m2 = mu_rect_exact(q2, cons, resolution);
        Rat r = m1 < m2 ? m2 / m1 : m1 / m2;
        if (!out.max_ratio || r > *out.max_ratio) {
            out.max_ratio = r;
            out.witness = m1 < m2 ? std::make_pair(q2, q1) : std::make_pair(q1, q2);
        }
    }
    return out;
}

/// Finite-depth check of the three hypotheses of the doubling lemma:
/// constant weights on cells, refinement-stable masses, and bounded ratios
/// on adjacent cells.
struct DoublingReport {
    int depth = 0;
    bool c1 = false;
    /// Cells whose sampled point weights disagreed with the cell word.
    std::uint64_t c1_mismatches = 0;
    std::optional<Cell> c1_witness;
    bool c2 = false;
    MeasureReport measure;
    AdjacentSweep sweep;
    Rat q_over_p;
    std::optional<SampledEstimate> sampled;

    const Rat& c3_epsilon() const { return sweep.all.ratio; }
    const Rat& c3_epsilon_edge() const { return sweep.edge.ratio; }
    int max_divergence() const { return sweep.all.max_divergence; }
    bool ratio_within_q_over_p() const { return sweep.all.ratio <= q_over_p; }
    bool one_index() const { return sweep.all.max_divergence <= 1; }
};

namespace detail {

/// Interior sample point of the index-th level-L interval: (index + 1/3) / 4^L.
inline Rat interior_point(std::uint64_t index, int level) {
    return (Rat(BigInt(static_cast<unsigned long>(index))) + Rat(1, 3)) / Rat(pow4(level));
}

/// Re-derives the weights of every level-L cell from a point strictly inside
/// it and compares with the tabulated words. Rows and columns are checked
/// separately (the weights factor through them); a strided subset of cells is
/// also evaluated point by point, as is the faulted cell if any.
inline std::optional<Cell> check_constant_weights(int level, const Construction& cons, std::uint64_t& mismatches) {
    LevelTable table(cons, level);
    std::optional<Cell> witness;
    auto flag = [&](const Cell& c) {
        ++mismatches;
        if (!witness) witness = c;
    };

    for (std::uint64_t r = 0; r < table.side(); ++r) {
        Rat y = interior_point(r, level);
        RowWord from_point = row_word(cons.classify_y(Span{y, y}, level));
        if (from_point.band != table.row(r).band || from_point.upper != table.row(r).upper) flag(Cell{level, 0, r});
    }
    for (std::uint64_t c = 0; c < table.side(); ++c) {
        Rat x = interior_point(c, level);
        std::uint64_t mask = 0;
        for (int i = 1; i <= level; ++i) {
            unsigned d = point_digit(x, i);
            if (d == 1 || d == 2) mask |= std::uint64_t{1} << (i - 1);
        }
        if (mask != column_a_mask(c, level)) flag(Cell{level, c, 0});
    }

    std::vector<Cell> probes;
    std::uint64_t total = table.side() * table.side();
    std::uint64_t stride = std::max<std::uint64_t>(1, total / 256);
    for (std::uint64_t j = 0; j < total; j += stride) probes.push_back(Cell{level, j % table.side(), j / table.side()});
    if (const auto& f = cons.fault(); f && f->cell.level <= level) {
        int shift = 2 * (level - f->cell.level);
        probes.push_back(Cell{level, f->cell.col << shift, f->cell.row << shift});
    }
    for (const Cell& cell : probes) {
        Rat x = interior_point(cell.col, level);
        Rat y = interior_point(cell.row, level);
        auto expected = table.unpack(table.word(cell.col, cell.row));
        for (int i = 1; i <= level; ++i) {
            if (weight_at(i, x, y, cons) != expected[static_cast<std::size_t>(i - 1)]) {
                flag(cell);
                break;
            }
        }
    }
    return witness;
}

} // namespace detail

inline DoublingReport verify_lemma(int depth, const Construction& cons, const SweepOptions& options = {}) {
    check_sweep_size(depth, options);
    DoublingReport report;
    report.depth = depth;
    report.q_over_p = cons.params().q() / cons.params().p();

    for (int level = 1; level <= depth; ++level) {
        auto w = detail::check_constant_weights(level, cons, report.c1_mismatches);
        if (w && !report.c1_witness) report.c1_witness = w;
    }
    report.c1 = report.c1_mismatches == 0;

    report.measure = diagnostics(depth, cons, options);
    report.c2 = report.measure.total_mass == Rat(1) && report.measure.violations == 0;

    report.sweep = max_adjacent_ratio(depth, cons, options);
    return report;
}

} // namespace fatgraph
