#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/parallel.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/words.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace fatgraph {

/// Density of mu on a cell: p^{p_count} q^{q_count}.
struct DensityValue {
    Rat value;
    int p_count = 0;
    int q_count = 0;
};

inline DensityValue density(const Cell& cell, const Construction& cons) {
    DensityValue out{Rat(1), 0, 0};
    for (WeightValue w : weight_word(cell, cons)) {
        if (w == WeightValue::P) ++out.p_count;
        if (w == WeightValue::Q) ++out.q_count;
    }
    const Params& params = cons.params();
    out.value = pow(params.p(), out.p_count) * pow(params.q(), out.q_count);
    return out;
}

/// mu(cell) = density * 16^{-level}; refinement-stable, so this is also the
/// mass under the limit measure.
inline Rat mu_cell(const Cell& cell, const Construction& cons) {
    return density(cell, cons).value * Rat(BigInt(1), pow4(2 * cell.level));
}

/// A piece of a vertical span on which steps 1..depth act uniformly.
struct YSegment {
    Span span;
    YClass cls;
};

namespace detail {

inline void collect_breaks(const Construction& cons, int s, const Rat& b, const Rat& h, Step depth,
                           const Span& ys, std::vector<Rat>& out) {
    const Params& params = cons.params();
    if (s > params.stage_count()) return;
    Step a = params.last_uniform(s);
    if (depth <= a) return;
    Rat top = b + h;
    if (!(ys.hi > b && ys.lo < top)) return;

    Rat mid = b + h / Rat(2);
    out.push_back(mid);
    for (int t = 1; t <= params.stage(s).n && a + t <= depth; ++t) {
        const Rat& inset = cons.band_inset(s, t);
        out.push_back(b + inset);
        out.push_back(mid - inset);
        out.push_back(mid + inset);
        out.push_back(top - inset);
    }
    if (depth <= params.M(s)) return;
    const Rat& d = cons.margin(s);
    for (const Rat& child_b : {b + d, mid + d}) {
        out.push_back(child_b);
        out.push_back(child_b + params.height(s));
        collect_breaks(cons, s + 1, child_b, params.height(s), depth, ys, out);
    }
}

} // namespace detail

/// Cuts [lo, hi] at every horizontal line where one of steps 1..depth
/// changes, and classifies the pieces.
inline std::vector<YSegment> y_segments(const Construction& cons, const Span& ys, Step depth) {
    if (!(ys.lo < ys.hi)) fail(Errc::ContractViolation, "y_segments needs a span of positive length");
    std::vector<Rat> breaks{ys.lo, ys.hi};
    detail::collect_breaks(cons, 1, Rat(0), Rat(1), depth, ys, breaks);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<YSegment> out;
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
        if (breaks[j] < ys.lo || breaks[j + 1] > ys.hi) continue;
        Span piece{breaks[j], breaks[j + 1]};
        out.push_back(YSegment{piece, cons.classify_y(piece, depth)});
    }
    return out;
}

/// Column blocks of one 4-adic level: indices [first, last) at `level`.
struct XBlockRange {
    int level = 0;
    std::uint64_t first = 0;
    std::uint64_t last = 0;
};

struct XDecomposition {
    std::vector<XBlockRange> inner;
    /// Cells at the cap level that meet [x0,x1] but are not inside it.
    std::vector<XBlockRange> boundary;
};

/// Maximal 4-adic intervals inside [x0, x1] down to level `cap`.
inline XDecomposition decompose_x(const Rat& x0, const Rat& x1, int cap) {
    XDecomposition out;
    bool have_prev = false;
    std::uint64_t prev_lo = 0, prev_hi = 0;
    for (int level = 0; level <= cap; ++level) {
        Rat scale(pow4(level));
        Rat lo_r = x0 * scale;
        BigInt lo_z = lo_r.floor();
        if (!lo_r.is_integer()) lo_z += 1;
        std::uint64_t lo = lo_z.get_ui();
        std::uint64_t hi = (x1 * scale).floor().get_ui();
        if (lo >= hi) continue;
        if (!have_prev) {
            out.inner.push_back({level, lo, hi});
        } else {
            if (lo < 4 * prev_lo) out.inner.push_back({level, lo, 4 * prev_lo});
            if (4 * prev_hi < hi) out.inner.push_back({level, 4 * prev_hi, hi});
        }
        have_prev = true;
        prev_lo = lo;
        prev_hi = hi;
    }
    Rat scale(pow4(cap));
    std::uint64_t outer_lo = (x0 * scale).floor().get_ui();
    Rat hi_r = x1 * scale;
    BigInt hi_z = hi_r.floor();
    if (!hi_r.is_integer()) hi_z += 1;
    std::uint64_t outer_hi = hi_z.get_ui();
    if (!have_prev) {
        if (outer_lo < outer_hi) out.boundary.push_back({cap, outer_lo, outer_hi});
    } else {
        if (outer_lo < prev_lo) out.boundary.push_back({cap, outer_lo, prev_lo});
        if (prev_hi < outer_hi) out.boundary.push_back({cap, prev_hi, outer_hi});
    }
    return out;
}

/// Exact lower/upper bounds on a mass; equal when the query was exact.
struct MassEnclosure {
    Rat lower;
    Rat upper;

    bool exact() const { return lower == upper; }
    Rat width() const { return upper - lower; }
};

struct MuRectOptions {
    /// Finest column level used; defaults to min(M_K, 31).
    std::optional<int> level_cap;
    /// Largest acceptable enclosure width; unset accepts any.
    std::optional<Rat> tolerance;
};

namespace detail {

/// Mass of (column block at `level`, index `col`) x Y, given the pieces of Y
/// classified to depth `level`.
inline Rat block_mass(std::uint64_t col, int level, const std::vector<YSegment>& segments, MonomialCache& mono) {
    std::uint64_t amask = column_a_mask(col, level);
    Rat sum(0);
    for (const YSegment& seg : segments) {
        int np = 0, nq = 0;
        for (int i = 1; i <= level; ++i) {
            bool in_a = (amask >> (i - 1)) & 1u;
            switch (weight_for(seg.cls.steps[static_cast<std::size_t>(i - 1)], in_a)) {
            case WeightValue::P: ++np; break;
            case WeightValue::Q: ++nq; break;
            case WeightValue::One: break;
            }
        }
        sum += (seg.span.hi - seg.span.lo) * mono(np, nq);
    }
    return sum * inv_pow4(level);
}

inline Rat ranges_mass(const Construction& cons, const std::vector<XBlockRange>& ranges, const Span& ys,
                       MonomialCache& mono) {
    std::map<int, std::vector<YSegment>> by_level;
    Rat total(0);
    for (const XBlockRange& range : ranges) {
        auto it = by_level.find(range.level);
        if (it == by_level.end()) it = by_level.emplace(range.level, y_segments(cons, ys, range.level)).first;
        // Blocks sharing an A-mask have equal mass; group by mask.
        std::map<std::uint64_t, std::uint64_t> multiplicity;
        for (std::uint64_t c = range.first; c < range.last; ++c) ++multiplicity[column_a_mask(c, range.level)];
        for (const auto& [mask, count] : multiplicity) {
            std::uint64_t representative = range.first;
            while (column_a_mask(representative, range.level) != mask) ++representative;
            total += Rat(BigInt(static_cast<unsigned long>(count))) *
                     block_mass(representative, range.level, it->second, mono);
        }
    }
    return total;
}

} // namespace detail

/// mu([l,r] x [b,t]). Exact when l and r are 4-adic at a level <= the cap;
/// otherwise an enclosure from inner and outer column approximations. The
/// vertical direction is always integrated exactly.
inline MassEnclosure mu_rect(const RectQ& rect, const Construction& cons, const MuRectOptions& options = {}) {
    if (cons.fault()) fail(Errc::ContractViolation, "mu_rect does not model injected faults");
    if (!(Rat(0) <= rect.l && rect.l < rect.r && rect.r <= Rat(1) && Rat(0) <= rect.b && rect.b < rect.t &&
          rect.t <= Rat(1))) {
        fail(Errc::ContractViolation, "rectangle must satisfy 0 <= l < r <= 1 and 0 <= b < t <= 1");
    }
    const Params& params = cons.params();
    int cap = options.level_cap.value_or(
        static_cast<int>(std::min<Step>(params.total_steps(), kMaxCellLevel)));
    if (cap < 0 || cap > kMaxCellLevel) fail(Errc::OutOfRange, "level cap outside [0, 31]");

    MonomialCache mono(params);
    Span ys{rect.b, rect.t};
    XDecomposition parts = decompose_x(rect.l, rect.r, cap);
    Rat inner = detail::ranges_mass(cons, parts.inner, ys, mono);
    Rat outer = inner + detail::ranges_mass(cons, parts.boundary, ys, mono);
    MassEnclosure out{inner, outer};
    if (options.tolerance && out.width() > *options.tolerance) {
        fail(Errc::CapTooCoarse, "enclosure width " + out.width().str() + " exceeds tolerance " +
                                     options.tolerance->str() + " at level cap " + std::to_string(cap));
    }
    return out;
}

inline Rat mu_rect_exact(const RectQ& rect, const Construction& cons, std::optional<int> level_cap = std::nullopt) {
    return mu_rect(rect, cons, MuRectOptions{level_cap, Rat(0)}).lower;
}

struct MeasureReport {
    int depth = 0;
    Rat total_mass;
    std::uint64_t violations = 0;
    Rat max_child_sum_error;
    /// First parent (by level, then row, then column) whose children do not
    /// add up to it.
    std::optional<Cell> witness;
    std::uint64_t parents_checked = 0;
};

namespace detail {

using Histogram = std::vector<std::uint64_t>; // index p_count * 64 + q_count

inline Rat histogram_mass(const Histogram& hist, int level, MonomialCache& mono) {
    Rat sum(0);
    for (int a = 0; a < 64; ++a) {
        for (int b = 0; b < 64; ++b) {
            std::uint64_t n = hist[static_cast<std::size_t>(a * 64 + b)];
            if (n != 0) sum += Rat(BigInt(static_cast<unsigned long>(n))) * mono(a, b);
        }
    }
    return sum * Rat(BigInt(1), pow4(2 * level));
}

struct ConservationChunk {
    std::uint64_t violations = 0;
    std::uint64_t parents = 0;
    std::optional<Cell> witness;
    // signature -> |parent - sum of children| (0 when conserved)
    std::map<std::array<std::uint16_t, 17>, Rat> verdicts;
};

} // namespace detail

/// Exhaustive check at depth L: total mass, and every parent of level < L
/// against the sum of its 16 children.
inline MeasureReport diagnostics(int depth, const Construction& cons, const SweepOptions& options = {}) {
    check_sweep_size(depth, options);
    const Params& params = cons.params();

    std::vector<LevelTable> tables;
    tables.reserve(static_cast<std::size_t>(depth) + 1);
    for (int level = 0; level <= depth; ++level) tables.emplace_back(cons, level);

    MeasureReport report;
    report.depth = depth;

    // Total mass at depth L.
    {
        const LevelTable& table = tables.back();
        auto parts = run_chunks(table.side(), options.workers, [&](std::uint64_t r0, std::uint64_t r1) {
            detail::Histogram hist(64 * 64, 0);
            for (std::uint64_t r = r0; r < r1; ++r) {
                for (std::uint64_t c = 0; c < table.side(); ++c) {
                    WeightWord w = table.word(c, r);
                    ++hist[static_cast<std::size_t>(w.p_count() * 64 + w.q_count())];
                }
            }
            return hist;
        });
        detail::Histogram total(64 * 64, 0);
        for (const auto& h : parts) {
            for (std::size_t j = 0; j < total.size(); ++j) total[j] += h[j];
        }
        MonomialCache mono(params);
        report.total_mass = detail::histogram_mass(total, depth, mono);
    }

    // Conservation between consecutive levels.
    report.max_child_sum_error = Rat(0);
    for (int level = 0; level < depth; ++level) {
        const LevelTable& parent = tables[static_cast<std::size_t>(level)];
        const LevelTable& child = tables[static_cast<std::size_t>(level) + 1];
        Rat parent_area(BigInt(1), pow4(2 * level));
        Rat child_area(BigInt(1), pow4(2 * (level + 1)));

        auto parts = run_chunks(parent.side(), options.workers, [&](std::uint64_t r0, std::uint64_t r1) {
            detail::ConservationChunk chunk;
            MonomialCache mono(params);
            for (std::uint64_t r = r0; r < r1; ++r) {
                for (std::uint64_t c = 0; c < parent.side(); ++c) {
                    WeightWord pw = parent.word(c, r);
                    std::array<std::uint16_t, 17> sig{};
                    sig[0] = static_cast<std::uint16_t>(pw.p_count() * 64 + pw.q_count());
                    for (std::uint64_t dy = 0; dy < 4; ++dy) {
                        for (std::uint64_t dx = 0; dx < 4; ++dx) {
                            WeightWord cw = child.word(4 * c + dx, 4 * r + dy);
                            sig[1 + dy * 4 + dx] = static_cast<std::uint16_t>(cw.p_count() * 64 + cw.q_count());
                        }
                    }
                    std::sort(sig.begin() + 1, sig.end());
                    auto it = chunk.verdicts.find(sig);
                    if (it == chunk.verdicts.end()) {
                        Rat sum(0);
                        for (std::size_t j = 1; j < sig.size(); ++j) sum += mono(sig[j] / 64, sig[j] % 64);
                        Rat err = abs(mono(sig[0] / 64, sig[0] % 64) * parent_area - sum * child_area);
                        it = chunk.verdicts.emplace(sig, std::move(err)).first;
                    }
                    ++chunk.parents;
                    if (it->second.sign() != 0) {
                        ++chunk.violations;
                        if (!chunk.witness) chunk.witness = Cell{level, c, r};
                    }
                }
            }
            return chunk;
        });
        for (const auto& chunk : parts) {
            report.parents_checked += chunk.parents;
            report.violations += chunk.violations;
            if (!report.witness && chunk.witness) report.witness = chunk.witness;
            for (const auto& [sig, err] : chunk.verdicts) {
                if (err > report.max_child_sum_error) report.max_child_sum_error = err;
            }
        }
    }
    return report;
}

} // namespace fatgraph
