#pragma once

#include "fatgraph/error.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/schedule.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fatgraph {

enum class Half : std::uint8_t { Root, Lower, Upper };

constexpr std::string_view to_string(Half h) noexcept {
    switch (h) {
    case Half::Root: return "Root";
    case Half::Lower: return "Lower";
    case Half::Upper: return "Upper";
    }
    return "?";
}

enum class WeightValue : std::uint8_t { One, P, Q };

constexpr char letter(WeightValue w) noexcept {
    switch (w) {
    case WeightValue::One: return '1';
    case WeightValue::P: return 'p';
    case WeightValue::Q: return 'q';
    }
    return '?';
}

inline Rat value_of(WeightValue w, const Params& params) {
    switch (w) {
    case WeightValue::P: return params.p();
    case WeightValue::Q: return params.q();
    case WeightValue::One: break;
    }
    return Rat(1);
}

/// A construction rectangle. The lineage of halves is part of the identity:
/// bit s-1 of `path` is set when the stage-s ancestor is an upper half.
struct CRect {
    int level = 0;
    std::uint64_t column = 0;
    std::uint64_t path = 0;
    RectQ bounds{Rat(0), Rat(1), Rat(0), Rat(1)};

    Half half() const {
        if (level == 0) return Half::Root;
        return ((path >> (level - 1)) & 1u) ? Half::Upper : Half::Lower;
    }

    friend bool operator==(const CRect&, const CRect&) = default;
};

/// A vertical extent. lo == hi denotes a single point, classified with the
/// half-open convention (closed at 1).
struct Span {
    Rat lo;
    Rat hi;

    bool is_point() const { return lo == hi; }
};

inline Span row_span(const Cell& c) {
    BigInt side = pow4(c.level);
    BigInt row(static_cast<unsigned long>(c.row));
    return Span{Rat(row, side), Rat(row + 1, side)};
}

/// How step i acts on a horizontal line: no redistribution, or inside the
/// band of an upper / lower half.
enum class StepClass : std::uint8_t { Flat, UpperBand, LowerBand };

inline WeightValue weight_for(StepClass cls, bool in_a) {
    switch (cls) {
    case StepClass::UpperBand: return in_a ? WeightValue::Q : WeightValue::P;
    case StepClass::LowerBand: return in_a ? WeightValue::P : WeightValue::Q;
    case StepClass::Flat: break;
    }
    return WeightValue::One;
}

/// Vertical classification of a span against the rectangle hierarchy.
struct YClass {
    /// Deepest rectangle level entered (0 = unit square).
    int rect_level = 0;
    std::uint64_t path = 0;
    /// Level of the left-over part containing the span, 0 if none.
    int leftover_level = 0;
    /// steps[i-1] describes step i.
    std::vector<StepClass> steps;
};

/// Replaces w_i on one level-i cell; used to check that the verifiers
/// actually detect broken constructions.
struct Fault {
    Cell cell;
    WeightValue value = WeightValue::One;
};

/// Immutable construction: parameters plus the precomputed margins and band
/// insets of every stage.
class Construction {
public:
    explicit Construction(Params params, std::optional<Fault> fault = std::nullopt)
        : params_(std::move(params)), fault_(std::move(fault)) {
        for (int s = 1; s <= params_.stage_count(); ++s) {
            Step a = params_.last_uniform(s);
            margins_.push_back(inv_pow4(a));
            std::vector<Rat> insets;
            Rat sum(0);
            for (int t = 1; t <= params_.stage(s).n; ++t) {
                insets.push_back(sum);
                sum += inv_pow4(a + t);
            }
            insets_.push_back(std::move(insets));
        }
        if (fault_) {
            const Cell& c = fault_->cell;
            if (c.level < 1) fail(Errc::ContractViolation, "a fault needs a cell of level >= 1");
            make_cell(c.level, c.col, c.row);
        }
    }

    const Params& params() const { return params_; }
    const std::optional<Fault>& fault() const { return fault_; }

    /// Distance 4^{-(M_{s-1}+m_s)} between a level-(s-1) rectangle's edges
    /// (and its midline) and the level-s rectangles inside it.
    const Rat& margin(int s) const { return margins_.at(static_cast<std::size_t>(s - 1)); }

    /// Band inset sum_{j=a+1}^{a+t-1} 4^{-j} for non-uniform step a+t of stage s.
    const Rat& band_inset(int s, int t) const {
        return insets_.at(static_cast<std::size_t>(s - 1)).at(static_cast<std::size_t>(t - 1));
    }

    /// Vertical extent [b, t] of the level-k rectangles with the given lineage.
    Span rect_span(int k, std::uint64_t path) const {
        if (k < 0 || k > params_.stage_count()) fail(Errc::DepthExceeded, "rectangle level beyond configured stages");
        Rat b(0);
        for (int s = 1; s <= k; ++s) {
            b += margin(s);
            if ((path >> (s - 1)) & 1u) b += params_.height(s - 1) / Rat(2);
        }
        return Span{b, b + params_.height(k)};
    }

    /// Classifies a span for steps 1..depth and descends at least
    /// `rect_levels` levels of rectangles.
    YClass classify_y(const Span& span, Step depth, int rect_levels = 0) const {
        if (span.lo < Rat(0) || span.hi > Rat(1) || span.hi < span.lo) {
            fail(Errc::OutOfRange, "vertical span outside [0,1]");
        }
        if (rect_levels > params_.stage_count()) {
            fail(Errc::DepthExceeded, "rectangle level " + std::to_string(rect_levels) +
                                          " beyond the configured stages");
        }
        YClass out;
        out.steps.assign(static_cast<std::size_t>(std::max<Step>(depth, 0)), StepClass::Flat);

        Rat b(0);
        Rat h(1);
        for (int s = 1; s <= params_.stage_count(); ++s) {
            Step a = params_.last_uniform(s);
            bool need_steps = depth > a;
            bool need_children = depth > params_.M(s) || s <= rect_levels;
            if (!need_steps && !need_children) return out;

            Rat top = b + h;
            Rat mid = b + h / Rat(2);
            if (need_steps) {
                bool upper;
                if (relation(span, mid, top) == Rel::Inside) {
                    upper = true;
                } else if (relation(span, b, mid) == Rel::Inside) {
                    upper = false;
                } else {
                    fail(Errc::Unaligned, "span straddles the midline of a stage-" + std::to_string(s) + " rectangle");
                }
                int n = params_.stage(s).n;
                for (int t = 1; t <= n && a + t <= depth; ++t) {
                    const Rat& inset = band_inset(s, t);
                    Rel rel = upper ? relation(span, mid + inset, top - inset)
                                    : relation(span, b + inset, mid - inset);
                    if (rel == Rel::Straddle) {
                        fail(Errc::Unaligned, "span straddles the edge of band B_" + std::to_string(a + t));
                    }
                    if (rel == Rel::Inside) {
                        out.steps[static_cast<std::size_t>(a + t - 1)] =
                            upper ? StepClass::UpperBand : StepClass::LowerBand;
                    }
                }
            }
            if (!need_children) return out;

            const Rat& d = margin(s);
            Rel in_upper = relation(span, mid + d, top - d);
            Rel in_lower = relation(span, b + d, mid - d);
            if (in_upper == Rel::Inside) {
                b = mid + d;
                out.path |= std::uint64_t{1} << (s - 1);
            } else if (in_lower == Rel::Inside) {
                b = b + d;
            } else if (in_upper == Rel::Outside && in_lower == Rel::Outside) {
                out.leftover_level = s;
                return out;
            } else {
                fail(Errc::Straddle, "span overlaps both a level-" + std::to_string(s) +
                                         " rectangle and the left-over part");
            }
            h = params_.height(s);
            out.rect_level = s;
        }
        if (depth > params_.total_steps()) {
            fail(Errc::DepthExceeded, "step " + std::to_string(depth) +
                                          " lies beyond the configured stages inside a construction rectangle");
        }
        return out;
    }

    /// Fault override for step i at the given cell, if any.
    std::optional<WeightValue> fault_at(Step i, const Cell& cell) const {
        if (!fault_ || fault_->cell.level != i || cell.level < i) return std::nullopt;
        if (ancestor(cell, static_cast<int>(i)) == fault_->cell) return fault_->value;
        return std::nullopt;
    }

private:
    enum class Rel { Inside, Outside, Straddle };

    static Rel relation(const Span& span, const Rat& a, const Rat& b) {
        if (span.is_point()) {
            const Rat& y = span.lo;
            bool inside = (a <= y && y < b) || (y == b && b == Rat(1));
            return inside ? Rel::Inside : Rel::Outside;
        }
        if (a <= span.lo && span.hi <= b) return Rel::Inside;
        if (span.hi <= a || span.lo >= b) return Rel::Outside;
        return Rel::Straddle;
    }

    Params params_;
    std::optional<Fault> fault_;
    std::vector<Rat> margins_;
    std::vector<std::vector<Rat>> insets_;
};

inline CRect root_rect() { return CRect{}; }

inline CRect make_crect(const Construction& cons, int k, std::uint64_t column, std::uint64_t path) {
    const Params& params = cons.params();
    if (k > params.stage_count()) fail(Errc::DepthExceeded, "rectangle level beyond configured stages");
    Step width_level = params.M(k);
    if (width_level > kMaxCellLevel) fail(Errc::OutOfRange, "rectangle columns at this level exceed 64-bit indices");
    if (column >= cells_per_side(static_cast<int>(width_level))) fail(Errc::OutOfRange, "rectangle column out of range");
    Span ys = cons.rect_span(k, path);
    BigInt side = pow4(width_level);
    BigInt col(static_cast<unsigned long>(column));
    std::uint64_t mask = k == 0 ? 0 : (k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1);
    return CRect{k, column, path & mask, RectQ{Rat(col, side), Rat(col + 1, side), ys.lo, ys.hi}};
}

/// The 2 * 4^{m+n} rectangles of the next level inside `parent`: lower ones
/// first, each group by increasing column.
inline std::vector<CRect> crect_children(const CRect& parent, const Construction& cons) {
    const Params& params = cons.params();
    int k = parent.level;
    if (k + 1 > params.stage_count()) fail(Errc::DepthExceeded, "no stage configured below this rectangle");
    Step width_level = params.M(k + 1);
    if (width_level > kMaxCellLevel) fail(Errc::OutOfRange, "rectangle columns at this level exceed 64-bit indices");
    std::uint64_t per_parent = std::uint64_t{1} << (2 * (width_level - params.M(k)));

    std::vector<CRect> out;
    out.reserve(2 * per_parent);
    for (std::uint64_t upper = 0; upper < 2; ++upper) {
        std::uint64_t path = parent.path | (upper << k);
        for (std::uint64_t j = 0; j < per_parent; ++j) {
            out.push_back(make_crect(cons, k + 1, parent.column * per_parent + j, path));
        }
    }
    return out;
}

/// Bottom strip, middle strip (twice the margin) and top strip of a parent
/// rectangle not covered by its children.
inline std::array<RectQ, 3> leftover_strips(const CRect& parent, const Construction& cons) {
    if (parent.level + 1 > cons.params().stage_count()) fail(Errc::DepthExceeded, "no stage configured below this rectangle");
    const RectQ& r = parent.bounds;
    const Rat& d = cons.margin(parent.level + 1);
    Rat mid = (r.b + r.t) / Rat(2);
    return {RectQ{r.l, r.r, r.b, r.b + d}, RectQ{r.l, r.r, mid - d, mid + d}, RectQ{r.l, r.r, r.t - d, r.t}};
}

struct RegionClass {
    enum class Kind { InRect, LeftOver };

    Kind kind = Kind::InRect;
    /// Rectangle level for InRect, creation level of the left-over part otherwise.
    int level = 0;
    std::uint64_t path = 0;
    /// Level-`level` rectangle columns met by the cell (only when they fit in 64 bits).
    std::uint64_t first_column = 0;
    std::uint64_t column_count = 0;
    /// The cell is inside every band B_i of the steps it has seen so far.
    bool in_all_bands = true;
    Span rect_extent;

    std::optional<CRect> rect(const Construction& cons) const {
        if (kind != Kind::InRect || column_count != 1) return std::nullopt;
        return make_crect(cons, level, first_column, path);
    }
};

/// Classifies a cell against the rectangles of level k. The cell must be at
/// least as fine as the level-k rectangle boundaries; coarser cells that
/// overlap two classes raise Straddle.
inline RegionClass locate(const Cell& cell, int k, const Construction& cons) {
    const Params& params = cons.params();
    if (k < 0 || k > params.stage_count()) fail(Errc::DepthExceeded, "rectangle level beyond configured stages");
    make_cell(cell.level, cell.col, cell.row);

    Step depth = std::min<Step>(cell.level, params.total_steps());
    YClass y = cons.classify_y(row_span(cell), depth, k);

    RegionClass out;
    int reached = k;
    if (y.leftover_level != 0 && y.leftover_level <= k) {
        out.kind = RegionClass::Kind::LeftOver;
        out.level = y.leftover_level;
        reached = y.leftover_level - 1;
    } else {
        out.kind = RegionClass::Kind::InRect;
        out.level = k;
    }
    out.path = reached >= 64 ? y.path : (y.path & ((std::uint64_t{1} << reached) - 1));
    out.rect_extent = cons.rect_span(reached, out.path);

    int col_level = out.kind == RegionClass::Kind::InRect ? k : reached;
    Step width_level = params.M(col_level);
    if (width_level <= kMaxCellLevel) {
        if (cell.level >= width_level) {
            out.first_column = cell.col >> (2 * (cell.level - width_level));
            out.column_count = 1;
        } else {
            int extra = static_cast<int>(width_level - cell.level);
            out.first_column = cell.col << (2 * extra);
            out.column_count = std::uint64_t{1} << (2 * extra);
        }
    }

    // Bands of every stage whose rectangles hold the cell.
    int last_stage = std::min(y.leftover_level == 0 ? y.rect_level + 1 : y.leftover_level, params.stage_count());
    for (int s = 1; s <= last_stage; ++s) {
        for (int t = 1; t <= params.stage(s).n; ++t) {
            Step i = params.last_uniform(s) + t;
            if (i > depth) break;
            if (y.steps[static_cast<std::size_t>(i - 1)] == StepClass::Flat) out.in_all_bands = false;
        }
    }
    return out;
}

/// w_i on the interior of a cell; the cell must be at least as fine as
/// step i.
inline WeightValue weight(Step i, const Cell& cell, const Construction& cons) {
    if (i < 1 || i > cell.level) {
        fail(Errc::ContractViolation, "weight w_" + std::to_string(i) + " is not constant on a level-" +
                                          std::to_string(cell.level) + " cell");
    }
    make_cell(cell.level, cell.col, cell.row);
    if (auto forced = cons.fault_at(i, cell)) return *forced;

    YClass y = cons.classify_y(row_span(cell), i);
    std::uint64_t col_i = cell.col >> (2 * (cell.level - i));
    return weight_for(y.steps[static_cast<std::size_t>(i - 1)], a_membership(static_cast<int>(i), col_i));
}

/// (w_1, ..., w_L) on a level-L cell.
inline std::vector<WeightValue> weight_word(const Cell& cell, const Construction& cons) {
    make_cell(cell.level, cell.col, cell.row);
    YClass y = cons.classify_y(row_span(cell), cell.level);
    std::vector<WeightValue> out;
    out.reserve(static_cast<std::size_t>(cell.level));
    for (int i = 1; i <= cell.level; ++i) {
        if (auto forced = cons.fault_at(i, cell)) {
            out.push_back(*forced);
            continue;
        }
        bool in_a = a_membership(i, cell.col >> (2 * (cell.level - i)));
        out.push_back(weight_for(y.steps[static_cast<std::size_t>(i - 1)], in_a));
    }
    return out;
}

inline std::string word_string(const std::vector<WeightValue>& word) {
    std::string out;
    for (WeightValue w : word) out.push_back(letter(w));
    return out;
}

/// w_i at a point, half-open convention. Independent of any cell level.
inline WeightValue weight_at(Step i, const Rat& x, const Rat& y, const Construction& cons) {
    if (i < 1) fail(Errc::ContractViolation, "steps start at 1");
    if (x < Rat(0) || x > Rat(1)) fail(Errc::OutOfRange, "x outside [0,1]");
    if (cons.fault() && i <= kMaxCellLevel) {
        if (auto forced = cons.fault_at(i, cell_containing(x, y, static_cast<int>(i)))) return *forced;
    }
    YClass cls = cons.classify_y(Span{y, y}, i);
    unsigned d = point_digit(x, static_cast<int>(i));
    return weight_for(cls.steps[static_cast<std::size_t>(i - 1)], d == 1 || d == 2);
}

} // namespace fatgraph
