#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/measure.hpp"
#include "fatgraph/parallel.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/words.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fatgraph {

/// Which half a stage must have picked for a column to be counted.
enum class Pick : std::uint8_t { Lower, Upper, Any };

struct ChosenHalf {
    Half half = Half::Lower;
    /// Non-uniform steps of the stage whose column digit lies in A_i; each
    /// gives weight q in the upper half.
    int q_count_upper = 0;
};

namespace detail {

/// Digits-in-A count over the non-uniform steps of stage s, read off a
/// column index at level `level` (level >= M_s).
inline int stage_q_count(std::uint64_t column, int level, int s, const Params& params) {
    int count = 0;
    Step a = params.last_uniform(s);
    for (int t = 1; t <= params.stage(s).n; ++t) {
        unsigned d = digit_of(column, level, static_cast<int>(a + t));
        count += (d == 1 || d == 2) ? 1 : 0;
    }
    return count;
}

/// Product form of the selection: the upper half wins iff its weight
/// product q^c p^{n-c} exceeds (pq)^{n/2}, compared after squaring.
inline bool upper_by_product(int q_count, int n, const Params& params) {
    Rat upper = pow(params.q(), q_count) * pow(params.p(), n - q_count);
    return upper * upper > pow(params.p() * params.q(), n);
}

} // namespace detail

/// Picks, for a level-(k+1) column inside `parent`, the half whose
/// non-uniform weights are mostly q. The digit count decides; the product
/// form is evaluated as well and any disagreement is a contract violation.
inline ChosenHalf chosen_half(const CRect& parent, std::uint64_t column, const Construction& cons) {
    const Params& params = cons.params();
    int s = parent.level + 1;
    if (s > params.stage_count()) fail(Errc::DepthExceeded, "no stage configured below this rectangle");
    Step level = params.M(s);
    if (level > kMaxCellLevel) fail(Errc::OutOfRange, "columns at this level exceed 64-bit indices");
    if (column >= cells_per_side(static_cast<int>(level)) ||
        (column >> (2 * (level - params.M(parent.level)))) != parent.column) {
        fail(Errc::ContractViolation, "column does not lie inside the parent rectangle");
    }
    int count = detail::stage_q_count(column, static_cast<int>(level), s, params);
    int n = params.stage(s).n;
    bool upper = 2 * count > n;
    if (upper != detail::upper_by_product(count, n, params)) {
        fail(Errc::ContractViolation, "digit count and product criterion disagree");
    }
    return ChosenHalf{upper ? Half::Upper : Half::Lower, count};
}

/// Lineage of chosen halves for a level-M_k column: bit s-1 set when stage s
/// picked the upper half.
inline std::uint64_t chosen_path(std::uint64_t column, int k, const Construction& cons) {
    const Params& params = cons.params();
    if (k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    Step level = params.M(k);
    if (level > kMaxCellLevel) fail(Errc::OutOfRange, "columns at this level exceed 64-bit indices");
    std::uint64_t path = 0;
    for (int s = 1; s <= k; ++s) {
        int count = detail::stage_q_count(column, static_cast<int>(level), s, params);
        if (2 * count > params.stage(s).n) path |= std::uint64_t{1} << (s - 1);
    }
    return path;
}

/// Vertical extent over x of the chosen level-k rectangle.
struct FEnclosure {
    Rat x;
    int k = 0;
    Rat lo;
    Rat hi;
    std::uint64_t path = 0;

    Rat width() const { return hi - lo; }
    bool contains(const Rat& y) const { return lo <= y && y <= hi; }
    bool within(const FEnclosure& outer) const { return outer.lo <= lo && hi <= outer.hi; }
};

inline FEnclosure f_enclosure(const Rat& x, int k, const Construction& cons) {
    const Params& params = cons.params();
    if (k < 0 || k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    if (x < Rat(0) || x > Rat(1)) fail(Errc::OutOfRange, "x outside [0,1]");
    std::uint64_t path = 0;
    for (int s = 1; s <= k; ++s) {
        int count = 0;
        Step a = params.last_uniform(s);
        for (int t = 1; t <= params.stage(s).n; ++t) {
            unsigned d = point_digit(x, static_cast<int>(a + t));
            count += (d == 1 || d == 2) ? 1 : 0;
        }
        if (2 * count > params.stage(s).n) path |= std::uint64_t{1} << (s - 1);
    }
    Span ys = cons.rect_span(k, path);
    return FEnclosure{x, k, ys.lo, ys.hi, path};
}

/// Mass of { columns whose stage picks match `picks` } x span, by summing
/// over weight patterns rather than columns: the mass factors over stages,
/// and within a stage only the number of A-digits matters for the pick, so
/// each stage is a small dynamic program over that count.
class LineageMass {
public:
    explicit LineageMass(const Construction& cons) : cons_(cons) {}

    Rat operator()(const std::vector<Pick>& picks, const Span& span) {
        const Params& params = cons_.params();
        int k = static_cast<int>(picks.size());
        if (k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
        Step depth = params.M(k);
        if (depth == 0) return span.hi - span.lo;

        Rat total(0);
        for (const YSegment& seg : y_segments(cons_, span, depth)) {
            Rat factor(1);
            for (int s = 1; s <= k && factor.sign() != 0; ++s) {
                factor *= stage_factor(s, seg.cls, picks[static_cast<std::size_t>(s - 1)]);
            }
            total += (seg.span.hi - seg.span.lo) * factor;
        }
        return total;
    }

private:
    /// Average over the 2^n A-patterns of stage s (each pattern is half of
    /// the digit strings) of the weight product, restricted to patterns
    /// whose majority matches `pick`.
    const Rat& stage_factor(int s, const YClass& cls, Pick pick) {
        const Params& params = cons_.params();
        Step a = params.last_uniform(s);
        int n = params.stage(s).n;
        std::string key = std::to_string(s) + ':' + std::to_string(static_cast<int>(pick)) + ':';
        for (int t = 1; t <= n; ++t) key.push_back(static_cast<char>('0' + static_cast<int>(cls.steps[static_cast<std::size_t>(a + t - 1)])));
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;

        Rat half(1, 2);
        std::vector<Rat> dp(static_cast<std::size_t>(n) + 1, Rat(0));
        dp[0] = Rat(1);
        for (int t = 1; t <= n; ++t) {
            StepClass c = cls.steps[static_cast<std::size_t>(a + t - 1)];
            Rat in_a = value_of(weight_for(c, true), params) * half;
            Rat out_a = value_of(weight_for(c, false), params) * half;
            for (int j = t; j >= 0; --j) {
                Rat next = dp[static_cast<std::size_t>(j)] * out_a;
                if (j > 0) next += dp[static_cast<std::size_t>(j - 1)] * in_a;
                dp[static_cast<std::size_t>(j)] = std::move(next);
            }
        }
        Rat sum(0);
        for (int j = 0; j <= n; ++j) {
            bool upper = 2 * j > n;
            if (pick == Pick::Any || (pick == Pick::Upper) == upper) sum += dp[static_cast<std::size_t>(j)];
        }
        return memo_.emplace(std::move(key), std::move(sum)).first->second;
    }

    const Construction& cons_;
    std::map<std::string, Rat> memo_;
};

inline std::vector<Pick> picks_of_path(std::uint64_t path, int k) {
    std::vector<Pick> out;
    for (int s = 1; s <= k; ++s) out.push_back(((path >> (s - 1)) & 1u) ? Pick::Upper : Pick::Lower);
    return out;
}

/// Paths are enumerated explicitly, so k is bounded well below 64.
inline constexpr int kMaxPathLevels = 20;

/// mu(S_k): total mass of the chosen level-k rectangles.
inline Rat mu_S(int k, const Construction& cons) {
    const Params& params = cons.params();
    if (k < 0 || k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    if (k > kMaxPathLevels) fail(Errc::SweepTooLarge, "too many rectangle lineages to enumerate");
    LineageMass mass(cons);
    Rat total(0);
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << k); ++path) {
        total += mass(picks_of_path(path, k), cons.rect_span(k, path));
    }
    return total;
}

/// Average over one stage's A-patterns of the larger of the two half
/// products; mu(S_k) = h_k * prod_s retention_factor(s).
inline Rat retention_factor(int s, const Params& params) {
    int n = params.stage(s).n;
    Rat sum(0);
    for (int c = 0; c <= n; ++c) {
        int hi = std::max(c, n - c);
        sum += Rat(binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(c))) * pow(params.q(), hi) *
               pow(params.p(), n - hi);
    }
    return sum / pow(Rat(2), n);
}

inline Rat mu_S_closed_form(int k, const Params& params) {
    if (k < 0 || k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    Rat out = params.height(k);
    for (int s = 1; s <= k; ++s) out *= retention_factor(s, params);
    return out;
}

/// mu(S_k) by visiting every level-M_k cell and testing membership.
inline Rat mu_S_by_cells(int k, const Construction& cons, const SweepOptions& options = {}) {
    const Params& params = cons.params();
    if (k < 0 || k > params.stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    if (params.M(k) > kMaxCellLevel) fail(Errc::SweepTooLarge, "level beyond 64-bit cell indices");
    int level = static_cast<int>(params.M(k));
    check_sweep_size(level, options);

    LevelTable table(cons, level);
    std::uint64_t side = table.side();
    std::vector<std::uint64_t> col_path(side);
    for (std::uint64_t c = 0; c < side; ++c) col_path[c] = chosen_path(c, k, cons);

    auto parts = run_chunks(side, options.workers, [&](std::uint64_t r0, std::uint64_t r1) {
        detail::Histogram hist(64 * 64, 0);
        for (std::uint64_t r = r0; r < r1; ++r) {
            YClass y = cons.classify_y(row_span(Cell{level, 0, r}), level, k);
            if (y.leftover_level != 0 && y.leftover_level <= k) continue;
            for (std::uint64_t c = 0; c < side; ++c) {
                if (col_path[c] != y.path) continue;
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
    return detail::histogram_mass(total, level, mono);
}

struct StageBound {
    int stage = 0;
    Rat tail_term;
    Rat tail_exact;
    Rat leftover_term;
    /// mu of the whole level-k left-over part (full-width strips).
    Rat leftover_exact;
    /// Part of the level-k left-over lying in S_{k-1}.
    Rat leftover_in_graph;
    Rat retention;

    bool tail_ok() const { return tail_exact <= tail_term; }
    bool leftover_ok() const { return leftover_exact <= leftover_term; }
};

struct BoundsLedger {
    std::vector<StageBound> stages;
    Rat pq;
    bool pq_identity = false;
    bool pq_below_one = false;
    /// 1 - sum tail_term - sum leftover_term.
    Rat total;

    bool ok() const {
        bool all = pq_identity && pq_below_one;
        for (const auto& s : stages) all = all && s.tail_ok() && s.leftover_ok();
        return all;
    }

    /// The bound truncated after stage k.
    Rat partial(int k) const {
        Rat out(1);
        for (int s = 0; s < k; ++s) out -= stages[static_cast<std::size_t>(s)].tail_term + stages[static_cast<std::size_t>(s)].leftover_term;
        return out;
    }
};

/// 2^{-n} sum_{i <= (n-1)/2} C(n,i) q^i p^{n-i}.
inline Rat tail_exact(int n, const Rat& p) {
    Rat q = Rat(2) - p;
    Rat sum(0);
    for (int i = 0; i <= (n - 1) / 2; ++i) {
        sum += Rat(binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(i))) * pow(q, i) * pow(p, n - i);
    }
    return sum / pow(Rat(2), n);
}

/// 1/2 (pq)^{(n-1)/2}.
inline Rat tail_term(int n, const Rat& p) { return pow(p * (Rat(2) - p), (n - 1) / 2) / Rat(2); }

namespace detail {

inline std::vector<RectQ> leftover_rows(int k, std::uint64_t path, const Construction& cons) {
    Span parent = cons.rect_span(k - 1, path);
    CRect full{k - 1, 0, path, RectQ{Rat(0), Rat(1), parent.lo, parent.hi}};
    auto strips = leftover_strips(full, cons);
    return {strips.begin(), strips.end()};
}

} // namespace detail

/// Mass of the level-k left-over part inside S_{k-1}.
inline Rat leftover_in_graph(int k, const Construction& cons) {
    if (k < 1 || k > cons.params().stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    if (k - 1 > kMaxPathLevels) fail(Errc::SweepTooLarge, "too many rectangle lineages to enumerate");
    LineageMass mass(cons);
    Rat total(0);
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << (k - 1)); ++path) {
        for (const RectQ& strip : detail::leftover_rows(k, path, cons)) {
            total += mass(picks_of_path(path, k - 1), Span{strip.b, strip.t});
        }
    }
    return total;
}

/// Mass of the level-k left-over part: every level-(k-1) rectangle leaves
/// three strips, and all columns share the same vertical layout, so the
/// part is a union of full-width strips.
inline Rat leftover_mass(int k, const Construction& cons) {
    if (k < 1 || k > cons.params().stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    if (k - 1 > kMaxPathLevels) fail(Errc::SweepTooLarge, "too many rectangle lineages to enumerate");
    Rat total(0);
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << (k - 1)); ++path) {
        for (const RectQ& strip : detail::leftover_rows(k, path, cons)) total += mu_rect_exact(strip, cons);
    }
    return total;
}

inline BoundsLedger bounds(const Construction& cons) {
    const Params& params = cons.params();
    BoundsLedger out;
    out.pq = params.p() * params.q();
    Rat one_minus_p = Rat(1) - params.p();
    out.pq_identity = out.pq == Rat(1) - one_minus_p * one_minus_p;
    out.pq_below_one = out.pq < Rat(1);
    out.total = Rat(1);
    for (int s = 1; s <= params.stage_count(); ++s) {
        StageBound b;
        b.stage = s;
        b.tail_term = tail_term(params.stage(s).n, params.p());
        b.tail_exact = tail_exact(params.stage(s).n, params.p());
        b.leftover_term = inv_pow4(params.stage(s).m - 1);
        b.leftover_exact = leftover_mass(s, cons);
        b.leftover_in_graph = leftover_in_graph(s, cons);
        b.retention = retention_factor(s, params);
        out.total -= b.tail_term + b.leftover_term;
        out.stages.push_back(std::move(b));
    }
    return out;
}

/// mu(S_{k-1}) - mu(S_k) split into its two sources.
struct DiscardAccounting {
    int k = 0;
    Rat before;
    Rat after;
    Rat unchosen;
    Rat leftover;

    bool balanced() const { return before - after == unchosen + leftover; }
};

inline DiscardAccounting discard_accounting(int k, const Construction& cons) {
    if (k < 1 || k > cons.params().stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    DiscardAccounting out;
    out.k = k;
    out.before = mu_S(k - 1, cons);
    out.after = mu_S(k, cons);
    out.leftover = leftover_in_graph(k, cons);

    LineageMass mass(cons);
    out.unchosen = Rat(0);
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << (k - 1)); ++path) {
        for (std::uint64_t upper = 0; upper < 2; ++upper) {
            auto picks = picks_of_path(path, k - 1);
            picks.push_back(upper ? Pick::Lower : Pick::Upper);
            out.unchosen += mass(picks, cons.rect_span(k, path | (upper << (k - 1))));
        }
    }
    return out;
}

/// Chosen rectangles of level k and their cached mass.
class Approximation {
public:
    Approximation(const Construction& cons, int k) : cons_(cons), k_(k) {
        if (k < 0 || k > cons.params().stage_count()) fail(Errc::DepthExceeded, "level beyond configured stages");
    }

    int level() const { return k_; }

    std::uint64_t path_for_column(std::uint64_t column) const { return chosen_path(column, k_, cons_); }

    CRect chosen_rect(std::uint64_t column) const { return make_crect(cons_, k_, column, path_for_column(column)); }

    /// Chosen rectangles of levels 0..k above a level-M_k column.
    std::vector<CRect> lineage(std::uint64_t column) const {
        const Params& params = cons_.params();
        std::uint64_t path = path_for_column(column);
        std::vector<CRect> out;
        for (int j = 0; j <= k_; ++j) {
            std::uint64_t col_j = column >> (2 * (params.M(k_) - params.M(j)));
            out.push_back(make_crect(cons_, j, col_j, path));
        }
        return out;
    }

    bool contains(const Rat& x, const Rat& y) const { return f_enclosure(x, k_, cons_).contains(y); }

    const Rat& mass() {
        if (!mass_) mass_ = mu_S(k_, cons_);
        return *mass_;
    }

    /// Every chosen rectangle, by increasing column.
    std::vector<CRect> rects(const SweepOptions& options = {}) const {
        Step level = cons_.params().M(k_);
        if (level > kMaxCellLevel || cells_per_side(static_cast<int>(level)) > options.exhaustive_limit) {
            fail(Errc::SweepTooLarge, "4^" + std::to_string(level) + " chosen rectangles exceed the exhaustive limit");
        }
        std::vector<CRect> out;
        for (std::uint64_t c = 0; c < cells_per_side(static_cast<int>(level)); ++c) out.push_back(chosen_rect(c));
        return out;
    }

private:
    const Construction& cons_;
    int k_;
    std::optional<Rat> mass_;
};

struct GraphSample {
    Rat x;
    Rat y_lo;
    Rat y_hi;
    Rat y_mid;
};

/// Piecewise-linear curve through sample midpoints, for plotting only.
class Interpolant {
public:
    explicit Interpolant(std::vector<std::pair<Rat, Rat>> knots) : knots_(std::move(knots)) {}

    Rat operator()(const Rat& x) const {
        if (knots_.empty()) fail(Errc::ContractViolation, "empty interpolant");
        if (x <= knots_.front().first) return knots_.front().second;
        if (x >= knots_.back().first) return knots_.back().second;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](const Rat& v, const std::pair<Rat, Rat>& k) { return v < k.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }

    const std::vector<std::pair<Rat, Rat>>& knots() const { return knots_; }

private:
    std::vector<std::pair<Rat, Rat>> knots_;
};

struct GraphSampling {
    std::vector<GraphSample> samples;
    Interpolant curve{{}};
};

/// Enclosures at x_j = (2j+1)/(2r), j < r.
inline GraphSampling sample_graph(int k, std::uint64_t resolution, const Construction& cons) {
    if (resolution < 1) fail(Errc::InvalidArgument, "resolution must be at least 1");
    GraphSampling out;
    std::vector<std::pair<Rat, Rat>> knots;
    BigInt denom = BigInt(static_cast<unsigned long>(resolution)) * 2;
    for (std::uint64_t j = 0; j < resolution; ++j) {
        Rat x(BigInt(static_cast<unsigned long>(2 * j + 1)), denom);
        FEnclosure e = f_enclosure(x, k, cons);
        Rat mid = (e.lo + e.hi) / Rat(2);
        knots.emplace_back(x, mid);
        out.samples.push_back(GraphSample{x, e.lo, e.hi, std::move(mid)});
    }
    out.curve = Interpolant(std::move(knots));
    return out;
}

} // namespace fatgraph
