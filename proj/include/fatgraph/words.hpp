#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/parallel.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace fatgraph {

/// Weight word of a cell packed as bit masks: bit i-1 of `p` (resp. `q`) is
/// set when w_i = p (resp. q). Steps with neither bit have weight 1.
struct WeightWord {
    std::uint64_t p = 0;
    std::uint64_t q = 0;

    int p_count() const { return std::popcount(p); }
    int q_count() const { return std::popcount(q); }

    friend bool operator==(const WeightWord&, const WeightWord&) = default;
};

/// Number of steps at which two words differ.
inline int divergence(const WeightWord& a, const WeightWord& b) {
    return std::popcount((a.p ^ b.p) | (a.q ^ b.q));
}

/// Row side of a weight word: which steps are inside a band and in which half.
struct RowWord {
    std::uint64_t band = 0;
    std::uint64_t upper = 0;
};

/// Column side: bit i-1 set when the step-i digit of the column lies in A_i.
inline std::uint64_t column_a_mask(std::uint64_t col, int level) {
    std::uint64_t mask = 0;
    for (int i = 1; i <= level; ++i) {
        unsigned d = digit_of(col, level, i);
        if (d == 1 || d == 2) mask |= std::uint64_t{1} << (i - 1);
    }
    return mask;
}

inline RowWord row_word(const YClass& y) {
    RowWord out;
    for (std::size_t i = 0; i < y.steps.size(); ++i) {
        if (y.steps[i] == StepClass::Flat) continue;
        out.band |= std::uint64_t{1} << i;
        if (y.steps[i] == StepClass::UpperBand) out.upper |= std::uint64_t{1} << i;
    }
    return out;
}

/// Weight words of every cell at one level, factored into one word per row
/// and one mask per column. Rows are classified with exact arithmetic once.
class LevelTable {
public:
    LevelTable(const Construction& cons, int level) : level_(level) {
        side_ = cells_per_side(level);
        rows_.reserve(side_);
        cols_.reserve(side_);
        for (std::uint64_t r = 0; r < side_; ++r) {
            rows_.push_back(row_word(cons.classify_y(row_span(Cell{level, 0, r}), level)));
        }
        for (std::uint64_t c = 0; c < side_; ++c) cols_.push_back(column_a_mask(c, level));
        if (const auto& f = cons.fault(); f && f->cell.level <= level) fault_ = &*f;
    }

    int level() const { return level_; }
    std::uint64_t side() const { return side_; }
    const RowWord& row(std::uint64_t r) const { return rows_[r]; }

    WeightWord word(std::uint64_t col, std::uint64_t row) const {
        const RowWord& rw = rows_[row];
        std::uint64_t flip = rw.upper ^ cols_[col];
        WeightWord w{rw.band & flip, rw.band & ~flip};
        if (fault_) apply_fault(w, col, row);
        return w;
    }

    std::vector<WeightValue> unpack(const WeightWord& w) const {
        std::vector<WeightValue> out;
        for (int i = 0; i < level_; ++i) {
            std::uint64_t bit = std::uint64_t{1} << i;
            out.push_back((w.p & bit) ? WeightValue::P : (w.q & bit) ? WeightValue::Q : WeightValue::One);
        }
        return out;
    }

private:
    void apply_fault(WeightWord& w, std::uint64_t col, std::uint64_t row) const {
        int shift = 2 * (level_ - fault_->cell.level);
        if ((col >> shift) != fault_->cell.col || (row >> shift) != fault_->cell.row) return;
        std::uint64_t bit = std::uint64_t{1} << (fault_->cell.level - 1);
        w.p &= ~bit;
        w.q &= ~bit;
        if (fault_->value == WeightValue::P) w.p |= bit;
        if (fault_->value == WeightValue::Q) w.q |= bit;
    }

    int level_;
    std::uint64_t side_ = 0;
    std::vector<RowWord> rows_;
    std::vector<std::uint64_t> cols_;
    const Fault* fault_ = nullptr;
};

/// p^a q^b, memoised per exponent pair.
class MonomialCache {
public:
    explicit MonomialCache(const Params& params) : p_(params.p()), q_(params.q()) {}

    const Rat& operator()(int a, int b) {
        auto key = std::make_pair(a, b);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, pow(p_, a) * pow(q_, b)).first;
        return it->second;
    }

private:
    Rat p_, q_;
    std::map<std::pair<int, int>, Rat> cache_;
};

inline void check_sweep_size(int level, const SweepOptions& options) {
    if (level < 0 || level > kMaxCellLevel) fail(Errc::OutOfRange, "sweep level outside [0, 31]");
    if (level > 15 || (std::uint64_t{1} << (4 * level)) > options.exhaustive_limit) {
        fail(Errc::SweepTooLarge, "an exhaustive sweep at depth " + std::to_string(level) +
                                      " visits 16^" + std::to_string(level) + " cells, above the limit of " +
                                      std::to_string(options.exhaustive_limit) +
                                      "; lower the depth, raise FATGRAPH_EXHAUSTIVE_LIMIT, or use --sample");
    }
}

} // namespace fatgraph
