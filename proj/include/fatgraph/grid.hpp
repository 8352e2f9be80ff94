#pragma once

#include "fatgraph/error.hpp"
#include "fatgraph/rat.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace fatgraph {

static_assert(sizeof(unsigned long) == 8, "cell indices travel through mpz get_ui/set_ui");

/// Deepest cell level representable with 64-bit column/row indices.
inline constexpr int kMaxCellLevel = 31;

/// A 4-adic square of side 4^{-level}.
struct Cell {
    int level = 0;
    std::uint64_t col = 0;
    std::uint64_t row = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Axis-parallel rectangle [l,r] x [b,t] with rational corners.
struct RectQ {
    Rat l, r, b, t;

    Rat width() const { return r - l; }
    Rat height() const { return t - b; }
    Rat area() const { return width() * height(); }

    friend bool operator==(const RectQ&, const RectQ&) = default;
};

inline std::uint64_t cells_per_side(int level) {
    if (level < 0 || level > kMaxCellLevel) {
        fail(Errc::OutOfRange, "cell level " + std::to_string(level) + " outside [0, 31]");
    }
    return std::uint64_t{1} << (2 * level);
}

inline Cell make_cell(int level, std::uint64_t col, std::uint64_t row) {
    std::uint64_t side = cells_per_side(level);
    if (col >= side || row >= side) {
        fail(Errc::OutOfRange, "cell index outside [0, 4^level)");
    }
    return Cell{level, col, row};
}

inline RectQ cell_bounds(const Cell& c) {
    BigInt side = pow4(c.level);
    BigInt col(static_cast<unsigned long>(c.col));
    BigInt row(static_cast<unsigned long>(c.row));
    return RectQ{Rat(col, side), Rat(col + 1, side), Rat(row, side), Rat(row + 1, side)};
}

/// Ancestor of a cell at a coarser level.
inline Cell ancestor(const Cell& c, int level) {
    if (level > c.level || level < 0) fail(Errc::ContractViolation, "ancestor level must not exceed cell level");
    int shift = 2 * (c.level - level);
    return Cell{level, c.col >> shift, c.row >> shift};
}

inline std::array<Cell, 16> children(const Cell& c) {
    std::array<Cell, 16> out{};
    for (std::uint64_t dy = 0; dy < 4; ++dy) {
        for (std::uint64_t dx = 0; dx < 4; ++dx) {
            out[dy * 4 + dx] = Cell{c.level + 1, c.col * 4 + dx, c.row * 4 + dy};
        }
    }
    return out;
}

/// Base-4 digit of an index at `step` (1-based), for an index at `level`.
inline unsigned digit_of(std::uint64_t index, int level, int step) {
    return static_cast<unsigned>((index >> (2 * (level - step))) & 3u);
}

/// Level-i column index lies in A_i iff its last base-4 digit is 1 or 2,
/// i.e. it is one of the two middle quarters of its parent column.
inline bool a_membership(int i, std::uint64_t col) {
    if (i < 1) fail(Errc::ContractViolation, "A_i is defined for i >= 1");
    if (col >= cells_per_side(i)) fail(Errc::OutOfRange, "column outside [0, 4^i)");
    unsigned d = static_cast<unsigned>(col & 3u);
    return d == 1 || d == 2;
}

/// Closed squares intersect: shared edges and corners count, and a cell is
/// adjacent to itself.
inline bool adjacent(const Cell& a, const Cell& b) {
    if (a.level != b.level) fail(Errc::ContractViolation, "adjacency needs cells of equal level");
    auto close = [](std::uint64_t u, std::uint64_t v) { return (u > v ? u - v : v - u) <= 1; };
    return close(a.col, b.col) && close(a.row, b.row);
}

/// Adjacent through a full shared edge (or identical).
inline bool edge_adjacent(const Cell& a, const Cell& b) {
    if (!adjacent(a, b)) return false;
    return a.col == b.col || a.row == b.row;
}

/// Index of the level-`level` interval containing t in [0,1] under the
/// half-open convention, with t == 1 assigned to the last interval.
inline std::uint64_t interval_index(const Rat& t, int level) {
    if (t < Rat(0) || t > Rat(1)) fail(Errc::OutOfRange, "coordinate outside [0,1]");
    std::uint64_t side = cells_per_side(level);
    if (t == Rat(1)) return side - 1;
    BigInt idx = (t * Rat(pow4(level))).floor();
    return static_cast<std::uint64_t>(idx.get_ui());
}

inline Cell cell_containing(const Rat& x, const Rat& y, int level) {
    return Cell{level, interval_index(x, level), interval_index(y, level)};
}

/// Base-4 digit d_i of x in [0,1] (x == 1 reads as 0.333...).
inline unsigned point_digit(const Rat& x, int step) {
    if (x == Rat(1)) return 3;
    BigInt scaled = (x * Rat(pow4(step))).floor();
    BigInt d = scaled % 4;
    return static_cast<unsigned>(d.get_ui());
}

inline bool aligned(const Rat& v, int level) {
    return (v * Rat(pow4(level))).is_integer();
}

inline bool aligned(const RectQ& r, int level) {
    return aligned(r.l, level) && aligned(r.r, level) && aligned(r.b, level) && aligned(r.t, level);
}

} // namespace fatgraph
