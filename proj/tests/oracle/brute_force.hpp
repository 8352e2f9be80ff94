#pragma once

// Naive reference model. Every quantity is evaluated straight from the
// defining formulas at single points (cell centres), with no shared code
// from the library except the rational type.

#include "fatgraph/rat.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using fatgraph::BigInt;
using fatgraph::Rat;

struct Config {
    Rat p;
    std::vector<std::pair<int, int>> stages; // (m, n)

    Rat q() const { return Rat(2) - p; }
};

enum class W { One, P, Q };

inline Rat four_pow_neg(long k) {
    BigInt d = 1;
    for (long j = 0; j < k; ++j) d *= 4;
    return Rat(BigInt(1), d);
}

/// x in A_i: x lies in [j/4^{i-1} + 1/4^i, j/4^{i-1} + 3/4^i] for some j.
inline bool in_A(int i, const Rat& x) {
    Rat scaled = x / four_pow_neg(i - 1);
    Rat frac = scaled - Rat(scaled.floor());
    return Rat(1, 4) <= frac && frac <= Rat(3, 4);
}

/// w_i(x, y) at a point that lies on no boundary.
inline W weight(int i, const Rat& x, const Rat& y, const Config& cfg) {
    Rat b(0), t(1);
    long M = 0;
    for (std::size_t k = 0; k < cfg.stages.size(); ++k) {
        auto [m, n] = cfg.stages[k];
        long a = M + m;
        if (i <= a) return W::One; // uniform distribution step
        if (i <= a + n) {
            Rat mid = (t + b) / Rat(2);
            Rat sum(0);
            for (long j = a + 1; j <= i - 1; ++j) sum += four_pow_neg(j);
            Rat band_lo = mid + sum;
            Rat band_hi = t - sum;
            if (y >= mid) {
                if (y < band_lo || y > band_hi) return W::One;
                return in_A(i, x) ? W::Q : W::P;
            }
            Rat shifted = (t - b) / Rat(2) + y;
            if (shifted < band_lo || shifted > band_hi) return W::One;
            return in_A(i, x) ? W::P : W::Q;
        }
        // Descend into the next-level rectangle holding y, if any.
        Rat d = four_pow_neg(a);
        Rat mid = (t + b) / Rat(2);
        if (b + d <= y && y <= mid - d) {
            t = mid - d;
            b = b + d;
        } else if (mid + d <= y && y <= t - d) {
            b = mid + d;
            t = t - d;
        } else {
            return W::One; // left-over part
        }
        M = a + n;
    }
    return W::One;
}

inline Rat center(std::uint64_t index, int level) {
    BigInt den = 1;
    for (int j = 0; j < level; ++j) den *= 4;
    return Rat(BigInt(static_cast<unsigned long>(2 * index + 1)), den * 2);
}

/// Per-row weights at two probe columns (one inside A_i, one outside) and
/// per-column A memberships; w_i of a cell is the row weight picked by the
/// column's membership.
struct LevelModel {
    int level = 0;
    std::uint64_t side = 0;
    std::vector<std::vector<W>> row_in;  // row_in[r][i-1]
    std::vector<std::vector<W>> row_out; // row_out[r][i-1]
    std::vector<std::vector<bool>> col_in; // col_in[c][i-1]

    LevelModel(int L, const Config& cfg) : level(L), side(std::uint64_t{1} << (2 * L)) {
        row_in.resize(side);
        row_out.resize(side);
        col_in.resize(side);
        for (std::uint64_t r = 0; r < side; ++r) {
            Rat y = center(r, L);
            for (int i = 1; i <= L; ++i) {
                Rat x_in = Rat(3, 2) * four_pow_neg(i);  // digit 1 at step i
                Rat x_out = Rat(1, 2) * four_pow_neg(i); // digit 0 at step i
                row_in[r].push_back(weight(i, x_in, y, cfg));
                row_out[r].push_back(weight(i, x_out, y, cfg));
            }
        }
        for (std::uint64_t c = 0; c < side; ++c) {
            Rat x = center(c, L);
            for (int i = 1; i <= L; ++i) col_in[c].push_back(in_A(i, x));
        }
    }

    std::pair<int, int> exponents(std::uint64_t c, std::uint64_t r) const {
        int a = 0, b = 0;
        for (int i = 0; i < level; ++i) {
            W w = col_in[c][static_cast<std::size_t>(i)] ? row_in[r][static_cast<std::size_t>(i)]
                                                          : row_out[r][static_cast<std::size_t>(i)];
            a += w == W::P ? 1 : 0;
            b += w == W::Q ? 1 : 0;
        }
        return {a, b};
    }
};

/// Sums p^a q^b over a histogram of exponent pairs, times 16^{-L}.
inline Rat histogram_mass(const std::vector<std::uint64_t>& hist, int L, const Config& cfg) {
    Rat sum(0);
    for (int a = 0; a < 64; ++a) {
        for (int b = 0; b < 64; ++b) {
            std::uint64_t n = hist[static_cast<std::size_t>(a * 64 + b)];
            if (n == 0) continue;
            sum += Rat(BigInt(static_cast<unsigned long>(n))) * fatgraph::pow(cfg.p, a) * fatgraph::pow(cfg.q(), b);
        }
    }
    return sum * four_pow_neg(2 * L);
}

/// mu of a single level-L cell.
inline Rat cell_mass(const LevelModel& model, std::uint64_t c, std::uint64_t r, const Config& cfg) {
    auto [a, b] = model.exponents(c, r);
    return fatgraph::pow(cfg.p, a) * fatgraph::pow(cfg.q(), b) * four_pow_neg(2 * model.level);
}

inline Rat total_mass(const LevelModel& model, const Config& cfg) {
    std::vector<std::uint64_t> hist(64 * 64, 0);
    for (std::uint64_t r = 0; r < model.side; ++r) {
        for (std::uint64_t c = 0; c < model.side; ++c) {
            auto [a, b] = model.exponents(c, r);
            ++hist[static_cast<std::size_t>(a * 64 + b)];
        }
    }
    return histogram_mass(hist, model.level, cfg);
}

/// mu(S_1) by enumerating every level-M_1 cell. A column picks the upper
/// level-1 rectangle when the weight product of the stage's non-uniform
/// steps, read at a point of that rectangle, exceeds (pq)^{n/2}.
inline Rat mu_S1(const Config& cfg) {
    auto [m, n] = cfg.stages.at(0);
    int L = m + n;
    LevelModel model(L, cfg);
    Rat d = four_pow_neg(m);
    Rat upper_lo = Rat(1, 2) + d, upper_hi = Rat(1) - d;
    Rat lower_lo = d, lower_hi = Rat(1, 2) - d;
    Rat probe_y = (upper_lo + upper_hi) / Rat(2);
    Rat threshold = fatgraph::pow(cfg.p * cfg.q(), n);

    std::vector<bool> in_upper(model.side), in_lower(model.side);
    for (std::uint64_t r = 0; r < model.side; ++r) {
        Rat y = center(r, L);
        in_upper[r] = upper_lo <= y && y <= upper_hi;
        in_lower[r] = lower_lo <= y && y <= lower_hi;
    }

    std::vector<std::uint64_t> hist(64 * 64, 0);
    for (std::uint64_t c = 0; c < model.side; ++c) {
        Rat x = center(c, L);
        Rat prod(1);
        for (int i = m + 1; i <= L; ++i) {
            W w = weight(i, x, probe_y, cfg);
            prod *= w == W::P ? cfg.p : w == W::Q ? cfg.q() : Rat(1);
        }
        bool upper = prod * prod > threshold;
        const std::vector<bool>& rows = upper ? in_upper : in_lower;
        for (std::uint64_t r = 0; r < model.side; ++r) {
            if (!rows[r]) continue;
            auto [a, b] = model.exponents(c, r);
            ++hist[static_cast<std::size_t>(a * 64 + b)];
        }
    }
    return histogram_mass(hist, L, cfg);
}

} // namespace oracle
