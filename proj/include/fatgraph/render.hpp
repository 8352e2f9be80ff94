#pragma once

#include "fatgraph/construction.hpp"
#include "fatgraph/error.hpp"
#include "fatgraph/graph.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/words.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fatgraph {

struct HeatmapSpec {
    int depth = 0;
    /// Pixels per axis; must divide 4^depth.
    std::uint64_t pixels = 0;
    /// Mark the chosen rectangles of this level (P6 output).
    std::optional<int> overlay;
};

/// Raw image: 1 channel (gray) or 3 channels (RGB), rows top to bottom.
struct Image {
    std::uint64_t width = 0;
    std::uint64_t height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    /// Netpbm bytes: P5 for gray, P6 for colour.
    std::string netpbm() const {
        std::string out = (channels == 1 ? "P5\n" : "P6\n") + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        out.append(pixels.begin(), pixels.end());
        return out;
    }
};

/// Log-density tone map. Densities are monomials p^a q^b, so the logarithm
/// is a*ln p + b*ln q; the extremes at depth L are p^B and q^B where B is
/// the largest number of band steps over any row.
class ToneMap {
public:
    ToneMap(const Params& params, int max_band_steps)
        : lp_(std::log(params.p().to_double())), lq_(std::log(params.q().to_double())), bands_(max_band_steps) {}

    std::uint8_t gray(int p_count, int q_count) const {
        double lo = bands_ * lp_;
        double hi = bands_ * lq_;
        if (!(hi > lo)) return 128;
        double v = (p_count * lp_ + q_count * lq_ - lo) / (hi - lo);
        return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }

private:
    double lp_, lq_;
    int bands_;
};

/// Pixel (px, py) shows the cell containing the pixel centre; py = 0 is the
/// top row of the square.
inline Image render_heatmap(const HeatmapSpec& spec, const Construction& cons) {
    const Params& params = cons.params();
    if (spec.depth < 0 || spec.depth > kMaxCellLevel) fail(Errc::OutOfRange, "heatmap depth outside [0, 31]");
    std::uint64_t side = cells_per_side(spec.depth);
    if (spec.pixels == 0 || spec.pixels > side || side % spec.pixels != 0) {
        fail(Errc::ResolutionMismatch, "pixels per axis must divide 4^" + std::to_string(spec.depth) + " = " +
                                           std::to_string(side));
    }
    if (spec.overlay && (*spec.overlay < 0 || *spec.overlay > params.stage_count())) {
        fail(Errc::DepthExceeded, "overlay level beyond configured stages");
    }
    std::uint64_t scale = side / spec.pixels;
    std::uint64_t P = spec.pixels;

    // Only the rows and columns hit by pixel centres are needed.
    std::vector<std::uint64_t> rows(P), cols(P);
    for (std::uint64_t j = 0; j < P; ++j) {
        rows[j] = side - j * scale - (scale + 1) / 2;
        cols[j] = j * scale + scale / 2;
    }
    std::vector<RowWord> row_words(P);
    int max_bands = 0;
    for (std::uint64_t r = 0; r < side; ++r) {
        // The extremes are taken over all rows, not only the sampled ones.
        RowWord w = row_word(cons.classify_y(row_span(Cell{spec.depth, 0, r}), spec.depth));
        max_bands = std::max(max_bands, std::popcount(w.band));
    }
    for (std::uint64_t j = 0; j < P; ++j) {
        row_words[j] = row_word(cons.classify_y(row_span(Cell{spec.depth, 0, rows[j]}), spec.depth));
    }
    ToneMap tone(params, max_bands);

    Image img;
    img.width = img.height = P;
    img.channels = spec.overlay ? 3 : 1;
    img.pixels.reserve(P * P * static_cast<std::uint64_t>(img.channels));

    std::vector<FEnclosure> graph;
    BigInt cell_den = pow4(spec.depth) * 2;
    if (spec.overlay) {
        for (std::uint64_t px = 0; px < P; ++px) {
            Rat x(BigInt(static_cast<unsigned long>(2 * px * scale + scale)), cell_den);
            graph.push_back(f_enclosure(x, *spec.overlay, cons));
        }
    }

    std::optional<LevelTable> faulted;
    if (cons.fault() && cons.fault()->cell.level <= spec.depth) faulted.emplace(cons, spec.depth);

    for (std::uint64_t py = 0; py < P; ++py) {
        Rat y(BigInt(static_cast<unsigned long>(2 * (side - py * scale) - scale)), cell_den);
        for (std::uint64_t px = 0; px < P; ++px) {
            std::uint64_t mask = column_a_mask(cols[px], spec.depth);
            std::uint64_t flip = row_words[py].upper ^ mask;
            int pc = std::popcount(row_words[py].band & flip);
            int qc = std::popcount(row_words[py].band & ~flip);
            if (faulted) {
                WeightWord w = faulted->word(cols[px], rows[py]);
                pc = w.p_count();
                qc = w.q_count();
            }
            std::uint8_t g = tone.gray(pc, qc);
            if (!spec.overlay) {
                img.pixels.push_back(g);
                continue;
            }
            const FEnclosure& e = graph[px];
            bool inside = e.lo <= y && y < e.hi;
            img.pixels.push_back(inside ? 255 : g);
            img.pixels.push_back(inside ? static_cast<std::uint8_t>(g / 2) : g);
            img.pixels.push_back(inside ? static_cast<std::uint8_t>(g / 2) : g);
        }
    }
    return img;
}

} // namespace fatgraph
