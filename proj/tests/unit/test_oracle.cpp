#include "fixtures.hpp"
#include "oracle/brute_force.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fatgraph;

namespace {

oracle::Config to_oracle(const Params& params) {
    oracle::Config cfg{params.p(), {}};
    for (const Stage& s : params.stages()) cfg.stages.emplace_back(s.m, s.n);
    return cfg;
}

} // namespace

TEST(Oracle, CellMassesAgreeAtDepthSix) {
    const Construction& cons = fixtures::reference();
    oracle::Config cfg = to_oracle(cons.params());
    oracle::LevelModel model(6, cfg);
    LevelTable table(cons, 6);
    for (std::uint64_t r = 0; r < model.side; r += 3) {
        for (std::uint64_t c = 0; c < model.side; c += 5) {
            auto [a, b] = model.exponents(c, r);
            WeightWord w = table.word(c, r);
            ASSERT_EQ(w.p_count(), a) << c << "," << r;
            ASSERT_EQ(w.q_count(), b) << c << "," << r;
        }
    }
    EXPECT_EQ(oracle::cell_mass(model, 0, 3000 / 64, cfg), mu_cell(Cell{6, 0, 3000 / 64}, cons));
    EXPECT_EQ(oracle::total_mass(model, cfg), Rat(1));
}

TEST(Oracle, WeightWordsAgreeAcrossStages) {
    // Level-12 cell centres never lie on a band or rectangle boundary of two
    // (3,3) stages, so the pointwise walk is well defined there.
    std::mt19937_64 rng(11);
    const int L = 12;
    for (Rat p : {Rat(1, 2), Rat(9, 10)}) {
        Construction cons(Params::validate(p, {Stage{3, 3}, Stage{3, 3}}));
        oracle::Config cfg = to_oracle(cons.params());
        for (int t = 0; t < 400; ++t) {
            Cell cell{L, rng() % cells_per_side(L), rng() % cells_per_side(L)};
            Rat x = oracle::center(cell.col, L), y = oracle::center(cell.row, L);
            std::string expect;
            for (int i = 1; i <= L; ++i) {
                oracle::W w = oracle::weight(i, x, y, cfg);
                expect.push_back(w == oracle::W::P ? 'p' : w == oracle::W::Q ? 'q' : '1');
            }
            ASSERT_EQ(word_string(weight_word(cell, cons)), expect) << cell.col << "," << cell.row;
        }
    }
}

TEST(Oracle, MuS1) {
    const Construction& cons = fixtures::reference();
    Rat brute = oracle::mu_S1(to_oracle(cons.params()));
    EXPECT_EQ(brute, Rat(405, 512));
    EXPECT_EQ(brute, mu_S(1, cons));
    EXPECT_EQ(brute, mu_S_by_cells(1, cons));
}

TEST(Oracle, MuS1AtOtherParameters) {
    for (Rat p : {Rat(3, 4), Rat(9, 10)}) {
        Construction cons(Params::validate(p, {Stage{3, 3}}));
        EXPECT_EQ(oracle::mu_S1(to_oracle(cons.params())), mu_S(1, cons)) << p.str();
    }
}
