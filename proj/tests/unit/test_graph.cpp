#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fatgraph;

namespace {

const Construction& ref() { return fixtures::reference(); }

/// Level-6 column whose digits at steps 4, 5, 6 are (a, b, c).
std::uint64_t column(unsigned a, unsigned b, unsigned c) { return (a << 4) | (b << 2) | c; }

} // namespace

TEST(Graph, ChosenHalfExamples) {
    ChosenHalf lower = chosen_half(root_rect(), column(0, 0, 0), ref());
    EXPECT_EQ(lower.half, Half::Lower);
    EXPECT_EQ(lower.q_count_upper, 0);

    ChosenHalf two = chosen_half(root_rect(), column(1, 1, 0), ref());
    EXPECT_EQ(two.half, Half::Upper);
    EXPECT_EQ(two.q_count_upper, 2);

    ChosenHalf all = chosen_half(root_rect(), column(2, 2, 2), ref());
    EXPECT_EQ(all.half, Half::Upper);
    EXPECT_EQ(all.q_count_upper, 3);
}

TEST(Graph, DigitCountAndProductCriterionAgree) {
    for (Rat p : {Rat(1, 2), Rat(3, 4), Rat(9, 10)}) {
        Construction cons(Params::validate(p, {Stage{3, 5}}));
        for (std::uint64_t c = 0; c < cells_per_side(8); c += 7) {
            ChosenHalf h = chosen_half(root_rect(), c, cons);
            EXPECT_EQ(h.half == Half::Upper, detail::upper_by_product(h.q_count_upper, 5, cons.params()));
        }
    }
}

TEST(Graph, ChosenHalfRejectsForeignColumns) {
    const Construction& cons = fixtures::two_stage();
    CRect parent = make_crect(cons, 1, 5, 0);
    EXPECT_THROW(chosen_half(parent, 0, cons), Error);
    EXPECT_NO_THROW(chosen_half(parent, 5u << 12, cons));
}

TEST(Graph, MuSValues) {
    EXPECT_EQ(mu_S(0, ref()), Rat(1));
    EXPECT_EQ(mu_S(1, ref()), Rat(405, 512));
    EXPECT_EQ(mu_S(1, ref()), (Rat(15, 16)) * (Rat(1) - Rat(5, 32)));
    EXPECT_GE(mu_S(1, ref()), Rat(9, 16));
    EXPECT_THROW(mu_S(2, ref()), Error);
}

TEST(Graph, MuSFactorizedMatchesClosedFormAndEnumeration) {
    EXPECT_EQ(mu_S(1, ref()), mu_S_closed_form(1, ref().params()));
    EXPECT_EQ(mu_S(1, ref()), mu_S_by_cells(1, ref()));
    const Construction& two = fixtures::two_stage();
    EXPECT_EQ(mu_S(2, two), mu_S_closed_form(2, two.params()));
    for (Rat p : {Rat(3, 4), Rat(9, 10)}) {
        Construction cons(Params::validate(p, {Stage{3, 3}, Stage{5, 3}}));
        EXPECT_EQ(mu_S(2, cons), mu_S_closed_form(2, cons.params()));
        EXPECT_EQ(mu_S(1, cons), mu_S_by_cells(1, cons));
    }
}

TEST(Graph, BoundsLedgerExamples) {
    BoundsLedger b = bounds(ref());
    ASSERT_EQ(b.stages.size(), 1u);
    EXPECT_EQ(b.stages[0].tail_exact, Rat(5, 32));
    EXPECT_EQ(b.stages[0].tail_term, Rat(3, 8));
    EXPECT_EQ(b.stages[0].leftover_exact, Rat(1, 16));
    EXPECT_EQ(b.stages[0].leftover_term, Rat(1, 16));
    EXPECT_EQ(b.pq, Rat(3, 4));
    EXPECT_TRUE(b.pq_identity);
    EXPECT_EQ(b.total, Rat(9, 16));
    EXPECT_TRUE(b.ok());
}

TEST(Graph, TailInequalityOnTheGrid) {
    for (int n : {3, 5, 7, 9}) {
        for (Rat p : {Rat(1, 2), Rat(3, 4), Rat(9, 10)}) {
            EXPECT_LE(tail_exact(n, p), tail_term(n, p)) << n << " " << p.str();
            Rat q = Rat(2) - p;
            EXPECT_EQ(p * q, Rat(1) - (Rat(1) - p) * (Rat(1) - p));
        }
    }
}

TEST(Graph, LeftOverOfLevelTwo) {
    BoundsLedger b = bounds(fixtures::two_stage());
    ASSERT_EQ(b.stages.size(), 2u);
    EXPECT_EQ(b.stages[1].leftover_exact, Rat(8) * inv_pow4(9));
    EXPECT_LE(b.stages[1].leftover_exact, inv_pow4(2));
    EXPECT_LE(b.stages[1].leftover_in_graph, b.stages[1].leftover_exact);
}

TEST(Graph, DiscardAccountingBalances) {
    const Construction& two = fixtures::two_stage();
    for (int k : {1, 2}) {
        DiscardAccounting d = discard_accounting(k, two);
        EXPECT_TRUE(d.balanced()) << k;
        EXPECT_GT(d.unchosen, Rat(0));
    }
    DiscardAccounting first = discard_accounting(1, ref());
    EXPECT_EQ(first.leftover, Rat(1, 16));
    EXPECT_EQ(first.unchosen, Rat(15, 16) - Rat(405, 512));
}

TEST(Graph, MuSStaysAboveThePartialBounds) {
    for (Rat p : {Rat(1, 2), Rat(3, 4)}) {
        Construction cons(Params::validate(p, {Stage{3, 3}, Stage{3, 5}, Stage{5, 3}}));
        BoundsLedger b = bounds(cons);
        for (int k = 0; k <= 3; ++k) EXPECT_GE(mu_S(k, cons), b.partial(k));
    }
}

TEST(Graph, EnclosureExamples) {
    FEnclosure zero = f_enclosure(Rat(0), 1, ref());
    EXPECT_EQ(zero.lo, Rat(1, 64));
    EXPECT_EQ(zero.hi, Rat(31, 64));
    FEnclosure x = f_enclosure(Rat(5, 16), 1, ref());
    EXPECT_EQ(x.lo, Rat(1, 64));
    EXPECT_EQ(x.hi, Rat(31, 64));
    EXPECT_EQ(x.width(), Rat(1, 2) - Rat(1, 32));
    EXPECT_THROW(f_enclosure(Rat(1, 2), 2, ref()), Error);
}

TEST(Graph, EnclosuresNestAndShrink) {
    const Construction& two = fixtures::two_stage();
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        Rat x(BigInt(static_cast<unsigned long>(rng() % (1u << 24))), pow4(12));
        FEnclosure e0 = f_enclosure(x, 0, two), e1 = f_enclosure(x, 1, two), e2 = f_enclosure(x, 2, two);
        EXPECT_TRUE(e1.within(e0));
        EXPECT_TRUE(e2.within(e1));
        EXPECT_LT(e1.width(), Rat(1, 2));
        EXPECT_LT(e2.width(), Rat(1, 4));
    }
}

TEST(Graph, EnclosureMatchesChosenRectangle) {
    const Construction& two = fixtures::two_stage();
    Approximation approx(two, 2);
    for (std::uint64_t c = 0; c < cells_per_side(12); c += 9973) {
        Rat x = (Rat(BigInt(static_cast<unsigned long>(c))) + Rat(1, 2)) * inv_pow4(12);
        CRect rect = approx.chosen_rect(c);
        FEnclosure e = f_enclosure(x, 2, two);
        EXPECT_EQ(e.lo, rect.bounds.b);
        EXPECT_EQ(e.hi, rect.bounds.t);
        auto chain = approx.lineage(c);
        ASSERT_EQ(chain.size(), 3u);
        EXPECT_EQ(chain[1].path, rect.path & 1u);
        EXPECT_TRUE(approx.contains(x, (e.lo + e.hi) / Rat(2)));
    }
}

TEST(Graph, SampleGraph) {
    GraphSampling s = sample_graph(1, 4096, ref());
    ASSERT_EQ(s.samples.size(), 4096u);
    Approximation approx(ref(), 1);
    for (std::uint64_t j = 0; j < 4096; j += 31) {
        const GraphSample& g = s.samples[j];
        CRect rect = approx.chosen_rect(j);
        EXPECT_EQ(g.y_lo, rect.bounds.b);
        EXPECT_EQ(g.y_hi, rect.bounds.t);
        EXPECT_TRUE(g.y_lo <= g.y_mid && g.y_mid <= g.y_hi);
        EXPECT_EQ(s.curve(g.x), g.y_mid);
    }
    GraphSampling again = sample_graph(1, 4096, ref());
    EXPECT_EQ(again.samples.back().y_mid, s.samples.back().y_mid);
}

TEST(Graph, ChosenRectsCoverEveryColumnOnce) {
    auto rects = Approximation(ref(), 1).rects();
    ASSERT_EQ(rects.size(), 4096u);
    Rat area(0);
    for (const CRect& r : rects) area += r.bounds.area();
    EXPECT_EQ(area, Rat(15, 32));
}
