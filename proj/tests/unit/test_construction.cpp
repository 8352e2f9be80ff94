#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace fatgraph;

namespace {

const Construction& ref() { return fixtures::reference(); }

} // namespace

TEST(Construction, RootChildren) {
    auto kids = crect_children(root_rect(), ref());
    ASSERT_EQ(kids.size(), 8192u);
    int upper = 0;
    for (const CRect& c : kids) {
        EXPECT_EQ(c.bounds.width(), inv_pow4(6));
        if (c.half() == Half::Upper) {
            ++upper;
            EXPECT_EQ(c.bounds.b, Rat(1, 2) + Rat(1, 64));
            EXPECT_EQ(c.bounds.t, Rat(1) - Rat(1, 64));
        } else {
            EXPECT_EQ(c.bounds.b, Rat(1, 64));
            EXPECT_EQ(c.bounds.t, Rat(1, 2) - Rat(1, 64));
        }
        EXPECT_TRUE(aligned(c.bounds, 6));
    }
    EXPECT_EQ(upper, 4096);
    EXPECT_EQ(kids[4096].bounds.l, Rat(0));
    EXPECT_EQ(kids[4097].bounds.l, inv_pow4(6));
}

TEST(Construction, ChildrenOfTheLastStageAreRefused) {
    auto kids = crect_children(root_rect(), ref());
    EXPECT_THROW(crect_children(kids.front(), ref()), Error);
}

TEST(Construction, LeftOverOfLevelOne) {
    auto strips = leftover_strips(root_rect(), ref());
    Rat total(0);
    for (const RectQ& s : strips) total += s.area();
    EXPECT_EQ(total, Rat(1, 16));
    EXPECT_EQ(strips[1].b, Rat(1, 2) - Rat(1, 64));
}

TEST(Construction, NestedChildrenStayInsideTheirParentHalf) {
    const Construction& cons = fixtures::two_stage();
    auto level1 = crect_children(root_rect(), cons);
    for (std::size_t j : {std::size_t{0}, std::size_t{4097}, std::size_t{8191}}) {
        const CRect& parent = level1[j];
        Rat mid = (parent.bounds.b + parent.bounds.t) / Rat(2);
        auto kids = crect_children(parent, cons);
        ASSERT_EQ(kids.size(), 8192u);
        Rat area(0);
        for (const CRect& c : kids) {
            EXPECT_LE(parent.bounds.l, c.bounds.l);
            EXPECT_LE(c.bounds.r, parent.bounds.r);
            if (c.half() == Half::Upper) {
                EXPECT_LE(mid, c.bounds.b);
                EXPECT_LE(c.bounds.t, parent.bounds.t);
            } else {
                EXPECT_LE(parent.bounds.b, c.bounds.b);
                EXPECT_LE(c.bounds.t, mid);
            }
            EXPECT_TRUE(aligned(c.bounds, 12));
            area += c.bounds.area();
        }
        Rat strips = Rat(4) * cons.margin(2) * parent.bounds.width();
        EXPECT_EQ(area + strips, parent.bounds.area());
    }
}

TEST(Construction, LocateExamples) {
    // Just below the midline of the unit square: middle left-over strip.
    Rat y = Rat(1, 2) - Rat(1, 128);
    Cell strip = cell_containing(Rat(1, 3), y, 7);
    RegionClass a = locate(strip, 1, ref());
    EXPECT_EQ(a.kind, RegionClass::Kind::LeftOver);
    EXPECT_EQ(a.level, 1);

    Cell inside = cell_containing(Rat(0), Rat(3, 4), 7);
    RegionClass b = locate(inside, 1, ref());
    EXPECT_EQ(b.kind, RegionClass::Kind::InRect);
    ASSERT_TRUE(b.rect(ref()));
    EXPECT_EQ(b.rect(ref())->half(), Half::Upper);
    EXPECT_EQ(b.rect(ref())->column, 0u);

    RegionClass c = locate(Cell{3, 0, 0}, 0, ref());
    EXPECT_EQ(c.kind, RegionClass::Kind::InRect);
    EXPECT_EQ(c.level, 0);
}

TEST(Construction, LocateReportsStraddles) {
    // A level-2 cell overlaps both a level-1 rectangle and the left-over part.
    EXPECT_THROW(locate(Cell{2, 0, 7}, 1, ref()), Error);
}

TEST(Construction, WeightExamples) {
    const Params& params = ref().params();
    // Row 255 of level 4 is [255/256, 1], inside the upper band.
    EXPECT_EQ(weight(4, Cell{4, 1, 255}, ref()), WeightValue::Q);
    EXPECT_EQ(value_of(weight(4, Cell{4, 1, 255}, ref()), params), Rat(3, 2));
    EXPECT_EQ(weight(4, Cell{4, 0, 255}, ref()), WeightValue::P);
    // Row 15 is [15/256, 16/256], in the lower half, where the table swaps.
    EXPECT_EQ(weight(4, Cell{4, 1, 15}, ref()), WeightValue::P);
    EXPECT_EQ(weight(4, Cell{4, 0, 15}, ref()), WeightValue::Q);
    EXPECT_EQ(weight(2, Cell{5, 17, 300}, ref()), WeightValue::One);
    EXPECT_EQ(weight(5, Cell{5, 5, 1022}, ref()), WeightValue::One);
    EXPECT_THROW(weight(5, Cell{4, 0, 0}, ref()), Error);
}

TEST(Construction, WeightsAreConstantOnCellsOfTheirLevel) {
    // No Unaligned error anywhere, and a finer cell agrees with its ancestor.
    for (int i = 1; i <= 6; ++i) {
        std::uint64_t side = cells_per_side(i);
        for (std::uint64_t r = 0; r < side; r += (i >= 5 ? 7 : 1)) {
            for (std::uint64_t c = 0; c < side; c += (i >= 5 ? 5 : 1)) {
                WeightValue w = weight(i, Cell{i, c, r}, ref());
                if (i < 6) {
                    EXPECT_EQ(weight(i, Cell{i + 1, 4 * c + 3, 4 * r + 2}, ref()), w);
                }
            }
        }
    }
}

TEST(Construction, RowAverageOfEachStepIsOne) {
    const Params& params = ref().params();
    for (int i = 1; i <= 6; ++i) {
        std::uint64_t side = cells_per_side(i - 1);
        for (std::uint64_t r = 0; r < side; ++r) {
            for (std::uint64_t c = 0; c < side; c += 3) {
                Rat sum(0);
                for (const Cell& child : children(Cell{i - 1, c, r})) sum += value_of(weight(i, child, ref()), params);
                EXPECT_EQ(sum, Rat(16));
            }
        }
    }
}

TEST(Construction, MirrorSymmetryBetweenHalves) {
    // Reflecting the row through the midline swaps the half; complementing A
    // (column c -> c ^ 1 flips membership of digits 0<->1 and 2<->3) then
    // swaps p and q back.
    for (std::uint64_t r = 128; r < 256; ++r) {
        std::uint64_t mirror = r - 128;
        for (std::uint64_t c = 0; c < 256; c += 5) {
            WeightValue up = weight(4, Cell{4, c, r}, ref());
            WeightValue down = weight(4, Cell{4, c ^ 1u, mirror}, ref());
            if (up == WeightValue::One) {
                EXPECT_EQ(down, WeightValue::One);
            } else {
                EXPECT_EQ(up, down);
            }
        }
    }
}

TEST(Construction, LeftOverAbsorbsLaterWeights) {
    const Construction& cons = fixtures::two_stage();
    // Middle strip of the unit square at level 1.
    Rat y = Rat(1, 2) + Rat(1, 256);
    for (int level : {7, 9, 12}) {
        Cell cell = cell_containing(Rat(5, 7), y, level);
        auto word = weight_word(cell, cons);
        for (int i = 7; i <= level; ++i) EXPECT_EQ(word[static_cast<std::size_t>(i - 1)], WeightValue::One);
    }
}

TEST(Construction, PointAndCellWeightsAgree) {
    for (std::uint64_t r = 0; r < 4096; r += 37) {
        for (std::uint64_t c = 0; c < 4096; c += 41) {
            Cell cell{6, c, r};
            Rat x = (Rat(BigInt(static_cast<unsigned long>(c))) + Rat(1, 2)) * inv_pow4(6);
            Rat y = (Rat(BigInt(static_cast<unsigned long>(r))) + Rat(1, 2)) * inv_pow4(6);
            auto word = weight_word(cell, ref());
            for (int i = 1; i <= 6; ++i) EXPECT_EQ(weight_at(i, x, y, ref()), word[static_cast<std::size_t>(i - 1)]);
        }
    }
}

TEST(Construction, BandsAreAlignedAtTheirStep) {
    for (int t = 1; t <= 3; ++t) {
        Rat inset = ref().band_inset(1, t);
        Step i = 3 + t;
        EXPECT_TRUE(aligned(Rat(1, 2) + inset, static_cast<int>(i)));
        EXPECT_TRUE(aligned(Rat(1) - inset, static_cast<int>(i)));
    }
    EXPECT_EQ(ref().band_inset(1, 1), Rat(0));
    EXPECT_EQ(ref().band_inset(1, 2), Rat(1, 256));
}

TEST(Construction, FaultOverridesOneCell) {
    Construction faulty(fixtures::reference_params(), Fault{Cell{4, 1, 255}, WeightValue::P});
    EXPECT_EQ(weight(4, Cell{4, 1, 255}, faulty), WeightValue::P);
    EXPECT_EQ(weight(4, Cell{5, 4, 1020}, faulty), WeightValue::P);
    EXPECT_EQ(weight(4, Cell{4, 2, 255}, faulty), WeightValue::Q);
}
