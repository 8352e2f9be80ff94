#include "fatgraph/rat.hpp"

#include <gtest/gtest.h>

#include <random>

using fatgraph::BigInt;
using fatgraph::Errc;
using fatgraph::Error;
using fatgraph::Rat;

TEST(Rat, KeepsLowestTermsWithPositiveDenominator) {
    Rat r(6, -8);
    EXPECT_EQ(r.str(), "-3/4");
    EXPECT_EQ(r.num(), BigInt(-3));
    EXPECT_EQ(r.den(), BigInt(4));
    EXPECT_EQ(Rat(3).str(), "3/1");
    EXPECT_EQ(Rat(0).str(), "0/1");
}

TEST(Rat, ParsesFractionsIntegersAndDecimals) {
    EXPECT_EQ(Rat::parse("1/2"), Rat(1, 2));
    EXPECT_EQ(Rat::parse("  7 "), Rat(7));
    EXPECT_EQ(Rat::parse("-0.75"), Rat(-3, 4));
    EXPECT_EQ(Rat::parse("10/4").str(), "5/2");
}

TEST(Rat, RejectsMalformedInput) {
    for (const char* bad : {"", "1/0", "abc", "1/", "/2", "1.2.3", "--1"}) {
        try {
            Rat::parse(bad);
            ADD_FAILURE() << "accepted '" << bad << "'";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::InvalidRational) << bad;
        }
    }
}

TEST(Rat, DivisionByZeroThrows) { EXPECT_THROW(Rat(1) / Rat(0), Error); }

TEST(Rat, ArithmeticRoundTripsOnRandomValues) {
    std::mt19937_64 rng(7);
    auto draw = [&] {
        auto num = static_cast<std::int64_t>(rng() % 2001) - 1000;
        auto den = static_cast<std::int64_t>(rng() % 999) + 1;
        return Rat(num, den);
    };
    for (int t = 0; t < 2000; ++t) {
        Rat a = draw(), b = draw();
        EXPECT_EQ((a + b) - b, a);
        EXPECT_EQ((a * b) + a, a * (b + Rat(1)));
        if (b.sign() != 0) {
            EXPECT_EQ((a / b) * b, a);
        }
    }
}

TEST(Rat, PowersAndHelpers) {
    EXPECT_EQ(fatgraph::pow(Rat(3, 2), 3), Rat(27, 8));
    EXPECT_EQ(fatgraph::pow(Rat(1, 2), -2), Rat(4));
    EXPECT_EQ(fatgraph::pow4(3), BigInt(64));
    EXPECT_EQ(fatgraph::inv_pow4(2), Rat(1, 16));
    EXPECT_EQ(fatgraph::binomial(5, 2), BigInt(10));
    EXPECT_EQ(Rat(7, 2).floor(), BigInt(3));
    EXPECT_EQ(Rat(-7, 2).floor(), BigInt(-4));
    EXPECT_TRUE(Rat(4, 2).is_integer());
    EXPECT_LT(Rat(1, 3), Rat(1, 2));
}
