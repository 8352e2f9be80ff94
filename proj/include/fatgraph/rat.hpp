#pragma once

#include "fatgraph/error.hpp"

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace fatgraph {

using BigInt = mpz_class;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator. Thin value wrapper over GMP's mpq.
class Rat {
public:
    Rat() = default;
    Rat(std::int64_t n) { set_int(n); }           // NOLINT(google-explicit-constructor)
    Rat(int n) : Rat(static_cast<std::int64_t>(n)) {} // NOLINT(google-explicit-constructor)
    Rat(const BigInt& n) : v_(n) {}               // NOLINT(google-explicit-constructor)

    Rat(std::int64_t num, std::int64_t den) {
        if (den == 0) fail(Errc::InvalidRational, "zero denominator");
        mpz_class n, d;
        set_i64(n, num);
        set_i64(d, den);
        v_ = mpq_class(n, d);
        v_.canonicalize();
    }

    Rat(const BigInt& num, const BigInt& den) {
        if (den == 0) fail(Errc::InvalidRational, "zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }

    /// Accepts "n", "n/d" and terminating decimals such as "-0.75".
    static Rat parse(std::string_view text) {
        std::string s(text);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\n')) s.pop_back();
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        if (s.empty()) fail(Errc::InvalidRational, "empty rational");

        auto parse_int = [&](const std::string& part) {
            if (part.empty()) fail(Errc::InvalidRational, "malformed rational '" + s + "'");
            std::size_t start = (part[0] == '-' || part[0] == '+') ? 1 : 0;
            if (start == part.size()) fail(Errc::InvalidRational, "malformed rational '" + s + "'");
            for (std::size_t i = start; i < part.size(); ++i) {
                if (part[i] < '0' || part[i] > '9') {
                    fail(Errc::InvalidRational, "malformed rational '" + s + "'");
                }
            }
            return BigInt(part[0] == '+' ? part.substr(1) : part, 10);
        };

        if (auto slash = s.find('/'); slash != std::string::npos) {
            BigInt num = parse_int(s.substr(0, slash));
            std::string den_text = s.substr(slash + 1);
            if (!den_text.empty() && (den_text[0] == '-' || den_text[0] == '+')) {
                fail(Errc::InvalidRational, "denominator must be unsigned in '" + s + "'");
            }
            BigInt den = parse_int(den_text);
            return Rat(num, den);
        }
        if (auto dot = s.find('.'); dot != std::string::npos) {
            std::string whole = s.substr(0, dot);
            std::string frac = s.substr(dot + 1);
            bool negative = !whole.empty() && whole[0] == '-';
            if (whole.empty() || whole == "-" || whole == "+") whole += "0";
            if (frac.empty()) fail(Errc::InvalidRational, "malformed decimal '" + s + "'");
            BigInt w = parse_int(whole);
            BigInt f = parse_int(frac);
            if (frac[0] == '-' || frac[0] == '+') fail(Errc::InvalidRational, "malformed decimal '" + s + "'");
            BigInt scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
            BigInt abs_w = abs(w);
            Rat out(abs_w * scale + f, scale);
            return negative ? -out : out;
        }
        return Rat(parse_int(s));
    }

    /// "num/den" in lowest terms; integers keep the "/1".
    std::string str() const {
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    BigInt num() const { return v_.get_num(); }
    BigInt den() const { return v_.get_den(); }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }
    double to_double() const { return v_.get_d(); }

    /// Largest integer not above this value.
    BigInt floor() const {
        BigInt out;
        mpz_fdiv_q(out.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
        return out;
    }

    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) {
        if (o.sign() == 0) fail(Errc::InvalidRational, "division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rat operator+(Rat a, const Rat& b) { return a += b; }
    friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
    friend Rat operator-(const Rat& a) {
        Rat out;
        out.v_ = -a.v_;
        return out;
    }

    friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

    const mpq_class& raw() const { return v_; }

private:
    static void set_i64(mpz_class& z, std::int64_t n) {
        // mpz has no portable int64 setter; go through two halves
        bool negative = n < 0;
        std::uint64_t mag = negative ? (~static_cast<std::uint64_t>(n) + 1) : static_cast<std::uint64_t>(n);
        z = static_cast<unsigned long>(mag >> 32);
        z <<= 32;
        z += static_cast<unsigned long>(mag & 0xffffffffULL);
        if (negative) z = -z;
    }
    void set_int(std::int64_t n) {
        mpz_class z;
        set_i64(z, n);
        v_ = mpq_class(z);
    }

    mpq_class v_{0};
};

/// base^exp for any integer exponent; base must be nonzero when exp < 0.
inline Rat pow(const Rat& base, std::int64_t exp) {
    if (exp < 0) return Rat(1) / pow(base, -exp);
    BigInt n, d;
    mpz_pow_ui(n.get_mpz_t(), base.raw().get_num_mpz_t(), static_cast<unsigned long>(exp));
    mpz_pow_ui(d.get_mpz_t(), base.raw().get_den_mpz_t(), static_cast<unsigned long>(exp));
    return Rat(n, d);
}

inline BigInt pow4(std::int64_t k) {
    BigInt out;
    mpz_ui_pow_ui(out.get_mpz_t(), 4, static_cast<unsigned long>(k));
    return out;
}

/// 4^{-k}
inline Rat inv_pow4(std::int64_t k) { return Rat(BigInt(1), pow4(k)); }

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }
inline const Rat& min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& max(const Rat& a, const Rat& b) { return a < b ? b : a; }

inline BigInt binomial(unsigned long n, unsigned long k) {
    BigInt out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

} // namespace fatgraph
