#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "airy/errors.hpp"

namespace airy {

// Exact rational arithmetic.  Exponents, Newton slopes and operator input
// coefficients are kept exact; only series coefficients are floating point.
// Always reduced, denominator always positive.
class Rational {
  public:
    constexpr Rational() = default;
    constexpr Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) {
        if (d == 0) throw Error("rational with zero denominator");
        __int128 nn = n, dd = d;
        if (dd < 0) {
            nn = -nn;
            dd = -dd;
        }
        assign(nn, dd);
    }

    static Rational parse(std::string_view s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string_view::npos)
                return Rational(std::stoll(std::string(s)));
            return Rational(std::stoll(std::string(s.substr(0, slash))),
                            std::stoll(std::string(s.substr(slash + 1))));
        } catch (const std::logic_error&) {
            throw Error("cannot parse rational '" + std::string(s) + "'");
        }
    }

    long long num() const { return num_; }
    long long den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    template <class Real>
    Real to() const {
        return static_cast<Real>(num_) / static_cast<Real>(den_);
    }

    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_,
                    (__int128)a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw Error("rational division by zero");
        return make((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  private:
    static Rational make(__int128 n, __int128 d) {
        Rational r;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        r.assign(n, d);
        return r;
    }

    void assign(__int128 n, __int128 d) {
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr __int128 lim = std::numeric_limits<long long>::max();
        if (n > lim || n < -lim || d > lim) throw Error("rational overflow");
        num_ = static_cast<long long>(n);
        den_ = static_cast<long long>(d);
        if (den_ == 0) throw Error("rational with zero denominator");
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    long long num_ = 0;
    long long den_ = 1;
};

inline long long lcm_ll(long long a, long long b) { return std::lcm(a, b); }

// Nearest rational p/q with q <= max_den within tol of x, if any.
template <class Real>
inline bool round_to_rational(Real x, long long max_den, double tol, Rational& out) {
    for (long long q = 1; q <= max_den; ++q) {
        Real scaled = x * static_cast<Real>(q);
        Real nearest = std::round(scaled);
        if (std::abs(scaled - nearest) <= static_cast<Real>(tol) * static_cast<Real>(q)) {
            out = Rational(static_cast<long long>(nearest), q);
            return true;
        }
    }
    return false;
}

} // namespace airy
