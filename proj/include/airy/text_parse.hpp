#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "airy/operator.hpp"
#include "airy/puiseux.hpp"

namespace airy {

// Parser for the operator text form: sums of terms `c*d^k` and `c*x^j` with
// rational c, e.g. "d^2 - x" or "d^3 + 2*d - x^2 - 1".  The d-part gives P_n
// (leading coefficient must be 1); x-terms and constants are negated into
// Q_m.  A bare constant belongs to Q_m, never to P_n.
inline AiryOperator parse_operator_text(std::string_view s) {
    struct Term {
        Rational coef;
        char sym;  // 'd', 'x', or 'c' for constant
        int power;
    };
    std::vector<Term> terms;
    std::size_t i = 0;
    const std::size_t len = s.size();
    auto skip_ws = [&] {
        while (i < len && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    };

    skip_ws();
    bool first = true;
    while (i < len) {
        // sign
        int sign = 1;
        skip_ws();
        if (s[i] == '+' || s[i] == '-') {
            sign = (s[i] == '-') ? -1 : 1;
            ++i;
        } else if (!first) {
            throw ParseError("expected '+' or '-' between terms", i);
        }
        first = false;
        skip_ws();
        if (i >= len) throw ParseError("dangling sign", i);

        // optional rational coefficient
        Rational coef(1);
        bool have_coef = false;
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            std::size_t start = i;
            while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            long long num = std::stoll(std::string(s.substr(start, i - start)));
            long long den = 1;
            if (i < len && s[i] == '/') {
                ++i;
                std::size_t dstart = i;
                while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                if (dstart == i) throw ParseError("expected denominator digits", i);
                den = std::stoll(std::string(s.substr(dstart, i - dstart)));
            }
            coef = Rational(num, den);
            have_coef = true;
            skip_ws();
            if (i < len && s[i] == '*') {
                ++i;
                skip_ws();
                if (i >= len || (s[i] != 'd' && s[i] != 'x'))
                    throw ParseError("expected 'd' or 'x' after '*'", i);
            }
        }

        // optional symbol with power
        char sym = 'c';
        int power = 0;
        if (i < len && (s[i] == 'd' || s[i] == 'x')) {
            sym = s[i];
            power = 1;
            ++i;
            skip_ws();
            if (i < len && s[i] == '^') {
                ++i;
                skip_ws();
                std::size_t pstart = i;
                while (i < len && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                if (pstart == i) throw ParseError("expected exponent digits", i);
                power = std::stoi(std::string(s.substr(pstart, i - pstart)));
            }
        } else if (!have_coef) {
            throw ParseError("expected a term", i);
        }

        terms.push_back({coef * Rational(sign), sym, power});
        skip_ws();
    }
    if (terms.empty()) throw ParseError("empty operator text", 0);

    std::map<int, Rational> dpart, xpart;
    for (const auto& t : terms) {
        if (t.sym == 'd')
            dpart[t.power] += t.coef;
        else
            xpart[t.sym == 'x' ? t.power : 0] += t.coef;
    }

    int n = 0;
    for (const auto& [p, c] : dpart)
        if (c != Rational(0)) n = std::max(n, p);
    if (n < 1) throw BadDegree("operator needs a derivative part of degree >= 1");
    std::vector<Rational> a(n, Rational(0));
    for (const auto& [p, c] : dpart)
        if (p >= 1) a[p - 1] = c;
    if (a[n - 1] != Rational(1))
        throw BadLeading("leading derivative coefficient must be 1, got " + a[n - 1].str());

    int m = 0;
    for (const auto& [p, c] : xpart)
        if (c != Rational(0)) m = std::max(m, p);
    if (m < 1) throw DegenerateDegree("operator needs an x part of degree >= 1");
    std::vector<Rational> b(m + 1, Rational(0));
    for (const auto& [p, c] : xpart) b[p] = -c; // L = P(d) - Q(x)
    return AiryOperator::validate(n, m, std::move(a), std::move(b));
}

// Human-readable forms ------------------------------------------------------

inline std::string operator_to_text(const AiryOperator& L) {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const Rational& c, const std::string& var, int p) {
        if (c == Rational(0)) return;
        Rational abs = c < Rational(0) ? -c : c;
        if (first) {
            if (c < Rational(0)) os << "-";
            first = false;
        } else {
            os << (c < Rational(0) ? " - " : " + ");
        }
        const bool unit = abs == Rational(1) && !var.empty();
        if (!unit) os << abs.str();
        if (!var.empty()) {
            if (!unit) os << "*";
            os << var;
            if (p != 1) os << "^" << p;
        }
    };
    for (int i = L.n(); i >= 1; --i) emit(L.a(i), "d", i);
    for (int j = L.m(); j >= 0; --j) emit(-L.b(j), j == 0 ? "" : "x", j);
    return os.str();
}

// Coefficient formatted for reports.
template <class Real>
std::string scalar_to_text(const std::complex<Real>& c) {
    std::ostringstream os;
    os.precision(12);
    if (nearly_zero(std::imag(c))) {
        os << static_cast<double>(c.real());
    } else if (nearly_zero(std::real(c))) {
        os << static_cast<double>(c.imag()) << "i";
    } else {
        os << static_cast<double>(c.real()) << (c.imag() < Real(0) ? " - " : " + ")
           << std::abs(static_cast<double>(c.imag())) << "i";
    }
    return os.str();
}

// Series rendered in the report variable; `invert_variable` renders in
// x = 1/z by negating every exponent.
template <class Real>
std::string series_to_text(const PuiseuxSeries<Real>& s, const std::string& var,
                           bool invert_variable = false) {
    if (s.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [q, c] : s.terms()) {
        if (!first) os << " + ";
        first = false;
        Rational e = invert_variable ? -q : q;
        os << "(" << scalar_to_text(c) << ")";
        if (!e.is_zero()) os << "*" << var << "^(" << e.str() << ")";
    }
    return os.str();
}

} // namespace airy
