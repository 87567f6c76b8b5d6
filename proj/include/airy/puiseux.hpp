#pragma once

#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "airy/config.hpp"
#include "airy/errors.hpp"
#include "airy/rational.hpp"

namespace airy {

// Truncated formal Puiseux/Laurent series in one variable z.
//
// Exponents are exact rationals, coefficients complex at working precision.
// A series knows up to which exponent it is trustworthy: coefficients at
// exponents >= truncation() are unknown, not zero.  truncation() == nullopt
// means the series is exact (a Laurent polynomial known to all orders).
// Stored coefficients are never numerically zero and never at or beyond the
// truncation bound.
template <class Real>
class PuiseuxSeries {
  public:
    using Scalar = std::complex<Real>;
    using TermMap = std::map<Rational, Scalar>;
    using Order = std::optional<Rational>; // nullopt: exact to all orders

    PuiseuxSeries() = default;

    PuiseuxSeries(TermMap terms, Order order, int ramification = 1)
        : terms_(std::move(terms)), order_(order), ram_(ramification) {
        normalize();
    }

    static PuiseuxSeries zero() { return PuiseuxSeries(); }
    static PuiseuxSeries zero_to(const Rational& order) {
        PuiseuxSeries s;
        s.order_ = order;
        return s;
    }
    static PuiseuxSeries one() { return constant(Scalar(1)); }
    static PuiseuxSeries constant(const Scalar& c) { return monomial(c, Rational(0)); }
    static PuiseuxSeries monomial(const Scalar& c, const Rational& q, Order order = std::nullopt) {
        TermMap t;
        t.emplace(q, c);
        return PuiseuxSeries(std::move(t), order);
    }

    const TermMap& terms() const { return terms_; }
    Order truncation() const { return order_; }
    bool is_exact() const { return !order_.has_value(); }
    int ramification() const { return ram_; }
    bool is_zero() const { return terms_.empty(); }

    // Least stored exponent; nullopt when no term is stored.
    std::optional<Rational> valuation() const {
        if (terms_.empty()) return std::nullopt;
        return terms_.begin()->first;
    }

    // Valuation used for truncation bookkeeping: a stored-zero series may
    // still have unknown terms starting at its truncation bound.
    Order effective_valuation() const {
        if (!terms_.empty()) return terms_.begin()->first;
        return order_; // nullopt for the exact zero: +infinity
    }

    Scalar coeff(const Rational& q) const {
        if (order_ && !(q < *order_))
            throw TruncationExceeded("coefficient of z^" + q.str() +
                                     " requested at/beyond truncation order " + order_->str());
        auto it = terms_.find(q);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    // Restrict the truncation bound (never extends knowledge).
    PuiseuxSeries truncated(const Rational& order) const {
        PuiseuxSeries r(*this);
        if (!r.order_ || order < *r.order_) r.order_ = order;
        r.normalize();
        return r;
    }

    PuiseuxSeries operator-() const {
        PuiseuxSeries r(*this);
        for (auto& [q, c] : r.terms_) c = -c;
        return r;
    }

    friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        TermMap t = a.terms_;
        for (const auto& [q, c] : b.terms_) {
            auto [it, inserted] = t.emplace(q, c);
            if (!inserted) it->second += c;
        }
        return PuiseuxSeries(std::move(t), min_order(a.order_, b.order_),
                             lcm_ll(a.ram_, b.ram_));
    }
    friend PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        return a + (-b);
    }

    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        // Result trustworthy below min(ord_a + val_b, ord_b + val_a).
        Order bound = min_order(shifted(a.order_, b.effective_valuation()),
                                shifted(b.order_, a.effective_valuation()));
        TermMap t;
        for (const auto& [qa, ca] : a.terms_)
            for (const auto& [qb, cb] : b.terms_) {
                Rational q = qa + qb;
                if (bound && !(q < *bound)) continue;
                auto [it, inserted] = t.emplace(q, ca * cb);
                if (!inserted) it->second += ca * cb;
            }
        return PuiseuxSeries(std::move(t), bound, lcm_ll(a.ram_, b.ram_));
    }

    friend PuiseuxSeries operator*(const Scalar& s, const PuiseuxSeries& a) {
        PuiseuxSeries r(a);
        for (auto& [q, c] : r.terms_) c *= s;
        r.normalize();
        return r;
    }
    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const Scalar& s) { return s * a; }

    PuiseuxSeries& operator+=(const PuiseuxSeries& o) { return *this = *this + o; }
    PuiseuxSeries& operator-=(const PuiseuxSeries& o) { return *this = *this - o; }
    PuiseuxSeries& operator*=(const PuiseuxSeries& o) { return *this = *this * o; }

    std::string str(const std::string& var = "z") const {
        if (terms_.empty()) return order_ ? "0 + O(" + var + "^" + order_->str() + ")" : "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [q, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.real();
            if (c.imag() != Real(0)) os << (c.imag() < Real(0) ? "-" : "+")
                                        << std::abs(c.imag()) << "i";
            os << ")";
            if (!q.is_zero()) os << var << "^" << q.str();
        }
        if (order_) os << " + O(" << var << "^" << order_->str() << ")";
        return os.str();
    }

  private:
    static Order min_order(const Order& a, const Order& b) {
        if (!a) return b;
        if (!b) return a;
        return std::min(*a, *b);
    }
    static Order shifted(const Order& o, const Order& v) {
        if (!o || !v) return std::nullopt;
        return *o + *v;
    }

    void normalize() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            bool beyond = order_ && !(it->first < *order_);
            if (beyond || nearly_zero(it->second))
                it = terms_.erase(it);
            else {
                ram_ = static_cast<int>(lcm_ll(ram_, it->first.den()));
                ++it;
            }
        }
        if (order_) ram_ = static_cast<int>(lcm_ll(ram_, order_->den()));
        if (ram_ < 1) ram_ = 1;
    }

    TermMap terms_;
    Order order_;
    int ram_ = 1;
};

// k-th power with truncation bookkeeping inherited from repeated products.
template <class Real>
PuiseuxSeries<Real> ps_pow(const PuiseuxSeries<Real>& a, int k) {
    if (k < 0) throw Error("ps_pow: negative exponent");
    auto r = PuiseuxSeries<Real>::one();
    for (int i = 0; i < k; ++i) r *= a;
    return r;
}

// Multiplicative inverse.  The leading coefficient must be nonzero.  When the
// input is exact and has more than one term the caller must supply the order
// up to which the (infinite) inverse is wanted.
template <class Real>
PuiseuxSeries<Real> ps_invert(const PuiseuxSeries<Real>& a,
                              std::optional<Rational> order = std::nullopt) {
    using Scalar = std::complex<Real>;
    if (a.is_zero()) throw ZeroLeadingCoefficient("ps_invert: zero series");
    const Rational v = *a.valuation();
    const Scalar lead = a.terms().begin()->second;

    if (a.terms().size() == 1 && a.is_exact()) {
        auto r = PuiseuxSeries<Real>::monomial(Scalar(1) / lead, -v);
        return order ? r.truncated(*order) : r;
    }

    // a = lead z^v (1 + u), val(u) > 0; invert the unit part by forward
    // substitution on the exponent grid.
    typename PuiseuxSeries<Real>::Order rbound; // for the result
    if (a.truncation()) rbound = *a.truncation() - v - v;
    if (order) rbound = rbound ? std::min(*rbound, *order) : order;
    if (!rbound)
        throw TruncationRequired("ps_invert: exact input with several terms needs a target order");
    const Rational ubound = *rbound + v; // order for the unit-part inverse

    std::map<Rational, Scalar> u; // unit part minus 1
    for (const auto& [q, c] : a.terms()) {
        if (q == v) continue;
        u.emplace(q - v, c / lead);
    }
    long long ram = a.ramification();
    for (const auto& [q, c] : u) ram = lcm_ll(ram, q.den());
    ram = lcm_ll(ram, ubound.den());

    std::map<Rational, Scalar> inv;
    inv.emplace(Rational(0), Scalar(1));
    const Rational step(1, ram);
    for (Rational e = step; e < ubound; e += step) {
        Scalar acc(0);
        for (const auto& [f, uc] : u) {
            if (!(f < e) && f != e) break;
            auto it = inv.find(e - f);
            if (it != inv.end()) acc += uc * it->second;
        }
        if (!nearly_zero(acc)) inv.emplace(e, -acc);
    }

    std::map<Rational, Scalar> out;
    for (const auto& [q, c] : inv) out.emplace(q - v, c / lead);
    return PuiseuxSeries<Real>(std::move(out), rbound, static_cast<int>(ram));
}

// d/dz: c z^q -> c q z^(q-1); an order bound drops by one.
template <class Real>
PuiseuxSeries<Real> ps_derive(const PuiseuxSeries<Real>& a) {
    typename PuiseuxSeries<Real>::TermMap t;
    for (const auto& [q, c] : a.terms()) {
        if (q.is_zero()) continue;
        t.emplace(q - Rational(1), c * q.template to<Real>());
    }
    typename PuiseuxSeries<Real>::Order o = a.truncation();
    if (o) o = *o - Rational(1);
    return PuiseuxSeries<Real>(std::move(t), o, a.ramification());
}

// D = z d/dz: c z^q -> c q z^q; truncation preserved.
template <class Real>
PuiseuxSeries<Real> theta_derive(const PuiseuxSeries<Real>& a) {
    typename PuiseuxSeries<Real>::TermMap t;
    for (const auto& [q, c] : a.terms()) {
        if (q.is_zero()) continue;
        t.emplace(q, c * q.template to<Real>());
    }
    return PuiseuxSeries<Real>(std::move(t), a.truncation(), a.ramification());
}

// Solve z dQ/dz = a for Q with integration constant 0.  A z^0 term would
// require a logarithm and is rejected.
template <class Real>
PuiseuxSeries<Real> ps_antiderive_theta(const PuiseuxSeries<Real>& a) {
    typename PuiseuxSeries<Real>::TermMap t;
    for (const auto& [q, c] : a.terms()) {
        if (q.is_zero())
            throw LogarithmicTerm("ps_antiderive_theta: z^0 term would integrate to a logarithm");
        t.emplace(q, c / q.template to<Real>());
    }
    return PuiseuxSeries<Real>(std::move(t), a.truncation(), a.ramification());
}

// Antiderivative in d/dz sense with integration constant 0: solve dQ/dz = a.
template <class Real>
PuiseuxSeries<Real> ps_antiderive(const PuiseuxSeries<Real>& a) {
    typename PuiseuxSeries<Real>::TermMap t;
    for (const auto& [q, c] : a.terms()) {
        if (q == Rational(-1))
            throw LogarithmicTerm("ps_antiderive: z^-1 term would integrate to a logarithm");
        t.emplace(q + Rational(1), c / (q + Rational(1)).template to<Real>());
    }
    typename PuiseuxSeries<Real>::Order o = a.truncation();
    if (o) o = *o + Rational(1);
    return PuiseuxSeries<Real>(std::move(t), o, a.ramification());
}

// Largest coefficient magnitude among stored terms.
template <class Real>
Real ps_max_abs(const PuiseuxSeries<Real>& a) {
    Real m(0);
    for (const auto& [q, c] : a.terms()) m = std::max(m, std::abs(c));
    return m;
}

// Coefficientwise distance over the union of exponents, compared below the
// common truncation bound only.
template <class Real>
Real ps_distance(const PuiseuxSeries<Real>& a, const PuiseuxSeries<Real>& b) {
    std::optional<Rational> bound;
    if (a.truncation()) bound = a.truncation();
    if (b.truncation()) bound = bound ? std::min(*bound, *b.truncation()) : b.truncation();
    Real m(0);
    auto scan = [&](const PuiseuxSeries<Real>& x, const PuiseuxSeries<Real>& y) {
        for (const auto& [q, c] : x.terms()) {
            if (bound && !(q < *bound)) continue;
            m = std::max(m, std::abs(c - y.coeff(q)));
        }
    };
    scan(a, b);
    scan(b, a);
    return m;
}

} // namespace airy
