#pragma once

#include <vector>

#include "airy/puiseux.hpp"
#include "airy/rational.hpp"

namespace airy {

// An Airy operator of bidegree (n, m):
//
//   L = P_n(d/dx) - Q_m(x),   P_n = sum_{i=1..n} a_i x^i (a_n = 1, no a_0),
//                             Q_m = sum_{j=0..m} b_j x^j (b_m != 0).
//
// Coefficients are exact rationals so that equivalence tests can compare them
// exactly; they are promoted to floating point only inside series arithmetic.
class AiryOperator {
  public:
    // Checked construction; the only way to obtain an instance.
    static AiryOperator validate(int n, int m, std::vector<Rational> a, std::vector<Rational> b) {
        if (n < 1 || m < 1) throw BadDegree("require n >= 1 and m >= 1");
        if (static_cast<int>(a.size()) != n)
            throw BadDegree("expected n coefficients a_1..a_n, got " + std::to_string(a.size()));
        if (static_cast<int>(b.size()) != m + 1)
            throw BadDegree("expected m+1 coefficients b_0..b_m, got " + std::to_string(b.size()));
        if (a.back() != Rational(1)) throw BadLeading("a_n must equal 1, got " + a.back().str());
        if (b.back() == Rational(0)) throw DegenerateDegree("b_m must be nonzero");
        return AiryOperator(n, m, std::move(a), std::move(b));
    }

    int n() const { return n_; }
    int m() const { return m_; }
    // 1-based: a(i) = a_i for 1 <= i <= n; a(0) returns 0 (P_n has no constant term).
    Rational a(int i) const { return i == 0 ? Rational(0) : a_.at(i - 1); }
    // 0-based: b(j) = b_j for 0 <= j <= m.
    Rational b(int j) const { return b_.at(j); }
    const std::vector<Rational>& a_coeffs() const { return a_; }
    const std::vector<Rational>& b_coeffs() const { return b_; }

    friend bool operator==(const AiryOperator& x, const AiryOperator& y) {
        return x.n_ == y.n_ && x.m_ == y.m_ && x.a_ == y.a_ && x.b_ == y.b_;
    }

  private:
    AiryOperator(int n, int m, std::vector<Rational> a, std::vector<Rational> b)
        : n_(n), m_(m), a_(std::move(a)), b_(std::move(b)) {}

    int n_, m_;
    std::vector<Rational> a_; // a_1..a_n ascending
    std::vector<Rational> b_; // b_0..b_m ascending
};

// sigma(h, j): elementary symmetric polynomial of degree h in 1..j-1, with
// sigma(0, j) = 1 and empty sums equal to 0.  Computed by dynamic programming
// over the generating product prod_{r=1}^{j-1} (1 + r T).
inline long long sigma(int h, int j) {
    if (h < 0 || j < 1) throw Error("sigma: require h >= 0 and j >= 1");
    if (h == 0) return 1;
    if (h > j - 1) return 0;
    std::vector<long long> coef(h + 1, 0);
    coef[0] = 1;
    for (long long r = 1; r <= j - 1; ++r)
        for (int d = std::min<int>(h, static_cast<int>(r)); d >= 1; --d)
            coef[d] += r * coef[d - 1];
    return coef[h];
}

// Frobenius-Fuchs form of (-1)^n x^n L at z = 1/x:  L(D,z) = sum c_k D^{n-k},
// D = z d/dz.  Returns c_0..c_n as exact Laurent polynomials, c_0 = 1.
template <class Real>
std::vector<PuiseuxSeries<Real>> fuchs_form(const AiryOperator& L) {
    using PS = PuiseuxSeries<Real>;
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    std::vector<PS> c;
    c.reserve(n + 1);
    for (int k = 0; k < n; ++k) {
        typename PS::TermMap t;
        for (int i = 0; i <= k; ++i) {
            long long s = sigma(k - i, n - i);
            if (s == 0) continue;
            Rational coef = L.a(n - i) * Rational(s) * Rational(i % 2 == 0 ? 1 : -1);
            if (coef == Rational(0)) continue;
            t.emplace(Rational(-i), Scalar(coef.template to<Real>()));
        }
        c.emplace_back(std::move(t), std::nullopt);
    }
    // c_n = (-1)^(n-1) z^-n Q_m(1/z)
    typename PS::TermMap t;
    const Real sign = (n % 2 == 1) ? Real(1) : Real(-1);
    for (int j = 0; j <= m; ++j) {
        if (L.b(j) == Rational(0)) continue;
        t.emplace(Rational(-n - j), Scalar(sign * L.b(j).template to<Real>()));
    }
    c.emplace_back(std::move(t), std::nullopt);
    return c;
}

// Symbol P_L(z, X) = sum_k c_k X^(n-k) of the Fuchs form.
template <class Real>
struct SymbolPoly {
    int n = 0;
    std::vector<PuiseuxSeries<Real>> c; // c_0..c_n, coefficient of X^(n-k)

    // Horner evaluation at a series X = xi.
    PuiseuxSeries<Real> eval(const PuiseuxSeries<Real>& xi) const {
        PuiseuxSeries<Real> acc = c.front();
        for (int k = 1; k <= n; ++k) acc = acc * xi + c[k];
        return acc;
    }
};

template <class Real>
SymbolPoly<Real> symbol(const AiryOperator& L) {
    return SymbolPoly<Real>{L.n(), fuchs_form<Real>(L)};
}

// Single Newton slope at infinity, mu = (n+m)/n, verified against the actual
// Newton polygon of the symbol: the lower hull of the points (k, val c_k)
// must consist of the single side of slope -mu.
inline Rational newton_slope(const AiryOperator& L) {
    const Rational mu = Rational(L.n() + L.m()) / Rational(L.n());
    auto c = fuchs_form<double>(L);
    std::vector<std::pair<long long, Rational>> pts; // (k, val c_k)
    for (int k = 0; k < static_cast<int>(c.size()); ++k)
        if (auto v = c[k].valuation()) pts.emplace_back(k, *v);
    if (pts.size() < 2 || pts.front().first != 0 || pts.back().first != L.n())
        throw InternalSlopeMismatch("degenerate symbol: endpoints of the polygon are missing");
    // Lower convex hull, left to right in k.
    std::vector<std::pair<long long, Rational>> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const auto& o = hull[hull.size() - 2];
            const auto& q = hull[hull.size() - 1];
            // keep q only if it lies strictly below segment o->p
            Rational lhs = (q.second - o.second) * Rational(p.first - o.first);
            Rational rhs = (p.second - o.second) * Rational(q.first - o.first);
            if (lhs < rhs) break;
            hull.pop_back();
        }
        hull.push_back(p);
    }
    if (hull.size() != 2)
        throw InternalSlopeMismatch("expected a single Newton polygon side, got " +
                                    std::to_string(hull.size() - 1));
    Rational slope = (hull[1].second - hull[0].second) / Rational(hull[1].first - hull[0].first);
    if (slope != -mu)
        throw InternalSlopeMismatch("polygon slope " + slope.str() + " != -(n+m)/n = " +
                                    (-mu).str());
    return mu;
}

} // namespace airy
