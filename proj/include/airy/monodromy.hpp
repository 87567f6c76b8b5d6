#pragma once

#include <vector>

#include "airy/branches.hpp"
#include "airy/operator.hpp"
#include "airy/puiseux.hpp"

namespace airy {

// Exponential-shift calculus: xi^[k] defined by xi^[0] = 1 and
// xi^[k+1] = xi xi^[k] + D(xi^[k]), with D = z d/dz.
template <class Real>
PuiseuxSeries<Real> xi_bracket(const PuiseuxSeries<Real>& xi, int k) {
    if (k < 0) throw Error("xi_bracket: negative order");
    auto b = PuiseuxSeries<Real>::one();
    for (int i = 0; i < k; ++i) b = xi * b + theta_derive(b);
    return b;
}

// Shifted operator L^xi = sum_k c_k (D + xi)^{n-k} = sum_k h_k D^{n-k}.
template <class Real>
struct ShiftedOperator {
    std::vector<PuiseuxSeries<Real>> h; // h_0..h_n
    std::complex<Real> sigma;           // leading coefficient of h_n
    std::complex<Real> subprincipal;    // leading coefficient of h_{n-1}
};

namespace detail {

inline long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace detail

// Builds the h_k series from a branch expanded to order K >= m + 2n and
// verifies the expected valuations:
//   val h_k = -k - km/n  (0 <= k <= n-1),
//   h_{n-1} leading coefficient n alpha_0^{n-1} at exponent (1-n)(n+m)/n,
//   h_n    leading coefficient sigma = ((1-n)/2)(n+m) alpha_0^{n-1} there.
// For n = 1 the shifted operator degenerates: h_1 vanishes identically and
// sigma = 0.
template <class Real>
ShiftedOperator<Real> shifted_operator(const AiryOperator& L, const Branch<Real>& br) {
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    if (br.K() < m + 2 * n)
        throw Error("shifted_operator: branch must be expanded to K >= m+2n");

    const auto c = fuchs_form<Real>(L);
    const auto xi = br.to_series(n, m);
    std::vector<PuiseuxSeries<Real>> bracket(n + 1);
    bracket[0] = PuiseuxSeries<Real>::one();
    for (int k = 1; k <= n; ++k) bracket[k] = xi * bracket[k - 1] + theta_derive(bracket[k - 1]);

    ShiftedOperator<Real> S;
    S.h.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        auto acc = PuiseuxSeries<Real>::zero();
        for (int i = 0; i <= k; ++i) {
            long long w = detail::binomial(n - i, k - i);
            if (w == 0) continue;
            acc += Scalar(Real(w)) * (c[i] * bracket[k - i]);
        }
        S.h[k] = acc;
    }

    // Valuation checks against the displayed system.
    const double tol = std::max(zero_tolerance(), 1e-12);
    for (int k = 0; k + 1 <= n; ++k) {
        const Rational expect = Rational(-k) - Rational(k * m, n);
        auto v = S.h[k].valuation();
        if (!v || *v != expect)
            throw ValuationMismatch("val(h_" + std::to_string(k) + ") = " +
                                    (v ? v->str() : std::string("inf")) + ", expected " +
                                    expect.str());
    }
    const Rational lead_exp = Rational((1 - n) * (n + m), n);
    {
        auto v = S.h[n - 1].valuation();
        if (!v || *v != lead_exp)
            throw ValuationMismatch("val(h_{n-1}) != -n-m+1+m/n");
        S.subprincipal = S.h[n - 1].coeff(lead_exp);
    }
    {
        // Everything in h_n below the expected leading exponent must cancel.
        for (const auto& [q, coef] : S.h[n].terms())
            if (q < lead_exp && std::abs(coef) > tol * Real(1e3))
                throw ValuationMismatch("h_n has an uncancelled term at z^" + q.str());
        if (S.h[n].truncation() && !(lead_exp < *S.h[n].truncation()))
            throw ValuationMismatch("h_n truncated before its leading exponent; increase K");
        S.sigma = S.h[n].coeff(lead_exp);
    }
    const Scalar expect_sub = Real(n) * std::pow(br.alpha[0], n - 1);
    const Scalar expect_sigma =
        Real(1 - n) / Real(2) * Real(n + m) * std::pow(br.alpha[0], n - 1);
    if (std::abs(S.subprincipal - expect_sub) > 1e-6 * std::abs(expect_sub))
        throw ValuationMismatch("h_{n-1} leading coefficient deviates from n alpha_0^{n-1}");
    if (std::abs(S.sigma - expect_sigma) > 1e-6 * std::max<Real>(std::abs(expect_sigma), Real(1)))
        throw ValuationMismatch("h_n leading coefficient deviates from ((1-n)/2)(n+m) alpha_0^{n-1}");
    return S;
}

// Indicial exponent of the shifted operator: the degree-1 indicial equation
// -lambda n alpha_0^{n-1} + sigma = 0 solved from the computed h-series, then
// rounded to the exact rational (1-n)(n+m)/(2n).  Rounding failure beyond the
// zero tolerance is a hard error.
template <class Real>
Rational indicial_exponent(const AiryOperator& L, const Branch<Real>& br) {
    const auto S = shifted_operator(L, br);
    const int n = L.n();
    const std::complex<Real> quotient = S.sigma / S.subprincipal;
    if (std::abs(quotient.imag()) > zero_tolerance())
        throw RationalRoundingFailure("indicial exponent has a nonreal part");
    Rational lambda;
    if (!round_to_rational(quotient.real(), 2LL * n, zero_tolerance(), lambda))
        throw RationalRoundingFailure("indicial exponent is not close to a rational of denominator <= 2n");
    return lambda;
}

// Formal-monodromy data: lambda = (1-n)(n+m)/(2n) and its eigenvalue
// exp(2 i pi lambda) = (-1)^{m+n-1} exp(i pi m/n).
template <class Real>
struct MonodromyData {
    Rational lambda;
    std::complex<Real> eigenvalue;
};

template <class Real>
std::complex<Real> monodromy_eigenvalue(const AiryOperator& L) {
    const Real pi = std::acos(Real(-1));
    const Real sign = ((L.m() + L.n() - 1) % 2 == 0) ? Real(1) : Real(-1);
    return sign * std::polar(Real(1), pi * Real(L.m()) / Real(L.n()));
}

template <class Real>
MonodromyData<Real> monodromy_data(const AiryOperator& L) {
    return {Rational((1 - L.n()) * (L.n() + L.m()), 2 * L.n()), monodromy_eigenvalue<Real>(L)};
}

} // namespace airy
