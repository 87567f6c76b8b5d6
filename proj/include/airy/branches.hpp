#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "airy/operator.hpp"
#include "airy/puiseux.hpp"

namespace airy {

// Case split of the closed-form triangular systems, driven by (n, m).
//   MultipleOfN : m = qn, q >= 1               (system A)
//   MixedM      : m = qn + r, q >= 1, 0 < r < n  (system B)
//   MixedN      : n = qm + r, q >= 1, 0 < r < m  (system S)
//   Boundary    : n = qm, q >= 2 exactly; no closed-form system applies,
//                 the general expansion is used and reports are flagged.
enum class OperatorCase { MultipleOfN, MixedM, MixedN, Boundary };

struct CaseInfo {
    OperatorCase kind;
    int q = 0;
    int r = 0;
};

inline CaseInfo classify_case(int n, int m) {
    if (m >= n) {
        if (m % n == 0) return {OperatorCase::MultipleOfN, m / n, 0};
        return {OperatorCase::MixedM, m / n, m % n};
    }
    if (n % m == 0) return {OperatorCase::Boundary, n / m, 0};
    return {OperatorCase::MixedN, n / m, n % m};
}

inline const char* case_label(OperatorCase c) {
    switch (c) {
        case OperatorCase::MultipleOfN: return "m=qn";
        case OperatorCase::MixedM: return "m=qn+r";
        case OperatorCase::MixedN: return "n=qm+r";
        default: return "n=qm (fallback)";
    }
}

// The n complex n-th roots of w, ordered by principal argument ascending.
template <class Real>
std::vector<std::complex<Real>> nth_roots(const std::complex<Real>& w, int n) {
    using Scalar = std::complex<Real>;
    const Real r = std::pow(std::abs(w), Real(1) / Real(n));
    const Real base = std::arg(w) / Real(n);
    const Real twopi = Real(2) * std::acos(Real(-1));
    std::vector<Scalar> roots;
    roots.reserve(n);
    for (int k = 0; k < n; ++k)
        roots.push_back(std::polar(r, base + twopi * Real(k) / Real(n)));
    std::sort(roots.begin(), roots.end(),
              [](const Scalar& x, const Scalar& y) { return std::arg(x) < std::arg(y); });
    return roots;
}

// Leading branch coefficients: the n roots of alpha_0^n = (-1)^n b_m,
// ordered by principal argument ascending.  Distinct since b_m != 0.
template <class Real>
std::vector<std::complex<Real>> leading_coefficients(const AiryOperator& L) {
    const Real sign = (L.n() % 2 == 0) ? Real(1) : Real(-1);
    return nth_roots(std::complex<Real>(sign * L.b(L.m()).template to<Real>()), L.n());
}

// One Puiseux branch of the symbol: xi = sum_k alpha_k z^{-1-(m-k)/n}.
template <class Real>
struct Branch {
    int root_index = 0;
    std::vector<std::complex<Real>> alpha; // alpha_0..alpha_K

    int K() const { return static_cast<int>(alpha.size()) - 1; }

    PuiseuxSeries<Real> to_series(int n, int m) const {
        typename PuiseuxSeries<Real>::TermMap t;
        for (int k = 0; k <= K(); ++k)
            t.emplace(Rational(k - n - m, n), alpha[k]);
        return PuiseuxSeries<Real>(std::move(t), Rational(K() + 1 - n - m, n), n);
    }
};

// Table of beta_{j,k}: xi^k = z^{-k(n+m)/n} sum_j beta_{j,k} z^{j/n}.
// Recurrence: beta_{j,1} = alpha_j, beta_{0,k} = alpha_0^k,
//             beta_{j,k+1} = sum_s alpha_s beta_{j-s,k}.
template <class Real>
struct BetaTable {
    int K = 0, n = 0;
    std::vector<std::complex<Real>> v; // (K+1) x (n+1), beta(j, k)

    const std::complex<Real>& beta(int j, int k) const { return v[j * (n + 1) + k]; }
    std::complex<Real>& beta(int j, int k) { return v[j * (n + 1) + k]; }
};

template <class Real>
BetaTable<Real> beta_table(const std::vector<std::complex<Real>>& alpha, int K, int n) {
    using Scalar = std::complex<Real>;
    if (alpha.empty() || nearly_zero(alpha[0]))
        throw Error("beta_table: alpha_0 must be nonzero");
    BetaTable<Real> T{K, n, std::vector<Scalar>(static_cast<std::size_t>(K + 1) * (n + 1), Scalar(0))};
    T.beta(0, 0) = Scalar(1); // xi^0 = 1
    for (int k = 1; k <= n; ++k)
        for (int j = 0; j <= K; ++j) {
            Scalar acc(0);
            const int smax = std::min<int>(j, static_cast<int>(alpha.size()) - 1);
            for (int s = 0; s <= smax; ++s) acc += alpha[s] * T.beta(j - s, k - 1);
            T.beta(j, k) = acc;
        }
    return T;
}

// General order-by-order expansion of one branch: alpha_j is solved from the
// linearized root equation n alpha_0^{n-1} alpha_j = -(residual coefficient).
// No case split; works for every valid operator.
template <class Real>
Branch<Real> branch_expand(const AiryOperator& L, int root_index, int K) {
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    if (root_index < 0 || root_index >= n) throw Error("branch_expand: root_index out of range");
    if (K < m + n - 1) throw Error("branch_expand: require K >= m+n-1");

    const auto roots = leading_coefficients<Real>(L);
    Branch<Real> br;
    br.root_index = root_index;
    br.alpha.assign(K + 1, Scalar(0));
    br.alpha[0] = roots[root_index];

    const Scalar linear = Real(n) * std::pow(br.alpha[0], n - 1);
    if (nearly_zero(linear))
        throw NonSimpleLinearization("linearization coefficient n alpha_0^{n-1} is numerically zero");

    const auto sym = symbol<Real>(L);
    for (int j = 1; j <= K; ++j) {
        // Evaluate with alpha_j provisionally zero; the slot is included so the
        // truncation bound reaches the equation at exponent -(n+m) + j/n.
        Branch<Real> partial{root_index,
                             std::vector<Scalar>(br.alpha.begin(), br.alpha.begin() + j + 1)};
        auto residual = sym.eval(partial.to_series(n, m));
        br.alpha[j] = -residual.coeff(Rational(j - n * (n + m), n)) / linear;
    }
    return br;
}

// Residual of a branch in the symbol; for a well-expanded branch every tracked
// coefficient is numerically zero.
template <class Real>
PuiseuxSeries<Real> branch_residual(const AiryOperator& L, const Branch<Real>& br) {
    return symbol<Real>(L).eval(br.to_series(L.n(), L.m()));
}

// Sparse triangular solution of system (A), case m = qn: values of
// alpha_0, alpha_n, ..., alpha_qn keyed by index.  All other alpha_k with
// 0 < k < m+n vanish.
template <class Real>
std::map<int, std::complex<Real>> solve_system_A(const AiryOperator& L, int root_index) {
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    const auto info = classify_case(n, m);
    if (info.kind != OperatorCase::MultipleOfN)
        throw WrongCase("system (A) requires m = qn");
    const int q = info.q;

    const auto roots = leading_coefficients<Real>(L);
    std::vector<Scalar> alpha(static_cast<std::size_t>(q * n) + 1, Scalar(0));
    alpha[0] = roots.at(root_index);
    const Scalar pivot = Real(n) * std::pow(alpha[0], n - 1);
    const Real sgn = (n % 2 == 0) ? Real(1) : Real(-1);

    for (int s = 1; s <= q; ++s) {
        // beta_{sn,n} with alpha_{sn} still zero isolates the linear term.
        auto T = beta_table(alpha, s * n, n);
        Scalar target = sgn * L.b(m - s).template to<Real>();
        if (s == q) target += L.a(n - 1).template to<Real>() * std::pow(alpha[0], n - 1);
        alpha[static_cast<std::size_t>(s) * n] = (target - T.beta(s * n, n)) / pivot;
    }

    std::map<int, Scalar> out;
    for (int s = 0; s <= q; ++s) out.emplace(s * n, alpha[static_cast<std::size_t>(s) * n]);
    return out;
}

// Sparse triangular solution of system (B), case m = qn + r with 0 < r < n:
// values at indices 0, n, ..., qn, m, (q+1)n.  All other alpha_k with
// 0 < k < m+n vanish.
template <class Real>
std::map<int, std::complex<Real>> solve_system_B(const AiryOperator& L, int root_index) {
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    const auto info = classify_case(n, m);
    if (info.kind != OperatorCase::MixedM)
        throw WrongCase("system (B) requires m = qn + r with 0 < r < n");
    const int q = info.q;

    const auto roots = leading_coefficients<Real>(L);
    std::vector<int> support;
    for (int s = 1; s <= q; ++s) support.push_back(s * n);
    support.push_back(m);
    support.push_back((q + 1) * n);
    std::sort(support.begin(), support.end());

    std::vector<Scalar> alpha(static_cast<std::size_t>((q + 1) * n) + 1, Scalar(0));
    alpha[0] = roots.at(root_index);
    const Scalar pivot = Real(n) * std::pow(alpha[0], n - 1);
    const Real sgn = (n % 2 == 0) ? Real(1) : Real(-1);
    const Scalar an1 = Scalar(L.a(n - 1).template to<Real>());

    for (int j : support) {
        auto T = beta_table(alpha, j, n);
        Scalar target(0);
        if (j % n == 0) target += sgn * L.b(m - j / n).template to<Real>();
        if (j >= m) target += an1 * T.beta(j - m, n - 1);
        alpha[j] = (target - T.beta(j, n)) / pivot;
    }

    std::map<int, Scalar> out;
    out.emplace(0, alpha[0]);
    for (int j : support) out.emplace(j, alpha[j]);
    return out;
}

// Determining factor attached to one branch: the solution Q of
// z dQ/dz = xi_{<0}, a polynomial in z^{-1/n} without constant term.
template <class Real>
struct DeterminingFactor {
    PuiseuxSeries<Real> series;
    int multiplicity = 1;
    int source_branch = 0;
};

namespace detail {

// Factor from an explicit list of branch coefficients alpha_k, k <= m+n-1:
// Q = -z^{-1-m/n} sum_k (n alpha_k / (n+m-k)) z^{k/n}.
template <class Real>
PuiseuxSeries<Real> factor_from_alphas(const std::map<int, std::complex<Real>>& alphas, int n,
                                       int m) {
    typename PuiseuxSeries<Real>::TermMap t;
    for (const auto& [k, a] : alphas) {
        if (k >= m + n) continue;
        t.emplace(Rational(k - n - m, n), -Real(n) / Real(n + m - k) * a);
    }
    // Exact polynomial in z^{-1/n}: nothing beyond these terms.
    return PuiseuxSeries<Real>(std::move(t), std::nullopt, n);
}

} // namespace detail

// One factor per branch, grouped by coefficientwise equality within 10 eps.
// When a closed-form system applies its output is cross-checked against the
// general expansion; a disagreement indicates an internal bug.
template <class Real>
std::vector<DeterminingFactor<Real>> determining_factors(const AiryOperator& L, int K = -1) {
    const int n = L.n(), m = L.m();
    if (K < 0) K = m + n - 1;
    if (K < m + n - 1) throw Error("determining_factors: require K >= m+n-1");
    const auto info = classify_case(n, m);
    const double check_tol = std::max(10 * zero_tolerance(), 1e-10);

    std::vector<PuiseuxSeries<Real>> per_branch;
    for (int i = 0; i < n; ++i) {
        auto br = branch_expand<Real>(L, i, K);
        std::map<int, std::complex<Real>> alphas;
        for (int k = 0; k <= br.K(); ++k) alphas.emplace(k, br.alpha[k]);
        auto fac = detail::factor_from_alphas<Real>(alphas, n, m);

        if (info.kind == OperatorCase::MultipleOfN || info.kind == OperatorCase::MixedM) {
            auto closed = info.kind == OperatorCase::MultipleOfN ? solve_system_A<Real>(L, i)
                                                                 : solve_system_B<Real>(L, i);
            auto fast = detail::factor_from_alphas<Real>(closed, n, m);
            if (ps_distance(fac, fast) > check_tol)
                throw Error("internal: closed-form factor disagrees with the general expansion");
        }
        per_branch.push_back(std::move(fac));
    }

    // Conservative grouping: multiplicity 1 unless coefficient lists coincide.
    std::vector<DeterminingFactor<Real>> out;
    for (int i = 0; i < n; ++i) {
        bool merged = false;
        for (auto& f : out)
            if (ps_distance(f.series, per_branch[i]) <= 10 * zero_tolerance()) {
                ++f.multiplicity;
                merged = true;
                break;
            }
        if (!merged) out.push_back({per_branch[i], 1, i});
    }
    return out;
}

// Triangular solve of system (S), case n = qm + r with 0 < r < m: recovers
// (a_{n-1}, ..., a_{n-(q+1)}) from the beta data of one expanded branch.
template <class Real>
std::vector<std::complex<Real>> recover_coefficients_S(const AiryOperator& L,
                                                       const Branch<Real>& br) {
    using Scalar = std::complex<Real>;
    const int n = L.n(), m = L.m();
    const auto info = classify_case(n, m);
    if (info.kind != OperatorCase::MixedN)
        throw WrongCase("system (S) requires n = qm + r with 0 < r < m");
    const int q = info.q;
    if (br.K() < (q + 1) * m)
        throw Error("recover_coefficients_S: branch must be expanded to K >= (q+1)m");

    auto T = beta_table(br.alpha, (q + 1) * m, n);
    std::vector<Scalar> a(q + 2, Scalar(0)); // a[t] = a_{n-t}, t = 1..q+1
    for (int t = 1; t <= q + 1; ++t) {
        Scalar rhs = T.beta(t * m, n);
        for (int k = 1; k < t; ++k)
            rhs += (k % 2 == 0 ? Scalar(1) : Scalar(-1)) * a[k] * T.beta((t - k) * m, n - k);
        const Scalar pivot = T.beta(0, n - t);
        if (nearly_zero(pivot))
            throw SingularSystem("system (S): pivot beta_{0," + std::to_string(n - t) +
                                 "} is numerically zero");
        a[t] = (t % 2 == 0 ? Scalar(-1) : Scalar(1)) * rhs / pivot;
    }
    return std::vector<Scalar>(a.begin() + 1, a.end());
}

} // namespace airy
