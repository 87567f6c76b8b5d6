// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.

#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "airy/cli.hpp"
#include "airy/reduction.hpp"

using namespace airy;
using PS = PuiseuxSeries<double>;
using Scalar = std::complex<double>;
using Mat = Matrix<double>;
using SM = SeriesMatrix<double>;

namespace {

std::mt19937 rng(20260808);

AiryOperator make_op(int n, int m, std::vector<long long> a, std::vector<long long> b) {
    std::vector<Rational> ra(a.begin(), a.end()), rb(b.begin(), b.end());
    return AiryOperator::validate(n, m, std::move(ra), std::move(rb));
}

AiryOperator random_op(int n, int m) {
    std::uniform_int_distribution<int> coef(-3, 3), lead(1, 3);
    std::vector<long long> a(n), b(m + 1);
    for (auto& x : a) x = coef(rng);
    a[n - 1] = 1;
    for (auto& x : b) x = coef(rng);
    b[m] = lead(rng);
    return make_op(n, m, a, b);
}

// Worst-case factor-multiset mismatch between two operators.
double factor_shift(const AiryOperator& A, const AiryOperator& B) {
    auto FA = determining_factors<double>(A);
    auto FB = determining_factors<double>(B);
    double worst = 0;
    for (const auto& f : FA) {
        double best = 1e300;
        for (const auto& g : FB) best = std::min(best, ps_distance(f.series, g.series));
        worst = std::max(worst, best);
    }
    return worst;
}

double canonical_shift(const AiryOperator& A, const AiryOperator& B) {
    auto [MA, sa] = bv_reduce<double>(A);
    auto [MB, sb] = bv_reduce<double>(B);
    (void)sa;
    (void)sb;
    double worst = 0;
    for (int i = 0; i < MA.n; ++i) {
        double best = 1e300;
        for (int j = 0; j < MB.n; ++j)
            best = std::min(best, ps_distance(MA.diagonal[i], MB.diagonal[j]));
        worst = std::max(worst, best);
    }
    return worst;
}

struct Harness {
    int failures = 0;
    void criterion(int number, const std::string& label,
                   const std::function<bool(std::string&)>& body) {
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << label;
        if (!ok && !detail.empty()) std::cout << "  [" << detail << "]";
        std::cout << std::endl;
        if (!ok) ++failures;
    }
};

bool close(const Scalar& a, const Scalar& b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

int main() {
    Harness h;

    // ------------------------------------------------------------------
    h.criterion(1, "classical Airy golden test (factors, lambda, eigenvalue)",
                [](std::string& d) {
        auto L = make_op(2, 1, {0, 1}, {0, 1});
        auto F = determining_factors<double>(L);
        if (F.size() != 2) {
            d = "expected two factors";
            return false;
        }
        std::vector<Scalar> lead;
        for (const auto& f : F) {
            if (f.series.terms().size() != 1) {
                d = "factor has extra terms";
                return false;
            }
            lead.push_back(f.series.coeff(Rational(-3, 2)));
        }
        std::sort(lead.begin(), lead.end(),
                  [](const Scalar& a, const Scalar& b) { return a.real() < b.real(); });
        if (!close(lead[0], Scalar(-2.0 / 3.0), 1e-9) || !close(lead[1], Scalar(2.0 / 3.0), 1e-9)) {
            d = "factor coefficients deviate";
            return false;
        }
        auto br = branch_expand<double>(L, 0, 5);
        if (indicial_exponent(L, br) != Rational(-3, 4)) {
            d = "lambda != -3/4";
            return false;
        }
        if (!close(monodromy_eigenvalue<double>(L), Scalar(0, 1), 1e-9)) {
            d = "eigenvalue != i";
            return false;
        }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(2, "first-order integration oracle on 10 random operators",
                [](std::string& d) {
        std::uniform_int_distribution<int> deg(1, 6), coef(-4, 4), lead(1, 4);
        for (int t = 0; t < 10; ++t) {
            const int m = deg(rng);
            std::vector<long long> b(m + 1);
            for (auto& x : b) x = coef(rng);
            b[m] = lead(rng);
            auto L = make_op(1, m, {1}, b);
            // exact primitive of Q_m pulled back to z: sum b_j z^-(j+1) / (j+1)
            PS::TermMap t2;
            for (int j = 0; j <= m; ++j)
                if (b[j] != 0)
                    t2.emplace(Rational(-(j + 1)), Scalar(double(b[j]) / double(j + 1)));
            PS oracle(std::move(t2), std::nullopt);
            auto F = determining_factors<double>(L);
            if (F.size() != 1) {
                d = "expected one factor";
                return false;
            }
            if (ps_distance(F[0].series, oracle) > 1e-9) {
                std::ostringstream os;
                os << "m=" << m << " distance " << ps_distance(F[0].series, oracle);
                d = os.str();
                return false;
            }
        }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(3, "branch residuals vanish for 20 random operators (n,m <= 5, K = m+n)",
                [](std::string& d) {
        std::uniform_int_distribution<int> deg(1, 5);
        for (int t = 0; t < 20; ++t) {
            const int n = deg(rng), m = deg(rng);
            auto L = random_op(n, m);
            for (int i = 0; i < n; ++i) {
                auto br = branch_expand<double>(L, i, m + n);
                double r = ps_max_abs(branch_residual(L, br));
                if (r > 1e-6) {
                    std::ostringstream os;
                    os << "n=" << n << " m=" << m << " branch " << i << " residual " << r;
                    d = os.str();
                    return false;
                }
            }
        }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(4, "closed-form systems agree with the expansion; case-3 round-trip",
                [](std::string& d) {
        // systems (A) and (B) against branch_expand at shared indices
        const std::vector<std::pair<int, int>> apairs{{2, 4}, {3, 3}, {2, 6}, {4, 4}, {3, 6}};
        for (auto [n, m] : apairs) {
            auto L = random_op(n, m);
            for (int i = 0; i < n; ++i) {
                auto sol = solve_system_A<double>(L, i);
                auto br = branch_expand<double>(L, i, m + n - 1);
                for (const auto& [k, v] : sol)
                    if (std::abs(br.alpha[k] - v) > 1e-8) {
                        d = "system (A) mismatch";
                        return false;
                    }
            }
        }
        const std::vector<std::pair<int, int>> bpairs{{2, 3}, {3, 4}, {2, 5}, {4, 6}, {3, 7}};
        for (auto [n, m] : bpairs) {
            auto L = random_op(n, m);
            for (int i = 0; i < n; ++i) {
                auto sol = solve_system_B<double>(L, i);
                auto br = branch_expand<double>(L, i, m + n - 1);
                for (const auto& [k, v] : sol)
                    if (k <= br.K() && std::abs(br.alpha[k] - v) > 1e-8) {
                        d = "system (B) mismatch";
                        return false;
                    }
            }
        }
        // system (S): recover a-coefficients on 20 random case-3 operators
        const std::vector<std::pair<int, int>> spairs{{3, 2}, {5, 2}, {4, 3}, {5, 3}, {7, 2}};
        int done = 0;
        while (done < 20)
            for (auto [n, m] : spairs) {
                auto L = random_op(n, m);
                const int q = n / m;
                auto br = branch_expand<double>(L, done % n, std::max(m + n - 1, (q + 1) * m));
                auto rec = recover_coefficients_S(L, br);
                for (int t = 1; t <= q + 1; ++t)
                    if (std::abs(rec[t - 1] - Scalar(L.a(n - t).to_double())) > 1e-8) {
                        d = "system (S) round-trip failed";
                        return false;
                    }
                ++done;
            }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(5, "monodromy two-route check over 2<=n<=5, 1<=m<=7",
                [](std::string& d) {
        for (int n = 2; n <= 5; ++n)
            for (int m = 1; m <= 7; ++m) {
                auto L = random_op(n, m);
                auto br = branch_expand<double>(L, (n + 3 * m) % n, m + 2 * n);
                if (indicial_exponent(L, br) != Rational((1 - n) * (n + m), 2 * n)) {
                    d = "lambda rounding mismatch";
                    return false;
                }
                auto S = shifted_operator(L, br);
                const Scalar a0 = br.alpha[0];
                const Scalar sig = (1.0 - n) / 2.0 * (n + m) * std::pow(a0, n - 1);
                const Scalar sub = double(n) * std::pow(a0, n - 1);
                if (std::abs(S.sigma - sig) > 1e-8 * std::max(1.0, std::abs(sig)) ||
                    std::abs(S.subprincipal - sub) > 1e-8 * std::abs(sub)) {
                    std::ostringstream os;
                    os << "leading coefficients of h_n/h_{n-1} deviate at n=" << n
                       << " m=" << m;
                    d = os.str();
                    return false;
                }
            }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(6, "reduction two-route check and Sylvester-solved first correction",
                [](std::string& d) {
        const std::vector<std::pair<int, int>> pairs{{2, 3}, {3, 4}, {3, 5}, {4, 3},
                                                     {2, 5}, {4, 6}, {5, 3}, {2, 7},
                                                     {3, 7}, {4, 7}};
        for (auto [n, m] : pairs) {
            auto L = random_op(n, m);
            const Rational r = Rational(-m, n) - Rational(2);
            const Rational order = r + Rational(3) + Rational(1, n);
            auto E = explicit_second_stage<double>(L, order);
            auto A1 = shear(companion_connection<double>(L), Rational(-m, n), hn_diagonal(n))
                          .truncated(order);
            auto B = airy_leading_basis<double>(L);
            auto [T, A2] = spectral_reduce_step(A1, Rational(1), B);
            if (sm_distance(A2.truncated(order), E) > 1e-8) {
                std::ostringstream os;
                os << "two-route distance at n=" << n << " m=" << m;
                d = os.str();
                return false;
            }

            // Sylvester route: T = ad(W) with ad^2 W = off-part, solved by
            // least squares; unique in the image of ad.
            Mat Ar = A1.coeff(r);
            Mat C = A1.coeff(r + Rational(1));
            auto [comm, off] = commutant_split(C, B);
            (void)comm;
            const int N = n * n;
            Mat ad = Mat::Zero(N, N);
            for (int c2 = 0; c2 < n; ++c2)
                for (int d2 = 0; d2 < n; ++d2) {
                    Mat Eb = Mat::Zero(n, n);
                    Eb(c2, d2) = Scalar(1);
                    Mat o = Ar * Eb - Eb * Ar;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) ad(i + n * j, c2 + n * d2) = o(i, j);
                }
            Eigen::VectorXcd rhs(N);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) rhs(i + n * j) = off(i, j);
            Eigen::VectorXcd W = (ad * ad).completeOrthogonalDecomposition().solve(rhs);
            Eigen::VectorXcd tv = ad * W;
            Mat Tsyl(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) Tsyl(i, j) = tv(i + n * j);
            if ((T - Tsyl).cwiseAbs().maxCoeff() > 1e-10) {
                d = "engine T_1 deviates from the Sylvester solution";
                return false;
            }
            // The textbook diagonal formula agrees after trace normalization
            // into the image of ad.
            const double ratio = (L.b(m - 1) / (Rational(n) * L.b(m))).to_double();
            Mat disp = Mat::Zero(n, n);
            for (int i = 0; i < n; ++i) disp(i, i) = Scalar(-ratio * i);
            Mat expect = disp - (disp.trace() / double(n)) * Mat::Identity(n, n);
            if ((Tsyl - expect).cwiseAbs().maxCoeff() > 1e-10) {
                d = "Sylvester T_1 deviates from the normalized closed form";
                return false;
            }
        }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(7, "canonical consistency in the m=nq+s case (n<=4, m<=9)",
                [](std::string& d) {
        for (int n = 2; n <= 4; ++n)
            for (int m = n + 1; m <= 9; ++m) {
                if (m % n == 0) continue;
                auto L = random_op(n, m);
                auto [M, steps] = bv_reduce<double>(L);
                (void)steps;
                if (!M.case_covered) {
                    d = "case not recognized";
                    return false;
                }
                if (M.lambda != Rational((1 - n) * (n + m), 2 * n)) {
                    d = "lambda mismatch";
                    return false;
                }
                const Scalar lam(M.lambda.to_double());
                for (int i = 0; i < n; ++i)
                    if (M.residue(i, i) != lam) {
                        d = "residue is not exactly lambda I";
                        return false;
                    }
                if (M.levels.empty() || M.levels.front() != Rational(-m, n) - Rational(2)) {
                    d = "least level mismatch";
                    return false;
                }
                auto F = determining_factors<double>(L);
                for (int i = 0; i < n; ++i) {
                    auto Q = ps_antiderive(M.diagonal[i]);
                    double best = 1e300;
                    for (const auto& f : F) best = std::min(best, ps_distance(Q, f.series));
                    if (best > 1e-6) {
                        std::ostringstream os;
                        os << "factor multiset mismatch at n=" << n << " m=" << m
                           << " (distance " << best << ")";
                        d = os.str();
                        return false;
                    }
                }
            }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(8, "dependence experiments: sensitive vs insensitive coefficients",
                [](std::string& d) {
        struct Probe {
            AiryOperator L;
            std::vector<int> outside_b, inside_b; // b-indices
            bool a_top_sensitive;                 // a_{n-1}
            std::vector<int> outside_a;           // a-indices
        };
        // factors, m = qn case: sensitive {a_{n-1}, b_m..b_{m-q}}
        Probe p1{make_op(3, 6, {2, -1, 1}, {1, 2, -1, 3, 1, -2, 2}), {0, 1, 2, 3}, {4, 5, 6},
                 true, {1}};
        // factors, m = qn + r case: sensitive {a_{n-1}, b_m..b_{m-q-1}}
        Probe p2{make_op(3, 5, {1, 2, 1}, {2, -1, 3, 1, -2, 1}), {0, 1, 2}, {3, 4, 5}, true,
                 {1}};
        for (const auto& p : {p1, p2}) {
            for (int j : p.outside_b) {
                auto b = p.L.b_coeffs();
                b[j] += Rational(1);
                auto M = AiryOperator::validate(p.L.n(), p.L.m(), p.L.a_coeffs(), b);
                if (factor_shift(p.L, M) > 1e-8) {
                    d = "insensitive b coefficient moved a factor";
                    return false;
                }
            }
            for (int i : p.outside_a) {
                auto a = p.L.a_coeffs();
                a[i - 1] += Rational(1);
                auto M = AiryOperator::validate(p.L.n(), p.L.m(), a, p.L.b_coeffs());
                if (factor_shift(p.L, M) > 1e-8) {
                    d = "insensitive a coefficient moved a factor";
                    return false;
                }
            }
            for (int j : p.inside_b) {
                auto b = p.L.b_coeffs();
                b[j] += Rational(1);
                auto M = AiryOperator::validate(p.L.n(), p.L.m(), p.L.a_coeffs(), b);
                if (factor_shift(p.L, M) < 1e-3) {
                    d = "sensitive b coefficient left the factors unchanged";
                    return false;
                }
            }
            if (p.a_top_sensitive) {
                auto a = p.L.a_coeffs();
                a[p.L.n() - 2] += Rational(1);
                auto M = AiryOperator::validate(p.L.n(), p.L.m(), a, p.L.b_coeffs());
                if (factor_shift(p.L, M) < 1e-3) {
                    d = "a_{n-1} left the factors unchanged";
                    return false;
                }
            }
        }
        // canonical model, m = nq + s case: sensitive {a_{n-1}, b_m..b_{m-q-1}}
        auto L = make_op(3, 5, {1, 2, 1}, {2, -1, 3, 1, -2, 1});
        for (int j : {0, 1, 2}) {
            auto b = L.b_coeffs();
            b[j] += Rational(1);
            auto M = AiryOperator::validate(3, 5, L.a_coeffs(), b);
            if (canonical_shift(L, M) > 1e-8) {
                d = "insensitive coefficient moved the canonical model";
                return false;
            }
        }
        for (int j : {3, 4, 5}) {
            auto b = L.b_coeffs();
            b[j] += Rational(1);
            auto M = AiryOperator::validate(3, 5, L.a_coeffs(), b);
            if (canonical_shift(L, M) < 1e-3) {
                d = "sensitive coefficient left the canonical model unchanged";
                return false;
            }
        }
        {
            auto a = L.a_coeffs();
            a[1] += Rational(1);
            auto M = AiryOperator::validate(3, 5, a, L.b_coeffs());
            if (canonical_shift(L, M) < 1e-3) {
                d = "a_{n-1} left the canonical model unchanged";
                return false;
            }
        }
        return true;
    });

    // ------------------------------------------------------------------
    h.criterion(9, "gauge algebra: cocycle, identity, and step replay",
                [](std::string& d) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        auto rm = [&](int k) {
            Mat M(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) M(i, j) = Scalar(u(rng), u(rng));
            return M;
        };
        for (int t = 0; t < 6; ++t) {
            auto L = random_op(2 + t % 3, 1 + (t * 5) % 6);
            const int n = L.n();
            auto A = companion_connection<double>(L).truncated(Rational(2));
            if (sm_distance(gauge(A, SM::identity(n)), A) > 1e-9) {
                d = "identity gauge moved the connection";
                return false;
            }
            auto P = SM::identity(n) + SM::from_constant(rm(n), Rational(1));
            auto Q = SM::identity(n) + SM::from_constant(rm(n), Rational(2));
            if (sm_distance(gauge(A, P * Q), gauge(gauge(A, Q), P)) > 1e-9) {
                d = "cocycle law violated";
                return false;
            }
        }
        // replay the recorded steps of bv_reduce
        const std::vector<std::pair<int, int>> pairs{{2, 3}, {3, 4}, {2, 5}, {4, 5}, {3, 8}};
        for (auto [n, m] : pairs) {
            auto L = random_op(n, m);
            auto [M, steps] = bv_reduce<double>(L);
            const Rational ceiling(m + 2 * n, n);
            auto A = companion_connection<double>(L);
            for (const auto& s : steps) {
                A = apply_gauge_step(A, s);
                A = A.truncated(A.truncation() ? std::min(*A.truncation(), ceiling) : ceiling);
            }
            if (sm_distance(A, M.to_series(ceiling)) > 1e-8) {
                std::ostringstream os;
                os << "replay distance at n=" << n << " m=" << m;
                d = os.str();
                return false;
            }
        }
        return true;
    });

    std::cout << (h.failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
              << 9 - h.failures << "/9)" << std::endl;
    return h.failures == 0 ? 0 : 1;
}
