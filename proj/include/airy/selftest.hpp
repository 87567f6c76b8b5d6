#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "airy/branches.hpp"
#include "airy/monodromy.hpp"
#include "airy/reduction.hpp"
#include "airy/text_parse.hpp"

namespace airy {

struct SelfTestResult {
    std::string name;
    bool ok;
    std::string detail;
};

// Invariant battery over a built-in operator list, exercising branch
// residuals, closed-form cross-checks, the two monodromy routes, and the
// reduction pipeline.  Used by the `selftest` CLI command.
template <class Real>
std::vector<SelfTestResult> run_selftest() {
    using Scalar = std::complex<Real>;
    std::vector<SelfTestResult> out;
    auto record = [&](const std::string& name, const std::function<bool(std::string&)>& fn) {
        std::string detail;
        bool ok = false;
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        out.push_back({name, ok, detail});
    };

    struct Item {
        const char* text;
    };
    const std::vector<Item> battery = {
        {"d^2 - x"},          {"d - x"},           {"d - x^3 + 2*x"},
        {"d^2 - x^2 - 1"},    {"d^2 + d - x^4"},   {"d^3 + d - x^2"},
        {"d^2 + 2*d - x^3"},  {"d^3 + d^2 - x^4"}, {"d^4 - x^2 - x"},
        {"d^3 - x^3 - 2*x"},  {"d^2 - x^5 + 1"},
    };

    for (const auto& item : battery) {
        const AiryOperator L = parse_operator_text(item.text);
        const int n = L.n(), m = L.m();
        const std::string tag = std::string("[") + item.text + "] ";

        record(tag + "newton slope", [&](std::string&) {
            return newton_slope(L) == Rational(n + m) / Rational(n);
        });

        record(tag + "branch residuals", [&](std::string& d) {
            for (int i = 0; i < n; ++i) {
                auto br = branch_expand<Real>(L, i, m + n);
                Real r = ps_max_abs(branch_residual(L, br));
                if (r > Real(1e-6)) {
                    std::ostringstream os;
                    os << "branch " << i << " residual " << static_cast<double>(r);
                    d = os.str();
                    return false;
                }
            }
            return true;
        });

        record(tag + "factors consistent", [&](std::string& d) {
            auto F = determining_factors<Real>(L); // built-in closed-form cross-check
            int total = 0;
            for (const auto& f : F) total += f.multiplicity;
            if (total != n) {
                d = "multiplicities sum to " + std::to_string(total);
                return false;
            }
            return true;
        });

        record(tag + "monodromy two-route", [&](std::string&) {
            auto br = branch_expand<Real>(L, 0, m + 2 * n);
            return indicial_exponent(L, br) == Rational((1 - n) * (n + m), 2 * n);
        });

        record(tag + "reduction replay", [&](std::string& d) {
            auto [M, steps] = bv_reduce<Real>(L);
            const Rational ceiling(m + 2 * n, n);
            auto A = companion_connection<Real>(L);
            for (const auto& s : steps) {
                A = apply_gauge_step(A, s);
                A = A.truncated(A.truncation() ? std::min(*A.truncation(), ceiling) : ceiling);
            }
            Real dist = sm_distance(A, M.to_series(ceiling));
            if (dist > Real(1e-7)) {
                std::ostringstream os;
                os << "replay distance " << static_cast<double>(dist);
                d = os.str();
                return false;
            }
            if (M.levels.empty() || M.levels.front() != Rational(-m, n) - Rational(2)) {
                d = "least level is off";
                return false;
            }
            return true;
        });

        record(tag + "factors from canonical diagonal", [&](std::string& d) {
            auto [M, steps] = bv_reduce<Real>(L);
            (void)steps;
            auto F = determining_factors<Real>(L);
            for (int i = 0; i < n; ++i) {
                auto Q = ps_antiderive(M.diagonal[i]);
                Real best(1e30);
                for (const auto& f : F) best = std::min(best, ps_distance(Q, f.series));
                if (best > Real(1e-6)) {
                    std::ostringstream os;
                    os << "diagonal " << i << " off by " << static_cast<double>(best);
                    d = os.str();
                    return false;
                }
            }
            // residue entries agree with the indicial exponent
            const Scalar lam(Rational((1 - n) * (n + m), 2 * n).template to<Real>());
            for (int i = 0; i < n; ++i)
                if (!M.case_covered) continue;
                else if (std::abs(M.residue(i, i) - lam) > Real(1e-8)) {
                    d = "residue entry deviates from lambda";
                    return false;
                }
            return true;
        });
    }
    return out;
}

} // namespace airy
