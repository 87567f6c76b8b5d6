#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "airy/json_io.hpp"
#include "airy/selftest.hpp"
#include "airy/text_parse.hpp"

namespace airy {

// Wrong invocation shape (as opposed to bad mathematical input).
struct UsageError : Error {
    using Error::Error;
};

// Parsed command line, independent of the flag parser.
struct JobConfig {
    enum class Command { Factors, Monodromy, Canonical, Equiv, Selftest };
    Command command = Command::Selftest;
    std::vector<std::string> operator_texts; // positional operator expressions
    std::vector<std::string> operator_files; // JSON operator files
    std::optional<Rational> order;
    std::string precision = "double"; // double | long | big:N
    double eps = 1e-9;
    bool json_output = false;
    bool strict = false;
};

namespace detail {

inline std::vector<AiryOperator> load_operators(const JobConfig& cfg) {
    std::vector<AiryOperator> ops;
    for (const auto& t : cfg.operator_texts) ops.push_back(parse_operator_text(t));
    for (const auto& f : cfg.operator_files) {
        std::ifstream in(f);
        if (!in) throw Error("cannot open operator file '" + f + "'");
        json j = json::parse(in, nullptr, true, true);
        ops.push_back(operator_from_json(j));
    }
    return ops;
}

template <class Real>
int run_typed(const JobConfig& cfg, std::ostream& out, std::ostream& err) {
    using Cfg = JobConfig;
    zero_tolerance() = cfg.eps;

    if (cfg.command == Cfg::Command::Selftest) {
        auto results = run_selftest<Real>();
        int failed = 0;
        for (const auto& r : results) {
            out << (r.ok ? "ok   " : "FAIL ") << r.name;
            if (!r.ok && !r.detail.empty()) out << "  (" << r.detail << ")";
            out << "\n";
            if (!r.ok) ++failed;
        }
        out << results.size() - failed << "/" << results.size() << " checks passed\n";
        return failed == 0 ? 0 : 1;
    }

    auto ops = load_operators(cfg);
    const bool is_equiv = cfg.command == Cfg::Command::Equiv;
    if (is_equiv && ops.size() != 2) throw UsageError("equiv needs exactly two operators");
    if (!is_equiv && ops.size() != 1) throw UsageError("expected exactly one operator");

    switch (cfg.command) {
        case Cfg::Command::Factors: {
            const auto& L = ops[0];
            int K = L.m() + L.n() - 1;
            if (cfg.order) {
                if (!cfg.order->is_integer() || cfg.order->num() < K)
                    throw Error("--order must be an integer >= m+n-1 for factors");
                K = static_cast<int>(cfg.order->num());
            }
            auto F = determining_factors<Real>(L, K);
            if (cfg.json_output) {
                out << factors_to_json(L, F).dump(2) << "\n";
            } else {
                out << "operator: " << operator_to_text(L) << "   (n=" << L.n()
                    << ", m=" << L.m() << ")\n";
                out << "slope at infinity: " << newton_slope(L).str() << "\n";
                out << "case: " << case_label(classify_case(L.n(), L.m()).kind) << "\n";
                for (const auto& f : F) {
                    out << "factor (branch " << f.source_branch << ", multiplicity "
                        << f.multiplicity << "):\n";
                    out << "  Q(z) = " << series_to_text(f.series, "z") << "\n";
                    out << "  Q(x) = " << series_to_text(f.series, "x", true) << "\n";
                }
            }
            return 0;
        }
        case Cfg::Command::Monodromy: {
            const auto& L = ops[0];
            auto M = monodromy_data<Real>(L);
            auto F = determining_factors<Real>(L);
            // cross-check the closed form against the indicial route
            auto br = branch_expand<Real>(L, 0, L.m() + 2 * L.n());
            if (indicial_exponent(L, br) != M.lambda)
                throw Error("internal: monodromy routes disagree");
            if (cfg.json_output) {
                out << monodromy_to_json(L, M, F).dump(2) << "\n";
            } else {
                out << "operator: " << operator_to_text(L) << "\n";
                out << "lambda = " << M.lambda.str() << "\n";
                out << "formal monodromy eigenvalue = " << scalar_to_text(M.eigenvalue) << "\n";
                out << "(the same lambda is attached to each of the " << F.size()
                    << " factors)\n";
            }
            return 0;
        }
        case Cfg::Command::Canonical: {
            const auto& L = ops[0];
            ReductionOptions opt;
            opt.order = cfg.order;
            opt.strict = cfg.strict;
            auto [M, steps] = bv_reduce<Real>(L, opt);
            if (cfg.json_output) {
                out << canonical_to_json(M, steps).dump(2) << "\n";
            } else {
                out << "operator: " << operator_to_text(L) << "\n";
                out << "case: " << M.case_label << (M.case_covered ? "" : "  [flagged]")
                    << "\n";
                out << "levels:";
                for (const auto& l : M.levels) out << " " << l.str();
                out << "\n";
                for (std::size_t k = 0; k < M.levels.size(); ++k) {
                    out << "D[" << M.levels[k].str() << "] = diag(";
                    for (int i = 0; i < M.n; ++i)
                        out << (i ? ", " : "") << scalar_to_text(M.level_matrices[k](i, i));
                    out << ")\n";
                }
                out << "residue C = diag(";
                for (int i = 0; i < M.n; ++i)
                    out << (i ? ", " : "") << scalar_to_text(M.residue(i, i));
                out << ")   lambda = " << M.lambda.str() << "\n";
                out << "gauge steps: " << steps.size() << "\n";
            }
            return 0;
        }
        case Cfg::Command::Equiv: {
            auto rep = formal_equivalence<Real>(ops[0], ops[1]);
            if (cfg.json_output) {
                out << equivalence_to_json(rep).dump(2) << "\n";
            } else {
                out << "operators:\n  " << operator_to_text(ops[0]) << "\n  "
                    << operator_to_text(ops[1]) << "\n";
                out << "same bidegree: " << (rep.same_bidegree ? "yes" : "no") << "\n";
                out << "case: " << rep.case_label << (rep.case_covered ? "" : "  [flagged]")
                    << "\n";
                for (const auto& c : rep.coefficient_conditions)
                    out << "  condition " << c.name << ": " << (c.holds ? "holds" : "fails")
                        << "\n";
                if (rep.same_bidegree) {
                    out << "factors match: " << (rep.factors_match ? "yes" : "no") << "\n";
                    out << "canonical orbit match: "
                        << (rep.canonical_orbit_match ? "yes" : "no") << "\n";
                }
                for (const auto& n : rep.notes) out << "note: " << n << "\n";
                out << "verdict: " << verdict_name(rep.verdict) << "\n";
            }
            return 0;
        }
        default:
            break;
    }
    err << "unknown command\n";
    return 2;
}

} // namespace detail

// Runs a parsed job; returns the process exit code (0 ok, 1 domain error).
inline int run(const JobConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.precision == "double") return detail::run_typed<double>(cfg, out, err);
        if (cfg.precision == "long" || cfg.precision.rfind("big:", 0) == 0) {
            if (cfg.precision.rfind("big:", 0) == 0)
                err << "note: big:N maps to extended hardware precision (long double)\n";
            return detail::run_typed<long double>(cfg, out, err);
        }
        throw UsageError("unknown precision mode '" + cfg.precision + "'");
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace airy
