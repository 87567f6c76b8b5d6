#pragma once

#include <json.hpp>

#include "airy/branches.hpp"
#include "airy/monodromy.hpp"
#include "airy/operator.hpp"
#include "airy/reduction.hpp"

namespace airy {

using json = nlohmann::json;

// ---- primitives -----------------------------------------------------------

template <class Real>
json complex_to_json(const std::complex<Real>& c) {
    return json{{"re", static_cast<double>(c.real())}, {"im", static_cast<double>(c.imag())}};
}

template <class Real>
json series_to_json(const PuiseuxSeries<Real>& s) {
    json terms = json::array();
    for (const auto& [q, c] : s.terms()) {
        json t = complex_to_json(c);
        t["exponent"] = q.str();
        terms.push_back(std::move(t));
    }
    json out{{"terms", std::move(terms)}};
    out["truncation_order"] = s.truncation() ? json(s.truncation()->str()) : json(nullptr);
    return out;
}

template <class Real>
json matrix_to_json(const Matrix<Real>& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(complex_to_json<Real>(M(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- operator --------------------------------------------------------------

inline json operator_to_json(const AiryOperator& L) {
    json a = json::array(), b = json::array();
    for (const auto& x : L.a_coeffs()) a.push_back(x.str());
    for (const auto& x : L.b_coeffs()) b.push_back(x.str());
    return json{{"n", L.n()}, {"m", L.m()}, {"a", std::move(a)}, {"b", std::move(b)}};
}

inline AiryOperator operator_from_json(const json& j) {
    if (!j.contains("n") || !j.contains("m") || !j.contains("a") || !j.contains("b"))
        throw Error("operator JSON needs keys n, m, a, b");
    std::vector<Rational> a, b;
    for (const auto& x : j.at("a")) a.push_back(Rational::parse(x.get<std::string>()));
    for (const auto& x : j.at("b")) b.push_back(Rational::parse(x.get<std::string>()));
    return AiryOperator::validate(j.at("n").get<int>(), j.at("m").get<int>(), std::move(a),
                                  std::move(b));
}

// ---- reports ---------------------------------------------------------------

template <class Real>
json factors_to_json(const AiryOperator& L, const std::vector<DeterminingFactor<Real>>& F) {
    json fs = json::array();
    for (const auto& f : F) {
        json terms = json::array();
        for (const auto& [q, c] : f.series.terms()) {
            json t = complex_to_json(c);
            t["exponent"] = q.str();
            terms.push_back(std::move(t));
        }
        fs.push_back(json{{"branch", f.source_branch},
                          {"multiplicity", f.multiplicity},
                          {"terms", std::move(terms)}});
    }
    const auto info = classify_case(L.n(), L.m());
    return json{{"operator", operator_to_json(L)},
                {"slope", newton_slope(L).str()},
                {"case", case_label(info.kind)},
                {"factors", std::move(fs)}};
}

template <class Real>
json monodromy_to_json(const AiryOperator& L, const MonodromyData<Real>& M,
                       const std::vector<DeterminingFactor<Real>>& F) {
    json per_branch = json::array();
    for (const auto& f : F)
        per_branch.push_back(json{{"branch", f.source_branch},
                                  {"lambda", M.lambda.str()},
                                  {"multiplicity", f.multiplicity}});
    return json{{"operator", operator_to_json(L)},
                {"lambda", M.lambda.str()},
                {"eigenvalue", complex_to_json(M.eigenvalue)},
                {"per_branch", std::move(per_branch)},
                {"note", "the same exponent lambda is attached to every factor"}};
}

template <class Real>
json gauge_step_to_json(const GaugeStep<Real>& s) {
    using Step = GaugeStep<Real>;
    json out{{"kind", Step::kind_name(s.kind)}};
    switch (s.kind) {
        case Step::Kind::Shear: {
            out["s"] = s.delta.str();
            json e = json::array();
            for (const auto& q : s.exponents) e.push_back(q.str());
            out["exponents"] = std::move(e);
            break;
        }
        case Step::Kind::Monomial: {
            json e = json::array();
            for (const auto& q : s.exponents) e.push_back(q.str());
            out["exponents"] = std::move(e);
            break;
        }
        case Step::Kind::Constant:
            out["U"] = matrix_to_json(s.payload);
            break;
        default:
            out["delta"] = s.delta.str();
            out["T"] = matrix_to_json(s.payload);
            break;
    }
    return out;
}

template <class Real>
json canonical_to_json(const CanonicalModel<Real>& M, const std::vector<GaugeStep<Real>>& steps) {
    json levels = json::array();
    for (const auto& q : M.levels) levels.push_back(q.str());
    json D = json::array();
    for (const auto& mat : M.level_matrices) D.push_back(matrix_to_json(mat));
    json gs = json::array();
    for (const auto& s : steps) gs.push_back(gauge_step_to_json(s));
    return json{{"levels", std::move(levels)},
                {"D", std::move(D)},
                {"C", matrix_to_json(M.residue)},
                {"gauge_steps", std::move(gs)},
                {"lambda", M.lambda.str()},
                {"case", M.case_label},
                {"case_covered", M.case_covered}};
}

inline json equivalence_to_json(const EquivalenceReport& r) {
    json conds = json::array();
    for (const auto& c : r.coefficient_conditions)
        conds.push_back(json{{"name", c.name}, {"holds", c.holds}});
    return json{{"same_bidegree", r.same_bidegree},
                {"case", r.case_label},
                {"case_covered", r.case_covered},
                {"coefficient_conditions", std::move(conds)},
                {"factors_match", r.factors_match},
                {"canonical_orbit_match", r.canonical_orbit_match},
                {"verdict", verdict_name(r.verdict)},
                {"notes", r.notes}};
}

} // namespace airy
