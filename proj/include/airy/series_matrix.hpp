#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "airy/puiseux.hpp"

namespace airy {

template <class Real>
using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

// Square matrix with Puiseux-series entries; the carrier for connections.
template <class Real>
class SeriesMatrix {
  public:
    using PS = PuiseuxSeries<Real>;
    using Scalar = std::complex<Real>;

    SeriesMatrix() = default;
    explicit SeriesMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n) {}

    static SeriesMatrix zero(int n, std::optional<Rational> order = std::nullopt) {
        SeriesMatrix M(n);
        if (order)
            for (auto& x : M.e_) x = PS::zero_to(*order);
        return M;
    }
    static SeriesMatrix identity(int n, std::optional<Rational> order = std::nullopt) {
        auto M = zero(n, order);
        for (int i = 0; i < n; ++i)
            M.at(i, i) += PS::one();
        return M;
    }
    // M z^q as a series matrix.
    static SeriesMatrix from_constant(const Matrix<Real>& M, const Rational& q = Rational(0),
                                      std::optional<Rational> order = std::nullopt) {
        SeriesMatrix A(static_cast<int>(M.rows()));
        for (int i = 0; i < A.n_; ++i)
            for (int j = 0; j < A.n_; ++j)
                A.at(i, j) = PS::monomial(M(i, j), q, order);
        return A;
    }

    int size() const { return n_; }
    PS& at(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
    const PS& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }

    // Constant coefficient matrix at exponent q (entries absent => 0).
    Matrix<Real> coeff(const Rational& q) const {
        Matrix<Real> M(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                M(i, j) = at(i, j).coeff(q);
        return M;
    }

    // Least stored exponent over all entries.
    std::optional<Rational> valuation() const {
        std::optional<Rational> v;
        for (const auto& x : e_)
            if (auto w = x.valuation())
                if (!v || *w < *v) v = w;
        return v;
    }

    // Least truncation bound over all entries (nullopt: all exact).
    std::optional<Rational> truncation() const {
        std::optional<Rational> o;
        for (const auto& x : e_)
            if (auto t = x.truncation())
                if (!o || *t < *o) o = t;
        return o;
    }

    // Sorted union of exponents appearing in some entry.
    std::vector<Rational> support() const {
        std::vector<Rational> s;
        for (const auto& x : e_)
            for (const auto& [q, c] : x.terms()) s.push_back(q);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return s;
    }

    SeriesMatrix truncated(const Rational& order) const {
        SeriesMatrix M(n_);
        for (std::size_t k = 0; k < e_.size(); ++k) M.e_[k] = e_[k].truncated(order);
        return M;
    }

    friend SeriesMatrix operator+(const SeriesMatrix& A, const SeriesMatrix& B) {
        SeriesMatrix C(A.n_);
        for (std::size_t k = 0; k < A.e_.size(); ++k) C.e_[k] = A.e_[k] + B.e_[k];
        return C;
    }
    friend SeriesMatrix operator-(const SeriesMatrix& A, const SeriesMatrix& B) {
        SeriesMatrix C(A.n_);
        for (std::size_t k = 0; k < A.e_.size(); ++k) C.e_[k] = A.e_[k] - B.e_[k];
        return C;
    }
    friend SeriesMatrix operator*(const SeriesMatrix& A, const SeriesMatrix& B) {
        SeriesMatrix C(A.n_);
        for (int i = 0; i < A.n_; ++i)
            for (int j = 0; j < A.n_; ++j) {
                auto acc = PuiseuxSeries<Real>::zero();
                for (int k = 0; k < A.n_; ++k) acc += A.at(i, k) * B.at(k, j);
                C.at(i, j) = acc;
            }
        return C;
    }

    friend SeriesMatrix operator*(const Scalar& s, const SeriesMatrix& A) {
        SeriesMatrix C(A.n_);
        for (std::size_t k = 0; k < A.e_.size(); ++k) C.e_[k] = s * A.e_[k];
        return C;
    }

    SeriesMatrix derived() const { // entrywise d/dz
        SeriesMatrix C(n_);
        for (std::size_t k = 0; k < e_.size(); ++k) C.e_[k] = ps_derive(e_[k]);
        return C;
    }

    Real max_abs() const {
        Real m(0);
        for (const auto& x : e_) m = std::max(m, ps_max_abs(x));
        return m;
    }

  private:
    int n_ = 0;
    std::vector<PS> e_;
};

// Largest coefficient distance between two series matrices (entrywise,
// below the common truncation bounds).
template <class Real>
Real sm_distance(const SeriesMatrix<Real>& A, const SeriesMatrix<Real>& B) {
    Real m(0);
    for (int i = 0; i < A.size(); ++i)
        for (int j = 0; j < A.size(); ++j) m = std::max(m, ps_distance(A.at(i, j), B.at(i, j)));
    return m;
}

} // namespace airy
