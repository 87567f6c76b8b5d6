#pragma once

#include <atomic>
#include <cmath>
#include <complex>

namespace airy {

// Engine-wide zero tolerance: a coefficient c is treated as numerically zero
// iff |c| <= zero_tolerance().  Single knob so tests can tighten it.
inline double& zero_tolerance() {
    static double eps = 1e-9;
    return eps;
}

template <class Real>
inline bool nearly_zero(const std::complex<Real>& c) {
    return std::abs(c) <= static_cast<Real>(zero_tolerance());
}

template <class Real>
inline bool nearly_zero(Real c) {
    return std::abs(c) <= static_cast<Real>(zero_tolerance());
}

// Scoped override, used by tests that need a different tolerance.
class ToleranceGuard {
  public:
    explicit ToleranceGuard(double eps) : saved_(zero_tolerance()) { zero_tolerance() = eps; }
    ~ToleranceGuard() { zero_tolerance() = saved_; }
    ToleranceGuard(const ToleranceGuard&) = delete;
    ToleranceGuard& operator=(const ToleranceGuard&) = delete;

  private:
    double saved_;
};

} // namespace airy
