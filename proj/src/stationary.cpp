#include "switchwalk/stationary.hpp"

#include <cmath>

namespace switchwalk {

OvershootLaw::OvershootLaw(ContinuousLaw law) : law_(std::move(law)) {
    if0_ = law_.integrated_cdf(0.0);
    // E|X| = E X^- + E X^+ and E X^+ = E X + E X^-.
    abs_mean_ = 2.0 * if0_ + law_.mean();
    if (!(abs_mean_ > 0)) throw PreconditionError("OvershootLaw: increment is degenerate at 0");
}

double OvershootLaw::density(double x) const {
    return (x < 0 ? law_.cdf(x) : 1.0 - law_.cdf(x)) / abs_mean_;
}

double OvershootLaw::cdf(double x) const {
    if (x < 0) return law_.integrated_cdf(x) / abs_mean_;
    // int_{-inf}^0 F + int_0^x (1 - F)
    const double v = (2.0 * if0_ + x - law_.integrated_cdf(x)) / abs_mean_;
    return std::min(1.0, v);
}

double OvershootLaw::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw PreconditionError("OvershootLaw::quantile: u must lie in (0, 1)");
    double lo = -1.0, hi = 1.0;
    while (cdf(lo) > u) lo *= 2.0;
    while (cdf(hi) < u) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace switchwalk
