#pragma once

// Invariant measures of a switching walk built from its ladder laws:
//   nu  invariant for the ladder-height kernel P_H (finite, bounded support)
//   mu  invariant for the walk kernel P, mu = U_+ * nu^+ + U'_- * nu^-
//   pi  invariant for the two-periodic chain of zero-crossing overshoots
// plus the normalized stationary law when mu is finite.

#include "switchwalk/kernels.hpp"
#include "switchwalk/renewal.hpp"

#include <optional>

namespace switchwalk {

template <Scalar T>
T negative_tolerance(double tol) {
    if constexpr (ScalarTraits<T>::is_exact) return T(0);
    else return 10.0 * tol;
}

// Keeps values in [-10 tol, 0) as 0 and rejects anything more negative.
template <Scalar T>
T checked_nonnegative(T v, double tol, const char* what) {
    if (v < 0) {
        if (v < -negative_tolerance<T>(tol)) throw NumericalError(std::string(what) + ": negative density");
        return T(0);
    }
    return v;
}

// Masses of nu; the density is
//   P(D < x) + P(A' > x) - 1 + a P(D = x) + (1 - a) P(A' = x).
template <Scalar T>
FiniteMeasure<T> nu(const FinitePmf<T>& d, const FinitePmf<T>& a_prime, const T& a, double tol = 1e-12) {
    require_same_span(d.span(), a_prime.span(), "nu");
    const Span& h = d.span();
    const T hv = span_value<T>(h);
    const Index lo = d.empty() ? 0 : std::min<Index>(0, d.min_index());
    const Index hi = a_prime.empty() ? 0 : std::max<Index>(0, a_prime.max_index());
    std::vector<T> m;
    for (Index x = lo; x <= hi; ++x) {
        const T dens = d.prob_lt(x) + a_prime.prob_gt(x) - T(1) + a * d.at(x) + (T(1) - a) * a_prime.at(x);
        m.push_back(checked_nonnegative(dens, tol, "nu") * hv);
    }
    return FiniteMeasure<T>(h, lo, std::move(m));
}

template <Scalar T>
FiniteMeasure<T> nu(const LadderSystem<T>& l, double tol = 1e-12) {
    return nu(l.D, l.A_prime, l.a, tol);
}

namespace detail {

template <Scalar T>
WindowDensity<T> lift_part(const RenewalMeasure<T>& u, const FiniteMeasure<T>& part) {
    if (part.empty()) {
        const auto& b = u.base;
        return WindowDensity<T>(b.span(), b.lo(), std::vector<T>(b.values().size(), T(0)), b.lo(), b.hi(),
                                Tail<T>::zero(), Tail<T>::zero());
    }
    return convolve(u.base, part);
}

}  // namespace detail

// phi -> U_+ * phi_alpha^+ + U'_- * phi_alpha^-
template <Scalar T>
WindowDensity<T> lift(const FiniteMeasure<T>& phi, const RenewalMeasure<T>& u_plus,
                      const RenewalMeasure<T>& u_minus_prime, const Rational& alpha) {
    require_same_span(phi.span(), u_plus.base.span(), "lift");
    require_same_span(phi.span(), u_minus_prime.base.span(), "lift");
    const auto plus = restrict(phi, SignRestriction{alpha, Sign::plus});
    const auto minus = restrict(phi, SignRestriction{alpha, Sign::minus});
    auto out = detail::lift_part(u_plus, plus) + detail::lift_part(u_minus_prime, minus);
    if (!out.has_interior()) throw PreconditionError("lift: window too small for a valid interior");
    return out;
}

template <Scalar T>
struct Unlifted {
    Deconvolution<T> plus;
    Deconvolution<T> minus;
};

// Inverse of lift: the lifted measure restricted to the plus side is
// U_+ * phi_alpha^+ (both carry alpha phi({0}) at 0), so phi_alpha^+ solves the
// renewal equation with generator A_s; likewise phi_alpha^- with D'_s.
template <Scalar T>
Unlifted<T> unlift(const WindowDensity<T>& psi, const FinitePmf<T>& a_strict, const FinitePmf<T>& d_strict_prime,
                   const Rational& alpha) {
    return {renewal_deconvolve(restrict(psi, SignRestriction{alpha, Sign::plus}), a_strict),
            renewal_deconvolve(restrict(psi, SignRestriction{alpha, Sign::minus}), d_strict_prime)};
}

// Overshoot measure, masses of the density
//   [P(D <= x) - P(D + A' <= x)] 1(x < 0) + [P(A' > x) - P(D + A' > x)] 1(x >= 0).
template <Scalar T>
FiniteMeasure<T> pi(const FinitePmf<T>& d, const FinitePmf<T>& a_prime, double tol = 1e-12) {
    require_same_span(d.span(), a_prime.span(), "pi");
    const Span& h = d.span();
    const T hv = span_value<T>(h);
    const auto sum = convolve(d, a_prime);
    const Index lo = d.empty() ? 0 : std::min<Index>(0, d.min_index());
    const Index hi = a_prime.empty() ? 0 : std::max<Index>(0, a_prime.max_index());
    std::vector<T> m;
    for (Index x = lo; x <= hi; ++x) {
        const T dens = x < 0 ? T(d.prob_le(x) - sum.prob_le(x)) : T(a_prime.prob_gt(x) - sum.prob_gt(x));
        m.push_back(checked_nonnegative(dens, tol, "pi") * hv);
    }
    return FiniteMeasure<T>(h, lo, std::move(m));
}

// Random-walk form p [P(X <= x) 1(x < 0) + P(X > x) 1(x >= 0)], as masses.
template <Scalar T>
FiniteMeasure<T> pi_rw(const FinitePmf<T>& x, const T& p) {
    const Span& h = x.span();
    const T hv = span_value<T>(h);
    const Index lo = std::min<Index>(0, x.min_index());
    const Index hi = std::max<Index>(0, x.max_index());
    std::vector<T> m;
    for (Index k = lo; k <= hi; ++k) m.push_back(p * (k < 0 ? x.prob_le(k) : x.prob_gt(k)) * hv);
    return FiniteMeasure<T>(h, lo, std::move(m));
}

// Normalized overshoot law of a continuous random walk: density
// F(x) 1(x < 0) + (1 - F(x)) 1(x >= 0), divided by E|X|.
class OvershootLaw {
public:
    explicit OvershootLaw(ContinuousLaw law);

    double normalizer() const { return abs_mean_; }  // E|X|
    double density(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    const ContinuousLaw& law() const { return law_; }

private:
    ContinuousLaw law_;
    double if0_ = 0.0;  // E X^-
    double abs_mean_ = 0.0;
};

template <Scalar T>
struct StationaryBundle {
    LadderSystem<T> ladders;
    FiniteMeasure<T> nu;
    WindowDensity<T> mu;
    std::optional<FiniteMeasure<T>> pi;  // alpha = 1 only
    RenewalMeasure<T> u_plus;
    RenewalMeasure<T> u_minus_prime;
    // Finite total mass of mu in the regime E X1 < 0 < E X1'.
    std::optional<T> mu_total_mass;
    Index window = 0;
    double tol = 1e-12;
};

// mu on [-window, window]; renewal measures are built wide enough that the
// whole window is exact.
template <Scalar T>
StationaryBundle<T> stationary_bundle(const WalkSpec& spec, Index window, const LadderOptions& opts = {}) {
    if (window < 1) throw PreconditionError("stationary_bundle: window must be >= 1");
    const auto& laws = spec.lattice();
    StationaryBundle<T> b;
    b.window = window;
    b.tol = opts.tol;
    b.ladders = ladder_system<T>(laws.x1, laws.x1p, spec.alpha, opts);
    const auto& l = b.ladders;
    b.nu = nu(l, opts.tol);
    const Index reach = std::max<Index>(1, std::max(-b.nu.min_index(), b.nu.max_index()));
    const Index width = window + reach;
    b.u_plus = renewal_measure(l.A_strict, width);
    b.u_minus_prime = renewal_measure(l.D_strict_prime, width);
    b.mu = lift(b.nu, b.u_plus, b.u_minus_prime, spec.alpha).cropped(-window, window);
    if (spec.is_random_walk()) {
        // The lifted measure is then a multiple of the Haar measure.
        const T p = l.p;
        bool flat = true;
        for (Index x = -window; x <= window; ++x)
            if (to_double(abs_value(T(b.mu.value(x) - p))) > 1e-12) flat = false;
        if (flat && b.mu.interior_lo() == -window && b.mu.interior_hi() == window)
            b.mu = WindowDensity<T>(b.mu.span(), -window, b.mu.values(), -window, window, Tail<T>::constant(p),
                                    Tail<T>::constant(p));
    }
    if (spec.alpha == 1) b.pi = pi(l.D, l.A_prime, opts.tol);
    if (laws.x1.mean() < 0 && laws.x1p.mean() > 0) {
        const auto plus = restrict(b.nu, SignRestriction{spec.alpha, Sign::plus});
        const auto minus = restrict(b.nu, SignRestriction{spec.alpha, Sign::minus});
        b.mu_total_mass = *b.u_plus.total_mass * plus.total() + *b.u_minus_prime.total_mass * minus.total();
    }
    return b;
}

template <Scalar T>
struct NormalizedMu {
    bool finite = false;
    T total_mass{0};
    // Probabilities of mu / mu(Z) on [lo, hi]; outside_mass is the rest.
    FiniteMeasure<T> law;
    T outside_mass{0};
};

// mu / mu(Z) on [-window, window] when mu is finite, else the infinite flag.
template <Scalar T>
NormalizedMu<T> normalize_mu(const StationaryBundle<T>& b) {
    NormalizedMu<T> out;
    if (!b.mu_total_mass) return out;
    out.finite = true;
    out.total_mass = *b.mu_total_mass;
    const T hv = span_value<T>(b.mu.span());
    std::vector<T> m;
    T inside(0);
    for (Index x = b.mu.lo(); x <= b.mu.hi(); ++x) {
        m.push_back(b.mu.value(x) * hv / out.total_mass);
        inside += m.back();
    }
    out.law = FiniteMeasure<T>(b.mu.span(), b.mu.lo(), std::move(m));
    out.outside_mass = T(1) - inside;
    if constexpr (!ScalarTraits<T>::is_exact) out.outside_mass = std::max(0.0, out.outside_mass);
    return out;
}

}  // namespace switchwalk
