#pragma once

// Renewal measures U = sum_n G^{*n} of one-sided (possibly defective) laws,
// the inverse map psi -> psi - psi * G, and the law of the supremum q * U_+.

#include "switchwalk/measures.hpp"

#include <optional>

namespace switchwalk {

template <Scalar T>
struct RenewalMeasure {
    WindowDensity<T> base;
    FinitePmf<T> generator;
    // nullopt when U has infinite mass (proper generator).
    std::optional<T> total_mass;
};

// U on the window [-width, 0] or [0, width], on the side G points to. A
// totally defective G gives delta_0 on [0, width].
template <Scalar T>
RenewalMeasure<T> renewal_measure(const FinitePmf<T>& g, Index width) {
    if (width < 0) throw PreconditionError("renewal_measure: negative window");
    if (!is_zero(g.at(0))) throw PreconditionError("renewal_measure: generator has an atom at 0");
    const bool descending = !g.empty() && g.max_index() < 0;
    if (!g.empty() && !descending && g.min_index() <= 0)
        throw PreconditionError("renewal_measure: generator has support on both sides of 0");

    const T inv_h = T(1) / span_value<T>(g.span());
    // u[j] is the density at j (ascending) or -j (descending).
    std::vector<T> u(static_cast<std::size_t>(width + 1), T(0));
    u[0] = inv_h;
    if (!g.empty()) {
        const Index kmin = descending ? -g.max_index() : g.min_index();
        const Index kmax = descending ? -g.min_index() : g.max_index();
        for (Index j = 1; j <= width; ++j) {
            T s(0);
            for (Index k = kmin; k <= std::min(kmax, j); ++k) {
                const T gk = g.at(descending ? -k : k);
                if (!is_zero(gk)) s += u[static_cast<std::size_t>(j - k)] * gk;
            }
            u[static_cast<std::size_t>(j)] = std::move(s);
        }
    }

    RenewalMeasure<T> r;
    r.generator = g;
    if (!is_zero(g.defect())) r.total_mass = T(1) / g.defect();
    const Tail<T> far = g.empty() ? Tail<T>::zero() : Tail<T>::unknown();
    if (descending) {
        std::vector<T> v(u.rbegin(), u.rend());
        r.base = WindowDensity<T>(g.span(), -width, std::move(v), -width, 0, far, Tail<T>::zero());
    } else {
        r.base = WindowDensity<T>(g.span(), 0, std::move(u), 0, width, Tail<T>::zero(), far);
    }
    return r;
}

template <Scalar T>
struct Deconvolution {
    WindowDensity<T> phi;
    bool is_signed = false;
};

inline constexpr double kSignedThreshold = 1e-9;

// Recovers phi from psi = phi + psi * G, i.e. phi = psi - psi * G, on the
// region where both terms are known.
template <Scalar T>
Deconvolution<T> renewal_deconvolve(const WindowDensity<T>& psi, const FinitePmf<T>& g) {
    require_same_span(psi.span(), g.span(), "renewal_deconvolve");
    Deconvolution<T> out;
    if (g.empty()) {
        out.phi = psi;
    } else {
        out.phi = psi - convolve(psi, g);
    }
    if (!out.phi.has_interior()) throw PreconditionError("renewal_deconvolve: window too small for a valid interior");
    out.is_signed = out.phi.is_signed(kSignedThreshold);
    return out;
}

template <Scalar T>
struct SupremumLaw {
    // Masses of M = sup_n S_n on [0, width]; the defect is the exact mass
    // beyond the window.
    FinitePmf<T> law;
    T q{0};
};

template <Scalar T>
SupremumLaw<T> supremum_law(const FinitePmf<T>& a_strict, Index width) {
    if (is_zero(a_strict.defect()) || to_double(a_strict.defect()) <= 1e-14)
        throw PreconditionError("supremum_law: strict ascending ladder law is proper, the supremum is infinite");
    if (!a_strict.empty() && a_strict.min_index() <= 0)
        throw PreconditionError("supremum_law: strict ascending ladder law must be positive");
    const auto u = renewal_measure(a_strict, width);
    SupremumLaw<T> out;
    out.q = a_strict.defect();
    const T h = span_value<T>(a_strict.span());
    std::vector<T> m;
    for (const auto& v : u.base.values()) m.push_back(out.q * v * h);
    out.law = FinitePmf<T>::from_measure(FiniteMeasure<T>(a_strict.span(), 0, std::move(m)));
    return out;
}

}  // namespace switchwalk
