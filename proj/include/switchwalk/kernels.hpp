#pragma once

// Transition kernels of a switching walk applied to windowed measures: the
// walk kernel P, the ladder-height kernel P_H (D for X1 and A' for X1'), the
// zero-crossing entrance kernels, and the dual kernel Q of P_H relative to nu.

#include "switchwalk/ladder.hpp"
#include "switchwalk/walk.hpp"

#include <map>
#include <optional>

namespace switchwalk {

enum class KernelId { P, P_H, cross_down, cross_up, Q };

inline const char* to_string(KernelId k) {
    switch (k) {
        case KernelId::P: return "P";
        case KernelId::P_H: return "P_H";
        case KernelId::cross_down: return "cross_down";
        case KernelId::cross_up: return "cross_up";
        case KernelId::Q: return "Q";
    }
    return "?";
}

template <Scalar T>
struct KernelImage {
    WindowDensity<T> input;
    WindowDensity<T> output;
    KernelId kernel_id = KernelId::P;
    // sup |output - input| over the common known region, if there is one.
    std::optional<Distance<T>> residual;
};

// phi -> phi_alpha^+ * plus_law + phi_alpha^- * minus_law
template <Scalar T>
WindowDensity<T> apply_switching(const WindowDensity<T>& phi, const FinitePmf<T>& plus_law,
                                 const FinitePmf<T>& minus_law, const Rational& alpha) {
    require_same_span(phi.span(), plus_law.span(), "apply kernel");
    require_same_span(phi.span(), minus_law.span(), "apply kernel");
    const auto plus = convolve(restrict(phi, SignRestriction{alpha, Sign::plus}), plus_law);
    const auto minus = convolve(restrict(phi, SignRestriction{alpha, Sign::minus}), minus_law);
    return plus + minus;
}

template <Scalar T>
KernelImage<T> make_image(const WindowDensity<T>& in, WindowDensity<T> out, KernelId id) {
    KernelImage<T> img{in, std::move(out), id, std::nullopt};
    const Index lo = std::max(img.input.known_lo(), img.output.known_lo());
    const Index hi = std::min(img.input.known_hi(), img.output.known_hi());
    const Index wlo = std::min(img.input.lo(), img.output.lo());
    const Index whi = std::max(img.input.hi(), img.output.hi());
    if (img.input.has_interior() && img.output.has_interior() && std::max(lo, wlo) <= std::min(hi, whi))
        img.residual = distance(img.output, img.input, Norm::sup);
    return img;
}

template <Scalar T>
KernelImage<T> apply_P(const WindowDensity<T>& phi, const WalkSpec& spec) {
    if (!spec.is_lattice()) throw PreconditionError("apply_P: kernel application needs a lattice spec");
    const auto& laws = spec.lattice();
    require_same_span(phi.span(), laws.span, "apply_P");
    const auto x1 = laws.x1.template cast<T>();
    const auto x1p = laws.x1p.template cast<T>();
    return make_image(phi, apply_switching(phi, x1, x1p, spec.alpha), KernelId::P);
}

template <Scalar T>
KernelImage<T> apply_PH(const WindowDensity<T>& phi, const LadderSystem<T>& ladders, const Rational& alpha) {
    return make_image(phi, apply_switching(phi, ladders.D, ladders.A_prime, alpha), KernelId::P_H);
}

// Finite kernel table: one (possibly defective) law per start state.
template <Scalar T>
struct KernelTable {
    Span span;
    KernelId id = KernelId::cross_down;
    std::map<Index, FinitePmf<T>> rows;
};

// phi -> sum_y phi({y}) row_y, on masses.
template <Scalar T>
FiniteMeasure<T> apply_table(const FiniteMeasure<T>& phi, const KernelTable<T>& table) {
    require_same_span(phi.span(), table.span, "apply_table");
    std::map<Index, T> out;
    for (Index y = phi.min_index(); !phi.empty() && y <= phi.max_index(); ++y) {
        const T w = phi.at(y);
        if (is_zero(w)) continue;
        const auto it = table.rows.find(y);
        if (it == table.rows.end()) throw PreconditionError("apply_table: no row for a charged state");
        const auto& row = it->second;
        for (Index z = row.min_index(); !row.empty() && z <= row.max_index(); ++z) {
            const T r = row.at(z);
            if (!is_zero(r)) out[z] += w * r;
        }
    }
    return FiniteMeasure<T>::from_atoms(phi.span(), out);
}

template <Scalar T>
struct CrossingKernels {
    KernelTable<T> down;  // from y >= 0 to the first state < 0
    KernelTable<T> up;    // from y < 0 to the first state >= 0
};

// Rows for every start in [min supp D, -1] (up) and [0, max supp A'] (down),
// which covers the supports of pi^- and pi^+.
template <Scalar T>
CrossingKernels<T> crossing_kernels(const WalkSpec& spec, const LadderSystem<T>& ladders) {
    if (!spec.is_lattice()) throw PreconditionError("crossing_kernels: lattice spec required");
    if (spec.alpha != 1)
        throw PreconditionError("crossing_kernels: the overshoot chain is only handled for alpha = 1 on a lattice");
    const Span& h = spec.lattice().span;
    CrossingKernels<T> k;
    k.down.span = k.up.span = h;
    k.down.id = KernelId::cross_down;
    k.up.id = KernelId::cross_up;
    const Index top = ladders.A_prime.empty() ? 0 : std::max<Index>(0, ladders.A_prime.max_index());
    const Index bottom = ladders.D.empty() ? -1 : std::min<Index>(-1, ladders.D.min_index());
    for (Index y = 0; y <= top; ++y) k.down.rows[y] = entrance_from_ladder(ladders.D_strict, y, Absorb::negatives);
    for (Index y = bottom; y <= -1; ++y)
        k.up.rows[y] = entrance_from_ladder(ladders.A_strict_prime, y, Absorb::nonnegatives);
    return k;
}

// Extended states (x, s): s is the coin value B at x. (x, s) is on the plus
// side when x > 0 or (x = 0 and s = 1).
struct ExtendedState {
    Index x = 0;
    int s = 0;
    bool plus_side() const { return x > 0 || (x == 0 && s == 1); }
    friend auto operator<=>(const ExtendedState&, const ExtendedState&) = default;
};

template <Scalar T>
T coin_weight(int s, const Rational& alpha) {
    const T a = from_rational<T>(alpha);
    return s == 1 ? a : T(T(1) - a);
}

template <Scalar T>
struct DualKernel {
    Span span;
    Rational alpha;
    std::map<ExtendedState, std::map<ExtendedState, T>> rows;
    T row_sum_residual{0};  // max |Q(y~, Z~) - 1| over y in supp(nu)
    T balance_residual{0};  // sup of the detailed-balance mismatch on the support grid
};

// Q((y,t), (x,s)) = s_alpha p(x)/p(y) P(y - D = x) for (x,s) on the plus side
// and s_alpha p(x)/p(y) P(y - A' = x) otherwise; p is the density of nu. Rows
// with p(y) = 0 are s_alpha delta_0.
template <Scalar T>
std::map<ExtendedState, T> dual_row(const LadderSystem<T>& ladders, const FiniteMeasure<T>& nu, const Rational& alpha,
                                    const ExtendedState& from) {
    require_same_span(nu.span(), ladders.D.span(), "dual_kernel_Q");
    const T hv = span_value<T>(nu.span());
    auto density = [&](Index x) { return nu.at(x) / hv; };
    std::map<ExtendedState, T> row;
    const T py = density(from.x);
    if (is_zero(py) || py < 0) {
        for (int s : {0, 1}) {
            const T w = coin_weight<T>(s, alpha);
            if (!is_zero(w)) row[{0, s}] = w;
        }
        return row;
    }
    for (Index x : support_of(nu)) {
        for (int s : {0, 1}) {
            const ExtendedState to{x, s};
            const T w = coin_weight<T>(s, alpha);
            if (is_zero(w)) continue;
            const T step = to.plus_side() ? ladders.D.at(from.x - x) : ladders.A_prime.at(from.x - x);
            if (is_zero(step)) continue;
            row[to] = w * density(x) / py * step;
        }
    }
    return row;
}

// Rows over supp(nu) x {0, 1} with the row-sum and detailed-balance residuals.
template <Scalar T>
DualKernel<T> dual_kernel_Q(const LadderSystem<T>& ladders, const FiniteMeasure<T>& nu, const Rational& alpha) {
    require_same_span(nu.span(), ladders.D.span(), "dual_kernel_Q");
    DualKernel<T> q;
    q.span = nu.span();
    q.alpha = alpha;
    const auto support = support_of(nu);

    for (Index y : support)
        for (int t : {0, 1}) q.rows[{y, t}] = dual_row(ladders, nu, alpha, {y, t});

    T worst_row(0);
    for (const auto& [from, row] : q.rows) {
        T s(0);
        for (const auto& [to, v] : row) s += v;
        worst_row = std::max(worst_row, abs_value(T(s - T(1))));
    }
    q.row_sum_residual = worst_row;

    // nu~(x,s) P~_H((x,s),(y,t)) against nu~(y,t) Q((y,t),(x,s)).
    T worst_balance(0);
    for (Index x : support) {
        for (int s : {0, 1}) {
            const ExtendedState xs{x, s};
            for (Index y : support) {
                for (int t : {0, 1}) {
                    const ExtendedState yt{y, t};
                    const T step = xs.plus_side() ? ladders.D.at(y - x) : ladders.A_prime.at(y - x);
                    const T lhs = coin_weight<T>(s, alpha) * nu.at(x) * coin_weight<T>(t, alpha) * step;
                    T qv(0);
                    const auto& row = q.rows.at(yt);
                    if (const auto it = row.find(xs); it != row.end()) qv = it->second;
                    const T rhs = coin_weight<T>(t, alpha) * nu.at(y) * qv;
                    worst_balance = std::max(worst_balance, abs_value(T(lhs - rhs)));
                }
            }
        }
    }
    q.balance_residual = worst_balance;
    return q;
}

}  // namespace switchwalk
