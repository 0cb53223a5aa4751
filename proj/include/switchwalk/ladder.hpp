#pragma once

// First ladder heights of a lattice random walk with finitely supported
// increments, first-passage (entrance) laws, and Wiener-Hopf checks.
//
// Notation for a walk S with increment law X:
//   D    weak descending   S at the first k>0 with S_k <= 0
//   D_s  strict descending S at the first k>0 with S_k <  0
//   A    weak ascending    S at the first k>0 with S_k >= 0
//   A_s  strict ascending  S at the first k>0 with S_k >  0
// Each law is defective by the probability that the stopping time is infinite.

#include "switchwalk/measures.hpp"

#include <cstdint>

namespace switchwalk {

enum class Direction { ascending, descending };
enum class LadderKind { weak, strict };
enum class LadderMethod { wiener_hopf, truncated_solve };
enum class Absorb { negatives, nonnegatives };

inline const char* to_string(LadderMethod m) {
    return m == LadderMethod::wiener_hopf ? "wiener-hopf" : "truncated-solve";
}

struct LadderOptions {
    double tol = 1e-12;
    LadderMethod method = LadderMethod::wiener_hopf;
    Index initial_level = 16;
    Index max_level = Index(1) << 20;
};

template <Scalar T>
struct LadderLaw {
    FinitePmf<T> law;
    bool certified = false;
    // Bound on the error of any single mass (and of the defect).
    double tol_achieved = 0.0;
    // Truncation level of the absorbing-chain solve; 0 for the factorization.
    Index truncation_level = 0;
    LadderMethod method = LadderMethod::wiener_hopf;
};

// All four first-ladder laws of one walk, from a single factorization of
// 1 - E z^X = (1 - E z^{A_s}) (1 - E z^D).
template <Scalar T>
struct WienerHopfFactors {
    FinitePmf<T> weak_descending;
    FinitePmf<T> strict_descending;
    FinitePmf<T> weak_ascending;
    FinitePmf<T> strict_ascending;
    double residual = 0.0;
    bool certified = false;
};

// Throws InexactError for T = Rational when the factorization is irrational,
// PreconditionError for X == 0 a.s.
template <Scalar T>
WienerHopfFactors<T> wiener_hopf_factors(const FinitePmf<Rational>& x, double tol = 1e-12);

extern template WienerHopfFactors<double> wiener_hopf_factors<double>(const FinitePmf<Rational>&, double);
extern template WienerHopfFactors<Rational> wiener_hopf_factors<Rational>(const FinitePmf<Rational>&, double);

template <Scalar T>
const FinitePmf<T>& select(const WienerHopfFactors<T>& f, Direction dir, LadderKind kind) {
    if (dir == Direction::descending) return kind == LadderKind::weak ? f.weak_descending : f.strict_descending;
    return kind == LadderKind::weak ? f.weak_ascending : f.strict_ascending;
}

// Truncated absorbing-chain solve with level doubling (float64 only).
LadderLaw<double> ladder_law_truncated(const FinitePmf<Rational>& x, Direction dir, LadderKind kind,
                                       const LadderOptions& opts = {});

template <Scalar T>
LadderLaw<T> ladder_law(const FinitePmf<Rational>& x, Direction dir, LadderKind kind,
                        const LadderOptions& opts = {}) {
    if (opts.method == LadderMethod::truncated_solve) {
        if constexpr (std::is_same_v<T, double>) {
            return ladder_law_truncated(x, dir, kind, opts);
        } else {
            throw InexactError("truncated solve produces float64 results only");
        }
    }
    const auto f = wiener_hopf_factors<T>(x, opts.tol);
    LadderLaw<T> out;
    out.law = select(f, dir, kind);
    out.certified = f.certified;
    out.tol_achieved = f.residual;
    out.method = LadderMethod::wiener_hopf;
    return out;
}

// sup-norm residual of law(X) = law(A_s) + law(D) - law(A_s) * law(D).
template <Scalar T>
T wiener_hopf_residual(const FinitePmf<T>& x, const FinitePmf<T>& a_strict, const FinitePmf<T>& d_weak) {
    require_same_span(x.span(), a_strict.span(), "wiener_hopf_residual");
    require_same_span(x.span(), d_weak.span(), "wiener_hopf_residual");
    const FiniteMeasure<T> rhs = a_strict.atoms() + d_weak.atoms() - convolve(a_strict.atoms(), d_weak.atoms());
    return distance(x.atoms(), rhs, Norm::sup).value;
}

// Law of the first renewal point of start + G_1 + G_2 + ... on the absorbing
// side, where G is the strict ladder law pointing toward that side. This is
// exactly where the walk first enters the side, since every first entrance is
// a new strict record.
template <Scalar T>
FinitePmf<T> entrance_from_ladder(const FinitePmf<T>& strict_ladder, Index start, Absorb absorb) {
    const Span& h = strict_ladder.span();
    std::map<Index, T> landing;
    if (strict_ladder.empty()) return FinitePmf<T>::totally_defective(h);
    if (absorb == Absorb::negatives) {
        if (start < 0) throw PreconditionError("entrance_kernel: start must be >= 0 when absorbing into negatives");
        if (strict_ladder.max_index() >= 0) throw PreconditionError("entrance_kernel: ladder law must be negative");
        // visit[k] = P(renewal process visits k), k in [0, start]
        std::vector<T> visit(static_cast<std::size_t>(start + 1), T(0));
        visit[static_cast<std::size_t>(start)] = T(1);
        for (Index k = start; k >= 0; --k) {
            const T& vk = visit[static_cast<std::size_t>(k)];
            if (is_zero(vk)) continue;
            for (Index j = strict_ladder.min_index(); j <= strict_ladder.max_index(); ++j) {
                const T g = strict_ladder.at(j);
                if (is_zero(g)) continue;
                const Index next = k + j;
                if (next >= 0) visit[static_cast<std::size_t>(next)] += vk * g;
                else landing[next] += vk * g;
            }
        }
    } else {
        if (start >= 0) throw PreconditionError("entrance_kernel: start must be < 0 when absorbing into nonnegatives");
        if (strict_ladder.min_index() <= 0) throw PreconditionError("entrance_kernel: ladder law must be positive");
        std::vector<T> visit(static_cast<std::size_t>(-start), T(0));
        auto slot = [start](Index k) { return static_cast<std::size_t>(k - start); };
        visit[0] = T(1);
        for (Index k = start; k < 0; ++k) {
            const T& vk = visit[slot(k)];
            if (is_zero(vk)) continue;
            for (Index j = strict_ladder.min_index(); j <= strict_ladder.max_index(); ++j) {
                const T g = strict_ladder.at(j);
                if (is_zero(g)) continue;
                const Index next = k + j;
                if (next < 0) visit[slot(next)] += vk * g;
                else landing[next] += vk * g;
            }
        }
    }
    return FinitePmf<T>::from_measure(FiniteMeasure<T>::from_atoms(h, landing));
}

template <Scalar T>
FinitePmf<T> entrance_kernel(const FinitePmf<Rational>& x, Index start, Absorb absorb, const LadderOptions& opts = {}) {
    const auto f = wiener_hopf_factors<T>(x, opts.tol);
    return absorb == Absorb::negatives ? entrance_from_ladder(f.strict_descending, start, absorb)
                                       : entrance_from_ladder(f.strict_ascending, start, absorb);
}

// Ladder laws of a switching walk: D, A, A_s, D_s from S (increments X1) and
// A', D', A'_s, D'_s from S' (increments X1'), with the derived constants.
template <Scalar T>
struct LadderSystem {
    FinitePmf<T> D, A, A_strict, D_strict;
    FinitePmf<T> A_prime, D_prime, A_strict_prime, D_strict_prime;
    T p{0};        // P(D < 0)
    T p_prime{0};  // P(A' > 0)
    T a{0};        // p alpha / (p alpha + p' (1 - alpha))
    T q{0};        // 1 - |A_s|, P(sup S = 0)
    T q_prime{0};  // 1 - |D'_s|, P(inf S' = 0)
    Rational alpha{1};
    double tol_achieved = 0.0;
    Index truncation_level_used = 0;
    bool certified = false;
    LadderMethod method = LadderMethod::wiener_hopf;
};

template <Scalar T>
T switch_weight(const T& p, const T& p_prime, const Rational& alpha) {
    const T al = from_rational<T>(alpha);
    const T num = p * al;
    const T den = num + p_prime * (T(1) - al);
    if (is_zero(den)) throw ValidationError("switch weight a is 0/0: p*alpha = p'*(1-alpha) = 0");
    return num / den;
}

template <Scalar T>
LadderSystem<T> ladder_system(const FinitePmf<Rational>& x1, const FinitePmf<Rational>& x1p, const Rational& alpha,
                              const LadderOptions& opts = {});

extern template LadderSystem<double> ladder_system<double>(const FinitePmf<Rational>&, const FinitePmf<Rational>&,
                                                           const Rational&, const LadderOptions&);
extern template LadderSystem<Rational> ladder_system<Rational>(const FinitePmf<Rational>&,
                                                               const FinitePmf<Rational>&, const Rational&,
                                                               const LadderOptions&);

}  // namespace switchwalk
