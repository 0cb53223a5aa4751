#pragma once

// Independent brute-force references used only by the tests. None of these
// go through the library's factorization, convolution or restriction code.

#include "switchwalk/ladder.hpp"
#include "switchwalk/montecarlo.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace oracle {

using switchwalk::Direction;
using switchwalk::Index;
using switchwalk::LadderKind;

// Plain list of (value, probability) for an increment law.
inline std::vector<std::pair<Index, double>> atoms_of(const switchwalk::FinitePmf<switchwalk::Rational>& x) {
    std::vector<std::pair<Index, double>> out;
    for (Index k = x.min_index(); k <= x.max_index(); ++k)
        if (x.at(k) != 0) out.emplace_back(k, switchwalk::to_double(x.at(k)));
    return out;
}

struct LadderDp {
    std::map<Index, double> absorbed;  // lower bounds on the ladder masses
    double leftover = 0.0;             // mass still in flight after the last step
};

// Propagates the law of the walk started at y, killed on entering the set
// `stopped`, for `steps` steps. Paths leaving [-level, level] are dropped into
// the leftover, so every absorbed mass is a lower bound and the error is at
// most `leftover`.
template <class Stop>
LadderDp propagate(const switchwalk::FinitePmf<switchwalk::Rational>& x, Index y, Stop stopped, int steps,
                   Index level) {
    const auto atoms = atoms_of(x);
    const auto slot = [level](Index s) { return static_cast<std::size_t>(s + level); };
    std::vector<double> alive(static_cast<std::size_t>(2 * level + 1), 0.0), next(alive.size());
    alive[slot(y)] = 1.0;
    LadderDp out;
    double dropped = 0.0;
    for (int n = 0; n < steps; ++n) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Index s = -level; s <= level; ++s) {
            const double m = alive[slot(s)];
            if (m == 0.0) continue;
            for (const auto& [k, p] : atoms) {
                const Index t = s + k;
                if (stopped(t)) out.absorbed[t] += m * p;
                else if (t > level || t < -level) dropped += m * p;
                else next[slot(t)] += m * p;
            }
        }
        alive.swap(next);
    }
    for (double m : alive) out.leftover += m;
    out.leftover += dropped;
    return out;
}

inline LadderDp ladder_dp(const switchwalk::FinitePmf<switchwalk::Rational>& x, Direction dir, LadderKind kind,
                          int steps, Index level) {
    return propagate(
        x, 0,
        [dir, kind](Index s) {
            if (dir == Direction::descending) return kind == LadderKind::weak ? s <= 0 : s < 0;
            return kind == LadderKind::weak ? s >= 0 : s > 0;
        },
        steps, level);
}

// First position in the absorbing side for a walk started at y.
inline LadderDp entrance_dp(const switchwalk::FinitePmf<switchwalk::Rational>& x, Index y, bool into_negatives,
                            int steps, Index level) {
    return propagate(
        x, y, [into_negatives](Index t) { return into_negatives ? t < 0 : t >= 0; }, steps, level);
}

// Kernel of a switching walk as an explicit transition list per state.
template <class T>
struct SwitchingKernel {
    std::vector<std::pair<Index, T>> plus;   // used from x > 0
    std::vector<std::pair<Index, T>> minus;  // used from x < 0
    T alpha;

    std::map<Index, T> row(Index x) const {
        std::map<Index, T> r;
        const auto add = [&](const std::vector<std::pair<Index, T>>& law, const T& w) {
            for (const auto& [k, p] : law) r[x + k] += w * p;
        };
        if (x > 0) add(plus, T(1));
        else if (x < 0) add(minus, T(1));
        else {
            add(plus, alpha);
            add(minus, T(T(1) - alpha));
        }
        return r;
    }

    // phi P by enumerating every (state, jump) pair.
    std::map<Index, T> apply(const std::map<Index, T>& phi) const {
        std::map<Index, T> out;
        for (const auto& [x, m] : phi)
            for (const auto& [y, p] : row(x)) out[y] += m * p;
        return out;
    }

    // phi P^2 by enumerating two-step paths x -> y -> z.
    std::map<Index, T> apply_two_steps(const std::map<Index, T>& phi) const {
        std::map<Index, T> out;
        for (const auto& [x, m] : phi)
            for (const auto& [y, p] : row(x))
                for (const auto& [z, q] : row(y)) out[z] += m * p * q;
        return out;
    }
};

template <class T>
std::vector<std::pair<Index, T>> law_list(const switchwalk::FinitePmf<T>& x) {
    std::vector<std::pair<Index, T>> out;
    for (Index k = x.min_index(); !x.empty() && k <= x.max_index(); ++k)
        if (!switchwalk::is_zero(x.at(k))) out.emplace_back(k, x.at(k));
    return out;
}

// Re-scan definitions for trajectory extraction, written as direct searches.
struct Rescan {
    std::vector<Index> ladder_times;
    std::vector<Index> crossing_steps;
    std::vector<Index> crossing_values;
};

inline Rescan rescan(const std::vector<Index>& y, const std::vector<std::uint8_t>& bits) {
    Rescan r;
    r.ladder_times.push_back(0);
    Index t = 0;
    while (true) {
        const Index h = y[static_cast<std::size_t>(t)];
        if (h == 0 && t >= static_cast<Index>(bits.size())) break;
        const bool le = h > 0 || (h == 0 && bits[static_cast<std::size_t>(t)]);
        Index found = -1;
        for (Index k = t + 1; k < static_cast<Index>(y.size()); ++k) {
            const Index v = y[static_cast<std::size_t>(k)];
            if ((le && v <= h) || (!le && v >= h)) {
                found = k;
                break;
            }
        }
        if (found < 0) break;
        r.ladder_times.push_back(found);
        t = found;
    }
    for (std::size_t k = 1; k < y.size(); ++k) {
        const bool up = y[k - 1] < 0 && y[k] >= 0;
        const bool down = y[k - 1] >= 0 && y[k] < 0;
        if (up || down) {
            r.crossing_steps.push_back(static_cast<Index>(k));
            r.crossing_values.push_back(y[k]);
        }
    }
    return r;
}

}  // namespace oracle
