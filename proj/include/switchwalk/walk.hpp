#pragma once

// Description of a switching random walk: increments X1 are used from
// positive states, X1' from negative states, and at 0 the walk uses X1 with
// probability alpha and X1' otherwise.

#include "switchwalk/measures.hpp"

#include <string>
#include <variant>
#include <vector>

namespace switchwalk {

enum class Family { normal, uniform, shifted_exponential, point };

const char* to_string(Family f);

// One component of a mixture: X = shift + scale * Exp(1); scale may be
// negative for a left-pointing exponential.
struct ExpComponent {
    double weight = 1.0;
    double shift = 0.0;
    double scale = 1.0;
};

// Named continuous increment family.
//   normal(a = mean, b = sd), uniform(a, b), point(a),
//   shifted_exponential(components)
struct ContinuousLaw {
    Family family = Family::normal;
    double a = 0.0;
    double b = 1.0;
    std::vector<ExpComponent> components;

    static ContinuousLaw normal(double mean, double sd);
    static ContinuousLaw uniform(double lo, double hi);
    static ContinuousLaw point(double value);
    static ContinuousLaw exponential_mixture(std::vector<ExpComponent> components);

    double mean() const;
    double cdf(double x) const;
    // int_{-inf}^x F(t) dt
    double integrated_cdf(double x) const;
    // Inverse CDF; used for sampling from uniforms.
    double quantile(double u) const;
    friend bool operator==(const ContinuousLaw&, const ContinuousLaw&);
};

struct LatticeLaws {
    Span base;          // step the user declared
    Index factor = 1;   // detected span = base * factor
    Span span;
    FinitePmf<Rational> x1;
    FinitePmf<Rational> x1p;
};

struct ContinuousLaws {
    ContinuousLaw x1;
    ContinuousLaw x1p;
};

struct WalkSpec {
    std::variant<LatticeLaws, ContinuousLaws> laws;
    Rational alpha{1};
    // True when every probability was given exactly (fractions or decimal
    // strings); such specs run on the exact backend.
    bool exact_input = true;

    bool is_lattice() const { return std::holds_alternative<LatticeLaws>(laws); }
    const LatticeLaws& lattice() const;
    const ContinuousLaws& continuous() const;
    bool is_random_walk() const;
};

// Builds a lattice spec from laws on the base lattice, re-indexing to the
// detected span and validating the oscillation condition.
WalkSpec lattice_spec(const FinitePmf<Rational>& x1, const FinitePmf<Rational>& x1p, const Rational& alpha,
                      bool exact_input = true);

// Continuous specs cannot be validated from the laws alone; the caller
// asserts the oscillation condition. Means are still checked for sign.
WalkSpec continuous_spec(const ContinuousLaw& x1, const ContinuousLaw& x1p, const Rational& alpha);

// Law on the base lattice from (index, probability) pairs.
FinitePmf<Rational> lattice_law(const Span& h, const std::vector<std::pair<Index, Rational>>& atoms);

}  // namespace switchwalk
