#include "switchwalk/montecarlo.hpp"
#include "switchwalk/renewal.hpp"
#include "switchwalk/stationary.hpp"

#include "support/random_specs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace switchwalk;

namespace {

FinitePmf<Rational> law(std::map<Index, Rational> atoms) { return gen::pmf(atoms); }

FinitePmf<Rational> defective(std::map<Index, Rational> atoms) {
    auto m = FiniteMeasure<Rational>::from_atoms(Span{}, atoms);
    const Rational d = 1 - m.total();
    return FinitePmf<Rational>(m, d);
}

// Random law on {1..3} (or {-3..-1}) with total mass <= 1.
FinitePmf<Rational> random_one_sided(std::mt19937_64& rng, bool ascending, bool allow_defect) {
    std::uniform_int_distribution<int> w(0, 6);
    std::map<Index, Rational> atoms;
    int total = 0;
    for (Index k = 1; k <= 3; ++k) {
        const int v = w(rng);
        if (v) atoms[ascending ? k : -k] = v;
        total += v;
    }
    if (atoms.empty()) atoms[ascending ? 1 : -1] = total = 1;
    const int denom = allow_defect ? total + w(rng) : total;
    for (auto& [k, v] : atoms) v /= denom;
    return defective(atoms);
}

FiniteMeasure<Rational> random_nonnegative_measure(std::mt19937_64& rng, Index lo, Index hi) {
    std::uniform_int_distribution<int> w(0, 5);
    std::map<Index, Rational> atoms;
    for (Index k = lo; k <= hi; ++k)
        if (const int v = w(rng)) atoms[k] = Rational(v, 7);
    if (atoms.empty()) atoms[lo] = 1;
    return FiniteMeasure<Rational>::from_atoms(Span{}, atoms);
}

}  // namespace

TEST(RenewalMeasure, TotallyDefectiveGivesDelta) {
    const auto u = renewal_measure(FinitePmf<Rational>::totally_defective(Span{}), 10);
    EXPECT_EQ(u.base.value(0), 1);
    for (Index x = 1; x <= 15; ++x) EXPECT_EQ(u.base.value(x), 0);
    EXPECT_EQ(u.base.right_tail().kind, TailKind::zero);
    EXPECT_EQ(*u.total_mass, 1);
}

TEST(RenewalMeasure, DeterministicRenewalsCount) {
    const auto u = renewal_measure(law({{1, 1}}), 20);
    for (Index x = 0; x <= 20; ++x) EXPECT_EQ(u.base.value(x), 1);
    EXPECT_EQ(u.base.value(-1), 0);
    EXPECT_FALSE(u.total_mass.has_value());
    const auto down = renewal_measure(law({{-1, 1}}), 20);
    EXPECT_EQ(down.base.lo(), -20);
    for (Index x = -20; x <= 0; ++x) EXPECT_EQ(down.base.value(x), 1);
}

TEST(RenewalMeasure, GeometricMasses) {
    const auto u = renewal_measure(defective({{1, Rational(1, 2)}}), 30);
    Rational expected = 1;
    for (Index x = 0; x <= 30; ++x) {
        EXPECT_EQ(u.base.value(x), expected);
        expected /= 2;
    }
    EXPECT_EQ(*u.total_mass, 2);
}

TEST(RenewalMeasure, HaarScaling) {
    const Span h{Rational(1, 2)};
    const auto g = FinitePmf<Rational>(FiniteMeasure<Rational>::delta(h, 1), 0);
    const auto u = renewal_measure(g, 5);
    EXPECT_EQ(u.base.value(0), 2);
    EXPECT_EQ(u.base.mass_at(3), 1);
}

TEST(RenewalMeasure, Errors) {
    EXPECT_THROW(renewal_measure(law({{0, Rational(1, 2)}, {1, Rational(1, 2)}}), 5), PreconditionError);
    EXPECT_THROW(renewal_measure(law({{-1, Rational(1, 2)}, {1, Rational(1, 2)}}), 5), PreconditionError);
    EXPECT_THROW(renewal_measure(law({{1, 1}}), -1), PreconditionError);
}

TEST(RenewalMeasure, FixedPointHoldsExactly) {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 30; ++i) {
        const bool ascending = i % 2;
        const auto g = random_one_sided(rng, ascending, i % 3 == 0);
        const auto u = renewal_measure(g, 40);
        // U = delta_0 + U * G wherever the right side is known.
        const auto rhs = WindowDensity<Rational>::from_measure(FiniteMeasure<Rational>::delta(Span{}, 0)) +
                         convolve(u.base, g);
        const auto d = distance(u.base, rhs, Norm::sup);
        EXPECT_EQ(d.value, 0);
        EXPECT_GE(d.region_hi - d.region_lo, 38);
    }
}

TEST(RenewalMeasure, TotalMassOfDefectiveGenerator) {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 20; ++i) {
        const auto g = random_one_sided(rng, true, true).cast<double>();
        if (g.defect() < 0.05) continue;
        const auto u = renewal_measure(g, 2000);
        double sum = 0;
        for (double v : u.base.values()) sum += v;
        EXPECT_NEAR(sum, *u.total_mass, 1e-10);
        EXPECT_NEAR(*u.total_mass, 1.0 / (1.0 - g.total()), 1e-12);
    }
}

TEST(RenewalDeconvolve, DeltaGivesSignedDifference) {
    const auto g = law({{1, Rational(1, 2)}, {2, Rational(1, 2)}});
    const auto psi = WindowDensity<Rational>::from_measure(FiniteMeasure<Rational>::delta(Span{}, 0));
    const auto out = renewal_deconvolve(psi, g);
    EXPECT_TRUE(out.is_signed);
    EXPECT_EQ(out.phi.value(0), 1);
    EXPECT_EQ(out.phi.value(1), Rational(-1, 2));
    EXPECT_EQ(out.phi.value(2), Rational(-1, 2));
}

TEST(RenewalDeconvolve, CountingMeasureGivesDelta) {
    const auto g = law({{1, 1}});
    const auto out = renewal_deconvolve(renewal_measure(g, 25).base, g);
    EXPECT_FALSE(out.is_signed);
    EXPECT_EQ(out.phi.interior_lo(), out.phi.lo());
    EXPECT_GE(out.phi.interior_hi(), 25);
    EXPECT_EQ(out.phi.value(0), 1);
    for (Index x = 1; x <= out.phi.interior_hi(); ++x) EXPECT_EQ(out.phi.value(x), 0);
}

// Plus part of mu for the +-1 walk is the constant density 1/2 on [0, inf).
TEST(RenewalDeconvolve, HalfHaarGivesHalfDelta) {
    const WindowDensity<Rational> psi(Span{}, 0, std::vector<Rational>(31, Rational(1, 2)), 0, 30,
                                      Tail<Rational>::zero(), Tail<Rational>::unknown());
    const auto out = renewal_deconvolve(psi, law({{1, 1}}));
    EXPECT_EQ(out.phi.value(0), Rational(1, 2));
    for (Index x = 1; x <= out.phi.interior_hi(); ++x) EXPECT_EQ(out.phi.value(x), 0);
}

TEST(RenewalDeconvolve, RoundTripOnRandomMeasures) {
    std::mt19937_64 rng(57);
    for (int i = 0; i < 30; ++i) {
        const bool ascending = i % 2;
        const auto g = random_one_sided(rng, ascending, i % 3 == 0);
        const auto phi = ascending ? random_nonnegative_measure(rng, 0, 4) : random_nonnegative_measure(rng, -4, 0);
        const auto psi = convolve(renewal_measure(g, 40).base, phi);
        const auto back = renewal_deconvolve(psi, g);
        const auto want = WindowDensity<Rational>::from_measure(phi);
        const auto d = distance(back.phi, want, Norm::sup);
        EXPECT_EQ(d.value, 0);
        EXPECT_FALSE(back.is_signed);
        EXPECT_GE(d.region_hi - d.region_lo, 30);
    }
}

TEST(RenewalDeconvolve, TooSmallWindowThrows) {
    WindowDensity<Rational> psi(Span{}, 0, std::vector<Rational>(2, Rational(1)), 0, 1, Tail<Rational>::unknown(),
                                Tail<Rational>::unknown());
    EXPECT_THROW(renewal_deconvolve(psi, law({{3, 1}})), PreconditionError);
}

TEST(SupremumLaw, MonotoneWalk) {
    const auto s = supremum_law(FinitePmf<Rational>::totally_defective(Span{}), 10);
    EXPECT_EQ(s.law, law({{0, 1}}));
    EXPECT_EQ(s.q, 1);
}

TEST(SupremumLaw, Geometric) {
    const auto s = supremum_law(defective({{1, Rational(1, 2)}}), 20);
    Rational m(1, 2);
    for (Index k = 0; k <= 20; ++k) {
        EXPECT_EQ(s.law.at(k), m);
        m /= 2;
    }
    // Exactly the geometric tail beyond the window.
    EXPECT_EQ(s.law.defect(), Rational(1, 1 << 21));
}

TEST(SupremumLaw, RefusesProperLadder) { EXPECT_THROW(supremum_law(law({{1, 1}}), 10), PreconditionError); }

TEST(SupremumLaw, MatchesSimulatedRunningMaximum) {
    const auto x = law({{-2, Rational(2, 3)}, {1, Rational(1, 3)}});
    const auto f = wiener_hopf_factors<double>(x);
    const auto s = supremum_law(f.strict_ascending, 60);
    const std::uint64_t n = 1'000'000;
    const auto sample = sample_running_max(x, n, 120, 7);
    LatticeReference ref{s.law.atoms(), s.law.defect()};
    EXPECT_LT(tv_statistic(sample.counts, n, ref), 0.01);
}

TEST(RenewalMeasure, StabilizesLadderHeights) {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 20; ++i) {
        const auto spec = gen::random_walk_spec(rng, true);
        const auto& laws = spec.lattice();
        const auto sys = ladder_system<double>(laws.x1, laws.x1p, Rational(1));
        const auto n = nu(sys, 1e-12);
        const auto plus = restrict(n, SignRestriction{Rational(1), Sign::plus});
        const auto u = renewal_measure(sys.A_strict, 60);
        const auto stab = convolve(u.base, plus);
        ASSERT_TRUE(stab.has_interior());
        for (Index x = 0; x <= stab.interior_hi(); ++x) EXPECT_NEAR(stab.value(x), sys.p_prime, 1e-10) << x;
        EXPECT_GE(stab.interior_hi(), 50);
    }
}
