#include "switchwalk/kernels.hpp"
#include "switchwalk/stationary.hpp"

#include "support/oracles.hpp"
#include "support/random_specs.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace switchwalk;

namespace {

FinitePmf<Rational> law(std::map<Index, Rational> atoms) { return gen::pmf(atoms); }
FiniteMeasure<Rational> atoms(std::map<Index, Rational> m) { return FiniteMeasure<Rational>::from_atoms(Span{}, m); }
WindowDensity<Rational> density_of(std::map<Index, Rational> m) { return WindowDensity<Rational>::from_measure(atoms(m)); }

const FinitePmf<Rational> kMinusOne = law({{-1, 1}});
const FinitePmf<Rational> kPlusMinusOne = law({{-1, Rational(1, 2)}, {1, Rational(1, 2)}});
const FinitePmf<Rational> kSkew = law({{-2, Rational(1, 3)}, {1, Rational(2, 3)}});

const WalkSpec kDeterministic = lattice_spec(kMinusOne, kMinusOne.reflected(), 1);
const WalkSpec kSkewPair = lattice_spec(kSkew, kSkew.reflected(), 1);

std::map<Index, Rational> as_map(const WindowDensity<Rational>& w) {
    std::map<Index, Rational> m;
    for (Index x = w.lo(); x <= w.hi(); ++x)
        if (w.value(x) != 0) m[x] = w.value(x);
    return m;
}

std::map<Index, Rational> as_map(const FiniteMeasure<Rational>& w) {
    std::map<Index, Rational> m;
    for (Index x = w.min_index(); !w.empty() && x <= w.max_index(); ++x)
        if (w.at(x) != 0) m[x] = w.at(x);
    return m;
}

// Random compact measure on the spec's lattice.
FiniteMeasure<Rational> random_measure(std::mt19937_64& rng, const WalkSpec& spec, Index reach) {
    const auto m = gen::random_law(rng, reach).atoms();
    return FiniteMeasure<Rational>(spec.lattice().span, m.lo(), m.masses());
}

std::map<Index, Rational> nonzero(std::map<Index, Rational> m) {
    std::erase_if(m, [](const auto& kv) { return kv.second == 0; });
    return m;
}

oracle::SwitchingKernel<Rational> oracle_kernel(const WalkSpec& spec) {
    const auto& l = spec.lattice();
    return {oracle::law_list(l.x1), oracle::law_list(l.x1p), spec.alpha};
}

// Random spec that has an exact factorization, for exact-backend checks.
std::pair<WalkSpec, LadderSystem<Rational>> exact_spec(std::mt19937_64& rng, bool alpha_one) {
    for (;;) {
        auto spec = gen::random_switching_spec(rng, alpha_one);
        try {
            auto l = ladder_system<Rational>(spec.lattice().x1, spec.lattice().x1p, spec.alpha);
            return {spec, l};
        } catch (const InexactError&) {
        }
    }
}

}  // namespace

TEST(ApplyP, DeterministicTwoCycle) {
    const auto img = apply_P(density_of({{-1, 1}, {0, 1}}), kDeterministic);
    EXPECT_EQ(as_map(img.output), (std::map<Index, Rational>{{-1, 1}, {0, 1}}));
    ASSERT_TRUE(img.residual);
    EXPECT_EQ(img.residual->value, 0);
    EXPECT_EQ(img.kernel_id, KernelId::P);
}

TEST(ApplyP, HaarInvariance) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 2));
    const WindowDensity<Rational> lambda(Span{}, -10, std::vector<Rational>(21, Rational(1)), -10, 10,
                                         Tail<Rational>::unknown(), Tail<Rational>::unknown());
    const auto img = apply_P(lambda, spec);
    EXPECT_EQ(img.output.interior_lo(), -9);
    EXPECT_EQ(img.output.interior_hi(), 9);
    for (Index x = -9; x <= 9; ++x) EXPECT_EQ(img.output.value(x), 1);
    EXPECT_EQ(img.residual->value, 0);
}

TEST(ApplyP, OneStepLaw) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 3));
    const auto img = apply_P(density_of({{0, 1}}), spec);
    EXPECT_EQ(as_map(img.output), (std::map<Index, Rational>{{-1, Rational(1, 2)}, {1, Rational(1, 2)}}));
}

TEST(ApplyP, RefusesContinuousSpecs) {
    const auto spec = continuous_spec(ContinuousLaw::normal(0, 1), ContinuousLaw::normal(0, 1), 1);
    EXPECT_THROW(apply_P(density_of({{0, 1}}), spec), PreconditionError);
}

TEST(ApplyP, ConservesMassOfCompactMeasures) {
    std::mt19937_64 rng(89);
    for (int i = 0; i < 30; ++i) {
        const auto spec = gen::random_switching_spec(rng);
        const auto phi = random_measure(rng, spec, 5);
        const auto out = apply_P(WindowDensity<Rational>::from_measure(phi), spec).output;
        EXPECT_EQ(out.to_measure().total(), phi.total());
    }
}

// One and two steps against enumeration of every (state, jump) path.
TEST(ApplyP, AgreesWithPathEnumeration) {
    std::mt19937_64 rng(97);
    for (int i = 0; i < 60; ++i) {
        const auto spec = i % 3 ? gen::random_switching_spec(rng) : gen::random_walk_spec(rng);
        const auto phi = random_measure(rng, spec, 4);
        const auto k = oracle_kernel(spec);
        const auto one = apply_P(WindowDensity<Rational>::from_measure(phi), spec).output;
        EXPECT_EQ(as_map(one.to_measure()), nonzero(k.apply(as_map(phi))));
        const auto two = apply_P(one, spec).output;
        EXPECT_EQ(as_map(two.to_measure()), nonzero(k.apply_two_steps(as_map(phi))));
    }
}

TEST(ApplyP, InteriorShrinksByJumpRadius) {
    const WindowDensity<Rational> phi(Span{}, -20, std::vector<Rational>(41, Rational(1)), -20, 20,
                                      Tail<Rational>::unknown(), Tail<Rational>::unknown());
    const auto out = apply_P(phi, kSkewPair).output;
    // Steps reach -2..2 on the two sides.
    EXPECT_EQ(out.interior_lo(), -18);
    EXPECT_EQ(out.interior_hi(), 18);
}

TEST(ApplyPH, SkewNuGoldenValues) {
    const auto b = stationary_bundle<Rational>(kSkewPair, 5);
    const auto img = apply_PH(WindowDensity<Rational>::from_measure(b.nu), b.ladders, 1);
    EXPECT_EQ(img.output.value(0), Rational(2, 3));
    EXPECT_EQ(img.output.value(-2), Rational(1, 3));
    EXPECT_EQ(img.output.value(1), Rational(1, 3));
    EXPECT_EQ(img.residual->value, 0);
    EXPECT_EQ(img.kernel_id, KernelId::P_H);
}

TEST(ApplyPH, DeterministicStepsDown) {
    const auto b = stationary_bundle<Rational>(kDeterministic, 5);
    const auto img = apply_PH(density_of({{0, 1}}), b.ladders, 1);
    EXPECT_EQ(as_map(img.output), (std::map<Index, Rational>{{-1, 1}}));
}

TEST(ApplyPH, PlusMinusOneNuIsInvariant) {
    for (const Rational alpha : {Rational(0), Rational(2, 3), Rational(1)}) {
        const auto b = stationary_bundle<Rational>(lattice_spec(kPlusMinusOne, kPlusMinusOne, alpha), 5);
        const auto img = apply_PH(WindowDensity<Rational>::from_measure(b.nu), b.ladders, alpha);
        EXPECT_EQ(img.residual->value, 0);
    }
}

TEST(CrossingKernels, Deterministic) {
    const auto b = stationary_bundle<Rational>(kDeterministic, 5);
    const auto k = crossing_kernels(kDeterministic, b.ladders);
    EXPECT_EQ(k.down.rows.at(0), law({{-1, 1}}));
    EXPECT_EQ(k.up.rows.at(-1), law({{0, 1}}));
}

TEST(CrossingKernels, PlusMinusOneIsSkipFree) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, 1);
    const auto b = stationary_bundle<Rational>(spec, 5);
    const auto k = crossing_kernels(spec, b.ladders);
    for (const auto& [y, row] : k.down.rows) EXPECT_EQ(row, law({{-1, 1}})) << y;
    EXPECT_EQ(k.up.rows.at(-1), law({{0, 1}}));
}

TEST(CrossingKernels, SkewRows) {
    const auto b = stationary_bundle<Rational>(kSkewPair, 5);
    const auto k = crossing_kernels(kSkewPair, b.ladders);
    EXPECT_EQ(k.down.rows.at(0), law({{-2, Rational(1, 2)}, {-1, Rational(1, 2)}}));
    EXPECT_EQ(k.down.rows.at(1), law({{-2, Rational(1, 4)}, {-1, Rational(3, 4)}}));
    EXPECT_EQ(k.down.rows.at(2), law({{-2, Rational(3, 8)}, {-1, Rational(5, 8)}}));
    // From -2 the walk reaches 0 directly or passes through -1.
    EXPECT_EQ(k.up.rows.at(-1), law({{1, Rational(1, 2)}, {0, Rational(1, 2)}}));
    EXPECT_EQ(k.up.rows.at(-2), law({{0, Rational(3, 4)}, {1, Rational(1, 4)}}));
}

TEST(CrossingKernels, RefusesFractionalAlpha) {
    const auto spec = lattice_spec(kSkew, kSkew.reflected(), Rational(1, 2));
    const auto l = ladder_system<Rational>(kSkew, kSkew.reflected(), Rational(1, 2));
    EXPECT_THROW(crossing_kernels(spec, l), PreconditionError);
}

TEST(CrossingKernels, OvershootMeasureIsTwoPeriodicInvariant) {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 20; ++i) {
        const auto [spec, l] = exact_spec(rng, true);
        const auto b = stationary_bundle<Rational>(spec, 4);
        const auto k = crossing_kernels(spec, b.ladders);
        const auto plus = restrict(*b.pi, {Rational(1), Sign::plus});
        const auto minus = restrict(*b.pi, {Rational(1), Sign::minus});
        EXPECT_EQ(apply_table(minus, k.up), plus);
        EXPECT_EQ(apply_table(plus, k.down), minus);
        EXPECT_EQ(apply_table(apply_table(plus, k.down), k.up), plus);
    }
}

TEST(CrossingKernels, FloatBackendOnIrrationalSpecs) {
    std::mt19937_64 rng(103);
    int seen = 0;
    while (seen < 10) {
        const auto spec = gen::random_switching_spec(rng, true);
        try {
            ladder_system<Rational>(spec.lattice().x1, spec.lattice().x1p, 1);
            continue;
        } catch (const InexactError&) {
        }
        ++seen;
        const auto b = stationary_bundle<double>(spec, 4);
        const auto k = crossing_kernels(spec, b.ladders);
        const auto plus = restrict(*b.pi, {Rational(1), Sign::plus});
        const auto minus = restrict(*b.pi, {Rational(1), Sign::minus});
        EXPECT_LE(distance(apply_table(minus, k.up), plus, Norm::sup).value, 1e-10);
        EXPECT_LE(distance(apply_table(plus, k.down), minus, Norm::sup).value, 1e-10);
    }
}

TEST(DualKernel, DeterministicIsReversedTwoCycle) {
    const auto b = stationary_bundle<Rational>(kDeterministic, 5);
    const auto q = dual_kernel_Q(b.ladders, b.nu, 1);
    using Row = std::map<ExtendedState, Rational>;
    for (int t : {0, 1}) {
        EXPECT_EQ(q.rows.at({0, t}), (Row{{{-1, 1}, 1}}));
        EXPECT_EQ(q.rows.at({-1, t}), (Row{{{0, 1}, 1}}));
    }
    EXPECT_EQ(q.row_sum_residual, 0);
    EXPECT_EQ(q.balance_residual, 0);
}

TEST(DualKernel, PlusMinusOneRowsAreStochastic) {
    for (const Rational alpha : {Rational(0), Rational(1, 4), Rational(1, 2), Rational(1)}) {
        const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, alpha);
        const auto b = stationary_bundle<Rational>(spec, 5);
        const auto q = dual_kernel_Q(b.ladders, b.nu, alpha);
        EXPECT_EQ(q.row_sum_residual, 0);
        EXPECT_EQ(q.balance_residual, 0);
    }
    // alpha = 1/2: p = 1/4, 1/2, 1/4 on -1, 0, 1. From (1, t) the walk came
    // down from 0 via D = -1 or stayed via D = 0 on the plus side.
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 2));
    const auto b = stationary_bundle<Rational>(spec, 5);
    const auto row = dual_row(b.ladders, b.nu, Rational(1, 2), {1, 0});
    using Row = std::map<ExtendedState, Rational>;
    EXPECT_EQ(row, (Row{{{0, 0}, Rational(1, 2)}, {{1, 0}, Rational(1, 4)}, {{1, 1}, Rational(1, 4)}}));
}

TEST(DualKernel, ZeroDensityRowIsCoinAtZero) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 4));
    const auto b = stationary_bundle<Rational>(spec, 5);
    using Row = std::map<ExtendedState, Rational>;
    EXPECT_EQ(dual_row(b.ladders, b.nu, Rational(1, 4), {7, 1}),
              (Row{{{0, 0}, Rational(3, 4)}, {{0, 1}, Rational(1, 4)}}));
}

TEST(DualKernel, RandomSpecsBalance) {
    std::mt19937_64 rng(107);
    for (int i = 0; i < 20; ++i) {
        const auto [spec, l] = exact_spec(rng, false);
        const auto n = nu(l);
        const auto q = dual_kernel_Q(l, n, spec.alpha);
        EXPECT_EQ(q.row_sum_residual, 0);
        EXPECT_EQ(q.balance_residual, 0);
    }
    for (int i = 0; i < 20; ++i) {
        const auto spec = gen::random_switching_spec(rng);
        const auto l = ladder_system<double>(spec.lattice().x1, spec.lattice().x1p, spec.alpha);
        const auto q = dual_kernel_Q(l, nu(l), spec.alpha);
        EXPECT_LE(q.row_sum_residual, 1e-10);
        EXPECT_LE(q.balance_residual, 1e-10);
    }
}
