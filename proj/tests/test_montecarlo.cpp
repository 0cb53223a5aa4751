#include "switchwalk/montecarlo.hpp"

#include "support/oracles.hpp"
#include "support/random_specs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace switchwalk;

namespace {

FinitePmf<Rational> law(std::map<Index, Rational> atoms) { return gen::pmf(atoms); }

const FinitePmf<Rational> kMinusOne = law({{-1, 1}});
const FinitePmf<Rational> kPlusMinusOne = law({{-1, Rational(1, 2)}, {1, Rational(1, 2)}});
const FinitePmf<Rational> kSkew = law({{-2, Rational(1, 3)}, {1, Rational(2, 3)}});
const FinitePmf<Rational> kDrifted = law({{-2, Rational(2, 3)}, {1, Rational(1, 3)}});

const WalkSpec kDeterministic = lattice_spec(kMinusOne, kMinusOne.reflected(), 1);

constexpr std::uint64_t kGoldenSeed = 20240611;
constexpr Index kGoldenSteps = 400;

std::string golden_path() { return std::string(SWITCHWALK_GOLDEN_DIR) + "/pm1_trajectory.txt"; }

std::string serialize(const Trajectory& tr) {
    std::ostringstream out;
    out << "seed " << tr.seed << " steps " << tr.steps << "\n";
    for (Index n = 0; n <= tr.steps; ++n) {
        out << n << " " << tr.index_path[static_cast<std::size_t>(n)];
        if (n < tr.steps) out << " " << int(tr.bits[static_cast<std::size_t>(n)]);
        out << "\n";
    }
    return out.str();
}

void expect_chain_invariants(const Trajectory& tr) {
    const auto chain = extract_ladder_chain(tr);
    ASSERT_FALSE(chain.times.empty());
    EXPECT_EQ(chain.times.front(), 0);
    for (std::size_t i = 1; i < chain.times.size(); ++i) EXPECT_LT(chain.times[i - 1], chain.times[i]);
    const auto crossings = extract_crossings(tr);
    for (std::size_t i = 1; i < crossings.size(); ++i) EXPECT_NE(crossings[i - 1].up, crossings[i].up);
    for (const auto& c : crossings) EXPECT_EQ(c.up, c.value >= 0);
}

}  // namespace

TEST(CounterRng, ReproducibleAndSplittable) {
    CounterRng a(5), b(5);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    CounterRng c = CounterRng(5).derive(1), d = CounterRng(5).derive(2);
    EXPECT_NE(c.next_u64(), d.next_u64());
    CounterRng u(9);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
        sum += v;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Simulate, SeedDeterminism) {
    const auto spec = lattice_spec(kSkew, kSkew.reflected(), Rational(1, 2));
    const auto a = simulate(spec, 0, 5000, 77);
    const auto b = simulate(spec, 0, 5000, 77);
    EXPECT_EQ(serialize(a), serialize(b));
    EXPECT_NE(serialize(a), serialize(simulate(spec, 0, 5000, 78)));
    const auto g = continuous_spec(ContinuousLaw::normal(0, 1), ContinuousLaw::normal(0, 1), 1);
    EXPECT_EQ(simulate(g, 0.0, 1000, 3).real_path, simulate(g, 0.0, 1000, 3).real_path);
}

TEST(Simulate, TwoCycle) {
    const auto tr = simulate(kDeterministic, 0, 10, 1);
    for (Index n = 0; n <= 10; ++n) EXPECT_EQ(tr.index_path[static_cast<std::size_t>(n)], n % 2 ? -1 : 0);
    const auto chain = extract_ladder_chain(tr);
    ASSERT_EQ(chain.times.size(), 11u);
    for (Index n = 0; n <= 10; ++n) {
        EXPECT_EQ(chain.times[static_cast<std::size_t>(n)], n);
        EXPECT_EQ(chain.heights[static_cast<std::size_t>(n)], n % 2 ? -1.0 : 0.0);
    }
    const auto crossings = extract_crossings(tr);
    ASSERT_EQ(crossings.size(), 10u);
    for (std::size_t i = 0; i < crossings.size(); ++i) EXPECT_EQ(crossings[i].value, i % 2 ? 0.0 : -1.0);
}

TEST(Simulate, MonotonePathIsAllLadderTimes) {
    const auto tr = simulate(kDeterministic, 5, 12, 1);
    const auto chain = extract_ladder_chain(tr);
    ASSERT_EQ(chain.times.size(), 13u);
    for (Index n = 0; n <= 12; ++n) EXPECT_EQ(chain.times[static_cast<std::size_t>(n)], n);
}

TEST(Simulate, RejectsOffLatticeStart) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, 1);
    EXPECT_THROW(simulate(spec, 0.5, 10, 1), PreconditionError);
    EXPECT_THROW(simulate(spec, 0, 0, 1), PreconditionError);
}

TEST(Simulate, CoinDecidesAtZero) {
    // alpha = 0: from 0 the walk always uses X1' (steps up by one).
    const auto spec = lattice_spec(kMinusOne, kMinusOne.reflected(), 0);
    const auto tr = simulate(spec, 0, 6, 4);
    for (Index n = 0; n <= 6; ++n) EXPECT_EQ(tr.index_path[static_cast<std::size_t>(n)], n % 2) << n;
    for (auto b : tr.bits) EXPECT_EQ(b, 0);
}

// X1 = -1 and X1' = sqrt 2 move the walk by the interval map of [-1, sqrt 2)
// that subtracts 1 on the right and adds sqrt 2 on the left.
TEST(Simulate, IrrationalRotationOrbit) {
    const auto spec = continuous_spec(ContinuousLaw::point(-1), ContinuousLaw::point(std::numbers::sqrt2), 1);
    const Index n = 20000;
    const auto tr = simulate(spec, 0.0, n, 1);
    long ups = 0, downs = 0;
    std::set<double> seen;
    Index left = 0;
    for (Index k = 0; k <= n; ++k) {
        const double y = tr.real_path[static_cast<std::size_t>(k)];
        EXPECT_GE(y, -1.0);
        EXPECT_LT(y, std::numbers::sqrt2);
        EXPECT_NEAR(y, ups * std::numbers::sqrt2 - downs, 1e-8);
        seen.insert(y);
        if (y < 0) ++left;
        (y >= 0 ? downs : ups) += 1;
    }
    // Every state is new and the orbit spreads like Lebesgue measure.
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(n + 1));
    EXPECT_NEAR(static_cast<double>(left) / (n + 1), 1.0 / (1.0 + std::numbers::sqrt2), 1e-3);
}

TEST(Simulate, GoldenPlusMinusOneTrajectory) {
    const auto spec = lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 2));
    const auto tr = simulate(spec, 0, kGoldenSteps, kGoldenSeed);
    const std::string text = serialize(tr);
    if (std::getenv("SWITCHWALK_UPDATE_GOLDEN")) {
        std::ofstream(golden_path()) << text;
    }
    std::ifstream in(golden_path());
    ASSERT_TRUE(in.good()) << golden_path();
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), text);
}

TEST(Extract, AgreesWithRescanOracle) {
    const auto check = [](const Trajectory& tr) {
        const auto chain = extract_ladder_chain(tr);
        const auto r = oracle::rescan(tr.index_path, tr.bits);
        EXPECT_EQ(chain.times, r.ladder_times);
        for (std::size_t i = 0; i < chain.times.size(); ++i)
            EXPECT_EQ(chain.heights[i], tr.value(chain.times[i]));
        const auto crossings = extract_crossings(tr);
        ASSERT_EQ(crossings.size(), r.crossing_steps.size());
        for (std::size_t i = 0; i < crossings.size(); ++i) {
            EXPECT_EQ(crossings[i].step, r.crossing_steps[i]);
            EXPECT_EQ(crossings[i].lattice_index, r.crossing_values[i]);
        }
    };
    check(simulate(lattice_spec(kPlusMinusOne, kPlusMinusOne, Rational(1, 2)), 0, kGoldenSteps, kGoldenSeed));
    std::mt19937_64 rng(109);
    for (int i = 0; i < 30; ++i) check(simulate(gen::random_switching_spec(rng), 0, 3000, 1000 + i));
}

TEST(Extract, InvariantsOnRandomTrajectories) {
    std::mt19937_64 rng(113);
    for (int i = 0; i < 20; ++i) expect_chain_invariants(simulate(gen::random_switching_spec(rng), 0, 5000, i));
    const auto g = continuous_spec(ContinuousLaw::normal(0, 1), ContinuousLaw::normal(0, 1), Rational(1, 2));
    expect_chain_invariants(simulate(g, 0.0, 20000, 5));
    const auto e = continuous_spec(ContinuousLaw::exponential_mixture({{0.5, 1.0, -2.0}, {0.5, 0.0, 1.0}}),
                                   ContinuousLaw::uniform(-1, 3), 1);
    expect_chain_invariants(simulate(e, 0.0, 20000, 6));
}

TEST(Statistics, TwoCycleOccupationIsExact) {
    const LatticeReference ref{FiniteMeasure<double>(Span{}, -1, {0.5, 0.5}), 0.0};
    StationarityOptions opts;
    opts.steps = 1000;
    const auto rep = stationarity_test(kDeterministic, ref, opts);
    EXPECT_EQ(rep.occupation.at(-1), 500u);
    EXPECT_EQ(rep.occupation.at(0), 500u);
    ASSERT_EQ(rep.distances.size(), 1u);
    EXPECT_EQ(rep.distances[0].value, 0.0);
    EXPECT_TRUE(rep.distances[0].pass);
}

TEST(Statistics, TvStatisticCountsOffWindowMass) {
    const LatticeReference ref{FiniteMeasure<double>(Span{}, 0, {0.5, 0.25}), 0.25};
    const std::map<Index, std::uint64_t> counts{{0, 2}, {1, 1}, {7, 1}};
    EXPECT_DOUBLE_EQ(tv_statistic(counts, 4, ref), 0.5 * (0.0 + 0.25 + 0.25));
}

TEST(Statistics, KsStatisticAndNull) {
    std::vector<double> sample{0.1, 0.4, 0.7};
    const auto id = [](double x) { return x; };
    EXPECT_NEAR(ks_statistic(sample, id), 0.3, 1e-15);
    const double q = ks_null_quantile(10000, 200, 0.99, 1);
    // Asymptotic 99% point of sqrt(n) D_n is about 1.63.
    EXPECT_NEAR(q * std::sqrt(10000.0), 1.63, 0.15);
}

TEST(Statistics, TvNullShrinksWithSampleSize) {
    const LatticeReference ref{FiniteMeasure<double>(Span{}, -2, {0.2, 0.3, 0.5}), 0.0};
    const double small = tv_null_quantile(ref, 1000, 100, 0.99, 3);
    const double large = tv_null_quantile(ref, 100000, 100, 0.99, 3);
    EXPECT_GT(small, large);
    EXPECT_LT(large, 0.01);
}

TEST(Stationarity, DriftedOccupationMatchesNormalizedMu) {
    const auto spec = lattice_spec(kDrifted, kDrifted.reflected(), 1);
    const auto n = normalize_mu(stationary_bundle<double>(spec, 60));
    ASSERT_TRUE(n.finite);
    StationarityOptions opts;
    opts.steps = 1'000'000;
    opts.seed = 2024;
    const auto rep = stationarity_test(spec, LatticeReference{n.law, n.outside_mass}, opts);
    EXPECT_LT(rep.distances[0].value, 0.02);
    EXPECT_TRUE(rep.distances[0].pass);
    EXPECT_EQ(rep.samples, 1'000'000u);
}

TEST(Stationarity, ReplicasUseDerivedSeeds) {
    const auto spec = lattice_spec(kDrifted, kDrifted.reflected(), Rational(1, 2));
    const auto n = normalize_mu(stationary_bundle<double>(spec, 60));
    StationarityOptions opts;
    opts.steps = 50'000;
    opts.replicas = 3;
    opts.tv_threshold = 0.05;
    const auto rep = stationarity_test(spec, LatticeReference{n.law, n.outside_mass}, opts);
    EXPECT_EQ(rep.replica_count, 3u);
    EXPECT_EQ(std::set<std::uint64_t>(rep.seeds.begin(), rep.seeds.end()).size(), 3u);
    EXPECT_EQ(rep.distances.size(), 2u);
    const auto again = stationarity_test(spec, LatticeReference{n.law, n.outside_mass}, opts);
    EXPECT_EQ(again.occupation, rep.occupation);
}

TEST(Stationarity, LatticeOvershootChainKeepsPi) {
    const auto spec = lattice_spec(kSkew, kSkew.reflected(), 1);
    const auto b = stationary_bundle<double>(spec, 5);
    const auto p = b.pi->scaled(1.0 / b.pi->total());
    StationarityOptions opts;
    opts.chain = ChainKind::overshoot;
    opts.samples = 100'000;
    // Zero drift: censored samples count against the statistic in full, so
    // the cap has to make them rare.
    opts.steps = 2'000'000;
    const auto rep = stationarity_test(spec, LatticeReference{p, 0.0}, opts);
    EXPECT_LT(rep.censored, 200u);
    EXPECT_TRUE(rep.distances[0].pass) << rep.distances[0].value << " vs " << rep.distances[0].threshold;
}

TEST(Stationarity, LadderChainKeepsNu) {
    const auto spec = lattice_spec(kSkew, kSkew.reflected(), Rational(1, 3));
    const auto b = stationary_bundle<double>(spec, 5);
    const auto v = b.nu.scaled(1.0 / b.nu.total());
    StationarityOptions opts;
    opts.chain = ChainKind::ladder;
    opts.samples = 100'000;
    opts.steps = 100'000;
    const auto rep = stationarity_test(spec, LatticeReference{v, 0.0}, opts);
    EXPECT_TRUE(rep.distances[0].pass) << rep.distances[0].value << " vs " << rep.distances[0].threshold;
}

TEST(Stationarity, WrongReferenceIsRejected) {
    // Point mass at 0 is not invariant for the ladder chain of the skew pair.
    const auto spec = lattice_spec(kSkew, kSkew.reflected(), 1);
    StationarityOptions opts;
    opts.chain = ChainKind::ladder;
    opts.samples = 20'000;
    opts.steps = 10'000;
    const auto rep = stationarity_test(spec, LatticeReference{FiniteMeasure<double>::delta(Span{}, 0), 0.0}, opts);
    EXPECT_FALSE(rep.distances[0].pass);
}

TEST(Stationarity, GaussianOvershootKs) {
    const auto spec = continuous_spec(ContinuousLaw::normal(0, 1), ContinuousLaw::normal(0, 1), 1);
    const OvershootLaw o(ContinuousLaw::normal(0, 1));
    StationarityOptions opts;
    opts.chain = ChainKind::overshoot;
    opts.samples = 20'000;
    opts.steps = 100'000;
    opts.seed = 8;
    const auto rep = stationarity_test(
        spec, ContinuousReference{[&o](double x) { return o.cdf(x); }, [&o](double u) { return o.quantile(u); }},
        opts);
    EXPECT_TRUE(rep.distances[0].pass) << rep.distances[0].value << " vs " << rep.distances[0].threshold;
    // A wrong reference (the increment law itself) fails.
    const auto bad = stationarity_test(spec,
                                       ContinuousReference{[](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); },
                                                           [](double u) { return ContinuousLaw::normal(0, 1).quantile(u); }},
                                       opts);
    EXPECT_FALSE(bad.distances[0].pass);
}
