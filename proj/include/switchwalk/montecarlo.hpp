#pragma once

// Seeded simulation of switching walks, extraction of the switching ladder
// chain and the zero-crossing overshoots, and empirical-vs-exact comparisons.
//
// Every random number comes from a counter-based generator whose output
// depends only on (key, counter), with per-replica keys derived from the
// user seed, so runs are reproducible bit for bit.

#include "switchwalk/ladder.hpp"
#include "switchwalk/stationary.hpp"
#include "switchwalk/walk.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace switchwalk {

// SplitMix64 finalizer over a Weyl sequence: output n is mix(key + n * golden).
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }
    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // (0, 1)
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
    double normal();
    double exponential() { return -std::log(uniform_open()); }

    // Independent stream for replica / sample `stream`.
    CounterRng derive(std::uint64_t stream) const { return CounterRng(mix(key_ ^ mix(stream + kGolden))); }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Inverse-CDF table for a finite lattice law.
struct SamplingTable {
    std::vector<double> cumulative;
    std::vector<Index> values;

    explicit SamplingTable(const FiniteMeasure<Rational>& law);
    // Renormalizes to total mass 1.
    explicit SamplingTable(const FiniteMeasure<double>& law);
    SamplingTable() = default;
    Index draw(double u) const;
};

// Draws increments and the coin at 0 for a walk spec.
class Stepper {
public:
    explicit Stepper(const WalkSpec& spec);

    bool lattice() const { return lattice_; }
    double step_value() const { return step_; }  // lattice step h
    // One transition; `coin` receives B_n (drawn at every step).
    Index step(Index y, CounterRng& rng, bool& coin) const;
    double step(double y, CounterRng& rng, bool& coin) const;

private:
    static double draw_continuous(const ContinuousLaw& law, CounterRng& rng);

    bool lattice_;
    double alpha_;
    double step_ = 0.0;
    SamplingTable x1_, x1p_;
    ContinuousLaw c1_, c1p_;
};

struct Trajectory {
    WalkSpec spec;
    std::uint64_t seed = 0;
    Index steps = 0;
    bool lattice = true;
    double y0 = 0.0;
    std::vector<Index> index_path;   // lattice: Y_n / h
    std::vector<double> real_path;   // continuous: Y_n
    std::vector<std::uint8_t> bits;  // B_0 .. B_{N-1}

    double value(Index n) const {
        return lattice ? static_cast<double>(index_path[static_cast<std::size_t>(n)]) * step
                       : real_path[static_cast<std::size_t>(n)];
    }
    double step = 1.0;
};

// y0 is in real units; for lattice specs it must be a lattice point.
Trajectory simulate(const WalkSpec& spec, double y0, Index steps, std::uint64_t seed);

struct LadderChain {
    std::vector<Index> times;     // T_n
    std::vector<double> heights;  // H_n
};

LadderChain extract_ladder_chain(const Trajectory& tr);

struct Crossing {
    Index step = 0;           // k with the sign change between Y_{k-1} and Y_k
    double value = 0.0;       // Y_k
    Index lattice_index = 0;  // Y_k / h for lattice trajectories
    bool up = false;          // Y_{k-1} < 0 <= Y_k
};

std::vector<Crossing> extract_crossings(const Trajectory& tr);

// ---------------------------------------------------------------------------
// Statistics

struct LatticeReference {
    FiniteMeasure<double> law;  // probabilities on the window
    double outside_mass = 0.0;  // probability off the window
};

struct ContinuousReference {
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
};

using Reference = std::variant<LatticeReference, ContinuousReference>;

enum class ChainKind { occupation, ladder, overshoot };

const char* to_string(ChainKind c);

struct NamedDistance {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string method;
};

struct SimReport {
    ChainKind chain = ChainKind::occupation;
    std::map<Index, std::uint64_t> occupation;
    std::vector<Index> ladder_times;
    std::vector<double> ladder_heights;
    std::vector<Crossing> crossings;
    std::vector<NamedDistance> distances;
    std::size_t replica_count = 0;
    std::vector<std::uint64_t> seeds;
    std::uint64_t samples = 0;
    std::uint64_t censored = 0;
    Index steps = 0;
};

struct StationarityOptions {
    ChainKind chain = ChainKind::occupation;
    std::size_t replicas = 1;
    // occupation: steps per replica; ladder / overshoot: step cap per sample
    Index steps = 1'000'000;
    // ladder / overshoot: number of stationary-start samples
    std::uint64_t samples = 100'000;
    std::uint64_t seed = 1;
    // Occupation TV threshold; one-step tests use bootstrap quantiles.
    double tv_threshold = 0.02;
    double level = 0.99;
    std::size_t bootstrap = 200;
};

SimReport stationarity_test(const WalkSpec& spec, const Reference& reference, const StationarityOptions& opts);

// Empirical ladder heights of `excursions` independent walks with increment
// law x started at 0, each capped at `cap` steps.
struct LadderSample {
    std::map<Index, std::uint64_t> counts;
    std::uint64_t escaped = 0;  // censored at the cap
    std::uint64_t excursions = 0;
};

LadderSample sample_ladder_heights(const FinitePmf<Rational>& x, Direction dir, LadderKind kind,
                                   std::uint64_t excursions, Index cap, std::uint64_t seed);

// Running maximum over `cap` steps of `excursions` walks started at 0.
LadderSample sample_running_max(const FinitePmf<Rational>& x, std::uint64_t excursions, Index cap,
                                std::uint64_t seed);

// sup_x |F_n(x) - F(x)| for a sample (sorted in place).
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);

// `level` quantile of the KS statistic of n uniforms (distribution-free null).
double ks_null_quantile(std::uint64_t n, std::size_t replicates, double level, std::uint64_t seed);

// Total variation between counts (with n total samples) and a lattice reference.
double tv_statistic(const std::map<Index, std::uint64_t>& counts, std::uint64_t n, const LatticeReference& ref);

// Parametric bootstrap quantile of the TV statistic for n samples from ref.
double tv_null_quantile(const LatticeReference& ref, std::uint64_t n, std::size_t replicates, double level,
                        std::uint64_t seed);

}  // namespace switchwalk
