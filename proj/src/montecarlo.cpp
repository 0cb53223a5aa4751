#include "switchwalk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace switchwalk {

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

const char* to_string(ChainKind c) {
    switch (c) {
        case ChainKind::occupation: return "occupation";
        case ChainKind::ladder: return "ladder";
        case ChainKind::overshoot: return "overshoot";
    }
    return "?";
}

SamplingTable::SamplingTable(const FiniteMeasure<Rational>& law) {
    Rational acc = 0;
    for (Index k = law.min_index(); !law.empty() && k <= law.max_index(); ++k) {
        if (law.at(k) == 0) continue;
        acc += law.at(k);
        values.push_back(k);
        cumulative.push_back(to_double(acc));
    }
    if (values.empty()) throw PreconditionError("sampler: empty law");
}

SamplingTable::SamplingTable(const FiniteMeasure<double>& law) {
    double acc = 0.0;
    for (Index k = law.min_index(); !law.empty() && k <= law.max_index(); ++k) {
        if (law.at(k) == 0.0) continue;
        acc += law.at(k);
        values.push_back(k);
        cumulative.push_back(acc);
    }
    if (values.empty()) throw PreconditionError("sampler: empty law");
    for (auto& c : cumulative) c /= acc;
}

Index SamplingTable::draw(double u) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) return values.back();
    return values[static_cast<std::size_t>(it - cumulative.begin())];
}

Stepper::Stepper(const WalkSpec& spec) : lattice_(spec.is_lattice()), alpha_(to_double(spec.alpha)) {
    if (lattice_) {
        const auto& l = spec.lattice();
        step_ = to_double(l.span.step);
        x1_ = SamplingTable(l.x1.atoms());
        x1p_ = SamplingTable(l.x1p.atoms());
    } else {
        c1_ = spec.continuous().x1;
        c1p_ = spec.continuous().x1p;
    }
}

Index Stepper::step(Index y, CounterRng& rng, bool& coin) const {
    coin = rng.uniform() < alpha_;
    const bool plus = y > 0 || (y == 0 && coin);
    return y + (plus ? x1_ : x1p_).draw(rng.uniform());
}

double Stepper::draw_continuous(const ContinuousLaw& law, CounterRng& rng) {
    switch (law.family) {
        case Family::normal: return law.a + law.b * rng.normal();
        case Family::uniform: return law.a + (law.b - law.a) * rng.uniform();
        case Family::point: return law.a;
        case Family::shifted_exponential: {
            const double u = rng.uniform();
            double acc = 0.0;
            const ExpComponent* chosen = &law.components.back();
            for (const auto& c : law.components) {
                acc += c.weight;
                if (u < acc) {
                    chosen = &c;
                    break;
                }
            }
            return chosen->shift + chosen->scale * rng.exponential();
        }
    }
    return 0.0;
}

double Stepper::step(double y, CounterRng& rng, bool& coin) const {
    coin = rng.uniform() < alpha_;
    const bool plus = y > 0 || (y == 0 && coin);
    return y + draw_continuous(plus ? c1_ : c1p_, rng);
}

Trajectory simulate(const WalkSpec& spec, double y0, Index steps, std::uint64_t seed) {
    if (steps < 1) throw PreconditionError("simulate: need at least one step");
    const Stepper stepper(spec);
    CounterRng rng(seed);
    Trajectory tr;
    tr.spec = spec;
    tr.seed = seed;
    tr.steps = steps;
    tr.lattice = stepper.lattice();
    tr.y0 = y0;
    tr.bits.resize(static_cast<std::size_t>(steps));
    bool coin = false;
    if (tr.lattice) {
        const Rational idx = rational_from_double(y0) / spec.lattice().span.step;
        if (boost::multiprecision::denominator(idx) != 1) throw PreconditionError("simulate: y0 is not a lattice point");
        tr.step = stepper.step_value();
        tr.index_path.resize(static_cast<std::size_t>(steps + 1));
        Index y = boost::multiprecision::numerator(idx).convert_to<Index>();
        tr.index_path[0] = y;
        for (Index n = 0; n < steps; ++n) {
            y = stepper.step(y, rng, coin);
            tr.bits[static_cast<std::size_t>(n)] = coin;
            tr.index_path[static_cast<std::size_t>(n + 1)] = y;
        }
    } else {
        tr.real_path.resize(static_cast<std::size_t>(steps + 1));
        double y = y0;
        tr.real_path[0] = y;
        for (Index n = 0; n < steps; ++n) {
            y = stepper.step(y, rng, coin);
            tr.bits[static_cast<std::size_t>(n)] = coin;
            tr.real_path[static_cast<std::size_t>(n + 1)] = y;
        }
    }
    return tr;
}

namespace {

template <class P>
void ladder_scan(const std::vector<P>& y, const std::vector<std::uint8_t>& bits, LadderChain& out,
                 const std::function<double(std::size_t)>& value) {
    std::size_t cur = 0;
    out.times.push_back(0);
    out.heights.push_back(value(0));
    for (;;) {
        const P h = y[cur];
        if (h == P(0) && cur >= bits.size()) break;
        const bool downward = h > P(0) || (h == P(0) && bits[cur] == 1);
        std::size_t k = cur + 1;
        while (k < y.size() && !(downward ? y[k] <= h : y[k] >= h)) ++k;
        if (k >= y.size()) break;
        cur = k;
        out.times.push_back(static_cast<Index>(k));
        out.heights.push_back(value(k));
    }
}

template <class P>
std::vector<Crossing> crossing_scan(const std::vector<P>& y, double step) {
    std::vector<Crossing> out;
    for (std::size_t k = 1; k < y.size(); ++k) {
        const bool before = y[k - 1] < P(0);
        const bool after = y[k] < P(0);
        if (before == after) continue;
        Crossing c;
        c.step = static_cast<Index>(k);
        c.up = before;
        if constexpr (std::is_same_v<P, Index>) {
            c.lattice_index = y[k];
            c.value = static_cast<double>(y[k]) * step;
        } else {
            c.value = y[k];
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

LadderChain extract_ladder_chain(const Trajectory& tr) {
    LadderChain out;
    const auto value = [&tr](std::size_t k) { return tr.value(static_cast<Index>(k)); };
    if (tr.lattice) ladder_scan(tr.index_path, tr.bits, out, value);
    else ladder_scan(tr.real_path, tr.bits, out, value);
    return out;
}

std::vector<Crossing> extract_crossings(const Trajectory& tr) {
    return tr.lattice ? crossing_scan(tr.index_path, tr.step) : crossing_scan(tr.real_path, tr.step);
}

// ---------------------------------------------------------------------------

double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw PreconditionError("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

namespace {

double upper_quantile(std::vector<double> stats, double level) {
    std::sort(stats.begin(), stats.end());
    const auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(stats.size())));
    return stats[std::min(stats.size() - 1, idx == 0 ? 0 : idx - 1)];
}

}  // namespace

double ks_null_quantile(std::uint64_t n, std::size_t replicates, double level, std::uint64_t seed) {
    const CounterRng base(seed);
    std::vector<double> stats;
    std::vector<double> u(static_cast<std::size_t>(n));
    const auto identity = [](double x) { return x; };
    for (std::size_t b = 0; b < replicates; ++b) {
        CounterRng rng = base.derive(b);
        for (auto& v : u) v = rng.uniform();
        stats.push_back(ks_statistic(u, identity));
    }
    return upper_quantile(std::move(stats), level);
}

double tv_statistic(const std::map<Index, std::uint64_t>& counts, std::uint64_t n, const LatticeReference& ref) {
    if (n == 0) throw PreconditionError("tv_statistic: no samples");
    const double dn = static_cast<double>(n);
    double acc = 0.0;
    double outside = 0.0;
    const auto& law = ref.law;
    for (Index k = law.min_index(); !law.empty() && k <= law.max_index(); ++k) {
        const auto it = counts.find(k);
        const double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / dn;
        acc += std::fabs(emp - law.at(k));
    }
    for (const auto& [k, c] : counts)
        if (law.empty() || k < law.min_index() || k > law.max_index()) outside += static_cast<double>(c) / dn;
    // Off-window mass is compared without location information, so both
    // sides count in full.
    return 0.5 * (acc + outside + ref.outside_mass);
}

double tv_null_quantile(const LatticeReference& ref, std::uint64_t n, std::size_t replicates, double level,
                        std::uint64_t seed) {
    const SamplingTable table(ref.law);
    const CounterRng base(seed);
    std::vector<double> stats;
    for (std::size_t b = 0; b < replicates; ++b) {
        CounterRng rng = base.derive(b);
        std::map<Index, std::uint64_t> counts;
        for (std::uint64_t i = 0; i < n; ++i) ++counts[table.draw(rng.uniform())];
        stats.push_back(tv_statistic(counts, n, LatticeReference{ref.law, 0.0}));
    }
    return upper_quantile(std::move(stats), level);
}

// ---------------------------------------------------------------------------

namespace {

// Runs from a stationary start until the next ladder time / crossing and
// returns the landing state; false when the cap is hit first.
template <class P>
bool one_step(const Stepper& stepper, P y0, ChainKind chain, Index cap, CounterRng& rng, P& out) {
    bool coin = false;
    P y = stepper.step(y0, rng, coin);
    if (chain == ChainKind::ladder) {
        const bool downward = y0 > P(0) || (y0 == P(0) && coin);
        for (Index k = 1;; ++k) {
            if (downward ? y <= y0 : y >= y0) {
                out = y;
                return true;
            }
            if (k >= cap) return false;
            y = stepper.step(y, rng, coin);
        }
    }
    const bool start_negative = y0 < P(0);
    for (Index k = 1;; ++k) {
        if ((y < P(0)) != start_negative) {
            out = y;
            return true;
        }
        if (k >= cap) return false;
        y = stepper.step(y, rng, coin);
    }
}

}  // namespace

SimReport stationarity_test(const WalkSpec& spec, const Reference& reference, const StationarityOptions& opts) {
    SimReport rep;
    rep.chain = opts.chain;
    rep.steps = opts.steps;
    const CounterRng base(opts.seed);
    const Stepper stepper(spec);

    if (opts.chain == ChainKind::occupation) {
        if (!spec.is_lattice() || !std::holds_alternative<LatticeReference>(reference))
            throw PreconditionError("stationarity_test: occupation comparison needs a lattice spec and reference");
        const auto& ref = std::get<LatticeReference>(reference);
        if (ref.law.empty() || ref.law.total() <= 0.0)
            throw PreconditionError("stationarity_test: reference has zero mass on the window");
        rep.replica_count = opts.replicas;
        std::vector<double> per_replica;
        for (std::size_t r = 0; r < opts.replicas; ++r) {
            const std::uint64_t key = base.derive(r).key();
            rep.seeds.push_back(key);
            const Trajectory tr = simulate(spec, 0.0, opts.steps, key);
            std::map<Index, std::uint64_t> local;
            for (Index n = 0; n < opts.steps; ++n) ++local[tr.index_path[static_cast<std::size_t>(n)]];
            per_replica.push_back(tv_statistic(local, static_cast<std::uint64_t>(opts.steps), ref));
            for (const auto& [k, c] : local) rep.occupation[k] += c;
            if (r == 0) {
                const auto chain = extract_ladder_chain(tr);
                rep.ladder_times = chain.times;
                rep.ladder_heights = chain.heights;
                rep.crossings = extract_crossings(tr);
            }
        }
        rep.samples = static_cast<std::uint64_t>(opts.steps) * opts.replicas;
        const double tv = tv_statistic(rep.occupation, rep.samples, ref);
        rep.distances.push_back({"tv_occupation", tv, opts.tv_threshold, tv <= opts.tv_threshold,
                                 "pooled occupation over replicas vs normalized mu"});
        if (opts.replicas > 1) {
            const double worst = *std::max_element(per_replica.begin(), per_replica.end());
            rep.distances.push_back({"tv_occupation_worst_replica", worst, opts.tv_threshold,
                                     worst <= opts.tv_threshold, "largest single-replica distance"});
        }
        return rep;
    }

    rep.replica_count = 1;
    rep.seeds.push_back(opts.seed);
    const std::string name = std::string(opts.chain == ChainKind::ladder ? "ladder" : "overshoot");
    if (spec.is_lattice()) {
        if (!std::holds_alternative<LatticeReference>(reference))
            throw PreconditionError("stationarity_test: lattice spec needs a lattice reference");
        const auto& ref = std::get<LatticeReference>(reference);
        if (ref.law.empty() || ref.law.total() <= 0.0)
            throw PreconditionError("stationarity_test: reference has zero mass on the window");
        if (ref.outside_mass > 0.0)
            throw PreconditionError("stationarity_test: one-step tests need a reference without off-window mass");
        const SamplingTable start(ref.law);
        std::map<Index, std::uint64_t> counts;
        for (std::uint64_t i = 0; i < opts.samples; ++i) {
            CounterRng rng = base.derive(i);
            const Index y0 = start.draw(rng.uniform());
            Index y1 = 0;
            if (one_step(stepper, y0, opts.chain, opts.steps, rng, y1)) ++counts[y1];
            else ++rep.censored;
        }
        rep.samples = opts.samples;
        rep.occupation = counts;
        const std::uint64_t observed = opts.samples - rep.censored;
        if (observed == 0) throw NumericalError("stationarity_test: every sample hit the step cap");
        const double tv = tv_statistic(counts, observed, ref) + static_cast<double>(rep.censored) / opts.samples;
        const double threshold = tv_null_quantile(ref, observed, opts.bootstrap, opts.level, base.derive(~0ULL).key());
        rep.distances.push_back({"tv_one_step_" + name, tv, threshold, tv <= threshold,
                                 "one step from a stationary start; parametric bootstrap threshold"});
        return rep;
    }

    if (!std::holds_alternative<ContinuousReference>(reference))
        throw PreconditionError("stationarity_test: continuous spec needs a continuous reference");
    const auto& ref = std::get<ContinuousReference>(reference);
    std::vector<double> landed;
    landed.reserve(static_cast<std::size_t>(opts.samples));
    for (std::uint64_t i = 0; i < opts.samples; ++i) {
        CounterRng rng = base.derive(i);
        const double y0 = ref.quantile(rng.uniform_open());
        double y1 = 0.0;
        if (one_step(stepper, y0, opts.chain, opts.steps, rng, y1)) landed.push_back(y1);
        else ++rep.censored;
    }
    rep.samples = opts.samples;
    if (landed.empty()) throw NumericalError("stationarity_test: every sample hit the step cap");
    const double ks = ks_statistic(landed, ref.cdf) + static_cast<double>(rep.censored) / opts.samples;
    const double threshold =
        ks_null_quantile(landed.size(), opts.bootstrap, opts.level, base.derive(~0ULL).key());
    rep.distances.push_back({"ks_one_step_" + name, ks, threshold, ks <= threshold,
                             "one step from a stationary start; simulated KS null threshold"});
    return rep;
}

// ---------------------------------------------------------------------------

LadderSample sample_ladder_heights(const FinitePmf<Rational>& x, Direction dir, LadderKind kind,
                                   std::uint64_t excursions, Index cap, std::uint64_t seed) {
    const SamplingTable table(x.atoms());
    const CounterRng base(seed);
    LadderSample out;
    out.excursions = excursions;
    const auto stop = [dir, kind](Index s) {
        if (dir == Direction::descending) return kind == LadderKind::weak ? s <= 0 : s < 0;
        return kind == LadderKind::weak ? s >= 0 : s > 0;
    };
    for (std::uint64_t i = 0; i < excursions; ++i) {
        CounterRng rng = base.derive(i);
        Index s = 0;
        bool done = false;
        for (Index k = 0; k < cap; ++k) {
            s += table.draw(rng.uniform());
            if (stop(s)) {
                done = true;
                break;
            }
        }
        if (done) ++out.counts[s];
        else ++out.escaped;
    }
    return out;
}

LadderSample sample_running_max(const FinitePmf<Rational>& x, std::uint64_t excursions, Index cap,
                                std::uint64_t seed) {
    const SamplingTable table(x.atoms());
    const CounterRng base(seed);
    LadderSample out;
    out.excursions = excursions;
    for (std::uint64_t i = 0; i < excursions; ++i) {
        CounterRng rng = base.derive(i);
        Index s = 0, best = 0;
        for (Index k = 0; k < cap; ++k) {
            s += table.draw(rng.uniform());
            best = std::max(best, s);
        }
        ++out.counts[best];
    }
    return out;
}

}  // namespace switchwalk
