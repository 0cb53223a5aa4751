#include "switchwalk/walk.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace switchwalk {

const char* to_string(Family f) {
    switch (f) {
        case Family::normal: return "normal";
        case Family::uniform: return "uniform";
        case Family::shifted_exponential: return "shifted_exponential";
        case Family::point: return "point";
    }
    return "?";
}

ContinuousLaw ContinuousLaw::normal(double mean, double sd) {
    if (!(sd > 0) || !std::isfinite(mean)) throw ValidationError("normal: sd must be positive");
    return {Family::normal, mean, sd, {}};
}

ContinuousLaw ContinuousLaw::uniform(double lo, double hi) {
    if (!(hi > lo)) throw ValidationError("uniform: need a < b");
    return {Family::uniform, lo, hi, {}};
}

ContinuousLaw ContinuousLaw::point(double value) {
    if (!std::isfinite(value)) throw ValidationError("point: value must be finite");
    return {Family::point, value, 0.0, {}};
}

ContinuousLaw ContinuousLaw::exponential_mixture(std::vector<ExpComponent> components) {
    if (components.empty()) throw ValidationError("shifted_exponential: no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0) || c.scale == 0.0 || !std::isfinite(c.shift) || !std::isfinite(c.scale))
            throw ValidationError("shifted_exponential: weights must be positive and scales nonzero");
        total += c.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw ValidationError("shifted_exponential: weights must sum to 1");
    return {Family::shifted_exponential, 0.0, 0.0, std::move(components)};
}

double ContinuousLaw::mean() const {
    switch (family) {
        case Family::normal: return a;
        case Family::uniform: return 0.5 * (a + b);
        case Family::point: return a;
        case Family::shifted_exponential: {
            double m = 0.0;
            for (const auto& c : components) m += c.weight * (c.shift + c.scale);
            return m;
        }
    }
    return 0.0;
}

namespace {

double exp_cdf(const ExpComponent& c, double x) {
    const double t = x - c.shift;
    if (c.scale > 0) return t <= 0 ? 0.0 : -std::expm1(-t / c.scale);
    const double s = -c.scale;
    return t >= 0 ? 1.0 : std::exp(t / s);
}

double exp_integrated_cdf(const ExpComponent& c, double x) {
    const double t = x - c.shift;
    if (c.scale > 0) return t <= 0 ? 0.0 : t + c.scale * std::expm1(-t / c.scale);
    const double s = -c.scale;
    return t >= 0 ? s + t : s * std::exp(t / s);
}

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

}  // namespace

double ContinuousLaw::cdf(double x) const {
    switch (family) {
        case Family::normal: return boost::math::cdf(kStdNormal, (x - a) / b);
        case Family::uniform: return x <= a ? 0.0 : (x >= b ? 1.0 : (x - a) / (b - a));
        case Family::point: return x >= a ? 1.0 : 0.0;
        case Family::shifted_exponential: {
            double f = 0.0;
            for (const auto& c : components) f += c.weight * exp_cdf(c, x);
            return f;
        }
    }
    return 0.0;
}

double ContinuousLaw::integrated_cdf(double x) const {
    switch (family) {
        case Family::normal: {
            const double z = (x - a) / b;
            return b * (z * boost::math::cdf(kStdNormal, z) + boost::math::pdf(kStdNormal, z));
        }
        case Family::uniform:
            if (x <= a) return 0.0;
            if (x <= b) return (x - a) * (x - a) / (2.0 * (b - a));
            return 0.5 * (b - a) + (x - b);
        case Family::point: return std::max(0.0, x - a);
        case Family::shifted_exponential: {
            double s = 0.0;
            for (const auto& c : components) s += c.weight * exp_integrated_cdf(c, x);
            return s;
        }
    }
    return 0.0;
}

double ContinuousLaw::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw PreconditionError("quantile: u must lie in [0, 1]");
    switch (family) {
        case Family::normal:
            if (u <= 0.0) return -INFINITY;
            if (u >= 1.0) return INFINITY;
            return a + b * boost::math::quantile(kStdNormal, u);
        case Family::uniform: return a + u * (b - a);
        case Family::point: return a;
        case Family::shifted_exponential: {
            if (components.size() == 1) {
                const auto& c = components.front();
                if (c.scale > 0) return c.shift - c.scale * std::log1p(-u);
                return c.shift - c.scale * std::log(u);
            }
            // Bisection on the mixture CDF.
            double lo = 0.0, hi = 0.0;
            for (const auto& c : components) {
                lo = std::min(lo, c.shift - 60.0 * std::fabs(c.scale));
                hi = std::max(hi, c.shift + 60.0 * std::fabs(c.scale));
            }
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo) + std::fabs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

bool operator==(const ContinuousLaw& x, const ContinuousLaw& y) {
    if (x.family != y.family || x.a != y.a || x.b != y.b || x.components.size() != y.components.size()) return false;
    for (std::size_t i = 0; i < x.components.size(); ++i) {
        const auto& c = x.components[i];
        const auto& d = y.components[i];
        if (c.weight != d.weight || c.shift != d.shift || c.scale != d.scale) return false;
    }
    return true;
}

const LatticeLaws& WalkSpec::lattice() const {
    if (!is_lattice()) throw PreconditionError("operation needs a lattice spec");
    return std::get<LatticeLaws>(laws);
}

const ContinuousLaws& WalkSpec::continuous() const {
    if (is_lattice()) throw PreconditionError("operation needs a continuous spec");
    return std::get<ContinuousLaws>(laws);
}

bool WalkSpec::is_random_walk() const {
    if (is_lattice()) return lattice().x1 == lattice().x1p;
    return continuous().x1 == continuous().x1p;
}

FinitePmf<Rational> lattice_law(const Span& h, const std::vector<std::pair<Index, Rational>>& atoms) {
    std::map<Index, Rational> m;
    Rational total = 0;
    for (const auto& [k, p] : atoms) {
        if (p < 0) throw ValidationError("probabilities must be non-negative");
        m[k] += p;
        total += p;
    }
    if (total != 1) {
        // Decimal inputs that were rounded by the author are accepted within
        // the declared tolerance and renormalized.
        const double err = std::fabs(to_double(Rational(total - 1)));
        if (err > 1e-12) throw ValidationError("probabilities must sum to 1 (off by " + std::to_string(err) + ")");
        for (auto& [k, p] : m) p /= total;
    }
    return FinitePmf<Rational>(FiniteMeasure<Rational>::from_atoms(h, m), Rational(0));
}

WalkSpec lattice_spec(const FinitePmf<Rational>& x1, const FinitePmf<Rational>& x1p, const Rational& alpha,
                      bool exact_input) {
    if (alpha < 0 || alpha > 1) throw ValidationError("alpha must lie in [0, 1]");
    if (!x1.is_proper() || !x1p.is_proper()) throw ValidationError("increment laws must be proper");
    const auto degenerate = [](const FinitePmf<Rational>& x) { return x.at(0) == 1; };
    if (degenerate(x1) || degenerate(x1p))
        throw ValidationError("oscillation condition fails: an increment law is degenerate at 0");
    if (x1.mean() > 0) throw ValidationError("oscillation condition fails: E X1 must be <= 0");
    if (x1p.mean() < 0) throw ValidationError("oscillation condition fails: E X1' must be >= 0");
    const auto det = detect_span(x1, x1p);
    LatticeLaws laws;
    laws.base = x1.span();
    laws.factor = det.factor;
    laws.span = det.span;
    laws.x1 = det.x1;
    laws.x1p = det.x1p;
    WalkSpec spec;
    spec.laws = std::move(laws);
    spec.alpha = alpha;
    spec.exact_input = exact_input;
    return spec;
}

WalkSpec continuous_spec(const ContinuousLaw& x1, const ContinuousLaw& x1p, const Rational& alpha) {
    if (alpha < 0 || alpha > 1) throw ValidationError("alpha must lie in [0, 1]");
    if (x1.mean() > 0) throw ValidationError("oscillation condition fails: E X1 must be <= 0");
    if (x1p.mean() < 0) throw ValidationError("oscillation condition fails: E X1' must be >= 0");
    WalkSpec spec;
    spec.laws = ContinuousLaws{x1, x1p};
    spec.alpha = alpha;
    spec.exact_input = false;
    return spec;
}

}  // namespace switchwalk
