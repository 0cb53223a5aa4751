#include "switchwalk/ladder.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

#include <cmath>
#include <complex>
#include <numeric>

namespace switchwalk {

namespace {

using cld = std::complex<long double>;

// Increment law reduced by the gcd of its support, as plain probabilities on
// [-down, up].
struct ReducedLaw {
    Index g = 1;
    Index down = 0;  // m: largest downward jump
    Index up = 0;    // M: largest upward jump
    std::vector<Rational> prob;  // prob[k + down] = P(Y = k)
    int mean_sign = 0;

    Rational at(Index k) const {
        if (k < -down || k > up) return Rational(0);
        return prob[static_cast<std::size_t>(k + down)];
    }
};

ReducedLaw reduce(const FinitePmf<Rational>& x) {
    if (!x.is_proper()) throw PreconditionError("ladder: increment law must be proper");
    const auto support = support_of(x.atoms());
    const Index g = support_gcd({&support});
    if (g == 0) throw PreconditionError("ladder: increment law is degenerate at 0");
    ReducedLaw r;
    r.g = g;
    r.down = std::max<Index>(0, -support.front() / g);
    r.up = std::max<Index>(0, support.back() / g);
    r.prob.assign(static_cast<std::size_t>(r.down + r.up + 1), Rational(0));
    Rational mean = 0;
    for (Index k : support) {
        r.prob[static_cast<std::size_t>(k / g + r.down)] = x.at(k);
        mean += x.at(k) * (k / g);
    }
    r.mean_sign = mean < 0 ? -1 : (mean > 0 ? 1 : 0);
    return r;
}

// Coefficients (ascending powers) of z^m (1 - E z^Y).
std::vector<Rational> characteristic_poly(const ReducedLaw& y) {
    const Index n = y.down + y.up;
    std::vector<Rational> c(static_cast<std::size_t>(n + 1), Rational(0));
    for (Index j = 0; j <= n; ++j) c[static_cast<std::size_t>(j)] = -y.at(j - y.down);
    c[static_cast<std::size_t>(y.down)] += 1;
    return c;
}

template <class T>
std::vector<T> divide_by_z_minus_one(const std::vector<T>& a, T& remainder) {
    const std::size_t n = a.size() - 1;
    std::vector<T> b(n, T(0));
    T carry(0);
    for (std::size_t k = n; k >= 1; --k) {
        carry = a[k] + carry;
        b[k - 1] = carry;
    }
    remainder = a[0] + carry;
    return b;
}

cld horner(const std::vector<long double>& c, cld z) {
    cld v(0);
    for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
    return v;
}

cld horner_derivative(const std::vector<long double>& c, cld z) {
    cld v(0);
    for (std::size_t k = c.size(); k-- > 1;) v = v * z + c[k] * static_cast<long double>(k);
    return v;
}

std::vector<cld> polynomial_roots(const std::vector<Rational>& coeffs) {
    const std::size_t degree = coeffs.size() - 1;
    if (degree == 0) return {};
    std::vector<long double> cl(coeffs.size());
    Eigen::VectorXd cd(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        cl[k] = coeffs[k].convert_to<long double>();
        cd[static_cast<Eigen::Index>(k)] = static_cast<double>(cl[k]);
    }
    std::vector<cld> roots;
    if (degree == 1) {
        roots.emplace_back(-cl[0] / cl[1], 0.0L);
        return roots;
    }
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(cd);
    for (const auto& r : solver.roots()) roots.emplace_back(r.real(), r.imag());
    // Newton polish in extended precision.
    for (auto& z : roots) {
        for (int it = 0; it < 60; ++it) {
            const cld d = horner_derivative(cl, z);
            if (std::abs(d) == 0.0L) break;
            const cld step = horner(cl, z) / d;
            z -= step;
            if (std::abs(step) <= 1e-19L * std::max(1.0L, std::abs(z))) break;
        }
    }
    return roots;
}

std::vector<cld> multiply_linear(const std::vector<cld>& p, cld c0, cld c1) {
    // p(z) * (c0 + c1 z)
    std::vector<cld> out(p.size() + 1, cld(0));
    for (std::size_t k = 0; k < p.size(); ++k) {
        out[k] += p[k] * c0;
        out[k + 1] += p[k] * c1;
    }
    return out;
}

// Masses of D (d[i] = P(D = -i)) and A_s (as[k] = P(A_s = k)) on the reduced
// lattice, from the roots of z^m (1 - E z^Y).
struct NumericFactors {
    std::vector<long double> d;
    std::vector<long double> as;
};

NumericFactors numeric_factors(const ReducedLaw& y) {
    const Index m = y.down;
    const Index M = y.up;
    auto poly = characteristic_poly(y);
    const Rational p0 = poly[0];
    const int unit_roots = y.mean_sign == 0 ? 2 : 1;
    for (int i = 0; i < unit_roots; ++i) {
        Rational rem;
        poly = divide_by_z_minus_one(poly, rem);
        if (rem != 0) throw NumericalError("ladder: z = 1 is not a root of the characteristic polynomial");
    }
    const auto roots = polynomial_roots(poly);
    std::vector<cld> inside, outside;
    for (const auto& r : roots) {
        const long double mod = std::abs(r);
        if (std::fabs(mod - 1.0L) < 1e-12L) throw NumericalError("ladder: characteristic root on the unit circle");
        (mod < 1.0L ? inside : outside).push_back(r);
    }
    const Index want_inside = m - (y.mean_sign <= 0 ? 1 : 0);
    const Index want_outside = M - (y.mean_sign >= 0 ? 1 : 0);
    if (static_cast<Index>(inside.size()) != want_inside || static_cast<Index>(outside.size()) != want_outside)
        throw NumericalError("ladder: root split does not match the jump ranges");

    // Monic descending factor Q_D(z) = prod (z - r) [* (z - 1)].
    std::vector<cld> qd{cld(1)};
    for (const auto& r : inside) qd = multiply_linear(qd, -r, cld(1));
    if (y.mean_sign <= 0) qd = multiply_linear(qd, cld(-1), cld(1));
    const cld c = cld(p0.convert_to<long double>()) / qd[0];
    NumericFactors out;
    out.d.assign(static_cast<std::size_t>(m + 1), 0.0L);
    out.d[0] = 1.0L - c.real();
    for (Index i = 1; i <= m; ++i) out.d[static_cast<std::size_t>(i)] = -(c * qd[static_cast<std::size_t>(m - i)]).real();

    // 1 - E z^{A_s} = prod (1 - z / r) [* (1 - z)].
    std::vector<cld> ga{cld(1)};
    for (const auto& r : outside) ga = multiply_linear(ga, cld(1), -cld(1) / r);
    if (y.mean_sign >= 0) ga = multiply_linear(ga, cld(1), cld(-1));
    out.as.assign(static_cast<std::size_t>(M + 1), 0.0L);
    for (Index k = 1; k <= M; ++k) out.as[static_cast<std::size_t>(k)] = -ga[static_cast<std::size_t>(k)].real();
    return out;
}

// Best rational approximation by continued fractions, or nullopt if none with
// a small denominator is within `tol`.
std::optional<Rational> rationalize(long double x, long double tol) {
    if (x < 0) {
        if (x > -tol) return Rational(0);
        return std::nullopt;
    }
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    long double rest = x;
    for (int it = 0; it < 64; ++it) {
        const long double a = std::floor(rest);
        if (a > 1e12L) break;
        const auto ai = static_cast<long long>(a);
        const long long p2 = ai * p1 + p0;
        const long long q2 = ai * q1 + q0;
        if (q2 > 100'000'000LL) break;
        p0 = p1, q0 = q1, p1 = p2, q1 = q2;
        if (std::fabs(x - static_cast<long double>(p1) / static_cast<long double>(q1)) <= tol)
            return Rational(p1) / Rational(q1);
        const long double frac = rest - a;
        if (frac <= 0) break;
        rest = 1.0L / frac;
    }
    return std::nullopt;
}

// Exact masses from the numeric ones: rationalize D and confirm that its
// factor divides the characteristic polynomial exactly.
void exact_factors(const ReducedLaw& y, const NumericFactors& nf, std::vector<Rational>& d, std::vector<Rational>& as) {
    const Index m = y.down;
    const Index M = y.up;
    d.assign(static_cast<std::size_t>(m + 1), Rational(0));
    for (Index i = 0; i <= m; ++i) {
        auto r = rationalize(nf.d[static_cast<std::size_t>(i)], 1e-14L);
        if (!r) throw InexactError("ladder: descending ladder law is not a small-denominator rational");
        d[static_cast<std::size_t>(i)] = *r;
    }
    // F(z) = z^m (1 - E z^D), ascending coefficients.
    std::vector<Rational> f(static_cast<std::size_t>(m + 1));
    f[static_cast<std::size_t>(m)] = 1 - d[0];
    for (Index i = 1; i <= m; ++i) f[static_cast<std::size_t>(m - i)] = -d[static_cast<std::size_t>(i)];
    if (f[static_cast<std::size_t>(m)] == 0) throw InexactError("ladder: degenerate descending factor");

    // Long division of the characteristic polynomial by F.
    std::vector<Rational> num = characteristic_poly(y);
    std::vector<Rational> quot(static_cast<std::size_t>(M + 1), Rational(0));
    for (Index k = M; k >= 0; --k) {
        const Rational coef = num[static_cast<std::size_t>(k + m)] / f[static_cast<std::size_t>(m)];
        quot[static_cast<std::size_t>(k)] = coef;
        for (Index j = 0; j <= m; ++j) num[static_cast<std::size_t>(k + j)] -= coef * f[static_cast<std::size_t>(j)];
    }
    for (const auto& r : num)
        if (r != 0) throw InexactError("ladder: rationalized factor does not divide exactly");
    if (quot[0] != 1) throw InexactError("ladder: rationalized factor has the wrong normalization");
    as.assign(static_cast<std::size_t>(M + 1), Rational(0));
    for (Index k = 1; k <= M; ++k) as[static_cast<std::size_t>(k)] = -quot[static_cast<std::size_t>(k)];
    Rational total_d = 0, total_as = 0;
    for (const auto& v : d) {
        if (v < 0) throw InexactError("ladder: negative rational mass");
        total_d += v;
    }
    for (const auto& v : as) {
        if (v < 0) throw InexactError("ladder: negative rational mass");
        total_as += v;
    }
    if (total_d > 1 || total_as > 1) throw InexactError("ladder: rational masses exceed one");
}

template <Scalar T>
FinitePmf<T> make_law(const Span& h, const std::map<Index, T>& atoms, bool proper) {
    auto measure = FiniteMeasure<T>::from_atoms(h, atoms);
    if constexpr (ScalarTraits<T>::is_exact) {
        return FinitePmf<T>::from_measure(std::move(measure));
    } else {
        if (proper) return FinitePmf<T>(std::move(measure), 0.0);
        return FinitePmf<T>::from_measure(std::move(measure));
    }
}

template <Scalar T>
T clamp_small(T v) {
    if constexpr (!ScalarTraits<T>::is_exact) {
        if (v < 0) {
            if (v < -1e-12) throw NumericalError("ladder: negative mass from the factorization");
            return 0.0;
        }
    }
    return v;
}

template <Scalar T>
WienerHopfFactors<T> assemble(const Span& h, const ReducedLaw& y, const std::vector<T>& d, const std::vector<T>& as) {
    const Index g = y.g;
    const T zeta = clamp_small<T>(d[0]);
    std::map<Index, T> weak_desc, strict_desc, weak_asc, strict_asc;
    if (!is_zero(zeta)) {
        weak_desc[0] = zeta;
        weak_asc[0] = zeta;
    }
    for (std::size_t i = 1; i < d.size(); ++i) {
        const T v = clamp_small<T>(d[i]);
        if (is_zero(v)) continue;
        const Index k = -static_cast<Index>(i) * g;
        weak_desc[k] = v;
        strict_desc[k] = v / (T(1) - zeta);
    }
    for (std::size_t k = 1; k < as.size(); ++k) {
        const T v = clamp_small<T>(as[k]);
        if (is_zero(v)) continue;
        strict_asc[static_cast<Index>(k) * g] = v;
        weak_asc[static_cast<Index>(k) * g] = (T(1) - zeta) * v;
    }
    WienerHopfFactors<T> out;
    out.weak_descending = make_law<T>(h, weak_desc, y.mean_sign <= 0);
    out.strict_descending = make_law<T>(h, strict_desc, y.mean_sign <= 0);
    out.weak_ascending = make_law<T>(h, weak_asc, y.mean_sign >= 0);
    out.strict_ascending = make_law<T>(h, strict_asc, y.mean_sign >= 0);
    return out;
}

}  // namespace

template <Scalar T>
WienerHopfFactors<T> wiener_hopf_factors(const FinitePmf<Rational>& x, double tol) {
    const ReducedLaw y = reduce(x);
    const NumericFactors nf = numeric_factors(y);
    WienerHopfFactors<T> out;
    if constexpr (ScalarTraits<T>::is_exact) {
        std::vector<Rational> d, as;
        exact_factors(y, nf, d, as);
        out = assemble<Rational>(x.span(), y, d, as);
        const Rational res = wiener_hopf_residual(x, out.strict_ascending, out.weak_descending);
        out.residual = to_double(res);
        out.certified = res == 0;
    } else {
        std::vector<double> d(nf.d.begin(), nf.d.end());
        std::vector<double> as(nf.as.begin(), nf.as.end());
        out = assemble<double>(x.span(), y, d, as);
        out.residual = wiener_hopf_residual(x.cast<double>(), out.strict_ascending, out.weak_descending);
        out.certified = out.residual <= tol;
    }
    return out;
}

template WienerHopfFactors<double> wiener_hopf_factors<double>(const FinitePmf<Rational>&, double);
template WienerHopfFactors<Rational> wiener_hopf_factors<Rational>(const FinitePmf<Rational>&, double);

// ---------------------------------------------------------------------------
// Truncated absorbing-chain solve

namespace {

// Solves A v = b for a banded matrix with kl sub- and ku super-diagonals by
// LU without pivoting (A is a nonsingular M-matrix here).
class BandedSystem {
public:
    BandedSystem(Index n, Index kl, Index ku)
        : n_(n), kl_(kl), ku_(ku), width_(kl + ku + 1), a_(static_cast<std::size_t>(n * (kl + ku + 1)), 0.0) {}

    double& at(Index i, Index j) { return a_[static_cast<std::size_t>(i * width_ + (j - i + kl_))]; }

    std::vector<double> solve(std::vector<double> b) {
        for (Index k = 0; k < n_; ++k) {
            const double pivot = at(k, k);
            if (pivot == 0.0) throw NumericalError("truncated ladder solve: zero pivot");
            const Index last = std::min(n_ - 1, k + kl_);
            for (Index i = k + 1; i <= last; ++i) {
                double& lik = at(i, k);
                if (lik == 0.0) continue;
                lik /= pivot;
                const Index jlast = std::min(n_ - 1, k + ku_);
                for (Index j = k + 1; j <= jlast; ++j) at(i, j) -= lik * at(k, j);
                b[static_cast<std::size_t>(i)] -= lik * b[static_cast<std::size_t>(k)];
            }
        }
        for (Index i = n_ - 1; i >= 0; --i) {
            double s = b[static_cast<std::size_t>(i)];
            const Index jlast = std::min(n_ - 1, i + ku_);
            for (Index j = i + 1; j <= jlast; ++j) s -= at(i, j) * b[static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(i)] = s / at(i, i);
        }
        return b;
    }

private:
    Index n_, kl_, ku_, width_;
    std::vector<double> a_;
};

// Descending ladder law with transient states [first, level]: first = 1 for
// the weak kind (absorbed at <= 0), first = 0 for the strict kind (< 0).
std::map<Index, double> descending_truncated(const FinitePmf<double>& x, Index first, Index level) {
    const Index lo = x.min_index();
    const Index hi = x.max_index();
    const Index n = level - first + 1;
    // Expected visits v solve (I - Q)^T v = initial, with Q(i, j) = P(X = j - i).
    BandedSystem sys(n, std::max<Index>(0, hi), std::max<Index>(0, -lo));
    for (Index i = 0; i < n; ++i) {
        sys.at(i, i) = 1.0;
        for (Index j = std::max<Index>(0, i - hi); j <= std::min(n - 1, i - lo); ++j) sys.at(i, j) -= x.at(i - j);
    }
    std::vector<double> init(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) init[static_cast<std::size_t>(i)] = x.at(i + first);
    const auto visits = sys.solve(std::move(init));
    std::map<Index, double> absorbed;
    for (Index k = lo; k < first; ++k)
        if (x.at(k) != 0.0) absorbed[k] += x.at(k);
    for (Index i = 0; i < n; ++i) {
        const Index state = i + first;
        const double v = visits[static_cast<std::size_t>(i)];
        if (v == 0.0) continue;
        for (Index k = lo; state + k < first; ++k) {
            const double pk = x.at(k);
            if (pk != 0.0) absorbed[state + k] += v * pk;
        }
    }
    return absorbed;
}

}  // namespace

LadderLaw<double> ladder_law_truncated(const FinitePmf<Rational>& x, Direction dir, LadderKind kind,
                                       const LadderOptions& opts) {
    if (!(opts.tol > 0)) throw PreconditionError("ladder_law: tol must be positive");
    const ReducedLaw y = reduce(x);
    // Work on the reduced, descending-oriented lattice.
    std::map<Index, Rational> atoms;
    for (Index k = -y.down; k <= y.up; ++k)
        if (y.at(k) != 0) atoms[dir == Direction::descending ? k : -k] = y.at(k);
    const FinitePmf<double> z = FinitePmf<Rational>(FiniteMeasure<Rational>::from_atoms(Span{}, atoms), Rational(0))
                                    .cast<double>();
    const int drift_away = dir == Direction::descending ? y.mean_sign : -y.mean_sign;
    const Index first = kind == LadderKind::weak ? 1 : 0;

    Index level = std::max(opts.initial_level, 4 * (y.down + y.up));
    std::optional<FiniteMeasure<double>> previous;
    LadderLaw<double> out;
    out.method = LadderMethod::truncated_solve;
    for (;;) {
        const auto masses = FiniteMeasure<double>::from_atoms(Span{}, descending_truncated(z, first, level));
        const double unabsorbed = std::max(0.0, 1.0 - masses.total());
        double change = 1.0;
        if (previous) change = distance(*previous, masses, Norm::total_variation).value;
        const bool converged = change <= opts.tol && (drift_away > 0 || unabsorbed <= opts.tol);
        if (converged || level >= opts.max_level) {
            FiniteMeasure<double> scaled = masses;
            if (dir == Direction::ascending) scaled = scaled.reflected();
            scaled = scaled.dilated(y.g);
            out.law = FinitePmf<double>::from_measure(FiniteMeasure<double>(x.span(), scaled.lo(), scaled.masses()));
            out.certified = converged;
            out.truncation_level = level;
            out.tol_achieved = drift_away > 0 ? change : std::max(change, unabsorbed);
            return out;
        }
        previous = masses;
        level = std::min(opts.max_level, 2 * level);
    }
}

// ---------------------------------------------------------------------------

template <Scalar T>
LadderSystem<T> ladder_system(const FinitePmf<Rational>& x1, const FinitePmf<Rational>& x1p, const Rational& alpha,
                              const LadderOptions& opts) {
    require_same_span(x1.span(), x1p.span(), "ladder_system");
    if (alpha < 0 || alpha > 1) throw ValidationError("alpha must lie in [0, 1]");
    const auto f = wiener_hopf_factors<T>(x1, opts.tol);
    const auto fp = wiener_hopf_factors<T>(x1p, opts.tol);
    LadderSystem<T> s;
    s.D = f.weak_descending;
    s.A = f.weak_ascending;
    s.A_strict = f.strict_ascending;
    s.D_strict = f.strict_descending;
    s.A_prime = fp.weak_ascending;
    s.D_prime = fp.weak_descending;
    s.A_strict_prime = fp.strict_ascending;
    s.D_strict_prime = fp.strict_descending;
    s.p = s.D.prob_lt(0);
    s.p_prime = s.A_prime.prob_gt(0);
    s.a = switch_weight(s.p, s.p_prime, alpha);
    s.q = T(1) - s.A_strict.total();
    s.q_prime = T(1) - s.D_strict_prime.total();
    if constexpr (!ScalarTraits<T>::is_exact) {
        s.q = std::max(0.0, s.q);
        s.q_prime = std::max(0.0, s.q_prime);
    }
    s.alpha = alpha;
    s.tol_achieved = std::max(f.residual, fp.residual);
    s.certified = f.certified && fp.certified;
    s.method = LadderMethod::wiener_hopf;
    return s;
}

template LadderSystem<double> ladder_system<double>(const FinitePmf<Rational>&, const FinitePmf<Rational>&,
                                                    const Rational&, const LadderOptions&);
template LadderSystem<Rational> ladder_system<Rational>(const FinitePmf<Rational>&, const FinitePmf<Rational>&,
                                                        const Rational&, const LadderOptions&);

}  // namespace switchwalk
