#pragma once

// Finitely supported and windowed measures on a lattice h*Z.
//
// Conventions:
//   * Lattice points are stored as integer indices k, standing for k*h.
//   * FiniteMeasure / FinitePmf store atom masses.
//   * WindowDensity stores densities with respect to the Haar measure that
//     gives every lattice atom mass h, so an atom's mass is value(k) * h.

#include "switchwalk/errors.hpp"
#include "switchwalk/scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace switchwalk {

using Index = std::int64_t;

inline constexpr Index kNegInf = std::numeric_limits<Index>::min() / 4;
inline constexpr Index kPosInf = std::numeric_limits<Index>::max() / 4;

struct Span {
    Rational step{1};

    Span() = default;
    explicit Span(Rational s) : step(std::move(s)) {
        if (step <= 0) throw PreconditionError("lattice step must be positive");
    }
    friend bool operator==(const Span&, const Span&) = default;
};

inline void require_same_span(const Span& a, const Span& b, const char* what) {
    if (!(a == b)) throw SpanMismatch(std::string(what) + ": span mismatch");
}

template <Scalar T>
T span_value(const Span& h) {
    return from_rational<T>(h.step);
}

// Sign restriction at the switching point: `plus` keeps x>0 and alpha*mass at
// 0, `minus` keeps x<0 and (1-alpha)*mass at 0.
enum class Sign { plus, minus };

struct SignRestriction {
    Rational alpha;
    Sign sign;
};

// ---------------------------------------------------------------------------
// FiniteMeasure

template <Scalar T>
class FiniteMeasure {
public:
    FiniteMeasure() = default;

    FiniteMeasure(Span h, Index lo, std::vector<T> masses)
        : span_(std::move(h)), lo_(lo), mass_(std::move(masses)) {
        trim();
    }

    static FiniteMeasure delta(Span h, Index k, T mass = T(1)) {
        return FiniteMeasure(std::move(h), k, std::vector<T>{std::move(mass)});
    }

    static FiniteMeasure from_atoms(Span h, const std::map<Index, T>& atoms) {
        if (atoms.empty()) return FiniteMeasure(std::move(h), 0, {});
        const Index lo = atoms.begin()->first;
        const Index hi = atoms.rbegin()->first;
        std::vector<T> m(static_cast<std::size_t>(hi - lo + 1), T(0));
        for (const auto& [k, v] : atoms) m[static_cast<std::size_t>(k - lo)] += v;
        return FiniteMeasure(std::move(h), lo, std::move(m));
    }

    const Span& span() const { return span_; }
    bool empty() const { return mass_.empty(); }
    Index lo() const { return lo_; }
    Index min_index() const { return lo_; }
    Index max_index() const { return lo_ + static_cast<Index>(mass_.size()) - 1; }
    const std::vector<T>& masses() const { return mass_; }

    T at(Index k) const {
        if (empty() || k < lo_ || k > max_index()) return T(0);
        return mass_[static_cast<std::size_t>(k - lo_)];
    }

    T total() const {
        T s(0);
        for (const auto& v : mass_) s += v;
        return s;
    }

    T min_mass() const {
        T m(0);
        for (const auto& v : mass_) m = std::min(m, v);
        return m;
    }

    // Mass on {k : pred(k)}.
    template <class Pred>
    T mass_where(Pred pred) const {
        T s(0);
        for (std::size_t i = 0; i < mass_.size(); ++i)
            if (pred(lo_ + static_cast<Index>(i))) s += mass_[i];
        return s;
    }

    FiniteMeasure scaled(const T& c) const {
        std::vector<T> m = mass_;
        for (auto& v : m) v *= c;
        return FiniteMeasure(span_, lo_, std::move(m));
    }

    // k -> factor * k
    FiniteMeasure dilated(Index factor) const {
        std::map<Index, T> atoms;
        for (std::size_t i = 0; i < mass_.size(); ++i)
            if (!is_zero(mass_[i])) atoms[(lo_ + static_cast<Index>(i)) * factor] += mass_[i];
        return from_atoms(span_, atoms);
    }

    // k -> -k
    FiniteMeasure reflected() const {
        std::vector<T> m(mass_.rbegin(), mass_.rend());
        return empty() ? *this : FiniteMeasure(span_, -max_index(), std::move(m));
    }

    template <Scalar U>
    FiniteMeasure<U> cast() const {
        std::vector<U> m;
        m.reserve(mass_.size());
        for (const auto& v : mass_) {
            if constexpr (std::is_same_v<U, T>) {
                m.push_back(v);
            } else if constexpr (std::is_same_v<U, double>) {
                m.push_back(to_double(v));
            } else {
                m.push_back(rational_from_double(to_double(v)));
            }
        }
        return FiniteMeasure<U>(span_, lo_, std::move(m));
    }

    friend FiniteMeasure operator+(const FiniteMeasure& a, const FiniteMeasure& b) {
        return combine(a, b, T(1));
    }
    friend FiniteMeasure operator-(const FiniteMeasure& a, const FiniteMeasure& b) {
        return combine(a, b, T(-1));
    }
    friend bool operator==(const FiniteMeasure& a, const FiniteMeasure& b) {
        return a.span_ == b.span_ && a.lo_ == b.lo_ && a.mass_ == b.mass_;
    }

private:
    static FiniteMeasure combine(const FiniteMeasure& a, const FiniteMeasure& b, const T& sign) {
        require_same_span(a.span_, b.span_, "measure arithmetic");
        if (a.empty()) return b.scaled(sign);
        if (b.empty()) return a;
        const Index lo = std::min(a.min_index(), b.min_index());
        const Index hi = std::max(a.max_index(), b.max_index());
        std::vector<T> m(static_cast<std::size_t>(hi - lo + 1), T(0));
        for (Index k = lo; k <= hi; ++k) m[static_cast<std::size_t>(k - lo)] = a.at(k) + sign * b.at(k);
        return FiniteMeasure(a.span_, lo, std::move(m));
    }

    void trim() {
        std::size_t first = 0;
        while (first < mass_.size() && is_zero(mass_[first])) ++first;
        if (first == mass_.size()) {
            mass_.clear();
            lo_ = 0;
            return;
        }
        std::size_t last = mass_.size();
        while (is_zero(mass_[last - 1])) --last;
        if (first > 0 || last < mass_.size()) {
            mass_ = std::vector<T>(mass_.begin() + static_cast<std::ptrdiff_t>(first),
                                   mass_.begin() + static_cast<std::ptrdiff_t>(last));
            lo_ += static_cast<Index>(first);
        }
    }

    Span span_{};
    Index lo_ = 0;
    std::vector<T> mass_;
};

// ---------------------------------------------------------------------------
// FinitePmf: a sub-probability law with explicit defect (mass "at infinity").

template <Scalar T>
class FinitePmf {
public:
    static constexpr double kMassTolerance = 1e-10;

    FinitePmf() : defect_(1) {}

    FinitePmf(FiniteMeasure<T> atoms, T defect) : atoms_(std::move(atoms)), defect_(std::move(defect)) {
        validate();
    }

    // Defect is whatever mass the atoms do not account for.
    static FinitePmf from_measure(FiniteMeasure<T> atoms) {
        T d = T(1) - atoms.total();
        if constexpr (!ScalarTraits<T>::is_exact) {
            if (d < 0 && d > -kMassTolerance) d = 0;
        }
        return FinitePmf(std::move(atoms), std::move(d));
    }

    static FinitePmf delta(Span h, Index k) { return FinitePmf(FiniteMeasure<T>::delta(std::move(h), k), T(0)); }

    static FinitePmf totally_defective(Span h) { return FinitePmf(FiniteMeasure<T>(std::move(h), 0, {}), T(1)); }

    const FiniteMeasure<T>& atoms() const { return atoms_; }
    const Span& span() const { return atoms_.span(); }
    const T& defect() const { return defect_; }
    bool empty() const { return atoms_.empty(); }
    Index min_index() const { return atoms_.min_index(); }
    Index max_index() const { return atoms_.max_index(); }
    T at(Index k) const { return atoms_.at(k); }
    T total() const { return atoms_.total(); }

    bool is_proper(double tol = 0.0) const { return to_double(defect_) <= tol; }

    T prob_lt(Index x) const { return atoms_.mass_where([x](Index k) { return k < x; }); }
    T prob_le(Index x) const { return atoms_.mass_where([x](Index k) { return k <= x; }); }
    T prob_gt(Index x) const { return atoms_.mass_where([x](Index k) { return k > x; }); }
    T prob_ge(Index x) const { return atoms_.mass_where([x](Index k) { return k >= x; }); }

    T mean() const {
        T s(0);
        const auto& m = atoms_.masses();
        for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * T(atoms_.lo() + static_cast<Index>(i));
        return s;
    }

    FinitePmf reflected() const { return FinitePmf(atoms_.reflected(), defect_); }
    FinitePmf dilated(Index f) const { return FinitePmf(atoms_.dilated(f), defect_); }

    template <Scalar U>
    FinitePmf<U> cast() const {
        auto a = atoms_.template cast<U>();
        if constexpr (std::is_same_v<U, T>) {
            return FinitePmf<U>(std::move(a), defect_);
        } else {
            return FinitePmf<U>::from_measure(std::move(a));
        }
    }

    friend bool operator==(const FinitePmf& a, const FinitePmf& b) {
        return a.atoms_ == b.atoms_ && a.defect_ == b.defect_;
    }

private:
    void validate() const {
        const double tol = ScalarTraits<T>::is_exact ? 0.0 : kMassTolerance;
        if (to_double(atoms_.min_mass()) < -tol) throw PreconditionError("FinitePmf: negative mass");
        if (to_double(defect_) < -tol) throw PreconditionError("FinitePmf: negative defect");
        const T s = atoms_.total() + defect_;
        if constexpr (ScalarTraits<T>::is_exact) {
            if (s != 1) throw PreconditionError("FinitePmf: masses and defect must sum to 1");
        } else {
            if (std::fabs(s - 1.0) > tol) throw PreconditionError("FinitePmf: masses and defect must sum to 1");
        }
    }

    FiniteMeasure<T> atoms_;
    T defect_;
};

// ---------------------------------------------------------------------------
// WindowDensity

enum class TailKind { zero, unknown, constant };

template <Scalar T>
struct Tail {
    TailKind kind = TailKind::unknown;
    T value{0};

    static Tail zero() { return {TailKind::zero, T(0)}; }
    static Tail unknown() { return {TailKind::unknown, T(0)}; }
    static Tail constant(T c) { return {TailKind::constant, std::move(c)}; }
    bool declared() const { return kind != TailKind::unknown; }
};

inline const char* to_string(TailKind k) {
    switch (k) {
        case TailKind::zero: return "zero-beyond-window";
        case TailKind::unknown: return "unknown-beyond-window";
        case TailKind::constant: return "constant-beyond-window";
    }
    return "?";
}

// Density on the lattice window [lo, hi]. Values are exact on the interior
// [interior_lo, interior_hi]; outside the window the tail notes say what is
// known. A declared tail on one side requires the interior to reach that edge.
template <Scalar T>
class WindowDensity {
public:
    WindowDensity() = default;

    WindowDensity(Span h, Index lo, std::vector<T> values, Index interior_lo, Index interior_hi,
                  Tail<T> left, Tail<T> right)
        : span_(std::move(h)),
          lo_(lo),
          values_(std::move(values)),
          ilo_(interior_lo),
          ihi_(interior_hi),
          left_(std::move(left)),
          right_(std::move(right)) {
        if (values_.empty()) throw PreconditionError("WindowDensity: empty window");
        if (has_interior() && (ilo_ < lo_ || ihi_ > hi()))
            throw PreconditionError("WindowDensity: interior must lie inside the window");
        if (left_.declared() && (!has_interior() || ilo_ != lo_))
            throw PreconditionError("WindowDensity: declared left tail needs interior up to the edge");
        if (right_.declared() && (!has_interior() || ihi_ != hi()))
            throw PreconditionError("WindowDensity: declared right tail needs interior up to the edge");
    }

    // Density of a finite measure, zero beyond its support.
    static WindowDensity from_measure(const FiniteMeasure<T>& m) {
        if (m.empty()) {
            return WindowDensity(m.span(), 0, std::vector<T>{T(0)}, 0, 0, Tail<T>::zero(), Tail<T>::zero());
        }
        const T h = span_value<T>(m.span());
        std::vector<T> v;
        v.reserve(m.masses().size());
        for (const auto& x : m.masses()) v.push_back(x / h);
        const Index lo = m.min_index();
        const Index hi = m.max_index();
        return WindowDensity(m.span(), lo, std::move(v), lo, hi, Tail<T>::zero(), Tail<T>::zero());
    }

    // Constant density c on [lo, hi] with constant tails: c * lambda.
    static WindowDensity constant(Span h, Index lo, Index hi, T c) {
        std::vector<T> v(static_cast<std::size_t>(hi - lo + 1), c);
        return WindowDensity(std::move(h), lo, std::move(v), lo, hi, Tail<T>::constant(c), Tail<T>::constant(c));
    }

    const Span& span() const { return span_; }
    Index lo() const { return lo_; }
    Index hi() const { return lo_ + static_cast<Index>(values_.size()) - 1; }
    Index interior_lo() const { return ilo_; }
    Index interior_hi() const { return ihi_; }
    bool has_interior() const { return ilo_ <= ihi_; }
    const Tail<T>& left_tail() const { return left_; }
    const Tail<T>& right_tail() const { return right_; }
    const std::vector<T>& values() const { return values_; }
    static constexpr Backend backend() { return ScalarTraits<T>::backend; }

    // Bounds of the provably exact region, kNegInf/kPosInf through declared tails.
    Index known_lo() const { return left_.declared() ? kNegInf : ilo_; }
    Index known_hi() const { return right_.declared() ? kPosInf : ihi_; }
    bool known(Index x) const { return has_interior() && x >= known_lo() && x <= known_hi(); }

    // Raw value: window entry, declared tail value, or 0 for an unknown tail.
    T value(Index x) const {
        if (x < lo_) return left_.declared() ? left_.value : T(0);
        if (x > hi()) return right_.declared() ? right_.value : T(0);
        return values_[static_cast<std::size_t>(x - lo_)];
    }

    T mass_at(Index x) const { return value(x) * span_value<T>(span_); }

    // Smallest value on the interior; used to detect signed results.
    T interior_min() const {
        T m(0);
        for (Index x = ilo_; x <= ihi_; ++x) m = std::min(m, value(x));
        return m;
    }

    bool is_signed(double threshold) const { return to_double(interior_min()) < -threshold; }

    // Same measure on a larger window; padding comes from declared tails.
    WindowDensity extended(Index new_lo, Index new_hi) const {
        new_lo = std::min(new_lo, lo_);
        new_hi = std::max(new_hi, hi());
        std::vector<T> v(static_cast<std::size_t>(new_hi - new_lo + 1));
        for (Index x = new_lo; x <= new_hi; ++x) v[static_cast<std::size_t>(x - new_lo)] = value(x);
        Index ilo = ilo_, ihi = ihi_;
        if (left_.declared()) ilo = new_lo;
        if (right_.declared()) ihi = new_hi;
        return WindowDensity(span_, new_lo, std::move(v), ilo, ihi, left_, right_);
    }

    // Values on [a, b] as a new zero-free window with unknown tails, keeping
    // only what is exact there.
    WindowDensity cropped(Index a, Index b) const {
        if (a > b) throw PreconditionError("WindowDensity::cropped: empty range");
        std::vector<T> v(static_cast<std::size_t>(b - a + 1));
        for (Index x = a; x <= b; ++x) v[static_cast<std::size_t>(x - a)] = value(x);
        const Index ilo = std::max(a, known_lo());
        const Index ihi = std::min(b, known_hi());
        return WindowDensity(span_, a, std::move(v), ilo, ihi, Tail<T>::unknown(), Tail<T>::unknown());
    }

    WindowDensity scaled(const T& c) const {
        auto v = values_;
        for (auto& x : v) x *= c;
        Tail<T> l = left_, r = right_;
        l.value *= c;
        r.value *= c;
        return WindowDensity(span_, lo_, std::move(v), ilo_, ihi_, l, r);
    }

    // Atoms on the window (finite measure view). Requires zero tails.
    FiniteMeasure<T> to_measure() const {
        if (left_.kind != TailKind::zero || right_.kind != TailKind::zero)
            throw PreconditionError("to_measure: density is not zero beyond its window");
        const T h = span_value<T>(span_);
        std::vector<T> m;
        m.reserve(values_.size());
        for (const auto& x : values_) m.push_back(x * h);
        return FiniteMeasure<T>(span_, lo_, std::move(m));
    }

    template <Scalar U>
    WindowDensity<U> cast() const {
        auto conv = [](const T& x) -> U {
            if constexpr (std::is_same_v<U, T>) return x;
            else if constexpr (std::is_same_v<U, double>) return to_double(x);
            else return rational_from_double(to_double(x));
        };
        std::vector<U> v;
        v.reserve(values_.size());
        for (const auto& x : values_) v.push_back(conv(x));
        Tail<U> l{left_.kind, conv(left_.value)};
        Tail<U> r{right_.kind, conv(right_.value)};
        return WindowDensity<U>(span_, lo_, std::move(v), ilo_, ihi_, l, r);
    }

    friend WindowDensity operator+(const WindowDensity& a, const WindowDensity& b) { return combine(a, b, T(1)); }
    friend WindowDensity operator-(const WindowDensity& a, const WindowDensity& b) { return combine(a, b, T(-1)); }

private:
    static Tail<T> combine_tails(const Tail<T>& a, const Tail<T>& b, const T& sign) {
        if (!a.declared() || !b.declared()) return Tail<T>::unknown();
        T v = a.value + sign * b.value;
        if (a.kind == TailKind::zero && b.kind == TailKind::zero) return Tail<T>::zero();
        return Tail<T>::constant(std::move(v));
    }

    static WindowDensity combine(const WindowDensity& a, const WindowDensity& b, const T& sign) {
        require_same_span(a.span_, b.span_, "density arithmetic");
        const Index lo = std::min(a.lo(), b.lo());
        const Index hi = std::max(a.hi(), b.hi());
        std::vector<T> v(static_cast<std::size_t>(hi - lo + 1));
        for (Index x = lo; x <= hi; ++x) v[static_cast<std::size_t>(x - lo)] = a.value(x) + sign * b.value(x);
        Index ilo = std::max(std::max(a.known_lo(), b.known_lo()), lo);
        Index ihi = std::min(std::min(a.known_hi(), b.known_hi()), hi);
        if (!a.has_interior() || !b.has_interior()) {
            ilo = lo + 1;
            ihi = lo;
        }
        Tail<T> left = combine_tails(a.left_, b.left_, sign);
        Tail<T> right = combine_tails(a.right_, b.right_, sign);
        if (ilo > ihi) left = right = Tail<T>::unknown();
        return WindowDensity(a.span_, lo, std::move(v), ilo, ihi, left, right);
    }

    Span span_{};
    Index lo_ = 0;
    std::vector<T> values_;
    Index ilo_ = 0;
    Index ihi_ = -1;
    Tail<T> left_{};
    Tail<T> right_{};
};

// ---------------------------------------------------------------------------
// convolve

template <Scalar T>
FiniteMeasure<T> convolve(const FiniteMeasure<T>& a, const FiniteMeasure<T>& b) {
    require_same_span(a.span(), b.span(), "convolve");
    if (a.empty() || b.empty()) return FiniteMeasure<T>(a.span(), 0, {});
    std::vector<T> m(a.masses().size() + b.masses().size() - 1, T(0));
    for (std::size_t i = 0; i < a.masses().size(); ++i) {
        if (is_zero(a.masses()[i])) continue;
        for (std::size_t j = 0; j < b.masses().size(); ++j) m[i + j] += a.masses()[i] * b.masses()[j];
    }
    return FiniteMeasure<T>(a.span(), a.min_index() + b.min_index(), std::move(m));
}

template <Scalar T>
FinitePmf<T> convolve(const FinitePmf<T>& a, const FinitePmf<T>& b) {
    require_same_span(a.span(), b.span(), "convolve");
    if (b.empty() && b.is_proper()) throw PreconditionError("convolve: empty law");
    return FinitePmf<T>::from_measure(convolve(a.atoms(), b.atoms()));
}

// Density of (a * b) where b is a finite measure: sum_z a(x - z) b({z}).
// The interior shrinks by the support radius of b on sides with unknown tails;
// declared tails propagate (a constant tail c becomes c * b(Z)).
template <Scalar T>
WindowDensity<T> convolve(const WindowDensity<T>& a, const FiniteMeasure<T>& b) {
    require_same_span(a.span(), b.span(), "convolve");
    if (b.empty()) throw PreconditionError("convolve: empty measure");
    const Index bmin = b.min_index();
    const Index bmax = b.max_index();
    const Index lo = a.lo() + bmin;
    const Index hi = a.hi() + bmax;
    std::vector<T> v(static_cast<std::size_t>(hi - lo + 1), T(0));
    for (Index x = lo; x <= hi; ++x) {
        T s(0);
        for (Index z = bmin; z <= bmax; ++z) {
            const T& w = b.masses()[static_cast<std::size_t>(z - bmin)];
            if (!is_zero(w)) s += a.value(x - z) * w;
        }
        v[static_cast<std::size_t>(x - lo)] = std::move(s);
    }
    Index ilo = a.left_tail().declared() ? lo : std::max(lo, a.interior_lo() + bmax);
    Index ihi = a.right_tail().declared() ? hi : std::min(hi, a.interior_hi() + bmin);
    auto propagate = [&](const Tail<T>& t) {
        if (t.kind == TailKind::constant) return Tail<T>::constant(t.value * b.total());
        return t;
    };
    Tail<T> left = propagate(a.left_tail());
    Tail<T> right = propagate(a.right_tail());
    if (!a.has_interior() || ilo > ihi) {
        ilo = lo + 1;
        ihi = lo;
        left = right = Tail<T>::unknown();
    }
    return WindowDensity<T>(a.span(), lo, std::move(v), ilo, ihi, left, right);
}

template <Scalar T>
WindowDensity<T> convolve(const WindowDensity<T>& a, const FinitePmf<T>& b) {
    if (b.empty()) throw PreconditionError("convolve: empty law");
    return convolve(a, b.atoms());
}

// ---------------------------------------------------------------------------
// restrict

template <Scalar T>
T restriction_weight(Index x, const SignRestriction& r) {
    if (x == 0) {
        const T alpha = from_rational<T>(r.alpha);
        return r.sign == Sign::plus ? alpha : T(1) - alpha;
    }
    const bool keep = r.sign == Sign::plus ? x > 0 : x < 0;
    return keep ? T(1) : T(0);
}

template <Scalar T>
FiniteMeasure<T> restrict(const FiniteMeasure<T>& phi, const SignRestriction& r) {
    if (phi.empty()) return phi;
    std::vector<T> m = phi.masses();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] *= restriction_weight<T>(phi.lo() + static_cast<Index>(i), r);
    return FiniteMeasure<T>(phi.span(), phi.lo(), std::move(m));
}

template <Scalar T>
FinitePmf<T> restrict(const FinitePmf<T>& phi, const SignRestriction& r) {
    return FinitePmf<T>::from_measure(restrict(phi.atoms(), r));
}

template <Scalar T>
WindowDensity<T> restrict(const WindowDensity<T>& phi, const SignRestriction& r) {
    const WindowDensity<T> w = phi.extended(std::min<Index>(phi.lo(), 0), std::max<Index>(phi.hi(), 0));
    std::vector<T> v = w.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= restriction_weight<T>(w.lo() + static_cast<Index>(i), r);
    Index ilo = w.interior_lo(), ihi = w.interior_hi();
    Tail<T> left = w.left_tail(), right = w.right_tail();
    if (!w.has_interior()) {
        return WindowDensity<T>(w.span(), w.lo(), std::move(v), ilo, ihi, Tail<T>::unknown(), Tail<T>::unknown());
    }
    if (r.sign == Sign::plus) {
        // Everything left of 0 is now exactly zero.
        if (ilo <= 0) {
            ilo = w.lo();
            left = Tail<T>::zero();
        }
    } else {
        if (ihi >= 0) {
            ihi = w.hi();
            right = Tail<T>::zero();
        }
    }
    return WindowDensity<T>(w.span(), w.lo(), std::move(v), ilo, ihi, left, right);
}

// ---------------------------------------------------------------------------
// distance

enum class Norm { sup, total_variation };

template <Scalar T>
struct Distance {
    T value{0};
    Index region_lo = 0;
    Index region_hi = -1;
};

// sup: largest |mass difference|; total_variation: half the l1 distance.
template <Scalar T>
Distance<T> distance(const FiniteMeasure<T>& a, const FiniteMeasure<T>& b, Norm norm) {
    require_same_span(a.span(), b.span(), "distance");
    Distance<T> d;
    if (a.empty() && b.empty()) return d;
    d.region_lo = a.empty() ? b.min_index() : (b.empty() ? a.min_index() : std::min(a.min_index(), b.min_index()));
    d.region_hi = a.empty() ? b.max_index() : (b.empty() ? a.max_index() : std::max(a.max_index(), b.max_index()));
    T acc(0);
    for (Index k = d.region_lo; k <= d.region_hi; ++k) {
        const T diff = abs_value(T(a.at(k) - b.at(k)));
        if (norm == Norm::sup) acc = std::max(acc, diff);
        else acc += diff;
    }
    d.value = norm == Norm::sup ? acc : acc / T(2);
    return d;
}

// Compares densities over the intersection of the provably exact regions,
// clipped to the union of the two windows. sup is on densities, TV on masses.
template <Scalar T>
Distance<T> distance(const WindowDensity<T>& a, const WindowDensity<T>& b, Norm norm) {
    require_same_span(a.span(), b.span(), "distance");
    Distance<T> d;
    d.region_lo = std::max({a.known_lo(), b.known_lo(), std::min(a.lo(), b.lo())});
    d.region_hi = std::min({a.known_hi(), b.known_hi(), std::max(a.hi(), b.hi())});
    if (!a.has_interior() || !b.has_interior() || d.region_lo > d.region_hi)
        throw PreconditionError("distance: valid interiors do not intersect");
    const T h = span_value<T>(a.span());
    T acc(0);
    for (Index x = d.region_lo; x <= d.region_hi; ++x) {
        const T diff = abs_value(T(a.value(x) - b.value(x)));
        if (norm == Norm::sup) acc = std::max(acc, diff);
        else acc += diff * h;
    }
    d.value = norm == Norm::sup ? acc : acc / T(2);
    return d;
}

// ---------------------------------------------------------------------------
// detect_span

template <Scalar T>
struct SpanDetection {
    Index factor = 1;  // d in units of the base lattice
    Span span;         // base step * d
    FinitePmf<T> x1;   // re-indexed to the detected span
    FinitePmf<T> x1p;
};

inline Index support_gcd(std::initializer_list<const std::vector<Index>*> supports) {
    Index g = 0;
    for (const auto* s : supports)
        for (Index k : *s) g = std::gcd(g, k < 0 ? -k : k);
    return g;
}

template <Scalar T>
std::vector<Index> support_of(const FiniteMeasure<T>& m) {
    std::vector<Index> s;
    for (std::size_t i = 0; i < m.masses().size(); ++i)
        if (!is_zero(m.masses()[i])) s.push_back(m.lo() + static_cast<Index>(i));
    return s;
}

template <Scalar T>
FinitePmf<T> reindexed(const FinitePmf<T>& x, Index factor, const Span& span) {
    std::map<Index, T> atoms;
    const auto& m = x.atoms();
    for (std::size_t i = 0; i < m.masses().size(); ++i)
        if (!is_zero(m.masses()[i])) atoms[(m.lo() + static_cast<Index>(i)) / factor] = m.masses()[i];
    return FinitePmf<T>(FiniteMeasure<T>::from_atoms(span, atoms), x.defect());
}

template <Scalar T>
SpanDetection<T> detect_span(const FinitePmf<T>& x1, const FinitePmf<T>& x1p) {
    require_same_span(x1.span(), x1p.span(), "detect_span");
    const auto s1 = support_of(x1.atoms());
    const auto s2 = support_of(x1p.atoms());
    const Index g = support_gcd({&s1, &s2});
    if (g == 0) throw PreconditionError("detect_span: both laws are degenerate at 0");
    SpanDetection<T> out;
    out.factor = g;
    out.span = Span(x1.span().step * g);
    out.x1 = reindexed(x1, g, out.span);
    out.x1p = reindexed(x1p, g, out.span);
    return out;
}

}  // namespace switchwalk
