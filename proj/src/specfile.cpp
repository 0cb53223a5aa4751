#include "switchwalk/specfile.hpp"

#include "switchwalk/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace switchwalk {

namespace {

using nlohmann::json;

struct Number {
    Rational value;
    bool exact = true;
};

// Floats go through their shortest round-trip decimal so that 0.1 means 1/10.
Number to_number(const json& j, const std::string& what) {
    if (j.is_string()) return {parse_rational(j.get<std::string>()), true};
    if (j.is_number_integer()) return {Rational(j.get<std::int64_t>()), true};
    if (j.is_number_unsigned()) return {Rational(j.get<std::uint64_t>()), true};
    if (j.is_number_float()) {
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, j.get<double>());
        return {parse_rational(std::string_view(buf, static_cast<std::size_t>(r.ptr - buf))), false};
    }
    throw ValidationError(what + ": expected a number or a numeric string");
}

double to_double_field(const json& obj, const char* key, const std::string& what) {
    if (!obj.contains(key)) throw ValidationError(what + ": missing '" + key + "'");
    const auto& v = obj.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
    throw ValidationError(what + ": '" + key + "' must be a number");
}

FinitePmf<Rational> lattice_law_from(const json& j, const Span& base, const std::string& what, bool& exact) {
    if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected a non-empty list of [value, probability]");
    std::vector<std::pair<Index, Rational>> atoms;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2)
            throw ValidationError(what + ": each entry must be [value, probability]");
        const Rational value = to_number(entry[0], what).value;
        const Rational idx = value / base.step;
        if (boost::multiprecision::denominator(idx) != 1)
            throw ValidationError(what + ": value " + format_rational(value) + " is not a multiple of the base step");
        const Number p = to_number(entry[1], what);
        exact = exact && p.exact;
        atoms.emplace_back(boost::multiprecision::numerator(idx).convert_to<Index>(), p.value);
    }
    return lattice_law(base, atoms);
}

ContinuousLaw continuous_law_from(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("family")) throw ValidationError(what + ": expected a family object");
    const std::string family = j.at("family").get<std::string>();
    if (family == "normal")
        return ContinuousLaw::normal(to_double_field(j, "mean", what), to_double_field(j, "sd", what));
    if (family == "uniform")
        return ContinuousLaw::uniform(to_double_field(j, "lo", what), to_double_field(j, "hi", what));
    if (family == "point") return ContinuousLaw::point(to_double_field(j, "value", what));
    if (family == "shifted_exponential") {
        if (!j.contains("components") || !j.at("components").is_array())
            throw ValidationError(what + ": shifted_exponential needs a components list");
        std::vector<ExpComponent> comps;
        for (const auto& c : j.at("components"))
            comps.push_back({to_double_field(c, "weight", what), to_double_field(c, "shift", what),
                             to_double_field(c, "scale", what)});
        return ContinuousLaw::exponential_mixture(std::move(comps));
    }
    throw ValidationError(what + ": unknown family '" + family + "'");
}

template <class U>
U positive_task(const json& tasks, const char* key, U fallback) {
    if (!tasks.contains(key)) return fallback;
    const auto& v = tasks.at(key);
    if (!v.is_number()) throw ValidationError(std::string("tasks.") + key + " must be a number");
    if constexpr (std::is_floating_point_v<U>) {
        const double d = v.get<double>();
        if (!(d > 0)) throw ValidationError(std::string("tasks.") + key + " must be positive");
        return d;
    } else {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw ValidationError(std::string("tasks.") + key + " must be a positive integer");
        return static_cast<U>(v.get<std::int64_t>());
    }
}

}  // namespace

SpecFile parse_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("spec must be a JSON object");
    try {
        SpecFile out;
        out.name = doc.value("name", std::string("spec"));
        if (!doc.contains("X1") || !doc.contains("X1p")) throw ValidationError("spec needs both X1 and X1p");
        Rational alpha = 1;
        bool exact = true;
        if (doc.contains("alpha")) {
            const Number a = to_number(doc.at("alpha"), "alpha");
            alpha = a.value;
            exact = a.exact;
        }
        const bool continuous = doc.value("continuous", false);
        if (continuous) {
            if (!doc.value("assume_oscillation", false))
                throw ValidationError(
                    "continuous specs must set \"assume_oscillation\": true (the crossing condition cannot be "
                    "checked from the laws)");
            out.spec = continuous_spec(continuous_law_from(doc.at("X1"), "X1"), continuous_law_from(doc.at("X1p"), "X1p"),
                                       alpha);
        } else {
            Span base;
            if (doc.contains("lattice")) {
                const auto& l = doc.at("lattice");
                if (!l.is_object()) throw ValidationError("lattice must be an object");
                if (l.contains("base_step")) {
                    const Rational step = to_number(l.at("base_step"), "lattice.base_step").value;
                    if (step <= 0) throw ValidationError("lattice.base_step must be positive");
                    base = Span(step);
                }
            }
            const auto x1 = lattice_law_from(doc.at("X1"), base, "X1", exact);
            const auto x1p = lattice_law_from(doc.at("X1p"), base, "X1p", exact);
            out.spec = lattice_spec(x1, x1p, alpha, exact);
        }
        if (doc.contains("tasks")) {
            const auto& t = doc.at("tasks");
            if (!t.is_object()) throw ValidationError("tasks must be an object");
            out.tasks.window = positive_task<Index>(t, "window", out.tasks.window);
            out.tasks.tol = positive_task<double>(t, "tol", out.tasks.tol);
            out.tasks.steps = positive_task<Index>(t, "steps", out.tasks.steps);
            out.tasks.seed = positive_task<std::uint64_t>(t, "seed", out.tasks.seed);
            out.tasks.replicas = positive_task<std::size_t>(t, "replicas", out.tasks.replicas);
            out.tasks.samples = positive_task<std::uint64_t>(t, "samples", out.tasks.samples);
        }
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed spec: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ValidationError(e.what());
    }
}

SpecFile load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read spec file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

}  // namespace switchwalk
