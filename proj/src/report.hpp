#pragma once

// JSON and CSV serialization of measures, constants and check results for
// the command-line front end. Every number carries its provenance.

#include "switchwalk/ladder.hpp"
#include "switchwalk/measures.hpp"
#include "switchwalk/montecarlo.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace switchwalk::report {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal.
std::string format_double(double v);

Json number(double v, const std::string& provenance);
Json number(const Rational& v, const std::string& provenance);

template <Scalar T>
double plain(const T& v) {
    return to_double(v);
}

Json lattice_point(Index k, const Span& h);
Json tail_json(TailKind kind, Json value);

template <Scalar T>
Json measure_table(const FiniteMeasure<T>& m, const std::string& prov, const char* column = "mass") {
    Json t;
    t["kind"] = "measure";
    t["span"] = format_rational(m.span().step);
    t["backend"] = prov;
    t["window"] = m.empty() ? Json::array() : Json::array({m.min_index(), m.max_index()});
    t["interior"] = t["window"];
    t["tails"] = {{"left", tail_json(TailKind::zero, nullptr)}, {"right", tail_json(TailKind::zero, nullptr)}};
    Json pts = Json::array();
    for (Index k = m.min_index(); !m.empty() && k <= m.max_index(); ++k) {
        Json p = lattice_point(k, m.span());
        p[column] = number(m.at(k), prov);
        pts.push_back(std::move(p));
    }
    t["points"] = std::move(pts);
    return t;
}

template <Scalar T>
Json pmf_table(const FinitePmf<T>& law, const std::string& prov) {
    Json t = measure_table(law.atoms(), prov, "probability");
    t["kind"] = "law";
    t["defect"] = number(law.defect(), prov);
    return t;
}

template <Scalar T>
Json density_table(const WindowDensity<T>& d, const std::string& prov) {
    Json t;
    t["kind"] = "density";
    t["span"] = format_rational(d.span().step);
    t["backend"] = prov;
    t["window"] = Json::array({d.lo(), d.hi()});
    t["interior"] = d.has_interior() ? Json::array({d.interior_lo(), d.interior_hi()}) : Json::array();
    auto tail = [&](const Tail<T>& tl) {
        return tail_json(tl.kind, tl.kind == TailKind::constant ? number(tl.value, prov) : Json(nullptr));
    };
    t["tails"] = {{"left", tail(d.left_tail())}, {"right", tail(d.right_tail())}};
    Json pts = Json::array();
    for (Index k = d.lo(); k <= d.hi(); ++k) {
        Json p = lattice_point(k, d.span());
        p["density"] = number(d.value(k), prov);
        p["in_interior"] = d.known(k);
        pts.push_back(std::move(p));
    }
    t["points"] = std::move(pts);
    return t;
}

// Empirical counts next to reference probabilities (lattice simulations).
Json counts_table(const std::map<Index, std::uint64_t>& counts, std::uint64_t n, const Span& h,
                  const FiniteMeasure<double>* reference);

Json check(const std::string& name, const Json& value, double threshold, bool pass);

Json sim_json(const SimReport& rep, const Span* lattice_span, std::size_t max_listed);

// Writes `doc` as <dir>/<stem>.json.
std::filesystem::path write_json(const Json& doc, const std::filesystem::path& dir, const std::string& stem);

// Writes every entry of doc["tables"] as <dir>/<stem>_<name>.csv and the
// scalar fields of the rest as <dir>/<stem>_summary.csv. Returns the paths.
std::vector<std::filesystem::path> write_csv(const Json& doc, const std::filesystem::path& dir,
                                             const std::string& stem);

}  // namespace switchwalk::report
