#include "report.hpp"

#include "switchwalk/errors.hpp"

#include <charconv>
#include <fstream>

namespace switchwalk::report {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

Json number(double v, const std::string& provenance) {
    Json j;
    if (std::isfinite(v)) j["value"] = v;
    else j["value"] = format_double(v);
    j["provenance"] = provenance;
    return j;
}

Json number(const Rational& v, const std::string& provenance) {
    Json j;
    j["value"] = to_double(v);
    j["exact"] = format_rational(v);
    j["provenance"] = provenance;
    return j;
}

Json lattice_point(Index k, const Span& h) {
    Json p;
    p["index"] = k;
    p["x"] = to_double(Rational(k) * h.step);
    return p;
}

Json tail_json(TailKind kind, Json value) {
    Json t;
    t["kind"] = to_string(kind);
    if (!value.is_null()) t["density"] = std::move(value);
    return t;
}

Json counts_table(const std::map<Index, std::uint64_t>& counts, std::uint64_t n, const Span& h,
                  const FiniteMeasure<double>* reference) {
    Json t;
    t["kind"] = "empirical";
    t["span"] = format_rational(h.step);
    t["backend"] = "monte-carlo";
    t["samples"] = n;
    Index lo = counts.empty() ? 0 : counts.begin()->first;
    Index hi = counts.empty() ? -1 : counts.rbegin()->first;
    if (reference && !reference->empty()) {
        lo = std::min(lo, reference->min_index());
        hi = std::max(hi, reference->max_index());
    }
    t["window"] = lo <= hi ? Json::array({lo, hi}) : Json::array();
    t["interior"] = t["window"];
    t["tails"] = {{"left", tail_json(TailKind::unknown, nullptr)}, {"right", tail_json(TailKind::unknown, nullptr)}};
    Json pts = Json::array();
    for (Index k = lo; k <= hi; ++k) {
        const auto it = counts.find(k);
        const std::uint64_t c = it == counts.end() ? 0 : it->second;
        Json p = lattice_point(k, h);
        p["count"] = c;
        p["frequency"] = number(n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n), "monte-carlo");
        if (reference) p["reference"] = number(reference->at(k), "float64");
        pts.push_back(std::move(p));
    }
    t["points"] = std::move(pts);
    return t;
}

Json check(const std::string& name, const Json& value, double threshold, bool pass) {
    Json c;
    c["name"] = name;
    c["value"] = value;
    c["threshold"] = threshold;
    c["pass"] = pass;
    return c;
}

Json sim_json(const SimReport& rep, const Span* lattice_span, std::size_t max_listed) {
    Json j;
    j["chain"] = to_string(rep.chain);
    j["replicas"] = rep.replica_count;
    j["seeds"] = rep.seeds;
    j["samples"] = rep.samples;
    j["censored"] = rep.censored;
    j["steps"] = rep.steps;
    auto listed = [max_listed](std::size_t n) { return std::min(n, max_listed); };

    Json ladder;
    ladder["count"] = rep.ladder_times.size();
    Json times = Json::array(), heights = Json::array();
    for (std::size_t i = 0; i < listed(rep.ladder_times.size()); ++i) {
        times.push_back(rep.ladder_times[i]);
        heights.push_back(rep.ladder_heights[i]);
    }
    ladder["times"] = std::move(times);
    ladder["heights"] = std::move(heights);
    j["ladder_chain"] = std::move(ladder);

    Json crossings;
    crossings["count"] = rep.crossings.size();
    Json list = Json::array();
    for (std::size_t i = 0; i < listed(rep.crossings.size()); ++i) {
        const auto& c = rep.crossings[i];
        Json e;
        e["step"] = c.step;
        e["value"] = c.value;
        if (lattice_span) e["index"] = c.lattice_index;
        e["direction"] = c.up ? "up" : "down";
        list.push_back(std::move(e));
    }
    crossings["first"] = std::move(list);
    j["crossings"] = std::move(crossings);
    return j;
}

std::filesystem::path write_json(const Json& doc, const std::filesystem::path& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (stem + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    return path;
}

namespace {

std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    return cell(Json(v.dump()));
}

// Point fields, with {"value", "exact", "provenance"} objects spread over
// <key>, <key>_exact and <key>_provenance.
void flatten_point(const Json& p, std::vector<std::pair<std::string, std::string>>& row) {
    for (const auto& [key, v] : p.items()) {
        if (v.is_object()) {
            for (const auto& [sub, sv] : v.items()) row.emplace_back(sub == "value" ? key : key + "_" + sub, cell(sv));
        } else {
            row.emplace_back(key, cell(v));
        }
    }
}

void flatten_scalars(const Json& v, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [key, sub] : v.items()) flatten_scalars(sub, path.empty() ? key : path + "." + key, out);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten_scalars(v[i], path + "[" + std::to_string(i) + "]", out);
    } else {
        out.emplace_back(path, cell(v));
    }
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<std::filesystem::path> write_csv(const Json& doc, const std::filesystem::path& dir,
                                             const std::string& stem) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    if (doc.contains("tables")) {
        for (const auto& [name, table] : doc.at("tables").items()) {
            const auto path = dir / (stem + "_" + name + ".csv");
            auto out = open_csv(path);
            bool header = false;
            for (const auto& p : table.at("points")) {
                std::vector<std::pair<std::string, std::string>> row;
                flatten_point(p, row);
                if (!header) {
                    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].first;
                    out << '\n';
                    header = true;
                }
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].second;
                out << '\n';
            }
            written.push_back(path);
        }
    }
    std::vector<std::pair<std::string, std::string>> scalars;
    for (const auto& [key, v] : doc.items()) {
        if (key == "tables") continue;
        flatten_scalars(v, key, scalars);
    }
    if (doc.contains("tables")) {
        for (const auto& [name, table] : doc.at("tables").items()) {
            for (const auto& [key, v] : table.items())
                if (key != "points") flatten_scalars(v, "tables." + name + "." + key, scalars);
        }
    }
    const auto path = dir / (stem + "_summary.csv");
    auto out = open_csv(path);
    out << "key,value\n";
    for (const auto& [k, v] : scalars) out << cell(Json(k)) << ',' << v << '\n';
    written.push_back(path);
    return written;
}

}  // namespace switchwalk::report
