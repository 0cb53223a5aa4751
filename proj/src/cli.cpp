#include "switchwalk/cli.hpp"

#include "report.hpp"
#include "switchwalk/errors.hpp"
#include "switchwalk/kernels.hpp"
#include "switchwalk/montecarlo.hpp"
#include "switchwalk/specfile.hpp"
#include "switchwalk/stationary.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace switchwalk::cli {

namespace {

using report::Json;
using report::number;

constexpr std::size_t kListedEvents = 100;
const char* const kCommands[] = {"ladder", "stationary", "verify", "simulate"};

struct Flags {
    std::string spec;
    std::optional<Index> window;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<Index> steps;
    std::optional<std::size_t> replicas;
    std::optional<std::uint64_t> samples;
    std::string out = ".";
    std::string format = "json";
    std::string chain = "auto";
    std::string backend = "auto";
};

struct Context {
    SpecFile file;
    TaskOptions tasks;
    Flags flags;

    const WalkSpec& spec() const { return file.spec; }
    double threshold() const { return 10.0 * tasks.tol; }
    LadderOptions ladder_options() const {
        LadderOptions o;
        o.tol = tasks.tol;
        return o;
    }
};

Context make_context(const Flags& flags) {
    if (flags.spec.empty()) throw ValidationError("--spec is required");
    Context c{load_spec(flags.spec), {}, flags};
    c.tasks = c.file.tasks;
    if (flags.window) c.tasks.window = *flags.window;
    if (flags.tol) c.tasks.tol = *flags.tol;
    if (flags.seed) c.tasks.seed = *flags.seed;
    if (flags.steps) c.tasks.steps = *flags.steps;
    if (flags.replicas) c.tasks.replicas = *flags.replicas;
    if (flags.samples) c.tasks.samples = *flags.samples;
    if (c.tasks.window < 1 || c.tasks.steps < 1 || c.tasks.replicas < 1 || c.tasks.samples < 1 || !(c.tasks.tol > 0))
        throw ValidationError("window, steps, replicas, samples and tol must be positive");
    return c;
}

const LatticeLaws& require_lattice(const Context& c, const char* command) {
    if (!c.spec().is_lattice())
        throw ValidationError(std::string(command) + ": continuous specs are only supported by simulate");
    return c.spec().lattice();
}

Json continuous_law_json(const ContinuousLaw& law) {
    Json j;
    j["family"] = to_string(law.family);
    switch (law.family) {
        case Family::normal: j["mean"] = law.a; j["sd"] = law.b; break;
        case Family::uniform: j["lo"] = law.a; j["hi"] = law.b; break;
        case Family::point: j["value"] = law.a; break;
        case Family::shifted_exponential: {
            Json comps = Json::array();
            for (const auto& c : law.components) comps.push_back({{"weight", c.weight}, {"shift", c.shift}, {"scale", c.scale}});
            j["components"] = std::move(comps);
            break;
        }
    }
    j["mean_value"] = law.mean();
    return j;
}

Json header(const std::string& command, const Context& c) {
    Json doc;
    doc["command"] = command;
    Json s;
    s["name"] = c.file.name;
    s["alpha"] = number(c.spec().alpha, "exact");
    s["exact_input"] = c.spec().exact_input;
    s["random_walk"] = c.spec().is_random_walk();
    if (c.spec().is_lattice()) {
        const auto& l = c.spec().lattice();
        s["type"] = "lattice";
        s["base_step"] = format_rational(l.base.step);
        s["span_factor"] = l.factor;
        s["span"] = format_rational(l.span.step);
        s["mean_X1"] = number(l.x1.mean() * l.span.step, "exact");
        s["mean_X1p"] = number(l.x1p.mean() * l.span.step, "exact");
    } else {
        s["type"] = "continuous";
        s["X1"] = continuous_law_json(c.spec().continuous().x1);
        s["X1p"] = continuous_law_json(c.spec().continuous().x1p);
    }
    doc["spec"] = std::move(s);
    doc["options"] = {{"window", c.tasks.window},   {"tol", c.tasks.tol},           {"seed", c.tasks.seed},
                      {"steps", c.tasks.steps},     {"replicas", c.tasks.replicas}, {"samples", c.tasks.samples}};
    return doc;
}

// Runs f<T>(provenance) on the requested backend; "auto" uses exact
// arithmetic for exact input and falls back to float64 when the ladder laws
// are irrational.
template <class F>
Json with_backend(const Context& c, F&& f) {
    const std::string& choice = c.flags.backend;
    if (choice == "float") return f.template operator()<double>("float64");
    if (choice == "exact" || c.spec().exact_input) {
        try {
            return f.template operator()<Rational>("exact");
        } catch (const InexactError&) {
            if (choice == "exact") throw;
        }
        return f.template operator()<double>("float64-fallback");
    }
    return f.template operator()<double>("float64");
}

template <Scalar T>
Json ladder_metadata(const LadderSystem<T>& l, const std::string& prov) {
    Json j;
    j["method"] = to_string(l.method);
    j["certified"] = l.certified;
    j["tol_achieved"] = l.tol_achieved;
    j["truncation_level"] = l.truncation_level_used;
    j["constants"] = {{"p", number(l.p, prov)},   {"p_prime", number(l.p_prime, prov)}, {"a", number(l.a, prov)},
                      {"q", number(l.q, prov)},   {"q_prime", number(l.q_prime, prov)}};
    return j;
}

Json cmd_ladder(const Context& c) {
    const auto& laws = require_lattice(c, "ladder");
    Json doc = header("ladder", c);
    doc.update(with_backend(c, [&]<Scalar T>(const std::string& prov) {
        const auto l = ladder_system<T>(laws.x1, laws.x1p, c.spec().alpha, c.ladder_options());
        Json j;
        j["backend"] = prov;
        j.update(ladder_metadata(l, prov));
        j["tables"] = {{"D", report::pmf_table(l.D, prov)},
                       {"A", report::pmf_table(l.A, prov)},
                       {"A_strict", report::pmf_table(l.A_strict, prov)},
                       {"D_strict", report::pmf_table(l.D_strict, prov)},
                       {"A_prime", report::pmf_table(l.A_prime, prov)},
                       {"D_prime", report::pmf_table(l.D_prime, prov)},
                       {"A_strict_prime", report::pmf_table(l.A_strict_prime, prov)},
                       {"D_strict_prime", report::pmf_table(l.D_strict_prime, prov)}};
        return j;
    }));
    return doc;
}

Json cmd_stationary(const Context& c) {
    require_lattice(c, "stationary");
    Json doc = header("stationary", c);
    doc.update(with_backend(c, [&]<Scalar T>(const std::string& prov) {
        const auto b = stationary_bundle<T>(c.spec(), c.tasks.window, c.ladder_options());
        Json j;
        j["backend"] = prov;
        j.update(ladder_metadata(b.ladders, prov));
        const auto n = normalize_mu(b);
        j["mu_total_mass"] = n.finite ? number(n.total_mass, prov) : Json("infinite");
        Json tables;
        tables["nu"] = report::measure_table(b.nu, prov);
        tables["mu"] = report::density_table(b.mu, prov);
        if (b.pi) tables["pi"] = report::measure_table(*b.pi, prov);
        if (n.finite) {
            tables["stationary_law"] = report::measure_table(n.law, prov, "probability");
            j["stationary_law_outside_window"] = number(n.outside_mass, prov);
        }
        j["tables"] = std::move(tables);
        return j;
    }));
    return doc;
}

template <Scalar T>
T sup_deviation(const WindowDensity<T>& d, Index lo, Index hi, const T& level) {
    T worst(0);
    for (Index x = lo; x <= hi; ++x) worst = std::max(worst, abs_value(T(d.value(x) - level)));
    return worst;
}

Json cmd_verify(const Context& c) {
    const auto& laws = require_lattice(c, "verify");
    Json doc = header("verify", c);
    const double thr = c.threshold();
    doc.update(with_backend(c, [&]<Scalar T>(const std::string& prov) {
        const WalkSpec& spec = c.spec();
        const auto b = stationary_bundle<T>(spec, c.tasks.window, c.ladder_options());
        const auto& l = b.ladders;
        Json checks = Json::array();
        auto add = [&](const std::string& name, const T& value) {
            checks.push_back(report::check(name, number(value, prov), thr, to_double(value) <= thr));
        };

        checks.push_back(report::check("ladder_tolerance", number(l.tol_achieved, "float64"), thr, l.tol_achieved <= thr));
        add("wiener_hopf_X1", wiener_hopf_residual(laws.x1.template cast<T>(), l.A_strict, l.D));
        add("wiener_hopf_X1p", wiener_hopf_residual(laws.x1p.template cast<T>(), l.A_strict_prime, l.D_prime));

        add("nu_invariance", apply_PH(WindowDensity<T>::from_measure(b.nu), l, spec.alpha).residual->value);
        const auto mu_image = apply_P(b.mu, spec);
        if (!mu_image.residual)
            throw ValidationError("verify: window too small for the mu invariance check; increase --window");
        add("mu_invariance", mu_image.residual->value);

        if (spec.is_random_walk()) {
            add("p_minus_p_prime", abs_value(T(l.p - l.p_prime)));
            add("mu_constant_density", sup_deviation(b.mu, b.mu.interior_lo(), b.mu.interior_hi(), l.p));
            const auto nu1 = nu(l.D, l.A_prime, T(1), c.tasks.tol);
            const auto stab = convolve(b.u_plus.base, restrict(nu1, SignRestriction{Rational(1), Sign::plus}));
            add("renewal_stabilization", sup_deviation(stab, Index(0), stab.interior_hi(), l.p_prime));
        }

        if (spec.alpha == 1) {
            const auto k = crossing_kernels(spec, l);
            const auto plus = restrict(*b.pi, SignRestriction{Rational(1), Sign::plus});
            const auto minus = restrict(*b.pi, SignRestriction{Rational(1), Sign::minus});
            add("pi_crossing_up", distance(apply_table(minus, k.up), plus, Norm::sup).value);
            add("pi_crossing_down", distance(apply_table(plus, k.down), minus, Norm::sup).value);
            if (spec.is_random_walk())
                add("pi_random_walk_form",
                    distance(*b.pi, pi_rw(laws.x1.template cast<T>(), l.p), Norm::sup).value);
        }

        const auto q = dual_kernel_Q(l, b.nu, spec.alpha);
        add("dual_row_sums", q.row_sum_residual);
        add("dual_balance", q.balance_residual);

        const auto lifted = lift(b.nu, b.u_plus, b.u_minus_prime, spec.alpha);
        const auto back = unlift(lifted, l.A_strict, l.D_strict_prime, spec.alpha);
        const auto want_plus = WindowDensity<T>::from_measure(restrict(b.nu, SignRestriction{spec.alpha, Sign::plus}));
        const auto want_minus =
            WindowDensity<T>::from_measure(restrict(b.nu, SignRestriction{spec.alpha, Sign::minus}));
        add("lift_round_trip", std::max(distance(back.plus.phi, want_plus, Norm::sup).value,
                                        distance(back.minus.phi, want_minus, Norm::sup).value));

        Json j;
        j["backend"] = prov;
        j.update(ladder_metadata(l, prov));
        j["checks"] = std::move(checks);
        j["tables"] = {{"mu", report::density_table(b.mu, prov)}};
        return j;
    }));
    return doc;
}

ChainKind parse_chain(const std::string& s) {
    if (s == "occupation") return ChainKind::occupation;
    if (s == "ladder") return ChainKind::ladder;
    return ChainKind::overshoot;
}

Json cmd_simulate(const Context& c) {
    const WalkSpec& spec = c.spec();
    Json doc = header("simulate", c);
    StationarityOptions opts;
    opts.replicas = c.tasks.replicas;
    opts.steps = c.tasks.steps;
    opts.samples = c.tasks.samples;
    opts.seed = c.tasks.seed;

    if (!spec.is_lattice()) {
        const auto& laws = spec.continuous();
        if (c.flags.chain != "auto" && c.flags.chain != "overshoot")
            throw ValidationError("simulate: continuous specs support only the overshoot chain");
        if (!spec.is_random_walk()) {
            // No closed-form reference: report the simulated chains only.
            const Trajectory tr = simulate(spec, 0.0, c.tasks.steps, c.tasks.seed);
            SimReport rep;
            rep.chain = ChainKind::overshoot;
            rep.replica_count = 1;
            rep.seeds = {c.tasks.seed};
            rep.steps = c.tasks.steps;
            const auto chain = extract_ladder_chain(tr);
            rep.ladder_times = chain.times;
            rep.ladder_heights = chain.heights;
            rep.crossings = extract_crossings(tr);
            doc["backend"] = "monte-carlo";
            doc["simulation"] = report::sim_json(rep, nullptr, kListedEvents);
            doc["checks"] = Json::array();
            return doc;
        }
        opts.chain = ChainKind::overshoot;
        const OvershootLaw o(laws.x1);
        const auto rep = stationarity_test(
            spec, ContinuousReference{[&o](double x) { return o.cdf(x); }, [&o](double u) { return o.quantile(u); }},
            opts);
        doc["backend"] = "monte-carlo";
        doc["reference"] = {{"kind", "overshoot"}, {"normalizer", number(o.normalizer(), "float64")}};
        doc["simulation"] = report::sim_json(rep, nullptr, kListedEvents);
        Json checks = Json::array();
        for (const auto& d : rep.distances) {
            Json ch = report::check(d.name, number(d.value, "monte-carlo"), d.threshold, d.pass);
            ch["method"] = d.method;
            checks.push_back(std::move(ch));
        }
        doc["checks"] = std::move(checks);
        return doc;
    }

    const auto b = stationary_bundle<double>(spec, c.tasks.window, c.ladder_options());
    const auto n = normalize_mu(b);
    if (c.flags.chain == "auto") {
        opts.chain = n.finite ? ChainKind::occupation : (spec.alpha == 1 ? ChainKind::overshoot : ChainKind::ladder);
    } else {
        opts.chain = parse_chain(c.flags.chain);
    }

    LatticeReference ref;
    std::string ref_kind;
    switch (opts.chain) {
        case ChainKind::occupation:
            if (!n.finite)
                throw ValidationError(
                    "simulate: mu has infinite mass, so occupation frequencies have no normalized reference; the "
                    "occupation chain needs E X1 < 0 < E X1'");
            ref = {n.law, n.outside_mass};
            ref_kind = "normalized mu";
            break;
        case ChainKind::ladder:
            ref = {b.nu.scaled(1.0 / b.nu.total()), 0.0};
            ref_kind = "normalized nu";
            break;
        case ChainKind::overshoot:
            if (!b.pi)
                throw ValidationError("simulate: the lattice overshoot chain is only handled for alpha = 1");
            ref = {b.pi->scaled(1.0 / b.pi->total()), 0.0};
            ref_kind = "normalized pi";
            break;
    }
    const auto rep = stationarity_test(spec, ref, opts);
    const Span& h = spec.lattice().span;
    doc["backend"] = "monte-carlo";
    doc["reference"] = {{"kind", ref_kind}, {"outside_window", number(ref.outside_mass, "float64")}};
    doc["simulation"] = report::sim_json(rep, &h, kListedEvents);
    Json checks = Json::array();
    for (const auto& d : rep.distances) {
        Json ch = report::check(d.name, number(d.value, "monte-carlo"), d.threshold, d.pass);
        ch["method"] = d.method;
        checks.push_back(std::move(ch));
    }
    doc["checks"] = std::move(checks);
    const std::uint64_t observed = rep.samples - rep.censored;
    doc["tables"] = {{"empirical", report::counts_table(rep.occupation, observed, h, &ref.law)}};
    return doc;
}

bool all_checks_pass(const Json& doc, std::ostream& out, std::ostream& err) {
    bool ok = true;
    if (!doc.contains("checks")) return ok;
    for (const auto& ch : doc.at("checks")) {
        const bool pass = ch.at("pass").get<bool>();
        const std::string value = ch.at("value").at("value").is_number()
                                      ? report::format_double(ch.at("value").at("value").get<double>())
                                      : ch.at("value").at("value").get<std::string>();
        const std::string line = ch.at("name").get<std::string>() + " = " + value + " (threshold " +
                                 report::format_double(ch.at("threshold").get<double>()) + ")";
        out << (pass ? "PASS " : "FAIL ") << line << '\n';
        if (!pass) {
            err << "verification failed: " << line << '\n';
            ok = false;
        }
    }
    return ok;
}

void write_outputs(const Json& doc, const Flags& flags, const std::string& stem, std::ostream& out) {
    if (flags.format == "csv") {
        for (const auto& p : report::write_csv(doc, flags.out, stem)) out << "wrote " << p.string() << '\n';
    } else {
        out << "wrote " << report::write_json(doc, flags.out, stem).string() << '\n';
    }
}

int cmd_report(const Flags& flags, std::ostream& out, std::ostream& err) {
    Json doc;
    doc["command"] = "report";
    Json sections, tables;
    bool ok = true;
    for (const char* name : kCommands) {
        const std::filesystem::path path = std::filesystem::path(flags.out) / (std::string(name) + ".json");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path);
        Json section;
        try {
            section = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ValidationError("report: cannot parse " + path.string() + ": " + e.what());
        }
        if (!doc.contains("spec") && section.contains("spec")) doc["spec"] = section["spec"];
        if (section.contains("tables"))
            for (const auto& [t, table] : section.at("tables").items()) tables[std::string(name) + "_" + t] = table;
        section.erase("tables");
        section.erase("spec");
        ok = all_checks_pass(section, out, err) && ok;
        sections[name] = std::move(section);
    }
    if (sections.empty())
        throw ValidationError("report: no ladder/stationary/verify/simulate outputs in " + flags.out);
    doc["status"] = ok ? "pass" : "fail";
    doc["sections"] = std::move(sections);
    doc["tables"] = std::move(tables);
    out << "wrote " << report::write_json(doc, flags.out, "report").string() << '\n';
    for (const auto& p : report::write_csv(doc, std::filesystem::path(flags.out) / "tables", "report"))
        out << "wrote " << p.string() << '\n';
    return ok ? kOk : kVerificationFailed;
}

int dispatch(const std::string& command, const Flags& flags, std::ostream& out, std::ostream& err) {
    if (command == "report") return cmd_report(flags, out, err);
    const Context c = make_context(flags);
    Json doc;
    if (command == "ladder") doc = cmd_ladder(c);
    else if (command == "stationary") doc = cmd_stationary(c);
    else if (command == "verify") doc = cmd_verify(c);
    else doc = cmd_simulate(c);
    const bool ok = all_checks_pass(doc, out, err);
    if (doc.contains("checks")) doc["status"] = ok ? "pass" : "fail";
    write_outputs(doc, flags, command, out);
    return ok ? kOk : kVerificationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Invariant measures of switching random walks"};
    app.require_subcommand(1);
    Flags flags;
    std::vector<CLI::App*> subs;
    for (const char* name : {"ladder", "stationary", "verify", "simulate", "report"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--spec", flags.spec, "walk spec file (JSON)");
        sub->add_option("--window", flags.window, "half-width of the measure window, in lattice steps");
        sub->add_option("--tol", flags.tol, "numerical tolerance; checks pass at 10 * tol");
        sub->add_option("--seed", flags.seed, "Monte Carlo seed");
        sub->add_option("--steps", flags.steps, "steps per replica, or step cap per one-step sample");
        sub->add_option("--replicas", flags.replicas, "independent replicas");
        sub->add_option("--samples", flags.samples, "stationary-start samples for one-step tests");
        sub->add_option("--out", flags.out, "output directory")->capture_default_str();
        sub->add_option("--format", flags.format, "report format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
        sub->add_option("--chain", flags.chain, "simulated chain")
            ->check(CLI::IsMember({"auto", "occupation", "ladder", "overshoot"}))
            ->capture_default_str();
        sub->add_option("--backend", flags.backend, "arithmetic backend")
            ->check(CLI::IsMember({"auto", "exact", "float"}))
            ->capture_default_str();
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidInput;
    }
    std::string command;
    for (auto* sub : subs)
        if (sub->parsed()) command = sub->get_name();

    try {
        return dispatch(command, flags, out, err);
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const PreconditionError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const InexactError& e) {
        err << "exact backend unavailable: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

}  // namespace switchwalk::cli
