#include "biharm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "biharm/errors.hpp"
#include "biharm/verify.hpp"

namespace biharm {

std::atomic<bool>& cancel_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot read config");
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        try {
            json j = json::parse(in);
            if (!j.is_object()) throw ConfigError("<root>: expected a table");
            return j;
        } catch (const json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    json j = json::object();
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            j[key] = node.data();
        } else {
            json sec = json::object();
            for (const auto& [k, v] : node) {
                if (!v.empty()) throw ConfigError(key + "." + k + ": nested tables are not supported");
                sec[k] = v.data();
            }
            j[key] = sec;
        }
    }
    return j;
}

json parse_assignment(const std::string& a) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(a + ": expected key=value");
    std::string key = a.substr(0, eq);
    const std::string value = a.substr(eq + 1);
    json root = json::object();
    json* cur = &root;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key + ": empty key segment");
        if (dot == std::string::npos) {
            (*cur)[part] = value;
            break;
        }
        (*cur)[part] = json::object();
        cur = &(*cur)[part];
        start = dot + 1;
    }
    return root;
}

void merge_into(json& doc, const json& patch) {
    for (const auto& [k, v] : patch.items()) {
        if (v.is_object() && doc.contains(k) && doc[k].is_object()) merge_into(doc[k], v);
        else doc[k] = v;
    }
}

std::vector<double> parse_list(const std::string& csv, const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        char* end = nullptr;
        const double d = std::strtod(item.c_str(), &end);
        if (*end != '\0') throw ConfigError(path + ": '" + item + "' is not a number");
        out.push_back(d);
    }
    if (out.empty()) throw ConfigError(path + ": empty list");
    return out;
}

namespace {

std::vector<double> list_of(const json& v, const std::string& path) {
    if (v.is_string()) return parse_list(v.get<std::string>(), path);
    if (v.is_array()) {
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        if (out.empty()) throw ConfigError(path + ": empty list");
        return out;
    }
    throw ConfigError(path + ": expected a list");
}

double number_of(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (!s.empty() && *end == '\0') return d;
    }
    throw ConfigError(path + ": expected a number");
}

} // namespace

ProblemSpec problem_from_config(const json& doc, const ProblemSpec& base) {
    json copy = doc;
    copy.erase("sweep");
    return apply_spec_json(base, copy);
}

SweepConfig sweep_from_config(const json& doc, const SweepConfig& base) {
    SweepConfig s = base;
    if (!doc.contains("sweep")) return s;
    const json& t = doc["sweep"];
    if (!t.is_object()) throw ConfigError("sweep: expected a table");
    for (const auto& [k, v] : t.items()) {
        const std::string kp = "sweep." + k;
        if (k == "p_ladder") s.p_ladder = list_of(v, kp);
        else if (k == "omega_ladder") s.omega_ladder = list_of(v, kp);
        else if (k == "eps_ladder") s.eps_ladder = list_of(v, kp);
        else if (k == "fujita_eps") s.options.fujita_eps = list_of(v, kp);
        else if (k == "jobs") s.options.jobs = static_cast<int>(number_of(v, kp));
        else if (k == "spot_fraction") s.options.spot_fraction = number_of(v, kp);
        else if (k == "seed") s.options.seed = static_cast<unsigned>(number_of(v, kp));
        else if (k == "bump_amplitude") s.options.bump_amplitude = number_of(v, kp);
        else if (k == "power_amplitude") s.options.power_amplitude = number_of(v, kp);
        else if (k == "fujita_amplitude") s.options.fujita_amplitude = number_of(v, kp);
        else if (k == "long_T_max") s.options.long_T_max = number_of(v, kp);
        else if (k == "long_dt_max") s.options.long_dt_max = number_of(v, kp);
        else throw ConfigError(kp + ": unknown key");
    }
    return s;
}

json to_json(const SweepConfig& s) {
    const SweepOptions& o = s.options;
    return json{{"p_ladder", s.p_ladder},
                {"omega_ladder", s.omega_ladder},
                {"eps_ladder", s.eps_ladder},
                {"fujita_eps", o.fujita_eps},
                {"jobs", o.jobs},
                {"spot_fraction", o.spot_fraction},
                {"seed", o.seed},
                {"bump_amplitude", o.bump_amplitude},
                {"power_amplitude", o.power_amplitude},
                {"fujita_amplitude", o.fujita_amplitude},
                {"long_T_max", o.long_T_max},
                {"long_dt_max", o.long_dt_max}};
}

namespace {

struct Io {
    std::ostream& out;
    std::ostream& err;
};

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

std::vector<double> fujita_ladder(int N) {
    const double pf = 1 + 4.0 / N;
    std::vector<double> v;
    if (1.5 < pf) v.push_back(1.5);
    for (double k : {0.6, 0.9, 1.0, 1.1, 1.4})
        if (k * pf > 1) v.push_back(k * pf);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            v.end());
    return v;
}

std::vector<double> omega_ladder(int N, double p) {
    const double oc = compute_exponents(p, N).omega_crit;
    return {0.6 * oc, 0.9 * oc, 1.1 * oc, 1.4 * oc};
}

// Applies explicitly given flags on top of the config document.
struct SpecFlags {
    CLI::App* app = nullptr;
    int N = 3;
    double p = 2;
    std::string bc = "navier";
    std::string nonlinearity = "on";
    std::string f = "zero";
    std::string u0 = "zero";
    double eps = 1;
    double R_max = 40;
    int M = 400;
    double T_max = 100;

    void attach(CLI::App* a, const ProblemSpec& d) {
        app = a;
        N = d.N;
        p = d.p;
        bc = to_string(d.bc);
        nonlinearity = d.nonlinearity ? "on" : "off";
        f = d.forcing.kind;
        u0 = d.initial.kind;
        eps = d.epsilon;
        R_max = d.R_max;
        M = d.M;
        T_max = d.T_max;
        a->add_option("--N", N, "dimension");
        a->add_option("--p", p, "nonlinearity exponent");
        a->add_option("--bc", bc, "boundary condition at r = 1");
        a->add_option("--nonlinearity", nonlinearity, "on|off");
        a->add_option("--f", f, "forcing kind: zero|gaussian|exp|power|supersolution");
        a->add_option("--u0", u0, "initial profile kind");
        a->add_option("--eps", eps, "scale of the initial profile");
        a->add_option("--R-max", R_max, "outer radius");
        a->add_option("--M", M, "grid intervals");
        a->add_option("--T-max", T_max, "time horizon");
    }
    void apply(json& doc) const {
        auto given = [&](const char* name) { return app->count(name) > 0; };
        if (given("--N")) doc["N"] = N;
        if (given("--p")) doc["p"] = p;
        if (given("--bc")) doc["bc"] = bc;
        if (given("--nonlinearity")) doc["nonlinearity"] = nonlinearity;
        if (given("--f")) doc["forcing"]["kind"] = f;
        if (given("--u0")) doc["initial"]["kind"] = u0;
        if (given("--eps")) doc["epsilon"] = eps;
        if (given("--R-max")) doc["R_max"] = R_max;
        if (given("--M")) doc["M"] = M;
        if (given("--T-max")) doc["T_max"] = T_max;
    }
};

json build_doc(const std::string& config_path, const std::vector<std::string>& sets) {
    json doc = config_path.empty() ? json::object() : load_config_file(config_path);
    for (const auto& s : sets) merge_into(doc, parse_assignment(s));
    return doc;
}

int cmd_simulate(Io io, const std::string& config_path, const std::vector<std::string>& sets,
                 const SpecFlags& flags, const std::string& snapshots, double snapshot_every,
                 const std::string& record_dir) {
    ProblemSpec spec;
    try {
        json doc = build_doc(config_path, sets);
        flags.apply(doc);
        spec = problem_from_config(doc, ProblemSpec{});
        if (!snapshots.empty() && spec.snapshot_every <= 0)
            spec.snapshot_every = snapshot_every > 0 ? snapshot_every : spec.T_max / 20;
        spec.validate();
    } catch (const ConfigError& e) {
        io.err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        io.err << "invalid problem: " << e.what() << '\n';
        return kExitUsage;
    }

    RunRecord rec;
    rec.run_id = run_id(spec);
    rec.spec = to_json(spec);
    rec.code_version = code_version();
    rec.extra["config"] = rec.spec;
    SimulationHooks hooks;
    hooks.should_stop = [] { return cancel_flag().load(); };
    const auto t0 = std::chrono::steady_clock::now();
    const SimOutcome o = simulate(spec, hooks).outcome;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.kind = o.kind;
    rec.outcome = to_json(o);
    if (o.failure == "interrupted") {
        io.err << "interrupted\n";
        return kExitPartial;
    }
    RecordStore store(record_dir.empty() ? RecordStore::default_dir() : std::filesystem::path(record_dir));
    if (!store.find(rec.run_id)) store.append(rec);
    if (!snapshots.empty()) {
        std::ostringstream os;
        os << std::setprecision(12) << "t,r,u\n";
        const RadialGrid g = spec.grid();
        for (const auto& s : o.snapshots)
            for (int i = 0; i <= g.M(); ++i) os << s.t << ',' << g.r(i) << ',' << s.u[static_cast<std::size_t>(i)] << '\n';
        write_file(snapshots, os.str());
    }
    std::string note;
    const Classification c = classify(o, &note);
    json summary{{"run_id", rec.run_id}, {"kind", to_string(o.kind)}, {"classification", to_string(c)},
                 {"T_end", o.T_end}, {"final_sup", o.final_sup}, {"record_file", store.file().string()}};
    if (o.kind == OutcomeKind::BlowUp) summary["T_est"] = o.T_est;
    if (!note.empty()) summary["note"] = note;
    io.out << summary.dump() << '\n';
    return o.kind == OutcomeKind::NumericalFailure ? kExitNumerical : kExitOk;
}

int cmd_verify(Io io, const std::string& suite, CLI::App* app, int N, double p, double m, double eps,
               int samples, int random_count, unsigned seed, const std::string& out_path) {
    static const std::vector<std::string> suites{"closed-forms", "lemmas", "lifespan-cutoffs", "supersolution"};
    if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
        io.err << "unknown suite '" << suite << "' (closed-forms, lemmas, lifespan-cutoffs, supersolution)\n";
        return kExitUsage;
    }
    const bool haveN = app->count("--N") > 0, haveP = app->count("--p") > 0;
    std::vector<VerifyRow> rows;
    try {
        if (suite == "closed-forms") {
            rows = verify_closed_forms(samples, seed);
        } else if (suite == "lemmas") {
            std::vector<std::pair<int, double>> params;
            if (haveN || haveP) params.push_back({haveN ? N : 3, haveP ? p : 2});
            else params = {{2, 2}, {3, 2}, {4, 2}, {6, 2}, {6, 3}, {8, 2}, {5, 5}};
            for (auto [n, q] : params) {
                auto r = verify_lemmas(n, q);
                rows.insert(rows.end(), r.begin(), r.end());
            }
        } else if (suite == "lifespan-cutoffs") {
            rows = verify_lifespan_cutoffs(haveN ? N : 3, haveP ? p : 2, samples * 20, seed);
        } else {
            rows = verify_supersolution(haveN ? N : 6, haveP ? p : 4, m, eps);
            if (random_count > 0) {
                auto r = verify_supersolution_random(random_count, seed);
                rows.insert(rows.end(), r.begin(), r.end());
            }
        }
    } catch (const DomainError& e) {
        io.err << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    }
    const std::string csv = verify_csv(rows);
    if (out_path.empty()) io.out << csv;
    else write_file(out_path, csv);
    const bool ok = all_pass(rows);
    io.out << (ok ? "PASS" : "FAIL") << ' ' << suite << '\n';
    return ok ? kExitOk : kExitNumerical;
}

int cmd_sweep(Io io, const std::string& kind, const std::string& config_path,
              const std::vector<std::string>& sets, CLI::App* app, int N, double p, std::string bc,
              const std::string& p_ladder, const std::string& omega_ladder_s, const std::string& eps_ladder,
              int jobs, const std::string& record_dir, const std::string& out_dir) {
    static const std::vector<std::string> kinds{"phase", "omega", "fujita", "lifespan"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        io.err << "unknown sweep kind '" << kind << "' (phase, omega, fujita, lifespan)\n";
        return kExitUsage;
    }
    const bool haveN = app->count("--N") > 0, haveP = app->count("--p") > 0;
    if (!haveN) N = kind == "omega" ? 6 : kind == "fujita" ? 4 : 3;
    if (!haveP) p = kind == "omega" ? 4 : kind == "lifespan" ? 1.5 : p;

    SweepConfig sc;
    BoundaryCondition bcv;
    try {
        json doc = build_doc(config_path, sets);
        sc.options.base = problem_from_config(doc, SweepOptions::default_sweep_base());
        if (doc.contains("N") && !haveN) N = sc.options.base.N;
        if (doc.contains("p") && !haveP) p = sc.options.base.p;
        if (doc.contains("bc") && app->count("--bc") == 0) bc = to_string(sc.options.base.bc);
        sc.p_ladder = kind == "fujita" ? fujita_ladder(N) : default_p_ladder(N);
        if (kind == "omega") sc.omega_ladder = omega_ladder(N, p);
        sc.eps_ladder = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
        sc = sweep_from_config(doc, sc);
        if (!p_ladder.empty()) sc.p_ladder = parse_list(p_ladder, "--p-ladder");
        if (!omega_ladder_s.empty()) sc.omega_ladder = parse_list(omega_ladder_s, "--omega-ladder");
        if (!eps_ladder.empty()) sc.eps_ladder = parse_list(eps_ladder, "--eps-ladder");
        if (app->count("--jobs") > 0) sc.options.jobs = jobs;
        bcv = parse_boundary_condition(bc);
        sc.options.base.N = N;
        sc.options.base.p = p;
        sc.options.base.bc = bcv;
    } catch (const ConfigError& e) {
        io.err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        io.err << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::filesystem::path rdir = record_dir.empty() ? RecordStore::default_dir() : std::filesystem::path(record_dir);
    RecordStore store(rdir);
    const std::filesystem::path odir = out_dir.empty() ? rdir : std::filesystem::path(out_dir);
    std::filesystem::create_directories(odir);
    sc.options.store = &store;
    sc.options.cancel = &cancel_flag();
    sc.options.config = json{{"sweep_kind", kind}, {"N", N}, {"p", p}, {"bc", bc},
                             {"base", to_json(sc.options.base)}, {"sweep", to_json(sc)}};

    const std::string stem = kind + "_N" + std::to_string(N);
    try {
        if (kind == "lifespan") {
            const LifespanStudy st = lifespan_study(N, p, sc.eps_ladder, sc.options);
            const std::string csv = lifespan_csv(st);
            write_file(odir / (stem + ".csv"), csv);
            write_file(odir / (stem + "_plot.py"), lifespan_plot_script(st));
            io.out << csv;
            json fit{{"N", N}, {"p", p}, {"theta", st.theta}, {"fitted", st.fitted}, {"convex", st.convex}};
            if (st.fitted) {
                fit["slope"] = st.fit.slope;
                fit["r_squared"] = st.fit.r_squared;
                fit["below_ikeda"] = st.below_ikeda;
                fit["C0"] = st.C0;
            }
            if (std::isfinite(st.predicted_slope)) fit["predicted_slope"] = st.predicted_slope;
            if (!st.note.empty()) fit["note"] = st.note;
            io.out << fit.dump() << '\n';
            if (st.interrupted || st.failed_arms > 0) return kExitPartial;
            const auto bracketed = std::count_if(st.rows.begin(), st.rows.end(),
                                                 [](const LifespanRow& r) { return r.bracketed; });
            // The critical case has no power law to fit; convexity needs three points.
            return st.fitted || (st.theta == 0 && bracketed >= 3) ? kExitOk : kExitNumerical;
        }
        SweepResult res;
        double crit = std::numeric_limits<double>::infinity();
        std::string axis = "p";
        if (kind == "phase") {
            res = phase_diagram(N, bcv, sc.p_ladder, sc.options);
            const auto ex = compute_exponents(2, N);
            if (!ex.p_crit.is_infinite()) crit = ex.p_crit.value();
        } else if (kind == "omega") {
            res = second_critical_sweep(N, p, sc.omega_ladder, sc.options);
            crit = compute_exponents(p, N).omega_crit;
            axis = "omega";
        } else {
            res = fujita_study(N, bcv, sc.p_ladder, sc.options);
            crit = 1 + 4.0 / N;
        }
        const std::string csv = phase_csv(res.points);
        write_file(odir / (stem + ".csv"), csv);
        write_file(odir / (stem + "_plot.py"), phase_plot_script(res.points, stem, crit, axis));
        io.out << csv;
        int computed = 0;
        for (const auto& q : res.points) computed += q.computed;
        int disagree = 0;
        for (const auto& s : res.spot_checks) disagree += !s.agree;
        io.out << json{{"arms", res.points.size()}, {"computed", computed},
                       {"spot_checks", res.spot_checks.size()}, {"spot_disagreements", disagree},
                       {"critical", std::isfinite(crit) ? json(crit) : json("inf")}}.dump()
               << '\n';
        return res.interrupted || res.failed_arms > 0 ? kExitPartial : kExitOk;
    } catch (const DomainError& e) {
        io.err << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_report(Io io, const std::string& record_dir, const std::string& id) {
    RecordStore store(record_dir.empty() ? RecordStore::default_dir() : std::filesystem::path(record_dir));
    if (!id.empty()) {
        for (const auto& r : store.all())
            if (r.run_id.rfind(id, 0) == 0) {
                io.out << r.to_json().dump(2) << '\n';
                return kExitOk;
            }
        io.err << "no record with id " << id << '\n';
        return kExitUsage;
    }
    io.out << "run_id,kind,classification,N,p,bc,forcing,epsilon,T_est,wall_seconds\n";
    for (const auto& r : store.all()) {
        io.out << r.run_id << ',' << to_string(r.kind) << ',' << to_string(classify(r)) << ','
               << r.spec.value("N", 0) << ',' << r.spec.value("p", 0.0) << ','
               << r.spec.value("bc", std::string()) << ','
               << r.spec["forcing"].value("kind", std::string()) << ',' << r.spec.value("epsilon", 0.0)
               << ',';
        if (r.outcome.contains("T_est")) io.out << r.outcome["T_est"].get<double>();
        io.out << ',' << r.wall_seconds << '\n';
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Io io{out, err};
    CLI::App app{"Semilinear biharmonic heat equation on exterior domains: simulation, verification and sweeps"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    std::string record_dir;

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one problem and write its record");
    std::string sim_config, snapshots;
    std::vector<std::string> sim_sets;
    double snapshot_every = 0;
    SpecFlags flags;
    sim->add_option("config", sim_config, "config file (key = value with sections, or .json)");
    sim->add_option("--set", sim_sets, "override, e.g. forcing.amplitude=2 (repeatable)");
    flags.attach(sim, ProblemSpec{});
    sim->add_option("--snapshots", snapshots, "write (t, r, u) snapshots to this CSV");
    sim->add_option("--snapshot-every", snapshot_every, "snapshot spacing; 0 means T_max/20");
    sim->add_option("--record-dir", record_dir, "record store directory (default $BIHARM_RECORD_DIR or ./records)");

    // verify
    auto* ver = app.add_subcommand("verify", "run a verification catalog and report PASS/FAIL rows");
    std::string suite, ver_out;
    int vN = 3, samples = 200, random_count = 100;
    double vp = 2, vm = 1.5, veps = 0.1;
    unsigned seed = 1234;
    ver->add_option("suite", suite, "closed-forms | lemmas | lifespan-cutoffs | supersolution")->required();
    ver->add_option("--N", vN, "dimension filter");
    ver->add_option("--p", vp, "exponent filter");
    ver->add_option("--m", vm, "supersolution decay exponent");
    ver->add_option("--eps", veps, "supersolution amplitude");
    ver->add_option("--samples", samples, "random radii for closed-forms; x20 for lifespan-cutoffs");
    ver->add_option("--random", random_count, "random admissible draws for supersolution");
    ver->add_option("--seed", seed, "random seed");
    ver->add_option("--out", ver_out, "write the CSV report here instead of stdout");

    // sweep
    auto* sw = app.add_subcommand("sweep", "run a study with resumable records");
    std::string kind, sw_config, bc = "navier", p_ladder, omega_ladder_s, eps_ladder, out_dir;
    std::vector<std::string> sw_sets;
    int sN = 3, jobs = 4;
    double sp = 2;
    sw->add_option("kind", kind, "phase | omega | fujita | lifespan")->required();
    sw->add_option("config", sw_config, "config file; the [sweep] table holds ladders and options");
    sw->add_option("--set", sw_sets, "override, e.g. sweep.jobs=2 or T_max=50 (repeatable)");
    sw->add_option("--N", sN, "dimension (defaults: phase 3, omega 6, fujita 4, lifespan 3)");
    sw->add_option("--p", sp, "exponent (omega 4, lifespan 1.5)");
    sw->add_option("--bc", bc, "boundary condition");
    sw->add_option("--p-ladder", p_ladder, "comma list (default: critical value x {0.6, 0.9, 1.1, 1.4})");
    sw->add_option("--omega-ladder", omega_ladder_s, "comma list (default: omega_crit x {0.6, 0.9, 1.1, 1.4})");
    sw->add_option("--eps-ladder", eps_ladder, "comma list (default: 1e-1 ... 1e-3 in half decades)");
    sw->add_option("--jobs", jobs, "worker threads");
    sw->add_option("--record-dir", record_dir, "record store directory (default $BIHARM_RECORD_DIR or ./records)");
    sw->add_option("--out-dir", out_dir, "summary CSV and plot script directory (default: record dir)");

    // report
    auto* rep = app.add_subcommand("report", "list stored records or print one");
    std::string rep_id;
    rep->add_option("--run", rep_id, "run id or unique prefix");
    rep->add_option("--record-dir", record_dir, "record store directory (default $BIHARM_RECORD_DIR or ./records)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(io, sim_config, sim_sets, flags, snapshots, snapshot_every, record_dir);
        if (ver->parsed()) return cmd_verify(io, suite, ver, vN, vp, vm, veps, samples, random_count, seed, ver_out);
        if (sw->parsed())
            return cmd_sweep(io, kind, sw_config, sw_sets, sw, sN, sp, bc, p_ladder, omega_ladder_s,
                             eps_ladder, jobs, record_dir, out_dir);
        if (rep->parsed()) return cmd_report(io, record_dir, rep_id);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

} // namespace biharm
