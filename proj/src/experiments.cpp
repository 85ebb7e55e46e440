#include "biharm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "biharm/errors.hpp"
#include "biharm/testfn.hpp"

namespace biharm {

std::string code_version() { return "0.1.0"; }

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double as_number(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (!s.empty() && end && *end == '\0') return d;
    }
    throw ConfigError(path + ": expected a number");
}

int as_int(const json& v, const std::string& path) {
    const double d = as_number(v, path);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(path + ": expected an integer");
    return static_cast<int>(d);
}

bool as_bool(const json& v, const std::string& path) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "off" || s == "0" || s == "no") return false;
    }
    if (v.is_number_integer()) return v.get<int>() != 0;
    throw ConfigError(path + ": expected a boolean");
}

std::string as_string(const json& v, const std::string& path) {
    if (v.is_string()) return v.get<std::string>();
    throw ConfigError(path + ": expected a string");
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected a table");
}

const std::set<std::string> kRuleKeys{"kind", "amplitude", "center", "width", "omega",
                                      "m", "epsilon", "taper", "taper_inner"};

} // namespace

json to_json(const RadialRule& r) {
    return json{{"kind", r.kind},   {"amplitude", r.amplitude}, {"center", r.center},
                {"width", r.width}, {"omega", r.omega},         {"m", r.m},
                {"epsilon", r.epsilon}, {"taper", r.taper},     {"taper_inner", r.taper_inner}};
}

RadialRule rule_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    RadialRule r;
    for (const auto& [k, v] : j.items()) {
        const std::string kp = join(path, k);
        if (!kRuleKeys.count(k)) throw ConfigError(kp + ": unknown key");
        if (k == "kind") r.kind = as_string(v, kp);
        else if (k == "amplitude") r.amplitude = as_number(v, kp);
        else if (k == "center") r.center = as_number(v, kp);
        else if (k == "width") r.width = as_number(v, kp);
        else if (k == "omega") r.omega = as_number(v, kp);
        else if (k == "m") r.m = as_number(v, kp);
        else if (k == "epsilon") r.epsilon = as_number(v, kp);
        else if (k == "taper") r.taper = as_number(v, kp);
        else if (k == "taper_inner") r.taper_inner = as_number(v, kp);
    }
    static const std::set<std::string> kinds{"zero", "gaussian", "exp", "power", "supersolution"};
    if (!kinds.count(r.kind)) throw ConfigError(join(path, "kind") + ": unknown kind '" + r.kind + "'");
    return r;
}

json to_json(const ProblemSpec& s) {
    return json{{"N", s.N},
                {"p", s.p},
                {"bc", to_string(s.bc)},
                {"R_max", s.R_max},
                {"M", s.M},
                {"forcing", to_json(s.forcing)},
                {"initial", to_json(s.initial)},
                {"epsilon", s.epsilon},
                {"nonlinearity", s.nonlinearity},
                {"T_max", s.T_max},
                {"U_blow", s.U_blow},
                {"dt0", s.dt0},
                {"dt_min", s.dt_min},
                {"dt_max", s.dt_max},
                {"growth_halve", s.growth_halve},
                {"growth_double", s.growth_double},
                {"stationary_tol", s.stationary_tol},
                {"stationary_delta", s.stationary_delta},
                {"track_envelope", s.track_envelope},
                {"snapshot_every", s.snapshot_every},
                {"closure_order", s.closure_order}};
}

ProblemSpec apply_spec_json(ProblemSpec s, const json& j, const std::string& path) {
    require_object(j, path);
    for (const auto& [k, v] : j.items()) {
        const std::string kp = join(path, k);
        if (k == "N") s.N = as_int(v, kp);
        else if (k == "p") s.p = as_number(v, kp);
        else if (k == "bc") {
            try {
                s.bc = parse_boundary_condition(as_string(v, kp));
            } catch (const DomainError& e) {
                throw ConfigError(kp + ": " + e.what());
            }
        } else if (k == "R_max") s.R_max = as_number(v, kp);
        else if (k == "M") s.M = as_int(v, kp);
        else if (k == "forcing" || k == "initial") {
            const RadialRule base = k == "forcing" ? s.forcing : s.initial;
            json merged = to_json(base);
            require_object(v, kp);
            for (const auto& [rk, rv] : v.items()) merged[rk] = rv;
            // report unknown keys against the user's table, not the merged one
            for (const auto& [rk, rv] : v.items())
                if (!kRuleKeys.count(rk)) throw ConfigError(join(kp, rk) + ": unknown key");
            (k == "forcing" ? s.forcing : s.initial) = rule_from_json(merged, kp);
        } else if (k == "epsilon") s.epsilon = as_number(v, kp);
        else if (k == "nonlinearity") s.nonlinearity = as_bool(v, kp);
        else if (k == "T_max") s.T_max = as_number(v, kp);
        else if (k == "U_blow") s.U_blow = as_number(v, kp);
        else if (k == "dt0") s.dt0 = as_number(v, kp);
        else if (k == "dt_min") s.dt_min = as_number(v, kp);
        else if (k == "dt_max") s.dt_max = as_number(v, kp);
        else if (k == "growth_halve") s.growth_halve = as_number(v, kp);
        else if (k == "growth_double") s.growth_double = as_number(v, kp);
        else if (k == "stationary_tol") s.stationary_tol = as_number(v, kp);
        else if (k == "stationary_delta") s.stationary_delta = as_number(v, kp);
        else if (k == "track_envelope") s.track_envelope = as_bool(v, kp);
        else if (k == "snapshot_every") s.snapshot_every = as_number(v, kp);
        else if (k == "closure_order") s.closure_order = as_int(v, kp);
        else throw ConfigError(kp + ": unknown key");
    }
    return s;
}

ProblemSpec spec_from_json(const json& j, const std::string& path) {
    return apply_spec_json(ProblemSpec{}, j, path);
}

json to_json(const SimOutcome& o) {
    json j{{"kind", to_string(o.kind)},
           {"T_end", o.T_end},
           {"final_sup", o.final_sup},
           {"steps", o.steps},
           {"rejected", o.rejected},
           {"dt_max_used", o.dt_max_used},
           {"dt_min_used", o.dt_min_used},
           {"far_field", {{"tail_max", o.far_field.tail_max},
                          {"global_max", o.far_field.global_max},
                          {"ratio", o.far_field.ratio},
                          {"flagged", o.far_field.flagged}}},
           {"threshold_crossings", o.threshold_crossings}};
    if (o.kind == OutcomeKind::BlowUp) {
        j["T_est"] = o.T_est;
        j["T_lo"] = o.T_lo;
        j["T_hi"] = o.T_hi;
        j["dt_collapse"] = o.dt_collapse;
        j["sign_at_detection"] = o.sign_at_detection;
    }
    if (o.kind == OutcomeKind::Stationary) j["steady_residual"] = o.steady_residual;
    if (o.envelope_tracked)
        j["envelope"] = {{"held", o.envelope_held}, {"max_ratio", o.envelope_max_ratio}};
    if (!o.failure.empty()) j["failure"] = o.failure;
    // thinned energy trace
    json e = json::array();
    const std::size_t n = o.energy.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 200);
    for (std::size_t i = 0; i < n; i += stride) e.push_back({o.energy[i].first, o.energy[i].second});
    if (n > 0 && (n - 1) % stride != 0) e.push_back({o.energy.back().first, o.energy.back().second});
    j["energy"] = e;
    return j;
}

json to_json(const Exponents& e) {
    json j{{"p", e.p}, {"N", e.N}, {"p_conj", e.p_conj}, {"p_fuj", e.p_fuj},
           {"omega_crit", e.omega_crit}, {"theta", e.theta}};
    if (e.p_crit.is_infinite()) j["p_crit"] = "inf";
    else j["p_crit"] = e.p_crit.value();
    return j;
}

json to_json(const Supersolution& s) {
    return json{{"p", s.p}, {"N", s.N}, {"m", s.m}, {"epsilon", s.epsilon}, {"M", s.M}};
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string run_id(const ProblemSpec& s) { return sha256_hex(to_json(s).dump()); }

json RunRecord::to_json() const {
    return json{{"schema_version", schema_version}, {"run_id", run_id},
                {"spec", spec},                     {"outcome", outcome},
                {"kind", biharm::to_string(kind)},  {"wall_seconds", wall_seconds},
                {"code_version", code_version},     {"seed", seed},
                {"extra", extra}};
}

RunRecord RunRecord::from_json(const json& j) {
    RunRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kRecordSchemaVersion)
        throw ConfigError("schema_version: unsupported version " + std::to_string(r.schema_version));
    r.run_id = j.at("run_id").get<std::string>();
    r.spec = j.at("spec");
    r.outcome = j.at("outcome");
    const std::string k = j.at("kind").get<std::string>();
    if (k == "blowup") r.kind = OutcomeKind::BlowUp;
    else if (k == "survived") r.kind = OutcomeKind::Survived;
    else if (k == "stationary") r.kind = OutcomeKind::Stationary;
    else if (k == "numerical-failure") r.kind = OutcomeKind::NumericalFailure;
    else throw ConfigError("kind: unknown outcome '" + k + "'");
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.code_version = j.value("code_version", std::string());
    r.seed = j.value("seed", 0u);
    r.extra = j.value("extra", json::object());
    return r;
}

RunRecord run_spec(const ProblemSpec& spec, unsigned seed, const std::atomic<bool>* cancel) {
    RunRecord rec;
    rec.run_id = run_id(spec);
    rec.spec = to_json(spec);
    rec.code_version = code_version();
    rec.seed = seed;
    SimulationHooks hooks;
    if (cancel) hooks.should_stop = [cancel] { return cancel->load(); };
    const auto t0 = std::chrono::steady_clock::now();
    const SimOutcome o = simulate(spec, hooks).outcome;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.kind = o.kind;
    rec.outcome = to_json(o);
    return rec;
}

RecordStore::RecordStore(std::filesystem::path dir) {
    std::filesystem::create_directories(dir);
    file_ = dir / "records.jsonl";
    load();
}

std::filesystem::path RecordStore::default_dir() {
    if (const char* d = std::getenv("BIHARM_RECORD_DIR"); d && *d) return d;
    return "records";
}

void RecordStore::load() {
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            records_.push_back(RunRecord::from_json(json::parse(line)));
        } catch (const std::exception&) {
            // torn final line from an interrupted writer
        }
    }
}

std::optional<RunRecord> RecordStore::find(const std::string& id) const {
    std::lock_guard lk(mu_);
    for (const auto& r : records_)
        if (r.run_id == id) return r;
    return std::nullopt;
}

void RecordStore::append(const RunRecord& rec) {
    std::lock_guard lk(mu_);
    std::string line = rec.to_json().dump() + "\n";
    // A torn last line has no newline; keep it from swallowing this record.
    {
        std::ifstream in(file_, std::ios::binary | std::ios::ate);
        if (in && in.tellg() > 0) {
            in.seekg(-1, std::ios::end);
            if (in.get() != '\n') line.insert(line.begin(), '\n');
        }
    }
    std::ofstream out(file_, std::ios::app);
    out << line;
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + file_.string());
    records_.push_back(rec);
}

std::vector<RunRecord> RecordStore::all() const {
    std::lock_guard lk(mu_);
    return records_;
}

std::string to_string(Classification c) {
    switch (c) {
    case Classification::BlowUp: return "blowup";
    case Classification::BoundedUnderEnvelope: return "bounded-under-envelope";
    case Classification::Stationary: return "stationary";
    case Classification::Undetermined: return "undetermined";
    }
    return "?";
}

namespace {

Classification classify_parts(OutcomeKind kind, bool tracked, bool held, const std::string& failure,
                              std::string* note) {
    auto say = [&](const std::string& s) {
        if (note) *note = s;
    };
    if (tracked && !held) {
        say("envelope violated");
        return Classification::Undetermined;
    }
    switch (kind) {
    case OutcomeKind::BlowUp: return Classification::BlowUp;
    case OutcomeKind::Stationary: return Classification::Stationary;
    case OutcomeKind::Survived:
        if (tracked) return Classification::BoundedUnderEnvelope;
        say("reached T_max without an envelope");
        return Classification::Undetermined;
    case OutcomeKind::NumericalFailure:
        say("numerical failure: " + failure);
        return Classification::Undetermined;
    }
    return Classification::Undetermined;
}

} // namespace

Classification classify(const SimOutcome& o, std::string* note) {
    return classify_parts(o.kind, o.envelope_tracked, o.envelope_held, o.failure, note);
}

Classification classify(const RunRecord& rec, std::string* note) {
    const json& o = rec.outcome;
    const bool tracked = o.contains("envelope");
    const bool held = tracked ? o["envelope"].value("held", false) : true;
    return classify_parts(rec.kind, tracked, held, o.value("failure", std::string()), note);
}

ProblemSpec SweepOptions::default_sweep_base() {
    ProblemSpec s;
    s.R_max = 80;
    s.M = 790;
    s.T_max = 100;
    return s;
}

namespace {

bool interrupted(const SweepOptions& opt) { return opt.cancel && opt.cancel->load(); }

// Runs one spec, consulting and feeding the store.
std::optional<RunRecord> obtain(const ProblemSpec& spec, const SweepOptions& opt, bool& computed) {
    computed = false;
    const std::string id = run_id(spec);
    if (opt.store)
        if (auto r = opt.store->find(id)) return r;
    RunRecord rec = run_spec(spec, opt.seed, opt.cancel);
    if (rec.outcome.value("failure", std::string()) == "interrupted") return std::nullopt;
    if (!opt.config.empty()) rec.extra["config"] = opt.config;
    computed = true;
    if (opt.store) opt.store->append(rec);
    return rec;
}

void fill_point(PhasePoint& pt, const RunRecord& rec) {
    std::string note;
    pt.classification = classify(rec, &note);
    pt.run_id = rec.run_id;
    if (rec.kind == OutcomeKind::BlowUp) pt.T_est = rec.outcome.value("T_est", std::nan(""));
    if (!note.empty()) pt.note = pt.note.empty() ? note : pt.note + "; " + note;
}

template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) body(i);
    };
    const int w = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int k = 1; k < w; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

} // namespace

void run_arms(std::vector<Arm>& arms, const SweepOptions& opt, SweepResult& res) {
    std::mutex mu;
    parallel_for(arms.size(), opt.jobs, [&](std::size_t i) {
        Arm& a = arms[i];
        if (a.point.skipped) return;
        if (interrupted(opt)) {
            std::lock_guard lk(mu);
            res.interrupted = true;
            return;
        }
        try {
            bool computed = false;
            const auto rec = obtain(a.spec, opt, computed);
            std::lock_guard lk(mu);
            if (!rec) {
                res.interrupted = true;
                a.point.note = "interrupted";
                return;
            }
            fill_point(a.point, *rec);
            a.point.computed = computed;
            a.record = rec;
            if (rec->kind == OutcomeKind::NumericalFailure) ++res.failed_arms;
        } catch (const std::exception& e) {
            std::lock_guard lk(mu);
            a.point.classification = Classification::Undetermined;
            a.point.note = std::string("error: ") + e.what();
            ++res.failed_arms;
        }
    });
    res.points.clear();
    for (const auto& a : arms) res.points.push_back(a.point);
}

void spot_check(std::vector<Arm>& arms, const SweepOptions& opt, SweepResult& res) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < arms.size(); ++i)
        if (!arms[i].point.skipped && !arms[i].point.run_id.empty()) eligible.push_back(i);
    if (eligible.empty() || opt.spot_fraction <= 0) return;
    std::mt19937 rng(opt.seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    const std::size_t k = std::min(eligible.size(),
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.spot_fraction * eligible.size()))));
    eligible.resize(k);
    std::sort(eligible.begin(), eligible.end());
    std::vector<SpotCheck> checks(k);
    std::mutex mu;
    parallel_for(k, opt.jobs, [&](std::size_t n) {
        const std::size_t i = eligible[n];
        ProblemSpec s = arms[i].spec;
        s.M = 2 * s.M;
        s.R_max = 2 * s.R_max - 1;   // doubles the interval length at fixed h
        SpotCheck c;
        c.index = i;
        c.original = arms[i].point.classification;
        try {
            bool computed = false;
            const auto rec = obtain(s, opt, computed);
            if (!rec) {
                std::lock_guard lk(mu);
                res.interrupted = true;
                return;
            }
            c.doubled = classify(*rec);
        } catch (const std::exception&) {
            c.doubled = Classification::Undetermined;
        }
        c.agree = c.doubled == c.original;
        checks[n] = c;
    });
    res.spot_checks = checks;
}

std::vector<double> default_p_ladder(int N) {
    const Exponents ex = compute_exponents(2, N);
    if (ex.p_crit.is_infinite()) return {1.5, 2, 3, 5};
    const double pc = ex.p_crit.value();
    return {0.6 * pc, 0.9 * pc, 1.1 * pc, 1.4 * pc};
}

namespace {

PhasePoint point_of(int N, double p, BoundaryCondition bc, std::string forcing) {
    PhasePoint q;
    q.N = N;
    q.p = p;
    q.bc = bc;
    q.forcing = std::move(forcing);
    return q;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

Arm blowup_arm(int N, double p, BoundaryCondition bc, const SweepOptions& opt) {
    Arm a;
    a.spec = opt.base;
    a.spec.N = N;
    a.spec.p = p;
    a.spec.bc = bc;
    a.spec.forcing = RadialRule{};
    a.spec.forcing.kind = "gaussian";
    a.spec.forcing.amplitude = opt.bump_amplitude;
    a.spec.forcing.center = 2;
    a.spec.forcing.width = 1;
    a.spec.initial = RadialRule{};
    a.spec.epsilon = 0;
    a.point = point_of(N, p, bc, "gaussian(A=" + fmt(opt.bump_amplitude) + ",c=2,w=1)");
    a.point.epsilon = 0;
    return a;
}

Arm existence_arm(int N, double p, BoundaryCondition bc, double m, double eps,
                  const SweepOptions& opt) {
    Arm a;
    a.spec = opt.base;
    a.spec.N = N;
    a.spec.p = p;
    a.spec.bc = bc;
    a.spec.forcing = RadialRule{};
    a.spec.forcing.kind = "supersolution";
    a.spec.forcing.m = m;
    a.spec.forcing.epsilon = eps;
    a.spec.initial = a.spec.forcing;
    a.spec.epsilon = 1;
    a.spec.track_envelope = true;
    a.point = point_of(N, p, bc, "supersolution(m=" + fmt(m) + ",eps=" + fmt(eps) + ")");
    a.point.epsilon = eps;
    return a;
}

// Skips blow-up arms whose forcing functional sign is not positive.
void gate_sign(Arm& a) {
    const auto f = make_forcing(a.spec.forcing, a.spec.p, a.spec.N);
    const SignResult s = sign_functional(f, weight_for(a.spec.bc, a.spec.N), a.spec.grid());
    if (s.sign <= 0) {
        a.point.skipped = true;
        a.point.note = s.sign == 0 ? "sign functional undetermined" : "sign functional negative";
    }
}

void finish_sweep(std::vector<Arm>& arms, const SweepOptions& opt, SweepResult& res) {
    run_arms(arms, opt, res);
    if (!res.interrupted) spot_check(arms, opt, res);
}

} // namespace

SweepResult phase_diagram(int N, BoundaryCondition bc, const std::vector<double>& p_ladder,
                          const SweepOptions& opt) {
    std::vector<Arm> arms;
    for (double p : p_ladder) {
        const Exponents ex = compute_exponents(p, N);
        if (p <= ex.p_crit) {
            Arm a = blowup_arm(N, p, bc, opt);
            gate_sign(a);
            arms.push_back(std::move(a));
        } else {
            const double lo = 4 / (p - 1), hi = N - 4.0;
            const double m = opt.base.forcing.kind == "supersolution" && opt.base.forcing.m > lo &&
                                     opt.base.forcing.m < hi
                                 ? opt.base.forcing.m
                                 : (lo + hi) / 2;
            const double eps = opt.base.forcing.kind == "supersolution" ? opt.base.forcing.epsilon : 0.01;
            arms.push_back(existence_arm(N, p, bc, m, eps, opt));
        }
    }
    SweepResult res;
    finish_sweep(arms, opt, res);
    return res;
}

SweepResult second_critical_sweep(int N, double p, const std::vector<double>& omega_ladder,
                                  const SweepOptions& opt) {
    const Exponents ex = compute_exponents(p, N);
    if (!(ex.p_crit.is_infinite() == false && p > ex.p_crit.value()))
        throw DomainError("second critical sweep needs N >= 5 and p > N/(N-4)");
    std::vector<Arm> arms;
    for (double om : omega_ladder) {
        if (om < ex.omega_crit) {
            Arm a = blowup_arm(N, p, BoundaryCondition::Navier, opt);
            a.spec.bc = opt.base.bc;
            a.point.bc = opt.base.bc;
            a.spec.forcing = RadialRule{};
            a.spec.forcing.kind = "power";
            a.spec.forcing.omega = om;
            a.spec.forcing.amplitude = opt.power_amplitude;
            a.point.forcing = "power(c=" + fmt(opt.power_amplitude) + ")";
            a.point.omega = om;
            gate_sign(a);
            arms.push_back(std::move(a));
        } else {
            const double lo = std::max(om - 4, 4 / (p - 1)), hi = N - 4.0;
            const double eps = opt.base.forcing.kind == "supersolution" ? opt.base.forcing.epsilon : 0.01;
            if (!(lo < hi)) {
                Arm a;
                a.point = point_of(N, p, opt.base.bc, "supersolution");
                a.point.omega = om;
                a.point.skipped = true;
                a.point.note = "empty admissible m-window";
                arms.push_back(std::move(a));
                continue;
            }
            Arm a = existence_arm(N, p, opt.base.bc, (lo + hi) / 2, eps, opt);
            a.point.omega = om;
            const auto f = make_forcing(a.spec.forcing, p, N);
            std::vector<double> probe;
            for (int k = 0; k <= 60; ++k) probe.push_back(std::pow(10.0, 3.0 * k / 60));
            if (!forcing_in_class(f, om, ForcingClass::Minus, probe)) {
                a.point.skipped = true;
                a.point.note = "forcing not in I_omega^-";
            }
            arms.push_back(std::move(a));
        }
    }
    SweepResult res;
    finish_sweep(arms, opt, res);
    return res;
}

SweepResult fujita_study(int N, BoundaryCondition bc, const std::vector<double>& p_ladder,
                         const SweepOptions& opt) {
    std::vector<Arm> arms;
    for (double p : p_ladder) {
        const Exponents ex = compute_exponents(p, N);
        for (double eps : opt.fujita_eps) {
            Arm a;
            a.spec = opt.base;
            a.spec.N = N;
            a.spec.p = p;
            a.spec.bc = bc;
            a.spec.forcing = RadialRule{};
            a.spec.initial = RadialRule{};
            a.spec.initial.kind = "gaussian";
            a.spec.initial.amplitude = opt.fujita_amplitude;
            a.spec.initial.center = 2;
            a.spec.initial.width = 1;
            a.spec.epsilon = eps;
            a.spec.T_max = opt.long_T_max;
            a.spec.dt_max = opt.long_dt_max;
            a.point = point_of(N, p, bc, "zero");
            a.point.epsilon = eps;
            const auto u0 = make_initial(a.spec.initial, p, N, a.spec.R_max);
            const SignResult s = sign_functional(u0, weight_for(bc, N), a.spec.grid());
            if (s.sign <= 0) {
                a.point.skipped = true;
                a.point.note = "sign functional of u0 not positive";
            }
            if (p > ex.p_fuj + 1e-12) {
                a.point.conjectural = true;
                a.point.note = "beyond the proven range - conjectured global regime";
            }
            arms.push_back(std::move(a));
        }
    }
    SweepResult res;
    finish_sweep(arms, opt, res);
    return res;
}

bool convex_sequence(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) return false;
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        const double x0 = x[idx[k - 1]], x1 = x[idx[k]], x2 = x[idx[k + 1]];
        const double s0 = (y[idx[k]] - y[idx[k - 1]]) / (x1 - x0);
        const double s1 = (y[idx[k + 1]] - y[idx[k]]) / (x2 - x1);
        if (!(s1 > s0)) return false;
    }
    return true;
}

LifespanStudy lifespan_study(int N, double p, const std::vector<double>& eps_ladder,
                             const SweepOptions& opt) {
    const Exponents ex = compute_exponents(p, N);
    if (p > ex.p_fuj + 1e-12) throw DomainError("lifespan study needs p <= p_fuj");
    if (eps_ladder.size() < 2) throw DomainError("epsilon ladder needs at least two values");
    const auto [mn, mx] = std::minmax_element(eps_ladder.begin(), eps_ladder.end());
    if (!(*mn > 0)) throw DomainError("epsilon values must be positive");
    if (ex.theta > 0 && std::log10(*mx / *mn) < 1.5 - 1e-9)
        throw DomainError("epsilon ladder must span at least 1.5 decades");

    LifespanStudy st;
    st.N = N;
    st.p = p;
    st.theta = ex.theta;
    st.predicted_slope = st.theta > 0 ? -1 / st.theta : std::nan("");
    if (N < 3) st.note = "outside the proven range (N < 3)";

    std::vector<Arm> arms;
    for (double eps : eps_ladder) {
        Arm a;
        a.spec = opt.base;
        a.spec.N = N;
        a.spec.p = p;
        a.spec.forcing = RadialRule{};
        a.spec.initial = RadialRule{};
        a.spec.initial.kind = "gaussian";
        a.spec.initial.amplitude = opt.fujita_amplitude;
        a.spec.initial.center = 2;
        a.spec.initial.width = 1;
        a.spec.epsilon = eps;
        a.spec.T_max = opt.long_T_max;
        a.spec.dt_max = opt.long_dt_max;
        a.point = point_of(N, p, a.spec.bc, "zero");
        a.point.epsilon = eps;
        arms.push_back(std::move(a));
    }
    const auto u0 = make_initial(arms[0].spec.initial, p, N, arms[0].spec.R_max);
    st.mass = sign_functional(u0, weight_for(opt.base.bc, N), arms[0].spec.grid()).value;

    SweepResult res;
    run_arms(arms, opt, res);
    st.failed_arms = res.failed_arms;
    st.interrupted = res.interrupted;
    for (const auto& a : arms) {
        LifespanRow row;
        row.epsilon = a.point.epsilon;
        row.run_id = a.point.run_id;
        if (a.point.classification == Classification::BlowUp && a.record) {
            const json& o = a.record->outcome;
            row.T_est = a.point.T_est;
            row.T_lo = o.value("T_lo", row.T_est);
            row.T_hi = o.value("T_hi", row.T_est);
            row.bracketed = !o.value("dt_collapse", false) && row.T_lo < row.T_hi;
        }
        st.rows.push_back(row);
    }
    std::sort(st.rows.begin(), st.rows.end(),
              [](const LifespanRow& a, const LifespanRow& b) { return a.epsilon < b.epsilon; });

    std::vector<double> lx, ly;
    for (const auto& r : st.rows)
        if (r.bracketed) {
            lx.push_back(std::log(r.epsilon));
            ly.push_back(std::log(r.T_est));
        }
    std::vector<double> inv;
    for (double x : lx) inv.push_back(-x);
    st.convex = convex_sequence(inv, ly);
    if (lx.size() < 4) {
        st.note = (st.note.empty() ? "" : st.note + "; ") + "fewer than 4 bracketed lifespans, fit refused";
        return st;
    }
    st.fit = fit_line(lx, ly);
    st.fitted = true;

    // One-point Ikeda calibration at the largest bracketed eps, delta = eps int u0 A.
    if (st.mass > 0 && st.theta >= 0) {
        const LifespanRow* top = nullptr;
        for (const auto& r : st.rows)
            if (r.bracketed) top = &r;
        const double T1 = top->T_est;
        // small R1 so the bound follows its asymptotic slope -1/theta already near T1
        st.R1 = 1e-3 * T1;
        const double d1 = top->epsilon * st.mass;
        double cp;   // C0^p
        if (st.theta > 0) {
            const double e = (p - 1) * st.theta;
            cp = (std::pow(T1, e) - std::pow(st.R1, e)) / (std::log(2.0) * st.theta * std::pow(d1, -(p - 1)));
        } else {
            cp = (std::log(T1) - std::log(st.R1)) * (p - 1) / (std::log(2.0) * std::pow(d1, -(p - 1)));
        }
        st.C0 = std::pow(cp, 1 / p);
        st.below_ikeda = true;
        for (auto& r : st.rows) {
            if (!r.bracketed) continue;
            r.ikeda = ikeda_bound(st.theta, st.C0, st.R1, r.epsilon * st.mass, p);
            if (r.T_est > r.ikeda * (1 + 1e-9)) st.below_ikeda = false;
        }
    }
    return st;
}

std::string phase_csv(const std::vector<PhasePoint>& pts) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "N,p,bc,forcing,omega,epsilon,classification,T_est,skipped,conjectural,run_id,note\n";
    for (const auto& q : pts) {
        os << q.N << ',' << q.p << ',' << to_string(q.bc) << ",\"" << q.forcing << "\",";
        if (!std::isnan(q.omega)) os << q.omega;
        os << ',' << q.epsilon << ',' << to_string(q.classification) << ',';
        if (!std::isnan(q.T_est)) os << q.T_est;
        os << ',' << (q.skipped ? 1 : 0) << ',' << (q.conjectural ? 1 : 0) << ',' << q.run_id
           << ",\"" << q.note << "\"\n";
    }
    return os.str();
}

std::string lifespan_csv(const LifespanStudy& s) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "N,p,epsilon,T_est,T_lo,T_hi,bracketed,ikeda_bound,run_id\n";
    for (const auto& r : s.rows)
        os << s.N << ',' << s.p << ',' << r.epsilon << ',' << r.T_est << ',' << r.T_lo << ','
           << r.T_hi << ',' << (r.bracketed ? 1 : 0) << ',' << r.ikeda << ',' << r.run_id << '\n';
    return os.str();
}

std::string phase_plot_script(const std::vector<PhasePoint>& pts, const std::string& title,
                              double critical_value, const std::string& axis) {
    json rows = json::array();
    for (const auto& q : pts)
        rows.push_back({{"x", axis == "omega" ? q.omega : q.p},
                        {"N", q.N},
                        {"cls", to_string(q.classification)},
                        {"skipped", q.skipped},
                        {"conjectural", q.conjectural}});
    std::ostringstream os;
    os << "import json\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n";
    os << "rows = json.loads(r'''" << rows.dump() << "''')\n";
    os << "crit = " << (std::isfinite(critical_value) ? fmt(critical_value) : "None") << "\n";
    os << "colors = {'blowup': 'tab:red', 'bounded-under-envelope': 'tab:blue',\n"
          "          'stationary': 'tab:green', 'undetermined': 'tab:gray'}\n";
    os << "fig, ax = plt.subplots(figsize=(6, 2.5))\n";
    os << "for r in rows:\n"
          "    if r['x'] is None:\n"
          "        continue\n"
          "    m = 'x' if r['skipped'] else ('^' if r['conjectural'] else 'o')\n"
          "    ax.scatter(r['x'], r['N'], c=colors[r['cls']], marker=m, s=60)\n";
    os << "if crit is not None:\n"
          "    ax.axvline(crit, ls='--', c='k', label='critical')\n";
    os << "for k, c in colors.items():\n"
          "    ax.scatter([], [], c=c, label=k)\n";
    os << "ax.set_xlabel('" << axis << "')\nax.set_ylabel('N')\nax.set_title('" << title << "')\n";
    os << "ax.legend(fontsize=7)\nfig.tight_layout()\nfig.savefig('" << title << ".png', dpi=150)\n";
    return os.str();
}

std::string lifespan_plot_script(const LifespanStudy& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        if (r.bracketed) rows.push_back({r.epsilon, r.T_est, r.ikeda});
    std::ostringstream os;
    os << "import json\nimport numpy as np\nimport matplotlib\nmatplotlib.use('Agg')\n"
          "import matplotlib.pyplot as plt\n\n";
    os << "rows = np.array(json.loads('" << rows.dump() << "'))\n";
    os << "slope, intercept = " << (s.fitted ? fmt(s.fit.slope) : "float('nan')") << ", "
       << (s.fitted ? fmt(s.fit.intercept) : "float('nan')") << "\n";
    os << "pred = " << (std::isnan(s.predicted_slope) ? "None" : fmt(s.predicted_slope)) << "\n";
    os << "fig, ax = plt.subplots()\n"
          "ax.loglog(rows[:, 0], rows[:, 1], 'o', label='T_est')\n"
          "ax.loglog(rows[:, 0], rows[:, 2], 's', mfc='none', label='Ikeda bound')\n"
          "e = np.geomspace(rows[:, 0].min(), rows[:, 0].max(), 50)\n"
          "ax.loglog(e, np.exp(intercept) * e**slope, '-', label=f'fit slope {slope:.3f}')\n"
          "if pred is not None:\n"
          "    ax.loglog(e, rows[-1, 1] * (e / rows[-1, 0])**pred, ':', label=f'slope {pred:.3f}')\n"
          "ax.set_xlabel('eps')\nax.set_ylabel('T')\nax.legend()\n";
    os << "fig.savefig('lifespan_N" << s.N << "_p" << fmt(s.p) << ".png', dpi=150)\n";
    return os.str();
}

} // namespace biharm
