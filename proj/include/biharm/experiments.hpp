#pragma once

#include <atomic>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biharm/closed_forms.hpp"
#include "biharm/radial.hpp"
#include "biharm/solver.hpp"

namespace biharm {

using json = nlohmann::json;

inline constexpr int kRecordSchemaVersion = 1;
std::string code_version();

// JSON forms. The readers reject unknown keys and report the offending key
// path; numbers may also be given as numeric strings (INI input).
json to_json(const RadialRule& r);
json to_json(const ProblemSpec& s);
json to_json(const SimOutcome& o);
json to_json(const Exponents& e);
json to_json(const Supersolution& s);
RadialRule rule_from_json(const json& j, const std::string& path);
ProblemSpec spec_from_json(const json& j, const std::string& path = "");
ProblemSpec apply_spec_json(ProblemSpec base, const json& j, const std::string& path = "");

std::string sha256_hex(const std::string& data);
// Content hash of the canonical (key-sorted, compact) spec serialization.
std::string run_id(const ProblemSpec& s);

struct RunRecord {
    int schema_version = kRecordSchemaVersion;
    std::string run_id;
    json spec;
    json outcome;
    OutcomeKind kind = OutcomeKind::Survived;
    double wall_seconds = 0;
    std::string code_version;
    unsigned seed = 0;
    json extra = json::object();

    json to_json() const;
    static RunRecord from_json(const json& j);
};

RunRecord run_spec(const ProblemSpec& spec, unsigned seed = 0,
                   const std::atomic<bool>* cancel = nullptr);

// Append-only JSON-lines store. One writer commits whole lines under a lock;
// a trailing partial line left by an interrupted writer is ignored on load.
class RecordStore {
public:
    explicit RecordStore(std::filesystem::path dir);
    // $BIHARM_RECORD_DIR, else ./records
    static std::filesystem::path default_dir();

    const std::filesystem::path& file() const { return file_; }
    std::optional<RunRecord> find(const std::string& id) const;
    void append(const RunRecord& rec);
    std::vector<RunRecord> all() const;

private:
    std::filesystem::path file_;
    mutable std::mutex mu_;
    std::vector<RunRecord> records_;
    void load();
};

enum class Classification { BlowUp, BoundedUnderEnvelope, Stationary, Undetermined };

std::string to_string(Classification c);
Classification classify(const SimOutcome& o, std::string* note = nullptr);
Classification classify(const RunRecord& rec, std::string* note = nullptr);

struct PhasePoint {
    int N = 3;
    double p = 2;
    BoundaryCondition bc = BoundaryCondition::Navier;
    std::string forcing;         // descriptor
    double omega = std::numeric_limits<double>::quiet_NaN();
    double epsilon = 1;
    Classification classification = Classification::Undetermined;
    double T_est = std::numeric_limits<double>::quiet_NaN();
    std::string run_id;
    bool skipped = false;
    bool conjectural = false;
    bool computed = false;       // false when resumed from the store
    std::string note;
};

struct Arm {
    ProblemSpec spec;
    PhasePoint point;
    std::optional<RunRecord> record;
};

struct SpotCheck {
    std::size_t index = 0;
    Classification original = Classification::Undetermined;
    Classification doubled = Classification::Undetermined;
    bool agree = false;
};

struct SweepOptions {
    int jobs = 1;
    RecordStore* store = nullptr;
    const std::atomic<bool>* cancel = nullptr;
    ProblemSpec base = default_sweep_base();
    double spot_fraction = 0.2;   // share of arms re-run at doubled R_max
    unsigned seed = 1234;
    double bump_amplitude = 1;    // blow-up arm forcing
    double power_amplitude = 10;  // c in c r^{-omega}
    double fujita_amplitude = 0.9;  // peak of the initial bump
    std::vector<double> fujita_eps{1.0};
    // Horizon and step cap of the f = 0 runs (fujita, lifespan).
    double long_T_max = 1e7;
    double long_dt_max = 1000;
    json config = json::object();  // resolved config embedded in new records


    static ProblemSpec default_sweep_base();
};

struct SweepResult {
    std::vector<PhasePoint> points;
    std::vector<SpotCheck> spot_checks;
    int failed_arms = 0;      // numerical failures or exceptions
    bool interrupted = false;
};

// Runs arms with a bounded worker pool; arms whose run id is already in the
// store are read back instead of recomputed.
void run_arms(std::vector<Arm>& arms, const SweepOptions& opt, SweepResult& res);
void spot_check(std::vector<Arm>& arms, const SweepOptions& opt, SweepResult& res);

// p_crit * {0.6, 0.9, 1.1, 1.4} for N >= 5; {1.5, 2, 3, 5} otherwise.
std::vector<double> default_p_ladder(int N);

// Blow-up arms (p <= p_crit) use a positive bump forcing; existence arms use
// the supersolution forcing and data with m at the window midpoint.
SweepResult phase_diagram(int N, BoundaryCondition bc, const std::vector<double>& p_ladder,
                          const SweepOptions& opt);

// omega < omega_crit: f = c r^{-omega}; omega >= omega_crit: supersolution with
// m = (max(omega - 4, 4/(p-1)) + (N-4))/2, checked against I_omega^-.
SweepResult second_critical_sweep(int N, double p, const std::vector<double>& omega_ladder,
                                  const SweepOptions& opt);

// f = 0, u0 = eps * bump. Rows with p > p_fuj are flagged conjectural.
SweepResult fujita_study(int N, BoundaryCondition bc, const std::vector<double>& p_ladder,
                         const SweepOptions& opt);

struct LifespanRow {
    double epsilon = 0;
    double T_est = 0, T_lo = 0, T_hi = 0;
    bool bracketed = false;
    double ikeda = 0;
    std::string run_id;
};

struct LifespanStudy {
    int N = 3;
    double p = 1.5;
    double theta = 0;
    double predicted_slope = 0;   // -1/theta, or NaN when theta = 0
    std::vector<LifespanRow> rows;
    FitResult fit;                // ln T_est against ln eps
    bool fitted = false;
    double mass = 0;              // int u0 A
    double C0 = 0, R1 = 1;        // Ikeda calibration
    bool below_ikeda = false;
    bool convex = false;          // ln T against ln(1/eps), second differences > 0
    int failed_arms = 0;
    bool interrupted = false;
    std::string note;
};

LifespanStudy lifespan_study(int N, double p, const std::vector<double>& eps_ladder,
                             const SweepOptions& opt);

// Convexity of y against x through strictly positive second divided differences.
bool convex_sequence(const std::vector<double>& x, const std::vector<double>& y);

std::string phase_csv(const std::vector<PhasePoint>& pts);
std::string lifespan_csv(const LifespanStudy& s);
// Self-contained matplotlib scripts with the data inlined.
std::string phase_plot_script(const std::vector<PhasePoint>& pts, const std::string& title,
                              double critical_value, const std::string& axis);
std::string lifespan_plot_script(const LifespanStudy& s);

} // namespace biharm
