#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "biharm/errors.hpp"
#include "biharm/experiments.hpp"

using namespace biharm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("biharm_test_" + name);
    fs::remove_all(d);
    return d;
}

ProblemSpec blowup_spec() {
    ProblemSpec s;
    s.forcing.kind = "gaussian";
    s.initial.kind = "zero";
    s.epsilon = 0;
    return s;
}

SimOutcome outcome(OutcomeKind k, bool tracked = false, bool held = true) {
    SimOutcome o;
    o.kind = k;
    o.envelope_tracked = tracked;
    o.envelope_held = held;
    return o;
}

int count(const SweepResult& r, Classification c) {
    int n = 0;
    for (const auto& pt : r.points) n += pt.classification == c;
    return n;
}

} // namespace

TEST(RunId, DeterministicAndSensitive) {
    const ProblemSpec a = blowup_spec();
    ProblemSpec b = a;
    EXPECT_EQ(run_id(a), run_id(b));
    EXPECT_EQ(run_id(a).size(), 64u);
    b.p = 2.0000001;
    EXPECT_NE(run_id(a), run_id(b));
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SpecJson, RoundTripAndUnknownKeys) {
    ProblemSpec s = blowup_spec();
    s.N = 5;
    s.bc = BoundaryCondition::KuttlerSigillito;
    s.forcing.width = 0.5;
    const ProblemSpec back = spec_from_json(to_json(s));
    EXPECT_EQ(run_id(back), run_id(s));
    EXPECT_EQ(to_json(back), to_json(s));

    const ProblemSpec patched = apply_spec_json(s, json{{"p", "3.5"}, {"forcing", {{"center", 4}}}});
    EXPECT_EQ(patched.p, 3.5);
    EXPECT_EQ(patched.forcing.center, 4);
    try {
        apply_spec_json(s, json{{"forcing", {{"centre", 4}}}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("forcing.centre"), std::string::npos) << e.what();
    }
}

TEST(Classify, Rules) {
    EXPECT_EQ(classify(outcome(OutcomeKind::BlowUp)), Classification::BlowUp);
    EXPECT_EQ(classify(outcome(OutcomeKind::Stationary)), Classification::Stationary);
    EXPECT_EQ(classify(outcome(OutcomeKind::Survived, true, true)), Classification::BoundedUnderEnvelope);
    std::string note;
    EXPECT_EQ(classify(outcome(OutcomeKind::Survived), &note), Classification::Undetermined);
    EXPECT_FALSE(note.empty());
    EXPECT_EQ(classify(outcome(OutcomeKind::NumericalFailure)), Classification::Undetermined);
    EXPECT_EQ(classify(outcome(OutcomeKind::Stationary, true, false)), Classification::Undetermined);
    EXPECT_EQ(to_string(Classification::BoundedUnderEnvelope), "bounded-under-envelope");
}

TEST(RecordStore, AppendFindReload) {
    const fs::path dir = fresh_dir("store");
    const RunRecord rec = run_spec(blowup_spec(), 7);
    EXPECT_EQ(rec.kind, OutcomeKind::BlowUp);
    EXPECT_EQ(rec.schema_version, kRecordSchemaVersion);
    {
        RecordStore st(dir);
        EXPECT_FALSE(st.find(rec.run_id));
        st.append(rec);
    }
    RecordStore st(dir);
    const auto got = st.find(rec.run_id);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->to_json(), rec.to_json());
    EXPECT_EQ(classify(*got), Classification::BlowUp);
}

TEST(RecordStore, TornLastLineIgnoredAndNotJoined) {
    const fs::path dir = fresh_dir("torn");
    const RunRecord rec = run_spec(blowup_spec(), 7);
    {
        RecordStore st(dir);
        st.append(rec);
    }
    {
        std::ofstream out(dir / "records.jsonl", std::ios::app);
        out << R"({"schema_version":1,"run_id":"dead)";
    }
    ProblemSpec other = blowup_spec();
    other.p = 3;
    const RunRecord rec2 = run_spec(other, 7);
    {
        RecordStore st(dir);
        EXPECT_EQ(st.all().size(), 1u);
        st.append(rec2);
    }
    RecordStore st(dir);
    EXPECT_EQ(st.all().size(), 2u);
    EXPECT_TRUE(st.find(rec2.run_id));
}

TEST(ConvexSequence, Examples) {
    EXPECT_TRUE(convex_sequence({1, 2, 3, 4}, {1, 4, 9, 16}));
    EXPECT_FALSE(convex_sequence({1, 2, 3, 4}, {1, 2, 3, 4}));
    EXPECT_FALSE(convex_sequence({1, 2, 3}, {1, 3, 4}));
    EXPECT_TRUE(convex_sequence({3, 1, 2}, {9, 1, 4}));
    EXPECT_FALSE(convex_sequence({1, 2}, {1, 4}));
}

TEST(Ladders, Defaults) {
    const auto six = default_p_ladder(6);
    ASSERT_EQ(six.size(), 4u);
    EXPECT_NEAR(six[0], 1.8, 1e-12);
    EXPECT_NEAR(six[3], 4.2, 1e-12);
    EXPECT_EQ(default_p_ladder(3), (std::vector<double>{1.5, 2, 3, 5}));
}

TEST(Sweeps, PhaseDiagramThreeDimensionsAllBlowUp) {
    const fs::path dir = fresh_dir("phase3");
    RecordStore store(dir);
    SweepOptions opt;
    opt.store = &store;
    opt.jobs = 2;
    const SweepResult r = phase_diagram(3, BoundaryCondition::Navier, default_p_ladder(3), opt);
    ASSERT_EQ(r.points.size(), 4u);
    EXPECT_EQ(count(r, Classification::BlowUp), 4);
    EXPECT_FALSE(r.spot_checks.empty());
    for (const auto& sc : r.spot_checks) EXPECT_TRUE(sc.agree);

    // Rerun resumes every arm from the store.
    const SweepResult again = phase_diagram(3, BoundaryCondition::Navier, default_p_ladder(3), opt);
    for (const auto& pt : again.points) EXPECT_FALSE(pt.computed);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        EXPECT_EQ(again.points[i].classification, r.points[i].classification);
        EXPECT_EQ(again.points[i].run_id, r.points[i].run_id);
    }
}

TEST(Sweeps, SecondCriticalStraddle) {
    SweepOptions opt;
    const SweepResult r = second_critical_sweep(6, 4, {4, 5.5}, opt);
    ASSERT_EQ(r.points.size(), 2u);
    EXPECT_EQ(r.points[0].classification, Classification::BlowUp);
    EXPECT_EQ(r.points[1].classification, Classification::BoundedUnderEnvelope);
    EXPECT_THROW(second_critical_sweep(4, 4, {4}, opt), DomainError);
    EXPECT_THROW(second_critical_sweep(6, 2, {4}, opt), DomainError);
}

TEST(Sweeps, FujitaLabelsConjecturalRows) {
    SweepOptions opt;
    opt.spot_fraction = 0;
    const SweepResult r = fujita_study(4, BoundaryCondition::Navier, {1.5, 2.0, 2.8}, opt);
    ASSERT_EQ(r.points.size(), 3u);
    EXPECT_EQ(r.points[0].classification, Classification::BlowUp);
    EXPECT_EQ(r.points[1].classification, Classification::BlowUp);
    EXPECT_LT(r.points[0].T_est, r.points[1].T_est);
    EXPECT_FALSE(r.points[1].conjectural);
    EXPECT_TRUE(r.points[2].conjectural);
    EXPECT_NE(r.points[2].note.find("conjectured"), std::string::npos);
    for (const auto& pt : r.points) EXPECT_NE(to_string(pt.classification), "global");
}

TEST(Sweeps, LifespanSlopeAndPreconditions) {
    SweepOptions opt;
    const LifespanStudy s = lifespan_study(3, 1.5, {0.1, 0.0562, 0.0316, 0.0178, 0.01, 0.00562, 0.00316, 0.00178, 0.001}, opt);
    ASSERT_TRUE(s.fitted) << s.note;
    EXPECT_NEAR(s.predicted_slope, -0.8, 1e-12);
    EXPECT_NEAR(s.fit.slope, -0.8, 0.3);
    EXPECT_TRUE(s.below_ikeda);
    for (const auto& a : s.rows)
        for (const auto& b : s.rows)
            if (a.epsilon < b.epsilon) EXPECT_GE(a.T_est, b.T_est);
    EXPECT_THROW(lifespan_study(3, 1.5, {0.1}, opt), DomainError);
    EXPECT_THROW(lifespan_study(3, 1.5, {0.1, 0.05}, opt), DomainError);
    EXPECT_THROW(lifespan_study(3, 3, {0.1, 0.001}, opt), DomainError);
}

TEST(Csv, PhaseColumns) {
    PhasePoint pt;
    pt.classification = Classification::BlowUp;
    pt.T_est = 4.25;
    const std::string csv = phase_csv({pt});
    EXPECT_EQ(csv.substr(0, csv.find('\n')).find("classification") != std::string::npos, true);
    EXPECT_NE(csv.find("blowup"), std::string::npos);
}

TEST(Sweeps, CriticalLifespanConvexOnShortLadder) {
    SweepOptions opt;
    const LifespanStudy s = lifespan_study(4, 2, {1, 0.7, 0.5, 0.35}, opt);
    EXPECT_EQ(s.theta, 0.0);
    EXPECT_TRUE(std::isnan(s.predicted_slope));
    for (const auto& r : s.rows) EXPECT_TRUE(r.bracketed) << r.epsilon;
    EXPECT_TRUE(s.convex);
}
