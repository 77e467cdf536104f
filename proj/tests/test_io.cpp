#include "test_support.hpp"

#include <trajcon/constrain.hpp>
#include <trajcon/instances.hpp>
#include <trajcon/io.hpp>

#include <gtest/gtest.h>

using namespace trajcon;
using namespace trajcon::testing;

namespace {

constexpr double kTol = 1e-12;

/// Through text, as files would be.
Json reparse(const Json& j) { return Json::parse(j.dump(2)); }

void expect_close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    if (a.size() > 0) {
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), kTol);
    }
}

void expect_close(const TrajectoryDensity& a, const TrajectoryDensity& b) {
    ASSERT_EQ(a.pmf.size(), b.pmf.size());
    for (std::size_t j = 0; j < a.pmf.size(); ++j) {
        EXPECT_EQ(a.pmf.entries[j].lifetime, b.pmf.entries[j].lifetime);
        EXPECT_NEAR(a.pmf.entries[j].probability, b.pmf.entries[j].probability, kTol);
        EXPECT_EQ(a.conditionals[j].state_dim, b.conditionals[j].state_dim);
        expect_close(a.conditionals[j].mean, b.conditionals[j].mean);
        expect_close(a.conditionals[j].covariance, b.conditionals[j].covariance);
    }
    ASSERT_EQ(a.truncation.has_value(), b.truncation.has_value());
    if (!a.truncation) return;
    const auto& ta = *a.truncation;
    const auto& tb = *b.truncation;
    EXPECT_EQ(ta.degenerate, tb.degenerate);
    EXPECT_EQ(ta.constraints.mode(), tb.constraints.mode());
    ASSERT_EQ(ta.constraints.size(), tb.constraints.size());
    for (std::size_t i = 0; i < ta.constraints.size(); ++i) {
        EXPECT_EQ(ta.constraints[i].time, tb.constraints[i].time);
        EXPECT_EQ(ta.constraints[i].region, tb.constraints[i].region);
    }
    EXPECT_NEAR(ta.report.joint.value, tb.report.joint.value, kTol);
    EXPECT_NEAR(ta.report.joint.std_error, tb.report.joint.std_error, kTol);
    EXPECT_NEAR(ta.report.prob_alive.value, tb.report.prob_alive.value, kTol);
    EXPECT_NEAR(ta.report.prob_spatial.value, tb.report.prob_spatial.value, kTol);
    ASSERT_EQ(ta.pairs.size(), tb.pairs.size());
    for (std::size_t j = 0; j < ta.pairs.size(); ++j) {
        EXPECT_NEAR(ta.temporal_pmf[j], tb.temporal_pmf[j], kTol);
        EXPECT_EQ(ta.pairs[j].active.indices, tb.pairs[j].active.indices);
        EXPECT_EQ(ta.pairs[j].active.times, tb.pairs[j].active.times);
        EXPECT_NEAR(ta.pairs[j].acceptance.value, tb.pairs[j].acceptance.value, kTol);
        ASSERT_EQ(ta.pairs[j].partitions.size(), tb.pairs[j].partitions.size());
        for (std::size_t m = 0; m < ta.pairs[j].partitions.size(); ++m) {
            EXPECT_EQ(ta.pairs[j].partitions[m].inside_mask, tb.pairs[j].partitions[m].inside_mask);
            EXPECT_NEAR(ta.pairs[j].partitions[m].weight, tb.pairs[j].partitions[m].weight, kTol);
            EXPECT_NEAR(ta.pairs[j].partitions[m].raw_weight, tb.pairs[j].partitions[m].raw_weight, kTol);
        }
    }
}

void expect_close(const BernoulliTrajectory& a, const BernoulliTrajectory& b) {
    EXPECT_NEAR(a.r, b.r, kTol);
    EXPECT_EQ(a.degenerate, b.degenerate);
    expect_close(a.density, b.density);
}

template <typename F>
std::string pointer_of(F&& f) {
    try {
        f();
    } catch (const SchemaError& e) {
        return e.pointer();
    }
    return "<no error>";
}

}  // namespace

TEST(JsonRoundTrip, ConstraintSets) {
    const Box b({Interval{-1.5, std::nullopt}, Interval{std::nullopt, 2.25}});
    const StateRegion r({b, Box({Interval{0.1, 0.3}, Interval{-4.0, 4.0}})});
    for (auto mode : {ConstraintMode::conjunct, ConstraintMode::disjunct}) {
        const ConstraintSet cs({{4, r}, {1, StateRegion::full_space(2)}}, mode);
        const auto back = constraint_set_from_json(reparse(constraint_set_to_json(cs)));
        EXPECT_EQ(back.mode(), mode);
        ASSERT_EQ(back.size(), 2u);
        EXPECT_EQ(back[0].time, 1);
        EXPECT_EQ(back[1].region, r);
    }
    const auto single = constraint_set_from_json(
        Json::parse(R"({"mode": "single", "constraints": [{"time": 3, "region": [[[0, null]]]}]})"));
    EXPECT_EQ(single.mode(), ConstraintMode::conjunct);
    EXPECT_EQ(single[0].region, StateRegion(lower1(0.0)));
}

TEST(JsonRoundTrip, RandomDensitiesAndComponents) {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto shape = random_shape(rng);
        const auto b = random_bernoulli(rng, shape);
        expect_close(b, bernoulli_from_json(reparse(bernoulli_to_json(b))));
        const auto p = random_ppp(rng, shape);
        const auto pb = ppp_from_json(reparse(ppp_to_json(p)));
        EXPECT_NEAR(pb.mu, p.mu, kTol);
        expect_close(p.density, pb.density);
    }
}

TEST(JsonRoundTrip, ConstrainedDensityKeepsTruncation) {
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        const auto shape = random_shape(rng);
        const auto b = random_bernoulli(rng, shape);
        const auto mode = i % 2 == 0 ? ConstraintMode::conjunct : ConstraintMode::disjunct;
        const auto cs = random_constraint_set(rng, b.density, mode);
        const auto c = constrain_bernoulli(b, cs, {2000, 3, true});
        const auto back = bernoulli_from_json(reparse(bernoulli_to_json(c)));
        expect_close(c, back);
        // The decoded density samples identically.
        if (!c.degenerate) {
            EXPECT_EQ(sample_bernoulli(c, 5), sample_bernoulli(back, 5));
        }
    }
}

TEST(JsonRoundTrip, Pmbm) {
    Rng rng(3);
    const auto m = random_pmbm(rng, random_shape(rng));
    const auto j = reparse(pmbm_to_json(m));
    EXPECT_EQ(j.at("schema"), "trajcon.pmbm");
    EXPECT_EQ(j.at("version"), kSchemaVersion);
    const auto back = pmbm_from_json(j);
    EXPECT_NEAR(back.ppp.mu, m.ppp.mu, kTol);
    ASSERT_EQ(back.hypotheses.size(), m.hypotheses.size());
    for (std::size_t a = 0; a < m.hypotheses.size(); ++a) {
        EXPECT_NEAR(back.hypotheses[a].weight, m.hypotheses[a].weight, kTol);
        ASSERT_EQ(back.hypotheses[a].tracks.size(), m.hypotheses[a].tracks.size());
        for (std::size_t i = 0; i < m.hypotheses[a].tracks.size(); ++i) {
            expect_close(m.hypotheses[a].tracks[i], back.hypotheses[a].tracks[i]);
        }
    }
}

TEST(JsonRoundTrip, ScenarioAndModels) {
    MotionModel mm;
    mm.transition = (Eigen::Matrix2d() << 1.0, 1.0, 0.0, 1.0).finished();
    mm.process_noise = (Eigen::Matrix2d() << 0.3, 0.1, 0.1, 0.2).finished();
    mm.survival = 0.97;
    mm.birth_rate = 0.1;
    mm.birth_mean = Eigen::Vector2d(0.1, 1.0 / 3.0);
    mm.birth_covariance = Eigen::Matrix2d::Identity();
    mm.scheduled_births = {{2, Eigen::Vector2d(1.0, 2.0)}, {5, std::nullopt}};
    SensorModel sm;
    sm.measurement = (Eigen::MatrixXd(1, 2) << 1.0, 0.0).finished();
    sm.noise = Eigen::MatrixXd::Constant(1, 1, 0.7);
    sm.detection = 0.85;
    sm.clutter_rate = 1.5;
    sm.clutter_region = box1(-20.0, 20.0);

    const auto mb = motion_from_json(reparse(motion_to_json(mm)));
    expect_close(mb.transition, mm.transition);
    expect_close(mb.process_noise, mm.process_noise);
    EXPECT_NEAR(mb.survival, mm.survival, kTol);
    EXPECT_NEAR(mb.birth_rate, mm.birth_rate, kTol);
    expect_close(mb.birth_mean, mm.birth_mean);
    ASSERT_EQ(mb.scheduled_births.size(), 2u);
    EXPECT_EQ(mb.scheduled_births[0].time, 2);
    EXPECT_TRUE(mb.scheduled_births[0].state.has_value());
    EXPECT_FALSE(mb.scheduled_births[1].state.has_value());

    const auto sb = sensor_from_json(reparse(sensor_to_json(sm)));
    expect_close(sb.noise, sm.noise);
    EXPECT_NEAR(sb.clutter_rate, sm.clutter_rate, kTol);
    EXPECT_EQ(sb.clutter_region, sm.clutter_region);

    const auto sc = simulate_scenario(mm, sm, TimeWindow(0, 20), 4);
    const auto back = scenario_from_json(reparse(scenario_to_json(sc)));
    EXPECT_EQ(back.window, sc.window);
    ASSERT_EQ(back.truth.size(), sc.truth.size());
    for (std::size_t i = 0; i < sc.truth.size(); ++i) {
        EXPECT_EQ(back.truth[i].lifetime(), sc.truth[i].lifetime());
        expect_close(back.truth[i].states(), sc.truth[i].states());
    }
    ASSERT_EQ(back.scans.size(), sc.scans.size());
    for (std::size_t k = 0; k < sc.scans.size(); ++k) {
        ASSERT_EQ(back.scans[k].measurements.size(), sc.scans[k].measurements.size());
        for (std::size_t i = 0; i < sc.scans[k].measurements.size(); ++i) {
            expect_close(back.scans[k].measurements[i].z, sc.scans[k].measurements[i].z);
            EXPECT_EQ(back.scans[k].measurements[i].truth_index, sc.scans[k].measurements[i].truth_index);
        }
    }
}

TEST(JsonRoundTrip, DoublesSurviveText) {
    Eigen::MatrixXd m(2, 2);
    m << 0.1, 1.0 / 3.0, -2.0e-300, 1.0e300;
    const auto back = matrix_from_json(reparse(matrix_to_json(m)));
    EXPECT_EQ(back, m);
}

TEST(JsonErrors, PointersNameTheOffendingValue) {
    const auto td = uniform_iid_density(TimeWindow(0, 1));
    auto j = bernoulli_to_json({0.5, td, false});

    auto bad = j;
    bad["r"] = 1.5;
    EXPECT_EQ(pointer_of([&] { bernoulli_from_json(bad); }), "/r");

    bad = j;
    bad["density"]["pmf"][1]["probability"] = "x";
    EXPECT_EQ(pointer_of([&] { bernoulli_from_json(bad); }), "/density/pmf/1/probability");

    bad = j;
    bad["density"]["conditionals"][1]["covariance"][1] = Json::array({1.0});  // lifetime (0,1) needs 2x2
    EXPECT_EQ(pointer_of([&] { bernoulli_from_json(bad); }), "/density/conditionals/1/covariance/1");

    bad = j;
    bad["density"].erase("pmf");
    EXPECT_EQ(pointer_of([&] { bernoulli_from_json(bad); }), "/density/pmf");

    const auto cs = Json::parse(R"({"mode": "either", "constraints": []})");
    EXPECT_EQ(pointer_of([&] { constraint_set_from_json(cs); }), "/mode");

    const auto iv = Json::parse(R"({"constraints": [{"time": 1, "region": [[[2, 1]]]}]})");
    EXPECT_EQ(pointer_of([&] { constraint_set_from_json(iv); }), "/constraints/0/region/0/0");

    auto pm = pmbm_to_json({{1.0, td, false}, {{1.0, {}}}});
    pm["version"] = 99;
    EXPECT_EQ(pointer_of([&] { pmbm_from_json(pm); }), "/version");
}

TEST(JsonErrors, InvalidDensitiesAreRejected) {
    const auto td = uniform_iid_density(TimeWindow(0, 1));
    auto j = density_to_json(td);
    j["pmf"][0]["probability"] = 0.9;  // no longer sums to one
    EXPECT_THROW(density_from_json(j), SchemaError);
    j = density_to_json(td);
    j["conditionals"][0]["mean"] = Json::array({0.0, 0.0});
    EXPECT_THROW(density_from_json(j), SchemaError);
}

TEST(JsonReports, OracleAndConstraintReports) {
    ConstraintReport r{{0.5, 0.0}, {0.25, 0.01}, {0.125, 0.005}};
    const auto j = report_to_json(r);
    EXPECT_NEAR(j.at("joint").at("value").get<double>(), 0.125, kTol);
    OracleReport o;
    o.subject = "bernoulli";
    o.n = 1000;
    o.entries = {{"existence", "existence", 0.5, 0.49, 0.01, -1.0, true, true}};
    const auto oj = oracle_report_to_json(o);
    EXPECT_EQ(oj.at("passed"), true);
    EXPECT_EQ(oj.at("entries").size(), 1u);
}
