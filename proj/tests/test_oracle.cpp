#include "test_support.hpp"

#include <trajcon/constrain.hpp>
#include <trajcon/instances.hpp>
#include <trajcon/oracle.hpp>

#include <gtest/gtest.h>

using namespace trajcon;
using namespace trajcon::testing;

namespace {

OracleOptions options(std::size_t n, std::uint64_t seed) {
    OracleOptions o;
    o.n = n;
    o.seed = seed;
    o.engine = {20000, derive_seed(seed, 99), true};
    return o;
}

ConstraintSet half_line_at(Time t, double lo) {
    return ConstraintSet({{t, StateRegion(lower1(lo))}}, ConstraintMode::conjunct);
}

}  // namespace

TEST(OracleBernoulli, IdentityConstraintPasses) {
    const BernoulliTrajectory b{0.6, single_pair_density({0, 2}, iid_sequence({0, 2})), false};
    const auto report = oracle_bernoulli(b, ConstraintSet({{1, StateRegion::full_space(1)}}, ConstraintMode::conjunct),
                                         options(20000, 1));
    EXPECT_TRUE(report.passed()) << format_table(report);
    EXPECT_EQ(report.subject, "bernoulli");
    EXPECT_EQ(report.n, 20000u);
    EXPECT_GT(report.entries.size(), 0u);
    for (const auto& e : report.entries) {
        if (e.kind == "existence") {
            EXPECT_NEAR(e.analytic, 0.6, 1e-15);
        }
    }
}

TEST(OracleBernoulli, RandomInstancesPass) {
    Rng rng(2);
    for (int i = 0; i < 6; ++i) {
        const auto shape = random_shape(rng);
        const auto b = random_bernoulli(rng, shape);
        const auto mode = i % 2 == 0 ? ConstraintMode::conjunct : ConstraintMode::disjunct;
        const auto cs = random_constraint_set(rng, b.density, mode);
        const auto report = oracle_bernoulli(b, cs, options(20000, static_cast<std::uint64_t>(i)));
        EXPECT_TRUE(report.passed()) << format_table(report);
    }
}

TEST(OracleBernoulli, ZeroProbabilityRegionIsConsistentWithNoHits) {
    // Pr(X0 >= 9) is about 1e-19, far below 1/n: no survivors is a pass.
    const BernoulliTrajectory b{0.9, single_pair_density({0, 0}, iid_sequence({0, 0})), false};
    const auto report = oracle_bernoulli(b, half_line_at(0, 9.0), options(5000, 3));
    EXPECT_TRUE(report.passed()) << format_table(report);
    for (const auto& e : report.entries) {
        if (e.kind == "existence") {
            EXPECT_EQ(e.empirical, 0.0);
            EXPECT_EQ(e.z, 0.0);
        }
    }
}

TEST(OracleBernoulli, DetectsCorruptedExistence) {
    const BernoulliTrajectory b{0.6, single_pair_density({0, 1}, iid_sequence({0, 1})), false};
    const auto cs = half_line_at(1, 0.0);
    const auto o = options(20000, 4);
    auto constrained = constrain_bernoulli(b, cs, o.engine);
    EXPECT_TRUE(oracle_bernoulli(b, constrained, cs, o).passed());
    constrained.r *= 1.5;
    const auto report = oracle_bernoulli(b, constrained, cs, o);
    EXPECT_FALSE(report.passed());
    EXPECT_GE(report.failures("existence"), 1u);
}

TEST(OracleBernoulli, DetectsWrongPairWeights) {
    const auto td = uniform_iid_density(TimeWindow(0, 2));
    const BernoulliTrajectory b{1.0, td, false};
    const auto cs = ConstraintSet({{1, StateRegion::full_space(1)}}, ConstraintMode::conjunct);
    const auto o = options(20000, 5);
    auto constrained = constrain_bernoulli(b, cs, o.engine);
    // Move mass between two alive lifetimes; existence stays right.
    auto& entries = constrained.density.pmf.entries;
    for (auto& e : entries) {
        if (e.lifetime == Lifetime{0, 1}) e.probability += 0.1;
        if (e.lifetime == Lifetime{1, 2}) e.probability -= 0.1;
    }
    const auto report = oracle_bernoulli(b, constrained, cs, o);
    EXPECT_EQ(report.failures("existence"), 0u);
    EXPECT_GE(report.failures("pair"), 2u);
}

TEST(OracleBernoulli, DetectsShiftedMoments) {
    const BernoulliTrajectory b{1.0, single_pair_density({0, 1}, iid_sequence({0, 1})), false};
    const auto cs = half_line_at(0, 0.0);
    const auto o = options(20000, 6);
    auto constrained = constrain_bernoulli(b, cs, o.engine);
    constrained.density.conditionals[0].mean[1] += 0.5;
    const auto report = oracle_bernoulli(b, constrained, cs, o);
    EXPECT_GE(report.failures("mean"), 1u);
}

TEST(OracleBernoulli, RejectsSmallN) {
    const BernoulliTrajectory b{0.6, single_pair_density({0, 0}, iid_sequence({0, 0})), false};
    EXPECT_THROW(oracle_bernoulli(b, half_line_at(0, 0.0), options(999, 1)), std::invalid_argument);
}

TEST(OraclePpp, ScaledIntensity) {
    // Pr(X0 >= a) = 0.3, so mu^C = 3.
    const double a = 0.5244005127080407;
    const PppTrajectory p{10.0, single_pair_density({0, 0}, iid_sequence({0, 0})), false};
    const auto cs = half_line_at(0, a);
    const auto o = options(20000, 7);
    const auto constrained = constrain_ppp(p, cs, o.engine);
    EXPECT_NEAR(constrained.mu, 3.0, 1e-9);
    const auto report = oracle_ppp(p, constrained, cs, o);
    EXPECT_TRUE(report.passed()) << format_table(report);
    EXPECT_EQ(report.subject, "ppp");
    bool has_correlation = false;
    for (const auto& e : report.entries) has_correlation = has_correlation || e.kind == "correlation";
    EXPECT_TRUE(has_correlation);

    auto wrong = constrained;
    wrong.mu = 3.3;
    EXPECT_GE(oracle_ppp(p, wrong, cs, o).failures("intensity"), 1u);
}

TEST(OraclePmbm, RandomInstancesPassAndCorruptionFails) {
    Rng rng(8);
    for (int i = 0; i < 3; ++i) {
        const auto shape = random_shape(rng);
        const auto m = random_pmbm(rng, shape);
        const auto cs = random_constraint_set(rng, m.ppp.density, ConstraintMode::conjunct);
        const auto o = options(10000, static_cast<std::uint64_t>(10 + i));
        const auto constrained = constrain_pmbm(m, cs, o.engine);
        const auto report = oracle_pmbm(m, constrained, cs, o);
        EXPECT_TRUE(report.passed()) << format_table(report);
        EXPECT_EQ(report.subject, "pmbm");
    }
    PmbmDensity m;
    m.ppp = {2.0, single_pair_density({0, 0}, iid_sequence({0, 0})), false};
    m.hypotheses = {{0.5, {{0.9, single_pair_density({0, 0}, iid_sequence({0, 0})), false}}}, {0.5, {}}};
    const auto cs = half_line_at(0, 0.0);
    const auto o = options(20000, 20);
    auto constrained = constrain_pmbm(m, cs, o.engine);
    constrained.hypotheses[0].weight = 0.8;
    constrained.hypotheses[1].weight = 0.2;
    EXPECT_FALSE(oracle_pmbm(m, constrained, cs, o).passed());
}

TEST(OracleReport, CountsAndTable) {
    OracleReport r;
    r.subject = "x";
    r.entries = {{"a", "existence", 0.5, 0.5, 0.01, 0.0, true, true},
                 {"b", "pair", 0.1, 0.3, 0.01, 20.0, true, false},
                 {"c", "pair", 0.0, 0.0, 0.0, 0.0, false, true}};
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(r.failures(), 1u);
    EXPECT_EQ(r.failures("pair"), 1u);
    EXPECT_EQ(r.failures("existence"), 0u);
    const auto table = format_table(r);
    EXPECT_NE(table.find("FAIL"), std::string::npos);
    EXPECT_NE(table.find("b"), std::string::npos);
}

TEST(OracleBernoulli, DeterministicForSeed) {
    const BernoulliTrajectory b{0.7, single_pair_density({0, 1}, iid_sequence({0, 1})), false};
    const auto cs = half_line_at(1, -0.5);
    const auto a = oracle_bernoulli(b, cs, options(5000, 9));
    const auto c = oracle_bernoulli(b, cs, options(5000, 9));
    ASSERT_EQ(a.entries.size(), c.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].empirical, c.entries[i].empirical);
}
