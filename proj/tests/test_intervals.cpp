#include <gtest/gtest.h>

#include <cmath>

#include "rarinf/error.hpp"
#include "rarinf/intervals.hpp"

using namespace rarinf;

TEST(Wald, DirectFormula) {
    const Outcome o{6, 9, 10, 25};
    const double z = normal_quantile(0.9875);
    EXPECT_NEAR(z, 2.241402727604947, 1e-12);
    const CiPair ci = wald_ci(o, 0.975);
    const double h1 = z * std::sqrt(0.6 * 0.4 / 10), h2 = z * std::sqrt(0.6 * 0.4 / 15);
    EXPECT_DOUBLE_EQ(ci.arms[0].lower, 0.6 - h1);
    EXPECT_DOUBLE_EQ(ci.arms[0].upper, 0.6 + h1);
    EXPECT_DOUBLE_EQ(ci.arms[1].lower, 0.6 - h2);
    EXPECT_DOUBLE_EQ(ci.arms[1].upper, 0.6 + h2);
    EXPECT_EQ(ci.method, CiMethod::Wald);
}

TEST(Wald, TruncationAndValidation) {
    const Outcome o{1, 9, 10, 20};
    const CiPair t = wald_ci(o, 0.975);
    const CiPair u = wald_ci(o, 0.975, false);
    EXPECT_EQ(t.arms[0].lower, 0.0);
    EXPECT_LT(u.arms[0].lower, 0.0);
    EXPECT_EQ(t.arms[1].upper, 1.0);
    EXPECT_THROW(wald_ci(o, 1.5), Error);
    EXPECT_THROW(wald_ci({0, 3, 5, 10}, 0.95), Error);
}

TEST(CiSpec, Validation) {
    CiSpec s;
    s.level = 1.5;
    EXPECT_THROW(s.validate(), Error);
    s.level = 0.95;
    s.mode = MonteCarloMode{10, 1};
    EXPECT_THROW(s.validate(), Error);
    EXPECT_EQ(parse_method("conditional"), CiMethod::CondBootstrap);
    EXPECT_EQ(parse_method("wald"), CiMethod::Wald);
    EXPECT_THROW(parse_method("bca"), Error);
}

TEST(UncondBootstrap, ExactAgreesWithMonteCarlo) {
    const DesignLaw law(DesignSpec::rpw(1, 1, 25));
    const Outcome o{7, 6, 12, 25};
    CiSpec exact;
    exact.method = CiMethod::UncondBootstrap;
    CiSpec mc = exact;
    mc.mode = MonteCarloMode{40000, 11};
    mc.threads = 2;
    const CiPair a = uncond_bootstrap_ci(law, o, exact);
    const CiPair b = uncond_bootstrap_ci(law, o, mc);
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(a.arms[k].lower, b.arms[k].lower, 0.03);
        EXPECT_NEAR(a.arms[k].upper, b.arms[k].upper, 0.03);
    }
    // p-hat* is a ratio of counts, so endpoints are lattice points
    const double l = a.arms[0].lower;
    bool lattice = false;
    for (int m = 1; m <= 25; ++m) lattice = lattice || std::abs(l * m - std::round(l * m)) < 1e-12;
    EXPECT_TRUE(lattice);
}

TEST(CondBootstrap, ExactAgreesWithMonteCarlo) {
    const DesignLaw law(DesignSpec::rpw(1, 1, 25));
    const Outcome o{8, 7, 13, 25};
    CiSpec exact;
    CiSpec mc = exact;
    mc.mode = MonteCarloMode{100000, 5};
    mc.threads = 2;
    const CiPair a = cond_bootstrap_ci(law, o, exact);
    const CiPair b = cond_bootstrap_ci(law, o, mc);
    ASSERT_TRUE(b.conditional_replicates.has_value());
    EXPECT_GT(*b.conditional_replicates, 2000);
    EXPECT_FALSE(a.conditional_replicates.has_value());
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(a.arms[k].lower, b.arms[k].lower, 0.04);
        EXPECT_NEAR(a.arms[k].upper, b.arms[k].upper, 0.04);
    }
}

TEST(CondBootstrap, EndpointsAreCmlesOfQuantileOutcomes) {
    const DesignLaw law(DesignSpec::sdd(1, 1, 20));
    const Outcome o{5, 4, 9, 20};
    const CiSpec spec;
    const CiPair ci = cond_bootstrap_ci(law, o, spec);
    const CondDist c = law.conditional(umle(o), o.n1);
    const int lo = conditional_s_quantile(c, Arm::one, spec.lower_z());
    if (lo > 0 && lo < o.n1)
        EXPECT_NEAR(ci.arms[0].lower, extended_cmle(law, o.with_successes(Arm::one, lo)).p1, 1e-12);
    EXPECT_LT(ci.arms[0].lower, umle(o).p1);
    EXPECT_GT(ci.arms[0].upper, umle(o).p1);
}

TEST(MonteCarlo, ReproducibleAcrossThreadCounts) {
    const DesignLaw law(DesignSpec::sdd(1, 1, 20));
    const Outcome o{5, 4, 9, 20};
    CiSpec spec;
    spec.mode = MonteCarloMode{20000, 77};
    spec.threads = 1;
    const CiPair a = cond_bootstrap_ci(law, o, spec);
    spec.threads = 3;
    const CiPair b = cond_bootstrap_ci(law, o, spec);
    EXPECT_EQ(a.arms[0].lower, b.arms[0].lower);
    EXPECT_EQ(a.arms[1].upper, b.arms[1].upper);
    EXPECT_EQ(a.conditional_replicates, b.conditional_replicates);
}

TEST(MonteCarlo, TooFewConditionalReplicates) {
    const DesignLaw law(DesignSpec::rpw(1, 1, 25));
    CiSpec spec;
    spec.mode = MonteCarloMode{1000, 3};
    spec.min_conditional_replicates = 5000;
    try {
        cond_bootstrap_ci(law, {3, 4, 6, 25}, spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientConditionalReplicates);
    }
}

TEST(Dispatch, ConfidenceIntervalFollowsMethod) {
    const DesignLaw law(DesignSpec::rpw(1, 1, 15));
    const Outcome o{4, 5, 7, 15};
    CiSpec s;
    s.method = CiMethod::Wald;
    EXPECT_EQ(confidence_interval(law, o, s).method, CiMethod::Wald);
    s.method = CiMethod::UncondBootstrap;
    EXPECT_EQ(confidence_interval(law, o, s).method, CiMethod::UncondBootstrap);
    s.method = CiMethod::CondBootstrap;
    EXPECT_EQ(confidence_interval(law, o, s).method, CiMethod::CondBootstrap);
}
