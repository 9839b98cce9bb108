#include <gtest/gtest.h>

#include "rarinf/designs.hpp"
#include "rarinf/error.hpp"

using namespace rarinf;

TEST(Designs, UrnAllocation) {
    const auto rpw = DesignSpec::rpw(1, 1, 10);
    EXPECT_DOUBLE_EQ(allocation_probability(rpw, {}), 0.5);
    // success on arm 1: urn (2, 1)
    EXPECT_DOUBLE_EQ(allocation_probability(rpw, {1, 1, 0, 1}), 2.0 / 3.0);
    // failure on arm 1: urn (1, 2)
    EXPECT_DOUBLE_EQ(allocation_probability(rpw, {1, 0, 0, 1}), 1.0 / 3.0);
    // failure on arm 2 then success on arm 2: urn (2, 2)
    EXPECT_DOUBLE_EQ(allocation_probability(rpw, {2, 0, 1, 0}), 0.5);

    const auto sdd = DesignSpec::sdd(2, 3, 10);
    EXPECT_DOUBLE_EQ(allocation_probability(sdd, {}), 0.5);
    // failures leave the urn alone
    EXPECT_DOUBLE_EQ(allocation_probability(sdd, {3, 0, 0, 2}), 0.5);
    EXPECT_DOUBLE_EQ(allocation_probability(sdd, {2, 1, 1, 1}), 0.5);
    EXPECT_DOUBLE_EQ(allocation_probability(sdd, {2, 2, 0, 2}), 8.0 / 10.0);
}

TEST(Designs, NeymanAllocationUsesShrunkEstimates) {
    const auto nad = DesignSpec::of(Rule::NAD, 10);
    EXPECT_DOUBLE_EQ(allocation_probability(nad, {}), 0.5);
    const TrialState st{4, 2, 0, 2};
    const double a = 2.5 / 3, b = 0.5 / 3;
    const double sa = std::sqrt(a * (1 - a)), sb = std::sqrt(b * (1 - b));
    EXPECT_DOUBLE_EQ(allocation_probability(nad, st), sa / (sa + sb));
    EXPECT_DOUBLE_EQ(shrunk_estimate(0, 0), 0.5);
}

TEST(Designs, EveryRuleIsArmSymmetric) {
    for (Rule r : {Rule::RPW, Rule::SDD, Rule::NAD, Rule::OptSimpleDifference, Rule::OptOddsRatio,
                   Rule::OptRelativeRisk}) {
        ASSERT_TRUE(is_arm_symmetric(r));
        const auto d = DesignSpec::of(r, 12);
        for (int i = 0; i < 8; ++i)
            for (int n1 = 0; n1 <= i; ++n1)
                for (int s1 = 0; s1 <= n1; ++s1)
                    for (int s2 = 0; s2 <= i - n1; ++s2) {
                        const TrialState st{i, s1, s2, n1};
                        EXPECT_NEAR(allocation_probability(d, st), 1.0 - allocation_probability(d, st.swapped()), 1e-14)
                            << rule_name(r);
                    }
    }
}

TEST(Designs, BlockInitializerMarginal) {
    const auto d = DesignSpec::rpw(1, 1, 10).with_block(6);
    EXPECT_DOUBLE_EQ(assignment_probability(d, {}), 0.5);
    EXPECT_DOUBLE_EQ(assignment_probability(d, {2, 0, 0, 2}), 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(assignment_probability(d, {5, 0, 0, 3}), 0.0);
    EXPECT_DOUBLE_EQ(assignment_probability(d, {5, 0, 0, 2}), 1.0);
    // past the block the urn, fed by the block responses, takes over
    EXPECT_DOUBLE_EQ(assignment_probability(d, {6, 3, 0, 3}), allocation_probability(d, {6, 3, 0, 3}));
    EXPECT_TRUE(DesignSpec::rpw(1, 1, 6).with_block(6).response_independent());
}

TEST(Designs, AdvanceAndHorizonGuard) {
    TrialState st;
    st = advance(st, 2, Arm::one, true);
    st = advance(st, 2, Arm::two, false);
    EXPECT_EQ(st, (TrialState{2, 1, 0, 1}));
    try {
        advance(st, 2, Arm::one, true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::HorizonExceeded);
    }
}

TEST(Designs, ValidationAndNames) {
    EXPECT_THROW(DesignSpec::rpw(0, 1, 10).validate(), Error);
    EXPECT_THROW(DesignSpec::rpw(1, 1, 0).validate(), Error);
    EXPECT_THROW(DesignSpec::rpw(1, 1, 10).with_block(3).validate(), Error);
    EXPECT_THROW(DesignSpec::rpw(1, 1, 4).with_block(6).validate(), Error);
    EXPECT_NO_THROW(DesignSpec::of(Rule::NAD, 50).with_block(6).validate());
    EXPECT_EQ(parse_rule("SDD"), Rule::SDD);
    EXPECT_EQ(parse_rule("opt-or"), Rule::OptOddsRatio);
    EXPECT_EQ(parse_rule("neyman"), Rule::NAD);
    try {
        parse_rule("zzz");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    EXPECT_EQ(DesignSpec::rpw(1, 1, 29).with_block(6).label(), "RPW(1,1)+block(6)");
}
