#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "rarinf/error.hpp"
#include "rarinf/io.hpp"

using namespace rarinf;

namespace {

void expect_identical(const JointDist& a, const JointDist& b) {
    EXPECT_EQ(a.design(), b.design());
    EXPECT_EQ(a.p(), b.p());
    ASSERT_EQ(a.dense().size(), b.dense().size());
    for (std::size_t i = 0; i < a.dense().size(); ++i) ASSERT_EQ(a.dense()[i], b.dense()[i]) << i;
}

}  // namespace

TEST(Io, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 0.9999999999999999, 123456.789}) {
        EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
    }
}

TEST(Io, JointCsvRoundTripIsBitExact) {
    const JointDist d = joint_distribution(DesignSpec::sdd(1, 2, 18).with_block(4), {0.137, 0.91});
    std::stringstream buf;
    write_joint_csv(buf, d);
    const JointDist back = read_joint_csv(buf);
    expect_identical(d, back);
}

TEST(Io, JointJsonRoundTripIsBitExact) {
    const JointDist d = joint_distribution(DesignSpec::of(Rule::OptOddsRatio, 15), {0.42, 0.3});
    const Json j = joint_to_json(d);
    EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
    EXPECT_TRUE(j.at("provenance").contains("design"));
    const JointDist back = joint_from_json(Json::parse(j.dump()));
    expect_identical(d, back);
}

TEST(Io, JointCsvLayout) {
    std::stringstream buf;
    write_joint_csv(buf, joint_distribution(DesignSpec::rpw(1, 1, 1), {0.5, 0.5}));
    std::string line;
    std::getline(buf, line);
    EXPECT_EQ(line.rfind("# {", 0), 0u);
    std::getline(buf, line);
    EXPECT_EQ(line, "s1,s2,n1,probability");
    int rows = 0;
    while (std::getline(buf, line)) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(Io, MalformedInputIsAConfigError) {
    std::stringstream bad("s1,s2,n1,probability\n0,0,0,1\n");
    try {
        read_joint_csv(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    EXPECT_THROW(design_from_json(Json{{"rule", "rpw"}}), Error);
    EXPECT_THROW(design_from_json(Json{{"rule", "xyz"}, {"n", 5}}), Error);
}

TEST(Io, DesignJsonRoundTrip) {
    const DesignSpec d = DesignSpec::rpw(2, 3, 29).with_block(6);
    EXPECT_EQ(design_from_json(to_json(d)), d);
    const DesignSpec e = DesignSpec::of(Rule::NAD, 50);
    EXPECT_EQ(design_from_json(to_json(e)), e);
}

TEST(Io, CmleReportCarriesProvenance) {
    const DesignLaw law(DesignSpec::rpw(1, 1, 12));
    const Outcome o{3, 4, 6, 12};
    const CmleOptions opts;
    const Json j = cmle_report(law.design(), o, cmle(law, o, opts), opts);
    for (const char* key : {"design", "outcome", "estimate", "iterations", "residual", "jacobian", "options"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j.at("options").at("tolerance"), 1e-10);
}

TEST(Io, StudyCsvHeaderAndRows) {
    StudyRow ok;
    ok.p1 = 0.5;
    ok.p2 = 0.3;
    ok.rel_var = 1.0 / 3.0;
    StudyRow bad;
    bad.p1 = bad.p2 = 0.1;
    bad.error = "AllMassDegenerate: nothing left";
    std::stringstream buf;
    write_study_csv(buf, {DesignSpec::sdd(1, 1, 25), "exact", 0}, {ok, bad});
    std::string header, r1, r2;
    std::getline(buf, header);
    std::getline(buf, r1);
    std::getline(buf, r2);
    EXPECT_EQ(header,
              "p1,p2,tbias_cmle,tbias_umle,rel_var,rel_len_boot,rel_len_wald,cover_cond,cover_boot,cover_wald,"
              "design,n,mode,seed,excluded_mass,error");
    EXPECT_NE(r1.find("0.33333333333333331"), std::string::npos);
    EXPECT_NE(r1.find("\"SDD(1,1)\",25,exact,0"), std::string::npos);
    EXPECT_NE(r2.find("AllMassDegenerate"), std::string::npos);

    std::stringstream rounded;
    write_study_rounded(rounded, {ok});
    std::getline(rounded, header);
    std::getline(rounded, r1);
    EXPECT_EQ(r1, "0.5,0.3,0.00,0.00,0.33,0.00,0.00,0.0000,0.0000,0.0000");
}

TEST(Io, ReleffCsv) {
    std::stringstream buf;
    write_releff_csv(buf, {{3, 0.25, 1.5}});
    EXPECT_EQ(buf.str(), "n1,probability,trace_half\n3,0.25,1.5\n");
}
