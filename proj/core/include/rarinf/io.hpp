#pragma once

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rarinf/designs.hpp"
#include "rarinf/exact_engine.hpp"
#include "rarinf/inference.hpp"
#include "rarinf/intervals.hpp"
#include "rarinf/study.hpp"
#include "rarinf/types.hpp"

namespace rarinf {

using Json = nlohmann::ordered_json;

// Bumped whenever a JSON layout or CSV header changes.
inline constexpr int kSchemaVersion = 1;

// 17 significant digits: parses back to the identical double.
std::string format_number(double x);

Json to_json(const DesignSpec& d);
// Throws Config on missing or malformed fields.
DesignSpec design_from_json(const Json& j);

Json to_json(const ProbPair& p);
Json to_json(const Outcome& o);
Json to_json(const InfoMatrix& m);
Json to_json(const Interval& i);
Json to_json(const CiPair& c);
Json to_json(const CiSpec& s);
Json to_json(const CmleOptions& o);
// Estimate, iterations, residual, Jacobian, with design/outcome/tolerances.
Json cmle_report(const DesignSpec& d, const Outcome& o, const CmleResult& r, const CmleOptions& opts);
Json to_json(const StudyRow& r);
Json to_json(const CaseStudyReport& r);

// Header line "# {provenance json}", then s1,s2,n1,probability over the
// support in grid order.
void write_joint_csv(std::ostream& out, const JointDist& d);
JointDist read_joint_csv(std::istream& in);

// {"schema_version", "provenance": {design, p}, "outcomes": [[s1, s2, n1, probability], ...]}
Json joint_to_json(const JointDist& d);
JointDist joint_from_json(const Json& j);

// s1,s2,n1,n per simulated trial.
void write_outcomes_csv(std::ostream& out, const std::vector<Outcome>& trials);

struct StudyProvenance {
    DesignSpec design;
    std::string mode = "exact";
    std::uint64_t seed = 0;
};

// Table column order, then design, n, mode, seed, excluded_mass, error.
void write_study_csv(std::ostream& out, const StudyProvenance& prov, const std::vector<StudyRow>& rows);
// Published precision: biases and ratios to 2 decimals, coverages to 4.
void write_study_rounded(std::ostream& out, const std::vector<StudyRow>& rows);

void write_releff_csv(std::ostream& out, const std::vector<ReleffPoint>& points);

}  // namespace rarinf
