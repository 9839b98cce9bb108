#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rarinf/designs.hpp"
#include "rarinf/exact_engine.hpp"
#include "rarinf/inference.hpp"
#include "rarinf/intervals.hpp"
#include "rarinf/types.hpp"

namespace rarinf {

// Joint law restricted to admissible outcomes (both arms observed, both UMLE
// coordinates interior) and renormalized.
struct AdmissibleDist {
    JointDist base;
    // dense over base.grid(); zero outside the admissible set
    std::vector<double> mass;
    double excluded_mass = 0.0;

    std::vector<std::pair<Outcome, double>> support() const;
};

// Throws AllMassDegenerate when nothing is admissible.
AdmissibleDist admissible(const JointDist& d);

// Outcomes over which bias and variance are averaged.
enum class MomentSet {
    // 0 < n1 < n; boundary UMLEs kept, CMLE taken from extended_cmle.
    ObservedArms,
    // admissible outcomes only
    Admissible,
};

enum class Estimator { UMLE, CMLE };

struct StudyOptions {
    // simultaneous level 1 - alpha; each arm gets 1 - alpha/2
    double alpha = 0.05;
    MomentSet moments = MomentSet::ObservedArms;
    ReplicatePolicy degenerate = ReplicatePolicy::Keep;
    // Clip Wald intervals to [0, 1] before measuring their length.
    bool truncate_wald_length = false;
    CiMode mode = ExactMode{};
    int min_conditional_replicates = 500;
    int threads = 1;

    CiSpec interval_spec(CiMethod method) const;
};

struct StudyRow {
    double p1 = 0.0;
    double p2 = 0.0;
    double tbias_cond = 0.0;
    double tbias_uncond = 0.0;
    double rel_var = 0.0;
    double rel_len_boot = 0.0;
    double rel_len_wald = 0.0;
    double cover_cond = 0.0;
    double cover_boot = 0.0;
    double cover_wald = 0.0;
    double excluded_mass = 0.0;
    // non-empty when the cell could not be computed
    std::string error;

    bool ok() const { return error.empty(); }
};

// One entry of the relative-efficiency distribution.
struct ReleffPoint {
    int n1 = 0;
    // P(N1 = n1), renormalized over 0 < n1 < n
    double probability = 0.0;
    // Tr(relative_efficiency) / 2
    double trace_half = 0.0;
};

// Per-design study state. Everything that depends only on the outcome (CMLE,
// the three intervals) is computed once; each grid point is then a weighted
// sum over outcomes.
class StudyEngine {
   public:
    explicit StudyEngine(DesignSpec design, StudyOptions opts = {});

    const DesignLaw& law() const { return *law_; }
    const StudyOptions& options() const { return opts_; }
    const CmleTable& cmle_table() const { return *table_; }

    double tbias(const ProbPair& p, Estimator e) const;
    double rel_var(const ProbPair& p) const;
    // (RelL_B, RelL_W)
    std::pair<double, double> rel_len(const ProbPair& p) const;
    // (C_cond, C_B, C_W)
    std::array<double, 3> coverage(const ProbPair& p) const;
    // Every column; failures land in StudyRow::error.
    StudyRow row(const ProbPair& p) const;

    // Intervals at an admissible outcome (as used by the table).
    const CiPair& interval(const Outcome& o, CiMethod m) const;

   private:
    struct Moments {
        Vec2 mean_hat, mean_tilde;
        double var_hat = 0.0;
        double mean_cond_var_tilde = 0.0;
    };
    struct IntervalSums {
        double len_cond = 0.0, len_boot = 0.0, len_wald = 0.0;
        double cover_cond = 0.0, cover_boot = 0.0, cover_wald = 0.0;
        double mass = 0.0;
    };
    Moments moments(const JointDist& jd) const;
    IntervalSums interval_sums(const JointDist& jd) const;
    void ensure_intervals() const;

    DesignSpec design_;
    StudyOptions opts_;
    std::unique_ptr<DesignLaw> law_;
    std::unique_ptr<CmleTable> table_;

    struct OutcomeIntervals {
        CiPair cond, boot, wald;
        std::string error;
    };
    mutable std::once_flag intervals_once_;
    mutable std::vector<OutcomeIntervals> intervals_;
};

double tbias(const DesignSpec& design, const ProbPair& p, Estimator e, const StudyOptions& opts = {});
double rel_var(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts = {});
std::pair<double, double> rel_len(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts = {});
std::array<double, 3> coverage(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts = {});

// The 15 points (p1, p2) of the 5x5 grid {0.1, 0.3, 0.5, 0.7, 0.9}^2 with
// p1 >= p2, in table order.
std::vector<ProbPair> paper_grid();

// One row per grid point, in grid order.
std::vector<StudyRow> study_table(const DesignSpec& design, const std::vector<ProbPair>& grid,
                                  const StudyOptions& opts = {});
std::vector<StudyRow> study_table(const StudyEngine& engine, const std::vector<ProbPair>& grid);

// Distribution of half the trace of Var[Z | N1] over 0 < n1 < n.
std::vector<ReleffPoint> releff_histogram(const DesignLaw& law, const ProbPair& p);
std::vector<ReleffPoint> releff_histogram(const DesignSpec& design, const ProbPair& p);

struct StratumReport {
    std::string name;
    Outcome outcome;
    ProbPair umle;
    ProbPair cmle;
    CiPair uncond;
    CiPair cond;
    // published values for comparison
    ProbPair published_umle;
    ProbPair published_cmle;
    std::array<Interval, 2> published_uncond;
    std::array<Interval, 2> published_cond;
};

struct CaseStudyReport {
    DesignSpec shortened_design;
    DesignSpec normal_design;
    std::vector<StratumReport> strata;
};

// The fluoxetine trial: per stratum a permuted block of `block_length`
// subjects followed by RPW(1,1); 95% simultaneous intervals in exact mode.
CaseStudyReport fluoxetine_case_study(int block_length = 6, const StudyOptions& opts = {});

}  // namespace rarinf
