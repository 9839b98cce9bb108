#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rarinf/designs.hpp"
#include "rarinf/types.hpp"

namespace rarinf {

// Outcomes with mass below this are dropped from JointDist::support().
inline constexpr double kPruneThreshold = 1e-300;

// Dense layout of all outcomes (s1, s2, n1) at horizon n: one
// (n1 + 1) x (n - n1 + 1) block per n1, row-major in s1. O(n^3) entries.
class OutcomeGrid {
   public:
    explicit OutcomeGrid(int n);

    int horizon() const { return n_; }
    std::size_t size() const { return offset_.back(); }

    std::size_t index(int s1, int s2, int n1) const {
        return offset_[static_cast<std::size_t>(n1)] +
               static_cast<std::size_t>(s1) * static_cast<std::size_t>(n_ - n1 + 1) +
               static_cast<std::size_t>(s2);
    }
    std::size_t index(const Outcome& o) const { return index(o.s1, o.s2, o.n1); }
    std::size_t block_begin(int n1) const { return offset_[static_cast<std::size_t>(n1)]; }
    std::size_t block_size(int n1) const {
        return static_cast<std::size_t>(n1 + 1) * static_cast<std::size_t>(n_ - n1 + 1);
    }

    // Calls f(outcome, index) in index order.
    template <class F>
    void for_each(F&& f) const {
        std::size_t idx = 0;
        for (int n1 = 0; n1 <= n_; ++n1)
            for (int s1 = 0; s1 <= n1; ++s1)
                for (int s2 = 0; s2 <= n_ - n1; ++s2) f(Outcome{s1, s2, n1, n_}, idx++);
    }

   private:
    int n_;
    std::vector<std::size_t> offset_;
};

// Exact law of X(n) = (S1, S2, N1) for a design at success probabilities p.
class JointDist {
   public:
    JointDist(DesignSpec design, ProbPair p, std::vector<double> dense);

    int horizon() const { return grid_.horizon(); }
    const DesignSpec& design() const { return design_; }
    const ProbPair& p() const { return p_; }
    const OutcomeGrid& grid() const { return grid_; }
    std::span<const double> dense() const { return mass_; }

    double mass(int s1, int s2, int n1) const { return mass_[grid_.index(s1, s2, n1)]; }
    double mass(const Outcome& o) const;  // zero for outcomes outside the grid

    // Outcomes with positive mass, in grid order.
    std::vector<std::pair<Outcome, double>> support() const;
    // Compensated sum of all masses.
    double total() const;

   private:
    DesignSpec design_;
    ProbPair p_;
    OutcomeGrid grid_;
    std::vector<double> mass_;
};

// Forward dynamic program over trial states: unit mass at the empty state is
// split at every subject over (arm, response). O(n^4) work.
JointDist joint_distribution(const DesignSpec& design, const ProbPair& p);

// Law of N1(n), indexed by n1 = 0..n.
std::vector<double> marginal_n1(const JointDist& d);

// Law of (S1, S2) given N1 = n1.
struct CondDist {
    int n = 0;
    int n1 = 0;
    // (n1 + 1) x (n2 + 1), row-major in s1
    std::vector<double> mass;

    int n2() const { return n - n1; }
    double at(int s1, int s2) const {
        return mass[static_cast<std::size_t>(s1) * static_cast<std::size_t>(n2() + 1) +
                    static_cast<std::size_t>(s2)];
    }
    double total() const;
    // Marginal law of S_k, indexed by s = 0..n_k.
    std::vector<double> marginal(Arm arm) const;
    // Restricted to 0 < s_k < n_k on both arms and renormalized. Throws
    // AllMassDegenerate when nothing is left.
    CondDist interior_only() const;
};

// Throws ZeroProbabilityCondition when P(N1 = n1) = 0.
CondDist conditional_distribution(const JointDist& d, int n1);

// Mean and covariance of the UMLE (s1/n1, s2/n2) under a conditional law.
struct CondMoments {
    Vec2 mean = Vec2::Zero();
    InfoMatrix cov = InfoMatrix::Zero();
};

// Throws DegenerateArm when n1 is 0 or n.
CondMoments conditional_moments(const CondDist& c);

// Smallest s whose marginal conditional CDF of S_k reaches z.
int conditional_s_quantile(const CondDist& c, Arm arm, double z);

// The p-free part of the design law. Every supported rule allocates from
// (s1, s2, n1) alone, so
//   P_p(s1, s2, n1) = W(s1, s2, n1) * p1^s1 (1-p1)^(n1-s1) * p2^s2 (1-p2)^(n2-s2)
// where W sums the allocation-probability products over all paths reaching
// the outcome. W is computed once per design; the law at any p is then a
// reweighting. Sum of W over the grid is 2^n.
class DesignLaw {
   public:
    explicit DesignLaw(DesignSpec design);

    const DesignSpec& design() const { return design_; }
    int horizon() const { return grid_.horizon(); }
    const OutcomeGrid& grid() const { return grid_; }

    double weight(int s1, int s2, int n1) const { return weight_[grid_.index(s1, s2, n1)]; }
    // Whether any path reaches N1 = n1 (p-free, since every p is interior).
    bool reachable(int n1) const { return reachable_[static_cast<std::size_t>(n1)]; }

    JointDist joint(const ProbPair& p) const;
    std::vector<double> marginal_n1(const ProbPair& p) const;
    // Throws ZeroProbabilityCondition when n1 is unreachable.
    CondDist conditional(const ProbPair& p, int n1) const;
    // Direct log-domain evaluation of conditional_moments(conditional(p, n1)).
    // Throws ZeroProbabilityCondition / DegenerateArm.
    CondMoments conditional_moments(const ProbPair& p, int n1) const;
    // E[S_k / n_k | N1 = n1, S_other = s_other] with arm k at success
    // probability pk. The other arm's probability cancels on this slice.
    double slice_mean(Arm arm, double pk, int n1, int s_other) const;

   private:
    // log of p1^s1 q1^(n1-s1) p2^s2 q2^(n2-s2) + log W over block n1, and its max
    double fill_log_mass(const ProbPair& p, int n1, std::vector<double>& out) const;

    DesignSpec design_;
    OutcomeGrid grid_;
    std::vector<double> weight_;
    std::vector<double> log_weight_;
    std::vector<bool> reachable_;
};

}  // namespace rarinf
