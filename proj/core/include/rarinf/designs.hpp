#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rarinf/types.hpp"

namespace rarinf {

enum class Rule {
    RPW,  // randomized play-the-winner urn
    SDD,  // success-driven urn
    NAD,  // Neyman allocation with shrinkage plug-in
    OptSimpleDifference,
    OptOddsRatio,
    OptRelativeRisk,
};

std::string_view rule_name(Rule rule);
// Accepts the canonical names ("rpw", "sdd", "nad", "opt-sd", "opt-or",
// "opt-rr") case-insensitively. Throws Config on anything else.
Rule parse_rule(std::string_view name);

// Rules whose allocation probability maps q -> 1 - q when arm labels swap.
bool is_arm_symmetric(Rule rule);

// Balanced permuted block over the first `length` subjects.
struct PermutedBlockInit {
    int length = 0;

    int per_arm() const { return length / 2; }
    friend bool operator==(const PermutedBlockInit&, const PermutedBlockInit&) = default;
};

struct DesignSpec {
    Rule rule = Rule::RPW;
    // urn parameters; ignored by NAD and the Opt rules
    int alpha = 1;
    int beta = 1;
    int horizon = 2;
    std::optional<PermutedBlockInit> initializer;

    static DesignSpec rpw(int alpha, int beta, int horizon) { return {Rule::RPW, alpha, beta, horizon, {}}; }
    static DesignSpec sdd(int alpha, int beta, int horizon) { return {Rule::SDD, alpha, beta, horizon, {}}; }
    static DesignSpec of(Rule rule, int horizon) { return {rule, 1, 1, horizon, {}}; }

    DesignSpec with_block(int length) const {
        DesignSpec d = *this;
        d.initializer = PermutedBlockInit{length};
        return d;
    }
    DesignSpec with_horizon(int n) const {
        DesignSpec d = *this;
        d.horizon = n;
        return d;
    }

    // Throws InvalidArgument when the horizon, urn parameters or block length
    // are out of range.
    void validate() const;

    // Short label such as "RPW(1,1)" or "NAD+block(6)".
    std::string label() const;

    // True when the initializer covers every subject, so allocation never
    // depends on responses.
    bool response_independent() const { return initializer && initializer->length >= horizon; }

    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

// Shrinkage estimate (s + 1/2) / (n + 1) used by NAD and the Opt rules.
inline double shrunk_estimate(int successes, int assigned) {
    return (successes + 0.5) / (assigned + 1.0);
}

inline constexpr double kAllocationClamp = 1e-12;

// P{next subject goes to arm 1 | state} under the adaptive rule. Reads only
// the trial state; the success probabilities never enter.
double allocation_probability(const DesignSpec& design, const TrialState& state);

// Same, but honouring the block initializer: while state.i < m the exact
// marginal of a uniformly permuted balanced block is returned, i.e.
// (m/2 - n1) / (m - i).
double assignment_probability(const DesignSpec& design, const TrialState& state);

// Record one more subject. Throws HorizonExceeded when state.i == horizon.
TrialState advance(const TrialState& state, int horizon, Arm arm, bool success);

// Uniform random arrangement of m/2 arm-1 and m/2 arm-2 labels. `stream`
// selects an independent permutation for the same seed (e.g. a trial index).
std::vector<Arm> permuted_block_sequence(const PermutedBlockInit& init, std::uint64_t seed,
                                         std::uint64_t stream = 0);

// One trial drawn from the exact design law. `trial` indexes independent
// replicates under the same seed.
Outcome simulate_trial(const DesignSpec& design, const ProbPair& p, std::uint64_t seed,
                       std::uint64_t trial = 0);

}  // namespace rarinf
