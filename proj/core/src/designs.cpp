#include "rarinf/designs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "rarinf/error.hpp"
#include "rarinf/rng.hpp"

namespace rarinf {

ProbPair ProbPair::make(double p1, double p2) {
    ProbPair p{p1, p2};
    if (!p.interior()) {
        std::ostringstream os;
        os << "success probabilities must lie in (0,1), got (" << p1 << ", " << p2 << ")";
        fail(ErrorKind::InvalidArgument, os.str());
    }
    return p;
}

std::string_view rule_name(Rule rule) {
    switch (rule) {
        case Rule::RPW: return "rpw";
        case Rule::SDD: return "sdd";
        case Rule::NAD: return "nad";
        case Rule::OptSimpleDifference: return "opt-sd";
        case Rule::OptOddsRatio: return "opt-or";
        case Rule::OptRelativeRisk: return "opt-rr";
    }
    return "?";
}

Rule parse_rule(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Rule r : {Rule::RPW, Rule::SDD, Rule::NAD, Rule::OptSimpleDifference, Rule::OptOddsRatio,
                   Rule::OptRelativeRisk}) {
        if (lower == rule_name(r)) return r;
    }
    if (lower == "neyman") return Rule::NAD;
    if (lower == "sd" || lower == "simple-difference") return Rule::OptSimpleDifference;
    if (lower == "or" || lower == "odds-ratio") return Rule::OptOddsRatio;
    if (lower == "rr" || lower == "relative-risk") return Rule::OptRelativeRisk;
    fail(ErrorKind::Config, "unknown design rule '" + std::string(name) + "'");
}

bool is_arm_symmetric(Rule) {
    // R*(swap p) = 1 / R*(p) for all three Opt targets, so every rule qualifies.
    return true;
}

void DesignSpec::validate() const {
    if (horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be positive");
    if ((rule == Rule::RPW || rule == Rule::SDD) && (alpha < 1 || beta < 1)) {
        fail(ErrorKind::InvalidArgument, "urn parameters alpha and beta must be positive integers");
    }
    if (initializer) {
        const int m = initializer->length;
        if (m < 0 || m % 2 != 0) fail(ErrorKind::InvalidArgument, "block length must be even and non-negative");
        if (m > horizon) fail(ErrorKind::InvalidArgument, "block length exceeds the horizon");
    }
}

std::string DesignSpec::label() const {
    std::ostringstream os;
    switch (rule) {
        case Rule::RPW: os << "RPW(" << alpha << "," << beta << ")"; break;
        case Rule::SDD: os << "SDD(" << alpha << "," << beta << ")"; break;
        case Rule::NAD: os << "NAD"; break;
        case Rule::OptSimpleDifference: os << "OptSD"; break;
        case Rule::OptOddsRatio: os << "OptOR"; break;
        case Rule::OptRelativeRisk: os << "OptRR"; break;
    }
    if (initializer) os << "+block(" << initializer->length << ")";
    return os.str();
}

namespace {

double clamp_fraction(double r) { return std::clamp(r, kAllocationClamp, 1.0 - kAllocationClamp); }

// Target ratio R* = (share of arm 1) / (share of arm 2) at the estimates.
double optimal_ratio(Rule rule, double p1, double p2) {
    const double q1 = 1.0 - p1;
    const double q2 = 1.0 - p2;
    switch (rule) {
        case Rule::OptSimpleDifference: return std::sqrt(p1 / p2);
        case Rule::OptOddsRatio: return (q2 / q1) * std::sqrt(p2 / p1);
        case Rule::OptRelativeRisk: return (q2 / q1) * std::sqrt(p1 / p2);
        default: break;
    }
    return 1.0;
}

}  // namespace

double allocation_probability(const DesignSpec& d, const TrialState& st) {
    switch (d.rule) {
        case Rule::RPW: {
            // urn holds 2*alpha + i*beta balls after i responses
            const double type1 = d.alpha + d.beta * (st.s1 + st.n2() - st.s2);
            return type1 / (2.0 * d.alpha + d.beta * static_cast<double>(st.i));
        }
        case Rule::SDD: {
            const double type1 = d.alpha + d.beta * st.s1;
            return type1 / (2.0 * d.alpha + d.beta * static_cast<double>(st.s1 + st.s2));
        }
        case Rule::NAD: {
            const double p1 = shrunk_estimate(st.s1, st.n1);
            const double p2 = shrunk_estimate(st.s2, st.n2());
            const double sd1 = std::sqrt(p1 * (1.0 - p1));
            const double sd2 = std::sqrt(p2 * (1.0 - p2));
            return clamp_fraction(sd1 / (sd1 + sd2));
        }
        case Rule::OptSimpleDifference:
        case Rule::OptOddsRatio:
        case Rule::OptRelativeRisk: {
            const double r = optimal_ratio(d.rule, shrunk_estimate(st.s1, st.n1),
                                           shrunk_estimate(st.s2, st.n2()));
            return clamp_fraction(r / (1.0 + r));
        }
    }
    return 0.5;
}

double assignment_probability(const DesignSpec& d, const TrialState& st) {
    if (d.initializer && st.i < d.initializer->length) {
        const int m = d.initializer->length;
        return static_cast<double>(m / 2 - st.n1) / static_cast<double>(m - st.i);
    }
    return allocation_probability(d, st);
}

TrialState advance(const TrialState& st, int horizon, Arm arm, bool success) {
    if (st.i >= horizon) {
        fail(ErrorKind::HorizonExceeded,
             "cannot advance past the horizon (" + std::to_string(horizon) + " subjects)");
    }
    TrialState next = st;
    ++next.i;
    if (arm == Arm::one) {
        ++next.n1;
        if (success) ++next.s1;
    } else if (success) {
        ++next.s2;
    }
    return next;
}

std::vector<Arm> permuted_block_sequence(const PermutedBlockInit& init, std::uint64_t seed,
                                         std::uint64_t stream) {
    if (init.length < 0 || init.length % 2 != 0) {
        fail(ErrorKind::InvalidArgument, "block length must be even and non-negative");
    }
    std::vector<Arm> seq(static_cast<std::size_t>(init.length), Arm::two);
    std::fill(seq.begin(), seq.begin() + init.per_arm(), Arm::one);
    const CounterRng rng(seed);
    // Fisher-Yates, one counter slot per swap
    for (int j = init.length - 1; j > 0; --j) {
        const double u = rng.uniforms(stream, static_cast<std::uint32_t>(j), Stream::block)[0];
        const int k = std::min(j, static_cast<int>(u * (j + 1)));
        std::swap(seq[static_cast<std::size_t>(j)], seq[static_cast<std::size_t>(k)]);
    }
    return seq;
}

Outcome simulate_trial(const DesignSpec& d, const ProbPair& p, std::uint64_t seed, std::uint64_t trial) {
    const CounterRng rng(seed);
    std::vector<Arm> block;
    if (d.initializer) block = permuted_block_sequence(*d.initializer, seed, trial);

    TrialState st;
    for (int j = 0; j < d.horizon; ++j) {
        const auto u = rng.uniforms(trial, static_cast<std::uint32_t>(j));
        Arm arm;
        if (j < static_cast<int>(block.size())) {
            arm = block[static_cast<std::size_t>(j)];
        } else {
            arm = u[0] < allocation_probability(d, st) ? Arm::one : Arm::two;
        }
        const bool success = u[1] < p[arm];
        st = advance(st, d.horizon, arm, success);
    }
    return Outcome::from_state(st);
}

}  // namespace rarinf
