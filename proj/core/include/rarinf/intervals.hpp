#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "rarinf/designs.hpp"
#include "rarinf/exact_engine.hpp"
#include "rarinf/inference.hpp"
#include "rarinf/types.hpp"

namespace rarinf {

enum class CiMethod { Wald, UncondBootstrap, CondBootstrap };

std::string_view method_name(CiMethod m);  // "wald", "uncond", "cond"
// Also accepts "unconditional", "conditional", "uncond-bootstrap", ...
CiMethod parse_method(std::string_view name);

// Bootstrap from the exact law at p-hat: the B -> infinity limit.
struct ExactMode {};
// B simulated replicates; replicate b uses counter stream (seed, b).
struct MonteCarloMode {
    int replicates = 10000;
    std::uint64_t seed = 20240101;
};
using CiMode = std::variant<ExactMode, MonteCarloMode>;

// What happens to bootstrap replicates whose p-hat* is degenerate
// (p-hat_k* in {0, 1}, or N_k* = 0).
enum class ReplicatePolicy {
    // Kept. An empty arm counts as p-hat_k* = 0; a conditional quantile at
    // s_k in {0, n_k} maps to the endpoint 0 or 1.
    Keep,
    // Dropped, and quantiles taken over the remaining replicates.
    Exclude,
};

struct CiSpec {
    // Per-arm confidence level. Simultaneous 1 - a over both arms needs
    // level = 1 - a/2.
    double level = 0.975;
    CiMethod method = CiMethod::CondBootstrap;
    CiMode mode = ExactMode{};
    // Monte Carlo conditional bootstrap fails below this many retained replicates.
    int min_conditional_replicates = 500;
    ReplicatePolicy degenerate = ReplicatePolicy::Keep;
    // Wald only: clip the endpoints to [0, 1].
    bool truncate = true;
    // Monte Carlo simulation workers.
    int threads = 1;

    // Throws InvalidArgument.
    void validate() const;
    double lower_z() const { return 0.5 * (1.0 - level); }
    double upper_z() const { return 1.0 - lower_z(); }
};

struct Interval {
    double lower = 0.0;
    double upper = 1.0;

    double length() const { return upper - lower; }
    bool contains(double p) const { return lower <= p && p <= upper; }
};

struct CiPair {
    std::array<Interval, 2> arms;
    CiMethod method = CiMethod::Wald;
    // Retained conditional replicates (Monte Carlo conditional bootstrap only).
    std::optional<long> conditional_replicates;
    // Replicates (MC) or probability mass (exact) dropped under
    // ReplicatePolicy::Exclude, or replicates outside the conditioning event.
    double excluded = 0.0;

    const Interval& operator[](Arm a) const { return arms[static_cast<std::size_t>(index_of(a))]; }
    bool covers(const ProbPair& p) const { return arms[0].contains(p.p1) && arms[1].contains(p.p2); }
    double total_length() const { return arms[0].length() + arms[1].length(); }
};

// Standard normal quantile.
double normal_quantile(double u);

// p-hat_k -/+ z sqrt(p-hat_k (1 - p-hat_k) / n_k) with z the (1+level)/2
// normal quantile. Throws BoundaryEstimate / DegenerateArm.
CiPair wald_ci(const Outcome& o, double level, bool truncate = true);

// Percentile interval from the law of p-hat* when the design is rerun at
// p-hat. Throws TooFewAdmissible when the retained mass (or count) is
// negligible.
CiPair uncond_bootstrap_ci(const DesignLaw& law, const Outcome& o, const CiSpec& spec);
CiPair uncond_bootstrap_ci(const DesignSpec& design, const Outcome& o, const CiSpec& spec);

// Conditional bootstrap: quantiles of S_k* among replicates with N1* = n1,
// mapped through the CMLE with the other arm held at its observed count.
// Throws InsufficientConditionalReplicates (Monte Carlo) and propagates CMLE
// failures at the endpoint outcomes. `table`, when given, supplies the CMLEs.
CiPair cond_bootstrap_ci(const DesignLaw& law, const Outcome& o, const CiSpec& spec,
                         const CmleTable* table = nullptr);
CiPair cond_bootstrap_ci(const DesignSpec& design, const Outcome& o, const CiSpec& spec);

// Dispatch on spec.method.
CiPair confidence_interval(const DesignLaw& law, const Outcome& o, const CiSpec& spec,
                           const CmleTable* table = nullptr);

}  // namespace rarinf
