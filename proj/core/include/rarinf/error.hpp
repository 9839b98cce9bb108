#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rarinf {

enum class ErrorKind {
    InvalidArgument,
    HorizonExceeded,
    // conditioning on an event with zero probability under the design
    ZeroProbabilityCondition,
    // an arm received no subjects (n_k = 0)
    DegenerateArm,
    // an estimate sits on {0, 1}; such outcomes are excluded from analysis
    BoundaryEstimate,
    AllMassDegenerate,
    NoInteriorSolution,
    TooFewAdmissible,
    InsufficientConditionalReplicates,
    Config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

   private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace rarinf
