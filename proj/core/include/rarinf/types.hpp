#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>

namespace rarinf {

enum class Arm : int { one = 1, two = 2 };

constexpr int index_of(Arm a) { return static_cast<int>(a) - 1; }
constexpr Arm other(Arm a) { return a == Arm::one ? Arm::two : Arm::one; }

// 2x2 symmetric matrices: Lambda_n, the information measures, relative
// efficiency. Per-trial units (not divided by n).
using InfoMatrix = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// Success probabilities (p1, p2). Also used for the UMLE and CMLE.
struct ProbPair {
    double p1 = 0.5;
    double p2 = 0.5;

    // Throws InvalidArgument unless both coordinates lie in (0, 1).
    static ProbPair make(double p1, double p2);

    double operator[](int k) const { return k == 0 ? p1 : p2; }
    double& operator[](int k) { return k == 0 ? p1 : p2; }
    double operator[](Arm a) const { return (*this)[index_of(a)]; }

    bool interior() const { return p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0; }
    Vec2 vec() const { return {p1, p2}; }
    ProbPair swapped() const { return {p2, p1}; }

    friend bool operator==(const ProbPair&, const ProbPair&) = default;
};

// Sufficient summary of the first i subjects. n2 = i - n1 is derived.
struct TrialState {
    int i = 0;
    int s1 = 0;
    int s2 = 0;
    int n1 = 0;

    int n2() const { return i - n1; }
    int successes(Arm a) const { return a == Arm::one ? s1 : s2; }
    int assigned(Arm a) const { return a == Arm::one ? n1 : n2(); }
    bool valid() const {
        return i >= 0 && n1 >= 0 && n1 <= i && s1 >= 0 && s1 <= n1 && s2 >= 0 && s2 <= n2();
    }
    TrialState swapped() const { return {i, s2, s1, n2()}; }

    friend bool operator==(const TrialState&, const TrialState&) = default;
};

// Terminal summary X(n) = (S1(n), S2(n), N1(n)) at horizon n.
struct Outcome {
    int s1 = 0;
    int s2 = 0;
    int n1 = 0;
    int n = 0;

    int n2() const { return n - n1; }
    int successes(Arm a) const { return a == Arm::one ? s1 : s2; }
    int assigned(Arm a) const { return a == Arm::one ? n1 : n2(); }
    bool valid() const {
        return n >= 0 && n1 >= 0 && n1 <= n && s1 >= 0 && s1 <= n1 && s2 >= 0 && s2 <= n2();
    }
    // Both arms observed and both UMLE coordinates strictly inside (0, 1).
    bool admissible() const {
        return n1 > 0 && n1 < n && s1 > 0 && s1 < n1 && s2 > 0 && s2 < n2();
    }
    Outcome swapped() const { return {s2, s1, n2(), n}; }
    Outcome with_successes(Arm a, int s) const {
        Outcome o = *this;
        (a == Arm::one ? o.s1 : o.s2) = s;
        return o;
    }
    static Outcome from_state(const TrialState& st) { return {st.s1, st.s2, st.n1, st.i}; }

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

}  // namespace rarinf
