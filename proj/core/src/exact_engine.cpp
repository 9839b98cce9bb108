#include "rarinf/exact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rarinf/error.hpp"
#include "summation.hpp"

namespace rarinf {

OutcomeGrid::OutcomeGrid(int n) : n_(n), offset_(static_cast<std::size_t>(n) + 2, 0) {
    if (n < 0) fail(ErrorKind::InvalidArgument, "horizon must be non-negative");
    for (int n1 = 0; n1 <= n; ++n1) {
        offset_[static_cast<std::size_t>(n1) + 1] = offset_[static_cast<std::size_t>(n1)] + block_size(n1);
    }
}

JointDist::JointDist(DesignSpec design, ProbPair p, std::vector<double> dense)
    : design_(std::move(design)), p_(p), grid_(design_.horizon), mass_(std::move(dense)) {
    if (mass_.size() != grid_.size()) fail(ErrorKind::InvalidArgument, "mass table does not match the horizon");
}

double JointDist::mass(const Outcome& o) const {
    if (o.n != horizon() || !o.valid()) return 0.0;
    return mass_[grid_.index(o)];
}

std::vector<std::pair<Outcome, double>> JointDist::support() const {
    std::vector<std::pair<Outcome, double>> out;
    grid_.for_each([&](const Outcome& o, std::size_t idx) {
        if (mass_[idx] >= kPruneThreshold) out.emplace_back(o, mass_[idx]);
    });
    return out;
}

double JointDist::total() const { return detail::compensated_sum(mass_); }

namespace {

struct ResponseWeights {
    double succ1, fail1, succ2, fail2;
};

// Shared forward pass. With the Bernoulli weights of p it yields the joint
// law; with unit weights it yields the allocation weights W.
std::vector<double> forward_pass(const DesignSpec& design, const ResponseWeights& w) {
    design.validate();
    const int n = design.horizon;
    std::vector<double> cur{1.0};
    for (int i = 0; i < n; ++i) {
        const OutcomeGrid from(i);
        const OutcomeGrid to(i + 1);
        std::vector<double> next(to.size(), 0.0);
        for (int n1 = 0; n1 <= i; ++n1) {
            for (int s1 = 0; s1 <= n1; ++s1) {
                for (int s2 = 0; s2 <= i - n1; ++s2) {
                    const double m = cur[from.index(s1, s2, n1)];
                    if (m == 0.0) continue;
                    const double a = assignment_probability(design, TrialState{i, s1, s2, n1});
                    const double m1 = m * a;
                    const double m2 = m * (1.0 - a);
                    next[to.index(s1 + 1, s2, n1 + 1)] += m1 * w.succ1;
                    next[to.index(s1, s2, n1 + 1)] += m1 * w.fail1;
                    next[to.index(s1, s2 + 1, n1)] += m2 * w.succ2;
                    next[to.index(s1, s2, n1)] += m2 * w.fail2;
                }
            }
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace

JointDist joint_distribution(const DesignSpec& design, const ProbPair& p) {
    ProbPair::make(p.p1, p.p2);
    auto mass = forward_pass(design, {p.p1, 1.0 - p.p1, p.p2, 1.0 - p.p2});
    for (double& m : mass)
        if (m < kPruneThreshold) m = 0.0;
    return JointDist(design, p, std::move(mass));
}

std::vector<double> marginal_n1(const JointDist& d) {
    const int n = d.horizon();
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    const auto dense = d.dense();
    for (int n1 = 0; n1 <= n; ++n1) {
        const auto b = d.grid().block_begin(n1);
        out[static_cast<std::size_t>(n1)] = detail::compensated_sum(dense.subspan(b, d.grid().block_size(n1)));
    }
    return out;
}

double CondDist::total() const { return detail::compensated_sum(mass); }

std::vector<double> CondDist::marginal(Arm arm) const {
    std::vector<double> out(static_cast<std::size_t>(arm == Arm::one ? n1 : n2()) + 1, 0.0);
    for (int s1 = 0; s1 <= n1; ++s1)
        for (int s2 = 0; s2 <= n2(); ++s2)
            out[static_cast<std::size_t>(arm == Arm::one ? s1 : s2)] += at(s1, s2);
    return out;
}

CondDist CondDist::interior_only() const {
    CondDist out{n, n1, std::vector<double>(mass.size(), 0.0)};
    double kept = 0.0;
    for (int s1 = 1; s1 < n1; ++s1) {
        for (int s2 = 1; s2 < n2(); ++s2) {
            const auto idx = static_cast<std::size_t>(s1) * static_cast<std::size_t>(n2() + 1) +
                             static_cast<std::size_t>(s2);
            out.mass[idx] = mass[idx];
            kept += mass[idx];
        }
    }
    if (!(kept > 0.0)) {
        fail(ErrorKind::AllMassDegenerate,
             "no conditional mass with both UMLE coordinates interior at n1=" + std::to_string(n1));
    }
    for (double& m : out.mass) m /= kept;
    return out;
}

CondDist conditional_distribution(const JointDist& d, int n1) {
    const int n = d.horizon();
    if (n1 < 0 || n1 > n) fail(ErrorKind::InvalidArgument, "n1 outside 0..n");
    const auto b = d.grid().block_begin(n1);
    const auto sz = d.grid().block_size(n1);
    const auto block = d.dense().subspan(b, sz);
    const double pn = detail::compensated_sum(block);
    if (!(pn > 0.0)) {
        fail(ErrorKind::ZeroProbabilityCondition,
             "P(N1 = " + std::to_string(n1) + ") is zero for " + d.design().label());
    }
    CondDist c{n, n1, std::vector<double>(block.begin(), block.end())};
    for (double& m : c.mass) m /= pn;
    return c;
}

CondMoments conditional_moments(const CondDist& c) {
    if (c.n1 <= 0 || c.n1 >= c.n) {
        fail(ErrorKind::DegenerateArm, "conditional moments need both arms observed (0 < n1 < n)");
    }
    const double inv1 = 1.0 / c.n1;
    const double inv2 = 1.0 / c.n2();
    CondMoments m;
    for (int s1 = 0; s1 <= c.n1; ++s1) {
        for (int s2 = 0; s2 <= c.n2(); ++s2) {
            const double w = c.at(s1, s2);
            m.mean += w * Vec2(s1 * inv1, s2 * inv2);
        }
    }
    for (int s1 = 0; s1 <= c.n1; ++s1) {
        for (int s2 = 0; s2 <= c.n2(); ++s2) {
            const double w = c.at(s1, s2);
            const Vec2 dv = Vec2(s1 * inv1, s2 * inv2) - m.mean;
            m.cov += w * dv * dv.transpose();
        }
    }
    return m;
}

int conditional_s_quantile(const CondDist& c, Arm arm, double z) {
    if (!(z > 0.0 && z <= 1.0)) fail(ErrorKind::InvalidArgument, "quantile level must lie in (0, 1]");
    const auto marg = c.marginal(arm);
    const double target = z * (1.0 - 1e-12);
    double cdf = 0.0;
    int last = 0;
    for (std::size_t s = 0; s < marg.size(); ++s) {
        if (marg[s] <= 0.0) continue;
        cdf += marg[s];
        last = static_cast<int>(s);
        if (cdf >= target) return last;
    }
    return last;
}

DesignLaw::DesignLaw(DesignSpec design)
    : design_(std::move(design)),
      grid_(design_.horizon),
      weight_(forward_pass(design_, {1.0, 1.0, 1.0, 1.0})),
      log_weight_(weight_.size()),
      reachable_(static_cast<std::size_t>(design_.horizon) + 1, false) {
    for (std::size_t i = 0; i < weight_.size(); ++i) {
        log_weight_[i] = weight_[i] > 0.0 ? std::log(weight_[i]) : -std::numeric_limits<double>::infinity();
    }
    for (int n1 = 0; n1 <= horizon(); ++n1) {
        const auto b = grid_.block_begin(n1);
        reachable_[static_cast<std::size_t>(n1)] =
            std::any_of(weight_.begin() + static_cast<std::ptrdiff_t>(b),
                        weight_.begin() + static_cast<std::ptrdiff_t>(b + grid_.block_size(n1)),
                        [](double w) { return w > 0.0; });
    }
}

double DesignLaw::fill_log_mass(const ProbPair& p, int n1, std::vector<double>& out) const {
    const int n2 = horizon() - n1;
    const double lp1 = std::log(p.p1), lq1 = std::log1p(-p.p1);
    const double lp2 = std::log(p.p2), lq2 = std::log1p(-p.p2);
    out.resize(grid_.block_size(n1));
    const auto b = grid_.block_begin(n1);
    double mx = -std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (int s1 = 0; s1 <= n1; ++s1) {
        const double a = s1 * lp1 + (n1 - s1) * lq1;
        for (int s2 = 0; s2 <= n2; ++s2, ++idx) {
            const double v = log_weight_[b + idx] + a + s2 * lp2 + (n2 - s2) * lq2;
            out[idx] = v;
            mx = std::max(mx, v);
        }
    }
    return mx;
}

JointDist DesignLaw::joint(const ProbPair& p) const {
    ProbPair::make(p.p1, p.p2);
    std::vector<double> mass(grid_.size(), 0.0);
    std::vector<double> block;
    for (int n1 = 0; n1 <= horizon(); ++n1) {
        if (!reachable(n1)) continue;
        fill_log_mass(p, n1, block);
        const auto b = grid_.block_begin(n1);
        for (std::size_t k = 0; k < block.size(); ++k) {
            const double m = std::exp(block[k]);
            mass[b + k] = m < kPruneThreshold ? 0.0 : m;
        }
    }
    return JointDist(design_, p, std::move(mass));
}

std::vector<double> DesignLaw::marginal_n1(const ProbPair& p) const { return rarinf::marginal_n1(joint(p)); }

CondDist DesignLaw::conditional(const ProbPair& p, int n1) const {
    ProbPair::make(p.p1, p.p2);
    if (n1 < 0 || n1 > horizon()) fail(ErrorKind::InvalidArgument, "n1 outside 0..n");
    if (!reachable(n1)) {
        fail(ErrorKind::ZeroProbabilityCondition,
             "N1 = " + std::to_string(n1) + " is unreachable under " + design_.label());
    }
    CondDist c{horizon(), n1, {}};
    const double mx = fill_log_mass(p, n1, c.mass);
    for (double& v : c.mass) v = std::exp(v - mx);
    const double tot = detail::compensated_sum(c.mass);
    for (double& v : c.mass) v /= tot;
    return c;
}

CondMoments DesignLaw::conditional_moments(const ProbPair& p, int n1) const {
    if (n1 <= 0 || n1 >= horizon()) {
        fail(ErrorKind::DegenerateArm, "conditional moments need both arms observed (0 < n1 < n)");
    }
    return rarinf::conditional_moments(conditional(p, n1));
}

double DesignLaw::slice_mean(Arm arm, double pk, int n1, int s_other) const {
    const int nk = arm == Arm::one ? n1 : horizon() - n1;
    if (nk <= 0) fail(ErrorKind::DegenerateArm, "slice mean needs the arm to be observed");
    const double lp = std::log(pk), lq = std::log1p(-pk);
    std::vector<double> lw(static_cast<std::size_t>(nk) + 1);
    double mx = -std::numeric_limits<double>::infinity();
    for (int s = 0; s <= nk; ++s) {
        const double w = arm == Arm::one ? weight(s, s_other, n1) : weight(s_other, s, n1);
        const double v = w > 0.0 ? std::log(w) + s * lp + (nk - s) * lq : -std::numeric_limits<double>::infinity();
        lw[static_cast<std::size_t>(s)] = v;
        mx = std::max(mx, v);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
        fail(ErrorKind::ZeroProbabilityCondition, "slice carries no mass under " + design_.label());
    }
    double tot = 0.0, acc = 0.0;
    for (int s = 0; s <= nk; ++s) {
        const double e = std::exp(lw[static_cast<std::size_t>(s)] - mx);
        tot += e;
        acc += e * s;
    }
    return acc / tot / nk;
}

}  // namespace rarinf
