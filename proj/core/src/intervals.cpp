#include "rarinf/intervals.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "rarinf/error.hpp"
#include "rarinf/parallel.hpp"

namespace rarinf {

std::string_view method_name(CiMethod m) {
    switch (m) {
        case CiMethod::Wald: return "wald";
        case CiMethod::UncondBootstrap: return "uncond";
        case CiMethod::CondBootstrap: return "cond";
    }
    return "?";
}

CiMethod parse_method(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "wald") return CiMethod::Wald;
    if (s == "uncond" || s == "unconditional" || s == "uncond-bootstrap" || s == "bootstrap")
        return CiMethod::UncondBootstrap;
    if (s == "cond" || s == "conditional" || s == "cond-bootstrap") return CiMethod::CondBootstrap;
    fail(ErrorKind::Config, "unknown interval method '" + std::string(name) + "' (wald, uncond, cond)");
}

void CiSpec::validate() const {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    if (const auto* mc = std::get_if<MonteCarloMode>(&mode); mc && mc->replicates < 1000) {
        fail(ErrorKind::InvalidArgument, "Monte Carlo mode needs at least 1000 replicates");
    }
    if (min_conditional_replicates < 1) fail(ErrorKind::InvalidArgument, "min_conditional_replicates must be positive");
}

double normal_quantile(double u) { return boost::math::quantile(boost::math::normal(), u); }

CiPair wald_ci(const Outcome& o, double level, bool truncate) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    const ProbPair ph = umle(o);
    const double z = normal_quantile(0.5 * (1.0 + level));
    CiPair out;
    out.method = CiMethod::Wald;
    for (int k = 0; k < 2; ++k) {
        const int nk = k == 0 ? o.n1 : o.n2();
        const double half = z * std::sqrt(ph[k] * (1.0 - ph[k]) / nk);
        Interval iv{ph[k] - half, ph[k] + half};
        if (truncate) {
            iv.lower = std::max(0.0, iv.lower);
            iv.upper = std::min(1.0, iv.upper);
        }
        out.arms[static_cast<std::size_t>(k)] = iv;
    }
    return out;
}

namespace {

struct Fraction {
    int s;
    int m;
    double value() const { return m == 0 ? 0.0 : static_cast<double>(s) / m; }
};

// All s/m with 0 <= s <= m <= n in increasing order of value (0/0 counts as 0).
std::vector<Fraction> sorted_fractions(int n) {
    std::vector<Fraction> fr;
    for (int m = 0; m <= n; ++m)
        for (int s = 0; s <= m; ++s) fr.push_back({s, m});
    std::stable_sort(fr.begin(), fr.end(), [](const Fraction& a, const Fraction& b) { return a.value() < b.value(); });
    return fr;
}

// Smallest value whose CDF reaches z, from masses indexed [m][s].
double weighted_quantile(const std::vector<Fraction>& order, const std::vector<std::vector<double>>& mass,
                         double total, double z) {
    const double target = z * total * (1.0 - 1e-12);
    double cdf = 0.0;
    double last = 0.0;
    for (const auto& f : order) {
        const double w = mass[static_cast<std::size_t>(f.m)][static_cast<std::size_t>(f.s)];
        if (w <= 0.0) continue;
        cdf += w;
        last = f.value();
        if (cdf >= target) return last;
    }
    return last;
}

// Order statistic at ceil(B z), clamped to [1, B], of a sorted sample.
template <class T>
T order_statistic(const std::vector<T>& sorted, double z) {
    const auto b = static_cast<double>(sorted.size());
    auto idx = static_cast<long>(std::ceil(b * z - 1e-9));
    idx = std::clamp<long>(idx, 1, static_cast<long>(sorted.size()));
    return sorted[static_cast<std::size_t>(idx - 1)];
}

std::vector<Outcome> simulate_replicates(const DesignSpec& design, const ProbPair& p, const MonteCarloMode& mc,
                                         int threads) {
    std::vector<Outcome> reps(static_cast<std::size_t>(mc.replicates));
    parallel_for(reps.size(), threads, [&](std::size_t b) { reps[b] = simulate_trial(design, p, mc.seed, b); });
    return reps;
}

double endpoint(const DesignLaw& law, const Outcome& o, Arm arm, int s, const CmleTable* table) {
    const int nk = o.assigned(arm);
    if (s <= 0) return 0.0;
    if (s >= nk) return 1.0;
    const Outcome mod = o.with_successes(arm, s);
    if (table != nullptr && table->has(mod)) return table->at(mod)[arm];
    return extended_cmle(law, mod)[arm];
}

}  // namespace

CiPair uncond_bootstrap_ci(const DesignLaw& law, const Outcome& o, const CiSpec& spec) {
    spec.validate();
    const ProbPair ph = umle(o);
    const int n = law.horizon();
    const bool keep = spec.degenerate == ReplicatePolicy::Keep;
    CiPair out;
    out.method = CiMethod::UncondBootstrap;

    if (const auto* mc = std::get_if<MonteCarloMode>(&spec.mode)) {
        const auto reps = simulate_replicates(law.design(), ph, *mc, spec.threads);
        std::array<std::vector<double>, 2> vals;
        long dropped = 0;
        for (const auto& r : reps) {
            if (!keep && !r.admissible()) {
                ++dropped;
                continue;
            }
            vals[0].push_back(r.n1 == 0 ? 0.0 : static_cast<double>(r.s1) / r.n1);
            vals[1].push_back(r.n2() == 0 ? 0.0 : static_cast<double>(r.s2) / r.n2());
        }
        if (vals[0].empty()) fail(ErrorKind::TooFewAdmissible, "every bootstrap replicate was degenerate");
        for (int k = 0; k < 2; ++k) {
            auto& v = vals[static_cast<std::size_t>(k)];
            std::sort(v.begin(), v.end());
            out.arms[static_cast<std::size_t>(k)] = {order_statistic(v, spec.lower_z()),
                                                     order_statistic(v, spec.upper_z())};
        }
        out.excluded = static_cast<double>(dropped);
        return out;
    }

    const JointDist jd = law.joint(ph);
    std::array<std::vector<std::vector<double>>, 2> mass;
    for (auto& a : mass) {
        a.resize(static_cast<std::size_t>(n) + 1);
        for (int m = 0; m <= n; ++m) a[static_cast<std::size_t>(m)].assign(static_cast<std::size_t>(m) + 1, 0.0);
    }
    double kept = 0.0, dropped = 0.0;
    const auto dense = jd.dense();
    law.grid().for_each([&](const Outcome& q, std::size_t idx) {
        const double w = dense[idx];
        if (w <= 0.0) return;
        if (!keep && !q.admissible()) {
            dropped += w;
            return;
        }
        kept += w;
        mass[0][static_cast<std::size_t>(q.n1)][static_cast<std::size_t>(q.s1)] += w;
        mass[1][static_cast<std::size_t>(q.n2())][static_cast<std::size_t>(q.s2)] += w;
    });
    if (!(kept >= 1e-6)) {
        fail(ErrorKind::TooFewAdmissible, "admissible bootstrap mass below 1e-6 at p-hat");
    }
    const auto order = sorted_fractions(n);
    for (std::size_t k = 0; k < 2; ++k) {
        out.arms[k] = {weighted_quantile(order, mass[k], kept, spec.lower_z()),
                       weighted_quantile(order, mass[k], kept, spec.upper_z())};
    }
    out.excluded = dropped;
    return out;
}

CiPair uncond_bootstrap_ci(const DesignSpec& design, const Outcome& o, const CiSpec& spec) {
    return uncond_bootstrap_ci(DesignLaw(design), o, spec);
}

CiPair cond_bootstrap_ci(const DesignLaw& law, const Outcome& o, const CiSpec& spec, const CmleTable* table) {
    spec.validate();
    const ProbPair ph = umle(o);
    const bool keep = spec.degenerate == ReplicatePolicy::Keep;
    CiPair out;
    out.method = CiMethod::CondBootstrap;

    if (const auto* mc = std::get_if<MonteCarloMode>(&spec.mode)) {
        const auto reps = simulate_replicates(law.design(), ph, *mc, spec.threads);
        std::array<std::vector<int>, 2> s;
        long outside = 0;
        for (const auto& r : reps) {
            if (r.n1 != o.n1 || (!keep && !r.admissible())) {
                ++outside;
                continue;
            }
            s[0].push_back(r.s1);
            s[1].push_back(r.s2);
        }
        const auto bc = static_cast<long>(s[0].size());
        if (bc < spec.min_conditional_replicates) {
            fail(ErrorKind::InsufficientConditionalReplicates,
                 "only " + std::to_string(bc) + " of " + std::to_string(mc->replicates) +
                     " replicates matched N1 = " + std::to_string(o.n1) + " (need " +
                     std::to_string(spec.min_conditional_replicates) +
                     "); raise the replicate count or use exact mode");
        }
        for (int k = 0; k < 2; ++k) {
            auto& v = s[static_cast<std::size_t>(k)];
            std::sort(v.begin(), v.end());
            const Arm arm = k == 0 ? Arm::one : Arm::two;
            out.arms[static_cast<std::size_t>(k)] = {
                endpoint(law, o, arm, order_statistic(v, spec.lower_z()), table),
                endpoint(law, o, arm, order_statistic(v, spec.upper_z()), table)};
        }
        out.conditional_replicates = bc;
        out.excluded = static_cast<double>(outside);
        return out;
    }

    CondDist cd = law.conditional(ph, o.n1);
    if (!keep) {
        double interior = 0.0;
        for (int s1 = 1; s1 < cd.n1; ++s1)
            for (int s2 = 1; s2 < cd.n2(); ++s2) interior += cd.at(s1, s2);
        out.excluded = 1.0 - interior;
        cd = cd.interior_only();
    }
    for (int k = 0; k < 2; ++k) {
        const Arm arm = k == 0 ? Arm::one : Arm::two;
        out.arms[static_cast<std::size_t>(k)] = {
            endpoint(law, o, arm, conditional_s_quantile(cd, arm, spec.lower_z()), table),
            endpoint(law, o, arm, conditional_s_quantile(cd, arm, spec.upper_z()), table)};
    }
    return out;
}

CiPair cond_bootstrap_ci(const DesignSpec& design, const Outcome& o, const CiSpec& spec) {
    return cond_bootstrap_ci(DesignLaw(design), o, spec);
}

CiPair confidence_interval(const DesignLaw& law, const Outcome& o, const CiSpec& spec, const CmleTable* table) {
    switch (spec.method) {
        case CiMethod::Wald: spec.validate(); return wald_ci(o, spec.level, spec.truncate);
        case CiMethod::UncondBootstrap: return uncond_bootstrap_ci(law, o, spec);
        case CiMethod::CondBootstrap: return cond_bootstrap_ci(law, o, spec, table);
    }
    fail(ErrorKind::InvalidArgument, "unknown interval method");
}

}  // namespace rarinf
