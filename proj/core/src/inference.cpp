#include "rarinf/inference.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rarinf/error.hpp"
#include "rarinf/parallel.hpp"

namespace rarinf {

ProbPair umle(const Outcome& o) {
    if (!o.valid()) fail(ErrorKind::InvalidArgument, "outcome violates 0 <= s_k <= n_k");
    if (o.n1 == 0 || o.n2() == 0) {
        fail(ErrorKind::DegenerateArm, "an arm received no subjects (N_k(n) = 0); outcome excluded");
    }
    const ProbPair p{static_cast<double>(o.s1) / o.n1, static_cast<double>(o.s2) / o.n2()};
    if (!p.interior()) {
        std::ostringstream os;
        os << "UMLE (" << p.p1 << ", " << p.p2 << ") lies on the boundary; outcomes with p-hat_k in {0,1} are excluded";
        fail(ErrorKind::BoundaryEstimate, os.str());
    }
    return p;
}

InfoMatrix lambda_matrix(const ProbPair& p, int n1, int n2) {
    InfoMatrix m = InfoMatrix::Zero();
    m(0, 0) = n1 / (p.p1 * (1.0 - p.p1));
    m(1, 1) = n2 / (p.p2 * (1.0 - p.p2));
    return m;
}

Vec2 lambda_derivative(const ProbPair& p, int n1, int n2) {
    auto d = [](double pk, int nk) {
        const double v = pk * (1.0 - pk);
        return -nk * (1.0 - 2.0 * pk) / (v * v);
    };
    return {d(p.p1, n1), d(p.p2, n2)};
}

InfoMatrix unconditional_observed_info(const Outcome& o) { return lambda_matrix(umle(o), o.n1, o.n2()); }

InfoMatrix unconditional_expected_info(const DesignLaw& law, const ProbPair& p) {
    const int n = law.horizon();
    const auto marg = law.marginal_n1(p);
    InfoMatrix acc = InfoMatrix::Zero();
    double mass = 0.0;
    for (int n1 = 1; n1 < n; ++n1) {
        const double w = marg[static_cast<std::size_t>(n1)];
        if (w <= 0.0) continue;
        acc += w * lambda_matrix(p, n1, n - n1);
        mass += w;
    }
    if (!(mass > 0.0)) fail(ErrorKind::AllMassDegenerate, "P(1 <= N1 <= n-1) is zero");
    return acc / mass;
}

InfoMatrix unconditional_expected_info(const DesignSpec& design, const ProbPair& p) {
    return unconditional_expected_info(DesignLaw(design), p);
}

InfoMatrix conditional_expected_info(const DesignLaw& law, const ProbPair& p, int n1) {
    const auto m = law.conditional_moments(p, n1);
    const InfoMatrix lam = lambda_matrix(p, n1, law.horizon() - n1);
    return lam * m.cov * lam;
}

InfoMatrix conditional_expected_info(const DesignSpec& design, const ProbPair& p, int n1) {
    return conditional_expected_info(DesignLaw(design), p, n1);
}

InfoMatrix conditional_observed_info(const DesignLaw& law, const Outcome& o) {
    const ProbPair ph = umle(o);
    const auto m = law.conditional_moments(ph, o.n1);
    const InfoMatrix lam = lambda_matrix(ph, o.n1, o.n2());
    const Vec2 bias = m.mean - ph.vec();
    const Vec2 dlam = lambda_derivative(ph, o.n1, o.n2());
    InfoMatrix j = lam * m.cov * lam;
    j(0, 0) += bias(0) * dlam(0);
    j(1, 1) += bias(1) * dlam(1);
    return j;
}

InfoMatrix conditional_observed_info(const DesignSpec& design, const Outcome& o) {
    return conditional_observed_info(DesignLaw(design), o);
}

InfoMatrix relative_efficiency(const DesignLaw& law, const ProbPair& p, int n1) {
    const auto m = law.conditional_moments(p, n1);
    const InfoMatrix lam = lambda_matrix(p, n1, law.horizon() - n1);
    const InfoMatrix root = lam.diagonal().cwiseSqrt().asDiagonal();
    return root * m.cov * root;
}

InfoMatrix relative_efficiency(const DesignSpec& design, const ProbPair& p, int n1) {
    return relative_efficiency(DesignLaw(design), p, n1);
}

Vec2 conditional_bias(const DesignLaw& law, const ProbPair& p, int n1) {
    return law.conditional_moments(p, n1).mean - p.vec();
}

Vec2 conditional_bias(const DesignSpec& design, const ProbPair& p, int n1) {
    return conditional_bias(DesignLaw(design), p, n1);
}

InfoMatrix bias_jacobian(const DesignLaw& law, const ProbPair& p, int n1) {
    const auto m = law.conditional_moments(p, n1);
    return lambda_matrix(p, n1, law.horizon() - n1) * m.cov - InfoMatrix::Identity();
}

InfoMatrix bias_jacobian(const DesignSpec& design, const ProbPair& p, int n1) {
    return bias_jacobian(DesignLaw(design), p, n1);
}

namespace {

struct MeanMap {
    const DesignLaw& law;
    int n1;
    Vec2 target;

    // h(p) - target and dh/dp
    std::pair<Vec2, InfoMatrix> eval(const ProbPair& p) const {
        const auto m = law.conditional_moments(p, n1);
        const InfoMatrix lam = lambda_matrix(p, n1, law.horizon() - n1);
        return {m.mean - target, m.cov * lam};
    }
    Vec2 residual(const ProbPair& p) const { return law.conditional_moments(p, n1).mean - target; }
};

double max_norm(const Vec2& v) { return v.cwiseAbs().maxCoeff(); }

ProbPair clamp_pair(const Vec2& x, double c) {
    return {std::clamp(x(0), c, 1.0 - c), std::clamp(x(1), c, 1.0 - c)};
}

// Gauss-Seidel over coordinates; each h_k is increasing in p_k.
bool coordinate_bisection(const MeanMap& map, ProbPair& x, double tol, double c, int& evals) {
    for (int sweep = 0; sweep < 400; ++sweep) {
        for (int k = 0; k < 2; ++k) {
            double lo = c, hi = 1.0 - c;
            for (int it = 0; it < 64 && hi - lo > 1e-16; ++it) {
                ProbPair trial = x;
                trial[k] = 0.5 * (lo + hi);
                ++evals;
                if (map.residual(trial)(k) > 0.0)
                    hi = trial[k];
                else
                    lo = trial[k];
            }
            x[k] = 0.5 * (lo + hi);
        }
        ++evals;
        if (max_norm(map.residual(x)) < tol) return true;
    }
    return false;
}

// Runs the solver and reports whether it ended at an interior root. On
// failure res.estimate holds the last iterate.
bool solve_moment_equation(const DesignLaw& law, const Outcome& o, const CmleOptions& opts, CmleResult& res) {
    if (o.n != law.horizon()) fail(ErrorKind::InvalidArgument, "outcome horizon does not match the design");
    const ProbPair ph = umle(o);
    if (!law.reachable(o.n1)) {
        fail(ErrorKind::ZeroProbabilityCondition,
             "N1 = " + std::to_string(o.n1) + " is unreachable under " + law.design().label());
    }
    const MeanMap map{law, o.n1, ph.vec()};
    const double c = opts.clamp;

    ProbPair x = clamp_pair(ph.vec(), c);
    auto [r, jac] = map.eval(x);
    double norm = max_norm(r);
    bool stalled = false;
    while (norm >= opts.target && res.iterations < opts.max_newton) {
        ++res.iterations;
        const Vec2 step = -jac.fullPivLu().solve(r);
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
            const ProbPair cand = clamp_pair(x.vec() + t * step, c);
            auto [rc, jc] = map.eval(cand);
            const double nc = max_norm(rc);
            if (nc < norm) {
                x = cand;
                r = rc;
                jac = jc;
                norm = nc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            stalled = true;
            break;
        }
    }

    if (norm >= opts.tolerance || (stalled && norm >= opts.tolerance)) {
        int evals = 0;
        res.used_bisection = true;
        coordinate_bisection(map, x, opts.tolerance, c, evals);
        std::tie(r, jac) = map.eval(x);
        norm = max_norm(r);
    }

    res.estimate = x;
    res.residual = norm;
    res.jacobian = jac;
    const bool at_clamp = x.p1 <= c || x.p1 >= 1.0 - c || x.p2 <= c || x.p2 >= 1.0 - c;
    return !at_clamp && norm < opts.tolerance;
}

}  // namespace

CmleResult cmle(const DesignLaw& law, const Outcome& o, const CmleOptions& opts) {
    CmleResult res;
    if (!solve_moment_equation(law, o, opts, res)) {
        std::ostringstream os;
        os << "no interior conditional MLE for outcome (s1=" << o.s1 << ", s2=" << o.s2 << ", n1=" << o.n1
           << ", n=" << o.n << "): reached (" << res.estimate.p1 << ", " << res.estimate.p2 << ") with residual "
           << res.residual;
        fail(ErrorKind::NoInteriorSolution, os.str());
    }
    return res;
}

CmleResult cmle(const DesignSpec& design, const Outcome& o, const CmleOptions& opts) {
    return cmle(DesignLaw(design), o, opts);
}

namespace {

// Root in (0, 1) of the increasing map pk -> slice_mean = target.
double solve_slice(const DesignLaw& law, Arm arm, int n1, int s_other, double target) {
    double lo = 0.0, hi = 1.0;
    const double flat_lo = law.slice_mean(arm, 1e-12, n1, s_other);
    const double flat_hi = law.slice_mean(arm, 1.0 - 1e-12, n1, s_other);
    // only one success count reachable on this slice: the likelihood is flat
    if (flat_hi - flat_lo < 1e-12) return target;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (law.slice_mean(arm, mid, n1, s_other) > target)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

bool on_boundary(int s, int n) { return s == 0 || s == n; }

}  // namespace

ProbPair extended_cmle(const DesignLaw& law, const Outcome& o, const CmleOptions& opts) {
    if (o.n != law.horizon() || !o.valid()) fail(ErrorKind::InvalidArgument, "outcome does not fit the design horizon");
    if (o.n1 == 0 || o.n2() == 0) fail(ErrorKind::DegenerateArm, "an arm received no subjects (N_k(n) = 0)");
    const bool b1 = on_boundary(o.s1, o.n1);
    const bool b2 = on_boundary(o.s2, o.n2());
    if (!b1 && !b2) {
        CmleResult res;
        if (solve_moment_equation(law, o, opts, res)) return res.estimate;
        // the likelihood keeps rising toward an edge: report the limit point
        ProbPair r = res.estimate;
        for (double* x : {&r.p1, &r.p2}) {
            if (*x <= 2.0 * opts.clamp) *x = 0.0;
            if (*x >= 1.0 - 2.0 * opts.clamp) *x = 1.0;
        }
        return r;
    }
    if (law.weight(o.s1, o.s2, o.n1) <= 0.0) {
        fail(ErrorKind::ZeroProbabilityCondition, "outcome is unreachable under " + law.design().label());
    }
    ProbPair r{static_cast<double>(o.s1) / o.n1, static_cast<double>(o.s2) / o.n2()};
    if (b1 && !b2) r.p2 = solve_slice(law, Arm::two, o.n1, o.s1, r.p2);
    if (b2 && !b1) r.p1 = solve_slice(law, Arm::one, o.n1, o.s2, r.p1);
    return r;
}

CmleTable::CmleTable(const DesignLaw& law, int threads, const CmleOptions& opts)
    : law_(&law), estimate_(law.grid().size()), state_(law.grid().size(), 0) {
    const int n = law.horizon();
    std::vector<Outcome> todo;
    std::vector<std::size_t> slot;
    law.grid().for_each([&](const Outcome& o, std::size_t idx) {
        if (o.n1 == 0 || o.n1 == n || law.weight(o.s1, o.s2, o.n1) <= 0.0) return;
        todo.push_back(o);
        slot.push_back(idx);
    });
    std::vector<std::optional<Failure>> failed(todo.size());
    parallel_for(todo.size(), threads, [&](std::size_t i) {
        try {
            estimate_[slot[i]] = extended_cmle(law, todo[i], opts);
            state_[slot[i]] = 1;
        } catch (const Error& e) {
            state_[slot[i]] = 2;
            failed[i] = Failure{todo[i], e.kind(), e.what()};
        }
    });
    for (auto& f : failed)
        if (f) failures_.push_back(std::move(*f));
}

bool CmleTable::has(const Outcome& o) const {
    if (o.n != law_->horizon() || !o.valid()) return false;
    return state_[law_->grid().index(o)] == 1;
}

const ProbPair& CmleTable::at(const Outcome& o) const {
    if (o.n != law_->horizon() || !o.valid()) fail(ErrorKind::InvalidArgument, "outcome does not fit the table horizon");
    const auto idx = law_->grid().index(o);
    if (state_[idx] == 1) return estimate_[idx];
    if (state_[idx] == 2) {
        for (const auto& f : failures_)
            if (f.outcome == o) fail(f.kind, f.message);
    }
    fail(ErrorKind::InvalidArgument, "outcome has no tabulated CMLE (empty arm or unreachable)");
}

}  // namespace rarinf
