#include "rarinf/study.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "rarinf/error.hpp"
#include "rarinf/parallel.hpp"
#include "summation.hpp"

namespace rarinf {

std::vector<std::pair<Outcome, double>> AdmissibleDist::support() const {
    std::vector<std::pair<Outcome, double>> out;
    base.grid().for_each([&](const Outcome& o, std::size_t idx) {
        if (mass[idx] > 0.0) out.emplace_back(o, mass[idx]);
    });
    return out;
}

AdmissibleDist admissible(const JointDist& d) {
    std::vector<double> mass(d.dense().begin(), d.dense().end());
    d.grid().for_each([&](const Outcome& o, std::size_t idx) {
        if (!o.admissible()) mass[idx] = 0.0;
    });
    const double kept = detail::compensated_sum(mass);
    if (!(kept > 0.0)) {
        fail(ErrorKind::AllMassDegenerate, "no admissible outcome (both arms observed, interior UMLE) has positive mass");
    }
    for (double& m : mass) m /= kept;
    return AdmissibleDist{d, std::move(mass), std::max(0.0, 1.0 - kept)};
}

CiSpec StudyOptions::interval_spec(CiMethod method) const {
    CiSpec s;
    s.level = 1.0 - 0.5 * alpha;
    s.method = method;
    s.mode = mode;
    s.min_conditional_replicates = min_conditional_replicates;
    s.degenerate = degenerate;
    s.truncate = truncate_wald_length;
    s.threads = 1;
    return s;
}

StudyEngine::StudyEngine(DesignSpec design, StudyOptions opts)
    : design_(std::move(design)), opts_(opts), law_(std::make_unique<DesignLaw>(design_)) {
    if (!(opts_.alpha > 0.0 && opts_.alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    table_ = std::make_unique<CmleTable>(*law_, opts_.threads);
}

namespace {

bool in_moment_set(const Outcome& o, MomentSet set) {
    return set == MomentSet::Admissible ? o.admissible() : (o.n1 > 0 && o.n1 < o.n);
}

Vec2 umle_vec(const Outcome& o) { return {static_cast<double>(o.s1) / o.n1, static_cast<double>(o.s2) / o.n2()}; }

std::uint64_t reduced_key(const Outcome& o) {
    auto part = [](int s, int m) {
        const int g = std::gcd(s, m);
        return (std::uint64_t(s / g) << 16) | std::uint64_t(m / g);
    };
    return (part(o.s1, o.n1) << 32) | part(o.s2, o.n2());
}

}  // namespace

StudyEngine::Moments StudyEngine::moments(const JointDist& jd) const {
    const int n = law_->horizon();
    const auto dense = jd.dense();
    const auto& grid = law_->grid();
    Moments m;
    double total = 0.0;
    Vec2 sum_hat = Vec2::Zero(), sum_tilde = Vec2::Zero();
    for (int n1 = 1; n1 < n; ++n1) {
        for (int s1 = 0; s1 <= n1; ++s1) {
            for (int s2 = 0; s2 <= n - n1; ++s2) {
                const Outcome o{s1, s2, n1, n};
                const double w = dense[grid.index(o)];
                if (w <= 0.0 || !in_moment_set(o, opts_.moments)) continue;
                total += w;
                sum_hat += w * umle_vec(o);
                sum_tilde += w * table_->at(o).vec();
            }
        }
    }
    if (!(total > 0.0)) fail(ErrorKind::AllMassDegenerate, "no outcome with positive mass in the moment set");
    m.mean_hat = sum_hat / total;
    m.mean_tilde = sum_tilde / total;

    double var_hat = 0.0, cond_var = 0.0;
    for (int n1 = 1; n1 < n; ++n1) {
        double pn = 0.0;
        Vec2 mu = Vec2::Zero();
        for (int s1 = 0; s1 <= n1; ++s1) {
            for (int s2 = 0; s2 <= n - n1; ++s2) {
                const Outcome o{s1, s2, n1, n};
                const double w = dense[grid.index(o)];
                if (w <= 0.0 || !in_moment_set(o, opts_.moments)) continue;
                pn += w;
                mu += w * table_->at(o).vec();
                var_hat += w * (umle_vec(o) - m.mean_hat).squaredNorm();
            }
        }
        if (pn <= 0.0) continue;
        mu /= pn;
        double v = 0.0;
        for (int s1 = 0; s1 <= n1; ++s1) {
            for (int s2 = 0; s2 <= n - n1; ++s2) {
                const Outcome o{s1, s2, n1, n};
                const double w = dense[grid.index(o)];
                if (w <= 0.0 || !in_moment_set(o, opts_.moments)) continue;
                v += w * (table_->at(o).vec() - mu).squaredNorm();
            }
        }
        cond_var += v;
    }
    m.var_hat = var_hat / total;
    m.mean_cond_var_tilde = cond_var / total;
    return m;
}

void StudyEngine::ensure_intervals() const {
    std::call_once(intervals_once_, [this] {
        const auto& grid = law_->grid();
        std::vector<Outcome> todo;
        std::vector<std::size_t> slot;
        grid.for_each([&](const Outcome& o, std::size_t idx) {
            if (o.admissible() && law_->weight(o.s1, o.s2, o.n1) > 0.0) {
                todo.push_back(o);
                slot.push_back(idx);
            }
        });
        std::vector<OutcomeIntervals> out(grid.size());

        // the unconditional bootstrap depends on the outcome only through p-hat
        std::map<std::uint64_t, std::size_t> key_index;
        std::vector<Outcome> reps;
        for (const auto& o : todo) {
            if (key_index.emplace(reduced_key(o), reps.size()).second) reps.push_back(o);
        }
        std::vector<CiPair> boot(reps.size());
        std::vector<std::string> boot_error(reps.size());
        const CiSpec boot_spec = opts_.interval_spec(CiMethod::UncondBootstrap);
        parallel_for(reps.size(), opts_.threads, [&](std::size_t i) {
            try {
                boot[i] = uncond_bootstrap_ci(*law_, reps[i], boot_spec);
            } catch (const Error& e) {
                boot_error[i] = e.what();
            }
        });

        const CiSpec cond_spec = opts_.interval_spec(CiMethod::CondBootstrap);
        const CiSpec wald_spec = opts_.interval_spec(CiMethod::Wald);
        parallel_for(todo.size(), opts_.threads, [&](std::size_t i) {
            auto& r = out[slot[i]];
            const Outcome& o = todo[i];
            const std::size_t b = key_index.at(reduced_key(o));
            r.boot = boot[b];
            r.error = boot_error[b];
            try {
                r.wald = wald_ci(o, wald_spec.level, wald_spec.truncate);
                r.cond = cond_bootstrap_ci(*law_, o, cond_spec, table_.get());
            } catch (const Error& e) {
                if (r.error.empty()) r.error = e.what();
            }
        });
        intervals_ = std::move(out);
    });
}

const CiPair& StudyEngine::interval(const Outcome& o, CiMethod m) const {
    if (!o.admissible() || o.n != law_->horizon()) fail(ErrorKind::InvalidArgument, "intervals are tabulated for admissible outcomes only");
    ensure_intervals();
    const auto& r = intervals_[law_->grid().index(o)];
    if (!r.error.empty()) fail(ErrorKind::NoInteriorSolution, r.error);
    switch (m) {
        case CiMethod::Wald: return r.wald;
        case CiMethod::UncondBootstrap: return r.boot;
        case CiMethod::CondBootstrap: return r.cond;
    }
    fail(ErrorKind::InvalidArgument, "unknown interval method");
}

StudyEngine::IntervalSums StudyEngine::interval_sums(const JointDist& jd) const {
    ensure_intervals();
    const auto dense = jd.dense();
    const ProbPair& p = jd.p();
    IntervalSums s;
    law_->grid().for_each([&](const Outcome& o, std::size_t idx) {
        const double w = dense[idx];
        if (w <= 0.0 || !o.admissible()) return;
        const auto& r = intervals_[idx];
        if (!r.error.empty()) {
            fail(ErrorKind::NoInteriorSolution, "interval failed at (s1=" + std::to_string(o.s1) + ", s2=" +
                                                    std::to_string(o.s2) + ", n1=" + std::to_string(o.n1) +
                                                    "): " + r.error);
        }
        s.mass += w;
        s.len_cond += w * r.cond.total_length();
        s.len_boot += w * r.boot.total_length();
        s.len_wald += w * r.wald.total_length();
        s.cover_cond += r.cond.covers(p) ? w : 0.0;
        s.cover_boot += r.boot.covers(p) ? w : 0.0;
        s.cover_wald += r.wald.covers(p) ? w : 0.0;
    });
    if (!(s.mass > 0.0)) fail(ErrorKind::AllMassDegenerate, "no admissible outcome has positive mass");
    return s;
}

double StudyEngine::tbias(const ProbPair& p, Estimator e) const {
    const auto m = moments(law_->joint(p));
    const Vec2 mean = e == Estimator::UMLE ? m.mean_hat : m.mean_tilde;
    return (mean - p.vec()).cwiseAbs().sum();
}

double StudyEngine::rel_var(const ProbPair& p) const {
    const auto m = moments(law_->joint(p));
    return m.var_hat / m.mean_cond_var_tilde;
}

std::pair<double, double> StudyEngine::rel_len(const ProbPair& p) const {
    const auto s = interval_sums(law_->joint(p));
    return {s.len_boot / s.len_cond, s.len_wald / s.len_cond};
}

std::array<double, 3> StudyEngine::coverage(const ProbPair& p) const {
    const auto s = interval_sums(law_->joint(p));
    return {s.cover_cond / s.mass, s.cover_boot / s.mass, s.cover_wald / s.mass};
}

StudyRow StudyEngine::row(const ProbPair& p) const {
    StudyRow r;
    r.p1 = p.p1;
    r.p2 = p.p2;
    try {
        const JointDist jd = law_->joint(p);
        const auto m = moments(jd);
        r.tbias_uncond = (m.mean_hat - p.vec()).cwiseAbs().sum();
        r.tbias_cond = (m.mean_tilde - p.vec()).cwiseAbs().sum();
        r.rel_var = m.var_hat / m.mean_cond_var_tilde;
        const auto s = interval_sums(jd);
        r.rel_len_boot = s.len_boot / s.len_cond;
        r.rel_len_wald = s.len_wald / s.len_cond;
        r.cover_cond = s.cover_cond / s.mass;
        r.cover_boot = s.cover_boot / s.mass;
        r.cover_wald = s.cover_wald / s.mass;
        r.excluded_mass = std::max(0.0, 1.0 - s.mass);
    } catch (const Error& e) {
        r.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return r;
}

double tbias(const DesignSpec& design, const ProbPair& p, Estimator e, const StudyOptions& opts) {
    return StudyEngine(design, opts).tbias(p, e);
}

double rel_var(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts) {
    return StudyEngine(design, opts).rel_var(p);
}

std::pair<double, double> rel_len(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts) {
    return StudyEngine(design, opts).rel_len(p);
}

std::array<double, 3> coverage(const DesignSpec& design, const ProbPair& p, const StudyOptions& opts) {
    return StudyEngine(design, opts).coverage(p);
}

std::vector<ProbPair> paper_grid() {
    const double v[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<ProbPair> g;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j <= i; ++j) g.push_back({v[i], v[j]});
    return g;
}

std::vector<StudyRow> study_table(const StudyEngine& engine, const std::vector<ProbPair>& grid) {
    std::vector<StudyRow> rows(grid.size());
    parallel_for(grid.size(), engine.options().threads, [&](std::size_t i) { rows[i] = engine.row(grid[i]); });
    return rows;
}

std::vector<StudyRow> study_table(const DesignSpec& design, const std::vector<ProbPair>& grid,
                                  const StudyOptions& opts) {
    return study_table(StudyEngine(design, opts), grid);
}

std::vector<ReleffPoint> releff_histogram(const DesignLaw& law, const ProbPair& p) {
    ProbPair::make(p.p1, p.p2);
    const int n = law.horizon();
    const auto marg = law.marginal_n1(p);
    std::vector<ReleffPoint> out;
    double total = 0.0;
    for (int n1 = 1; n1 < n; ++n1) {
        const double w = marg[static_cast<std::size_t>(n1)];
        if (w <= 0.0) continue;
        out.push_back({n1, w, 0.5 * relative_efficiency(law, p, n1).trace()});
        total += w;
    }
    if (!(total > 0.0)) fail(ErrorKind::AllMassDegenerate, "P(0 < N1 < n) is zero");
    for (auto& pt : out) pt.probability /= total;
    return out;
}

std::vector<ReleffPoint> releff_histogram(const DesignSpec& design, const ProbPair& p) {
    return releff_histogram(DesignLaw(design), p);
}

CaseStudyReport fluoxetine_case_study(int block_length, const StudyOptions& opts) {
    struct Stratum {
        const char* name;
        Outcome outcome;
        ProbPair umle, cmle;
        std::array<Interval, 2> uncond, cond;
    };
    const Stratum strata[] = {
        {"shortened REML", {3, 7, 17, 29}, {0.18, 0.58}, {0.10, 0.73}, {{{0.00, 0.44}, {0.29, 0.81}}},
         {{{0.03, 0.41}, {0.22, 0.88}}}},
        {"normal REML", {10, 8, 18, 32}, {0.56, 0.57}, {0.53, 0.62}, {{{0.21, 0.81}, {0.23, 0.82}}},
         {{{0.27, 0.79}, {0.28, 0.84}}}},
    };
    auto design_for = [&](int n) {
        DesignSpec d = DesignSpec::rpw(1, 1, n);
        return block_length > 0 ? d.with_block(block_length) : d;
    };
    CaseStudyReport rep{design_for(29), design_for(32), {}};
    for (const auto& st : strata) {
        const DesignLaw law(design_for(st.outcome.n));
        StratumReport r;
        r.name = st.name;
        r.outcome = st.outcome;
        r.umle = umle(st.outcome);
        r.cmle = cmle(law, st.outcome).estimate;
        r.uncond = uncond_bootstrap_ci(law, st.outcome, opts.interval_spec(CiMethod::UncondBootstrap));
        r.cond = cond_bootstrap_ci(law, st.outcome, opts.interval_spec(CiMethod::CondBootstrap));
        r.published_umle = st.umle;
        r.published_cmle = st.cmle;
        r.published_uncond = st.uncond;
        r.published_cond = st.cond;
        rep.strata.push_back(std::move(r));
    }
    return rep;
}

}  // namespace rarinf
