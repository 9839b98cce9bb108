#include "rarinf/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "rarinf/error.hpp"

namespace rarinf {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string fixed(double x, int decimals) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

template <class T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Config, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("field '") + key + "': " + e.what());
    }
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Json to_json(const DesignSpec& d) {
    Json j;
    j["rule"] = std::string(rule_name(d.rule));
    j["alpha"] = d.alpha;
    j["beta"] = d.beta;
    j["n"] = d.horizon;
    if (d.initializer)
        j["block"] = d.initializer->length;
    else
        j["block"] = nullptr;
    return j;
}

DesignSpec design_from_json(const Json& j) {
    DesignSpec d;
    d.rule = parse_rule(field<std::string>(j, "rule"));
    d.alpha = j.contains("alpha") ? field<int>(j, "alpha") : 1;
    d.beta = j.contains("beta") ? field<int>(j, "beta") : 1;
    d.horizon = field<int>(j, "n");
    if (j.contains("block") && !j.at("block").is_null()) d.initializer = PermutedBlockInit{field<int>(j, "block")};
    try {
        d.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    return d;
}

Json to_json(const ProbPair& p) { return Json::array({p.p1, p.p2}); }

Json to_json(const Outcome& o) { return Json{{"s1", o.s1}, {"s2", o.s2}, {"n1", o.n1}, {"n2", o.n2()}, {"n", o.n}}; }

Json to_json(const InfoMatrix& m) {
    return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

Json to_json(const Interval& i) { return Json::array({i.lower, i.upper}); }

Json to_json(const CiPair& c) {
    Json j;
    j["method"] = std::string(method_name(c.method));
    j["arm1"] = to_json(c.arms[0]);
    j["arm2"] = to_json(c.arms[1]);
    if (c.conditional_replicates)
        j["conditional_replicates"] = *c.conditional_replicates;
    else
        j["conditional_replicates"] = nullptr;
    j["excluded"] = c.excluded;
    return j;
}

Json to_json(const CiSpec& s) {
    Json j;
    j["level"] = s.level;
    j["method"] = std::string(method_name(s.method));
    if (const auto* mc = std::get_if<MonteCarloMode>(&s.mode)) {
        j["mode"] = "mc";
        j["replicates"] = mc->replicates;
        j["seed"] = mc->seed;
    } else {
        j["mode"] = "exact";
    }
    j["min_conditional_replicates"] = s.min_conditional_replicates;
    j["degenerate_replicates"] = s.degenerate == ReplicatePolicy::Keep ? "keep" : "exclude";
    j["truncate"] = s.truncate;
    return j;
}

Json to_json(const CmleOptions& o) {
    return Json{{"target", o.target},
                {"tolerance", o.tolerance},
                {"max_newton", o.max_newton},
                {"max_halvings", o.max_halvings},
                {"clamp", o.clamp}};
}

Json cmle_report(const DesignSpec& d, const Outcome& o, const CmleResult& r, const CmleOptions& opts) {
    Json j;
    j["design"] = to_json(d);
    j["outcome"] = to_json(o);
    j["estimate"] = to_json(r.estimate);
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["used_bisection"] = r.used_bisection;
    j["jacobian"] = to_json(r.jacobian);
    j["options"] = to_json(opts);
    return j;
}

Json to_json(const StudyRow& r) {
    Json j;
    j["p1"] = r.p1;
    j["p2"] = r.p2;
    j["tbias_cmle"] = r.tbias_cond;
    j["tbias_umle"] = r.tbias_uncond;
    j["rel_var"] = r.rel_var;
    j["rel_len_boot"] = r.rel_len_boot;
    j["rel_len_wald"] = r.rel_len_wald;
    j["cover_cond"] = r.cover_cond;
    j["cover_boot"] = r.cover_boot;
    j["cover_wald"] = r.cover_wald;
    j["excluded_mass"] = r.excluded_mass;
    if (!r.ok()) j["error"] = r.error;
    return j;
}

Json to_json(const CaseStudyReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["designs"] = {{"shortened", to_json(r.shortened_design)}, {"normal", to_json(r.normal_design)}};
    Json strata = Json::array();
    for (const auto& s : r.strata) {
        Json e;
        e["name"] = s.name;
        e["outcome"] = to_json(s.outcome);
        e["umle"] = to_json(s.umle);
        e["cmle"] = to_json(s.cmle);
        e["uncond"] = to_json(s.uncond);
        e["cond"] = to_json(s.cond);
        e["published"] = {{"umle", to_json(s.published_umle)},
                          {"cmle", to_json(s.published_cmle)},
                          {"uncond", {to_json(s.published_uncond[0]), to_json(s.published_uncond[1])}},
                          {"cond", {to_json(s.published_cond[0]), to_json(s.published_cond[1])}}};
        strata.push_back(std::move(e));
    }
    j["strata"] = std::move(strata);
    return j;
}

namespace {

Json joint_provenance(const JointDist& d) {
    return Json{{"schema_version", kSchemaVersion}, {"design", to_json(d.design())}, {"p", to_json(d.p())}};
}

JointDist assemble(const Json& prov, const std::vector<std::pair<Outcome, double>>& entries) {
    const DesignSpec design = design_from_json(field<Json>(prov, "design"));
    const auto p = field<std::vector<double>>(prov, "p");
    if (p.size() != 2) fail(ErrorKind::Config, "'p' must hold two probabilities");
    OutcomeGrid grid(design.horizon);
    std::vector<double> mass(grid.size(), 0.0);
    for (const auto& [o, m] : entries) {
        if (!o.valid() || o.n != design.horizon) fail(ErrorKind::Config, "outcome outside the grid");
        mass[grid.index(o)] = m;
    }
    return JointDist(design, {p[0], p[1]}, std::move(mass));
}

}  // namespace

void write_joint_csv(std::ostream& out, const JointDist& d) {
    out << "# " << joint_provenance(d).dump() << "\n";
    out << "s1,s2,n1,probability\n";
    for (const auto& [o, m] : d.support()) out << o.s1 << ',' << o.s2 << ',' << o.n1 << ',' << format_number(m) << '\n';
}

JointDist read_joint_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) fail(ErrorKind::Config, "missing provenance line");
    Json prov;
    try {
        prov = Json::parse(line.substr(2));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("bad provenance: ") + e.what());
    }
    if (!std::getline(in, line) || line != "s1,s2,n1,probability") fail(ErrorKind::Config, "unexpected CSV header");
    const int n = field<Json>(prov, "design").value("n", 0);
    std::vector<std::pair<Outcome, double>> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Outcome o{0, 0, 0, n};
        char c1, c2, c3;
        std::istringstream row(line);
        std::string prob;
        if (!(row >> o.s1 >> c1 >> o.s2 >> c2 >> o.n1 >> c3 >> prob) || c1 != ',' || c2 != ',' || c3 != ',')
            fail(ErrorKind::Config, "malformed row: " + line);
        entries.emplace_back(o, std::strtod(prob.c_str(), nullptr));
    }
    return assemble(prov, entries);
}

Json joint_to_json(const JointDist& d) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["provenance"] = joint_provenance(d);
    Json rows = Json::array();
    for (const auto& [o, m] : d.support()) rows.push_back(Json::array({o.s1, o.s2, o.n1, m}));
    j["outcomes"] = std::move(rows);
    return j;
}

JointDist joint_from_json(const Json& j) {
    const Json prov = field<Json>(j, "provenance");
    const int n = field<Json>(prov, "design").value("n", 0);
    std::vector<std::pair<Outcome, double>> entries;
    for (const auto& row : field<Json>(j, "outcomes")) {
        if (!row.is_array() || row.size() != 4) fail(ErrorKind::Config, "outcome rows are [s1, s2, n1, probability]");
        entries.emplace_back(Outcome{row[0].get<int>(), row[1].get<int>(), row[2].get<int>(), n}, row[3].get<double>());
    }
    return assemble(prov, entries);
}

void write_outcomes_csv(std::ostream& out, const std::vector<Outcome>& trials) {
    out << "trial,s1,s2,n1,n2\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const auto& o = trials[t];
        out << t << ',' << o.s1 << ',' << o.s2 << ',' << o.n1 << ',' << o.n2() << '\n';
    }
}

void write_study_csv(std::ostream& out, const StudyProvenance& prov, const std::vector<StudyRow>& rows) {
    out << "p1,p2,tbias_cmle,tbias_umle,rel_var,rel_len_boot,rel_len_wald,cover_cond,cover_boot,cover_wald,"
           "design,n,mode,seed,excluded_mass,error\n";
    const std::string design = csv_quote(prov.design.label());
    for (const auto& r : rows) {
        const double v[] = {r.p1,           r.p2,         r.tbias_cond, r.tbias_uncond, r.rel_var,
                            r.rel_len_boot, r.rel_len_wald, r.cover_cond, r.cover_boot,   r.cover_wald};
        for (std::size_t k = 0; k < std::size(v); ++k) {
            if (k >= 2 && !r.ok())
                out << ',';
            else
                out << (k ? "," : "") << format_number(v[k]);
        }
        out << ',' << design << ',' << prov.design.horizon << ',' << prov.mode << ',' << prov.seed << ','
            << format_number(r.excluded_mass) << ',' << csv_quote(r.error) << '\n';
    }
}

void write_study_rounded(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << "p1,p2,tbias_cmle,tbias_umle,rel_var,rel_len_boot,rel_len_wald,cover_cond,cover_boot,cover_wald\n";
    for (const auto& r : rows) {
        out << fixed(r.p1, 1) << ',' << fixed(r.p2, 1);
        if (!r.ok()) {
            out << ",,,,,,,,\n";
            continue;
        }
        for (double x : {r.tbias_cond, r.tbias_uncond, r.rel_var, r.rel_len_boot, r.rel_len_wald}) out << ',' << fixed(x, 2);
        for (double x : {r.cover_cond, r.cover_boot, r.cover_wald}) out << ',' << fixed(x, 4);
        out << '\n';
    }
}

void write_releff_csv(std::ostream& out, const std::vector<ReleffPoint>& points) {
    out << "n1,probability,trace_half\n";
    for (const auto& pt : points) out << pt.n1 << ',' << format_number(pt.probability) << ',' << format_number(pt.trace_half) << '\n';
}

}  // namespace rarinf
