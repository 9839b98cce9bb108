#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "rarinf/exact_engine.hpp"
#include "rarinf/inference.hpp"
#include "rarinf/io.hpp"
#include "rarinf/parallel.hpp"
#include "rarinf/study.hpp"

namespace rarinf::cli {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateArm:
        case ErrorKind::BoundaryEstimate:
        case ErrorKind::ZeroProbabilityCondition:
        case ErrorKind::AllMassDegenerate:
        case ErrorKind::TooFewAdmissible:
        case ErrorKind::InsufficientConditionalReplicates:
            return degenerate;
        case ErrorKind::NoInteriorSolution:
            return solver_failure;
        case ErrorKind::InvalidArgument:
        case ErrorKind::HorizonExceeded:
        case ErrorKind::Config:
            return config_error;
    }
    return config_error;
}

int default_threads() {
    if (const char* env = std::getenv("RARINF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return resolve_threads(0);
}

DesignSpec RunConfig::design_spec() const {
    DesignSpec d;
    d.rule = parse_rule(design);
    d.alpha = alpha;
    d.beta = beta;
    d.horizon = n;
    if (block && *block > 0) d.initializer = PermutedBlockInit{*block};
    try {
        d.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    return d;
}

ProbPair RunConfig::probabilities() const {
    if (!p1 || !p2) fail(ErrorKind::Config, command + " needs --p1 and --p2");
    try {
        return ProbPair::make(*p1, *p2);
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
}

Outcome RunConfig::outcome() const {
    if (!s1 || !s2 || !n1) fail(ErrorKind::Config, command + " needs --s1, --s2 and --n1");
    const Outcome o{*s1, *s2, *n1, n};
    if (!o.valid()) fail(ErrorKind::Config, "outcome must satisfy 0 <= s1 <= n1, 0 <= s2 <= n - n1, 0 <= n1 <= n");
    return o;
}

CiSpec RunConfig::ci_spec() const {
    CiSpec s;
    s.level = level;
    s.method = parse_method(method);
    if (mode == "mc")
        s.mode = MonteCarloMode{replicates, seed};
    else
        s.mode = ExactMode{};
    s.min_conditional_replicates = min_bc;
    s.threads = threads;
    try {
        s.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    return s;
}

void RunConfig::validate() {
    if (!table.empty()) {
        const auto dash = table.rfind('-');
        if (dash == std::string::npos || dash == 0) fail(ErrorKind::Config, "table names look like 'sdd-25' or 'nad-50'");
        design = table.substr(0, dash);
        try {
            n = std::stoi(table.substr(dash + 1));
        } catch (const std::exception&) {
            fail(ErrorKind::Config, "table horizon is not a number: " + table);
        }
        alpha = beta = 1;
    }
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::Config, "--level must lie in (0, 1)");
    if (mode != "exact" && mode != "mc") fail(ErrorKind::Config, "--mode is 'exact' or 'mc'");
    if (replicates < 1) fail(ErrorKind::Config, "--replicates must be positive");
    if (min_bc < 1) fail(ErrorKind::Config, "--min-bc must be positive");
    if (count < 0) fail(ErrorKind::Config, "--count must be non-negative");
    if (threads < 0) fail(ErrorKind::Config, "--threads must be non-negative");
    if (!format.empty() && format != "csv" && format != "json") fail(ErrorKind::Config, "--format is 'csv' or 'json'");
    parse_method(method);
    if (threads == 0) threads = default_threads();
    if (command == "fluoxetine") return;
    if (n < 1) fail(ErrorKind::Config, command + " needs --n (or --table)");
    design_spec();
    if (command == "simulate" || command == "dist" || command == "figure") probabilities();
    if (command == "estimate" || command == "ci") outcome();
    if (command == "study" && (p1.has_value() != p2.has_value())) fail(ErrorKind::Config, "a single cell needs both --p1 and --p2");
}

namespace {

template <class T>
T json_get(const Json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::Config, "config key '" + key + "' has the wrong type");
    }
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
    for (const auto& [raw, v] : j.items()) {
        std::string key = raw;
        for (char& c : key)
            if (c == '_') c = '-';
        if (key == "design") cfg.design = json_get<std::string>(v, key);
        else if (key == "alpha") cfg.alpha = json_get<int>(v, key);
        else if (key == "beta") cfg.beta = json_get<int>(v, key);
        else if (key == "n") cfg.n = json_get<int>(v, key);
        else if (key == "block") cfg.block = json_get<int>(v, key);
        else if (key == "p1") cfg.p1 = json_get<double>(v, key);
        else if (key == "p2") cfg.p2 = json_get<double>(v, key);
        else if (key == "s1") cfg.s1 = json_get<int>(v, key);
        else if (key == "s2") cfg.s2 = json_get<int>(v, key);
        else if (key == "n1") cfg.n1 = json_get<int>(v, key);
        else if (key == "level") cfg.level = json_get<double>(v, key);
        else if (key == "method") cfg.method = json_get<std::string>(v, key);
        else if (key == "mode") cfg.mode = json_get<std::string>(v, key);
        else if (key == "replicates") cfg.replicates = json_get<int>(v, key);
        else if (key == "seed") cfg.seed = json_get<std::uint64_t>(v, key);
        else if (key == "min-bc") cfg.min_bc = json_get<int>(v, key);
        else if (key == "threads") cfg.threads = json_get<int>(v, key);
        else if (key == "count") cfg.count = json_get<int>(v, key);
        else if (key == "table") cfg.table = json_get<std::string>(v, key);
        else if (key == "out") cfg.out = json_get<std::string>(v, key);
        else if (key == "format") cfg.format = json_get<std::string>(v, key);
        else fail(ErrorKind::Config, "unknown config key '" + raw + "'");
    }
}

namespace {

std::string format_or(const RunConfig& cfg, const char* fallback) { return cfg.format.empty() ? fallback : cfg.format; }

void json_only(const RunConfig& cfg) {
    if (!cfg.format.empty() && cfg.format != "json") fail(ErrorKind::Config, cfg.command + " emits JSON only");
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

Json header(const RunConfig& cfg) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = cfg.command;
    return j;
}

StudyOptions study_options(const RunConfig& cfg) {
    StudyOptions o;
    o.alpha = 2.0 * (1.0 - cfg.level);
    if (cfg.mode == "mc")
        o.mode = MonteCarloMode{cfg.replicates, cfg.seed};
    else
        o.mode = ExactMode{};
    o.min_conditional_replicates = cfg.min_bc;
    o.threads = cfg.threads;
    return o;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const DesignSpec d = cfg.design_spec();
    const ProbPair p = cfg.probabilities();
    std::vector<Outcome> trials(static_cast<std::size_t>(cfg.count));
    parallel_for(trials.size(), cfg.threads, [&](std::size_t t) { trials[t] = simulate_trial(d, p, cfg.seed, t); });
    if (format_or(cfg, "csv") == "csv") {
        write_outcomes_csv(out, trials);
    } else {
        Json j = header(cfg);
        j["design"] = to_json(d);
        j["p"] = to_json(p);
        j["seed"] = cfg.seed;
        Json rows = Json::array();
        for (const auto& o : trials) rows.push_back(to_json(o));
        j["trials"] = std::move(rows);
        emit(out, j);
    }
    return ok;
}

int cmd_dist(const RunConfig& cfg, std::ostream& out) {
    const JointDist jd = joint_distribution(cfg.design_spec(), cfg.probabilities());
    if (format_or(cfg, "csv") == "csv")
        write_joint_csv(out, jd);
    else
        emit(out, joint_to_json(jd));
    return ok;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
    json_only(cfg);
    const DesignSpec d = cfg.design_spec();
    const Outcome o = cfg.outcome();
    const DesignLaw law(d);
    const ProbPair hat = umle(o);
    const CmleOptions opts;
    const CmleResult tilde = cmle(law, o, opts);
    Json j = header(cfg);
    j["design"] = to_json(d);
    j["outcome"] = to_json(o);
    j["umle"] = to_json(hat);
    j["cmle"] = cmle_report(d, o, tilde, opts);
    j["information"] = {
        {"evaluated_at", "umle"},
        {"unconditional_observed", to_json(unconditional_observed_info(o))},
        {"unconditional_expected", to_json(unconditional_expected_info(law, hat))},
        {"conditional_expected", to_json(conditional_expected_info(law, hat, o.n1))},
        {"conditional_observed", to_json(conditional_observed_info(law, o))},
    };
    j["relative_efficiency"] = to_json(relative_efficiency(law, hat, o.n1));
    const Vec2 bias = conditional_bias(law, hat, o.n1);
    j["conditional_bias"] = Json::array({bias(0), bias(1)});
    emit(out, j);
    return ok;
}

int cmd_ci(const RunConfig& cfg, std::ostream& out) {
    const DesignSpec d = cfg.design_spec();
    const Outcome o = cfg.outcome();
    const CiSpec spec = cfg.ci_spec();
    const DesignLaw law(d);
    const CiPair ci = confidence_interval(law, o, spec);
    if (format_or(cfg, "json") == "csv") {
        out << "method,arm,level,lower,upper\n";
        for (int k = 0; k < 2; ++k) {
            out << method_name(ci.method) << ',' << k + 1 << ',' << format_number(spec.level) << ','
                << format_number(ci.arms[k].lower) << ',' << format_number(ci.arms[k].upper) << '\n';
        }
    } else {
        Json j = header(cfg);
        j["design"] = to_json(d);
        j["outcome"] = to_json(o);
        j["spec"] = to_json(spec);
        j["interval"] = to_json(ci);
        emit(out, j);
    }
    return ok;
}

int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const DesignSpec d = cfg.design_spec();
    const StudyOptions opts = study_options(cfg);
    std::vector<ProbPair> grid;
    if (cfg.p1)
        grid.push_back(cfg.probabilities());
    else
        grid = paper_grid();
    const auto rows = study_table(StudyEngine(d, opts), grid);
    const StudyProvenance prov{d, cfg.mode, cfg.mode == "mc" ? cfg.seed : 0};
    if (format_or(cfg, "csv") == "csv") {
        write_study_csv(out, prov, rows);
    } else {
        Json j = header(cfg);
        j["design"] = to_json(d);
        j["mode"] = cfg.mode;
        j["seed"] = prov.seed;
        j["alpha"] = opts.alpha;
        Json arr = Json::array();
        for (const auto& r : rows) arr.push_back(to_json(r));
        j["rows"] = std::move(arr);
        emit(out, j);
    }
    if (!cfg.table.empty()) {
        if (!cfg.out.empty()) {
            std::ofstream rounded(cfg.out + ".rounded.csv");
            write_study_rounded(rounded, rows);
        } else {
            err << "# " << cfg.table << " at published precision\n";
            write_study_rounded(err, rows);
        }
    }
    for (const auto& r : rows)
        if (!r.ok()) err << "warning: cell (" << r.p1 << ", " << r.p2 << "): " << r.error << '\n';
    return ok;
}

int cmd_figure(const RunConfig& cfg, std::ostream& out) {
    const DesignSpec d = cfg.design_spec();
    const ProbPair p = cfg.probabilities();
    const auto pts = releff_histogram(d, p);
    if (format_or(cfg, "csv") == "csv") {
        write_releff_csv(out, pts);
    } else {
        Json j = header(cfg);
        j["design"] = to_json(d);
        j["p"] = to_json(p);
        Json arr = Json::array();
        for (const auto& pt : pts) arr.push_back({{"n1", pt.n1}, {"probability", pt.probability}, {"trace_half", pt.trace_half}});
        j["points"] = std::move(arr);
        emit(out, j);
    }
    return ok;
}

int cmd_fluoxetine(const RunConfig& cfg, std::ostream& out) {
    json_only(cfg);
    Json j = to_json(fluoxetine_case_study(cfg.block.value_or(6), study_options(cfg)));
    j["command"] = cfg.command;
    emit(out, j);
    return ok;
}

namespace {

using Overlay = std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>>;

template <class T>
void bind_flag(CLI::App& app, Overlay& ov, RunConfig& flags, const std::string& name, T RunConfig::*field,
          const std::string& help) {
    CLI::Option* opt = app.add_option("--" + name, flags.*field, help);
    ov.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; });
}

void add_shared(CLI::App& app, Overlay& ov, RunConfig& flags) {
    bind_flag(app, ov, flags, "design", &RunConfig::design, "rpw | sdd | nad | opt-sd | opt-or | opt-rr");
    bind_flag(app, ov, flags, "alpha", &RunConfig::alpha, "urn: initial balls per arm");
    bind_flag(app, ov, flags, "beta", &RunConfig::beta, "urn: balls added per response");
    bind_flag(app, ov, flags, "n", &RunConfig::n, "number of subjects");
    bind_flag(app, ov, flags, "block", &RunConfig::block, "permuted block initializer length");
    bind_flag(app, ov, flags, "p1", &RunConfig::p1, "arm 1 success probability");
    bind_flag(app, ov, flags, "p2", &RunConfig::p2, "arm 2 success probability");
    bind_flag(app, ov, flags, "s1", &RunConfig::s1, "arm 1 successes");
    bind_flag(app, ov, flags, "s2", &RunConfig::s2, "arm 2 successes");
    bind_flag(app, ov, flags, "n1", &RunConfig::n1, "subjects on arm 1");
    bind_flag(app, ov, flags, "level", &RunConfig::level, "per-arm confidence level");
    bind_flag(app, ov, flags, "method", &RunConfig::method, "wald | uncond | cond");
    bind_flag(app, ov, flags, "mode", &RunConfig::mode, "exact | mc");
    bind_flag(app, ov, flags, "replicates", &RunConfig::replicates, "Monte Carlo bootstrap replicates");
    bind_flag(app, ov, flags, "seed", &RunConfig::seed, "random seed");
    bind_flag(app, ov, flags, "min-bc", &RunConfig::min_bc, "minimum retained conditional replicates");
    bind_flag(app, ov, flags, "threads", &RunConfig::threads, "worker threads (default RARINF_THREADS or all cores)");
    bind_flag(app, ov, flags, "count", &RunConfig::count, "simulate: number of trials");
    bind_flag(app, ov, flags, "table", &RunConfig::table, "study: table name such as sdd-25, rpw-25, nad-50");
    bind_flag(app, ov, flags, "out", &RunConfig::out, "output file (default stdout)");
    bind_flag(app, ov, flags, "format", &RunConfig::format, "csv | json");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact inference for two-arm response-adaptive designs", "rarinf"};
    app.require_subcommand(1);
    RunConfig flags;
    Overlay overlay;
    std::string config_path;
    const char* commands[][2] = {
        {"simulate", "simulate trials and write their outcomes"},
        {"dist", "exact joint law of (S1, S2, N1)"},
        {"estimate", "UMLE, CMLE and information matrices for one outcome"},
        {"ci", "confidence intervals for one outcome"},
        {"study", "bias, variance, length and coverage table over a probability grid"},
        {"figure", "relative-efficiency histogram data"},
        {"fluoxetine", "fluoxetine trial case study"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        add_shared(*sub, overlay, flags);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        RunConfig cfg;
        cfg.command = app.get_subcommands().front()->get_name();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) fail(ErrorKind::Config, "cannot read config file " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            apply_config_json(cfg, buf.str());
        }
        for (const auto& [opt, copy] : overlay)
            if (opt->count() > 0) copy(cfg, flags);
        cfg.validate();

        std::ofstream file;
        if (!cfg.out.empty()) {
            file.open(cfg.out);
            if (!file) fail(ErrorKind::Config, "cannot write " + cfg.out);
        }
        std::ostream& dst = cfg.out.empty() ? out : file;
        if (cfg.command == "simulate") return cmd_simulate(cfg, dst);
        if (cfg.command == "dist") return cmd_dist(cfg, dst);
        if (cfg.command == "estimate") return cmd_estimate(cfg, dst);
        if (cfg.command == "ci") return cmd_ci(cfg, dst);
        if (cfg.command == "study") return cmd_study(cfg, dst, err);
        if (cfg.command == "figure") return cmd_figure(cfg, dst);
        return cmd_fluoxetine(cfg, dst);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    }
}

}  // namespace rarinf::cli
