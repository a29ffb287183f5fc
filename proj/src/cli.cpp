#include "hypoco/cli.hpp"

#include "hypoco/assumptions.hpp"
#include "hypoco/error.hpp"
#include "hypoco/rates.hpp"
#include "hypoco/simulate.hpp"
#include "hypoco/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

namespace hypoco {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<double> kTheta1Grid = {1.1, 1.5, 2.0, 4.0};

std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be an object");
    std::string bad;
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty()) throw ValidationError("unknown keys in " + where + ": " + bad);
}

struct RunSection {
    std::size_t n = 2;
    std::optional<double> dt;
    std::vector<double> T = {10.0};
    std::vector<double> times = {0.5, 1.0, 2.0, 4.0};
    std::size_t outer = 10000;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Method method = Method::gauss_hermite;
    Scheme scheme = Scheme::euler_maruyama;
    double theta1 = 2.0;
    std::size_t record_every = 1;
    std::vector<std::string> checks;
    std::size_t test_pairs = 5;
    std::optional<std::size_t> test_dim;
    CorpusKind test_kind = CorpusKind::mixed;
    int nodes = 40;
    std::size_t samples = 1'000'000;
    std::size_t mean_samples = 100'000;
    RouteChoice route = RouteChoice::automatic;
    json f = "y1";
    std::vector<double> x0, y0;
};

struct OutputSection {
    std::string dir;
    std::vector<std::string> formats;
};

struct RunConfig {
    ModelSpec model;
    RunSection run;
    OutputSection output;
};

template <class T>
T get_positive_int(const json& j, const std::string& key) {
    if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
        throw ValidationError("run." + key + " must be an integer");
    const double v = j.get<double>();
    if (v < 1) throw ValidationError("run." + key + " must be >= 1");
    return static_cast<T>(v);
}

std::vector<double> number_list(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ValidationError("run." + key + " must be a number or a list of numbers");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number()) throw ValidationError("run." + key + " must contain numbers only");
        v.push_back(x.get<double>());
    }
    return v;
}

CorpusKind corpus_kind_from_string(const std::string& s) {
    if (s == "mixed") return CorpusKind::mixed;
    if (s == "x_only") return CorpusKind::x_only;
    if (s == "y_only") return CorpusKind::y_only;
    throw ValidationError("unknown test_kind '" + s + "'");
}

RunConfig parse_config(const json& j) {
    reject_unknown(j, {"schema", "model", "run", "output"}, "config");
    if (!j.contains("schema")) throw ValidationError("config is missing the \"schema\" key");
    if (j.at("schema") != 1) throw ValidationError("unsupported config schema " + j.at("schema").dump() + " (expected 1)");
    if (!j.contains("model")) throw ValidationError("config is missing the \"model\" key");
    RunConfig c;
    c.model = ModelSpec::from_json(j.at("model"));
    if (j.contains("run")) {
        const json& r = j.at("run");
        reject_unknown(r,
                       {"n", "dt", "T", "times", "outer", "reps", "seed", "workers", "method", "scheme", "theta1",
                        "record_every", "checks", "test_pairs", "test_dim", "test_kind", "nodes", "samples",
                        "mean_samples", "route", "f", "x0", "y0"},
                       "run");
        auto& R = c.run;
        try {
            if (r.contains("n")) R.n = get_positive_int<std::size_t>(r.at("n"), "n");
            if (r.contains("dt")) R.dt = r.at("dt").get<double>();
            if (r.contains("T")) R.T = number_list(r.at("T"), "T");
            if (r.contains("times")) R.times = number_list(r.at("times"), "times");
            if (r.contains("outer")) R.outer = get_positive_int<std::size_t>(r.at("outer"), "outer");
            if (r.contains("reps")) R.reps = get_positive_int<std::size_t>(r.at("reps"), "reps");
            if (r.contains("seed")) {
                if (!r.at("seed").is_number_unsigned()) throw ValidationError("run.seed must be a non-negative integer");
                R.seed = r.at("seed").get<std::uint64_t>();
            }
            if (r.contains("workers")) R.workers = get_positive_int<unsigned>(r.at("workers"), "workers");
            if (r.contains("method")) R.method = method_from_string(r.at("method").get<std::string>());
            if (r.contains("scheme")) R.scheme = scheme_from_string(r.at("scheme").get<std::string>());
            if (r.contains("theta1")) R.theta1 = r.at("theta1").get<double>();
            if (r.contains("record_every"))
                R.record_every = get_positive_int<std::size_t>(r.at("record_every"), "record_every");
            if (r.contains("checks")) R.checks = r.at("checks").get<std::vector<std::string>>();
            if (r.contains("test_pairs")) R.test_pairs = get_positive_int<std::size_t>(r.at("test_pairs"), "test_pairs");
            if (r.contains("test_dim")) R.test_dim = get_positive_int<std::size_t>(r.at("test_dim"), "test_dim");
            if (r.contains("test_kind")) R.test_kind = corpus_kind_from_string(r.at("test_kind").get<std::string>());
            if (r.contains("nodes")) R.nodes = get_positive_int<int>(r.at("nodes"), "nodes");
            if (r.contains("samples")) R.samples = get_positive_int<std::size_t>(r.at("samples"), "samples");
            if (r.contains("mean_samples"))
                R.mean_samples = get_positive_int<std::size_t>(r.at("mean_samples"), "mean_samples");
            if (r.contains("route")) R.route = route_choice_from_string(r.at("route").get<std::string>());
            if (r.contains("f")) R.f = r.at("f");
            if (r.contains("x0")) R.x0 = number_list(r.at("x0"), "x0");
            if (r.contains("y0")) R.y0 = number_list(r.at("y0"), "y0");
        } catch (const json::exception& e) {
            throw ValidationError(std::string("invalid run section: ") + e.what());
        }
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown(o, {"dir", "formats"}, "output");
        try {
            if (o.contains("dir")) c.output.dir = o.at("dir").get<std::string>();
            if (o.contains("formats")) c.output.formats = o.at("formats").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("invalid output section: ") + e.what());
        }
        for (const auto& f : c.output.formats)
            if (f != "csv" && f != "json") throw ValidationError("unknown output format '" + f + "'");
    }
    return c;
}

// "x1", "y2", "tanh(x1)", "sin(y1)", "cos(x2)", or a {n, expr} object.
CylinderFunction parse_function(const json& j, std::size_t n) {
    if (j.is_object()) {
        auto f = CylinderFunction::from_json(j);
        if (f.n() > n) throw ValidationError("run.f base dimension exceeds n");
        return f;
    }
    if (!j.is_string()) throw ValidationError("run.f must be a string or an object");
    static const std::regex re(R"(^(?:(sin|cos|tanh)\()?([xy])([0-9]+)\)?$)");
    const std::string s = j.get<std::string>();
    std::smatch m;
    if (!std::regex_match(s, m, re) || (m[1].matched != (s.back() == ')')))
        throw ValidationError("cannot parse run.f '" + s + "'");
    const std::size_t i = std::stoul(m[3].str());
    if (i < 1 || i > n) throw ValidationError("run.f index out of range 1.." + std::to_string(n));
    if (n > static_cast<std::size_t>(Expr::kMaxDim / 2))
        throw ValidationError("test functions support n <= " + std::to_string(Expr::kMaxDim / 2));
    Expr v = Expr::variable(static_cast<int>(m[2] == "x" ? i - 1 : n + i - 1));
    if (m[1].matched) v = Expr::unary(m[1] == "sin" ? Op::sin : (m[1] == "cos" ? Op::cos : Op::tanh), v);
    return CylinderFunction(n, v);
}

struct Cli {
    std::string command;
    std::string config;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    bool strict = false;
    bool no_timestamp = false;
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

class Runner {
public:
    Runner(Cli cli, RunConfig cfg, std::ostream& out, std::ostream& err)
        : cli_(std::move(cli)), cfg_(std::move(cfg)), out_(out), err_(err) {
        if (cli_.n) cfg_.run.n = *cli_.n;
        if (cli_.seed) cfg_.run.seed = *cli_.seed;
        if (cli_.workers) cfg_.run.workers = *cli_.workers;
        if (cfg_.run.n < 1) throw ValidationError("n must be >= 1");
        if (cfg_.run.workers < 1) throw ValidationError("workers must be >= 1");
        if (!(cfg_.run.theta1 > 1.0)) throw ValidationError("theta1 must be > 1");
        if (cfg_.run.dt && !(*cfg_.run.dt > 0.0)) throw ValidationError("dt must be > 0");
    }

    int run() {
        const std::string& c = cli_.command;
        if (c == "check") return do_check();
        if (c == "rates") return do_rates();
        if (c == "simulate") return do_simulate();
        if (c == "decay") return do_decay();
        if (c == "ergodic") return do_ergodic();
        return do_verify();
    }

private:
    Cli cli_;
    RunConfig cfg_;
    std::ostream& out_;
    std::ostream& err_;

    // Destination path for this command's main artifact; empty means stdout.
    std::string target(const std::string& ext) const {
        if (!cli_.out.empty()) return cli_.out;
        if (!cfg_.output.dir.empty()) return (fs::path(cfg_.output.dir) / (cli_.command + "." + ext)).string();
        return {};
    }

    bool wants(const std::string& fmt) const {
        return cfg_.output.formats.empty() ||
               std::find(cfg_.output.formats.begin(), cfg_.output.formats.end(), fmt) != cfg_.output.formats.end();
    }

    void emit(const std::string& text, const std::string& ext, bool echo_stdout_if_no_path = true) {
        const std::string path = target(ext);
        if (path.empty()) {
            if (echo_stdout_if_no_path) out_ << text;
            return;
        }
        const fs::path p(path);
        if (p.has_parent_path()) {
            std::error_code ec;
            fs::create_directories(p.parent_path(), ec);
        }
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ValidationError("cannot write output file '" + path + "'");
        os << text;
        if (!os) throw ValidationError("failed writing output file '" + path + "'");
        err_ << "wrote " << path << "\n";
    }

    std::string metadata(double dt, const std::vector<std::pair<std::string, std::string>>& extra) const {
        std::ostringstream os;
        os << "# spec_hash: " << cfg_.model.hash() << "\n";
        os << "# seed: " << cfg_.run.seed << "\n";
        os << "# n: " << cfg_.run.n << "\n";
        os << "# dt: " << num(dt) << "\n";
        for (const auto& [k, v] : extra) os << "# " << k << ": " << v << "\n";
        if (!cli_.no_timestamp) os << "# timestamp: " << timestamp() << "\n";
        return os.str();
    }

    AssumptionReport assumptions() const { return check(cfg_.model, cfg_.run.route); }

    // Constants when the report has a route; not-certifiable and missing routes give nullopt.
    std::optional<HypocoercivityConstants> rates_for(const AssumptionReport& rep) const {
        if (rep.route == Route::none) return std::nullopt;
        try {
            return constants(cfg_.model, rep);
        } catch (const NotCertifiableError&) {
            return std::nullopt;
        }
    }

    std::optional<double> theta2_for(const std::optional<HypocoercivityConstants>& k, double theta1) const {
        if (!k) return std::nullopt;
        try {
            const double t = theta2(*k, theta1);
            if (std::isfinite(t) && t > 0.0) return t;
        } catch (const NotCertifiableError&) {
        }
        return std::nullopt;
    }

    json rates_json(const std::optional<HypocoercivityConstants>& k) const {
        if (!k) return nullptr;
        json j = k->to_json();
        json table = json::array();
        for (double t1 : kTheta1Grid) {
            json row{{"theta1", t1}};
            row["theta2"] = theta2_for(k, t1) ? json(*theta2_for(k, t1)) : json(nullptr);
            try {
                row["theta2_derived"] = finite_or_null(theta2_derived(*k, t1));
            } catch (const NotCertifiableError&) {
                row["theta2_derived"] = nullptr;
            }
            table.push_back(row);
        }
        j["theta2_table"] = table;
        return j;
    }

    json report(const AssumptionReport& rep, const std::optional<HypocoercivityConstants>& k, json checks) const {
        json j;
        j["schema"] = 1;
        j["spec_hash"] = cfg_.model.hash();
        j["assumptions"] = rep.to_json();
        j["rates"] = rates_json(k);
        j["checks"] = std::move(checks);
        return j;
    }

    int do_check() {
        const auto rep = assumptions();
        const auto k = rates_for(rep);
        out_ << summary_table(rep);
        if (wants("json")) emit(report(rep, k, nullptr).dump(2) + "\n", "json", false);
        // Strict mode requires the hypocoercivity certificate; K4/K5 only concern the weak solution.
        if (cli_.strict && !rep.hypocoercive) {
            err_ << "strict: hypocoercivity not certified";
            for (const auto& e : rep.entries)
                if (e.verdict == Verdict::fail) err_ << ", " << e.name << " failed";
            err_ << "\n";
            return exit_strict;
        }
        return exit_ok;
    }

    int do_rates() {
        const auto rep = assumptions();
        const auto k = rates_for(rep);
        out_ << "route: " << to_string(rep.route) << "\n";
        if (!k) {
            out_ << "constants: null (not certifiable)\n";
        } else {
            out_ << "c_S: " << num(k->c_S) << "  c_S_derived: " << num(k->c_S_derived) << "\n";
            out_ << "c_A: " << num(k->c_A) << "  c_A_derived: " << num(k->c_A_derived) << "\n";
            out_ << "c1: " << num(k->c1) << "  c2: " << num(k->c2) << "  c_phi2: " << num(k->c_phi2) << "\n";
        }
        out_ << "theta1,theta2,theta2_derived\n";
        const json rj = rates_json(k);
        for (std::size_t i = 0; i < kTheta1Grid.size(); ++i) {
            out_ << num(kTheta1Grid[i]) << ",";
            if (rj.is_null()) {
                out_ << "null,null\n";
                continue;
            }
            const auto& row = rj["theta2_table"][i];
            out_ << (row["theta2"].is_null() ? "null" : num(row["theta2"].get<double>())) << ","
                 << (row["theta2_derived"].is_null() ? "null" : num(row["theta2_derived"].get<double>())) << "\n";
        }
        if (wants("json")) emit(report(rep, k, nullptr).dump(2) + "\n", "json", false);
        return exit_ok;
    }

    double dt_for(const GalerkinSystem& sys) const {
        const double dt = cfg_.run.dt ? *cfg_.run.dt : default_dt(sys);
        if (cfg_.run.scheme == Scheme::euler_maruyama && !explicit_stable(sys, dt))
            err_ << "warning: dt = " << num(dt)
                 << " violates the explicit linear stability bound; consider scheme semi_implicit_linear\n";
        return dt;
    }

    int do_simulate() {
        const auto& R = cfg_.run;
        const GalerkinSystem sys = build(cfg_.model, R.n);
        if (R.T.size() != 1) throw ValidationError("simulate takes a single horizon T");
        std::vector<double> x0 = R.x0, y0 = R.y0;
        if (x0.empty()) x0.assign(R.n, 0.0);
        if (y0.empty()) y0.assign(R.n, 0.0);
        if (x0.size() != R.n || y0.size() != R.n) throw ValidationError("x0 and y0 must have n entries");
        const double dt = dt_for(sys);
        const Trajectory tr = integrate(sys, x0, y0, dt, R.T[0], R.seed, R.scheme, R.record_every);
        std::ostringstream os;
        os << metadata(dt, {{"scheme", to_string(R.scheme)}, {"T", num(R.T[0])}});
        os << "t";
        for (std::size_t k = 1; k <= R.n; ++k) os << ",x" << k;
        for (std::size_t k = 1; k <= R.n; ++k) os << ",y" << k;
        os << "\n";
        const std::size_t w = 2 * R.n;
        for (std::size_t r = 0; r < tr.t.size(); ++r) {
            os << num(tr.t[r]);
            for (std::size_t c = 0; c < w; ++c) os << "," << num(tr.states[r * w + c]);
            os << "\n";
        }
        emit(os.str(), "csv");
        return exit_ok;
    }

    std::optional<RatesInput> rates_input(std::vector<std::pair<std::string, std::string>>& meta) const {
        const auto rep = assumptions();
        const auto k = rates_for(rep);
        const auto t2 = theta2_for(k, cfg_.run.theta1);
        meta.push_back({"route", to_string(rep.route)});
        meta.push_back({"theta1", num(cfg_.run.theta1)});
        meta.push_back({"theta2", t2 ? num(*t2) : "null"});
        if (k) {
            meta.push_back({"c_S", num(k->c_S)});
            meta.push_back({"c_A", num(k->c_A)});
            meta.push_back({"c1", num(k->c1)});
        }
        if (!t2) return std::nullopt;
        return RatesInput{cfg_.run.theta1, *t2};
    }

    int do_decay() {
        const auto& R = cfg_.run;
        const GalerkinSystem sys = build(cfg_.model, R.n);
        const CylinderFunction f = parse_function(R.f, R.n);
        const double dt = dt_for(sys);
        std::vector<std::pair<std::string, std::string>> meta = {{"scheme", to_string(R.scheme)},
                                                                 {"outer", std::to_string(R.outer)}};
        MonteCarloOptions mo;
        mo.scheme = R.scheme;
        mo.workers = R.workers;
        mo.rates = rates_input(meta);
        const auto est = decay_estimate(sys, f, R.times, R.outer, dt, R.seed, mo);
        std::ostringstream os;
        os << metadata(dt, meta);
        os << "t,norm_sq_est,std_err,bound\n";
        for (const auto& row : est.rows)
            os << num(row.t) << "," << num(row.norm_sq_est) << "," << num(row.std_err) << ","
               << (row.bound ? num(*row.bound) : "") << "\n";
        emit(os.str(), "csv");
        return exit_ok;
    }

    int do_ergodic() {
        const auto& R = cfg_.run;
        const GalerkinSystem sys = build(cfg_.model, R.n);
        const CylinderFunction f = parse_function(R.f, R.n);
        const double dt = dt_for(sys);
        std::vector<std::pair<std::string, std::string>> meta = {{"scheme", to_string(R.scheme)},
                                                                 {"reps", std::to_string(R.reps)}};
        ErgodicOptions eo;
        eo.scheme = R.scheme;
        eo.workers = R.workers;
        eo.mean_samples = R.mean_samples;
        eo.rates = rates_input(meta);
        for (double T : R.T)
            if (!(T > 0.0)) throw ValidationError("T must be > 0");
        std::ostringstream body;
        for (double T : R.T) {
            const auto r = ergodic_average(sys, f, T, dt, R.seed, R.reps, eo);
            body << num(r.T) << "," << num(r.lhs_est) << "," << num(r.lhs_se) << ","
                 << (r.rhs_bound ? num(*r.rhs_bound) : "") << "\n";
        }
        emit(metadata(dt, meta) + "T,lhs_est,lhs_se,rhs_bound\n" + body.str(), "csv");
        return exit_ok;
    }

    int do_verify() {
        const auto& R = cfg_.run;
        std::vector<std::string> names = R.checks.empty() ? check_names() : R.checks;
        for (const auto& nm : names)
            if (std::find(check_names().begin(), check_names().end(), nm) == check_names().end())
                throw ValidationError("unknown check '" + nm + "'");
        const GalerkinSystem sys = build(cfg_.model, R.n);
        const std::size_t fn = R.test_dim ? *R.test_dim : R.n;
        VerifyOptions vo;
        vo.method = R.method;
        vo.nodes = R.nodes;
        vo.samples = R.samples;
        vo.seed = R.seed;
        vo.workers = R.workers;
        const auto rep = assumptions();
        const auto k = rates_for(rep);
        if (k) vo.constants = k;

        // micro needs y-only functions, macro and n_reg x-only ones.
        auto kind_for = [&](const std::string& nm) {
            if (nm == "micro") return CorpusKind::y_only;
            if (nm == "macro" || nm == "n_reg") return CorpusKind::x_only;
            return R.test_kind;
        };
        json checks = json::array();
        for (CorpusKind kind : {CorpusKind::mixed, CorpusKind::x_only, CorpusKind::y_only}) {
            std::vector<std::string> group;
            for (const auto& nm : names)
                if (kind_for(nm) == kind) group.push_back(nm);
            if (group.empty()) continue;
            const auto pairs = make_test_pairs(sys, fn, R.test_pairs, R.seed, kind);
            for (const auto& r : run_checks(group, cfg_.model, R.n, pairs, vo)) {
                out_ << std::left << std::setw(14) << r.name << " pair " << r.pair << "  " << to_string(r.verdict)
                     << "  lhs " << num(r.lhs) << "  rhs " << num(r.rhs) << "\n";
                checks.push_back(r.to_json());
            }
        }
        if (wants("json")) emit(report(rep, k, checks).dump(2) + "\n", "json", false);
        return exit_ok;
    }
};

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral-Galerkin simulation and certification of degenerate Langevin dynamics"};
    app.set_help_all_flag("--help-all");
    app.require_subcommand(1, 1);
    Cli cli;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    unsigned workers = 0;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"check", "evaluate the assumption table"},
        {"rates", "compute hypocoercivity constants and the theta2 table"},
        {"simulate", "integrate one Galerkin trajectory"},
        {"decay", "estimate the L2 decay of the semigroup"},
        {"ergodic", "estimate ergodic-average errors"},
        {"verify", "run quadrature / Monte Carlo identity checks"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--config", cli.config, "JSON config path")->required();
        s->add_option("--n", n, "number of Galerkin modes")->check(CLI::PositiveNumber);
        s->add_option("--seed", seed, "random seed");
        s->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        s->add_option("--out", cli.out, "output file");
        s->add_flag("--no-timestamp", cli.no_timestamp, "omit the timestamp metadata line");
        if (name == "check") s->add_flag("--strict", cli.strict, "exit 3 unless hypocoercivity is certified");
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    }
    for (auto* s : subs) {
        if (!s->parsed()) continue;
        cli.command = s->get_name();
        if (s->count("--n")) cli.n = n;
        if (s->count("--seed")) cli.seed = seed;
        if (s->count("--workers")) cli.workers = workers;
    }

    try {
        std::ifstream is(cli.config, std::ios::binary);
        if (!is) throw ValidationError("cannot open config file '" + cli.config + "'");
        json j;
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ValidationError("config '" + cli.config + "' is not valid JSON: " + e.what());
        }
        RunConfig cfg = parse_config(j);
        Runner runner(cli, std::move(cfg), out, err);
        return runner.run();
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const json::exception& e) {
        err << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}

} // namespace hypoco
