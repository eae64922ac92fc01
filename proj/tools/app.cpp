#include "app.hpp"

#include <kgnls/birkhoff.hpp>
#include <kgnls/divisors.hpp>
#include <kgnls/errors.hpp>
#include <kgnls/frequencies.hpp>
#include <kgnls/kam_schedule.hpp>
#include <kgnls/torus_lab.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

namespace kgnls::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
    return out;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::map<std::string, json>& defaults_table() {
    static const std::map<std::string, json> table = {
        {"divisor-scan", {{"J", {1, 2, 3}}, {"c_list", {25.0, 100.0, 400.0}}, {"M", 8}, {"kappa", 1.0}, {"kmax_cap", 8}, {"R", 1e-2}}},
        {"measure",
         {{"J", {1, 2, 3}}, {"c", 10.0}, {"M", 8}, {"R", 3.0}, {"k", {1, -2, 1}}, {"alpha_lo", 0.1}, {"alpha_hi", 1.0},
          {"alpha_points", 5}, {"tau", 1.0}, {"thetas", {0.0, 5.0 / 12.0}}, {"samples", 10000}, {"union_constant", 1.0}}},
        {"birkhoff",
         {{"J", {1, 2, 3}}, {"c", 10.0}, {"M", 8}, {"R_list", {1e-3, 2e-3, 5e-3, 1e-2}}, {"p", 5.0}, {"compute_P0", false}}},
        {"schedule",
         {{"N", 3}, {"tau", 1.0}, {"varsigma", 1.0 / 36.0}, {"r0", 1e-3}, {"C1", 1.0}, {"K1", 0.0}, {"rho_star", 1e-2},
          {"eps0", 1e-25}, {"eps1", -1.0}, {"nu_max", 12}, {"c", 200.0}, {"sigma", 1.0}}},
        {"simulate",
         {{"system", "NLS"}, {"c", 10.0}, {"M", 8}, {"J", {1, 2, 3}}, {"R", 1e-2}, {"T", 100.0}, {"dt", 0.0},
          {"record_every", 100}}},
        {"scaling",
         {{"R", 1e-2}, {"c_list", {120.0, 240.0, 480.0, 960.0}}, {"sigmas", {0.0, 0.5, 1.0}}, {"J", {1}}, {"M", 8}, {"Q", 4},
          {"T", 1000.0}, {"samples", 2001}, {"p", 5.0}}},
        {"report", json::object()},
    };
    return table;
}

json common_defaults(const std::string& experiment) {
    return {{"experiment", experiment}, {"seed", 1}, {"workers", 1}, {"strict", false}};
}

bool same_kind(const json& def, const json& v) {
    if (def.is_boolean()) return v.is_boolean();
    if (def.is_string()) return v.is_string();
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_array()) {
        if (!v.is_array()) return false;
        if (def.empty()) return true;
        return std::all_of(v.begin(), v.end(), [&](const json& e) { return same_kind(def.front(), e); });
    }
    return false;
}

std::string kind_name(const json& def) {
    if (def.is_boolean()) return "boolean";
    if (def.is_string()) return "string";
    if (def.is_number_integer()) return "integer";
    if (def.is_number()) return "number";
    if (def.is_array()) return "array of " + (def.empty() ? std::string("values") : kind_name(def.front()) + "s");
    return "value";
}

std::vector<int> ints(const json& a) { return a.get<std::vector<int>>(); }
std::vector<double> dbls(const json& a) { return a.get<std::vector<double>>(); }

struct Run {
    fs::path dir;
    json cfg;
    std::vector<std::string> artifacts;
    json fits = json::array();
    json extra = json::object();

    std::ofstream open(const std::string& name, bool binary = false) {
        artifacts.push_back(name);
        std::ofstream os(dir / name, binary ? std::ios::binary : std::ios::out);
        if (!os) throw ResourceError("cannot write " + (dir / name).string());
        return os;
    }
    void fit(const std::string& quantity, double fitted, double predicted) {
        fits.push_back({{"quantity", quantity}, {"fitted", fitted}, {"predicted", predicted}});
    }
};

void run_divisor_scan(Run& r) {
    const auto& c = r.cfg;
    const auto J = ints(c["J"]);
    const auto cs = dbls(c["c_list"]);
    const int M = c["M"];
    const DivisorBoundsReport gauge = verify_divisor_bounds(J, cs, M);
    json rows = json::array();
    bool positive = gauge.all_positive;
    std::vector<double> ng;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const FrequencyModel m = build_model(cs[i], J, M, c["R"].get<double>());
        const NonGaugeReport s = nongauge_scan(m, c["kappa"].get<double>(), c["kmax_cap"].get<int>());
        positive = positive && s.min_over_c2 > 0.0;
        ng.push_back(s.min_over_c2);
        json classes = json::object();
        for (const auto& [k, v] : s.class_min_over_c2) classes[to_string(k)] = v;
        rows.push_back({{"c", cs[i]},
                        {"quartic_gauge_min", gauge.rows[i].gauge_min},
                        {"quartic_nongauge_min_over_c2", gauge.rows[i].nongauge_min_over_c2},
                        {"quartic_gauge_witness", gauge.rows[i].gauge_witness.sigma_string()},
                        {"scan_kmax", s.kmax},
                        {"scan_support_radius", s.support_radius},
                        {"scan_min_over_c2", s.min_over_c2},
                        {"scan_witness_k", s.witness.k},
                        {"scan_witness_ell", s.witness.ell},
                        {"scan_pairs", s.scanned},
                        {"class_min_over_c2", classes},
                        {"s8_pairs", s.s8_pairs},
                        {"s8_near_xL", s.s8_near_xL}});
    }
    const double lo = *std::min_element(ng.begin(), ng.end());
    const double hi = *std::max_element(ng.begin(), ng.end());
    json out = {{"J", J}, {"M", M}, {"rows", rows}, {"all_positive", positive},
                {"quartic_nongauge_spread", gauge.nongauge_spread}, {"scan_spread", (hi - lo) / hi}};
    r.open("divisor_scan.json") << out.dump(2) << "\n";
    r.extra["all_positive"] = positive;
    if (!positive) throw AnomalyError("divisor scan found a non-positive minimum");
}

void run_measure(Run& r) {
    const auto& c = r.cfg;
    const auto J = ints(c["J"]);
    const double cc = c["c"];
    const FrequencyModel m = build_model(cc, J, c["M"].get<int>(), c["R"].get<double>());
    const auto k = ints(c["k"]);
    const int npts = c["alpha_points"];
    if (npts < 2) throw ConfigError({"alpha_points: need at least 2"});
    const double lo = c["alpha_lo"], hi = c["alpha_hi"];
    if (!(lo > 0.0 && hi > lo)) throw ConfigError({"alpha_lo/alpha_hi: need 0 < alpha_lo < alpha_hi"});
    std::vector<double> alphas;
    for (int i = 0; i < npts; ++i) alphas.push_back(lo * std::pow(hi / lo, double(i) / (npts - 1)));

    ResonantQuery q;
    q.tau = c["tau"];
    q.samples = c["samples"];
    q.seed = c["seed"];
    q.workers = c["workers"];
    const auto ells = enumerate_ell(k, J, m.M);
    if (ells.empty()) throw ConfigError({"k: no momentum-compatible ell inside the truncation"});
    const IndexPair single = make_index_pair(k, ells.front(), J, cc);
    std::vector<IndexPair> all;
    for (const auto& e : ells)
        if (!(e.empty() && std::all_of(k.begin(), k.end(), [](int x) { return x == 0; }))) all.push_back(make_index_pair(k, e, J, cc));

    auto os = r.open("measure.csv");
    os << "k_id,set,alpha,theta,tau,fraction,ci_lo,ci_hi,samples,seed\n";
    std::string kid;
    for (int x : k) kid += (kid.empty() ? "" : ":") + std::to_string(x);
    auto emit = [&](const std::string& set, double theta, const std::vector<MeasureEstimate>& est) {
        std::vector<double> xs, ys;
        for (const auto& e : est) {
            os << kid << "," << set << "," << fmt(e.alpha) << "," << fmt(theta) << "," << fmt(q.tau) << "," << fmt(e.fraction) << ","
               << fmt(e.ci_lo) << "," << fmt(e.ci_hi) << "," << e.samples << "," << q.seed << "\n";
            if (e.hits > 0) {
                xs.push_back(e.alpha);
                ys.push_back(e.fraction);
            }
        }
        return xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan("");
    };
    q.theta = 0.0;
    r.fit("single_set_slope", emit("single", 0.0, measure_sweep(m, {single}, alphas, q)), 1.0);
    bool below = true;
    for (double th : dbls(c["thetas"])) {
        q.theta = th;
        const auto est = measure_sweep(m, all, alphas, q);
        for (const auto& e : est) below = below && e.fraction <= c["union_constant"].get<double>() * std::pow(e.alpha, 2.0 / (3.0 - th));
        r.fit("union_slope_theta_" + fmt(th), emit("union", th, est), 2.0 / (3.0 - th));
    }
    r.extra["union_below_bound"] = below;
}

void run_birkhoff(Run& r) {
    const auto& c = r.cfg;
    const auto J = ints(c["J"]);
    const int M = c["M"];
    const double cc = c["c"];
    NormalFormOptions o;
    o.compute_P0 = c["compute_P0"];
    NormalFormResult nf;
    if (cc > 0.0) {
        const FrequencyTable f(cc, M);
        nf = solve_cohomological_quartic(build_P(f, M), f, J, o);
    } else {
        nf = solve_cohomological_nls(build_P_NLS(M), J, M, o);
    }
    {
        auto os = r.open("normal_form.json");
        nf.write_json_header(os);
    }
    {
        auto os = r.open("G.txt");
        nf.G.write_text(os);
    }
    std::mt19937_64 gen(c["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(J.size()));
    for (auto& t : theta) t = U(gen);
    SpaceParams sp;
    sp.p = c["p"];
    auto os = r.open("displacement.csv");
    os << "R,displacement\n";
    std::vector<double> xs, ys;
    for (double R : dbls(c["R_list"])) {
        const Eigen::VectorXd xi = Eigen::VectorXd::Constant(theta.size(), R * R);
        const double d = normal_form_displacement(nf.G, xi, J, theta, M, sp);
        os << fmt(R) << "," << fmt(d) << "\n";
        xs.push_back(R);
        ys.push_back(d);
    }
    r.fit("displacement_slope_R", xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan(""), 3.0);
    r.extra["residual"] = nf.residual;
}

void run_schedule(Run& r) {
    const auto& c = r.cfg;
    ScheduleParams p;
    p.N = c["N"];
    p.tau = c["tau"];
    p.varsigma = c["varsigma"];
    p.sigma0 = p.s0 / 40.0;
    p.C1 = c["C1"];
    p.K1 = c["K1"];
    p.r0 = c["r0"];
    p.rho_star = c["rho_star"];
    const double eps0 = c["eps0"], eps1 = c["eps1"];
    const int nu_max = c["nu_max"];
    const KamSchedule s = generate(p, eps0, eps1, nu_max);
    {
        auto os = r.open("schedule.csv");
        write_csv(s, os, 1);
    }
    const double R = std::pow(p.r0, 2.0 / 3.0);
    const PredictedBounds b = predicted_bounds(R, c["c"].get<double>(), c["sigma"].get<double>());
    {
        auto os = r.open("predictions.json");
        write_predictions_json(b, R, c["c"], c["sigma"], os);
    }
    const KamSchedule longer = generate(p, eps0, eps1, std::max(nu_max, 14));
    r.fit("log_eps_growth_factor", log_growth_factor(longer, 4, 12), 4.0 / 3.0);
    const SmallnessReport sm = smallness_check(p, eps0, eps1);
    r.extra["smallness"] = {{"ratio0", sm.ratio0}, {"ratio1", sm.ratio1}, {"passes", sm.passes}};
    r.extra["tail_ratio"] = s.tail_ratio;
}

void run_simulate(Run& r) {
    const auto& c = r.cfg;
    const std::string kind = c["system"];
    const int M = c["M"];
    const TruncatedSystem sys = kind == "KG" ? TruncatedSystem::kg(c["c"].get<double>(), M) : TruncatedSystem::nls(M);
    const auto J = ints(c["J"]);
    const double R = c["R"];
    std::mt19937_64 gen(c["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
    FourierState z(M);
    for (int j : J) {
        if (j < -M || j > M) throw ConfigError({"J: index " + std::to_string(j) + " outside the truncation"});
        z.z_at(j) = std::polar(R, U(gen));
        z.zbar_at(j) = std::conj(z.z_at(j));
    }
    IntegrateOptions io;
    io.dt = c["dt"];
    io.record_every = c["record_every"].get<std::size_t>();
    io.strict = c["strict"];
    const SimulationRecord rec = integrate(sys, z, c["T"].get<double>(), io);
    {
        auto os = r.open("traces.csv");
        os << "t,energy,mass,momentum\n";
        for (std::size_t i = 0; i < rec.times.size(); ++i)
            os << fmt(rec.times[i]) << "," << fmt(rec.energy[i]) << "," << fmt(rec.mass[i]) << "," << fmt(rec.momentum[i]) << "\n";
    }
    {
        auto os = r.open("frames.bin", true);
        write_frames(rec, os);
    }
    auto drift = [](const std::vector<double>& v) {
        double d = 0.0;
        for (double x : v) d = std::max(d, std::abs(x - v.front()));
        return d;
    };
    r.extra["dt"] = rec.dt;
    r.extra["warnings"] = rec.warnings;
    r.extra["mass_drift"] = drift(rec.mass);
    r.extra["momentum_drift"] = drift(rec.momentum);
    r.extra["energy_drift_rel"] = drift(rec.energy) / std::abs(rec.energy.front());
}

void run_scaling(Run& r) {
    const auto& c = r.cfg;
    ScalingOptions o;
    o.J = ints(c["J"]);
    o.M = c["M"];
    o.Q = c["Q"];
    o.T = c["T"];
    o.samples = c["samples"];
    o.params.p = c["p"];
    o.workers = c["workers"];
    const auto sig = dbls(c["sigmas"]);
    const ScalingReport rep = scaling_study(c["R"], dbls(c["c_list"]), sig, o);
    {
        auto os = r.open("scaling.csv");
        write_scaling_csv(rep, os);
    }
    for (std::size_t i = 0; i < sig.size(); ++i) r.fit("distance_slope_c_sigma_" + fmt(sig[i]), rep.slopes[i], 0.0 - 2.0 * sig[i]);
    std::size_t excluded = 0;
    for (const auto& row : rep.rows) excluded += row.admissible && !row.converged ? 1 : 0;
    r.extra["unconverged_rows"] = excluded;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join(problems)), problems_(std::move(problems)) {}

const std::vector<std::string>& experiments() {
    static const std::vector<std::string> names = {"divisor-scan", "measure", "birkhoff", "schedule", "simulate", "scaling", "report"};
    return names;
}

json default_config(const std::string& experiment) {
    const auto& t = defaults_table();
    const auto it = t.find(experiment);
    if (it == t.end()) throw ConfigError({"experiment: unknown kind '" + experiment + "'"});
    json d = common_defaults(experiment);
    d.update(it->second);
    return d;
}

json resolve_config(const std::string& experiment, const json& user, const RunOptions& opts) {
    json cfg = default_config(experiment);
    std::vector<std::string> problems;
    if (!user.is_null() && !user.is_object()) throw ConfigError({"config: top level must be an object"});
    if (user.is_object())
        for (const auto& [key, val] : user.items()) {
            if (!cfg.contains(key)) {
                problems.push_back(key + ": unknown key");
                continue;
            }
            if (!same_kind(cfg[key], val)) {
                problems.push_back(key + ": expected " + kind_name(cfg[key]));
                continue;
            }
            cfg[key] = val;
        }
    if (cfg["experiment"] != experiment) problems.push_back("experiment: config is for '" + cfg["experiment"].get<std::string>() + "'");
    if (opts.seed) cfg["seed"] = *opts.seed;
    if (opts.workers) cfg["workers"] = *opts.workers;
    if (opts.strict) cfg["strict"] = true;
    if (cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() < 0) problems.push_back("seed: must be non-negative");
    if (cfg["workers"].get<int>() < 1) problems.push_back("workers: must be >= 1");
    if (cfg.contains("system") && cfg["system"] != "KG" && cfg["system"] != "NLS") problems.push_back("system: expected \"KG\" or \"NLS\"");
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

std::string config_hash(const json& resolved) {
    // FNV-1a over the canonical dump (keys are sorted by nlohmann::json)
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : resolved.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json schema() {
    json s = {{"$schema", "https://json-schema.org/draft/2020-12/schema"}, {"title", "kgnls run config"}, {"oneOf", json::array()}};
    for (const auto& e : experiments()) {
        const json d = default_config(e);
        json props = json::object();
        for (const auto& [k, v] : d.items()) {
            json p;
            if (v.is_boolean()) p["type"] = "boolean";
            else if (v.is_string()) p["type"] = "string";
            else if (v.is_number_integer()) p["type"] = "integer";
            else if (v.is_number()) p["type"] = "number";
            else if (v.is_array()) {
                p["type"] = "array";
                if (!v.empty()) p["items"] = {{"type", v.front().is_number_integer() ? "integer" : "number"}};
            }
            p["default"] = v;
            props[k] = p;
        }
        props["experiment"]["const"] = e;
        if (d.contains("system")) props["system"]["enum"] = {"KG", "NLS"};
        s["oneOf"].push_back({{"type", "object"}, {"properties", props}, {"additionalProperties", false}});
    }
    return s;
}

int run(const std::string& experiment, const RunOptions& opts, std::ostream& log) {
    Run r;
    std::string status = "ok";
    int code = kOk;
    try {
        json user;
        if (opts.config_path) {
            std::ifstream is(*opts.config_path);
            if (!is) throw ConfigError({"config: cannot open " + *opts.config_path});
            try {
                is >> user;
            } catch (const json::parse_error& e) {
                throw ConfigError({std::string("config: ") + e.what()});
            }
        }
        r.cfg = resolve_config(experiment, user, opts);
        r.dir = opts.out_dir;
        fs::create_directories(r.dir);
        if (experiment == "divisor-scan") run_divisor_scan(r);
        else if (experiment == "measure") run_measure(r);
        else if (experiment == "birkhoff") run_birkhoff(r);
        else if (experiment == "schedule") run_schedule(r);
        else if (experiment == "simulate") run_simulate(r);
        else if (experiment == "scaling") run_scaling(r);
        else throw ConfigError({"experiment: '" + experiment + "' is not runnable"});
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) log << "config error: " << p << "\n";
        return kConfig;
    } catch (const AnomalyError& e) {
        log << "numeric anomaly: " << e.what() << "\n";
        status = "anomaly";
        code = kAnomaly;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    {
        std::ofstream os(r.dir / "summary.json");
        os << json{{"experiment", experiment}, {"fits", r.fits}, {"details", r.extra}}.dump(2) << "\n";
    }
    r.artifacts.push_back("summary.json");
    json manifest = {{"code_version", KGNLS_VERSION}, {"experiment", experiment}, {"seed", r.cfg["seed"]},
                     {"config", r.cfg}, {"config_hash", config_hash(r.cfg)}, {"artifacts", r.artifacts}, {"status", status}};
    std::ofstream(r.dir / "manifest.json") << manifest.dump(2) << "\n";
    for (const auto& f : r.fits)
        log << experiment << " " << f["quantity"].get<std::string>() << " fitted " << fmt(f["fitted"].is_number() ? f["fitted"].get<double>() : std::nan(""))
            << " predicted " << fmt(f["predicted"].get<double>()) << "\n";
    return code;
}

std::vector<ReportRow> collect_report(const std::vector<std::string>& dirs, std::vector<std::string>& skipped) {
    std::vector<ReportRow> rows;
    for (const auto& d : dirs) {
        const fs::path man = fs::path(d) / "manifest.json";
        const fs::path sum = fs::path(d) / "summary.json";
        if (!fs::exists(man) || !fs::exists(sum)) {
            skipped.push_back(d);
            continue;
        }
        json m, s;
        try {
            std::ifstream(man) >> m;
            std::ifstream(sum) >> s;
        } catch (const json::exception&) {
            skipped.push_back(d);
            continue;
        }
        for (const auto& f : s.value("fits", json::array())) {
            ReportRow r;
            r.experiment = m.value("experiment", "");
            r.seed = m.value("seed", std::uint64_t{0});
            r.quantity = f.value("quantity", "");
            r.fitted = f["fitted"].is_number() ? f["fitted"].get<double>() : std::nan("");
            r.predicted = f.value("predicted", std::nan(""));
            r.run_dir = d;
            rows.push_back(r);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.experiment, a.seed, a.quantity) < std::tie(b.experiment, b.seed, b.quantity);
    });
    return rows;
}

void write_report(const std::vector<ReportRow>& rows, std::ostream& os) {
    os << "experiment,seed,quantity,fitted,predicted,run_dir\n";
    for (const auto& r : rows)
        os << r.experiment << "," << r.seed << "," << r.quantity << "," << fmt(r.fitted) << "," << fmt(r.predicted) << "," << r.run_dir << "\n";
}

}  // namespace kgnls::app
