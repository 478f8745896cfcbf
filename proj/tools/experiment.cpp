#include "experiment.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "levy/densities.hpp"
#include "levy/error.hpp"
#include "levy/hash.hpp"
#include "levy/measures.hpp"
#include "levy/orv.hpp"
#include "levy/parallel.hpp"
#include "levy/persist.hpp"
#include "levy/process.hpp"
#include "levy/solver.hpp"
#include "levy/spaces.hpp"
#include "levy/special.hpp"
#include "levy/symbols.hpp"
#include "levy/verification.hpp"

namespace levy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"analyze-measure", "symbol", "density", "norms",
                                            "simulate",        "solve",  "verify",  "all"};
    return s;
}

const std::vector<std::string>& check_ops() {
    static const std::vector<std::string> s{"hormander", "stochastic_hormander", "time_difference",
                                            "initial_estimate", "apriori", "fractional"};
    return s;
}

namespace {

// ---- typed access with field names in every message

const json& block(const json& cfg, const std::string& key) {
    static const json empty = json::object();
    if (!cfg.contains(key)) return empty;
    const auto& b = cfg.at(key);
    if (!b.is_object()) throw ConfigError(key + ": expected an object");
    return b;
}

double num(const json& b, const std::string& where, const std::string& key, double fallback) {
    if (!b.contains(key)) return fallback;
    const auto& v = b.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::int64_t integer(const json& b, const std::string& where, const std::string& key, std::int64_t fallback) {
    if (!b.contains(key)) return fallback;
    const auto& v = b.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

std::size_t count(const json& b, const std::string& where, const std::string& key, std::size_t fallback,
                  std::size_t lo = 1) {
    const auto v = integer(b, where, key, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(lo)) throw ConfigError(where + "." + key + ": must be at least " + std::to_string(lo));
    return static_cast<std::size_t>(v);
}

bool flag(const json& b, const std::string& where, const std::string& key, bool fallback) {
    if (!b.contains(key)) return fallback;
    if (!b.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    return b.at(key).get<bool>();
}

std::string text(const json& b, const std::string& where, const std::string& key, const std::string& fallback) {
    if (!b.contains(key)) return fallback;
    if (!b.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return b.at(key).get<std::string>();
}

// a number or a list of numbers
std::vector<double> values(const json& b, const std::string& where, const std::string& key, std::vector<double> fallback) {
    if (!b.contains(key)) return fallback;
    const auto& v = b.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + ": expected a number or a non-empty list");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::string tag(double v) {
    std::ostringstream s;
    s << v;
    auto t = s.str();
    std::replace(t.begin(), t.end(), '.', 'p');
    std::replace(t.begin(), t.end(), '-', 'm');
    return t;
}

std::uint64_t file_hash(const fs::path& p, std::uintmax_t& bytes) {
    std::ifstream f(p, std::ios::binary);
    const std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    bytes = s.size();
    Fnv1a h;
    h.bytes(s.data(), s.size());
    return h.value();
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json lattice_json(const FrequencyGrid& g) {
    return {{"dim", g.dim()}, {"M", g.M()}, {"extent", g.extent()}, {"spacing", g.spacing()}, {"period", g.spatial().period()}};
}

json report_value(const EstimateReport& r) { return json::parse(report_json(r)); }

LevyMeasure load_measure(const json& cfg, const std::string& base_dir) {
    if (!cfg.contains("measure")) throw ConfigError("measure: missing");
    if (!cfg.at("measure").is_object()) throw ConfigError("measure: expected an object");
    return measure_from_json(cfg.at("measure").dump(), base_dir);
}

FrequencyGrid grid_of(const json& cfg, int measure_dim) {
    const auto& g = block(cfg, "grid");
    const int dim = static_cast<int>(integer(g, "grid", "dim", measure_dim));
    const std::size_t M = count(g, "grid", "M", measure_dim == 1 ? 4096 : 128, 4);
    const double extent = num(g, "grid", "extent", 64.0);
    if (dim != measure_dim) throw ConfigError("grid.dim: " + std::to_string(dim) + " differs from measure.dim " + std::to_string(measure_dim));
    if (!is_power_of_two(M)) throw ConfigError("grid.M: must be a power of two");
    if (!(extent > 0.0)) throw ConfigError("grid.extent: must be positive");
    return FrequencyGrid(dim, M, extent);
}

// ---- one run of one subcommand

class Run {
public:
    Run(const json& cfg, const std::string& base_dir, fs::path out, RunResult& res)
        : cfg(cfg), m(load_measure(cfg, base_dir)), grid(grid_of(cfg, m.dim())), out_(std::move(out)), res_(res) {
        for (const auto& f : block(cfg, "output").value("formats", json::array({"json", "csv", "bin"})))
            formats_.insert(f.get<std::string>());
        if (cfg.contains("seed")) seed_ = cfg.at("seed").get<std::uint64_t>();
        fs::create_directories(out_);
    }

    const json& cfg;
    const LevyMeasure m;
    const FrequencyGrid grid;

    bool want(const std::string& f) const { return formats_.count(f) > 0; }
    std::string path(const std::string& rel) const { return (out_ / rel).string(); }
    std::uint64_t seed(const std::string& what) const {
        if (!seed_) throw ConfigError("seed: required for " + what + " (set it in the config or pass --seed)");
        return *seed_;
    }
    std::optional<std::uint64_t> seed_value() const { return seed_; }

    void record(const std::string& rel) {
        Artifact a;
        a.path = rel;
        a.hash = file_hash(out_ / rel, a.bytes);
        res_.artifacts.push_back(a);
    }
    void write_json(const std::string& rel, const json& j) {
        std::ofstream f(out_ / rel);
        if (!f) throw ConfigError("cannot write " + path(rel));
        f << j.dump(2) << "\n";
        f.close();
        record(rel);
    }
    void fail(const std::string& name) { res_.failed_checks.push_back(name); }

private:
    fs::path out_;
    RunResult& res_;
    std::set<std::string> formats_;
    std::optional<std::uint64_t> seed_;
};

// ---- subcommands

void analyze_measure(Run& r) {
    const auto& a = block(r.cfg, "analysis");
    IndexOptions io;
    io.x_lo = num(a, "analysis", "x_lo", io.x_lo);
    io.x_hi = num(a, "analysis", "x_hi", io.x_hi);
    const Profile w = w_profile(r.m);
    const ORVIndices idx = estimate_indices(w, io);
    r.write_json("indices.json", {{"p1", idx.p1},
                                  {"q1", idx.q1},
                                  {"p2", idx.p2},
                                  {"q2", idx.q2},
                                  {"half_widths", {{"p1", idx.hw_p1}, {"q1", idx.hw_q1}, {"p2", idx.hw_p2}, {"q2", idx.hw_q2}}},
                                  {"lower", idx.lower()},
                                  {"upper", idx.upper()}});

    const auto A = check_assumption_A(idx, r.m.sigma());
    json clauses = json::array();
    for (const auto& c : A.clauses)
        clauses.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"margin", c.margin}, {"pass", c.pass}});
    const auto R = logspace(num(a, "analysis", "R_lo", 1e-3), num(a, "analysis", "R_hi", 1e3), count(a, "analysis", "R_points", 61, 2));
    const int d = r.m.dim();
    const auto dirs = d == 1 ? std::vector<double>{1.0} : unit_directions(d, static_cast<int>(count(a, "analysis", "directions", 16)));
    const auto B = nondegeneracy_B(r.m, R, dirs);
    r.write_json("assumptions.json",
                 {{"A", {{"pass", A.pass}, {"sigma_bracketed", A.sigma_bracketed}, {"clauses", clauses}}},
                  {"B",
                   {{"value", B.value},
                    {"max_value", B.max_value},
                    {"flatness", B.value > 0.0 ? (B.max_value - B.value) / B.value : 0.0},
                    {"c0", B.c0},
                    {"route2_value", B.route2_value},
                    {"R", B.R},
                    {"per_R", B.per_R}}}});
    r.write_json("measure.json", {{"kind", kind_name(r.m.kind())},
                                  {"dim", d},
                                  {"sigma", r.m.sigma()},
                                  {"symmetric", r.m.symmetric()},
                                  {"hash", hex64(r.m.hash())},
                                  {"description", r.m.describe()}});
    if (r.want("csv")) {
        const auto t = tail_function(r.m, logspace(1e-4, 1e4, 81));
        std::ofstream f(r.path("tail.csv"));
        f << "r,delta,w\n";
        for (std::size_t i = 0; i < t.grid.size(); ++i)
            f << csv_number(t.grid[i]) << "," << csv_number(t.delta[i]) << "," << csv_number(t.w[i]) << "\n";
        f.close();
        r.record("tail.csv");
    }
}

void symbol(Run& r) {
    const auto psi = compute_symbol(r.m, r.grid);
    if (r.want("bin")) {
        save_symbol(r.path("symbol_field"), psi);
        r.record("symbol_field.bin");
        r.record("symbol_field.json");
    }
    double max_im = 0.0, lo = 0.0, hi = -INFINITY;
    for (const auto& v : psi.values) {
        max_im = std::max(max_im, std::fabs(v.imag()));
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    r.write_json("symbol_summary.json", {{"grid", lattice_json(r.grid)},
                                         {"hash", hex64(psi.hash())},
                                         {"measure_hash", hex64(psi.measure_hash)},
                                         {"symmetric", psi.symmetric},
                                         {"max_abs_imag", max_im},
                                         {"min_real", lo},
                                         {"max_real", hi}});
    if (r.want("csv")) {
        const std::size_t M = r.grid.M(), stride = r.grid.size() / M;
        std::vector<std::size_t> order(M);
        for (std::size_t k = 0; k < M; ++k) order[k] = (k + M / 2) % M;  // ascending frequency
        std::ofstream f(r.path("symbol.csv"));
        f << "xi,re,im\n";
        for (auto k : order) {
            const auto v = psi.values[k * stride];
            f << csv_number(r.grid.axis_frequency(k)) << "," << csv_number(v.real()) << "," << csv_number(v.imag()) << "\n";
        }
        f.close();
        r.record("symbol.csv");
    }
}

void densities(Run& r) {
    const auto& b = block(r.cfg, "density");
    const auto times = values(b, "density", "times", {0.25, 1.0, 4.0});
    const auto op = text(b, "density", "op", "identity");
    if (op != "identity" && op != "generator") throw ConfigError("density.op: expected identity or generator");
    const double tol = num(b, "density", "decay_tol", 1e-12);
    const auto psi = compute_symbol(r.m, r.grid);
    json fields = json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw ConfigError("density.times: must be positive");
        const auto d = op == "identity" ? density(psi, times[i], tol) : apply_operator(psi, times[i], generator_multiplier(psi), tol);
        const std::string base = "density_" + std::to_string(i);
        if (r.want("bin")) {
            save_density(r.path(base), d);
            r.record(base + ".bin");
            r.record(base + ".json");
        }
        if (r.want("csv")) {
            write_density_profile_csv(r.path(base + ".csv"), d);
            r.record(base + ".csv");
        }
        const auto st = kernel_statistics(d);
        fields.push_back({{"t", d.t},
                          {"file", base},
                          {"mass", d.mass()},
                          {"min_value", d.min_value},
                          {"l1", st.l1},
                          {"sup", st.sup},
                          {"imag_residue", d.imag_residue},
                          {"hash", hex64(d.hash())},
                          {"warnings", d.warnings}});
    }
    r.write_json("density.json", {{"op", op}, {"grid", lattice_json(r.grid)}, {"fields", fields}});
}

std::vector<std::vector<double>> norm_family(Run& r, const json& fam, std::string& label) {
    const Lattice lat = r.grid.spatial();
    const auto kind = text(fam, "norms.family", "kind", "gaussian");
    label = kind;
    std::vector<std::vector<double>> out;
    if (kind == "gaussian") {
        for (double l : values(fam, "norms.family", "widths", {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}))
            out.push_back(gaussian(lat, l));
    } else if (kind == "band_limited") {
        const auto n = count(fam, "norms.family", "count", 8);
        const double xi = num(fam, "norms.family", "xi_max", 4.0);
        for (std::size_t i = 0; i < n; ++i) out.push_back(random_band_limited(lat, xi, r.seed("band-limited norm families"), i));
    } else if (kind == "mixed") {
        out = mixed_family(lat, num(fam, "norms.family", "xi_max", r.grid.extent() / 4.0), count(fam, "norms.family", "count", 12),
                           r.seed("mixed norm families"));
    } else {
        throw ConfigError("norms.family.kind: expected gaussian, band_limited or mixed");
    }
    return out;
}

void norms(Run& r) {
    const auto& b = block(r.cfg, "norms");
    const int N = static_cast<int>(integer(block(r.cfg, "dyadic"), "dyadic", "N", 2));
    const DyadicSystem sys(N, r.grid);
    std::string label;
    const auto fam = norm_family(r, b.contains("family") ? b.at("family") : json::object(), label);
    const json specs = b.value("specs", json::array({{{"type", "besov"}, {"s", 0.5}, {"p", 2.0}},
                                                     {{"type", "bessel"}, {"s", 0.5}, {"p", 2.0}},
                                                     {{"type", "bessel_J"}, {"s", 0.5}, {"p", 2.0}}}));
    if (!specs.is_array()) throw ConfigError("norms.specs: expected a list");
    const Profile w = w_profile(r.m);
    const auto sym = compute_symbol(r.m.symmetrized(), r.grid);
    const Lattice lat = r.grid.spatial();
    json rows = json::array();
    std::ostringstream csv;
    csv << "member,type,s,p,q,value,truncation_fraction\n";
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const std::string where = "norms.specs[" + std::to_string(k) + "]";
        const auto type = text(specs[k], where, "type", "besov");
        NormSpec spec{num(specs[k], where, "s", 0.0), num(specs[k], where, "p", 2.0), num(specs[k], where, "q", 0.0), 0.0, w};
        if (!(spec.p >= 1.0)) throw ConfigError(where + ".p: must be at least 1");
        for (std::size_t i = 0; i < fam.size(); ++i) {
            const auto F = MarkedField::unmarked(lat, fam[i]);
            NormResult n;
            if (type == "besov")
                n = besov_norm(F, sys, spec);
            else if (type == "bessel")
                n = bessel_norm(F, sys, spec);
            else if (type == "bessel_J")
                n = bessel_norm_via_J(F, sym, spec);
            else
                throw ConfigError(where + ".type: expected besov, bessel or bessel_J");
            const double q = spec.q > 0.0 ? spec.q : spec.p;
            rows.push_back({{"member", i}, {"type", type}, {"s", spec.s}, {"p", spec.p}, {"q", q}, {"value", n.value},
                            {"truncation_fraction", n.truncation_fraction}, {"warnings", n.warnings}});
            csv << i << "," << type << "," << csv_number(spec.s) << "," << csv_number(spec.p) << "," << csv_number(q) << ","
                << csv_number(n.value) << "," << csv_number(n.truncation_fraction) << "\n";
        }
    }
    r.write_json("norms.json", {{"N", N}, {"family", label}, {"members", fam.size()}, {"grid", lattice_json(r.grid)}, {"rows", rows}});
    if (r.want("csv")) {
        std::ofstream f(r.path("norms.csv"));
        f << csv.str();
        f.close();
        r.record("norms.csv");
    }
}

void simulate(Run& r) {
    const auto& b = block(r.cfg, "simulate");
    const std::uint64_t seed = r.seed("simulate");
    const std::size_t paths = count(b, "simulate", "paths", 10000);
    const double T = num(b, "simulate", "T", 1.0), eps = num(b, "simulate", "eps", 1e-2);
    const bool brownian = flag(b, "simulate", "brownian", false);
    if (!(T > 0.0)) throw ConfigError("simulate.T: must be positive");
    if (!(eps > 0.0)) throw ConfigError("simulate.eps: must be positive");
    const int d = r.m.dim();
    const auto z = simulate_terminal_values(r.m, T, eps, paths, seed, brownian);
    if (r.want("bin")) {
        StoredArray a;
        a.shape = {paths, static_cast<std::size_t>(d)};
        a.data = z;
        a.meta = json{{"kind", "terminal_values"}, {"T", T}, {"eps", eps}, {"seed", seed}, {"measure_hash", hex64(r.m.hash())}}.dump();
        write_array(r.path("terminal"), a);
        r.record("terminal.bin");
        r.record("terminal.json");
    }
    const auto xi = values(b, "simulate", "xi", {0.05, 0.1, 0.2, 0.4});
    SymbolEvaluator ev(r.m);
    std::vector<cplx> exact;
    for (double x : xi) {
        double v[3] = {x, 0.0, 0.0};
        exact.push_back(std::exp(T * ev(v)));
    }
    const auto ecf = empirical_characteristic(z, d, xi, exact);
    json pts = json::array();
    bool all = true;
    std::ostringstream csv;
    csv << "xi,empirical_re,empirical_im,exact_re,exact_im,se,within_3se\n";
    for (const auto& p : ecf) {
        all &= p.within(3.0);
        pts.push_back({{"xi", p.xi}, {"empirical", {p.empirical.real(), p.empirical.imag()}}, {"exact", {p.exact.real(), p.exact.imag()}},
                       {"se", p.se}, {"within_3se", p.within(3.0)}});
        csv << csv_number(p.xi) << "," << csv_number(p.empirical.real()) << "," << csv_number(p.empirical.imag()) << ","
            << csv_number(p.exact.real()) << "," << csv_number(p.exact.imag()) << "," << csv_number(p.se) << "," << p.within(3.0)
            << "\n";
    }
    r.write_json("simulate.json", {{"paths", paths}, {"T", T}, {"eps", eps}, {"brownian", brownian}, {"seed", seed},
                                   {"ensemble", json::parse(ensemble_summary_json(z, d))}, {"ecf", pts}, {"ecf_within_3se", all}});
    if (r.want("csv")) {
        std::ofstream f(r.path("ecf.csv"));
        f << csv.str();
        f.close();
        r.record("ecf.csv");
        PathOptions po;
        po.T = T;
        po.eps = eps;
        po.brownian = brownian;
        po.time_nodes = count(b, "simulate", "time_nodes", 256);
        for (std::size_t i = 0; i < count(b, "simulate", "sample_paths", 2, 0); ++i) {
            const auto p = simulate_levy_path(r.m, po, seed, i);
            const auto a = "path_" + std::to_string(i) + ".csv", j = "jumps_" + std::to_string(i) + ".csv";
            write_path_csv(r.path(a), p);
            write_jumps_csv(r.path(j), p.jumps);
            r.record(a);
            r.record(j);
        }
    }
}

void solve_cmd(Run& r) {
    const auto& b = block(r.cfg, "solver");
    const auto& inb = b.contains("inputs") ? b.at("inputs") : json::object();
    const double lambda = num(b, "solver", "lambda", 1.0), T = num(b, "solver", "T", 1.0);
    const std::size_t K = count(b, "solver", "K", 128), marks = count(b, "solver", "marks", 4);
    const double p = num(b, "solver", "p", 2.0), xi_max = num(inb, "solver.inputs", "xi_max", 2.0);
    const auto rule_name = text(b, "solver", "rule", "exponential");
    if (rule_name != "exponential" && rule_name != "trapezoid") throw ConfigError("solver.rule: expected exponential or trapezoid");
    const TimeRule rule = rule_name == "exponential" ? TimeRule::Exponential : TimeRule::Trapezoid;
    const bool use_g = flag(inb, "solver.inputs", "g", true), use_f = flag(inb, "solver.inputs", "f", true),
               use_phi = flag(inb, "solver.inputs", "phi", true);
    const std::uint64_t seed = r.seed("solve (seeded inputs and noise)");

    const Lattice lat = r.grid.spatial();
    const auto psi = compute_symbol(r.m, r.grid);
    const auto t = uniform_time_grid(T, K);
    InputData in;
    in.lattice = lat;
    in.lambda = lambda;
    in.T = T;
    if (use_g) in.g = random_band_limited(lat, xi_max, seed, 0);
    if (use_f) {
        const auto f1 = random_band_limited(lat, xi_max, seed, 1), f2 = random_band_limited(lat, xi_max, seed, 2);
        in.f.times = t;
        for (double tk : t) {
            std::vector<double> v(lat.size());
            const double c = std::cos(2.0 * M_PI * tk / T), s = std::sin(2.0 * M_PI * tk / T);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * f1[i] + s * f2[i];
            in.f.values.push_back(std::move(v));
        }
    }
    JumpSample jumps;
    if (use_phi) {
        Stream wr(seed, 3, purpose::inputs);
        MarkIntensity pi;
        std::vector<double> omega;
        std::vector<std::vector<double>> shapes;
        for (std::size_t z = 0; z < marks; ++z) {
            pi.weights.push_back(0.5 + 1.5 * wr.uniform());
            omega.push_back(1.0 + 3.0 * wr.uniform());
            shapes.push_back(random_band_limited(lat, xi_max, seed, 8 + z));
        }
        in.Phi.times = t;
        in.Phi.weights = pi.weights;
        for (double tk : t) {
            std::vector<std::vector<double>> node;
            for (std::size_t z = 0; z < marks; ++z) {
                auto v = shapes[z];
                for (auto& x : v) x *= 1.0 + 0.5 * std::cos(omega[z] * tk);
                node.push_back(std::move(v));
            }
            in.Phi.values.push_back(std::move(node));
        }
        jumps = simulate_poisson_measure(pi, T, seed, 0);
    }
    const auto sol = solve(psi, in, jumps, t, rule);
    const auto res = residual_check(sol, psi, in, jumps, p);
    if (r.want("bin")) {
        save_solution(r.path("solution"), sol, r.m.hash(), seed);
        r.record("solution.bin");
        r.record("solution.json");
    }
    if (r.want("csv")) {
        write_solution_csv_norms(r.path("solution_norms.csv"), sol, p);
        r.record("solution_norms.csv");
        std::ofstream f(r.path("residual.csv"));
        f << "t,residual\n";
        for (std::size_t k = 0; k < t.size(); ++k) f << csv_number(t[k]) << "," << csv_number(res.residual[k]) << "\n";
        f.close();
        r.record("residual.csv");
        if (use_phi) {
            write_jumps_csv(r.path("noise.csv"), jumps);
            r.record("noise.csv");
        }
    }
    r.write_json("solve.json", {{"lambda", lambda},
                                {"T", T},
                                {"K", K},
                                {"rule", rule_name},
                                {"p", p},
                                {"seed", seed},
                                {"inputs", {{"g", use_g}, {"f", use_f}, {"phi", use_phi}, {"marks", marks}, {"xi_max", xi_max}}},
                                {"jumps", jumps.times.size()},
                                {"hash", hex64(sol.hash())},
                                {"noise_hash", hex64(sol.noise_hash)},
                                {"max_residual", res.max_residual},
                                {"final_norm", lp_norm(lat, sol.u.back(), p)}});
}

// ---- verify

std::vector<EstimateGrid> levels_of(const json& c, const std::string& where, const FrequencyGrid& g, int N, double T,
                                    std::size_t K, std::size_t default_levels) {
    std::vector<EstimateGrid> out;
    if (c.contains("levels")) {
        const auto& L = c.at("levels");
        if (!L.is_array() || L.empty()) throw ConfigError(where + ".levels: expected a non-empty list");
        for (std::size_t i = 0; i < L.size(); ++i) {
            const std::string w = where + ".levels[" + std::to_string(i) + "]";
            const std::size_t M = count(L[i], w, "M", g.M(), 4);
            if (!is_power_of_two(M)) throw ConfigError(w + ".M: must be a power of two");
            const double ext = num(L[i], w, "extent", g.extent());
            if (!(ext > 0.0)) throw ConfigError(w + ".extent: must be positive");
            out.push_back({FrequencyGrid(g.dim(), M, ext), N, T, count(L[i], w, "K", K)});
        }
        return out;
    }
    for (std::size_t l = 0; l < default_levels; ++l)
        out.push_back({FrequencyGrid(g.dim(), g.M() << l, g.extent() * double(1u << l)), N, T, K << l});
    return out;
}

HormanderOptions hormander_options(const json& c, const std::string& where) {
    HormanderOptions o;
    o.epsilons = values(c, where, "epsilons", o.epsilons);
    o.points_per_scale = static_cast<int>(count(c, where, "points_per_scale", o.points_per_scale));
    o.period_factor = num(c, where, "period_factor", o.period_factor);
    o.max_nodes = count(c, where, "max_nodes", o.max_nodes, 16);
    o.tail_tol = num(c, where, "tail_tol", o.tail_tol);
    o.spread_limit = num(c, where, "spread_limit", o.spread_limit);
    o.eps_drift_limit = num(c, where, "eps_drift_limit", o.eps_drift_limit);
    o.refine_drift_limit = num(c, where, "refine_drift_limit", o.refine_drift_limit);
    return o;
}

class Verifier {
public:
    explicit Verifier(Run& r) : r_(r) {}

    void check(const json& c, std::size_t index) {
        const std::string where = "checks[" + std::to_string(index) + "]";
        const auto op = text(c, where, "op", "");
        const auto name = text(c, where, "name", op + "_" + std::to_string(index));
        if (op == "hormander" || op == "stochastic_hormander") {
            const auto smp = hormander_samples(r_.m, count(c, where, "samples", 50), num(c, where, "eta_lo", 1e-2), num(c, where, "eta_hi", 1e2));
            for (double lambda : values(c, where, "lambda", {0.0})) {
                auto o = hormander_options(c, where);
                o.lambda = lambda;
                const auto rep = op == "hormander" ? hormander_check(r_.m, smp, o) : stochastic_hormander_check(r_.m, smp, o);
                emit(name + "_l" + tag(lambda), op, rep, rep.pass);
            }
        } else if (op == "time_difference") {
            std::vector<std::pair<double, double>> sb;
            if (c.contains("pairs")) {
                for (const auto& p : c.at("pairs")) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                        throw ConfigError(where + ".pairs: expected [s, b] pairs");
                    sb.emplace_back(p[0].get<double>(), p[1].get<double>());
                }
            } else {
                const double f[] = {0.5, -0.5, 1.0, -1.0, 0.25};
                const auto b = logspace(1e-2, 1e2, 10);
                for (std::size_t i = 0; i < b.size(); ++i) sb.emplace_back(f[i % 5] * b[i], b[i]);
            }
            const auto rep = fractional_time_difference_check(r_.m, sb, hormander_options(c, where));
            emit(name, op, rep, rep.pass);
        } else if (op == "initial_estimate") {
            initial(c, where, name);
        } else if (op == "apriori") {
            apriori(c, where, name);
        } else if (op == "fractional") {
            fractional(c, where, name);
        } else {
            throw ConfigError(where + ".op: unknown check '" + op + "'");
        }
    }

    json summary() const { return summary_; }

private:
    void emit(const std::string& name, const std::string& op, const EstimateReport& rep, bool pass, const json& extra = {}) {
        r_.write_json("report_" + name + ".json", report_value(rep));
        if (r_.want("csv")) {
            write_report_csv(r_.path("report_" + name + ".csv"), rep);
            r_.record("report_" + name + ".csv");
        }
        json s = {{"name", name}, {"op", op}, {"pass", pass}, {"C", rep.C}, {"drift", rep.drift}, {"report", "report_" + name + ".json"}};
        if (!std::isfinite(rep.C)) s["C"] = nullptr;
        for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
        summary_.push_back(s);
        if (!pass) r_.fail(name);
    }

    int N() const { return static_cast<int>(integer(block(r_.cfg, "dyadic"), "dyadic", "N", 2)); }

    void initial(const json& c, const std::string& where, const std::string& name) {
        const double T = num(c, where, "T", 1.0);
        const auto lv = levels_of(c, where, r_.grid, N(), T, 64, 2);
        const std::size_t nf = count(c, where, "family", 12);
        const double xi = num(c, where, "xi_max", r_.grid.extent() / 4.0);
        const std::uint64_t seed = r_.seed("initial_estimate input families");
        std::vector<std::vector<double>> fam;
        for (const auto& l : lv) {
            auto f = mixed_family(l.grid.spatial(), xi, nf, seed);
            fam.insert(fam.end(), f.begin(), f.end());
        }
        const bool neg = flag(c, where, "negative_control", true);
        const double limit = num(c, where, "drift_limit", 0.25);
        for (double p : values(c, where, "p", {2.0, 4.0}))
            for (double lambda : values(c, where, "lambda", {0.0})) {
                const auto id = name + "_p" + tag(p) + "_l" + tag(lambda);
                const auto rep = initial_estimate_check(r_.m, lv, fam, lambda, p, NAN, limit);
                json extra = json::object();
                bool ok = rep.pass;
                if (neg) {
                    const auto nc = initial_estimate_check(r_.m, lv, fam, lambda, p, 0.0, limit);
                    r_.write_json("report_" + id + "_negative.json", report_value(nc));
                    extra["negative_control_flagged"] = !nc.pass;
                    ok &= !nc.pass;
                }
                emit(id, "initial_estimate", rep, ok, extra);
            }
    }

    void apriori(const json& c, const std::string& where, const std::string& name) {
        const auto& sv = block(r_.cfg, "solver");
        const double T = num(c, where, "T", num(sv, "solver", "T", 1.0));
        const auto lv = levels_of(c, where, r_.grid, N(), T, count(c, where, "K", 64), 3);
        APrioriInputs in;
        in.members = count(c, where, "members", 16);
        in.paths = count(c, where, "paths", 8);
        in.marks = count(c, where, "marks", 4);
        in.xi_max = num(c, where, "xi_max", 4.0);
        in.seed = r_.seed("apriori ensembles");
        if (in.marks > 8) throw ConfigError(where + ".marks: at most 8 marks");
        const bool neg = flag(c, where, "negative_control", true);
        const double limit = num(c, where, "drift_limit", 0.25);
        for (double p : values(c, where, "p", {2.0, 4.0, 1.5}))
            for (double lambda : values(c, where, "lambda", {1.0})) {
                if (!(p > 1.0)) throw ConfigError(where + ".p: must exceed 1");
                const auto id = name + "_p" + tag(p) + "_l" + tag(lambda);
                const auto rep = apriori_refinement_check(r_.m, lv, in, p, lambda, limit);
                r_.write_json("report_" + id + "_u.json", report_value(rep.u));
                json extra = {{"u_bound_pass", rep.u.pass}, {"u_bound_C", rep.u.C}};
                bool ok = rep.L.pass && rep.u.pass;
                if (neg) {
                    // g only, carriers swept over four octaves, Besov index 0 for g
                    APrioriInputs nc = in;
                    nc.use_f = nc.use_phi = false;
                    nc.paths = 1;
                    nc.members = 12;
                    nc.frequency_sweep = true;
                    nc.xi_max = lv.back().grid.extent() / 4.0;
                    nc.g_besov_s = 0.0;
                    const std::vector<EstimateGrid> top{lv.back()};
                    const auto nr = apriori_refinement_check(r_.m, top, nc, p, 0.0, limit);
                    r_.write_json("report_" + id + "_negative.json", report_value(nr.L));
                    extra["negative_control_flagged"] = !nr.L.pass;
                    ok &= !nr.L.pass;
                }
                emit(id, "apriori", rep.L, ok, extra);
            }
    }

    void fractional(const json& c, const std::string& where, const std::string& name) {
        FractionalOptions o;
        o.paths = count(c, where, "paths", o.paths);
        o.seed = r_.seed("fractional Monte Carlo");
        o.split = num(c, where, "split", o.split);
        o.t_max = num(c, where, "t_max", o.t_max);
        o.nodes_per_decade = count(c, where, "nodes_per_decade", o.nodes_per_decade);
        o.points = count(c, where, "points", o.points);
        const Lattice lat = r_.grid.spatial();
        const double xi = num(c, where, "xi_max", 1.0);
        const std::uint64_t seed = o.seed;
        std::vector<std::vector<double>> fam{gaussian(lat, 1.0)};
        for (std::size_t i = 0; i + 1 < count(c, where, "family", 3, 2); ++i) fam.push_back(random_band_limited(lat, xi, seed, i));
        const bool neg = flag(c, where, "negative_control", true);
        for (double delta : values(c, where, "delta", {0.25, 0.5, 0.75})) {
            if (!(delta > 0.0 && delta < 1.0)) throw ConfigError(where + ".delta: must lie in (0, 1)");
            const auto id = name + "_d" + tag(delta);
            const auto rep = fractional_representation_check(r_.m, delta, lat, fam, o);
            json extra = json::object();
            bool ok = rep.pass;
            if (neg) {
                // paths from a measure of half the stability index
                FractionalOptions no = o;
                no.path_measure = LevyMeasure::stable(r_.m.dim(), 0.5 * r_.m.sigma());
                const auto nc = fractional_representation_check(r_.m, delta, lat, fam, no);
                r_.write_json("report_" + id + "_negative.json", report_value(nc));
                extra["negative_control_flagged"] = !nc.pass;
                ok &= !nc.pass;
            }
            emit(id, "fractional", rep, ok, extra);
        }
    }

    Run& r_;
    json summary_ = json::array();
};

void verify(Run& r, bool required) {
    if (!r.cfg.contains("checks") || !r.cfg.at("checks").is_array() || r.cfg.at("checks").empty()) {
        if (required) throw ConfigError("checks: verify needs a non-empty list of checks");
        return;
    }
    Verifier v(r);
    const auto& checks = r.cfg.at("checks");
    for (std::size_t i = 0; i < checks.size(); ++i) v.check(checks[i], i);
    r.write_json("verify.json", {{"checks", v.summary()}});
}

void validate_config(const json& cfg, const std::string& base_dir) {
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::set<std::string> keys{"description", "measure", "grid",     "dyadic", "solver", "analysis",
                                            "density",     "norms",   "simulate", "checks", "output", "seed"};
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!keys.count(it.key())) throw ConfigError(it.key() + ": unknown config block");
    const LevyMeasure m = load_measure(cfg, base_dir);
    grid_of(cfg, m.dim());
    for (const char* b : {"grid", "dyadic", "solver", "analysis", "density", "norms", "simulate", "output"}) block(cfg, b);
    const auto N = integer(block(cfg, "dyadic"), "dyadic", "N", 2);
    if (N < 2) throw ConfigError("dyadic.N: must be at least 2");
    const auto& s = block(cfg, "solver");
    if (!(num(s, "solver", "lambda", 1.0) >= 0.0)) throw ConfigError("solver.lambda: must be non-negative");
    if (!(num(s, "solver", "T", 1.0) > 0.0)) throw ConfigError("solver.T: must be positive");
    count(s, "solver", "K", 128);
    const auto marks = count(s, "solver", "marks", 4);
    if (marks > 8) throw ConfigError("solver.marks: the mark space holds at most 8 points");
    if (cfg.contains("seed") && !cfg.at("seed").is_number_unsigned() &&
        !(cfg.at("seed").is_number_integer() && cfg.at("seed").get<std::int64_t>() >= 0))
        throw ConfigError("seed: expected a non-negative integer");
    if (cfg.contains("checks")) {
        const auto& c = cfg.at("checks");
        if (!c.is_array()) throw ConfigError("checks: expected a list");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string w = "checks[" + std::to_string(i) + "]";
            if (!c[i].is_object()) throw ConfigError(w + ": expected an object");
            const auto op = text(c[i], w, "op", "");
            if (std::find(check_ops().begin(), check_ops().end(), op) == check_ops().end())
                throw ConfigError(w + ".op: unknown check '" + op + "'");
        }
    }
    const auto& o = block(cfg, "output");
    text(o, "output", "directory", "out");
    if (o.contains("formats")) {
        if (!o.at("formats").is_array()) throw ConfigError("output.formats: expected a list");
        for (const auto& f : o.at("formats"))
            if (!f.is_string() || (f != "json" && f != "csv" && f != "bin"))
                throw ConfigError("output.formats: entries must be json, csv or bin");
    }
}

}  // namespace

void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key.path=value");
    const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
        const auto dot = key.find('.', pos);
        const std::string seg = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (seg.empty()) throw ConfigError("--set " + assignment + ": empty key segment");
        json* next;
        if (node->is_array()) {
            std::size_t idx = 0, used = 0;
            try {
                idx = std::stoul(seg, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != seg.size() || idx >= node->size())
                throw ConfigError("--set " + assignment + ": '" + seg + "' is not an index of " + key.substr(0, pos ? pos - 1 : 0));
            next = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) throw ConfigError("--set " + assignment + ": " + key.substr(0, pos ? pos - 1 : 0) + " is not an object");
            next = &(*node)[seg];
        }
        if (dot == std::string::npos) {
            *next = value;
            return;
        }
        node = next;
        pos = dot + 1;
    }
}

Experiment Experiment::from_json(json cfg, const std::string& base_dir) {
    Experiment e;
    e.cfg_ = std::move(cfg);
    e.base_dir_ = base_dir;
    e.validate();
    return e;
}

Experiment Experiment::load(const std::string& config_path, const std::vector<std::string>& overrides,
                            std::optional<std::uint64_t> seed) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("--config: cannot read " + config_path);
    json cfg;
    try {
        cfg = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("--config " + config_path + ": invalid JSON: " + e.what());
    }
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) cfg["seed"] = *seed;
    const auto dir = fs::path(config_path).parent_path();
    return from_json(std::move(cfg), dir.empty() ? "." : dir.string());
}

void Experiment::validate() const { validate_config(cfg_, base_dir_); }

std::string Experiment::config_hash() const {
    Fnv1a h;
    h.text(cfg_.dump());
    return hex64(h.value());
}

RunResult Experiment::run(const std::string& sub, const std::string& out_dir) const {
    if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end())
        throw ConfigError("unknown subcommand '" + sub + "'");
    const fs::path out = out_dir.empty() ? fs::path(block(cfg_, "output").value("directory", "out")) : fs::path(out_dir);
    RunResult res;
    Run r(cfg_, base_dir_, out, res);
    if (sub == "all") r.seed("all (it includes simulate and solve)");

    if (sub == "analyze-measure" || sub == "all") analyze_measure(r);
    if (sub == "symbol" || sub == "all") symbol(r);
    if (sub == "density" || sub == "all") densities(r);
    if (sub == "norms" || sub == "all") norms(r);
    if (sub == "simulate" || sub == "all") simulate(r);
    if (sub == "solve" || sub == "all") solve_cmd(r);
    if (sub == "verify" || sub == "all") verify(r, sub == "verify");

    json arts = json::array();
    for (const auto& a : res.artifacts) arts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"hash", hex64(a.hash)}});
    const json manifest = {{"tool", "levy-orv"},
                           {"subcommand", sub},
                           {"config_hash", config_hash()},
                           {"seed", r.seed_value() ? json(*r.seed_value()) : json(nullptr)},
                           {"versions",
                            {{"levy-orv", version},
                             {"fftw", std::string(fftw_version)},
                             {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                                   "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                             {"compiler", __VERSION__}}},
                           {"jobs", jobs()},
                           {"created", utc_now()},
                           {"config", cfg_},
                           {"artifacts", arts},
                           {"failed_checks", res.failed_checks}};
    std::ofstream f(out / ("manifest_" + sub + ".json"));
    if (!f) throw ConfigError("cannot write the manifest into " + out.string());
    f << manifest.dump(2) << "\n";
    return res;
}

}  // namespace levy::cli
