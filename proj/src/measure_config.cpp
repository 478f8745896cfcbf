#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "levy/error.hpp"
#include "levy/measures.hpp"

namespace levy {

namespace {

using nlohmann::json;
constexpr double inf = std::numeric_limits<double>::infinity();

double number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing");
    const auto& v = j.at(key);
    if (v.is_null()) return inf;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return inf;
        throw ConfigError(where + "." + key + ": expected a number");
    }
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(where + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string resolve(const std::string& path, const std::string& base) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = std::filesystem::path(base) / p;
    if (!std::filesystem::exists(p)) throw ConfigError("referenced file does not exist: " + p.string());
    return p.string();
}

AngularKernel kernel_from_json(const json& j, int dim, const std::string& where) {
    if (j.contains("resolution")) return sphere_surface(dim, j.at("resolution").get<int>());
    if (!j.contains("nodes") || !j.contains("weights")) throw ConfigError(where + ": needs nodes and weights");
    AngularKernel k;
    k.dim = dim;
    for (const auto& n : j.at("nodes")) {
        auto z = n.is_array() ? numbers(n, where + ".nodes") : std::vector<double>{n.get<double>()};
        if (static_cast<int>(z.size()) != dim) throw ConfigError(where + ".nodes: node dimension mismatch");
        double norm = 0.0;
        for (double c : z) norm += c * c;
        if (std::fabs(std::sqrt(norm) - 1.0) > 1e-9) throw ConfigError(where + ".nodes: nodes must be unit vectors");
        k.nodes.insert(k.nodes.end(), z.begin(), z.end());
    }
    k.weights = numbers(j.at("weights"), where + ".weights");
    if (k.weights.size() != k.nodes.size() / dim) throw ConfigError(where + ": node and weight counts differ");
    for (double s : k.weights)
        if (s < 0.0) throw ConfigError(where + ".weights: weights must be nonnegative");
    return k;
}

// delta = 1/w with w(r) = r^{e_k} on the k-th interval between breaks, continuous, w(1) = 1
void w_power_table(const json& j, std::vector<double>& r, std::vector<double>& delta) {
    const std::string where = "measure.w_pieces";
    auto breaks = j.contains("breaks") ? numbers(j.at("breaks"), where + ".breaks") : std::vector<double>{};
    auto exps = numbers(j.at("exponents"), where + ".exponents");
    if (exps.size() != breaks.size() + 1) throw ConfigError(where + ": need one more exponent than breaks");
    const double rmin = number_or(j, "r_min", 1e-8, where), rmax = number_or(j, "r_max", 1e8, where);
    const int per_decade = j.value("per_decade", 8);
    auto logw = [&](double x) {
        // integrate the exponent from 1 to x in log r
        const double lx = std::log(x);
        double acc = 0.0;
        auto exponent_at = [&](double u) {
            std::size_t k = 0;
            while (k < breaks.size() && u >= std::log(breaks[k])) ++k;
            return exps[k];
        };
        std::vector<double> cuts{0.0, lx};
        for (double b : breaks) {
            const double lb = std::log(b);
            if ((lb > 0.0 && lb < lx) || (lb < 0.0 && lb > lx)) cuts.push_back(lb);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            acc += exponent_at(0.5 * (cuts[i] + cuts[i + 1])) * (cuts[i + 1] - cuts[i]);
        return lx >= 0.0 ? acc : -acc;
    };
    const int n = static_cast<int>(std::round(std::log10(rmax / rmin) * per_decade));
    std::vector<double> nodes;
    for (int i = 0; i <= n; ++i) nodes.push_back(rmin * std::pow(rmax / rmin, static_cast<double>(i) / n));
    for (double b : breaks) nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return std::fabs(a - b) <= 1e-12 * b; }),
                nodes.end());
    for (double x : nodes) {
        r.push_back(x);
        delta.push_back(std::exp(-logw(x)));
    }
}

}  // namespace

std::vector<std::pair<double, double>> read_csv_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::pair<double, double>> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream s(line);
        double a, b;
        if (!(s >> a >> b)) {
            if (out.empty()) continue;  // header
            throw ConfigError(path + ": malformed row " + std::to_string(row));
        }
        out.emplace_back(a, b);
    }
    if (out.empty()) throw ConfigError(path + ": no data rows");
    return out;
}

LevyMeasure measure_from_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("measure: invalid JSON: ") + e.what());
    }
    const std::string where = "measure";
    if (!j.is_object()) throw ConfigError("measure: expected an object");
    if (!j.contains("kind")) throw ConfigError("measure.kind: missing");
    const auto kind = j.at("kind").get<std::string>();
    const int dim = j.value("dim", 1);
    if (dim < 1 || dim > 3) throw ConfigError("measure.dim: must be 1, 2 or 3");
    const double sigma = number(j, "sigma", where);
    LevyMeasure m;
    if (kind == "stable") {
        m = LevyMeasure::stable(dim, sigma, number_or(j, "scale", 1.0, where), j.value("sphere_resolution", 0));
    } else if (kind == "tabulated") {
        std::vector<double> r, delta;
        if (j.contains("table")) {
            for (auto [a, b] : read_csv_pairs(resolve(j.at("table").get<std::string>(), base_dir))) {
                r.push_back(a);
                delta.push_back(b);
            }
        } else if (j.contains("w_pieces")) {
            w_power_table(j.at("w_pieces"), r, delta);
        } else if (j.contains("r") && j.contains("delta")) {
            r = numbers(j.at("r"), "measure.r");
            delta = numbers(j.at("delta"), "measure.delta");
        } else {
            throw ConfigError("measure: tabulated kind needs table, w_pieces or r/delta");
        }
        std::vector<AngularKernel> kernels;
        if (j.contains("kernels"))
            for (std::size_t i = 0; i < j.at("kernels").size(); ++i)
                kernels.push_back(kernel_from_json(j.at("kernels")[i], dim, "measure.kernels[" + std::to_string(i) + "]"));
        std::vector<int> rows;
        if (j.contains("row_kernel")) rows = j.at("row_kernel").get<std::vector<int>>();
        m = LevyMeasure::tabulated(dim, sigma, r, delta, kernels, rows);
    } else if (kind == "radial_angular") {
        if (!j.contains("j")) throw ConfigError("measure.j: missing");
        std::vector<LevyMeasure::PowerSegment> segs;
        const auto& jj = j.at("j");
        if (jj.is_string()) {
            const auto s = jj.get<std::string>();
            if (s.rfind("table:", 0) != 0) throw ConfigError("measure.j: expected \"table:<path>\" or a segment list");
            std::vector<double> r, v;
            for (auto [a, b] : read_csv_pairs(resolve(s.substr(6), base_dir))) {
                r.push_back(a);
                v.push_back(b);
            }
            segs = LevyMeasure::power_segments_from_table(r, v);
        } else {
            for (std::size_t i = 0; i < jj.size(); ++i) {
                const std::string w = "measure.j[" + std::to_string(i) + "]";
                segs.push_back({number_or(jj[i], "r_lo", 0.0, w), number_or(jj[i], "r_hi", inf, w),
                                number_or(jj[i], "coef", 1.0, w), number(jj[i], "exponent", w)});
            }
        }
        AngularKernel sphere = j.contains("sphere") ? kernel_from_json(j.at("sphere"), dim, "measure.sphere")
                                                    : sphere_surface(dim);
        std::vector<LevyMeasure::AngularBand> bands;
        if (j.contains("angular")) {
            const auto& a = j.at("angular");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string w = "measure.angular[" + std::to_string(i) + "]";
                bands.push_back({number_or(a[i], "r_lo", 0.0, w), number_or(a[i], "r_hi", inf, w),
                                 numbers(a[i].at("values"), w + ".values")});
            }
        }
        m = LevyMeasure::radial_angular(dim, sigma, segs, sphere, bands);
    } else {
        throw ConfigError("measure.kind: unknown kind '" + kind + "'");
    }
    m.validate();
    return m;
}

}  // namespace levy
