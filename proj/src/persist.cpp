#include "levy/persist.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "levy/error.hpp"
#include "levy/hash.hpp"

namespace levy {

namespace {

using nlohmann::json;

std::uint64_t parse_hex(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a hex string");
    const auto s = j.get<std::string>();
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError(where + ": bad hex value '" + s + "'");
    return v;
}

json lattice_json(const Lattice& l) { return {{"dim", l.dim()}, {"M", l.M()}, {"h", l.h()}}; }

Lattice lattice_from(const json& j) {
    return Lattice(j.at("dim").get<int>(), j.at("M").get<std::size_t>(), j.at("h").get<double>());
}

json meta_of(const StoredArray& a, const std::string& base) {
    try {
        return json::parse(a.meta);
    } catch (const json::exception&) {
        throw ConfigError(base + ".json: meta is not valid JSON");
    }
}

template <class F>
auto guarded(const std::string& base, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ConfigError(base + ".json: " + e.what());
    }
}

}  // namespace

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t payload_hash(const std::vector<double>& data) {
    Fnv1a h;
    for (double v : data) h.real(v);
    return h.value();
}

void write_array(const std::string& base, const StoredArray& a) {
    std::size_t n = a.dtype == "c128" ? 2 : 1;
    if (a.dtype != "f64" && a.dtype != "c128") throw PreconditionError("unknown dtype " + a.dtype);
    for (auto s : a.shape) n *= s;
    if (n != a.data.size()) throw PreconditionError("array data does not match its shape");

    std::string bytes(8 * a.data.size(), '\0');
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, &a.data[i], 8);
        for (int b = 0; b < 8; ++b) bytes[8 * i + b] = static_cast<char>(u >> (8 * b));
    }
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("cannot write " + base + ".bin");
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

    const json side = {{"format", "levy-array-1"},
                       {"dtype", a.dtype},
                       {"shape", a.shape},
                       {"byte_order", "little"},
                       {"hash", hex64(payload_hash(a.data))},
                       {"meta", a.meta.empty() ? json::object() : json::parse(a.meta)}};
    std::ofstream js(base + ".json");
    if (!js) throw ConfigError("cannot write " + base + ".json");
    js << side.dump(2) << "\n";
}

StoredArray read_array(const std::string& base) {
    std::ifstream js(base + ".json");
    if (!js) throw ConfigError("cannot read " + base + ".json");
    StoredArray a;
    json side;
    guarded(base, [&] {
        side = json::parse(js);
        a.dtype = side.at("dtype").get<std::string>();
        a.shape = side.at("shape").get<std::vector<std::size_t>>();
        a.meta = side.at("meta").dump();
        return 0;
    });
    std::size_t n = a.dtype == "c128" ? 2 : 1;
    if (a.dtype != "f64" && a.dtype != "c128") throw ConfigError(base + ".json: unknown dtype " + a.dtype);
    for (auto s : a.shape) n *= s;

    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("cannot read " + base + ".bin");
    const std::string bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    if (bytes.size() != 8 * n) throw ConfigError(base + ".bin: size does not match the sidecar shape");
    a.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t(static_cast<unsigned char>(bytes[8 * i + b])) << (8 * b);
        std::memcpy(&a.data[i], &u, 8);
    }
    a.hash = payload_hash(a.data);
    if (a.hash != parse_hex(side.at("hash"), base + ".json.hash"))
        throw ConfigError(base + ".bin: hash does not match the sidecar");
    return a;
}

void save_density(const std::string& base, const DensityField& d) {
    StoredArray a;
    a.shape.assign(static_cast<std::size_t>(d.lattice.dim()), d.lattice.M());
    a.data = d.values;
    a.meta = json{{"kind", "density"},
                  {"t", d.t},
                  {"lattice", lattice_json(d.lattice)},
                  {"symbol_hash", hex64(d.symbol_hash)},
                  {"op", d.op},
                  {"imag_residue", d.imag_residue},
                  {"min_value", d.min_value},
                  {"warnings", d.warnings},
                  {"field_hash", hex64(d.hash())}}
                 .dump();
    write_array(base, a);
}

DensityField load_density(const std::string& base) {
    const auto a = read_array(base);
    const json m = meta_of(a, base);
    return guarded(base, [&] {
        if (m.at("kind") != "density") throw ConfigError(base + ".json: not a density field");
        DensityField d;
        d.lattice = lattice_from(m.at("lattice"));
        if (a.data.size() != d.lattice.size()) throw ConfigError(base + ".json: lattice does not match the shape");
        d.t = m.at("t").get<double>();
        d.symbol_hash = parse_hex(m.at("symbol_hash"), base + ".json.meta.symbol_hash");
        d.op = m.at("op").get<std::string>();
        d.imag_residue = m.at("imag_residue").get<double>();
        d.min_value = m.at("min_value").get<double>();
        d.warnings = m.at("warnings").get<std::vector<std::string>>();
        d.values = a.data;
        return d;
    });
}

void save_solution(const std::string& base, const SolutionField& s, std::uint64_t measure_hash, std::uint64_t seed) {
    StoredArray a;
    a.shape = {s.times.size()};
    for (int i = 0; i < s.lattice.dim(); ++i) a.shape.push_back(s.lattice.M());
    a.data.reserve(s.times.size() * s.lattice.size());
    for (const auto& v : s.u) a.data.insert(a.data.end(), v.begin(), v.end());
    a.meta = json{{"kind", "solution"},
                  {"lattice", lattice_json(s.lattice)},
                  {"times", s.times},
                  {"lambda", s.lambda},
                  {"T", s.times.empty() ? 0.0 : s.times.back()},
                  {"noise_hash", hex64(s.noise_hash)},
                  {"measure_hash", hex64(measure_hash)},
                  {"seed", seed},
                  {"field_hash", hex64(s.hash())}}
                 .dump();
    write_array(base, a);
}

SolutionField load_solution(const std::string& base) {
    const auto a = read_array(base);
    const json m = meta_of(a, base);
    return guarded(base, [&] {
        if (m.at("kind") != "solution") throw ConfigError(base + ".json: not a solution field");
        SolutionField s;
        s.lattice = lattice_from(m.at("lattice"));
        s.times = m.at("times").get<std::vector<double>>();
        s.lambda = m.at("lambda").get<double>();
        s.noise_hash = parse_hex(m.at("noise_hash"), base + ".json.meta.noise_hash");
        const std::size_t n = s.lattice.size();
        if (a.data.size() != s.times.size() * n) throw ConfigError(base + ".json: times and lattice do not match the shape");
        s.u.resize(s.times.size());
        for (std::size_t k = 0; k < s.times.size(); ++k)
            s.u[k].assign(a.data.begin() + static_cast<std::ptrdiff_t>(k * n),
                          a.data.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
        return s;
    });
}

void save_symbol(const std::string& base, const SymbolField& s) {
    StoredArray a;
    a.dtype = "c128";
    a.shape.assign(static_cast<std::size_t>(s.grid.dim()), s.grid.M());
    a.data.reserve(2 * s.values.size());
    for (const auto& v : s.values) {
        a.data.push_back(v.real());
        a.data.push_back(v.imag());
    }
    a.meta = json{{"kind", "symbol"},
                  {"dim", s.grid.dim()},
                  {"M", s.grid.M()},
                  {"extent", s.grid.extent()},
                  {"symbol_kind", symbol_kind_name(s.kind)},
                  {"measure_hash", hex64(s.measure_hash)},
                  {"symmetric", s.symmetric},
                  {"description", s.description},
                  {"ordering", "fft"}}
                 .dump();
    write_array(base, a);
}

SymbolField load_symbol(const std::string& base) {
    const auto a = read_array(base);
    const json m = meta_of(a, base);
    return guarded(base, [&] {
        if (m.at("kind") != "symbol" || a.dtype != "c128") throw ConfigError(base + ".json: not a symbol field");
        SymbolField s;
        s.grid = FrequencyGrid(m.at("dim").get<int>(), m.at("M").get<std::size_t>(), m.at("extent").get<double>());
        if (2 * s.grid.size() != a.data.size()) throw ConfigError(base + ".json: grid does not match the shape");
        const auto k = m.at("symbol_kind").get<std::string>();
        bool found = false;
        for (auto c : {SymbolKind::Full, SymbolKind::Truncated, SymbolKind::Fractional, SymbolKind::Bessel})
            if (k == symbol_kind_name(c)) {
                s.kind = c;
                found = true;
            }
        if (!found) throw ConfigError(base + ".json: unknown symbol kind " + k);
        s.measure_hash = parse_hex(m.at("measure_hash"), base + ".json.meta.measure_hash");
        s.symmetric = m.at("symmetric").get<bool>();
        s.description = m.at("description").get<std::string>();
        s.values.resize(s.grid.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = {a.data[2 * i], a.data[2 * i + 1]};
        return s;
    });
}

void write_density_profile_csv(const std::string& path, const DensityField& d) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    const Lattice& l = d.lattice;
    const std::size_t M = l.M();
    std::size_t stride = 1, centre = 0;
    for (int a = l.dim() - 1; a >= 0; --a) {
        centre += (M / 2) * stride;
        if (a > 0) stride *= M;
    }
    // axis 0 is slowest; walk it through the centre of the other axes
    f << "radius,value\n";
    for (std::size_t n = M / 2; n < M; ++n) {
        const std::size_t node = centre + (n - M / 2) * stride;
        f << csv_number(l.axis_coordinate(n)) << "," << csv_number(d.values[node]) << "\n";
    }
}

}  // namespace levy
