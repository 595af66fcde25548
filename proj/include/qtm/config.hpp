#pragma once

// Run configuration: a small TOML-subset reader (sections, array-of-tables,
// scalars and flat arrays), the typed RunConfig it populates, a TOML emitter
// for round-tripping, and fixed-precision JSON/CSV number formatting.

#include "qtm/excitations.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace qtm {

// ------------------------------------------------------------ TOML subset --
namespace toml_mini {

struct Value {
    enum Kind { Bool, Int, Float, Str, Arr } kind = Float;
    bool b = false;
    long long i = 0;
    double f = 0.0;
    std::string s;
    std::vector<Value> arr;
};

using Table = std::map<std::string, Value>;

struct Doc {
    std::map<std::string, Table> tables;                 // [section]
    std::map<std::string, std::vector<Table>> arrays;    // [[section]]
};

inline std::string strip(const std::string& in) {
    size_t a = in.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = in.find_last_not_of(" \t\r");
    return in.substr(a, b - a + 1);
}

inline Value parse_value(const std::string& raw);

inline Value parse_scalar(const std::string& t) {
    Value v;
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        v.kind = Value::Str;
        v.s = t.substr(1, t.size() - 2);
        return v;
    }
    if (t == "true" || t == "false") {
        v.kind = Value::Bool;
        v.b = (t == "true");
        return v;
    }
    if (t.find_first_of(".eE") == std::string::npos ||
        (t.size() > 1 && (t.substr(0, 2) == "0x"))) {
        char* end = nullptr;
        long long iv = std::strtoll(t.c_str(), &end, 10);
        if (end && *end == '\0') {
            v.kind = Value::Int;
            v.i = iv;
            v.f = double(iv);
            return v;
        }
    }
    char* end = nullptr;
    double fv = std::strtod(t.c_str(), &end);
    if (!end || *end != '\0')
        throw err("ConfigParse", "bad scalar '" + t + "'");
    v.kind = Value::Float;
    v.f = fv;
    return v;
}

inline Value parse_value(const std::string& raw) {
    std::string t = strip(raw);
    if (t.empty()) throw err("ConfigParse", "empty value");
    if (t.front() == '[') {
        if (t.back() != ']') throw err("ConfigParse", "unterminated array");
        Value v;
        v.kind = Value::Arr;
        std::string body = t.substr(1, t.size() - 2);
        std::string cur;
        for (char c : body) {
            if (c == ',') {
                if (!strip(cur).empty()) v.arr.push_back(parse_scalar(strip(cur)));
                cur.clear();
            } else
                cur += c;
        }
        if (!strip(cur).empty()) v.arr.push_back(parse_scalar(strip(cur)));
        return v;
    }
    return parse_scalar(t);
}

inline Doc parse(std::istream& in) {
    Doc doc;
    Table* cur = &doc.tables[""];
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        // strip comments (strings in this subset never contain '#')
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            bool arr = line.size() > 1 && line[1] == '[';
            size_t close = line.find(arr ? "]]" : "]");
            if (close == std::string::npos)
                throw err("ConfigParse", "bad section header at line " + std::to_string(ln));
            std::string name = strip(line.substr(arr ? 2 : 1, close - (arr ? 2 : 1)));
            if (arr) {
                doc.arrays[name].push_back({});
                cur = &doc.arrays[name].back();
            } else
                cur = &doc.tables[name];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw err("ConfigParse", "expected key = value at line " + std::to_string(ln));
        std::string key = strip(line.substr(0, eq));
        (*cur)[key] = parse_value(line.substr(eq + 1));
    }
    return doc;
}

inline Doc parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw err("ConfigParse", "cannot open config file '" + path + "'");
    return parse(in);
}

} // namespace toml_mini

// 17-significant-digit float formatting shared by all serializers
inline std::string num17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------- config ----
struct ExcitationConfig {
    int s = 0;
    std::vector<RootSpec> spec;
};

struct RunConfig {
    ModelParams model;
    QuadOrders qo;
    NlieOptions nopt;
    QuantisationOptions qopt;
    int max_exc = 2;
    int max_n = 1;
    std::vector<double> cft_temps{0.05, 0.025, 0.0125};
    ExcitationConfig exc;
    std::vector<double> sweep_temps;
    std::vector<int> sweep_trotter;
    std::string out_path;        // empty: stdout
    std::string format = "json"; // json | csv
};

namespace detail {
inline void want(const toml_mini::Table& t, const char* key, double& dst) {
    auto it = t.find(key);
    if (it != t.end()) dst = it->second.kind == toml_mini::Value::Int
                                 ? double(it->second.i)
                                 : it->second.f;
}
inline void want(const toml_mini::Table& t, const char* key, int& dst) {
    auto it = t.find(key);
    if (it == t.end()) return;
    if (it->second.kind != toml_mini::Value::Int)
        throw err("ConfigParse", std::string("key '") + key + "' must be an integer");
    dst = int(it->second.i);
}
inline void want(const toml_mini::Table& t, const char* key, bool& dst) {
    auto it = t.find(key);
    if (it != t.end()) {
        if (it->second.kind != toml_mini::Value::Bool)
            throw err("ConfigParse", std::string("key '") + key + "' must be a boolean");
        dst = it->second.b;
    }
}
inline void want(const toml_mini::Table& t, const char* key, std::string& dst) {
    auto it = t.find(key);
    if (it != t.end()) dst = it->second.s;
}
inline void want(const toml_mini::Table& t, const char* key,
                 std::vector<double>& dst) {
    auto it = t.find(key);
    if (it == t.end()) return;
    dst.clear();
    for (const auto& v : it->second.arr)
        dst.push_back(v.kind == toml_mini::Value::Int ? double(v.i) : v.f);
}
inline void want(const toml_mini::Table& t, const char* key,
                 std::vector<int>& dst) {
    auto it = t.find(key);
    if (it == t.end()) return;
    dst.clear();
    for (const auto& v : it->second.arr) dst.push_back(int(v.i));
}
} // namespace detail

inline RunConfig config_from_doc(const toml_mini::Doc& doc) {
    RunConfig c;
    auto table = [&](const char* name) -> const toml_mini::Table& {
        static const toml_mini::Table empty;
        auto it = doc.tables.find(name);
        return it == doc.tables.end() ? empty : it->second;
    };
    const auto& m = table("model");
    detail::want(m, "J", c.model.J);
    detail::want(m, "zeta", c.model.zeta);
    detail::want(m, "h", c.model.h);
    detail::want(m, "temperature", c.model.T);
    detail::want(m, "trotter_n", c.model.trotter_N);
    detail::want(m, "M", c.model.M);
    detail::want(m, "c_d", c.model.c_d);

    const auto& n = table("numerics");
    detail::want(n, "quad_order", c.qo.seg_order);
    detail::want(n, "seg_panels", c.qo.seg_panels);
    detail::want(n, "curve_order", c.qo.curve_order);
    detail::want(n, "tol", c.nopt.tol);
    detail::want(n, "max_iter", c.nopt.max_iter);
    detail::want(n, "win_order", c.nopt.copt.win_order);
    detail::want(n, "rail_order", c.nopt.copt.rail_order);
    detail::want(n, "rail_panels", c.nopt.copt.rail_panels);
    detail::want(n, "arc_order", c.nopt.copt.arc_order);
    detail::want(n, "arc_panels", c.nopt.copt.arc_panels);
    detail::want(n, "rtol", c.qopt.rtol);
    detail::want(n, "max_outer", c.qopt.max_outer);

    const auto& sp = table("spectrum");
    detail::want(sp, "max_exc", c.max_exc);
    detail::want(sp, "max_n", c.max_n);

    detail::want(table("cft"), "temperatures", c.cft_temps);

    const auto& e = table("excitation");
    detail::want(e, "s", c.exc.s);
    auto roots = doc.arrays.find("root");
    if (roots != doc.arrays.end())
        for (const auto& rt : roots->second) {
            RootSpec r;
            detail::want(rt, "side", r.side);
            detail::want(rt, "particle", r.particle);
            detail::want(rt, "n", r.n);
            if (r.side != 1 && r.side != -1)
                throw err("ConfigParse", "root side must be +1 or -1");
            if (r.n < 0) throw err("ConfigParse", "root n must be >= 0");
            c.exc.spec.push_back(r);
        }

    const auto& sw = table("sweep");
    detail::want(sw, "temperatures", c.sweep_temps);
    detail::want(sw, "trotter", c.sweep_trotter);

    const auto& o = table("output");
    detail::want(o, "path", c.out_path);
    detail::want(o, "format", c.format);
    if (c.format != "json" && c.format != "csv")
        throw err("ConfigParse", "output format must be json or csv");

    c.qopt.nopt = c.nopt;
    return c;
}

inline RunConfig load_config(const std::string& path) {
    return config_from_doc(toml_mini::parse_file(path));
}

// emit a TOML document that parses back to the identical RunConfig
inline std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[model]\n";
    os << "J = " << num17(c.model.J) << "\n";
    os << "zeta = " << num17(c.model.zeta) << "\n";
    os << "h = " << num17(c.model.h) << "\n";
    os << "temperature = " << num17(c.model.T) << "\n";
    os << "trotter_n = " << c.model.trotter_N << "\n";
    os << "M = " << num17(c.model.M) << "\n";
    os << "c_d = " << num17(c.model.c_d) << "\n";
    os << "\n[numerics]\n";
    os << "quad_order = " << c.qo.seg_order << "\n";
    os << "seg_panels = " << c.qo.seg_panels << "\n";
    os << "curve_order = " << c.qo.curve_order << "\n";
    os << "tol = " << num17(c.nopt.tol) << "\n";
    os << "max_iter = " << c.nopt.max_iter << "\n";
    os << "win_order = " << c.nopt.copt.win_order << "\n";
    os << "rail_order = " << c.nopt.copt.rail_order << "\n";
    os << "rail_panels = " << c.nopt.copt.rail_panels << "\n";
    os << "arc_order = " << c.nopt.copt.arc_order << "\n";
    os << "arc_panels = " << c.nopt.copt.arc_panels << "\n";
    os << "rtol = " << num17(c.qopt.rtol) << "\n";
    os << "max_outer = " << c.qopt.max_outer << "\n";
    os << "\n[spectrum]\n";
    os << "max_exc = " << c.max_exc << "\n";
    os << "max_n = " << c.max_n << "\n";
    os << "\n[cft]\ntemperatures = [";
    for (size_t i = 0; i < c.cft_temps.size(); ++i)
        os << (i ? ", " : "") << num17(c.cft_temps[i]);
    os << "]\n";
    os << "\n[excitation]\ns = " << c.exc.s << "\n";
    for (const RootSpec& r : c.exc.spec) {
        os << "\n[[root]]\n";
        os << "side = " << r.side << "\n";
        os << "particle = " << (r.particle ? "true" : "false") << "\n";
        os << "n = " << r.n << "\n";
    }
    os << "\n[sweep]\ntemperatures = [";
    for (size_t i = 0; i < c.sweep_temps.size(); ++i)
        os << (i ? ", " : "") << num17(c.sweep_temps[i]);
    os << "]\ntrotter = [";
    for (size_t i = 0; i < c.sweep_trotter.size(); ++i)
        os << (i ? ", " : "") << c.sweep_trotter[i];
    os << "]\n";
    os << "\n[output]\n";
    os << "path = \"" << c.out_path << "\"\n";
    os << "format = \"" << c.format << "\"\n";
    return os.str();
}

} // namespace qtm
