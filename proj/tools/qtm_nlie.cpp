// Command-line front end: loads a TOML run configuration, dispatches to the
// solver pipelines, and writes deterministic JSON/CSV artifacts.

#include "qtm/bethe.hpp"
#include "qtm/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

using json = nlohmann::ordered_json;
using namespace qtm;

// ------------------------------------------------------------- serializing --
// dump with %.17g floats and stable field order (ordered_json preserves
// insertion order; nlohmann's own float printer is shortest-roundtrip)
static void dump_json(const json& j, std::ostream& os, int indent = 0) {
    auto pad = [&](int n) { for (int i = 0; i < n; ++i) os << ' '; };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { os << "{}"; return; }
            os << "{\n";
            size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                pad(indent + 2);
                os << '"' << it.key() << "\": ";
                dump_json(it.value(), os, indent + 2);
                if (k + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(indent);
            os << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { os << "[]"; return; }
            os << "[\n";
            for (size_t k = 0; k < j.size(); ++k) {
                pad(indent + 2);
                dump_json(j[k], os, indent + 2);
                if (k + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(indent);
            os << ']';
            return;
        }
        case json::value_t::number_float:
            os << num17(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

static json jcplx(cplx z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

static json jspec(const std::vector<RootSpec>& spec) {
    json a = json::array();
    for (const RootSpec& r : spec)
        a.push_back(json{{"side", r.side},
                         {"particle", r.particle},
                         {"n", r.n}});
    return a;
}

struct Output {
    std::string path;       // empty: stdout
    std::ofstream log;
    void open_log() {
        if (!path.empty()) log.open(path + ".log");
    }
    void diag(const std::string& line) {
        if (log.is_open()) log << line << "\n";
        else std::cerr << line << "\n";
    }
    void write(const std::string& text) {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(path);
        if (!f) throw err("ConfigParse", "cannot open output file '" + path + "'");
        f << text;
    }
};

static std::string render(const json& j) {
    std::ostringstream os;
    dump_json(j, os);
    os << "\n";
    return os.str();
}

// ------------------------------------------------------------- pipelines ----
static json solve_record(const DressedSuite& S, const QuantisationResult& R) {
    json o;
    o["s"] = R.sol.ex.s;
    o["spec"] = jspec(R.spec);
    json roots = json::array();
    for (cplx r : R.roots) roots.push_back(jcplx(r));
    o["roots"] = roots;
    o["outer_iterations"] = R.outer_iterations;
    o["nlie_iterations"] = R.sol.iterations;
    o["root_residual"] = R.root_residual;
    o["qR"] = jcplx(R.sol.C.qR);
    o["qL"] = jcplx(R.sol.C.qL);
    o["momentum"] = jcplx(momentum_P(R.sol));
    o["energy"] = jcplx(energy_E(R.sol));
    o["log_eigenvalue"] = jcplx(log_eigenvalue(R.sol));
    (void)S;
    return o;
}

static int run_command(const std::string& cmd, RunConfig& cfg, Output& out) {
    validate_params(cfg.model);
    fill_derived(cfg.model);

    if (cmd == "dressed") {
        DressedSuite S = dressed_suite(cfg.model, cfg.qo);
        cplx q(S.q, 0.0);
        json o;
        o["q"] = S.q;
        o["vF"] = S.vF;
        o["tau"] = jcplx(S.tau);
        o["eps_prime_q"] = jcplx(S.eps_prime_at(q));
        o["Z_q"] = jcplx(S.Z_at(q));
        o["p_q"] = jcplx(S.mom_at(q));
        o["det_segment"] = fredholm_det_segment(cfg.model, S.q, cfg.qo.seg_panels, cfg.qo.seg_order);
        auto sl = slavnov_check(S);
        o["fermi_relation_dev"] = json::array({sl.first, sl.second});
        out.write(render(o));
        return 0;
    }

    if (cmd == "contour") {
        DressedSuite S = dressed_suite(cfg.model, cfg.qo);
        Contour C = build_ref_contour(S, cfg.nopt.copt);
        std::ostringstream os;
        write_contour_csv(C, os);
        out.write(os.str());
        out.diag("contour: " + std::to_string(C.grid.nodes.size()) + " nodes");
        return 0;
    }

    if (cmd == "solve-nlie" || cmd == "excite") {
        DressedSuite S = dressed_suite(cfg.model, cfg.qo);
        int s = (cmd == "excite") ? cfg.exc.s : 0;
        std::vector<RootSpec> spec = (cmd == "excite") ? cfg.exc.spec
                                                       : std::vector<RootSpec>{};
        QuantisationResult R = solve_quantisation(S, s, spec, cfg.qopt);
        out.diag("solve: outer=" + std::to_string(R.outer_iterations) +
                 " nlie_iters=" + std::to_string(R.sol.iterations));
        json o = solve_record(S, R);
        if (cmd == "excite" && !(s == 0 && spec.empty())) {
            QuantisationResult dom = solve_quantisation(S, 0, {}, cfg.qopt);
            o["correlation_length"] =
                correlation_length(momentum_P(R.sol), momentum_P(dom.sol));
        }
        out.write(render(o));
        return 0;
    }

    if (cmd == "spectrum") {
        DressedSuite S = dressed_suite(cfg.model, cfg.qo);
        auto entries = eigenvalue_and_lengths(S, cfg.max_exc, cfg.max_n, cfg.qopt);
        if (cfg.format == "csv") {
            std::ostringstream os;
            os << "rank,s,n_exc,re_P,im_P,re_logL,im_logL,xi\n";
            for (size_t k = 0; k < entries.size(); ++k) {
                const auto& e = entries[k];
                os << k << ',' << e.s << ',' << e.spec.size() << ','
                   << num17(e.P.real()) << ',' << num17(e.P.imag()) << ','
                   << num17(e.logL.real()) << ',' << num17(e.logL.imag()) << ','
                   << num17(e.xi) << "\n";
            }
            out.write(os.str());
        } else {
            json arr = json::array();
            for (const auto& e : entries) {
                json o;
                o["s"] = e.s;
                o["spec"] = jspec(e.spec);
                o["momentum"] = jcplx(e.P);
                o["log_eigenvalue"] = jcplx(e.logL);
                o["correlation_length"] = e.xi;
                arr.push_back(o);
            }
            out.write(render(arr));
        }
        return 0;
    }

    if (cmd == "cft-check") {
        auto rows = cft_spectrum_check(cfg.model, cfg.exc.s, cfg.exc.spec,
                                       cfg.cft_temps, cfg.qo, cfg.qopt);
        double ups = 0.0;
        for (const RootSpec& r : cfg.exc.spec) ups += r.n + 0.5;
        if (cfg.format == "csv") {
            std::ostringstream os;
            os << "T,measured,predicted,deviation,upsilon\n";
            for (const auto& r : rows)
                os << num17(r.T) << ',' << num17(r.measured) << ','
                   << num17(r.predicted) << ',' << num17(r.deviation) << ','
                   << num17(ups) << "\n";
            out.write(os.str());
        } else {
            json arr = json::array();
            for (const auto& r : rows)
                arr.push_back(json{{"T", r.T},
                                   {"measured", r.measured},
                                   {"predicted", r.predicted},
                                   {"deviation", r.deviation},
                                   {"upsilon", ups}});
            out.write(render(arr));
        }
        return 0;
    }

    if (cmd == "bethe-check") {
        if (!cfg.model.finite_trotter())
            throw err("ConfigParse", "bethe-check requires trotter_n > 0");
        DressedSuite S = dressed_suite(cfg.model, cfg.qo);
        ExcitationSet ex;
        ex.s = cfg.exc.s;
        NlieSolution sol = fixed_point_solve(S, ex, cfg.nopt);
        BetheClosure bc = bethe_closure(sol);
        json o;
        o["trotter_n"] = cfg.model.trotter_N;
        o["n_roots"] = int(bc.roots.roots.size());
        o["n_expected"] = bc.roots.n_expected;
        o["n_inadmissible"] = bc.roots.n_inadmissible;
        o["n_string_like"] = bc.roots.n_string_like;
        json roots = json::array();
        for (cplx r : bc.polished) roots.push_back(jcplx(r));
        o["roots"] = roots;
        o["max_bae_residual"] = bc.max_bae_residual;
        o["max_root_shift"] = bc.max_root_shift;
        o["log_eigenvalue_product"] = jcplx(bc.log_lambda_product);
        o["log_eigenvalue_integral"] = jcplx(bc.log_lambda_integral);
        o["eigenvalue_rel_dev"] = bc.eigenvalue_rel_dev;
        o["gaudin_discrete"] = jcplx(bc.gaudin.discrete);
        o["gaudin_fredholm"] = jcplx(bc.gaudin.fredholm);
        o["gaudin_finite_block"] = jcplx(bc.gaudin.finite_block);
        o["gaudin_residual"] = bc.gaudin.residual;
        out.write(render(o));
        return 0;
    }

    if (cmd == "sweep") {
        std::vector<std::pair<double, int>> points;
        std::vector<double> temps =
            cfg.sweep_temps.empty() ? std::vector<double>{cfg.model.T}
                                    : cfg.sweep_temps;
        std::vector<int> ns = cfg.sweep_trotter.empty()
                                  ? std::vector<int>{cfg.model.trotter_N}
                                  : cfg.sweep_trotter;
        for (double T : temps)
            for (int N : ns) points.push_back({T, N});

        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("QTM_NLIE_THREADS"))
            hw = std::max(1u, unsigned(std::atoi(env)));
        hw = std::min<unsigned>(hw, points.size());

        std::vector<json> results(points.size());
        std::vector<std::string> errors(points.size());
        std::mutex mx;
        size_t next = 0;
        auto worker = [&] {
            for (;;) {
                size_t k;
                {
                    std::lock_guard<std::mutex> g(mx);
                    if (next >= points.size()) return;
                    k = next++;
                }
                ModelParams p = cfg.model;
                p.T = points[k].first;
                p.trotter_N = points[k].second;
                try {
                    validate_params(p);
                    fill_derived(p);
                    DressedSuite S = dressed_suite(p, cfg.qo);
                    QuantisationResult R = solve_quantisation(
                        S, cfg.exc.s, cfg.exc.spec, cfg.qopt);
                    json o = solve_record(S, R);
                    json rec;
                    rec["temperature"] = p.T;
                    rec["trotter_n"] = p.trotter_N;
                    for (auto it = o.begin(); it != o.end(); ++it)
                        rec[it.key()] = it.value();
                    results[k] = rec;
                } catch (const std::exception& e) {
                    errors[k] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < hw; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (size_t k = 0; k < points.size(); ++k)
            if (!errors[k].empty())
                throw err("NoConvergence",
                          "sweep point T=" + num17(points[k].first) +
                          " N=" + std::to_string(points[k].second) +
                          " failed: " + errors[k]);
        json arr = json::array();
        for (auto& r : results) arr.push_back(std::move(r));
        out.write(render(arr));
        return 0;
    }

    throw err("Usage", "unknown command '" + cmd + "'");
}

// ------------------------------------------------------------------ main ----
int main(int argc, char** argv) {
    CLI::App app{"low-temperature quantum-transfer-matrix spectrum solver"};
    app.require_subcommand(1);
    std::string config_path;
    double ov_T = -1.0, ov_tol = -1.0;
    int ov_N = -1, ov_quad = -1;
    std::string ov_out;

    std::vector<std::string> names = {"dressed",  "contour",  "solve-nlie",
                                      "excite",   "spectrum", "cft-check",
                                      "bethe-check", "sweep"};
    for (const auto& n : names) {
        auto* sub = app.add_subcommand(n);
        sub->add_option("--config", config_path, "TOML configuration file");
        sub->add_option("--temperature", ov_T, "override model temperature");
        sub->add_option("--trotter-n", ov_N, "override Trotter number");
        sub->add_option("--quad-order", ov_quad, "override segment quadrature order");
        sub->add_option("--tol", ov_tol, "override solver tolerance");
        sub->add_option("--out", ov_out, "override output path");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (ov_T > 0.0) cfg.model.T = ov_T;
        if (ov_N >= 0) cfg.model.trotter_N = ov_N;
        if (ov_quad > 0) cfg.qo.seg_order = ov_quad;
        if (ov_tol > 0.0) {
            cfg.nopt.tol = ov_tol;
            cfg.qopt.nopt.tol = ov_tol;
            cfg.qopt.rtol = ov_tol;
        }
        if (!ov_out.empty()) cfg.out_path = ov_out;
        cfg.qopt.nopt = cfg.nopt;

        Output out;
        out.path = cfg.out_path;
        out.open_log();
        return run_command(app.get_subcommands()[0]->get_name(), cfg, out);
    } catch (const QtmError& e) {
        std::cerr << "error: " << e.what() << "\n";
        bool config_class = e.kind == "ConfigParse" || e.kind == "Usage" ||
                            e.kind == "NonPositive" || e.kind == "OutOfRegime" ||
                            e.kind == "OddTrotter";
        return config_class ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
