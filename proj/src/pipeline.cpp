#include "madelung/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "madelung/exprlang.hpp"

namespace madelung {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxListedPlaquettes = 100;

json number(double v) { return std::isfinite(v) ? json(v) : json("masked"); }

json norms_json(const ScalarField* f, const Mask& interior) {
    if (!f) return "n/a";
    const Norms n = norms(*f, interior);
    if (n.count == 0) return "masked";
    return {{"max", number(n.max)}, {"rms", number(n.rms)}, {"median", number(n.median)}, {"count", n.count}};
}

ScalarField component(const VectorField& w, bool x) {
    ScalarField out(w.spec);
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w.valid(k)) out[k] = x ? w.x[k] : w.y[k];
        else out.invalidate(k);
    }
    return out;
}

ScalarField magnitude(const VectorField& w) {
    ScalarField out(w.spec);
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w.valid(k)) out[k] = std::hypot(w.x[k], w.y[k]);
        else out.invalidate(k);
    }
    return out;
}

std::string format_name(io::DumpFormat f) {
    switch (f) {
        case io::DumpFormat::Csv: return "csv";
        case io::DumpFormat::Binary: return "bin";
        case io::DumpFormat::Gnuplot: return "gnuplot";
    }
    return "?";
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// FNV-1a over the bytes of every dumped file, in manifest order.
std::string hash_files(const std::vector<std::filesystem::path>& files) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : files) {
        std::ifstream in(p, std::ios::binary);
        char buf[4096];
        while (in.read(buf, sizeof buf) || in.gcount() > 0) {
            for (std::streamsize n = 0; n < in.gcount(); ++n) {
                h ^= static_cast<unsigned char>(buf[n]);
                h *= 1099511628211ULL;
            }
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

json config_echo(const RunConfig& cfg) {
    const GridSpec s = cfg.grid.spec();
    return {
        {"grid", {{"nx", s.nx}, {"ny", s.ny}, {"domain", {cfg.grid.xmin, cfg.grid.xmax, cfg.grid.ymin, cfg.grid.ymax}},
                  {"x0", s.x0}, {"y0", s.y0}, {"dx", s.dx}, {"dy", s.dy}}},
        {"params", {{"hbar", cfg.params.hbar}, {"mass", cfg.params.mass}, {"kB", cfg.params.kB}}},
        {"nodeThreshold", cfg.nodeThreshold},
        {"tolerance", cfg.tolerance ? json(*cfg.tolerance) : json("default")},
        {"dump", format_name(cfg.dump)},
        {"out", cfg.outDir.string()},
    };
}

json vortex_summary(const MadelungFields& m) {
    const auto& s = m.spec();
    const auto& r = m.residues;
    const auto nz = r.nonzero();
    json list = json::array();
    for (std::size_t n = 0; n < nz.size() && n < kMaxListedPlaquettes; ++n) {
        const auto& p = nz[n];
        list.push_back({{"i", p.i}, {"j", p.j}, {"x", s.x(p.i) + 0.5 * s.dx}, {"y", s.y(p.j) + 0.5 * s.dy},
                        {"winding", p.winding}});
    }
    json holes = json::array();
    for (const auto& h : r.holes) {
        holes.push_back({{"loop", {h.i0, h.j0, h.i1, h.j1}},
                         {"x", 0.5 * (s.x(h.i0) + s.x(h.i1))},
                         {"y", 0.5 * (s.y(h.j0) + s.y(h.j1))},
                         {"cells", h.cells},
                         {"winding", h.winding ? json(*h.winding) : json("indeterminate")}});
    }
    return {{"total_winding", r.total()},
            {"nonzero_plaquettes", list},
            {"nonzero_plaquette_count", nz.size()},
            {"indeterminate_plaquettes", r.indeterminate()},
            {"holes", holes},
            {"vortex_free", r.vortex_free()}};
}

json verdicts_json(const PropertyVerdicts& v) {
    json out;
    for (std::size_t n = 0; n < v.p.size(); ++n) {
        const auto& p = v.p[n];
        json res;
        for (const auto& [k, val] : p.residuals) res[k] = number(val);
        out["P" + std::to_string(n + 1)] = {{"status", to_string(p.status)}, {"tol", p.tol}, {"residuals", res},
                                             {"note", p.note}};
    }
    return out;
}

struct Manifest {
    json entries = json::array();
    std::vector<std::filesystem::path> files;

    void add(const std::string& field, const std::filesystem::path& path) {
        entries.push_back({{"field", field}, {"path", path.string()}});
        files.push_back(path);
    }
};

Manifest dump_fields(const ComplexField& psi, const Analysis& a, const std::filesystem::path& dir,
                     io::DumpFormat fmt) {
    std::filesystem::create_directories(dir);
    Manifest man;
    auto put = [&](const std::string& name, const ScalarField& f) { man.add(name, io::write_field(f, dir / name, fmt)); };
    const auto [re, im] = io::write_complex(psi, dir / "psi", fmt);
    man.add("psi.re", re);
    man.add("psi.im", im);
    put("S", a.m.S);
    if (a.m.phase) put("I", *a.m.phase);
    put("gradS_x", component(a.m.gradS, true));
    put("gradS_y", component(a.m.gradS, false));
    put("gradI_x", component(a.m.gradI, true));
    put("gradI_y", component(a.m.gradI, false));
    put("rho", a.c.rho);
    put("J_x", component(a.c.J, true));
    put("J_y", component(a.c.J, false));
    put("divJ", a.c.divJ);
    put("defectC", a.c.defectC);
    put("defectA", a.c.defectA);
    if (a.c.Jtilde) {
        put("Jtilde_x", component(*a.c.Jtilde, true));
        put("Jtilde_y", component(*a.c.Jtilde, false));
        put("divJtilde", *a.c.divJtilde);
    }
    put("U", a.c.U);
    if (a.c.qhjResidual) put("qhjResidual", *a.c.qhjResidual);
    put("deBroglie", a.c.deBroglie);
    put("orth", a.r.orth);
    put("crStrict", a.r.crStrict);
    put("harmS", a.r.harmS);
    put("harmI", a.r.harmI);
    return man;
}

json norm_table(const Analysis& a) {
    const Mask& in = a.r.interior;
    const ScalarField gradS = magnitude(a.m.gradS);
    const ScalarField* divJt = a.c.divJtilde ? &*a.c.divJtilde : nullptr;
    const ScalarField* divJtr = a.c.divJtildeReduced ? &*a.c.divJtildeReduced : nullptr;
    const ScalarField* qhj = a.c.qhjResidual ? &*a.c.qhjResidual : nullptr;
    return {
        {"orth", norms_json(&a.r.orth, in)},
        {"crStrict", norms_json(&a.r.crStrict, in)},
        {"harmS", norms_json(&a.r.harmS, in)},
        {"harmI", norms_json(&a.r.harmI, in)},
        {"defectC", norms_json(&a.c.defectC, in)},
        {"defectA", norms_json(&a.c.defectA, in)},
        {"divJ", norms_json(&a.c.divJ, in)},
        {"divJtilde", norms_json(divJt, in)},
        {"divJtildeReduced", norms_json(divJtr, in)},
        {"qhjResidual", norms_json(qhj, in)},
        {"gradS", norms_json(&gradS, in)},
        {"U", norms_json(&a.c.U, in)},
    };
}

// Assembles the report, writes dumps and report.json, and returns the report.
json finish_report(const RunConfig& cfg, json provenance, const ComplexField& psi, const Analysis& a,
                   std::optional<double> E, json energies) {
    const Manifest man = dump_fields(psi, a, cfg.outDir, cfg.dump);
    json jt = {{"available", a.c.Jtilde.has_value()},
               {"normalization", "hbar/m * exp(2 (I - max I)) * grad S"},
               {"convention_dependent", true}};
    if (a.c.vortex) jt["reason"] = a.c.vortex->what();

    json report = {
        {"config", config_echo(cfg)},
        {"provenance", std::move(provenance)},
        {"energy", E ? json(*E) : json("n/a")},
        {"energies", std::move(energies)},
        {"tolerance", a.tol},
        {"norms", norm_table(a)},
        {"vortices", vortex_summary(a.m)},
        {"jtilde", jt},
        {"verdicts", verdicts_json(a.verdicts)},
        {"manifest", man.entries},
        {"manifest_hash", hash_files(man.files)},
        {"timestamp", timestamp_utc()},
    };
    std::ofstream out(cfg.outDir / "report.json");
    out << report.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write report.json in " + cfg.outDir.string());
    return report;
}

ScalarField potential_field(const std::string& text, const GridSpec& spec) {
    const ComplexField v = expr::parse(text).eval_field(spec);
    return v.real();
}

struct LoadedState {
    ComplexField psi;
    std::optional<ScalarField> V;
    std::optional<double> E;
    json provenance;
};

LoadedState load_state(const RunConfig& cfg, const GridSpec& spec) {
    LoadedState st;
    if (cfg.source == StateSource::Psi) {
        st.psi = expr::parse(cfg.psi).eval_field(spec);
        st.provenance = {{"source", "psi"}, {"expression", cfg.psi}};
        if (!cfg.potential.empty()) {
            st.V = potential_field(cfg.potential, spec);
            st.provenance["potential"] = cfg.potential;
        } else if (cfg.energy) {
            st.V = ScalarField(spec, 0.0);
            st.provenance["potential"] = "0";
        }
        st.E = cfg.energy;
    } else if (cfg.source == StateSource::Builtin) {
        CatalogState cs = builtin_state(cfg.builtin, cfg.builtinParams, spec, cfg.params);
        st.psi = std::move(cs.psi);
        st.V = std::move(cs.potential);
        st.E = cfg.energy ? cfg.energy : cs.energy;
        const auto& b = cfg.builtinParams;
        st.provenance = {{"source", "builtin"},
                         {"name", cfg.builtin},
                         {"description", cs.description},
                         {"parameters", {{"k1", b.k1}, {"k2", b.k2}, {"l", b.l}, {"n1", b.n1}, {"n2", b.n2}, {"sigma", b.sigma}}},
                         {"catalog_energy", cs.energy ? json(*cs.energy) : json("n/a")}};
    } else {
        throw std::invalid_argument("this command needs --psi or --builtin");
    }
    return st;
}

RunResult failure(const std::string& msg) { return {kExitFailure, json(), msg}; }

std::vector<std::string> split_top_level(const std::string& s) {
    std::vector<std::string> out(1);
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) out.emplace_back();
        else out.back() += ch;
    }
    return out;
}

bool uses_variables(const expr::Node& n) {
    if (n.kind == expr::Node::Kind::Variable) return true;
    for (const auto& c : n.children)
        if (uses_variables(*c)) return true;
    return false;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

CombineSpec parse_combine(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--combine expects 'i,j,...:c1,c2,...'");
    CombineSpec c;
    c.text = text;
    for (const auto& raw : split_top_level(text.substr(0, colon))) {
        const std::string tok = trimmed(raw);
        std::size_t v = 0;
        const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size())
            throw std::invalid_argument("--combine: bad index '" + raw + "'");
        c.indices.push_back(v);
    }
    for (const auto& tok : split_top_level(text.substr(colon + 1))) {
        const expr::Expr e = expr::parse(tok);
        if (uses_variables(e.root())) throw std::invalid_argument("--combine: coefficient '" + tok + "' uses x or y");
        const auto v = e.eval(0.0, 0.0);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("--combine: coefficient '" + tok + "' is not finite");
        c.coeffs.push_back(v);
    }
    if (c.indices.empty()) throw std::invalid_argument("--combine: no indices");
    if (c.indices.size() != c.coeffs.size())
        throw std::invalid_argument("--combine: number of indices and coefficients differ");
    return c;
}

GridRequest GridRequest::refined() const {
    GridRequest g = *this;
    g.nx = 2 * (nx + 1) - 1;
    g.ny = 2 * (ny + 1) - 1;
    return g;
}

void RunConfig::validate() const {
    grid.spec().validate();
    params.validate();
    if (!(nodeThreshold > 0.0 && nodeThreshold < 1.0)) throw std::invalid_argument("node threshold must lie in (0, 1)");
    if (tolerance && !(*tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    switch (source) {
        case StateSource::Psi:
            if (psi.empty()) throw std::invalid_argument("--psi is empty");
            break;
        case StateSource::Builtin:
            if (builtin.empty()) throw std::invalid_argument("--builtin is empty");
            break;
        case StateSource::Solve:
            if (potential.empty()) throw std::invalid_argument("--potential is required for solve");
            if (solver.count < 1 || solver.count > 20) throw std::invalid_argument("--count must lie in [1, 20]");
            if (!(solver.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
            break;
    }
}

Analysis analyze_state(const ComplexField& psi, const RunConfig& cfg, const ScalarField* V, std::optional<double> E) {
    Analysis a{decompose(psi, cfg.nodeThreshold), {}, {}, {}, 0.0};
    a.c = compute_currents(a.m, cfg.params, V, E);
    a.r = analyze(a.m);
    a.tol = cfg.tolerance.value_or(default_tolerance(a.m));
    a.verdicts = check_properties(a.m, a.c, a.r, a.tol);
    return a;
}

RunResult cmd_analyze(const RunConfig& cfg) {
    try {
        cfg.validate();
        const GridSpec spec = cfg.grid.spec();
        LoadedState st = load_state(cfg, spec);
        const Analysis a = analyze_state(st.psi, cfg, st.V ? &*st.V : nullptr, st.E);
        RunResult res;
        res.report = finish_report(cfg, st.provenance, st.psi, a, st.E, "n/a");
        res.exitCode = a.c.vortex ? kExitVortex : kExitOk;
        res.message = a.c.vortex ? "diagnostics complete; Jtilde unavailable: " + std::string(a.c.vortex->what())
                                 : "diagnostics complete";
        return res;
    } catch (const expr::ParseError& e) {
        return failure(e.what());
    } catch (const std::exception& e) {
        return failure(e.what());
    }
}

RunResult cmd_solve(const RunConfig& cfg) {
    try {
        cfg.validate();
        const GridSpec spec = cfg.grid.spec();
        const ScalarField V = potential_field(cfg.potential, spec);
        const Hamiltonian H = assemble(V, cfg.params);
        json provenance = {{"source", "solve"},
                           {"potential", cfg.potential},
                           {"count", cfg.solver.count},
                           {"tol", cfg.solver.tol},
                           {"maxIter", cfg.solver.maxIter},
                           {"seed", cfg.solver.seed}};

        auto energies_json = [](const EigenSolution& sol) {
            json e = {{"values", sol.energies}, {"residuals", sol.residuals}, {"iterations", sol.iterations}};
            return e;
        };

        EigenSolution sol;
        try {
            sol = solve_lowest(H, cfg.solver);
        } catch (const SolverError& e) {
            RunResult res;
            res.exitCode = kExitNoConvergence;
            res.message = e.what();
            res.report = {{"config", config_echo(cfg)},
                          {"provenance", provenance},
                          {"energies", energies_json(e.best())},
                          {"error", e.what()},
                          {"timestamp", timestamp_utc()}};
            std::filesystem::create_directories(cfg.outDir);
            std::ofstream(cfg.outDir / "report.json") << res.report.dump(2) << '\n';
            return res;
        }

        json energies = energies_json(sol);
        ComplexField psi;
        double E = 0.0;
        if (cfg.combine) {
            const CombinedState cs = combine(sol, cfg.combine->indices, cfg.combine->coeffs);
            psi = cs.psi;
            E = cs.energy;
            json coeffs = json::array();
            for (const auto& c : cfg.combine->coeffs) coeffs.push_back({c.real(), c.imag()});
            energies["combined"] = {{"indices", cfg.combine->indices}, {"coeffs", coeffs}, {"energy", E},
                                    {"spec", cfg.combine->text}};
        } else {
            psi = sol.states.front();
            E = sol.energies.front();
            energies["analyzed_state"] = 0;
        }
        const Analysis a = analyze_state(psi, cfg, &V, E);
        RunResult res;
        res.report = finish_report(cfg, provenance, psi, a, E, energies);
        res.exitCode = a.c.vortex ? kExitVortex : kExitOk;
        res.message = a.c.vortex ? "diagnostics complete; Jtilde unavailable: " + std::string(a.c.vortex->what())
                                 : "diagnostics complete";
        return res;
    } catch (const std::exception& e) {
        return failure(e.what());
    }
}

int cmd_convergence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    static const char* kMetrics[] = {"orth", "crStrict", "harmS", "harmI", "defectC",
                                     "defectA", "divJ", "divJtildeReduced", "qhjResidual"};
    constexpr double kFloor = 1e-10;
    try {
        cfg.validate();
        if (cfg.convergenceLevels < 2) throw std::invalid_argument("convergence needs at least 2 levels");
        struct Row {
            GridRequest grid;
            double h;
            std::vector<std::optional<double>> values;
        };
        std::vector<Row> rows;
        GridRequest g = cfg.grid;
        for (std::size_t level = 0; level < cfg.convergenceLevels; ++level, g = g.refined()) {
            RunConfig c = cfg;
            c.grid = g;
            const GridSpec spec = g.spec();
            LoadedState st = load_state(c, spec);
            const Analysis a = analyze_state(st.psi, c, st.V ? &*st.V : nullptr, st.E);
            const Mask& in = a.r.interior;
            const ScalarField* fields[] = {&a.r.orth, &a.r.crStrict, &a.r.harmS, &a.r.harmI, &a.c.defectC,
                                           &a.c.defectA, &a.c.divJ,
                                           a.c.divJtildeReduced ? &*a.c.divJtildeReduced : nullptr,
                                           a.c.qhjResidual ? &*a.c.qhjResidual : nullptr};
            Row row{g, spec.h(), {}};
            for (const ScalarField* f : fields) {
                if (!f) {
                    row.values.emplace_back();
                    continue;
                }
                const Norms n = norms(*f, in);
                row.values.push_back(n.count ? std::optional<double>(n.max) : std::nullopt);
            }
            rows.push_back(std::move(row));
        }

        out << "level,nx,ny,h";
        for (const char* m : kMetrics) out << ',' << m << ',' << m << "_order";
        out << '\n';
        out << std::setprecision(10);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            out << r << ',' << row.grid.nx << ',' << row.grid.ny << ',' << row.h;
            for (std::size_t m = 0; m < row.values.size(); ++m) {
                const auto& v = row.values[m];
                if (v) out << ',' << *v;
                else out << ",n/a";
                if (r == 0) {
                    out << ",n/a";
                    continue;
                }
                const auto& prev = rows[r - 1].values[m];
                if (v && prev && *v > kFloor && *prev > kFloor)
                    out << ',' << std::log(*prev / *v) / std::log(rows[r - 1].h / row.h);
                else
                    out << ",n/a";
            }
            out << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

json strip_volatile(json report) {
    report.erase("timestamp");
    report.erase("manifest_hash");
    return report;
}

}  // namespace madelung
