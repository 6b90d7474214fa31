#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "madelung/exprlang.hpp"
#include "madelung/pipeline.hpp"

using namespace madelung;

namespace {

struct Flags {
    std::string grid = "97x97";
    std::string domain = "-6,6,-6,6";
    std::string dump = "bin";
    std::optional<std::string> combine;
};

GridRequest parse_grid(const std::string& grid, const std::string& domain) {
    GridRequest g;
    const auto x = grid.find('x');
    if (x == std::string::npos) throw std::invalid_argument("--grid expects NXxNY, got '" + grid + "'");
    try {
        std::size_t a = 0, b = 0;
        const std::string sx = grid.substr(0, x), sy = grid.substr(x + 1);
        g.nx = std::stoul(sx, &a);
        g.ny = std::stoul(sy, &b);
        if (a != sx.size() || b != sy.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("--grid expects NXxNY, got '" + grid + "'");
    }
    double v[4];
    std::size_t pos = 0;
    for (int n = 0; n < 4; ++n) {
        const auto comma = n < 3 ? domain.find(',', pos) : domain.size();
        if (comma == std::string::npos) throw std::invalid_argument("--domain expects x0,x1,y0,y1");
        const std::string tok = domain.substr(pos, comma - pos);
        std::size_t used = 0;
        try {
            v[n] = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("--domain: bad number '" + tok + "'");
        }
        if (used != tok.size()) throw std::invalid_argument("--domain: bad number '" + tok + "'");
        pos = comma + 1;
    }
    g.xmin = v[0];
    g.xmax = v[1];
    g.ymin = v[2];
    g.ymax = v[3];
    return g;
}

// Parses an expression flag up front so errors can point into the text.
bool check_expression(const std::string& flag, const std::string& text) {
    try {
        (void)expr::parse(text);
        return true;
    } catch (const expr::ParseError& e) {
        std::cerr << "error: " << flag << ": " << e.message();
        if (!e.expected().empty()) std::cerr << " (expected " << e.expected() << ")";
        std::cerr << " at offset " << e.offset() << "\n  " << text << "\n  " << std::string(e.offset(), ' ')
                  << "^\n";
        return false;
    }
}

void add_common(CLI::App* cmd, RunConfig& cfg, Flags& f) {
    cmd->add_option("--grid", f.grid, "interior nodes NXxNY")->capture_default_str();
    cmd->add_option("--domain", f.domain, "x0,x1,y0,y1 (walls)")->capture_default_str();
    cmd->add_option("--hbar", cfg.params.hbar)->capture_default_str();
    cmd->add_option("--mass", cfg.params.mass)->capture_default_str();
    cmd->add_option("--kb", cfg.params.kB)->capture_default_str();
    cmd->add_option("--energy", cfg.energy, "energy for the QHJ residual");
    cmd->add_option("--tol", cfg.tolerance, "property tolerance (default scales with h^2)");
    cmd->add_option("--node-threshold", cfg.nodeThreshold, "mask |psi| below this fraction of max|psi|")
        ->capture_default_str();
    cmd->add_option("--out", cfg.outDir, "output directory (env MADELUNG_OUT)")->capture_default_str();
    cmd->add_option("--dump", f.dump, "field dump format: csv, bin, gnuplot")->capture_default_str();
}

void add_state(CLI::App* cmd, RunConfig& cfg) {
    auto* psi = cmd->add_option("--psi", cfg.psi, "wave function expression in x, y");
    auto* builtin = cmd->add_option("--builtin", cfg.builtin,
                                    "plane_wave, ho_ground, ho_vortex, box_mode, exp_z, gauss_real");
    psi->excludes(builtin);
    cmd->add_option("--potential", cfg.potential, "potential expression for the QHJ residual");
    auto& b = cfg.builtinParams;
    cmd->add_option("--k1", b.k1, "plane_wave wave number")->capture_default_str();
    cmd->add_option("--k2", b.k2, "plane_wave wave number")->capture_default_str();
    cmd->add_option("--l", b.l, "ho_vortex winding")->capture_default_str();
    cmd->add_option("--n1", b.n1, "box_mode quantum number")->capture_default_str();
    cmd->add_option("--n2", b.n2, "box_mode quantum number")->capture_default_str();
    cmd->add_option("--sigma", b.sigma, "gauss_real width")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Madelung decomposition diagnostics on 2D grids"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv("MADELUNG_OUT"); env && *env) cfg.outDir = env;
    Flags f;

    auto* analyze = app.add_subcommand("analyze", "decompose a given state and report diagnostics");
    add_common(analyze, cfg, f);
    add_state(analyze, cfg);

    auto* solve = app.add_subcommand("solve", "solve for eigenstates of a potential and analyze one");
    add_common(solve, cfg, f);
    solve->add_option("--potential", cfg.potential, "potential expression in x, y")->required();
    solve->add_option("--count", cfg.solver.count, "number of eigenpairs")->capture_default_str();
    solve->add_option("--solver-tol", cfg.solver.tol, "eigen residual tolerance")->capture_default_str();
    solve->add_option("--max-iter", cfg.solver.maxIter)->capture_default_str();
    solve->add_option("--seed", cfg.solver.seed)->capture_default_str();
    solve->add_option("--combine", f.combine, "combine states, e.g. 1,2:1,i");

    auto* conv = app.add_subcommand("convergence", "refinement study; CSV table on stdout");
    add_common(conv, cfg, f);
    add_state(conv, cfg);
    conv->add_option("--levels", cfg.convergenceLevels, "number of grids")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFailure;
    }

    try {
        cfg.grid = parse_grid(f.grid, f.domain);
        cfg.dump = io::parse_dump_format(f.dump);
        if (f.combine) cfg.combine = parse_combine(*f.combine);
    } catch (const expr::ParseError& e) {
        std::cerr << "error: --combine: " << e.message() << " at offset " << e.offset() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    if (!cfg.psi.empty() && !check_expression("--psi", cfg.psi)) return kExitFailure;
    if (!cfg.potential.empty() && !check_expression("--potential", cfg.potential)) return kExitFailure;

    if (*solve) {
        cfg.source = StateSource::Solve;
    } else if (!cfg.builtin.empty()) {
        cfg.source = StateSource::Builtin;
    } else if (!cfg.psi.empty()) {
        cfg.source = StateSource::Psi;
    } else {
        std::cerr << "error: one of --psi or --builtin is required\n";
        return kExitFailure;
    }

    if (*conv) return cmd_convergence(cfg, std::cout, std::cerr);

    const RunResult res = *solve ? cmd_solve(cfg) : cmd_analyze(cfg);
    if (res.exitCode == kExitFailure) {
        std::cerr << "error: " << res.message << '\n';
    } else {
        std::cerr << res.message << '\n';
        if (!res.report.is_null()) std::cout << (cfg.outDir / "report.json").string() << '\n';
    }
    return res.exitCode;
}
