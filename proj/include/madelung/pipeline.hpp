#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "madelung/analytic.hpp"
#include "madelung/currents.hpp"
#include "madelung/decompose.hpp"
#include "madelung/field_io.hpp"
#include "madelung/spectral.hpp"

namespace madelung {

enum class StateSource { Psi, Builtin, Solve };

struct CombineSpec {
    std::vector<std::size_t> indices;
    std::vector<std::complex<double>> coeffs;
    std::string text;
};

/// "i,j,...:c1,c2,..." with coefficients written in the expression language
/// (constants only), e.g. "1,2:1,i" or "0,1:1/sqrt(2),-1/sqrt(2)".
CombineSpec parse_combine(const std::string& text);

/// Grid given as NXxNY over the domain [x0,x1] x [y0,y1] (interior nodes).
struct GridRequest {
    std::size_t nx = 97;
    std::size_t ny = 97;
    double xmin = -6.0, xmax = 6.0, ymin = -6.0, ymax = 6.0;

    GridSpec spec() const { return GridSpec::from_domain(nx, ny, xmin, xmax, ymin, ymax); }
    /// Halves the spacing: (n + 1) intervals become 2(n + 1).
    GridRequest refined() const;
};

struct RunConfig {
    GridRequest grid;
    PhysicalParams params;
    double nodeThreshold = kDefaultNodeThreshold;
    std::optional<double> tolerance;  // property tolerance; default_tolerance() when empty
    std::filesystem::path outDir = "madelung_out";
    io::DumpFormat dump = io::DumpFormat::Binary;

    StateSource source = StateSource::Psi;
    std::string psi;                 // --psi
    std::string builtin;             // --builtin
    BuiltinParams builtinParams;
    std::string potential;           // --potential
    std::optional<double> energy;    // --energy
    SolverOptions solver;
    std::optional<CombineSpec> combine;
    std::size_t convergenceLevels = 3;

    void validate() const;
};

struct Analysis {
    MadelungFields m;
    CurrentFields c;
    AnalyticityReport r;
    PropertyVerdicts verdicts;
    double tol = 0.0;
};

/// decompose -> currents -> analyze -> check_properties.
Analysis analyze_state(const ComplexField& psi, const RunConfig& cfg, const ScalarField* V,
                       std::optional<double> E);

struct RunResult {
    int exitCode = 0;
    nlohmann::json report;
    std::string message;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitVortex = 2;
inline constexpr int kExitNoConvergence = 3;

/// State from --psi or --builtin; writes report.json and field dumps under cfg.outDir.
RunResult cmd_analyze(const RunConfig& cfg);

/// Eigenstates of the --potential Hamiltonian, optionally combined, then analyzed.
RunResult cmd_solve(const RunConfig& cfg);

/// Analysis at cfg.convergenceLevels resolutions; CSV table on `out`.
int cmd_convergence(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Report JSON with the timestamp and manifest hash removed (for comparing runs).
nlohmann::json strip_volatile(nlohmann::json report);

}  // namespace madelung
