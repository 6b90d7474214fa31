#pragma once

#include <array>
#include <map>
#include <string>

#include "madelung/currents.hpp"
#include "madelung/decompose.hpp"
#include "madelung/grid.hpp"

namespace madelung {

/// Stencil reach of the lap S field (divergence of a central gradient).
inline constexpr std::size_t kInteriorMargin = 2;

struct AnalyticityReport {
    ScalarField orth;      // grad S . grad I
    ScalarField crStrict;  // |(dS/dx - dI/dy, dS/dy + dI/dx)|
    ScalarField harmS;     // lap S
    ScalarField harmI;     // lap I
    Mask interior;         // cells the norms range over
    Norms orthNorms, crStrictNorms, harmSNorms, harmINorms;
};

/// Throws EmptyInteriorError when no interior cell has all four fields.
AnalyticityReport analyze(const MadelungFields& m);

/// Interior mask: cells valid in S, kInteriorMargin away from non-periodic edges.
Mask analysis_interior(const MadelungFields& m);

enum class Status { Holds, Fails, PreconditionNotMet };
const char* to_string(Status s);

struct Verdict {
    Status status = Status::PreconditionNotMet;
    std::map<std::string, double> residuals;  // interior max norms used
    double tol = 0.0;
    std::string note;
};

struct PropertyVerdicts {
    std::array<Verdict, 5> p;  // p[0] is Property 1
};

/// max(10 h^2, 1e-8) * max(1, g), g the interior RMS of sqrt(|grad S|^2 + |grad I|^2).
double default_tolerance(const MadelungFields& m);

/// Properties 1-5 scored on interior max norms with "~0" meaning <= tol.
/// Equivalences are scored as boolean agreement of both sides.
PropertyVerdicts check_properties(const MadelungFields& m, const CurrentFields& c,
                                  const AnalyticityReport& r, double tol);

}  // namespace madelung
