#pragma once

#include <optional>

#include "madelung/decompose.hpp"
#include "madelung/grid.hpp"

namespace madelung {

/// Physical constants. Defaults are natural units.
struct PhysicalParams {
    double hbar = 1.0;
    double mass = 1.0;
    double kB = 1.0;  // only used by the dimensionful conversions below

    void validate() const;

    double hbar_over_mass() const { return hbar / mass; }
    /// Dimensionful entropy 2 kB S of a dimensionless log-amplitude S.
    double entropy(double S) const { return 2.0 * kB * S; }
    /// Dimensionful action hbar I of a dimensionless phase I.
    double action(double I) const { return hbar * I; }
};

struct ProbabilityCurrent {
    VectorField J;
    ScalarField divJ;
    ScalarField defectC;  // 2 grad S . grad I + lap I
};

struct AnalyticCurrent {
    std::optional<VectorField> Jtilde;
    std::optional<ScalarField> divJtilde;
    /// (m/hbar) e^{-2I} div Jtilde, pointwise; present with Jtilde.
    std::optional<ScalarField> divJtildeReduced;
    ScalarField defectA;  // 2 grad I . grad S + lap S
    std::optional<VortexError> vortex;
};

struct CurrentFields {
    ScalarField rho;
    VectorField v;
    VectorField J;
    ScalarField divJ;
    ScalarField defectC;
    std::optional<VectorField> Jtilde;
    std::optional<ScalarField> divJtilde;
    std::optional<ScalarField> divJtildeReduced;
    ScalarField defectA;
    ScalarField U;
    std::optional<ScalarField> qhjResidual;
    ScalarField deBroglie;
    std::optional<VortexError> vortex;
};

VectorField velocity(const MadelungFields& m, const PhysicalParams& p);

ProbabilityCurrent probability_current(const MadelungFields& m, const PhysicalParams& p);

/// defectA is always computed. Jtilde needs the unwrapped phase and uses the
/// prefactor e^{2(I - max I)}: e^{2I} is only defined up to the constant
/// factors introduced by the unwrapping anchor and global phase, and this
/// representative has maximum 1 on the valid region.
AnalyticCurrent analytic_current(const MadelungFields& m, const PhysicalParams& p);

ScalarField quantum_potential(const MadelungFields& m, const PhysicalParams& p);

/// (hbar^2/2m)|grad I|^2 + V + U - E. Throws GridError on grid mismatch.
ScalarField qhj_residual(const MadelungFields& m, const ScalarField& V, double E,
                         const PhysicalParams& p);

/// 1/|grad I| (= hbar/(m|v|)); cells with |grad I| < 1e-12 are masked.
ScalarField de_broglie(const MadelungFields& m, const PhysicalParams& p);

/// Everything above. qhjResidual is present when both V and E are given.
CurrentFields compute_currents(const MadelungFields& m, const PhysicalParams& p,
                               const ScalarField* V = nullptr,
                               std::optional<double> E = std::nullopt);

}  // namespace madelung
