#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "madelung/currents.hpp"
#include "madelung/grid.hpp"

namespace madelung {

/// Potential assigned to masked (non-finite) cells of V.
inline constexpr double kWallPotential = 1e6;

/// H psi = -(hbar^2/2m) lap5(psi) + V psi with psi = 0 outside the grid.
/// Matrix-free; never stores more than the diagonal potential.
class Hamiltonian {
public:
    Hamiltonian(GridSpec spec, std::vector<double> potential, PhysicalParams params);

    const GridSpec& spec() const { return spec_; }
    const std::vector<double>& potential() const { return potential_; }
    const PhysicalParams& params() const { return params_; }
    std::size_t dimension() const { return spec_.size(); }

    void apply(std::span<const double> in, std::span<double> out) const;
    ComplexField apply(const ComplexField& psi) const;

    /// Gershgorin upper bound on the spectrum.
    double upper_bound() const;
    double lower_bound() const;

private:
    GridSpec spec_;
    std::vector<double> potential_;
    PhysicalParams params_;
    double cx_;
    double cy_;
};

Hamiltonian assemble(const ScalarField& V, const PhysicalParams& p);

struct SolverOptions {
    std::size_t count = 1;
    double tol = 1e-9;
    std::size_t maxIter = 500;
    std::uint64_t seed = 1;
    std::size_t filterDegree = 24;
};

struct EigenSolution {
    std::vector<double> energies;  // ascending
    std::vector<ComplexField> states;  // unit discrete L2 norm
    std::vector<double> residuals;  // ||H psi - E psi|| / ||psi||
    std::size_t iterations = 0;
    double tol = 0.0;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, EigenSolution best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const EigenSolution& best() const { return best_; }

private:
    EigenSolution best_;
};

/// Lowest `count` eigenpairs by Chebyshev-filtered subspace iteration with
/// Rayleigh-Ritz. Inside a degenerate cluster the basis is rotated to
/// diagonalize (y-yc)^2 - (x-xc)^2 and signs are fixed by the first nonzero
/// of (sum psi, sum psi (x-xc), sum psi (y-yc)), so results are reproducible.
/// Throws SolverError (with the best pairs found) after maxIter iterations.
EigenSolution solve_lowest(const Hamiltonian& H, const SolverOptions& opts);

class DegeneracyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CombinedState {
    ComplexField psi;
    double energy = 0.0;
};

/// Normalized sum of coeffs[n] * states[indices[n]]; the selected energies
/// must agree within degeneracyTol (default 10 * sol.tol).
CombinedState combine(const EigenSolution& sol, std::span<const std::size_t> indices,
                      std::span<const std::complex<double>> coeffs,
                      std::optional<double> degeneracyTol = std::nullopt);

double discrete_norm(const ComplexField& psi);
std::complex<double> inner_product(const ComplexField& a, const ComplexField& b);

// Closed-form reference states.
struct BuiltinParams {
    double k1 = 0.0, k2 = 0.0;  // plane_wave
    int l = 1;                  // ho_vortex
    int n1 = 1, n2 = 1;         // box_mode
    double sigma = 1.0;         // gauss_real
};

struct CatalogState {
    ComplexField psi;
    std::optional<double> energy;     // empty when not an eigenstate of a cataloged V
    std::optional<ScalarField> potential;
    std::string description;
};

/// plane_wave, ho_ground, ho_vortex, box_mode, exp_z, gauss_real.
/// Oscillator states use omega = 1 and centre at the origin; box_mode uses the
/// walls of the interior-node convention (x0 - dx, x0 + nx dx).
CatalogState builtin_state(const std::string& name, const BuiltinParams& params, const GridSpec& spec,
                           const PhysicalParams& p);

}  // namespace madelung
