#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "madelung/grid.hpp"

namespace madelung {

/// Plaquette spanned by cells (i, j), (i+1, j), (i+1, j+1), (i, j+1).
struct Plaquette {
    std::size_t i = 0;
    std::size_t j = 0;
    int winding = 0;
};

/// Winding of the phase around an interior cluster of masked cells, measured
/// along the cluster's bounding box grown by one cell.
struct HoleWinding {
    std::size_t i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // loop corners (inclusive)
    std::size_t cells = 0;                       // masked cells in the cluster
    std::optional<int> winding;                  // empty when the loop crosses masked cells
};

/// Integer phase winding per plaquette; `known` is false when a corner is masked.
struct ResidueMap {
    std::size_t nx = 0;  // plaquettes per row (grid nx - 1)
    std::size_t ny = 0;
    std::vector<int> winding;
    std::vector<std::uint8_t> known;
    std::vector<HoleWinding> holes;

    int at(std::size_t i, std::size_t j) const { return winding[j * nx + i]; }
    std::vector<Plaquette> nonzero() const;
    std::size_t indeterminate() const;
    /// Sum of all known plaquette windings plus all determinate hole windings.
    int total() const;
    bool vortex_free() const;
};

/// The phase cannot be unwrapped into a single-valued I on the valid region.
class VortexError : public std::runtime_error {
public:
    VortexError(std::vector<Plaquette> plaquettes, std::vector<HoleWinding> holes);

    const std::vector<Plaquette>& plaquettes() const { return plaquettes_; }
    const std::vector<HoleWinding>& holes() const { return holes_; }

private:
    std::vector<Plaquette> plaquettes_;
    std::vector<HoleWinding> holes_;
};

/// Raised when node masking leaves too little of the grid to differentiate.
class EmptyInteriorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultNodeThreshold = 1e-8;

/// psi = exp(S + iI) on the grid, described through derivatives of S and I.
struct MadelungFields {
    ScalarField S;
    VectorField gradS;
    VectorField gradI;
    ScalarField lapS;
    ScalarField lapI;
    Mask nodeMask;  // 1 = within the relative node threshold (or invalid input)
    ResidueMap residues;
    std::optional<ScalarField> phase;  // unwrapped I when the phase is single valued
    std::optional<VortexError> vortex;  // why `phase` is absent

    const GridSpec& spec() const { return S.spec; }
};

/// Madelung data from psi. Derivatives come from the log-derivative
/// L = grad(psi)/psi: grad S = Re L, grad I = Im L. lap I uses
/// Im(lap(psi)/psi) - 2 grad S . grad I (the imaginary part of the discrete
/// Schroedinger operator); lap S is the stencil divergence of grad S.
/// Throws EmptyInteriorError if fewer than 9 valid cells remain.
MadelungFields decompose(const ComplexField& psi, double nodeThreshold = kDefaultNodeThreshold);

/// Phase winding of every plaquette of valid cells plus hole windings.
ResidueMap residues(const ComplexField& psi);

/// Counterclockwise winding along the rectangle with corners (i0, j0), (i1, j1).
/// Empty if any cell on the loop is masked.
std::optional<int> loop_winding(const ComplexField& psi, std::size_t i0, std::size_t j0,
                                std::size_t i1, std::size_t j1);

/// Flood-fill unwrapping from the valid cell of largest |psi| (which keeps its
/// principal phase). Throws VortexError when any plaquette or hole winds.
ScalarField unwrap_phase(const ComplexField& psi);

/// Phase difference arg(b) - arg(a) wrapped to (-pi, pi].
double wrapped_difference(std::complex<double> a, std::complex<double> b);

}  // namespace madelung
