#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace madelung {

/// Raised for malformed grids and for operations mixing incompatible grids.
class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Boundary { OneSided, Periodic };

/// Uniform 2D Cartesian grid. Cell (i, j) sits at (x0 + i*dx, y0 + j*dy);
/// storage is row-major with i fastest.
struct GridSpec {
    std::size_t nx = 3;
    std::size_t ny = 3;
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = 1.0;
    Boundary boundary = Boundary::OneSided;

    /// Interior-node grid on [xmin, xmax] x [ymin, ymax]: the bounds are
    /// the (implicit) Dirichlet walls and are not themselves grid points.
    static GridSpec from_domain(std::size_t nx, std::size_t ny, double xmin, double xmax,
                                double ymin, double ymax);

    void validate() const;

    std::size_t size() const { return nx * ny; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
    double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
    double y(std::size_t j) const { return y0 + static_cast<double>(j) * dy; }
    double h() const { return dx > dy ? dx : dy; }

    /// Same geometry; the boundary policy is ignored.
    bool same_geometry(const GridSpec& other) const;
    bool operator==(const GridSpec&) const = default;
};

using Mask = std::vector<std::uint8_t>;

struct ScalarField {
    GridSpec spec;
    std::vector<double> values;
    Mask mask;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& s, double fill = 0.0);

    std::size_t size() const { return values.size(); }
    bool valid(std::size_t k) const { return mask[k] != 0; }
    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    double& at(std::size_t i, std::size_t j) { return values[spec.index(i, j)]; }
    double at(std::size_t i, std::size_t j) const { return values[spec.index(i, j)]; }

    /// Marks a cell invalid and stores NaN there.
    void invalidate(std::size_t k);
    std::size_t valid_count() const;
};

struct VectorField {
    GridSpec spec;
    std::vector<double> x;
    std::vector<double> y;
    Mask mask;

    VectorField() = default;
    explicit VectorField(const GridSpec& s);

    std::size_t size() const { return x.size(); }
    bool valid(std::size_t k) const { return mask[k] != 0; }
    void invalidate(std::size_t k);
};

struct ComplexField {
    GridSpec spec;
    std::vector<std::complex<double>> values;
    Mask mask;

    ComplexField() = default;
    explicit ComplexField(const GridSpec& s, std::complex<double> fill = {0.0, 0.0});

    std::size_t size() const { return values.size(); }
    bool valid(std::size_t k) const { return mask[k] != 0; }
    std::complex<double>& operator[](std::size_t k) { return values[k]; }
    std::complex<double> operator[](std::size_t k) const { return values[k]; }
    void invalidate(std::size_t k);
    std::size_t valid_count() const;

    ScalarField real() const;
    ScalarField imag() const;
};

// Second-order finite differences. Interior cells use central stencils;
// edge cells use one-sided second-order stencils or wrap when periodic.
// A result cell is valid only if every stencil input is valid.
VectorField gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);
ScalarField divergence(const VectorField& w);
ScalarField dot(const VectorField& a, const VectorField& b);

/// d/dx and d/dy of a complex field (same stencils as `gradient`).
struct ComplexGradient {
    ComplexField x;
    ComplexField y;
};
ComplexGradient gradient(const ComplexField& f);
/// 5-point Laplacian of a complex field; edge handling as `laplacian`.
ComplexField laplacian(const ComplexField& f);

/// Cells at least `margin` cells away from every non-periodic grid edge.
Mask interior(const GridSpec& spec, std::size_t margin);
Mask intersect(const Mask& a, const Mask& b);

struct Norms {
    double max = 0.0;
    double rms = 0.0;
    double median = 0.0;
    std::size_t count = 0;
};

/// max |f|, RMS and median (signed) over cells valid in f and in `restrict_to`.
Norms norms(const ScalarField& f, const Mask& restrict_to);

}  // namespace madelung
