#include <cmath>
#include <numbers>
#include <stdexcept>

#include "madelung/spectral.hpp"

namespace madelung {

namespace {

using C = std::complex<double>;

template <class F>
ComplexField sample(const GridSpec& s, F f) {
    ComplexField psi(s);
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            const C v = f(s.x(i), s.y(j));
            if (std::isfinite(v.real()) && std::isfinite(v.imag())) psi[k] = v;
            else psi.invalidate(k);
        }
    }
    return psi;
}

template <class F>
ScalarField sample_real(const GridSpec& s, F f) {
    ScalarField V(s);
    for (std::size_t j = 0; j < s.ny; ++j)
        for (std::size_t i = 0; i < s.nx; ++i) V.at(i, j) = f(s.x(i), s.y(j));
    return V;
}

}  // namespace

CatalogState builtin_state(const std::string& name, const BuiltinParams& bp, const GridSpec& s,
                           const PhysicalParams& p) {
    s.validate();
    p.validate();
    const double hbar = p.hbar, m = p.mass;
    constexpr double omega = 1.0;
    const double alpha = m * omega / hbar;  // inverse squared oscillator length
    CatalogState out;

    if (name == "plane_wave") {
        if (!std::isfinite(bp.k1) || !std::isfinite(bp.k2)) throw std::invalid_argument("plane_wave: k must be finite");
        out.psi = sample(s, [&](double x, double y) {
            if (bp.k1 == 0.0 && bp.k2 == 0.0) return C{1.0, 0.0};
            return std::exp(C{0.0, bp.k1 * x + bp.k2 * y});
        });
        out.energy = hbar * hbar * (bp.k1 * bp.k1 + bp.k2 * bp.k2) / (2.0 * m);
        out.potential = ScalarField(s, 0.0);
        out.description = "plane wave exp(i(k1 x + k2 y))";
    } else if (name == "ho_ground") {
        out.psi = sample(s, [&](double x, double y) { return C{std::exp(-0.5 * alpha * (x * x + y * y)), 0.0}; });
        out.energy = hbar * omega;
        out.potential = sample_real(s, [&](double x, double y) { return 0.5 * m * omega * omega * (x * x + y * y); });
        out.description = "oscillator ground state exp(-r^2/2)";
    } else if (name == "ho_vortex") {
        if (bp.l < 1) throw std::invalid_argument("ho_vortex: l must be >= 1");
        out.psi = sample(s, [&](double x, double y) {
            C z{x, y};
            C zl{1.0, 0.0};
            for (int n = 0; n < bp.l; ++n) zl *= z;
            return zl * std::exp(-0.5 * alpha * (x * x + y * y));
        });
        out.energy = hbar * omega * (bp.l + 1);
        out.potential = sample_real(s, [&](double x, double y) { return 0.5 * m * omega * omega * (x * x + y * y); });
        out.description = "oscillator vortex (x+iy)^l exp(-r^2/2)";
    } else if (name == "box_mode") {
        if (bp.n1 < 1 || bp.n2 < 1) throw std::invalid_argument("box_mode: n1, n2 must be >= 1");
        const double xa = s.x0 - s.dx, ya = s.y0 - s.dy;
        const double Lx = static_cast<double>(s.nx + 1) * s.dx;
        const double Ly = static_cast<double>(s.ny + 1) * s.dy;
        const double pi = std::numbers::pi;
        out.psi = sample(s, [&](double x, double y) {
            return C{std::sin(bp.n1 * pi * (x - xa) / Lx) * std::sin(bp.n2 * pi * (y - ya) / Ly), 0.0};
        });
        out.energy = hbar * hbar * pi * pi / (2.0 * m) *
                     (bp.n1 * bp.n1 / (Lx * Lx) + bp.n2 * bp.n2 / (Ly * Ly));
        out.potential = ScalarField(s, 0.0);
        out.description = "box mode sin(n1 pi x/Lx) sin(n2 pi y/Ly)";
    } else if (name == "exp_z") {
        out.psi = sample(s, [](double x, double y) { return std::exp(C{x, y}); });
        out.description = "exp(x + iy), diagnostics fixture";
    } else if (name == "gauss_real") {
        if (!(bp.sigma > 0.0)) throw std::invalid_argument("gauss_real: sigma must be positive");
        const double s2 = bp.sigma * bp.sigma;
        out.psi = sample(s, [&](double x, double y) { return C{std::exp(-(x * x + y * y) / (2.0 * s2)), 0.0}; });
        out.description = "real Gaussian exp(-r^2/(2 sigma^2))";
    } else {
        throw std::invalid_argument("unknown builtin state '" + name + "'");
    }
    return out;
}

}  // namespace madelung
