#include "madelung/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace madelung {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Strided 1D view of one grid line.
template <class T>
struct Line {
    const T* f;
    const std::uint8_t* m;
    std::size_t n;
    std::size_t stride;

    const T& v(std::size_t p) const { return f[p * stride]; }
    bool ok(std::size_t p) const { return m[p * stride] != 0; }
};

template <class T>
bool first_derivative(const Line<T>& line, std::size_t p, double h, bool periodic, T& out) {
    const std::size_t n = line.n;
    if (!line.ok(p)) return false;
    if (periodic || (p > 0 && p + 1 < n)) {
        const std::size_t lo = (p + n - 1) % n;
        const std::size_t hi = (p + 1) % n;
        if (!line.ok(lo) || !line.ok(hi)) return false;
        out = (line.v(hi) - line.v(lo)) / (2.0 * h);
        return true;
    }
    if (p == 0) {
        if (!line.ok(1) || !line.ok(2)) return false;
        out = (-3.0 * line.v(0) + 4.0 * line.v(1) - line.v(2)) / (2.0 * h);
        return true;
    }
    if (!line.ok(n - 2) || !line.ok(n - 3)) return false;
    out = (3.0 * line.v(n - 1) - 4.0 * line.v(n - 2) + line.v(n - 3)) / (2.0 * h);
    return true;
}

template <class T>
bool second_derivative(const Line<T>& line, std::size_t p, double h, bool periodic, T& out) {
    const std::size_t n = line.n;
    if (!line.ok(p)) return false;
    const double h2 = h * h;
    if (periodic || (p > 0 && p + 1 < n)) {
        const std::size_t lo = (p + n - 1) % n;
        const std::size_t hi = (p + 1) % n;
        if (!line.ok(lo) || !line.ok(hi)) return false;
        out = (line.v(lo) - 2.0 * line.v(p) + line.v(hi)) / h2;
        return true;
    }
    // Edge cell: one-sided. Four points give second order; with only three
    // points the (exact-for-quadratics) three-point formula is used.
    const bool left = p == 0;
    auto at = [&](std::size_t k) -> std::size_t { return left ? k : n - 1 - k; };
    if (n >= 4) {
        for (std::size_t k = 1; k < 4; ++k)
            if (!line.ok(at(k))) return false;
        out = (2.0 * line.v(at(0)) - 5.0 * line.v(at(1)) + 4.0 * line.v(at(2)) - line.v(at(3))) / h2;
        return true;
    }
    if (!line.ok(at(1)) || !line.ok(at(2))) return false;
    out = (line.v(at(0)) - 2.0 * line.v(at(1)) + line.v(at(2))) / h2;
    return true;
}

template <class T>
Line<T> row(const std::vector<T>& f, const Mask& m, const GridSpec& s, std::size_t j) {
    return {f.data() + s.index(0, j), m.data() + s.index(0, j), s.nx, 1};
}

template <class T>
Line<T> column(const std::vector<T>& f, const Mask& m, const GridSpec& s, std::size_t i) {
    return {f.data() + i, m.data() + i, s.ny, s.nx};
}

// Applies a per-axis derivative to every cell; `combine` merges the x and y results.
template <class T, class Deriv, class Store>
void for_each_axis_pair(const GridSpec& s, const std::vector<T>& fx, const Mask& mx,
                        const std::vector<T>& fy, const Mask& my, Deriv deriv, Store store) {
    const bool periodic = s.boundary == Boundary::Periodic;
    for (std::size_t j = 0; j < s.ny; ++j) {
        const auto r = row(fx, mx, s, j);
        for (std::size_t i = 0; i < s.nx; ++i) {
            const auto c = column(fy, my, s, i);
            T ax{}, ay{};
            const bool okx = deriv(r, i, s.dx, periodic, ax);
            const bool oky = okx && deriv(c, j, s.dy, periodic, ay);
            store(s.index(i, j), okx && oky, ax, ay);
        }
    }
}

template <class T>
bool all_finite(const T& v) {
    if constexpr (std::is_same_v<T, double>) {
        return std::isfinite(v);
    } else {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    }
}

}  // namespace

GridSpec GridSpec::from_domain(std::size_t nx, std::size_t ny, double xmin, double xmax,
                               double ymin, double ymax) {
    if (!(xmax > xmin) || !(ymax > ymin)) throw GridError("domain bounds must be increasing");
    GridSpec s;
    s.nx = nx;
    s.ny = ny;
    s.dx = (xmax - xmin) / static_cast<double>(nx + 1);
    s.dy = (ymax - ymin) / static_cast<double>(ny + 1);
    s.x0 = xmin + s.dx;
    s.y0 = ymin + s.dy;
    s.validate();
    return s;
}

void GridSpec::validate() const {
    if (nx < 3 || ny < 3) throw GridError("grid needs at least 3 cells per axis");
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
        throw GridError("grid spacings must be positive and finite");
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw GridError("grid origin must be finite");
}

bool GridSpec::same_geometry(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && dx == o.dx && dy == o.dy;
}

ScalarField::ScalarField(const GridSpec& s, double fill)
    : spec(s), values(s.size(), fill), mask(s.size(), 1) {}

void ScalarField::invalidate(std::size_t k) {
    mask[k] = 0;
    values[k] = kNaN;
}

std::size_t ScalarField::valid_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::size_t ComplexField::valid_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

VectorField::VectorField(const GridSpec& s)
    : spec(s), x(s.size(), 0.0), y(s.size(), 0.0), mask(s.size(), 1) {}

void VectorField::invalidate(std::size_t k) {
    mask[k] = 0;
    x[k] = kNaN;
    y[k] = kNaN;
}

ComplexField::ComplexField(const GridSpec& s, std::complex<double> fill)
    : spec(s), values(s.size(), fill), mask(s.size(), 1) {}

void ComplexField::invalidate(std::size_t k) {
    mask[k] = 0;
    values[k] = {kNaN, kNaN};
}

ScalarField ComplexField::real() const {
    ScalarField out(spec);
    for (std::size_t k = 0; k < size(); ++k) {
        if (valid(k)) out[k] = values[k].real();
        else out.invalidate(k);
    }
    return out;
}

ScalarField ComplexField::imag() const {
    ScalarField out(spec);
    for (std::size_t k = 0; k < size(); ++k) {
        if (valid(k)) out[k] = values[k].imag();
        else out.invalidate(k);
    }
    return out;
}

VectorField gradient(const ScalarField& f) {
    VectorField out(f.spec);
    for_each_axis_pair(f.spec, f.values, f.mask, f.values, f.mask, first_derivative<double>,
                       [&](std::size_t k, bool ok, double gx, double gy) {
                           if (ok && std::isfinite(gx) && std::isfinite(gy)) {
                               out.x[k] = gx;
                               out.y[k] = gy;
                           } else {
                               out.invalidate(k);
                           }
                       });
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    ScalarField out(f.spec);
    for_each_axis_pair(f.spec, f.values, f.mask, f.values, f.mask, second_derivative<double>,
                       [&](std::size_t k, bool ok, double ax, double ay) {
                           const double v = ax + ay;
                           if (ok && std::isfinite(v)) out[k] = v;
                           else out.invalidate(k);
                       });
    return out;
}

ScalarField divergence(const VectorField& w) {
    ScalarField out(w.spec);
    for_each_axis_pair(w.spec, w.x, w.mask, w.y, w.mask, first_derivative<double>,
                       [&](std::size_t k, bool ok, double ax, double ay) {
                           const double v = ax + ay;
                           if (ok && std::isfinite(v)) out[k] = v;
                           else out.invalidate(k);
                       });
    return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
    if (!a.spec.same_geometry(b.spec)) throw GridError("dot: grid mismatch");
    ScalarField out(a.spec);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (a.valid(k) && b.valid(k)) out[k] = a.x[k] * b.x[k] + a.y[k] * b.y[k];
        else out.invalidate(k);
    }
    return out;
}

ComplexGradient gradient(const ComplexField& f) {
    ComplexGradient out{ComplexField(f.spec), ComplexField(f.spec)};
    using C = std::complex<double>;
    for_each_axis_pair(f.spec, f.values, f.mask, f.values, f.mask, first_derivative<C>,
                       [&](std::size_t k, bool ok, C gx, C gy) {
                           if (ok && all_finite(gx) && all_finite(gy)) {
                               out.x[k] = gx;
                               out.y[k] = gy;
                           } else {
                               out.x.invalidate(k);
                               out.y.invalidate(k);
                           }
                       });
    return out;
}

ComplexField laplacian(const ComplexField& f) {
    ComplexField out(f.spec);
    using C = std::complex<double>;
    for_each_axis_pair(f.spec, f.values, f.mask, f.values, f.mask, second_derivative<C>,
                       [&](std::size_t k, bool ok, C ax, C ay) {
                           const C v = ax + ay;
                           if (ok && all_finite(v)) out[k] = v;
                           else out.invalidate(k);
                       });
    return out;
}

Mask interior(const GridSpec& s, std::size_t margin) {
    Mask m(s.size(), 1);
    if (s.boundary == Boundary::Periodic) return m;
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            const bool inside =
                i >= margin && j >= margin && i + margin < s.nx && j + margin < s.ny;
            m[s.index(i, j)] = inside ? 1 : 0;
        }
    }
    return m;
}

Mask intersect(const Mask& a, const Mask& b) {
    if (a.size() != b.size()) throw GridError("mask size mismatch");
    Mask out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = (a[k] && b[k]) ? 1 : 0;
    return out;
}

Norms norms(const ScalarField& f, const Mask& restrict_to) {
    if (restrict_to.size() != f.size()) throw GridError("mask size mismatch");
    std::vector<double> vals;
    vals.reserve(f.size());
    double sum_sq = 0.0;
    Norms n;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!f.valid(k) || !restrict_to[k]) continue;
        const double v = f[k];
        vals.push_back(v);
        sum_sq += v * v;
        n.max = std::max(n.max, std::abs(v));
    }
    n.count = vals.size();
    if (vals.empty()) return n;
    n.rms = std::sqrt(sum_sq / static_cast<double>(vals.size()));
    const std::size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
    double med = vals[mid];
    if (vals.size() % 2 == 0) {
        const double lower = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    n.median = med;
    return n;
}

}  // namespace madelung
