#include "madelung/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace madelung {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool usable(const ComplexField& psi, std::size_t k) {
    return psi.valid(k) && std::isfinite(psi[k].real()) && std::isfinite(psi[k].imag());
}

// Connected clusters (8-neighbour) of unusable cells that do not touch the grid edge.
std::vector<HoleWinding> find_holes(const ComplexField& psi) {
    const auto& s = psi.spec;
    std::vector<HoleWinding> holes;
    std::vector<std::uint8_t> seen(s.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < s.size(); ++start) {
        if (seen[start] || usable(psi, start)) continue;
        HoleWinding h;
        h.i0 = h.i1 = start % s.nx;
        h.j0 = h.j1 = start / s.nx;
        bool touches_edge = false;
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            ++h.cells;
            const std::size_t i = k % s.nx, j = k / s.nx;
            h.i0 = std::min(h.i0, i);
            h.i1 = std::max(h.i1, i);
            h.j0 = std::min(h.j0, j);
            h.j1 = std::max(h.j1, j);
            if (i == 0 || j == 0 || i + 1 == s.nx || j + 1 == s.ny) touches_edge = true;
            for (int dj = -1; dj <= 1; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    const auto ni = static_cast<std::ptrdiff_t>(i) + di;
                    const auto nj = static_cast<std::ptrdiff_t>(j) + dj;
                    if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(s.nx) ||
                        nj >= static_cast<std::ptrdiff_t>(s.ny))
                        continue;
                    const std::size_t nk = s.index(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj));
                    if (seen[nk] || usable(psi, nk)) continue;
                    seen[nk] = 1;
                    stack.push_back(nk);
                }
            }
        }
        if (touches_edge) continue;
        // Grow the bounding box into the loop that encloses the cluster.
        h.i0 -= 1;
        h.j0 -= 1;
        h.i1 += 1;
        h.j1 += 1;
        h.winding = loop_winding(psi, h.i0, h.j0, h.i1, h.j1);
        holes.push_back(h);
    }
    return holes;
}

}  // namespace

double wrapped_difference(std::complex<double> a, std::complex<double> b) {
    return std::arg(b * std::conj(a));
}

std::vector<Plaquette> ResidueMap::nonzero() const {
    std::vector<Plaquette> out;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            if (known[j * nx + i] && winding[j * nx + i] != 0) out.push_back({i, j, winding[j * nx + i]});
    return out;
}

std::size_t ResidueMap::indeterminate() const {
    return static_cast<std::size_t>(std::count(known.begin(), known.end(), std::uint8_t{0}));
}

int ResidueMap::total() const {
    int sum = 0;
    for (std::size_t k = 0; k < winding.size(); ++k)
        if (known[k]) sum += winding[k];
    for (const auto& h : holes)
        if (h.winding) sum += *h.winding;
    return sum;
}

bool ResidueMap::vortex_free() const {
    if (!nonzero().empty()) return false;
    return std::all_of(holes.begin(), holes.end(),
                       [](const HoleWinding& h) { return h.winding && *h.winding == 0; });
}

VortexError::VortexError(std::vector<Plaquette> plaquettes, std::vector<HoleWinding> holes)
    : std::runtime_error("phase has nonzero winding (" + std::to_string(plaquettes.size()) +
                         " plaquette(s), " + std::to_string(holes.size()) +
                         " hole(s)); I is not single valued"),
      plaquettes_(std::move(plaquettes)),
      holes_(std::move(holes)) {}

std::optional<int> loop_winding(const ComplexField& psi, std::size_t i0, std::size_t j0,
                                std::size_t i1, std::size_t j1) {
    const auto& s = psi.spec;
    if (i1 <= i0 || j1 <= j0 || i1 >= s.nx || j1 >= s.ny) throw GridError("loop_winding: bad rectangle");
    // Counterclockwise: bottom edge, right edge, top edge, left edge.
    std::vector<std::size_t> path;
    for (std::size_t i = i0; i < i1; ++i) path.push_back(s.index(i, j0));
    for (std::size_t j = j0; j < j1; ++j) path.push_back(s.index(i1, j));
    for (std::size_t i = i1; i > i0; --i) path.push_back(s.index(i, j1));
    for (std::size_t j = j1; j > j0; --j) path.push_back(s.index(i0, j));
    double sum = 0.0;
    for (std::size_t n = 0; n < path.size(); ++n) {
        const std::size_t a = path[n], b = path[(n + 1) % path.size()];
        if (!usable(psi, a) || !usable(psi, b)) return std::nullopt;
        sum += wrapped_difference(psi[a], psi[b]);
    }
    return static_cast<int>(std::lround(sum / kTwoPi));
}

ResidueMap residues(const ComplexField& psi) {
    const auto& s = psi.spec;
    ResidueMap r;
    r.nx = s.nx - 1;
    r.ny = s.ny - 1;
    r.winding.assign(r.nx * r.ny, 0);
    r.known.assign(r.nx * r.ny, 0);
    for (std::size_t j = 0; j < r.ny; ++j) {
        for (std::size_t i = 0; i < r.nx; ++i) {
            const std::size_t c[4] = {s.index(i, j), s.index(i + 1, j), s.index(i + 1, j + 1),
                                      s.index(i, j + 1)};
            if (!std::all_of(std::begin(c), std::end(c), [&](std::size_t k) { return usable(psi, k); }))
                continue;
            double sum = 0.0;
            for (int n = 0; n < 4; ++n) sum += wrapped_difference(psi[c[n]], psi[c[(n + 1) % 4]]);
            r.winding[j * r.nx + i] = static_cast<int>(std::lround(sum / kTwoPi));
            r.known[j * r.nx + i] = 1;
        }
    }
    r.holes = find_holes(psi);
    return r;
}

ScalarField unwrap_phase(const ComplexField& psi) {
    const auto& s = psi.spec;
    auto fail = [&](const ResidueMap& r) {
        std::vector<HoleWinding> bad;
        for (const auto& h : r.holes)
            if (!h.winding || *h.winding != 0) bad.push_back(h);
        throw VortexError(r.nonzero(), std::move(bad));
    };
    {
        const ResidueMap r = residues(psi);
        if (!r.nonzero().empty()) fail(r);
    }

    ScalarField phase(s);
    std::vector<std::uint8_t> done(s.size(), 0);
    for (std::size_t k = 0; k < s.size(); ++k)
        if (!usable(psi, k)) phase.invalidate(k);

    // Components are seeded in order of decreasing |psi|.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (usable(psi, k)) order.push_back(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(psi[a]) > std::abs(psi[b]); });

    std::deque<std::size_t> queue;
    for (std::size_t seed : order) {
        if (done[seed]) continue;
        phase[seed] = std::arg(psi[seed]);
        done[seed] = 1;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            const std::size_t i = k % s.nx, j = k / s.nx;
            const std::size_t nbrs[4] = {i > 0 ? k - 1 : k, i + 1 < s.nx ? k + 1 : k,
                                         j > 0 ? k - s.nx : k, j + 1 < s.ny ? k + s.nx : k};
            for (std::size_t nk : nbrs) {
                if (nk == k || done[nk] || !usable(psi, nk)) continue;
                phase[nk] = phase[k] + wrapped_difference(psi[k], psi[nk]);
                done[nk] = 1;
                queue.push_back(nk);
            }
        }
    }

    // A loop with nonzero winding (around a masked hole) shows up as a
    // non-tree edge whose unwrapped difference is off by a multiple of 2 pi.
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            if (!usable(psi, k)) continue;
            for (std::size_t nk : {i + 1 < s.nx ? k + 1 : k, j + 1 < s.ny ? k + s.nx : k}) {
                if (nk == k || !usable(psi, nk)) continue;
                const double jump = phase[nk] - phase[k] - wrapped_difference(psi[k], psi[nk]);
                if (std::abs(jump) > 1e-6) fail(residues(psi));
            }
        }
    }
    return phase;
}

MadelungFields decompose(const ComplexField& psi, double nodeThreshold) {
    if (!(nodeThreshold > 0.0 && nodeThreshold < 1.0))
        throw std::invalid_argument("nodeThreshold must lie in (0, 1)");
    const auto& s = psi.spec;
    s.validate();

    double peak = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k)
        if (usable(psi, k)) peak = std::max(peak, std::abs(psi[k]));

    ComplexField work = psi;
    Mask nodes(s.size(), 0);
    std::size_t valid = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double a = usable(psi, k) ? std::abs(psi[k]) : 0.0;
        if (a == 0.0 || !(a >= nodeThreshold * peak)) {
            nodes[k] = 1;
            work.invalidate(k);
        } else {
            ++valid;
        }
    }
    if (valid < 9) throw EmptyInteriorError("empty interior after node masking");

    MadelungFields m;
    m.nodeMask = nodes;
    m.S = ScalarField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (work.valid(k)) m.S[k] = std::log(std::abs(work[k]));
        else m.S.invalidate(k);
    }

    const ComplexGradient grad = gradient(work);
    const ComplexField lap = laplacian(work);
    m.gradS = VectorField(s);
    m.gradI = VectorField(s);
    m.lapI = ScalarField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!grad.x.valid(k)) {
            m.gradS.invalidate(k);
            m.gradI.invalidate(k);
            m.lapI.invalidate(k);
            continue;
        }
        const auto Lx = grad.x[k] / work[k];
        const auto Ly = grad.y[k] / work[k];
        m.gradS.x[k] = Lx.real();
        m.gradS.y[k] = Ly.real();
        m.gradI.x[k] = Lx.imag();
        m.gradI.y[k] = Ly.imag();
        if (lap.valid(k)) {
            const auto q = lap[k] / work[k];
            m.lapI[k] = q.imag() - 2.0 * (Lx.real() * Lx.imag() + Ly.real() * Ly.imag());
        } else {
            m.lapI.invalidate(k);
        }
    }
    m.lapS = divergence(m.gradS);

    m.residues = residues(work);
    try {
        m.phase = unwrap_phase(work);
    } catch (const VortexError& e) {
        m.vortex = e;
    }
    return m;
}

}  // namespace madelung
