#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "madelung/analytic.hpp"
#include "madelung/spectral.hpp"

using namespace madelung;
using C = std::complex<double>;

namespace {

ScalarField oscillator(const GridSpec& s) {
    ScalarField V(s);
    for (std::size_t j = 0; j < s.ny; ++j)
        for (std::size_t i = 0; i < s.nx; ++i) V.at(i, j) = 0.5 * (s.x(i) * s.x(i) + s.y(j) * s.y(j));
    return V;
}

// Exact lowest eigenvalue of the 5-point Dirichlet Laplacian on the interior-node box.
double discrete_box_e1(const GridSpec& s) {
    const double ex = 4 / (s.dx * s.dx) * std::pow(std::sin(std::numbers::pi / (2.0 * (s.nx + 1))), 2);
    const double ey = 4 / (s.dy * s.dy) * std::pow(std::sin(std::numbers::pi / (2.0 * (s.ny + 1))), 2);
    return 0.5 * (ex + ey);
}

}  // namespace

TEST_CASE("box ground state matches the discrete closed form") {
    const GridSpec s = GridSpec::from_domain(31, 31, 0, 1, 0, 1);
    const EigenSolution sol = solve_lowest(assemble(ScalarField(s, 0.0), PhysicalParams{}), SolverOptions{});
    CHECK(sol.energies[0] == doctest::Approx(discrete_box_e1(s)).epsilon(1e-10));
    CHECK(sol.energies[0] == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(0.01));
}

TEST_CASE("eigenpairs are consistent and orthonormal") {
    const GridSpec s = GridSpec::from_domain(41, 41, -5, 5, -5, 5);
    const Hamiltonian H = assemble(oscillator(s), PhysicalParams{});
    SolverOptions o;
    o.count = 6;
    const EigenSolution sol = solve_lowest(H, o);
    REQUIRE(sol.energies.size() == 6);
    for (std::size_t a = 0; a < 6; ++a) {
        const C rq = inner_product(sol.states[a], H.apply(sol.states[a]));
        CHECK(std::abs(rq - sol.energies[a]) <= o.tol * std::abs(sol.energies[a]) + 1e-12);
        CHECK(sol.residuals[a] <= o.tol);
        // inside a degenerate cluster the order is the canonical one, not by energy
        if (a > 0) CHECK(sol.energies[a] >= sol.energies[a - 1] - 10 * o.tol);
        for (std::size_t b = 0; b < 6; ++b) {
            const C ip = inner_product(sol.states[a], sol.states[b]);
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 10 * o.tol);
        }
    }
}

TEST_CASE("refining the box grid does not increase the ground-state error") {
    const double exact = std::numbers::pi * std::numbers::pi;
    double prev = INFINITY;
    for (std::size_t n : {15u, 31u, 63u}) {
        const GridSpec s = GridSpec::from_domain(n, n, 0, 1, 0, 1);
        const EigenSolution sol = solve_lowest(assemble(ScalarField(s, 0.0), PhysicalParams{}), SolverOptions{});
        const double err = std::abs(sol.energies[0] - exact);
        CHECK(err <= prev);
        prev = err;
    }
}

TEST_CASE("converged eigenstates satisfy stationary continuity") {
    const GridSpec s = GridSpec::from_domain(41, 41, -5, 5, -5, 5);
    SolverOptions o;
    o.count = 4;
    const EigenSolution sol = solve_lowest(assemble(oscillator(s), PhysicalParams{}), o);
    for (std::size_t a = 0; a < 4; ++a) {
        const MadelungFields m = decompose(sol.states[a]);
        const CurrentFields c = compute_currents(m, PhysicalParams{});
        const AnalyticityReport r = analyze(m);
        const PropertyVerdicts v = check_properties(m, c, r, default_tolerance(m));
        CHECK(norms(c.defectC, r.interior).max <= default_tolerance(m));
        if (m.residues.vortex_free()) CHECK(v.p[0].status != Status::PreconditionNotMet);
    }
}

TEST_CASE("degenerate pair combines into a unit vortex") {
    const GridSpec s = GridSpec::from_domain(49, 49, -6, 6, -6, 6);
    SolverOptions o;
    o.count = 3;
    const EigenSolution sol = solve_lowest(assemble(oscillator(s), PhysicalParams{}), o);
    const std::size_t idx[] = {1, 2};
    const C plus[] = {1.0, C{0, 1}}, minus[] = {1.0, C{0, -1}};
    const CombinedState a = combine(sol, idx, plus), b = combine(sol, idx, minus);
    CHECK(discrete_norm(a.psi) == doctest::Approx(1.0));
    CHECK(a.energy == doctest::Approx(0.5 * (sol.energies[1] + sol.energies[2])));
    CHECK(residues(a.psi).total() == 1);
    CHECK(residues(b.psi).total() == -1);
    // canonical order: the first state of the pair is odd in x
    const ComplexField& p1 = sol.states[1];
    CHECK(std::abs(p1[s.index(36, 24)] + p1[s.index(12, 24)]) < 1e-6);
}

TEST_CASE("combine rejects bad requests") {
    const GridSpec s = GridSpec::from_domain(31, 31, -5, 5, -5, 5);
    SolverOptions o;
    o.count = 2;
    const EigenSolution sol = solve_lowest(assemble(oscillator(s), PhysicalParams{}), o);
    const std::size_t mixed[] = {0, 1}, out[] = {0, 5}, one[] = {0};
    const C two[] = {1.0, 1.0};
    CHECK_THROWS_AS(combine(sol, mixed, two), DegeneracyError);
    CHECK_THROWS_AS(combine(sol, out, two), std::out_of_range);
    CHECK_THROWS_AS(combine(sol, one, two), std::invalid_argument);
    const C zero[] = {0.0};
    CHECK_THROWS_AS(combine(sol, one, zero), std::invalid_argument);
}

TEST_CASE("solver failures carry the best pairs") {
    const GridSpec s = GridSpec::from_domain(41, 41, -5, 5, -5, 5);
    SolverOptions o;
    o.count = 2;
    o.maxIter = 1;
    try {
        (void)solve_lowest(assemble(oscillator(s), PhysicalParams{}), o);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.best().energies.size() == 2);
        CHECK(e.best().residuals.size() == 2);
        CHECK(e.best().residuals[0] > o.tol);
    }
    SolverOptions bad;
    bad.count = 0;
    CHECK_THROWS_AS(solve_lowest(assemble(oscillator(s), PhysicalParams{}), bad), std::invalid_argument);
}

TEST_CASE("solver is deterministic for a fixed seed") {
    const GridSpec s = GridSpec::from_domain(25, 25, -4, 4, -4, 4);
    SolverOptions o;
    o.count = 3;
    const Hamiltonian H = assemble(oscillator(s), PhysicalParams{});
    const EigenSolution a = solve_lowest(H, o), b = solve_lowest(H, o);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(a.energies[n] == b.energies[n]);
        for (std::size_t k = 0; k < s.size(); ++k) REQUIRE(a.states[n][k] == b.states[n][k]);
    }
}

TEST_CASE("hamiltonian is symmetric and bounded") {
    const GridSpec s = GridSpec::from_domain(12, 9, -2, 2, -1, 2);
    ScalarField V = oscillator(s);
    V.invalidate(20);
    const Hamiltonian H = assemble(V, PhysicalParams{1.3, 0.7, 1.0});
    CHECK(H.potential()[20] == kWallPotential);
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> u(s.size()), v(s.size()), Hu(s.size()), Hv(s.size());
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    H.apply(u, Hu);
    H.apply(v, Hv);
    double a = 0, b = 0, uu = 0, uHu = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        a += v[k] * Hu[k];
        b += u[k] * Hv[k];
        uu += u[k] * u[k];
        uHu += u[k] * Hu[k];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(uHu / uu <= H.upper_bound());
    CHECK(uHu / uu >= H.lower_bound());
}

TEST_CASE("builtin catalog") {
    const GridSpec s = GridSpec::from_domain(33, 33, -4, 4, -4, 4);
    const PhysicalParams p{};
    BuiltinParams bp;
    bp.k1 = 2;
    bp.k2 = 3;
    CHECK(*builtin_state("plane_wave", bp, s, p).energy == 6.5);
    CHECK(*builtin_state("ho_ground", bp, s, p).energy == 1.0);
    bp.l = 2;
    const CatalogState v2 = builtin_state("ho_vortex", bp, s, p);
    CHECK(*v2.energy == 3.0);
    CHECK(decompose(v2.psi).residues.total() == 2);
    CHECK_FALSE(builtin_state("exp_z", bp, s, p).energy);
    CHECK_THROWS_AS(builtin_state("nope", bp, s, p), std::invalid_argument);
    bp.l = 0;
    CHECK_THROWS_AS(builtin_state("ho_vortex", bp, s, p), std::invalid_argument);
    const GridSpec unit = GridSpec::from_domain(33, 33, 0, 1, 0, 1);
    bp.n1 = 1;
    bp.n2 = 2;
    CHECK(*builtin_state("box_mode", bp, unit, p).energy == doctest::Approx(2.5 * std::numbers::pi * std::numbers::pi));
}
