#include "madelung/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace madelung {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

void apply_block(const Hamiltonian& H, const Mat& X, Mat& Y) {
    const auto n = static_cast<std::size_t>(X.rows());
    Y.resize(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        H.apply(std::span<const double>(X.col(c).data(), n), std::span<double>(Y.col(c).data(), n));
}

void orthonormalize(Mat& X) {
    Eigen::HouseholderQR<Mat> qr(X);
    X = qr.householderQ() * Mat::Identity(X.rows(), X.cols());
}

// Rayleigh-Ritz on span(X); X and HX are rotated in place, Ritz values ascending.
Vec rayleigh_ritz(const Hamiltonian& H, Mat& X, Mat& HX) {
    apply_block(H, X, HX);
    Mat G = X.transpose() * HX;
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    X = (X * es.eigenvectors()).eval();
    HX = (HX * es.eigenvectors()).eval();
    return es.eigenvalues();
}

// Scaled Chebyshev filter: damps [a, b], amplifies below a. a0 estimates the
// bottom of the spectrum and fixes the scaling.
Mat chebyshev_filter(const Hamiltonian& H, const Mat& X, std::size_t degree, double a, double b,
                     double a0) {
    const double e = 0.5 * (b - a);
    const double c = 0.5 * (b + a);
    double sigma = e / (a0 - c);
    const double tau = 2.0 / sigma;
    Mat HX;
    apply_block(H, X, HX);
    Mat Y = (HX - c * X) * (sigma / e);
    Mat prev = X;
    for (std::size_t d = 2; d <= degree; ++d) {
        const double next = 1.0 / (tau - sigma);
        apply_block(H, Y, HX);
        Mat Yn = (HX - c * Y) * (2.0 * next / e) - (sigma * next) * prev;
        prev = std::move(Y);
        Y = std::move(Yn);
        sigma = next;
    }
    return Y;
}

Vec residual_norms(const Mat& X, const Mat& HX, const Vec& theta, Eigen::Index count) {
    Vec r(count);
    for (Eigen::Index j = 0; j < count; ++j) r(j) = (HX.col(j) - theta(j) * X.col(j)).norm() / X.col(j).norm();
    return r;
}

// Extends `count` so that a degenerate cluster is never split at the boundary.
Eigen::Index cluster_closure(const Vec& theta, Eigen::Index count, double degTol) {
    Eigen::Index needed = count;
    while (needed < theta.size() && std::abs(theta(needed) - theta(needed - 1)) <= degTol) ++needed;
    return needed;
}

void canonicalize(const GridSpec& s, Mat& X, Vec& theta, Eigen::Index count, double degTol) {
    const double xc = s.x0 + 0.5 * static_cast<double>(s.nx - 1) * s.dx;
    const double yc = s.y0 + 0.5 * static_cast<double>(s.ny - 1) * s.dy;
    Vec dx(X.rows()), dy(X.rows());
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            const auto k = static_cast<Eigen::Index>(s.index(i, j));
            dx(k) = s.x(i) - xc;
            dy(k) = s.y(j) - yc;
        }
    }
    const Vec quad = dy.cwiseProduct(dy) - dx.cwiseProduct(dx);

    Eigen::Index start = 0;
    while (start < count) {
        Eigen::Index end = start + 1;
        while (end < count && std::abs(theta(end) - theta(end - 1)) <= degTol) ++end;
        const Eigen::Index size = end - start;
        if (size > 1) {
            Mat block = X.middleCols(start, size);
            const Mat M = block.transpose() * quad.asDiagonal() * block;
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
            X.middleCols(start, size) = block * es.eigenvectors();
            // Ritz values stay equal to within degTol; keep them ascending.
            const double mean = theta.segment(start, size).mean();
            theta.segment(start, size).setConstant(mean);
        }
        start = end;
    }

    const double wx = dx.cwiseAbs().maxCoeff();
    const double wy = dy.cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < count; ++c) {
        const auto col = X.col(c);
        const double mass = col.cwiseAbs().sum();
        const double moments[3] = {col.sum(), col.dot(dx), col.dot(dy)};
        const double scale[3] = {1.0, wx, wy};
        for (int m = 0; m < 3; ++m) {
            if (std::abs(moments[m]) > 1e-8 * mass * scale[m]) {
                if (moments[m] < 0.0) X.col(c) *= -1.0;
                break;
            }
        }
    }
}

EigenSolution package(const GridSpec& s, const Mat& X, const Vec& theta, const Vec& res,
                      Eigen::Index count, std::size_t iterations, double tol) {
    EigenSolution sol;
    sol.iterations = iterations;
    sol.tol = tol;
    const double cell = std::sqrt(s.dx * s.dy);
    for (Eigen::Index c = 0; c < count; ++c) {
        sol.energies.push_back(theta(c));
        sol.residuals.push_back(res(c));
        ComplexField psi(s);
        const double scale = 1.0 / (X.col(c).norm() * cell);
        for (Eigen::Index k = 0; k < X.rows(); ++k)
            psi[static_cast<std::size_t>(k)] = {X(k, c) * scale, 0.0};
        sol.states.push_back(std::move(psi));
    }
    return sol;
}

}  // namespace

Hamiltonian::Hamiltonian(GridSpec spec, std::vector<double> potential, PhysicalParams params)
    : spec_(spec), potential_(std::move(potential)), params_(params) {
    spec_.validate();
    params_.validate();
    if (potential_.size() != spec_.size()) throw GridError("potential size does not match grid");
    const double k = params_.hbar * params_.hbar / (2.0 * params_.mass);
    cx_ = k / (spec_.dx * spec_.dx);
    cy_ = k / (spec_.dy * spec_.dy);
}

void Hamiltonian::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t nx = spec_.nx, ny = spec_.ny;
    if (in.size() != spec_.size() || out.size() != spec_.size()) throw GridError("apply: size mismatch");
    const double diag = 2.0 * (cx_ + cy_);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = j * nx + i;
            double acc = (diag + potential_[k]) * in[k];
            if (i > 0) acc -= cx_ * in[k - 1];
            if (i + 1 < nx) acc -= cx_ * in[k + 1];
            if (j > 0) acc -= cy_ * in[k - nx];
            if (j + 1 < ny) acc -= cy_ * in[k + nx];
            out[k] = acc;
        }
    }
}

ComplexField Hamiltonian::apply(const ComplexField& psi) const {
    if (!psi.spec.same_geometry(spec_)) throw GridError("apply: grid mismatch");
    const std::size_t n = spec_.size();
    std::vector<double> re(n), im(n), hre(n), him(n);
    for (std::size_t k = 0; k < n; ++k) {
        re[k] = psi.valid(k) ? psi[k].real() : 0.0;
        im[k] = psi.valid(k) ? psi[k].imag() : 0.0;
    }
    apply(re, hre);
    apply(im, him);
    ComplexField out(spec_);
    for (std::size_t k = 0; k < n; ++k) out[k] = {hre[k], him[k]};
    return out;
}

double Hamiltonian::upper_bound() const {
    const double vmax = *std::max_element(potential_.begin(), potential_.end());
    return vmax + 4.0 * (cx_ + cy_);
}

double Hamiltonian::lower_bound() const {
    return *std::min_element(potential_.begin(), potential_.end());
}

Hamiltonian assemble(const ScalarField& V, const PhysicalParams& p) {
    std::vector<double> pot(V.size());
    for (std::size_t k = 0; k < V.size(); ++k)
        pot[k] = V.valid(k) && std::isfinite(V[k]) ? V[k] : kWallPotential;
    return Hamiltonian(V.spec, std::move(pot), p);
}

EigenSolution solve_lowest(const Hamiltonian& H, const SolverOptions& opts) {
    if (opts.count < 1 || opts.count > 20) throw std::invalid_argument("count must lie in [1, 20]");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const auto n = static_cast<Eigen::Index>(H.dimension());
    const auto count = static_cast<Eigen::Index>(opts.count);
    if (count > n) throw std::invalid_argument("count exceeds the number of grid cells");
    const Eigen::Index block = std::min<Eigen::Index>(n, count + std::max<Eigen::Index>(4, count));
    const double degTol = 10.0 * opts.tol;

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat X(n, block);
    for (Eigen::Index c = 0; c < block; ++c)
        for (Eigen::Index k = 0; k < n; ++k) X(k, c) = normal(rng);
    orthonormalize(X);

    Mat HX;
    Vec theta = rayleigh_ritz(H, X, HX);
    const double top = H.upper_bound();

    Vec res;
    Eigen::Index needed = count;
    std::size_t iter = 0;
    for (;; ++iter) {
        needed = cluster_closure(theta, count, degTol);
        res = residual_norms(X, HX, theta, needed);
        if (res.maxCoeff() <= opts.tol || block == n) break;
        if (iter >= opts.maxIter) {
            throw SolverError("eigensolver did not converge in " + std::to_string(opts.maxIter) +
                                  " iterations (worst residual " + std::to_string(res.maxCoeff()) + ")",
                              package(H.spec(), X, theta, res, count, iter, opts.tol));
        }
        const double a = theta(block - 1);
        const double a0 = theta(0);
        if (!(a < top) || !(a0 < a)) break;
        X = chebyshev_filter(H, X, opts.filterDegree, a, top, a0);
        orthonormalize(X);
        theta = rayleigh_ritz(H, X, HX);
    }

    canonicalize(H.spec(), X, theta, needed, degTol);
    apply_block(H, X, HX);
    for (Eigen::Index c = 0; c < needed; ++c) theta(c) = X.col(c).dot(HX.col(c)) / X.col(c).squaredNorm();
    res = residual_norms(X, HX, theta, needed);
    if (res.head(count).maxCoeff() > opts.tol)
        throw SolverError("eigensolver stalled above the requested tolerance",
                          package(H.spec(), X, theta, res, count, iter, opts.tol));
    return package(H.spec(), X, theta, res, count, iter, opts.tol);
}

double discrete_norm(const ComplexField& psi) {
    double sum = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k)
        if (psi.valid(k)) sum += std::norm(psi[k]);
    return std::sqrt(sum * psi.spec.dx * psi.spec.dy);
}

std::complex<double> inner_product(const ComplexField& a, const ComplexField& b) {
    if (!a.spec.same_geometry(b.spec)) throw GridError("inner_product: grid mismatch");
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.valid(k) && b.valid(k)) sum += std::conj(a[k]) * b[k];
    return sum * (a.spec.dx * a.spec.dy);
}

CombinedState combine(const EigenSolution& sol, std::span<const std::size_t> indices,
                      std::span<const std::complex<double>> coeffs, std::optional<double> degeneracyTol) {
    if (indices.empty() || indices.size() != coeffs.size())
        throw std::invalid_argument("combine: need one coefficient per index");
    for (std::size_t idx : indices)
        if (idx >= sol.states.size()) throw std::out_of_range("combine: state index out of range");
    const double tol = degeneracyTol.value_or(10.0 * sol.tol);
    const auto [lo, hi] = std::minmax_element(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return sol.energies[a] < sol.energies[b];
    });
    if (sol.energies[*hi] - sol.energies[*lo] > tol)
        throw DegeneracyError("combine: energies differ by " +
                              std::to_string(sol.energies[*hi] - sol.energies[*lo]) +
                              ", the combination is not stationary");

    CombinedState out{ComplexField(sol.states[indices[0]].spec), 0.0};
    double energy = 0.0;
    for (std::size_t n = 0; n < indices.size(); ++n) {
        const auto& st = sol.states[indices[n]];
        for (std::size_t k = 0; k < st.size(); ++k) out.psi[k] += coeffs[n] * st[k];
        energy += sol.energies[indices[n]];
    }
    const double norm = discrete_norm(out.psi);
    if (!(norm > 0.0)) throw std::invalid_argument("combine: combination vanishes");
    for (auto& v : out.psi.values) v /= norm;
    out.energy = energy / static_cast<double>(indices.size());
    return out;
}

}  // namespace madelung
