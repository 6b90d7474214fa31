#include "madelung/currents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace madelung {

void PhysicalParams::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(hbar) || !ok(mass) || !ok(kB))
        throw std::invalid_argument("hbar, mass and kB must be positive and finite");
}

VectorField velocity(const MadelungFields& m, const PhysicalParams& p) {
    p.validate();
    VectorField v = m.gradI;
    const double c = p.hbar_over_mass();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v.valid(k)) continue;
        v.x[k] *= c;
        v.y[k] *= c;
    }
    return v;
}

ProbabilityCurrent probability_current(const MadelungFields& m, const PhysicalParams& p) {
    p.validate();
    const auto& s = m.spec();
    const double c = p.hbar_over_mass();
    ProbabilityCurrent out;
    out.J = VectorField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!m.gradI.valid(k) || !m.S.valid(k)) {
            out.J.invalidate(k);
            continue;
        }
        const double rho = std::exp(2.0 * m.S[k]);
        out.J.x[k] = c * rho * m.gradI.x[k];
        out.J.y[k] = c * rho * m.gradI.y[k];
    }
    out.divJ = divergence(out.J);

    out.defectC = ScalarField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (m.gradS.valid(k) && m.gradI.valid(k) && m.lapI.valid(k)) {
            out.defectC[k] = 2.0 * (m.gradS.x[k] * m.gradI.x[k] + m.gradS.y[k] * m.gradI.y[k]) + m.lapI[k];
        } else {
            out.defectC.invalidate(k);
        }
    }
    return out;
}

AnalyticCurrent analytic_current(const MadelungFields& m, const PhysicalParams& p) {
    p.validate();
    const auto& s = m.spec();
    AnalyticCurrent out;
    out.defectA = ScalarField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (m.gradS.valid(k) && m.gradI.valid(k) && m.lapS.valid(k)) {
            out.defectA[k] = 2.0 * (m.gradI.x[k] * m.gradS.x[k] + m.gradI.y[k] * m.gradS.y[k]) + m.lapS[k];
        } else {
            out.defectA.invalidate(k);
        }
    }
    if (!m.phase) {
        out.vortex = m.vortex;
        return out;
    }

    const ScalarField& I = *m.phase;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.size(); ++k)
        if (I.valid(k)) top = std::max(top, I[k]);

    const double c = p.hbar_over_mass();
    VectorField Jt(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!I.valid(k) || !m.gradS.valid(k)) {
            Jt.invalidate(k);
            continue;
        }
        const double weight = c * std::exp(2.0 * (I[k] - top));
        Jt.x[k] = weight * m.gradS.x[k];
        Jt.y[k] = weight * m.gradS.y[k];
    }
    ScalarField div = divergence(Jt);
    ScalarField reduced(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!div.valid(k)) {
            reduced.invalidate(k);
            continue;
        }
        const double r = div[k] / (c * std::exp(2.0 * (I[k] - top)));
        if (std::isfinite(r)) reduced[k] = r;
        else reduced.invalidate(k);
    }
    out.Jtilde = std::move(Jt);
    out.divJtilde = std::move(div);
    out.divJtildeReduced = std::move(reduced);
    return out;
}

ScalarField quantum_potential(const MadelungFields& m, const PhysicalParams& p) {
    p.validate();
    const auto& s = m.spec();
    const double c = -p.hbar * p.hbar / (2.0 * p.mass);
    ScalarField U(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (m.gradS.valid(k) && m.lapS.valid(k)) {
            const double g2 = m.gradS.x[k] * m.gradS.x[k] + m.gradS.y[k] * m.gradS.y[k];
            U[k] = c * (g2 + m.lapS[k]);
        } else {
            U.invalidate(k);
        }
    }
    return U;
}

ScalarField qhj_residual(const MadelungFields& m, const ScalarField& V, double E,
                         const PhysicalParams& p) {
    const auto& s = m.spec();
    if (!V.spec.same_geometry(s)) throw GridError("qhj_residual: potential grid mismatch");
    const ScalarField U = quantum_potential(m, p);
    const double kinetic = p.hbar * p.hbar / (2.0 * p.mass);
    ScalarField r(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (U.valid(k) && V.valid(k) && m.gradI.valid(k)) {
            const double g2 = m.gradI.x[k] * m.gradI.x[k] + m.gradI.y[k] * m.gradI.y[k];
            r[k] = kinetic * g2 + V[k] + U[k] - E;
        } else {
            r.invalidate(k);
        }
    }
    return r;
}

ScalarField de_broglie(const MadelungFields& m, const PhysicalParams& p) {
    p.validate();
    const auto& s = m.spec();
    ScalarField out(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double g = m.gradI.valid(k) ? std::hypot(m.gradI.x[k], m.gradI.y[k]) : 0.0;
        if (g >= 1e-12) out[k] = 1.0 / g;
        else out.invalidate(k);
    }
    return out;
}

CurrentFields compute_currents(const MadelungFields& m, const PhysicalParams& p, const ScalarField* V,
                               std::optional<double> E) {
    CurrentFields c;
    c.rho = ScalarField(m.spec());
    for (std::size_t k = 0; k < c.rho.size(); ++k) {
        if (m.S.valid(k)) c.rho[k] = std::exp(2.0 * m.S[k]);
        else c.rho.invalidate(k);
    }
    c.v = velocity(m, p);
    auto pc = probability_current(m, p);
    c.J = std::move(pc.J);
    c.divJ = std::move(pc.divJ);
    c.defectC = std::move(pc.defectC);
    auto ac = analytic_current(m, p);
    c.Jtilde = std::move(ac.Jtilde);
    c.divJtilde = std::move(ac.divJtilde);
    c.divJtildeReduced = std::move(ac.divJtildeReduced);
    c.defectA = std::move(ac.defectA);
    c.vortex = std::move(ac.vortex);
    c.U = quantum_potential(m, p);
    if (V && E) c.qhjResidual = qhj_residual(m, *V, *E, p);
    c.deBroglie = de_broglie(m, p);
    return c;
}

}  // namespace madelung
