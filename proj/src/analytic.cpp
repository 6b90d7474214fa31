#include "madelung/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace madelung {

namespace {

// Interior max of a field, or nothing when no interior cell is valid.
std::optional<double> interior_max(const ScalarField& f, const Mask& interior) {
    const Norms n = norms(f, interior);
    if (n.count == 0) return std::nullopt;
    return n.max;
}

ScalarField magnitude(const VectorField& w) {
    ScalarField out(w.spec);
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w.valid(k)) out[k] = std::hypot(w.x[k], w.y[k]);
        else out.invalidate(k);
    }
    return out;
}

Verdict indeterminate(double tol, const char* what) {
    Verdict v;
    v.status = Status::PreconditionNotMet;
    v.tol = tol;
    v.note = std::string("no interior cells for ") + what;
    return v;
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Holds: return "holds";
        case Status::Fails: return "fails";
        case Status::PreconditionNotMet: return "precondition-not-met";
    }
    return "?";
}

Mask analysis_interior(const MadelungFields& m) {
    Mask in = interior(m.spec(), kInteriorMargin);
    for (std::size_t k = 0; k < in.size(); ++k)
        if (!m.S.valid(k)) in[k] = 0;
    return in;
}

AnalyticityReport analyze(const MadelungFields& m) {
    const auto& s = m.spec();
    AnalyticityReport r;
    r.interior = analysis_interior(m);
    r.orth = dot(m.gradS, m.gradI);
    r.crStrict = ScalarField(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (m.gradS.valid(k) && m.gradI.valid(k)) {
            r.crStrict[k] = std::hypot(m.gradS.x[k] - m.gradI.y[k], m.gradS.y[k] + m.gradI.x[k]);
        } else {
            r.crStrict.invalidate(k);
        }
    }
    r.harmS = m.lapS;
    r.harmI = m.lapI;
    r.orthNorms = norms(r.orth, r.interior);
    r.crStrictNorms = norms(r.crStrict, r.interior);
    r.harmSNorms = norms(r.harmS, r.interior);
    r.harmINorms = norms(r.harmI, r.interior);
    if (r.harmSNorms.count == 0 || r.harmINorms.count == 0)
        throw EmptyInteriorError("empty interior: no cell carries every derivative");
    return r;
}

double default_tolerance(const MadelungFields& m) {
    const double h = m.spec().h();
    const Mask in = analysis_interior(m);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < in.size(); ++k) {
        if (!in[k] || !m.gradS.valid(k) || !m.gradI.valid(k)) continue;
        sum += m.gradS.x[k] * m.gradS.x[k] + m.gradS.y[k] * m.gradS.y[k] +
               m.gradI.x[k] * m.gradI.x[k] + m.gradI.y[k] * m.gradI.y[k];
        ++count;
    }
    const double g = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
    return std::max(10.0 * h * h, 1e-8) * std::max(1.0, g);
}

PropertyVerdicts check_properties(const MadelungFields& m, const CurrentFields& c,
                                  const AnalyticityReport& r, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const Mask& in = r.interior;
    const auto harmI = interior_max(r.harmI, in);
    const auto harmS = interior_max(r.harmS, in);
    const auto orth = interior_max(r.orth, in);
    const auto defectC = interior_max(c.defectC, in);
    const auto defectA = interior_max(c.defectA, in);
    const auto gradS = interior_max(magnitude(m.gradS), in);
    std::optional<double> divJt;
    if (c.divJtildeReduced) divJt = interior_max(*c.divJtildeReduced, in);

    auto zero = [tol](double v) { return v <= tol; };
    PropertyVerdicts out;

    // P1: I harmonic <=> g analytic, derived under the stationary continuity law.
    if (harmI && orth && defectC) {
        Verdict v;
        v.tol = tol;
        v.residuals = {{"harmI", *harmI}, {"orth", *orth}, {"defectC", *defectC}};
        if (!zero(*defectC)) {
            v.status = Status::PreconditionNotMet;
            v.note = "stationary continuity (defectC ~ 0) not satisfied";
        } else {
            v.status = zero(*harmI) == zero(*orth) ? Status::Holds : Status::Fails;
        }
        out.p[0] = v;
    } else {
        out.p[0] = indeterminate(tol, "P1");
    }

    // P2: grad S = 0 => I harmonic and g analytic.
    if (gradS && harmI && orth && defectC) {
        Verdict v;
        v.tol = tol;
        v.residuals = {{"gradS", *gradS}, {"harmI", *harmI}, {"orth", *orth}, {"defectC", *defectC}};
        if (!zero(*gradS)) {
            v.status = Status::PreconditionNotMet;
            v.note = "grad S is not ~0";
        } else if (!zero(*defectC)) {
            v.status = Status::PreconditionNotMet;
            v.note = "stationary continuity (defectC ~ 0) not satisfied";
        } else {
            v.status = zero(*harmI) && zero(*orth) ? Status::Holds : Status::Fails;
        }
        out.p[1] = v;
    } else {
        out.p[1] = indeterminate(tol, "P2");
    }

    // P3: div Jtilde = 0 <=> grad I . grad S = -lap S / 2. Both sides are the
    // same field up to discretization, so agreement of the fields themselves
    // (gap <= tol) also counts; maxima straddling tol by roundoff is not a failure.
    if (defectA) {
        Verdict v;
        v.tol = tol;
        v.residuals = {{"defectA", *defectA}};
        bool agree = true;
        if (divJt) {
            ScalarField gap(c.defectA.spec);
            for (std::size_t k = 0; k < gap.size(); ++k) {
                if (c.defectA.valid(k) && c.divJtildeReduced->valid(k))
                    gap[k] = (*c.divJtildeReduced)[k] - c.defectA[k];
                else
                    gap.invalidate(k);
            }
            const double g = interior_max(gap, in).value_or(0.0);
            v.residuals["divJtildeReduced"] = *divJt;
            v.residuals["gap"] = g;
            agree = zero(*divJt) == zero(*defectA) || zero(g);
        } else {
            v.note = "Jtilde unavailable; defectA used for both sides";
        }
        v.status = agree ? Status::Holds : Status::Fails;
        out.p[2] = v;
    } else {
        out.p[2] = indeterminate(tol, "P3");
    }

    // P4: S harmonic => (div Jtilde = 0 <=> g analytic).
    if (harmS && defectA && orth) {
        Verdict v;
        v.tol = tol;
        v.residuals = {{"harmS", *harmS}, {"defectA", *defectA}, {"orth", *orth}};
        if (!zero(*harmS)) {
            v.status = Status::PreconditionNotMet;
            v.note = "S is not harmonic";
        } else {
            v.status = zero(*defectA) == zero(*orth) ? Status::Holds : Status::Fails;
        }
        out.p[3] = v;
    } else {
        out.p[3] = indeterminate(tol, "P4");
    }

    // P5: S constant => div Jtilde = 0 and g analytic.
    if (gradS && defectA && orth) {
        Verdict v;
        v.tol = tol;
        v.residuals = {{"gradS", *gradS}, {"defectA", *defectA}, {"orth", *orth}};
        if (!zero(*gradS)) {
            v.status = Status::PreconditionNotMet;
            v.note = "S is not constant";
        } else {
            v.status = zero(*defectA) && zero(*orth) ? Status::Holds : Status::Fails;
        }
        out.p[4] = v;
    } else {
        out.p[4] = indeterminate(tol, "P5");
    }
    return out;
}

}  // namespace madelung
