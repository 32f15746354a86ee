#include "orbholo/potential.hpp"

#include <cmath>

#include "orbholo/errors.hpp"
#include "orbholo/units.hpp"

namespace orbholo {

namespace {

// Radial profile v(r) = -z_eff f(r)/r and its first two derivatives.
// Beyond the taper f = 0 identically, so v vanishes with all derivatives.
struct RadialPotential {
    double v = 0.0;
    double dv = 0.0;
    double d2v = 0.0;
};

RadialPotential radial(const TargetAtom& atom, double r) {
    RadialPotential out;
    const double z = atom.z_eff();
    if (z == 0.0) return out;

    double f = 1.0, df = 0.0, d2f = 0.0;
    if (atom.truncation()) {
        const double r0 = atom.truncation()->r0;
        const double l = atom.truncation()->l;
        if (r >= l) return out;
        if (r > r0) {
            const double du = 0.5 * units::pi / (l - r0);
            const double u = du * (r - r0);
            const double c = std::cos(u), s = std::sin(u);
            const double c5 = c * c * c * c * c;
            f = c5 * c * c;
            df = -7.0 * c5 * c * s * du;
            d2f = -7.0 * du * du * (f - 6.0 * c5 * s * s);
        }
    }
    out.v = -z * f / r;
    out.dv = z * f / (r * r) - z * df / r;
    out.d2v = -2.0 * z * f / (r * r * r) + 2.0 * z * df / (r * r) - z * d2f / r;
    return out;
}

double safe_norm(Vec2 r) {
    const double n = norm(r);
    if (n <= 0.0) throw singularity_error("potential: evaluation at |r| = 0");
    return n;
}

} // namespace

TargetAtom::TargetAtom(double ip, double z_eff, std::optional<Truncation> truncation)
    : ip_(ip), z_eff_(z_eff), truncation_(truncation) {
    if (!(ip > 0.0)) throw domain_error("TargetAtom: ip must be positive");
    if (!(z_eff >= 0.0)) throw domain_error("TargetAtom: z_eff must be nonnegative");
    if (truncation_ && !(truncation_->r0 > 0.0 && truncation_->r0 < truncation_->l))
        throw domain_error("TargetAtom: truncation requires 0 < r0 < l");
}

TargetAtom TargetAtom::with_truncation(Truncation t) const {
    return TargetAtom(ip_, z_eff_, t);
}

TargetAtom TargetAtom::without_truncation() const { return TargetAtom(ip_, z_eff_); }

double potential_value(const TargetAtom& atom, Vec2 r) {
    return radial(atom, safe_norm(r)).v;
}

Vec2 potential_gradient(const TargetAtom& atom, Vec2 r) {
    const double n = safe_norm(r);
    const RadialPotential rp = radial(atom, n);
    return {rp.dv * r.z / n, rp.dv * r.x / n};
}

Mat2 potential_hessian(const TargetAtom& atom, Vec2 r) {
    const double n = safe_norm(r);
    const RadialPotential rp = radial(atom, n);
    const double uz = r.z / n, ux = r.x / n;
    const double rad = rp.d2v;      // curvature along r-hat
    const double tan = rp.dv / n;   // curvature transverse to r-hat
    Mat2 h;
    h.zz = rad * uz * uz + tan * ux * ux;
    h.xx = rad * ux * ux + tan * uz * uz;
    h.zx = h.xz = (rad - tan) * uz * ux;
    return h;
}

Truncation truncation_bounds(const LaserField& field, const TargetAtom& atom,
                             double multiplier) {
    if (!(multiplier > 0.0)) throw domain_error("truncation_bounds: multiplier must be positive");
    const double emax = field.e_max();
    const double r0 = multiplier * atom.ip() / emax;
    const double l = r0 + emax / (2.0 * field.omega() * field.omega());
    return {r0, l};
}

} // namespace orbholo
