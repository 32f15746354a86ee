#include "orbholo/kepler.hpp"

#include <cmath>

#include "orbholo/errors.hpp"

namespace orbholo {

namespace {

inline Vec2 rot90(Vec2 u) { return {-u.x, u.z}; }

} // namespace

KeplerAsymptotics kepler_asymptotics(const TargetAtom& atom, Vec2 r, Vec2 p) {
    const double mu = atom.z_eff();
    const double rn = norm(r);
    if (rn == 0.0) throw singularity_error("kepler map evaluated at the origin");
    const double energy = 0.5 * dot(p, p) - mu / rn;
    if (energy <= 0.0)
        throw bound_electron_error("nonpositive Coulomb energy, no outgoing asymptote");

    KeplerAsymptotics out;
    out.energy = energy;
    const double p_mag = std::sqrt(2.0 * energy);

    if (mu == 0.0) {
        out.p_inf = p;
        out.tail_phase = 0.0;
        out.ecc = 1.0;
        return out;
    }

    const double ell = cross(r, p);
    const double radial = dot(r, p);
    // p x L = L (p_x, -p_z) in the (z, x) plane.
    const Vec2 ecc_vec{(ell * p.x) / mu - r.z / rn, (-ell * p.z) / mu - r.x / rn};
    const double ecc = norm(ecc_vec);
    out.ecc = std::max(ecc, 1.0);

    if (ell == 0.0) {
        // Radial orbit: outgoing keeps its direction, inbound hits the core.
        if (radial <= 0.0)
            throw hard_collision_error("radial inbound Coulomb orbit has no asymptote");
        out.p_inf = (p_mag / rn) * r;
    } else {
        // Outgoing asymptote at true anomaly nu with cos(nu) = -1/ecc,
        // measured from the perihelion unit vector e_hat; the quarter-turn
        // companion is oriented by the sign of the angular momentum so that
        // nu increases along the motion.
        const Vec2 e_hat = (1.0 / ecc) * ecc_vec;
        const Vec2 e_perp = (ell > 0.0 ? 1.0 : -1.0) * rot90(e_hat);
        const double cos_nu = -1.0 / ecc;
        const double sin_nu = std::sqrt(std::max(0.0, 1.0 - cos_nu * cos_nu));
        out.p_inf = p_mag * (cos_nu * e_hat + sin_nu * e_perp);
    }

    // Hyperbolic anomaly of the matching point: cosh H0 = (r/a + 1)/ecc
    // with a = mu/(2E); sign from the radial velocity.
    const double a_axis = mu / (2.0 * energy);
    const double cosh_h0 = std::max(1.0, (rn / a_axis + 1.0) / out.ecc);
    const double h0 = std::copysign(std::acosh(cosh_h0), radial == 0.0 ? 1.0 : radial);
    out.tail_phase = (mu / p_mag) *
                     (std::log(2.0 * p_mag * p_mag * p_mag / (mu * out.ecc)) - h0);
    return out;
}

std::pair<Mat2, Mat2> kepler_jacobian(const TargetAtom& atom, Vec2 r, Vec2 p) {
    constexpr double h = 1e-7;
    const auto column = [&](Vec2 dr, Vec2 dp) {
        const Vec2 plus = kepler_asymptotics(atom, r + dr, p + dp).p_inf;
        const Vec2 minus = kepler_asymptotics(atom, r - dr, p - dp).p_inf;
        return Vec2{(plus.z - minus.z) / (2.0 * h), (plus.x - minus.x) / (2.0 * h)};
    };
    const Vec2 cz = column({h, 0.0}, {});
    const Vec2 cx = column({0.0, h}, {});
    const Vec2 cpz = column({}, {h, 0.0});
    const Vec2 cpx = column({}, {0.0, h});
    Mat2 d_r{cz.z, cx.z, cz.x, cx.x};
    Mat2 d_p{cpz.z, cpx.z, cpz.x, cpx.x};
    return {d_r, d_p};
}

} // namespace orbholo
