#include "orbholo/quartic.hpp"

#include <cmath>
#include <limits>

#include "orbholo/errors.hpp"

namespace orbholo {

namespace {

cplx eval_quartic(cplx x, double b, double c, double d, double e) {
    return (((x + b) * x + c) * x + d) * x + e;
}

cplx eval_quartic_deriv(cplx x, double b, double c, double d) {
    return ((4.0 * x + 3.0 * b) * x + 2.0 * c) * x + d;
}

// Scale used to decide when resolvent quantities count as zero.
double coeff_scale(double b, double c, double d, double e) {
    double s = 1.0;
    s = std::max(s, std::abs(b));
    s = std::max(s, std::abs(c));
    s = std::max(s, std::abs(d));
    s = std::max(s, std::abs(e));
    return s;
}

} // namespace

QuarticClosedForm quartic_solve_closed(double b, double c, double d, double e) {
    QuarticClosedForm out;
    const double scale = coeff_scale(b, c, d, e);
    const double tiny = 1e-14 * scale;

    // Depressed form x = y - b/4: y^4 + P y^2 + q y + r.
    const double P = c - 0.375 * b * b;
    const double q = d - 0.5 * b * c + 0.125 * b * b * b;

    const double delta0 = c * c - 3.0 * b * d + 12.0 * e;
    const double delta1 = 2.0 * c * c * c - 9.0 * b * c * d + 27.0 * b * b * e +
                          27.0 * d * d - 72.0 * c * e;
    out.delta0 = delta0;
    out.delta1 = delta1;

    // Perfect square (x^2 + (b/2) x + s)^2: two double roots, and the
    // resolvent quantities vanish identically.  Detecting it here keeps
    // zeta and eta at exact zero instead of the square root of rounding
    // noise the general path would produce.
    const double s = 0.5 * (c - 0.25 * b * b);
    if (std::abs(d - b * s) <= 1e-13 * scale && std::abs(e - s * s) <= 1e-13 * scale) {
        out.q_cbrt = std::pow(cplx(0.5 * delta1), 1.0 / 3.0);
        out.zeta = 0.0;
        out.eta = 0.0;
        const cplx rt = std::sqrt(cplx(0.0625 * b * b - s));
        out.roots[0] = -0.25 * b + rt;
        out.roots[1] = -0.25 * b - rt;
        out.roots[2] = out.roots[0];
        out.roots[3] = out.roots[1];
        return out;
    }

    // The discriminant combination cancels catastrophically near double
    // roots; below the rounding floor its square root is pure noise.  The
    // invariants are themselves sums with cancellation, so the floor must
    // budget their term-level rounding, not just the final subtraction.
    double disc = delta1 * delta1 - 4.0 * delta0 * delta0 * delta0;
    const double eps_m = std::numeric_limits<double>::epsilon();
    const double delta0_mag = c * c + 3.0 * std::abs(b * d) + 12.0 * std::abs(e);
    const double delta1_mag = 2.0 * std::abs(c * c * c) + 9.0 * std::abs(b * c * d) +
                              27.0 * b * b * std::abs(e) + 27.0 * d * d +
                              72.0 * std::abs(c * e);
    const double disc_noise =
        eps_m * (2.0 * std::abs(delta1) * delta1_mag +
                 12.0 * delta0 * delta0 * delta0_mag + delta1 * delta1 +
                 4.0 * std::abs(delta0 * delta0 * delta0));
    if (std::abs(disc) < 8.0 * disc_noise) disc = 0.0;
    const cplx inner = std::sqrt(cplx(disc));
    cplx qc;
    if (disc >= 0.0 && delta1 < 0.0) {
        // (delta1 + sqrt(disc))/2 cancels for negative delta1.  Its stable
        // twin follows from (delta1 + s)(s - delta1) = disc - delta1^2
        // = -4 delta0^3.
        qc = cplx(-2.0 * delta0 * delta0 * delta0 / (inner.real() - delta1));
    } else {
        qc = (cplx(delta1) + inner) / 2.0;
    }
    if (std::abs(qc) < tiny * tiny * tiny) qc = (cplx(delta1) - inner) / 2.0;
    if (std::abs(qc) < tiny * tiny * tiny) {
        if (std::abs(delta0) < tiny * tiny) {
            // Quadruple/triple root region; the resolvent carries no
            // information here.
            throw resolvent_degeneracy_error("quartic: vanishing resolvent invariants");
        }
        throw resolvent_degeneracy_error("quartic: resolvent cube root degenerate");
    }
    const cplx Q = std::pow(qc, 1.0 / 3.0);
    out.q_cbrt = Q;

    cplx zeta = 0.5 * std::sqrt(-2.0 / 3.0 * P + (Q + delta0 / Q) / 3.0);

    // The Q-route for zeta loses digits when the resolvent root is small
    // against P, and eta = -q/zeta amplifies that loss.  zeta^2 solves the
    // resolvent cubic 64 z^3 + 32 P z^2 + (4 P^2 - 16 r) z - q^2 = 0 with
    // machine-accurate coefficients, so a Newton pass restores it.
    const double r = e - 0.25 * b * d + 0.0625 * b * b * c -
                     (3.0 / 256.0) * b * b * b * b;
    const double lin = 4.0 * P * P - 16.0 * r;
    // Near the perfect-square manifold the cubic has a near-double root at
    // zero, so Newton converges linearly there; the budget covers that.
    cplx z = zeta * zeta;
    for (int it = 0; it < 60; ++it) {
        const cplx g = ((64.0 * z + 32.0 * P) * z + lin) * z - q * q;
        const cplx gp = (192.0 * z + 64.0 * P) * z + lin;
        if (std::abs(gp) == 0.0) break;
        const cplx step = g / gp;
        z -= step;
        if (std::abs(step) <= 1e-16 * std::abs(z)) break;
    }
    cplx zeta_ref = std::sqrt(z);
    if (std::abs(zeta_ref - zeta) > std::abs(zeta_ref + zeta)) zeta_ref = -zeta_ref;
    zeta = zeta_ref;

    cplx eta;
    if (std::abs(zeta) > 1e-10 * std::sqrt(scale)) {
        eta = -q / zeta;
    } else if (std::abs(q) <= tiny) {
        // Depressed biquadratic: z = 0 solves the resolvent cubic but never
        // splits the pairs (the roots would collapse to one +- pair counted
        // twice).  The two valid splittings are the roots of the remaining
        // quadratic, z = -P/4 +- sqrt(r)/2; take the larger for stability.
        const cplx sr = std::sqrt(cplx(r));
        const cplx z_hi = -0.25 * P + 0.5 * sr;
        const cplx z_lo = -0.25 * P - 0.5 * sr;
        zeta = std::sqrt(std::abs(z_hi) >= std::abs(z_lo) ? z_hi : z_lo);
        eta = 0.0;
    } else {
        throw resolvent_degeneracy_error("quartic: zeta ~ 0 with nonzero odd coefficient");
    }
    out.zeta = zeta;
    out.eta = eta;

    const cplx m = -4.0 * zeta * zeta - 2.0 * P;
    // The principal branch cut of the pair-offset square roots lies along
    // the negative real axis, which the perfect-square manifold crosses.
    // An upper-half-plane orientation keeps the pair slots continuous there.
    cplx sqa = 0.5 * std::sqrt(m + eta);
    if (sqa.imag() < 0.0) sqa = -sqa;
    cplx sqb = 0.5 * std::sqrt(m - eta);
    if (sqb.imag() < 0.0) sqb = -sqb;
    // zeta -+ sq cancels when a pair straddles zero; the smaller member is
    // recovered from the pair product 2 zeta^2 + P/2 -+ eta/4 instead.
    cplx ya_plus = zeta + sqa, ya_minus = zeta - sqa;
    const cplx prod_a = 2.0 * zeta * zeta + 0.5 * P - 0.25 * eta;
    if (std::abs(ya_plus) > std::abs(ya_minus) && std::abs(ya_plus) > 0.0)
        ya_minus = prod_a / ya_plus;
    else if (std::abs(ya_minus) > 0.0)
        ya_plus = prod_a / ya_minus;
    cplx yb_plus = -zeta + sqb, yb_minus = -zeta - sqb;
    const cplx prod_b = 2.0 * zeta * zeta + 0.5 * P + 0.25 * eta;
    if (std::abs(yb_plus) > std::abs(yb_minus) && std::abs(yb_plus) > 0.0)
        yb_minus = prod_b / yb_plus;
    else if (std::abs(yb_minus) > 0.0)
        yb_plus = prod_b / yb_minus;
    const double shift = -0.25 * b;
    out.roots[0] = shift + ya_plus;
    out.roots[1] = shift + ya_minus;
    out.roots[2] = shift + yb_plus;
    out.roots[3] = shift + yb_minus;
    return out;
}

std::array<cplx, 4> quartic_roots_iterative(double b, double c, double d, double e) {
    // Durand-Kerner with the standard non-real starting configuration.
    std::array<cplx, 4> x{cplx(0.4, 0.9)};
    x[1] = x[0] * x[0];
    x[2] = x[0] * x[1];
    x[3] = x[0] * x[2];
    for (int iter = 0; iter < 200; ++iter) {
        double move = 0.0;
        for (int i = 0; i < 4; ++i) {
            cplx denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != i) denom *= x[i] - x[j];
            const cplx step = eval_quartic(x[i], b, c, d, e) / denom;
            x[i] -= step;
            move = std::max(move, std::abs(step));
        }
        if (move < 1e-15 * coeff_scale(b, c, d, e)) break;
    }
    for (auto& r : x) r = quartic_polish(r, b, c, d, e, 2);
    return x;
}

cplx quartic_polish(cplx x, double b, double c, double d, double e, int iters) {
    for (int k = 0; k < iters; ++k) {
        const cplx f = eval_quartic(x, b, c, d, e);
        const cplx fp = eval_quartic_deriv(x, b, c, d);
        if (std::abs(fp) == 0.0) break;
        x -= f / fp;
    }
    return x;
}

} // namespace orbholo
