#ifndef ORBHOLO_QUARTIC_HPP
#define ORBHOLO_QUARTIC_HPP

#include <array>
#include <complex>

namespace orbholo {

using cplx = std::complex<double>;

// Closed-form solution of a monic quartic with real coefficients
//   x^4 + b x^3 + c x^2 + d x + e = 0
// via the cubic resolvent.  All multivalued functions use principal
// branches; the chosen branch is deterministic for fixed input.
//
// Roots are grouped in resolvent pairs:
//   roots[0], roots[1] = -b/4 + zeta +- sqrt(-4 zeta^2 - 2 P + eta)/2
//   roots[2], roots[3] = -b/4 - zeta +- sqrt(-4 zeta^2 - 2 P - eta)/2
// with P the depressed-quartic coefficient and eta = -q/zeta (q the
// depressed linear coefficient).  For q -> 0 the pairs degenerate
// smoothly with eta = 0.
struct QuarticClosedForm {
    std::array<cplx, 4> roots{};
    cplx delta0{};   // resolvent invariant
    cplx delta1{};   // resolvent invariant
    cplx q_cbrt{};   // Q = cbrt((delta1 + sqrt(delta1^2 - 4 delta0^3))/2)
    cplx zeta{};     // half square root of the resolvent-cubic combination
    cplx eta{};      // -q/zeta, pairing term of the inner square roots
};

// Throws resolvent_degeneracy_error when the resolvent cannot determine the
// roots (Q ~ 0 with nonzero higher invariants, or zeta ~ 0 with q != 0);
// callers fall back to quartic_roots_iterative.
QuarticClosedForm quartic_solve_closed(double b, double c, double d, double e);

// Durand-Kerner iteration; generic fallback, no branch choices involved.
std::array<cplx, 4> quartic_roots_iterative(double b, double c, double d, double e);

// One complex Newton polish pass of a root of the quartic.
cplx quartic_polish(cplx x, double b, double c, double d, double e, int iters = 3);

} // namespace orbholo

#endif
