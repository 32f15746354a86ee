#ifndef ORBHOLO_KEPLER_HPP
#define ORBHOLO_KEPLER_HPP

#include <utility>

#include "orbholo/potential.hpp"

namespace orbholo {

// Closed-form continuation of a positive-energy Coulomb orbit from a
// phase-space point (r, p) out to infinity, for V = -mu/|r| with
// mu = z_eff.  Built from the conserved energy, angular momentum, and
// Laplace-Runge-Lenz vector of the hyperbola.
struct KeplerAsymptotics {
    // Drift momentum on the outgoing asymptote, |p_inf| = sqrt(2 E).
    Vec2 p_inf{0.0, 0.0};
    // Action accumulated by the Coulomb tail beyond the matching point,
    // with the universal ln(t) divergence removed:
    //   (mu/sqrt(2E)) [ ln(2 (2E)^{3/2} / (mu ecc)) - H0 ],
    // where H0 is the hyperbolic anomaly of the matching point (negative
    // on the incoming branch).
    double tail_phase = 0.0;
    double energy = 0.0;
    double ecc = 1.0;
};

// Throws bound_electron_error when E = p^2/2 - mu/|r| <= 0 and
// hard_collision_error on an exactly radial inbound orbit.
KeplerAsymptotics kepler_asymptotics(const TargetAtom& atom, Vec2 r, Vec2 p);

// Central-difference Jacobian blocks (d p_inf / d r, d p_inf / d p) of the
// asymptotic map, step 1e-7.
std::pair<Mat2, Mat2> kepler_jacobian(const TargetAtom& atom, Vec2 r, Vec2 p);

} // namespace orbholo

#endif
