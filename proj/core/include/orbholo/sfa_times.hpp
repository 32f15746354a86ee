#ifndef ORBHOLO_SFA_TIMES_HPP
#define ORBHOLO_SFA_TIMES_HPP

#include <array>
#include <utility>
#include <vector>

#include "orbholo/field.hpp"
#include "orbholo/potential.hpp"

namespace orbholo {

// Complex arithmetic on plane vectors (no conjugation; these appear in
// analytically continued saddle-point equations).
inline CVec2 operator+(Vec2 a, CVec2 b) { return {a.z + b.z, a.x + b.x}; }
inline cplx cdot(const CVec2& a, const CVec2& b) { return a.z * b.z + a.x * b.x; }

enum class TimeBranch { t11, t12, t21, t22, circular };
enum class TimeGroup { t1, t2 };

// One complex ionization time.  Physical solutions live in the upper half
// plane and satisfy the tunneling equation
//   (p + A(t'))^2 + 2 ip = 0
// to within residual_tolerance(atom).
struct IonizationSolution {
    cplx t_prime;
    TimeBranch branch = TimeBranch::t11;
    TimeGroup group = TimeGroup::t1;
    int cycle_n = 0;
    bool valid_quadrant = false;
    bool stokes_discarded = false;
};

// Quartic in xi = cos(omega t' + phi) equivalent to the tunneling equation,
// with its resolvent quantities.  Coefficients are in the barred scaling
//   pz_bar = sqrt(1+eps^2) p_z / (2 (1-eps^2) sqrt(up))   (p_x analogous)
//   u_bar  = [ (1+eps^2)(2 ip + p^2)/(4 up) + eps^2 ] / (1-eps^2)
// The xi^2 coefficient is 2 u_bar + 4 pz_bar^2 + 4 eps^2 px_bar^2: the two
// quadratic momentum terms scale separately, which the tunneling-equation
// residual suite pins down.
struct QuarticResolvent {
    cplx a3, a2, a1, a0;
    cplx delta0, delta1, q, zeta, eta;
    // Set for eps > 0.995, where the (1-eps^2) scalings lose digits.
    bool conditioning_warning = false;
};

// Residual bound below which a time counts as a solution.
inline double residual_tolerance(const TargetAtom& atom) {
    return 1e-9 * std::max(1.0, 2.0 * atom.ip());
}

// Tunneling-equation residual (p + A(t'))^2 + 2 ip; zero at true saddles.
cplx saddle_residual(const LaserField& field, const TargetAtom& atom, Vec2 p,
                     cplx t_prime);

// Monic quartic coefficients for final momentum p.  Throws domain_error at
// eps = 1 (degenerate parameterization; use circular_limit_times).
QuarticResolvent quartic_coefficients(const LaserField& field, const TargetAtom& atom,
                                      Vec2 p);

// Resolvent quantities (delta0, delta1, Q, zeta, eta) for the coefficients;
// principal branches throughout.  Throws resolvent_degeneracy_error when
// zeta ~ 0 with a nonvanishing odd coefficient (callers fall back to the
// iterative quartic solver).
std::pair<cplx, cplx> resolvent_zeta_eta(const QuarticResolvent& coeffs);

// The four arccos-form candidates {t11, t12, t21, t22} in cycle window n.
// All have Im t' > 0.  Exactly two candidates solve the tunneling equation
// for p (flagged valid_quadrant); the other two solve it for the reflected
// momentum (p_z, -p_x), an artifact of squaring the sine term.  t11 and
// t21 are the valid ones in quadrants 1 and 3 of the momentum plane, t12
// and t22 in quadrants 2 and 4.
std::array<IonizationSolution, 4> candidate_times(const LaserField& field,
                                                  const TargetAtom& atom, Vec2 p,
                                                  int cycle_n);

// Quadrant-valid grouping: t1 = t11 if p_z p_x >= 0 else t12, and t2 = t21
// if p_z p_x >= 0 else t22.  Both returned solutions satisfy the tunneling
// equation on the full momentum plane.
std::pair<IonizationSolution, IonizationSolution> grouped_times(
    const LaserField& field, const TargetAtom& atom, Vec2 p, int cycle_n);

// Circular polarization (eps = 1): one ionization time per cycle, obtained
// by rotating the momentum onto the major axis.  Re[omega t' + phi] is the
// field-extremum phase theta_p + pi; Im[omega t'] = arccosh of the radius
// combination.  Throws domain_error for eps != 1 or p = 0.
std::vector<IonizationSolution> circular_limit_times(const LaserField& field,
                                                     const TargetAtom& atom, Vec2 p,
                                                     int cycle_n);

// Radial momentum along the ray at the given angle (measured from the major
// axis, counterclockwise towards +x) at which Re S(t1) = Re S(t2), located
// by a 0.01 a.u. radial scan out to search_radius plus bisection to 1e-6.
// Returns +infinity when no crossing exists in the window.
double stokes_critical_momentum(const LaserField& field, const TargetAtom& atom,
                                double angle, double search_radius = 10.0);

enum class StokesPolicy { keep_both, discard_t1, discard_t2 };

// Compares |p| with the critical momentum along its ray; past the Stokes
// transition the subdominant saddle (larger Im S) is flagged for discard.
StokesPolicy is_beyond_stokes(const LaserField& field, const TargetAtom& atom,
                              Vec2 p);

} // namespace orbholo

#endif
