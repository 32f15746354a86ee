#ifndef ORBHOLO_SFA_AMPLITUDE_HPP
#define ORBHOLO_SFA_AMPLITUDE_HPP

#include <string>
#include <vector>

#include "orbholo/field.hpp"
#include "orbholo/potential.hpp"
#include "orbholo/sfa_times.hpp"

namespace orbholo {

enum class DipoleModel { unit, hydrogenic_1s };

enum class StokesHandling { automatic, keep_all, apply };

// Orbit letters: a and b are the direct pair (no recollision); c and d are
// forward-deflected orbits that only exist once the binding potential acts
// on the continuum motion.  The analytic engine emits a and b.
enum class OrbitLabel { a, b, c, d };

const char* orbit_name(OrbitLabel label);
OrbitLabel orbit_from_name(const std::string& name);

struct SfaOrbitContribution {
    cplx t_prime;
    cplx action;
    cplx prefactor; // dipole times Gaussian fluctuation factor
    cplx amplitude; // prefactor * exp(i action)
    OrbitLabel label = OrbitLabel::a;
    bool stokes_discarded = false;
};

// Semiclassical action accumulated from t' to the end of the pulse, up to
// the p-independent constant dropped by all interference observables:
//   S = (p^2/2 + ip + up) t'
//     + up (1-eps^2)/(2 w (1+eps^2)) sin 2(w t' + phi)
//     + a0/w [ p_z sin(w t' + phi) - eps p_x cos(w t' + phi) ].
// dS/dt' = [ (p + A(t'))^2 + 2 ip ] / 2, so saddles are ionization times.
cplx direct_action(const LaserField& field, const TargetAtom& atom, Vec2 p,
                   cplx t_prime);

// d2S/dt'^2 = -(p + A(t')) . E(t').
cplx action_second_derivative(const LaserField& field, Vec2 p, cplx t_prime);

// d3S/dt'^3 = E(t').E(t') - w^2 (p + A(t')) . A(t').
cplx action_third_derivative(const LaserField& field, Vec2 p, cplx t_prime);

// Saddles closer than this in |S''| are treated as coalescing; the plain
// Gaussian fluctuation factor is unreliable there.
inline bool saddle_conditioning_warning(cplx s2) { return std::abs(s2) < 1e-3; }

// Bound-continuum coupling at complex velocity v = p + A(t').
//   unit          -> 1 (default; interference structure only)
//   hydrogenic_1s -> c_d E(t').v / (v^2 + 2 ip)^3 with kappa = sqrt(2 ip).
// At a saddle v^2 + 2 ip vanishes; within 1e-6 of it this returns the
// regularized effective dipole i S''' / (16 S''^2) * c_d, the finite
// combination left after fusing the pole with the Gaussian fluctuation
// integral (the only form orbit_amplitude consumes there).
cplx dipole_matrix_element(const LaserField& field, const TargetAtom& atom, Vec2 p,
                           cplx t_prime, DipoleModel model);

// Single-orbit saddle-point contribution
//   amplitude = dipole * sqrt(2 pi i / S'') * exp(i S).
// Square roots are principal branch; label is a for group t1, b for t2.
SfaOrbitContribution orbit_amplitude(const LaserField& field, const TargetAtom& atom,
                                     Vec2 p, const IonizationSolution& sol,
                                     DipoleModel model = DipoleModel::unit);

// Coherent sum over the requested orbit letters and n_cycles field cycles.
// Cycle shifts enter through the exact per-cycle phase
//   delta = T (p^2/2 + ip + up),
// so the sum is the cycle-0 contribution times a geometric factor.  Stokes
// handling 'automatic' keeps both saddles for eps <= 0.35 and applies
// is_beyond_stokes above that; 'keep_all' and 'apply' force either choice.
// Throws domain_error when orbits is empty or contains c or d.
cplx sfa_transition_amplitude(const LaserField& field, const TargetAtom& atom, Vec2 p,
                              const std::vector<OrbitLabel>& orbits, int n_cycles,
                              DipoleModel model = DipoleModel::unit,
                              StokesHandling stokes = StokesHandling::automatic);

// The per-orbit terms behind sfa_transition_amplitude, cycle-summed, for
// writers that store complex partial amplitudes per cell.
std::vector<SfaOrbitContribution> sfa_orbit_contributions(
    const LaserField& field, const TargetAtom& atom, Vec2 p,
    const std::vector<OrbitLabel>& orbits, int n_cycles,
    DipoleModel model = DipoleModel::unit,
    StokesHandling stokes = StokesHandling::automatic);

} // namespace orbholo

#endif
