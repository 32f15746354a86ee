#ifndef ORBHOLO_TRAJECTORY_HPP
#define ORBHOLO_TRAJECTORY_HPP

#include <vector>

#include "orbholo/field.hpp"
#include "orbholo/potential.hpp"

namespace orbholo {

struct TrajectorySample {
    double t;
    Vec2 r;
    Vec2 p;
};

struct PropagationOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    // Below this step size a failing controlled step aborts the run.
    double min_step = 1e-6;
    // Flag any approach closer than this radius.
    double encounter_radius = 0.1;
    // Abort (hard_collision_error) below this radius.
    double collision_radius = 1e-4;
    bool with_monodromy = false;
    bool record_samples = false;
};

struct PropagationResult {
    Vec2 r{0.0, 0.0};
    Vec2 p{0.0, 0.0};
    // Integral of [pdot . r + H] dtau accumulated along the run; the
    // continuum action is recovered as -s_raw plus the drift counterterm.
    double s_raw = 0.0;
    double t_end = 0.0;
    // d(r,p)_end / d(r,p)_start blocks; identity unless with_monodromy.
    Mat2 m_rr{1.0, 0.0, 0.0, 1.0};
    Mat2 m_rp{0.0, 0.0, 0.0, 0.0};
    Mat2 m_pr{0.0, 0.0, 0.0, 0.0};
    Mat2 m_pp{1.0, 0.0, 0.0, 1.0};
    bool close_encounter = false;
    std::vector<TrajectorySample> samples;
};

// Drift counterterm: the running action of a free electron of canonical
// momentum p in the field,
//   F_p(t) = (p^2/2 + up) t
//          + up (1-eps^2)/(2 w (1+eps^2)) sin 2(w t + phi)
//          + a0/w [ p_z sin(w t + phi) - eps p_x cos(w t + phi) ],
// so dF_p/dt = (p + A(t))^2 / 2.  Subtracting it at the stop time makes the
// continuum action independent of where the run is truncated once the
// binding potential no longer acts.
double drift_action(const LaserField& field, Vec2 p, double t);

// Integrate the continuum equations of motion
//   rdot = p + A(t),  pdot = -grad V(r)
// from (r0, p0) at t0 to t1 > t0 with an adaptive embedded Runge-Kutta
// pair, co-integrating the action integrand and, on request, the 4x4
// monodromy matrix (its variational flow uses the analytic potential
// Hessian).  Throws integration_failure_error when step control collapses
// and hard_collision_error inside the collision radius.
PropagationResult propagate(const LaserField& field, const TargetAtom& atom,
                            Vec2 r0, Vec2 p0, double t0, double t1,
                            const PropagationOptions& opts = {});

} // namespace orbholo

#endif
