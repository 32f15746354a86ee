#ifndef ORBHOLO_CQSFA_HPP
#define ORBHOLO_CQSFA_HPP

#include <array>
#include <optional>
#include <vector>

#include "orbholo/field.hpp"
#include "orbholo/potential.hpp"
#include "orbholo/sfa_amplitude.hpp"
#include "orbholo/trajectory.hpp"

namespace orbholo {

// Continuation families: counterclockwise or clockwise angular sweeps
// started from the two analytic saddles of the potential-free model.  With
// a core present the two senses wind differently around it and land on
// distinct solutions at the same final momentum.
enum class SolutionClass { A, B, C, D };

struct CqsfaOptions {
    // In-field integration horizon before the asymptotic closure.
    double horizon_cycles = 20.0;
    // Tunneling-equation residual bound |(p0+A(t'))^2 + 2 ip|.
    double newton_tol = 1e-8;
    // Final-momentum match bound |pf - target|.
    double momentum_tol = 1e-6;
    int max_newton_iterations = 50;
    // Forward-difference step for the shooting Jacobian.
    double fd_step = 1e-6;
    PropagationOptions propagation{};
    // Reserved switch: a Coulomb correction on the sub-barrier leg is not
    // part of this model; requesting it is a configuration error.
    bool sub_barrier_coulomb = false;
};

struct ShootSeed {
    cplx t_prime;
    Vec2 p0{0.0, 0.0};
};

struct OrbitSolution {
    cplx t_prime;
    // Canonical momentum on both legs up to the exit (real by construction).
    Vec2 p0{0.0, 0.0};
    Vec2 exit_position{0.0, 0.0};
    // Converged asymptotic (detector) momentum.
    Vec2 pf{0.0, 0.0};
    // Sub-barrier leg + real-time leg + Coulomb tail.
    cplx action;
    // det(d pf / d p0) with the saddle-constrained boundary terms; real
    // valued but kept complex so the square-root branch can be tracked.
    cplx stability_det{1.0, 0.0};
    // Branch-tracked square root of stability_det used by the amplitude.
    cplx sqrt_stability{1.0, 0.0};
    // arg(sqrt_stability), unwrapped along the continuation path.
    double maslov_phase = 0.0;
    // d2S/dt'^2 at (p0, t'), the temporal Gaussian curvature.
    cplx s2;
    double tunneling_residual = 0.0;
    double momentum_residual = 0.0;
    bool close_encounter = false;
    SolutionClass class_label = SolutionClass::A;
    OrbitLabel orbit_label = OrbitLabel::a;
    int legacy_label = 1;
};

// Drift counterterm continued to complex time (same expression as the real
// overload in trajectory.hpp); dF/dt = (p + A(t))^2 / 2.
cplx drift_action(const LaserField& field, Vec2 p, cplx t);

// Real part of the displacement accumulated from t' down to Re t' at
// constant momentum p0; the imaginary displacement is discarded (the
// continuum trajectory is taken real).
Vec2 tunnel_exit(const LaserField& field, Vec2 p0, cplx t_prime);

// ip t' - the constant-momentum kinetic integral from t' to Re t'; the
// binding potential is omitted on this leg.
cplx sub_barrier_action(const LaserField& field, const TargetAtom& atom, Vec2 p0,
                        cplx t_prime);

struct RealLeg {
    // -[integral of (pdot.r + H)] + drift counterterm at the stop time,
    // plus the regularized Coulomb tail when the potential is untruncated.
    double s_real = 0.0;
    double tail_phase = 0.0;
    Vec2 pf{0.0, 0.0};
    Vec2 r_end{0.0, 0.0};
    Vec2 p_end{0.0, 0.0};
    double t_end = 0.0;
    Mat2 m_rr{1.0, 0.0, 0.0, 1.0};
    Mat2 m_rp{0.0, 0.0, 0.0, 0.0};
    Mat2 m_pr{0.0, 0.0, 0.0, 0.0};
    Mat2 m_pp{1.0, 0.0, 0.0, 1.0};
    bool close_encounter = false;
};

// Continuum leg from the tunnel exit.  Integration stops early once the
// potential can no longer act (outside the truncation window plus the
// maximal quiver excursion, moving outward); the drift counterterm makes
// the action independent of the stop time from there on.  Untruncated
// potentials integrate to the horizon and close with the hyperbolic
// asymptotics.  Throws bound_electron_error for states that never leave.
RealLeg real_time_leg(const LaserField& field, const TargetAtom& atom, Vec2 r_start,
                      Vec2 p0, double t_start, const CqsfaOptions& opts,
                      bool with_monodromy);

// Newton iteration on (Re t', Im t', p0z, p0x) driving the tunneling
// equation and the final-momentum mismatch to zero.  Throws
// non_convergence_error (carrying the best residual) after
// max_newton_iterations, and propagates bound_electron_error.
OrbitSolution shoot(const LaserField& field, const TargetAtom& atom,
                    const ShootSeed& seed, Vec2 p_target,
                    const CqsfaOptions& opts = {});

// Seed from the analytic engine: ionization time of the requested saddle
// group at the target momentum, initial momentum equal to the target.
ShootSeed sfa_seed(const LaserField& field, const TargetAtom& atom, Vec2 p_target,
                   TimeGroup group, int cycle_n = 0);

// (orbit letter, legacy 1-4 index) from the signs of the exit position,
// z0 * p_fz, and p_fx * p_0x.  Letters follow the exit side and whether
// the transverse momentum kept its sign: (z0>0, kept) -> a, (z0<0, kept)
// -> b, (z0<0, flipped) -> c, (z0>0, flipped) -> d.  Signs within 1e-10
// of zero resolve as +0, which keeps labels continuous across the axes.
std::pair<OrbitLabel, int> classify_orbit(const OrbitSolution& sol);

// Marches along the target path, seeding each solve from the previous
// solution, bisecting failed steps up to max_bisect times, and recording
// unrecoverable points as nullopt.  The square-root branch of the
// stability determinant is continued from the seed solution.
std::vector<std::optional<OrbitSolution>> continuation_sweep(
    const LaserField& field, const TargetAtom& atom, const OrbitSolution& seed,
    const std::vector<Vec2>& targets, SolutionClass class_label,
    const CqsfaOptions& opts = {}, int max_bisect = 6);

// Coherent sum over distinct solutions at one final momentum:
//   sum_s C(t'_s) sqrt(2 pi i / S''_s) / sqrt_stability_s exp(i S_s)
// times the exact per-cycle geometric factor for n_cycles.  Coincident
// solutions (same t' and p0 to 1e-9) are counted once.
cplx cqsfa_amplitude(const LaserField& field, const TargetAtom& atom,
                     const std::vector<OrbitSolution>& solutions,
                     DipoleModel model = DipoleModel::unit, int n_cycles = 1);

// One solution's saddle-point term C(t') sqrt(2 pi i / S'') / sqrt_stability
// times exp(i S), without the cycle factor.
cplx cqsfa_orbit_term(const LaserField& field, const TargetAtom& atom,
                      const OrbitSolution& sol, DipoleModel model = DipoleModel::unit);

// Geometric factor summing n_cycles exact per-cycle phase shifts
// delta = T (p^2/2 + ip + up).
cplx cycle_sum_factor(const LaserField& field, const TargetAtom& atom, Vec2 pf,
                      int n_cycles);

// Minor-axis scan: for each requested signed p_fx (with p_fz = 0), the
// solutions of all four orbit letters, obtained by continuing each class
// around the |p| = 1.2 ring from the major axis and then radially along
// the minor axis.  Unreached samples stay empty; p_fx = 0 is masked.
struct AxisScan {
    std::vector<double> p_fx;
    std::array<std::vector<std::optional<OrbitSolution>>, 4> by_label;
};
AxisScan minor_axis_scan(const LaserField& field, const TargetAtom& atom,
                         const std::vector<double>& pfx_samples,
                         const CqsfaOptions& opts = {});

// Full-grid solve: all four classes continued ring by ring over the cell
// lattice (pz fastest, endpoint-inclusive spacing).  masked_fraction is
// per class; coverage_warning trips when any class exceeds 5% gaps.
struct GridSolutions {
    int n_z = 0;
    int n_x = 0;
    std::array<std::vector<std::optional<OrbitSolution>>, 4> by_class;
    std::array<double, 4> masked_fraction{0.0, 0.0, 0.0, 0.0};
    bool coverage_warning = false;
};
GridSolutions solve_grid(const LaserField& field, const TargetAtom& atom,
                         double pz_min, double pz_max, int n_z, double px_min,
                         double px_max, int n_x, const CqsfaOptions& opts = {});

} // namespace orbholo

#endif
