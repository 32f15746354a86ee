#include "orbholo/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include <boost/numeric/odeint.hpp>

#include "orbholo/errors.hpp"

namespace orbholo {

namespace {

// State layout: [z, x, pz, px, s_raw] plus, in the long variant, the 4x4
// monodromy in row-major order with rows/columns ordered (z, x, pz, px).
template <std::size_t N>
struct continuum_system {
    const LaserField& field;
    const TargetAtom& atom;

    void operator()(const std::array<double, N>& y, std::array<double, N>& dydt,
                    double t) const {
        const Vec2 r{y[0], y[1]};
        const Vec2 p{y[2], y[3]};
        const Vec2 v = p + field.vector_potential(t);
        const Vec2 g = potential_gradient(atom, r);
        dydt[0] = v.z;
        dydt[1] = v.x;
        dydt[2] = -g.z;
        dydt[3] = -g.x;
        // pdot . r + H with H = (p + A)^2/2 + V.
        dydt[4] = -dot(g, r) + 0.5 * dot(v, v) + potential_value(atom, r);
        if constexpr (N == 21) {
            // Variational flow d/dt [dr; dp] = [[0, I], [-Hess V, 0]] [dr; dp];
            // A(t) carries no phase-space dependence.
            const Mat2 hv = potential_hessian(atom, r);
            for (int c = 0; c < 4; ++c) {
                const double mz = y[5 + 0 * 4 + c];
                const double mx = y[5 + 1 * 4 + c];
                const double mpz = y[5 + 2 * 4 + c];
                const double mpx = y[5 + 3 * 4 + c];
                dydt[5 + 0 * 4 + c] = mpz;
                dydt[5 + 1 * 4 + c] = mpx;
                dydt[5 + 2 * 4 + c] = -(hv.zz * mz + hv.zx * mx);
                dydt[5 + 3 * 4 + c] = -(hv.xz * mz + hv.xx * mx);
            }
        }
    }
};

template <std::size_t N>
PropagationResult run(const LaserField& field, const TargetAtom& atom, Vec2 r0,
                      Vec2 p0, double t0, double t1,
                      const PropagationOptions& opts) {
    namespace ode = boost::numeric::odeint;
    using state_t = std::array<double, N>;

    state_t y{};
    y[0] = r0.z;
    y[1] = r0.x;
    y[2] = p0.z;
    y[3] = p0.x;
    y[4] = 0.0;
    if constexpr (N == 21) {
        y[5] = y[10] = y[15] = y[20] = 1.0;
    }

    continuum_system<N> sys{field, atom};
    auto stepper =
        ode::make_controlled(opts.atol, opts.rtol, ode::runge_kutta_fehlberg78<state_t>());
    // Uncontrolled twin for floored steps through close encounters.
    ode::runge_kutta_fehlberg78<state_t> floor_stepper;

    PropagationResult out;
    out.r = r0;
    out.p = p0;
    out.t_end = t0;
    if (opts.record_samples) out.samples.push_back({t0, r0, p0});

    double t = t0;
    double dt = std::min(0.05 * field.period(), t1 - t0);
    // Without the cap the error estimate can alias across whole periods of
    // the drive on feedback-free stretches (far-field drift) and accept
    // steps spanning several oscillations of A(t).
    const double dt_cap = 0.1 * field.period();
    const double t_eps = 1e-12 * std::max(1.0, std::abs(t1));
    long steps = 0;
    constexpr long max_steps = 20'000'000;

    while (t < t1 - t_eps) {
        if (dt > dt_cap) dt = dt_cap;
        const double remaining = t1 - t;
        const bool clamped = dt >= remaining;
        const double attempted = clamped ? remaining : dt;
        dt = attempted;
        const auto res = stepper.try_step(sys, y, t, dt);
        if (res == ode::controlled_step_result::fail) {
            // A final sliver shorter than min_step may legitimately fail once;
            // the shrunken retry is judged by the normal floor.
            if (clamped || attempted >= opts.min_step) continue;
            const double rn = std::hypot(y[0], y[1]);
            if (rn >= opts.encounter_radius) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "step control underflow at t=%.6g (dt=%.3g, |r|=%.3g)",
                              t, attempted, rn);
                throw integration_failure_error(buf);
            }
            // Close encounter: the floor wins over error control.  Abort if
            // the chord of the floored step would cross the collision core,
            // otherwise take one uncontrolled step at the floor and let the
            // controller pick the size back up afterwards.
            const Vec2 a = field.vector_potential(t);
            const double vz = y[2] + a.z;
            const double vx = y[3] + a.x;
            const double v2 = vz * vz + vx * vx;
            double approach = rn;
            if (v2 > 0.0) {
                const double s_min = -(y[0] * vz + y[1] * vx) / v2;
                if (s_min > 0.0 && s_min < opts.min_step)
                    approach = std::abs(y[0] * vx - y[1] * vz) / std::sqrt(v2);
            }
            if (approach < opts.collision_radius) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "collision core crossed at t=%.6g (|r|=%.3g)", t, rn);
                throw hard_collision_error(buf);
            }
            floor_stepper.do_step(sys, y, t, opts.min_step);
            t += opts.min_step;
            dt = opts.min_step;
            out.close_encounter = true;
        }
        if (++steps > max_steps)
            throw integration_failure_error("step budget exhausted");
        const double rn = std::hypot(y[0], y[1]);
        if (!std::isfinite(rn) || !std::isfinite(y[2]) || !std::isfinite(y[3])) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "state diverged (non-finite) at t=%.6g", t);
            throw integration_failure_error(buf);
        }
        if (rn < opts.collision_radius) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "|r|=%.3g below collision radius at t=%.6g",
                          rn, t);
            throw hard_collision_error(buf);
        }
        if (rn < opts.encounter_radius) out.close_encounter = true;
        if (opts.record_samples)
            out.samples.push_back({t, Vec2{y[0], y[1]}, Vec2{y[2], y[3]}});
    }

    out.r = {y[0], y[1]};
    out.p = {y[2], y[3]};
    out.s_raw = y[4];
    out.t_end = t;
    if constexpr (N == 21) {
        out.m_rr = {y[5], y[6], y[9], y[10]};
        out.m_rp = {y[7], y[8], y[11], y[12]};
        out.m_pr = {y[13], y[14], y[17], y[18]};
        out.m_pp = {y[15], y[16], y[19], y[20]};
    }
    return out;
}

} // namespace

double drift_action(const LaserField& field, Vec2 p, double t) {
    const double w = field.omega();
    const double u = w * t + field.phi();
    const double e2 = field.eps() * field.eps();
    const double secular = 0.5 * dot(p, p) + field.up();
    const double quiver = field.up() * (1.0 - e2) / (2.0 * w * (1.0 + e2));
    const double linear = field.a0() / w;
    return secular * t + quiver * std::sin(2.0 * u) +
           linear * (p.z * std::sin(u) - field.eps() * p.x * std::cos(u));
}

PropagationResult propagate(const LaserField& field, const TargetAtom& atom,
                            Vec2 r0, Vec2 p0, double t0, double t1,
                            const PropagationOptions& opts) {
    if (!(t1 >= t0))
        throw domain_error("propagation interval must run forward");
    if (opts.min_step <= 0.0 || opts.rtol <= 0.0 || opts.atol <= 0.0)
        throw domain_error("tolerances and step floor must be positive");
    if (t1 == t0) {
        PropagationResult out;
        out.r = r0;
        out.p = p0;
        out.t_end = t0;
        if (opts.record_samples) out.samples.push_back({t0, r0, p0});
        return out;
    }
    return opts.with_monodromy
               ? run<21>(field, atom, r0, p0, t0, t1, opts)
               : run<5>(field, atom, r0, p0, t0, t1, opts);
}

} // namespace orbholo
