#include "orbholo/cqsfa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "orbholo/errors.hpp"
#include "orbholo/kepler.hpp"
#include "orbholo/sfa_times.hpp"

namespace orbholo {

namespace {

constexpr double pi = 3.14159265358979323846;

double wrap_pi(double x) {
    x = std::fmod(x, 2.0 * pi);
    if (x <= -pi) x += 2.0 * pi;
    if (x > pi) x -= 2.0 * pi;
    return x;
}

// Gaussian elimination with partial pivoting for the 4x4 shooting system.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b,
            std::array<double, 4>& x) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

// Radius beyond which the binding potential vanishes identically, or
// +infinity when it never does.
double zero_potential_radius(const TargetAtom& atom) {
    if (atom.z_eff() == 0.0) return 0.0;
    if (atom.truncation()) return atom.truncation()->l;
    return std::numeric_limits<double>::infinity();
}

} // namespace

cplx drift_action(const LaserField& field, Vec2 p, cplx t) {
    const double w = field.omega();
    const cplx u = w * t + field.phi();
    const double e2 = field.eps() * field.eps();
    const double secular = 0.5 * dot(p, p) + field.up();
    const double quiver = field.up() * (1.0 - e2) / (2.0 * w * (1.0 + e2));
    const double linear = field.a0() / w;
    return secular * t + quiver * std::sin(2.0 * u) +
           linear * (p.z * std::sin(u) - field.eps() * p.x * std::cos(u));
}

Vec2 tunnel_exit(const LaserField& field, Vec2 p0, cplx t_prime) {
    if (!(t_prime.imag() > 0.0))
        throw domain_error("tunnel exit requires Im t' > 0");
    // r(t_r) = Re[ integral_{t'}^{t_r} (p0 + A) ]; the constant-p0 term is
    // purely imaginary over the vertical contour and drops out.
    const Vec2 alpha_r = field.excursion(t_prime.real());
    const CVec2 alpha_c = field.excursion(t_prime);
    return {alpha_r.z - alpha_c.z.real(), alpha_r.x - alpha_c.x.real()};
}

cplx sub_barrier_action(const LaserField& field, const TargetAtom& atom, Vec2 p0,
                        cplx t_prime) {
    if (!(t_prime.imag() > 0.0))
        throw domain_error("sub-barrier leg requires Im t' > 0");
    return atom.ip() * t_prime + drift_action(field, p0, t_prime) -
           drift_action(field, p0, cplx(t_prime.real(), 0.0));
}

RealLeg real_time_leg(const LaserField& field, const TargetAtom& atom, Vec2 r_start,
                      Vec2 p0, double t_start, const CqsfaOptions& opts,
                      bool with_monodromy) {
    RealLeg out;
    out.r_end = r_start;
    out.p_end = p0;
    out.t_end = t_start;

    const double zero_radius = zero_potential_radius(atom);
    if (zero_radius == 0.0) {
        // Potential-free continuum: momentum is already final and the drift
        // counterterm closes the action at the start time.
        out.pf = p0;
        out.s_real = drift_action(field, p0, t_start);
        return out;
    }

    const double period = field.period();
    const double quiver = field.a0() / field.omega();
    const double margin =
        2.2 * quiver * std::sqrt(1.0 + field.eps() * field.eps());
    const double stop_radius = zero_radius + margin;
    const double horizon = t_start + opts.horizon_cycles * period;
    const double hard_limit = t_start + 4.0 * opts.horizon_cycles * period;
    const bool coulomb_tail = !std::isfinite(zero_radius);

    PropagationOptions po = opts.propagation;
    po.with_monodromy = with_monodromy;
    po.record_samples = false;

    double t = t_start;
    double s_raw = 0.0;
    Vec2 r = r_start;
    Vec2 p = p0;
    const double chunk = 0.25 * period;
    bool outside = false;

    const auto step_to = [&](double t_next) {
        const PropagationResult res = propagate(field, atom, r, p, t, t_next, po);
        s_raw += res.s_raw;
        r = res.r;
        p = res.p;
        t = res.t_end;
        out.close_encounter = out.close_encounter || res.close_encounter;
        if (with_monodromy) {
            const Mat2 rr = mat2_add(mat2_mul(res.m_rr, out.m_rr), mat2_mul(res.m_rp, out.m_pr));
            const Mat2 rp = mat2_add(mat2_mul(res.m_rr, out.m_rp), mat2_mul(res.m_rp, out.m_pp));
            const Mat2 pr = mat2_add(mat2_mul(res.m_pr, out.m_rr), mat2_mul(res.m_pp, out.m_pr));
            const Mat2 pp = mat2_add(mat2_mul(res.m_pr, out.m_rp), mat2_mul(res.m_pp, out.m_pp));
            out.m_rr = rr;
            out.m_rp = rp;
            out.m_pr = pr;
            out.m_pp = pp;
        }
    };

    while (t < horizon - 1e-12) {
        step_to(std::min(t + chunk, horizon));
        if (!coulomb_tail && norm(r) >= stop_radius && dot(r, p) >= 0.0) {
            outside = true;
            break;
        }
    }

    if (coulomb_tail) {
        const KeplerAsymptotics kep = kepler_asymptotics(atom, r, p);
        out.pf = kep.p_inf;
        out.tail_phase = kep.tail_phase;
        out.s_real = -s_raw + drift_action(field, out.pf, t) + kep.tail_phase;
    } else {
        if (!outside) {
            // Still inside the truncation window at the horizon: reject
            // trapped population, otherwise push on until the electron
            // clears the window.
            if (0.5 * dot(p, p) + potential_value(atom, r) <= 0.0)
                throw bound_electron_error("electron bound inside the truncation window");
            while (!outside && t < hard_limit - 1e-12) {
                step_to(t + chunk);
                if (norm(r) >= stop_radius && dot(r, p) >= 0.0) outside = true;
            }
            if (!outside)
                throw integration_failure_error(
                    "electron failed to clear the truncation window");
        }
        out.pf = p;
        out.s_real = -s_raw + drift_action(field, p, t);
    }
    out.r_end = r;
    out.p_end = p;
    out.t_end = t;
    return out;
}

namespace {

// det(d pf / d p0) where t', the exit time, and the exit position all move
// with p0 through the tunneling equation:
//   dt' = -[(p0+A(t')).dp0] / [(p0+A(t')).A'(t')],
//   d r_ex = A(t_r) dt_r - Re[A(t') dt'],   dt_r = Re dt',
// and the flow variation absorbs the start-time shift:
//   d pf = M_pr [d r_ex - rdot dt_r] + M_pp [d p0 - pdot dt_r],
// composed with the hyperbolic-map Jacobian for untruncated potentials.
cplx stability_from_monodromy(const LaserField& field, const TargetAtom& atom,
                              cplx t_prime, Vec2 p0, Vec2 r_ex, const RealLeg& leg) {
    const double t_r = t_prime.real();
    const CVec2 a_c = field.vector_potential(t_prime);
    const CVec2 e_c = field.electric_field(t_prime);
    const CVec2 v{p0.z + a_c.z, p0.x + a_c.x};
    // v . A'(t') with A' = -E; equals d2S/dt'^2 at the saddle.
    const cplx denom = -(v.z * e_c.z + v.x * e_c.x);
    if (std::abs(denom) < 1e-12)
        throw numerical_error("degenerate temporal saddle in stability transport");

    const Vec2 a_r = field.vector_potential(t_r);
    const Vec2 rdot = p0 + a_r;
    const Vec2 g = potential_gradient(atom, r_ex);
    const Vec2 pdot{-g.z, -g.x};
    const bool coulomb_tail =
        atom.z_eff() != 0.0 && !atom.truncation();
    Mat2 k_r, k_p;
    if (coulomb_tail) {
        const auto blocks = kepler_jacobian(atom, leg.r_end, leg.p_end);
        k_r = blocks.first;
        k_p = blocks.second;
    }

    Vec2 cols[2];
    const Vec2 units[2] = {{1.0, 0.0}, {0.0, 1.0}};
    for (int k = 0; k < 2; ++k) {
        const Vec2 u = units[k];
        const cplx dtp = -(v.z * u.z + v.x * u.x) / denom;
        const double dtr = dtp.real();
        const Vec2 drex{a_r.z * dtr - std::real(a_c.z * dtp),
                        a_r.x * dtr - std::real(a_c.x * dtp)};
        const Vec2 dr_eff = drex - dtr * rdot;
        const Vec2 dp_eff = u - dtr * pdot;
        Vec2 dpe = mat2_apply(leg.m_pr, dr_eff) + mat2_apply(leg.m_pp, dp_eff);
        if (coulomb_tail) {
            const Vec2 dre =
                mat2_apply(leg.m_rr, dr_eff) + mat2_apply(leg.m_rp, dp_eff);
            dpe = mat2_apply(k_r, dre) + mat2_apply(k_p, dpe);
        }
        cols[k] = dpe;
    }
    return cplx(cols[0].z * cols[1].x - cols[0].x * cols[1].z, 0.0);
}

OrbitSolution assemble_solution(const LaserField& field, const TargetAtom& atom,
                                const std::array<double, 4>& x, Vec2 p_target,
                                const CqsfaOptions& opts) {
    const cplx tp{x[0], x[1]};
    const Vec2 p0{x[2], x[3]};
    const Vec2 r_ex = tunnel_exit(field, p0, tp);
    const RealLeg leg = real_time_leg(field, atom, r_ex, p0, x[0], opts, true);

    OrbitSolution s;
    s.t_prime = tp;
    s.p0 = p0;
    s.exit_position = r_ex;
    s.pf = leg.pf;
    s.action = sub_barrier_action(field, atom, p0, tp) + leg.s_real;
    s.stability_det = stability_from_monodromy(field, atom, tp, p0, r_ex, leg);
    s.sqrt_stability = std::sqrt(s.stability_det);
    s.maslov_phase = std::arg(s.sqrt_stability);
    s.s2 = action_second_derivative(field, p0, tp);
    s.tunneling_residual = std::abs(saddle_residual(field, atom, p0, tp));
    s.momentum_residual = norm(leg.pf - p_target);
    s.close_encounter = leg.close_encounter;
    const auto labels = classify_orbit(s);
    s.orbit_label = labels.first;
    s.legacy_label = labels.second;
    return s;
}

} // namespace

OrbitSolution shoot(const LaserField& field, const TargetAtom& atom,
                    const ShootSeed& seed, Vec2 p_target, const CqsfaOptions& opts) {
    if (opts.sub_barrier_coulomb)
        throw domain_error("sub-barrier Coulomb correction is reserved, not available");
    if (!(seed.t_prime.imag() > 0.0))
        throw domain_error("shooting seed must have Im t' > 0");

    const auto eval = [&](const std::array<double, 4>& q)
        -> std::optional<std::array<double, 4>> {
        if (q[1] <= 0.0) return std::nullopt;
        const cplx tp{q[0], q[1]};
        const Vec2 p0{q[2], q[3]};
        const cplx g = saddle_residual(field, atom, p0, tp);
        RealLeg leg;
        try {
            leg = real_time_leg(field, atom, tunnel_exit(field, p0, tp), p0, q[0],
                                opts, false);
        } catch (const hard_collision_error&) {
            return std::nullopt;
        } catch (const integration_failure_error&) {
            return std::nullopt;
        }
        return std::array<double, 4>{g.real(), g.imag(), leg.pf.z - p_target.z,
                                     leg.pf.x - p_target.x};
    };
    const auto norm4 = [](const std::array<double, 4>& r) {
        return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]);
    };
    const auto converged = [&](const std::array<double, 4>& r) {
        return std::hypot(r[0], r[1]) < opts.newton_tol &&
               std::hypot(r[2], r[3]) < opts.momentum_tol;
    };

    std::array<double, 4> x{seed.t_prime.real(), seed.t_prime.imag(), seed.p0.z,
                            seed.p0.x};
    auto cur = eval(x);
    if (!cur)
        throw non_convergence_error("seed state is not integrable",
                                    std::numeric_limits<double>::infinity());
    double best = norm4(*cur);
    int stalls = 0;

    for (int it = 0; it < opts.max_newton_iterations; ++it) {
        if (converged(*cur)) return assemble_solution(field, atom, x, p_target, opts);

        std::array<std::array<double, 4>, 4> jac{};
        const double h = opts.fd_step;
        for (int k = 0; k < 4; ++k) {
            auto xp = x;
            xp[k] += h;
            auto rp = eval(xp);
            double sign = 1.0;
            if (!rp) {
                xp[k] = x[k] - h;
                rp = eval(xp);
                sign = -1.0;
            }
            if (!rp) continue;
            for (int row = 0; row < 4; ++row)
                jac[row][k] = sign * ((*rp)[row] - (*cur)[row]) / h;
        }

        std::array<double, 4> delta{};
        if (!solve4(jac, *cur, delta))
            throw non_convergence_error("singular shooting Jacobian", best);

        const double ref = norm4(*cur);
        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 16.0; alpha *= 0.5) {
            std::array<double, 4> xt{x[0] - alpha * delta[0], x[1] - alpha * delta[1],
                                     x[2] - alpha * delta[2], x[3] - alpha * delta[3]};
            const auto rt = eval(xt);
            if (!rt) continue;
            const double nt = norm4(*rt);
            if (nt < ref || alpha <= 1.0 / 16.0) {
                stalls = (nt < ref) ? 0 : stalls + 1;
                x = xt;
                cur = rt;
                best = std::min(best, nt);
                accepted = true;
                break;
            }
        }
        if (!accepted || stalls >= 3)
            throw non_convergence_error("shooting iteration stalled", best);
    }
    if (converged(*cur)) return assemble_solution(field, atom, x, p_target, opts);
    throw non_convergence_error("shooting iteration limit reached", best);
}

ShootSeed sfa_seed(const LaserField& field, const TargetAtom& atom, Vec2 p_target,
                   TimeGroup group, int cycle_n) {
    if (field.eps() == 1.0) {
        if (group != TimeGroup::t1)
            throw domain_error("circular polarization has one saddle per cycle");
        const auto times = circular_limit_times(field, atom, p_target, cycle_n);
        return {times.front().t_prime, p_target};
    }
    const auto pair = grouped_times(field, atom, p_target, cycle_n);
    const IonizationSolution& sol =
        (group == TimeGroup::t1) ? pair.first : pair.second;
    return {sol.t_prime, p_target};
}

std::pair<OrbitLabel, int> classify_orbit(const OrbitSolution& sol) {
    const auto untie = [](double v) { return std::abs(v) < 1e-10 ? 1e-10 : v; };
    const double z0 = untie(sol.exit_position.z);
    const double pfz = untie(sol.pf.z);
    const double pfx = untie(sol.pf.x);
    const double p0x = untie(sol.p0.x);
    const bool same_side = z0 * pfz > 0.0;
    const bool kept_px = pfx * p0x > 0.0;
    const int legacy = same_side ? (kept_px ? 1 : 4) : (kept_px ? 2 : 3);
    const OrbitLabel letter = (z0 > 0.0) ? (kept_px ? OrbitLabel::a : OrbitLabel::d)
                                         : (kept_px ? OrbitLabel::b : OrbitLabel::c);
    return {letter, legacy};
}

namespace {

void inherit_branch(const OrbitSolution& prev, OrbitSolution& cur) {
    const double step =
        wrap_pi(std::arg(cur.stability_det) - std::arg(prev.stability_det));
    cur.maslov_phase = prev.maslov_phase + 0.5 * step;
    cur.sqrt_stability = std::sqrt(std::abs(cur.stability_det)) *
                         std::exp(cplx(0.0, cur.maslov_phase));
}

std::optional<OrbitSolution> continue_to(const LaserField& field,
                                         const TargetAtom& atom,
                                         const OrbitSolution& from, Vec2 target,
                                         const CqsfaOptions& opts, int depth) {
    try {
        OrbitSolution s = shoot(field, atom, {from.t_prime, from.p0}, target, opts);
        s.class_label = from.class_label;
        inherit_branch(from, s);
        return s;
    } catch (const numerical_error&) {
        if (depth <= 0) return std::nullopt;
        const Vec2 mid = 0.5 * (from.pf + target);
        const auto half = continue_to(field, atom, from, mid, opts, depth - 1);
        if (!half) return std::nullopt;
        return continue_to(field, atom, *half, target, opts, depth - 1);
    }
}

} // namespace

std::vector<std::optional<OrbitSolution>> continuation_sweep(
    const LaserField& field, const TargetAtom& atom, const OrbitSolution& seed,
    const std::vector<Vec2>& targets, SolutionClass class_label,
    const CqsfaOptions& opts, int max_bisect) {
    std::vector<std::optional<OrbitSolution>> out;
    out.reserve(targets.size());
    OrbitSolution prev = seed;
    prev.class_label = class_label;
    for (const Vec2& target : targets) {
        auto sol = continue_to(field, atom, prev, target, opts, max_bisect);
        if (sol) prev = *sol;
        out.push_back(std::move(sol));
    }
    return out;
}

cplx cqsfa_orbit_term(const LaserField& field, const TargetAtom& atom,
                      const OrbitSolution& sol, DipoleModel model) {
    if (sol.sqrt_stability == cplx(0.0, 0.0))
        throw domain_error("solution lacks a tracked stability branch");
    const cplx ii(0.0, 1.0);
    const cplx dip = dipole_matrix_element(field, atom, sol.p0, sol.t_prime, model);
    const cplx gauss = std::sqrt(2.0 * pi * ii / sol.s2);
    return dip * gauss / sol.sqrt_stability * std::exp(ii * sol.action);
}

cplx cycle_sum_factor(const LaserField& field, const TargetAtom& atom, Vec2 pf,
                      int n_cycles) {
    if (n_cycles < 1) throw domain_error("n_cycles must be >= 1");
    const cplx ii(0.0, 1.0);
    const double delta =
        field.period() * (0.5 * dot(pf, pf) + atom.ip() + field.up());
    const cplx phase = std::exp(ii * delta);
    if (std::abs(phase - 1.0) <= 1e-12)
        return cplx(static_cast<double>(n_cycles), 0.0);
    return (1.0 - std::pow(phase, n_cycles)) / (1.0 - phase);
}

cplx cqsfa_amplitude(const LaserField& field, const TargetAtom& atom,
                     const std::vector<OrbitSolution>& solutions, DipoleModel model,
                     int n_cycles) {
    if (solutions.empty())
        throw domain_error("amplitude needs at least one orbit solution");
    if (n_cycles < 1) throw domain_error("n_cycles must be >= 1");

    cplx sum(0.0, 0.0);
    for (std::size_t j = 0; j < solutions.size(); ++j) {
        const OrbitSolution& s = solutions[j];
        bool duplicate = false;
        for (std::size_t i = 0; i < j && !duplicate; ++i) {
            const OrbitSolution& o = solutions[i];
            duplicate = std::abs(s.t_prime - o.t_prime) < 1e-9 &&
                        norm(s.p0 - o.p0) < 1e-9;
        }
        if (duplicate) continue;
        sum += cqsfa_orbit_term(field, atom, s, model);
    }
    return sum * cycle_sum_factor(field, atom, solutions.front().pf, n_cycles);
}

namespace {

struct ClassDef {
    TimeGroup group;
    int sense; // +1 counterclockwise (towards +x), -1 clockwise
    SolutionClass label;
};

constexpr std::array<ClassDef, 4> class_table{{
    {TimeGroup::t1, +1, SolutionClass::A},
    {TimeGroup::t1, -1, SolutionClass::B},
    {TimeGroup::t2, +1, SolutionClass::C},
    {TimeGroup::t2, -1, SolutionClass::D},
}};

std::optional<OrbitSolution> class_anchor(const LaserField& field,
                                          const TargetAtom& atom, double radius,
                                          const ClassDef& def,
                                          const CqsfaOptions& opts) {
    try {
        const Vec2 p_seed{radius, 0.0};
        OrbitSolution s =
            shoot(field, atom, sfa_seed(field, atom, p_seed, def.group), p_seed, opts);
        s.class_label = def.label;
        return s;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

AxisScan minor_axis_scan(const LaserField& field, const TargetAtom& atom,
                         const std::vector<double>& pfx_samples,
                         const CqsfaOptions& opts) {
    AxisScan out;
    out.p_fx = pfx_samples;
    for (auto& v : out.by_label) v.assign(pfx_samples.size(), std::nullopt);

    const double ring = 1.2;
    const int quarter_steps = 15;
    const double dtheta = 0.5 * pi / quarter_steps;

    for (const ClassDef& def : class_table) {
        const auto anchor = class_anchor(field, atom, ring, def, opts);
        if (!anchor) continue;

        // Ring sweep over three quadrants: the minor axis is reached at a
        // quarter turn on the near side and three quarters on the far side.
        std::vector<Vec2> ring_targets;
        for (int k = 1; k <= 3 * quarter_steps; ++k) {
            const double th = def.sense * k * dtheta;
            ring_targets.push_back({ring * std::cos(th), ring * std::sin(th)});
        }
        const auto ring_sols =
            continuation_sweep(field, atom, *anchor, ring_targets, def.label, opts);

        const struct {
            int index;
            int side;
        } arrivals[2] = {{quarter_steps - 1, def.sense},
                         {3 * quarter_steps - 1, -def.sense}};

        for (const auto& arrival : arrivals) {
            const auto& side_anchor = ring_sols[arrival.index];
            if (!side_anchor) continue;

            // Split the requested radii on this side into an inward and an
            // outward chain from the ring radius.
            std::vector<std::pair<double, std::size_t>> inward, outward;
            for (std::size_t i = 0; i < pfx_samples.size(); ++i) {
                const double v = pfx_samples[i];
                if (v == 0.0) continue; // masked
                if ((v > 0.0 ? +1 : -1) != arrival.side) continue;
                const double radius = std::abs(v);
                if (radius < ring)
                    inward.push_back({radius, i});
                else
                    outward.push_back({radius, i});
            }
            std::sort(inward.begin(), inward.end(),
                      [](auto a, auto b) { return a.first > b.first; });
            std::sort(outward.begin(), outward.end());

            for (const auto& chain : {inward, outward}) {
                if (chain.empty()) continue;
                std::vector<Vec2> targets;
                targets.reserve(chain.size());
                for (const auto& [radius, idx] : chain)
                    targets.push_back({0.0, arrival.side * radius});
                const auto sols = continuation_sweep(field, atom, *side_anchor,
                                                     targets, def.label, opts);
                for (std::size_t k = 0; k < chain.size(); ++k) {
                    if (!sols[k]) continue;
                    auto& slot =
                        out.by_label[static_cast<int>(sols[k]->orbit_label)]
                                    [chain[k].second];
                    if (!slot || sols[k]->momentum_residual < slot->momentum_residual)
                        slot = sols[k];
                }
            }
        }
    }
    return out;
}

GridSolutions solve_grid(const LaserField& field, const TargetAtom& atom,
                         double pz_min, double pz_max, int n_z, double px_min,
                         double px_max, int n_x, const CqsfaOptions& opts) {
    if (n_z < 2 || n_x < 2 || !(pz_max > pz_min) || !(px_max > px_min))
        throw domain_error("grid needs at least 2x2 cells with ordered bounds");

    GridSolutions out;
    out.n_z = n_z;
    out.n_x = n_x;
    const int n_cells = n_z * n_x;
    for (auto& v : out.by_class) v.assign(n_cells, std::nullopt);

    const double dz = (pz_max - pz_min) / (n_z - 1);
    const double dx = (px_max - px_min) / (n_x - 1);
    const double ring_width = std::hypot(dz, dx);

    struct Cell {
        int index;
        Vec2 p;
        double theta;
    };
    std::map<int, std::vector<Cell>> rings;
    for (int j = 0; j < n_x; ++j) {
        for (int i = 0; i < n_z; ++i) {
            const Vec2 p{pz_min + i * dz, px_min + j * dx};
            const double radius = norm(p);
            double theta = std::atan2(p.x, p.z);
            if (theta < 0.0) theta += 2.0 * pi;
            const int ring = static_cast<int>(std::floor(radius / ring_width));
            rings[ring].push_back({j * n_z + i, p, theta});
        }
    }
    for (auto& [ring, cells] : rings)
        std::sort(cells.begin(), cells.end(),
                  [](const Cell& a, const Cell& b) { return a.theta < b.theta; });

    const double seed_radius = 1.2;
    const int seed_ring = static_cast<int>(std::floor(seed_radius / ring_width));

    for (std::size_t ci = 0; ci < class_table.size(); ++ci) {
        const ClassDef& def = class_table[ci];
        const auto anchor = class_anchor(field, atom, seed_radius, def, opts);
        if (!anchor) {
            out.masked_fraction[ci] = 1.0;
            continue;
        }
        auto& store = out.by_class[ci];

        // Ring processing order: from the seed ring outward, then inward.
        std::vector<int> order;
        for (auto it = rings.lower_bound(seed_ring); it != rings.end(); ++it)
            order.push_back(it->first);
        for (auto it = std::make_reverse_iterator(rings.lower_bound(seed_ring));
             it != rings.rend(); ++it)
            order.push_back(it->first);

        // Last solved solution of the previously processed ring nearest in
        // angle to each new ring's start; falls back to the class anchor.
        std::map<int, std::vector<const OrbitSolution*>> solved_by_ring;

        for (const int ring : order) {
            const auto& cells = rings[ring];
            // Start cell: nearest to the major axis.
            std::size_t start = 0;
            for (std::size_t k = 1; k < cells.size(); ++k) {
                const double a = std::min(cells[k].theta, 2.0 * pi - cells[k].theta);
                const double b =
                    std::min(cells[start].theta, 2.0 * pi - cells[start].theta);
                if (a < b) start = k;
            }

            const OrbitSolution* ring_seed = &*anchor;
            // Prefer an already solved neighbor ring cell near the start angle.
            for (const int adj : {ring - 1, ring + 1}) {
                const auto it = solved_by_ring.find(adj);
                if (it == solved_by_ring.end() || it->second.empty()) continue;
                const double th0 = cells[start].theta;
                const OrbitSolution* nearest = nullptr;
                double best = 1e9;
                for (const OrbitSolution* s : it->second) {
                    double th = std::atan2(s->pf.x, s->pf.z);
                    if (th < 0.0) th += 2.0 * pi;
                    const double d = std::abs(wrap_pi(th - th0));
                    if (d < best) {
                        best = d;
                        nearest = s;
                    }
                }
                if (nearest) {
                    ring_seed = nearest;
                    break;
                }
            }

            const OrbitSolution* prev = ring_seed;
            std::vector<const OrbitSolution*> solved_here;
            const int count = static_cast<int>(cells.size());
            for (int step = 0; step < count; ++step) {
                const int offset = def.sense > 0 ? step : -step;
                const int k =
                    ((static_cast<int>(start) + offset) % count + count) % count;
                auto sol = continue_to(field, atom, *prev, cells[k].p, opts, 6);
                if (sol) {
                    sol->class_label = def.label;
                    store[cells[k].index] = std::move(sol);
                    prev = &*store[cells[k].index];
                    solved_here.push_back(prev);
                }
            }
            solved_by_ring[ring] = std::move(solved_here);
        }

        int gaps = 0;
        for (const auto& s : store)
            if (!s) ++gaps;
        out.masked_fraction[ci] = static_cast<double>(gaps) / n_cells;
    }

    for (const double f : out.masked_fraction)
        if (f > 0.05) out.coverage_warning = true;
    if (out.coverage_warning)
        std::fprintf(stderr,
                     "warning: continuation left more than 5%% of grid cells "
                     "unsolved (fractions %.3f %.3f %.3f %.3f)\n",
                     out.masked_fraction[0], out.masked_fraction[1],
                     out.masked_fraction[2], out.masked_fraction[3]);
    return out;
}

} // namespace orbholo
