#include "orbholo/sfa_times.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbholo/errors.hpp"
#include "orbholo/quartic.hpp"
#include "orbholo/sfa_amplitude.hpp"
#include "orbholo/units.hpp"

namespace orbholo {

namespace {

constexpr double two_pi = 2.0 * units::pi;

cplx residual_derivative(const LaserField& field, Vec2 p, cplx t) {
    const CVec2 v = p + field.vector_potential(t);
    return -2.0 * cdot(v, field.electric_field(t));
}

// Newton refinement of a near-solution.  Returns true when the residual
// dropped below tol without leaving the upper half plane or the cycle
// window the candidate was constructed in.
bool polish_time(const LaserField& field, const TargetAtom& atom, Vec2 p,
                 int cycle_n, cplx& t, double tol) {
    cplx cur = t;
    for (int it = 0; it < 30; ++it) {
        const cplx r = saddle_residual(field, atom, p, cur);
        if (std::abs(r) < 0.01 * tol) break;
        const cplx dr = residual_derivative(field, p, cur);
        if (std::abs(dr) == 0.0) return false;
        cur -= r / dr;
    }
    if (std::imag(cur) <= 0.0) return false;
    const double u_re = std::real(cur) * field.omega() + field.phi();
    if (u_re < two_pi * cycle_n - 1e-9 || u_re > two_pi * (cycle_n + 1) + 1e-9)
        return false;
    if (std::abs(saddle_residual(field, atom, p, cur)) >= tol) return false;
    t = cur;
    return true;
}

// Family images of an arccos value, both in the upper half plane.  The t1
// family has Re[omega t' + phi] in (pi, 2 pi); t2 in (0, pi).
cplx t1_image(cplx w) {
    if (std::imag(w) > 0.0) w = std::conj(w);
    return two_pi - w;
}

cplx t2_image(cplx w) {
    if (std::imag(w) < 0.0) w = std::conj(w);
    return w;
}

} // namespace

cplx saddle_residual(const LaserField& field, const TargetAtom& atom, Vec2 p,
                     cplx t_prime) {
    const CVec2 v = p + field.vector_potential(t_prime);
    return cdot(v, v) + 2.0 * atom.ip();
}

QuarticResolvent quartic_coefficients(const LaserField& field, const TargetAtom& atom,
                                      Vec2 p) {
    const double eps = field.eps();
    if (eps == 1.0)
        throw domain_error(
            "cosine quartic is degenerate at eps = 1; use circular_limit_times");
    const double a0 = field.a0();
    const double denom = 1.0 - eps * eps;
    const double pzb = p.z / (a0 * denom);
    const double pxb = p.x / (a0 * denom);
    const double p2 = p.z * p.z + p.x * p.x;
    const double ubar = ((p2 + 2.0 * atom.ip()) / (a0 * a0) + eps * eps) / denom;

    const double qb = 4.0 * pzb;
    const double qc = 2.0 * ubar + 4.0 * pzb * pzb + 4.0 * eps * eps * pxb * pxb;
    const double qd = 4.0 * pzb * ubar;
    const double qe = ubar * ubar - 4.0 * eps * eps * pxb * pxb;

    QuarticResolvent out;
    out.a3 = qb;
    out.a2 = qc;
    out.a1 = qd;
    out.a0 = qe;
    out.q = qd - 0.5 * qb * qc + 0.125 * qb * qb * qb;
    out.delta0 = qc * qc - 3.0 * qb * qd + 12.0 * qe;
    out.delta1 = 2.0 * qc * qc * qc - 9.0 * qb * qc * qd + 27.0 * qb * qb * qe +
                 27.0 * qd * qd - 72.0 * qc * qe;
    out.conditioning_warning = eps > 0.995;
    try {
        const QuarticClosedForm cf = quartic_solve_closed(qb, qc, qd, qe);
        out.zeta = cf.zeta;
        out.eta = cf.eta;
    } catch (const resolvent_degeneracy_error&) {
        out.zeta = 0.0;
        out.eta = 0.0;
    }
    return out;
}

std::pair<cplx, cplx> resolvent_zeta_eta(const QuarticResolvent& coeffs) {
    const QuarticClosedForm cf =
        quartic_solve_closed(std::real(coeffs.a3), std::real(coeffs.a2),
                             std::real(coeffs.a1), std::real(coeffs.a0));
    return {cf.zeta, cf.eta};
}

std::array<IonizationSolution, 4> candidate_times(const LaserField& field,
                                                  const TargetAtom& atom, Vec2 p,
                                                  int cycle_n) {
    const QuarticResolvent co = quartic_coefficients(field, atom, p);
    const double qb = std::real(co.a3);
    const double qc = std::real(co.a2);
    const double qd = std::real(co.a1);
    const double qe = std::real(co.a0);

    std::array<cplx, 4> roots;
    try {
        roots = quartic_solve_closed(qb, qc, qd, qe).roots;
    } catch (const resolvent_degeneracy_error&) {
        roots = quartic_roots_iterative(qb, qc, qd, qe);
        std::sort(roots.begin(), roots.end(), [](cplx l, cplx r) {
            if (std::real(l) != std::real(r)) return std::real(l) < std::real(r);
            return std::imag(l) < std::imag(r);
        });
    }

    const double tol = residual_tolerance(atom);
    std::array<IonizationSolution, 4> out;

    // Slot layout: [t11, t12, t21, t22].  Within a resolvent pair, the root
    // whose arccos has negative imaginary part belongs to the t1 family (a
    // conjugate root pair always splits one per family).  The +zeta pair
    // feeds t11 and t22 and the -zeta pair t12 and t21: that assignment
    // reproduces the quadrant pattern of the grouped solution, with t11 and
    // t21 solving the tunneling equation in quadrants 1 and 3 and t12, t22
    // in quadrants 2 and 4.
    for (int pair = 0; pair < 2; ++pair) {
        const std::array<cplx, 2> w = {std::acos(roots[2 * pair]),
                                       std::acos(roots[2 * pair + 1])};
        std::array<bool, 2> is_t1 = {std::imag(w[0]) < 0.0, std::imag(w[1]) < 0.0};
        // Degenerate split: force one candidate per family, first root first.
        if (is_t1[0] == is_t1[1]) is_t1 = {true, false};

        for (int k = 0; k < 2; ++k) {
            const cplx u = (is_t1[k] ? t1_image(w[k]) : t2_image(w[k])) +
                           two_pi * cycle_n;
            IonizationSolution s;
            s.t_prime = (u - field.phi()) / field.omega();
            s.group = is_t1[k] ? TimeGroup::t1 : TimeGroup::t2;
            s.cycle_n = cycle_n;
            if (pair == 0)
                s.branch = is_t1[k] ? TimeBranch::t11 : TimeBranch::t22;
            else
                s.branch = is_t1[k] ? TimeBranch::t12 : TimeBranch::t21;

            double res = std::abs(saddle_residual(field, atom, p, s.t_prime));
            if (res < tol) {
                s.valid_quadrant = true;
            } else if (res < 1e-2 * std::max(1.0, 2.0 * atom.ip())) {
                // Close but blunted by closed-form arithmetic near pair
                // degeneracies; refine.  Far candidates are left alone:
                // they solve the sign-reflected momentum, and polishing
                // would collapse them onto the genuine saddles.
                s.valid_quadrant = polish_time(field, atom, p, cycle_n, s.t_prime, tol);
            }

            const int slot = is_t1[k] ? pair : 3 - pair;
            out[slot] = s;
        }
    }

    // A polished spurious candidate that landed on a genuine saddle would
    // double-count it; keep only the first of any coincident valid pair.
    for (int i = 0; i < 4; ++i) {
        if (!out[i].valid_quadrant) continue;
        for (int j = i + 1; j < 4; ++j) {
            if (!out[j].valid_quadrant) continue;
            if (std::abs(out[i].t_prime - out[j].t_prime) < 1e-6 / field.omega())
                out[j].valid_quadrant = false;
        }
    }
    return out;
}

std::pair<IonizationSolution, IonizationSolution> grouped_times(
    const LaserField& field, const TargetAtom& atom, Vec2 p, int cycle_n) {
    const std::array<IonizationSolution, 4> c = candidate_times(field, atom, p, cycle_n);
    const bool plus = p.z * p.x >= 0.0;

    IonizationSolution t1 = plus ? c[0] : c[1];
    IonizationSolution t2 = plus ? c[2] : c[3];
    // The quadrant rule identifies the genuine member of each family pair;
    // fall back on the residual if arithmetic near a family crossing
    // disagrees with it.
    if (!t1.valid_quadrant) {
        const IonizationSolution& alt = plus ? c[1] : c[0];
        if (alt.valid_quadrant) t1 = alt;
    }
    if (!t2.valid_quadrant) {
        const IonizationSolution& alt = plus ? c[3] : c[2];
        if (alt.valid_quadrant) t2 = alt;
    }

    // Near the major axis at high ellipticity both saddles sit at
    // Re[omega t' + phi] = pi, where the two family images coincide and the
    // duplicate filter can strand one slot; recover the partner from any
    // remaining distinct valid candidate.
    const auto distinct = [&](const IonizationSolution& x, const IonizationSolution& y) {
        return std::abs(x.t_prime - y.t_prime) > 1e-6 / field.omega();
    };
    if (t1.valid_quadrant != t2.valid_quadrant) {
        const IonizationSolution& have = t1.valid_quadrant ? t1 : t2;
        for (const IonizationSolution& cand : c) {
            if (!cand.valid_quadrant || !distinct(cand, have)) continue;
            (t1.valid_quadrant ? t2 : t1) = cand;
            break;
        }
    }

    // Normalize the pair order: t1 owns the larger real phase, and when the
    // real phases degenerate, the smaller imaginary part (the saddle that
    // survives the circular limit).
    if (t1.valid_quadrant && t2.valid_quadrant) {
        const double re1 = std::real(t1.t_prime);
        const double re2 = std::real(t2.t_prime);
        const bool swap_pair =
            (re1 < re2 - 1e-9) ||
            (std::abs(re1 - re2) <= 1e-9 &&
             std::imag(t1.t_prime) > std::imag(t2.t_prime));
        if (swap_pair) std::swap(t1, t2);
    }
    t1.group = TimeGroup::t1;
    t2.group = TimeGroup::t2;
    return {t1, t2};
}

std::vector<IonizationSolution> circular_limit_times(const LaserField& field,
                                                     const TargetAtom& atom, Vec2 p,
                                                     int cycle_n) {
    if (field.eps() != 1.0)
        throw domain_error("circular_limit_times requires eps = 1");
    const double pr = std::hypot(p.z, p.x);
    if (pr == 0.0)
        throw domain_error(
            "no ionization time exists at p = 0 under circular polarization");

    const double up = field.up();
    double rhs = (atom.ip() + up + 0.5 * pr * pr) / (pr * std::sqrt(2.0 * up));
    if (rhs < 1.0) rhs = 1.0; // reachable only through rounding; bound is analytic

    double re_u = std::atan2(p.x, p.z) + units::pi;
    re_u -= two_pi * std::floor(re_u / two_pi);

    IonizationSolution s;
    const cplx u(re_u + two_pi * cycle_n, std::acosh(rhs));
    s.t_prime = (u - field.phi()) / field.omega();
    s.branch = TimeBranch::circular;
    s.group = TimeGroup::t1;
    s.cycle_n = cycle_n;
    s.valid_quadrant =
        std::abs(saddle_residual(field, atom, p, s.t_prime)) < residual_tolerance(atom);
    return {s};
}

namespace {

// Re S(t1) - Re S(t2) at radius r along dir; NaN when either grouped time
// fails validation.
double stokes_gap(const LaserField& field, const TargetAtom& atom, Vec2 dir,
                  double r) {
    const Vec2 p{r * dir.z, r * dir.x};
    const auto [t1, t2] = grouped_times(field, atom, p, 0);
    if (!t1.valid_quadrant || !t2.valid_quadrant)
        return std::numeric_limits<double>::quiet_NaN();
    return std::real(direct_action(field, atom, p, t1.t_prime)) -
           std::real(direct_action(field, atom, p, t2.t_prime));
}

} // namespace

double stokes_critical_momentum(const LaserField& field, const TargetAtom& atom,
                                double angle, double search_radius) {
    if (search_radius <= 0.0)
        throw domain_error("search_radius must be positive");
    const double step = 0.01;
    const Vec2 dir{std::cos(angle), std::sin(angle)};

    // The transition can show up two ways: an ordinary sign change of the
    // gap, or a tangential merge where the saddles' Re S become identical
    // (the gap decays to zero and stays there once both roots of the pair
    // turn real).  Both are located to 1e-6 in radius by bisection; the
    // returned point always satisfies |gap| < 1e-6.
    constexpr double gap_tol = 1e-6;
    double prev_r = 0.0;
    double prev_g = std::numeric_limits<double>::quiet_NaN();
    for (double r = step; r <= search_radius + 0.5 * step; r += step) {
        const double g = stokes_gap(field, atom, dir, r);
        if (!std::isnan(g) && std::abs(g) < gap_tol) {
            if (std::isnan(prev_g) || std::abs(prev_g) < gap_tol) return r;
            double lo = prev_r; // |gap| >= tol
            double hi = r;      // |gap| < tol
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                const double gm = stokes_gap(field, atom, dir, mid);
                if (!std::isnan(gm) && std::abs(gm) < gap_tol)
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        }
        if (!std::isnan(prev_g) && !std::isnan(g) && prev_g * g < 0.0) {
            double lo = prev_r;
            double hi = r;
            double glo = prev_g;
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                const double gm = stokes_gap(field, atom, dir, mid);
                if (std::isnan(gm) || std::abs(gm) < gap_tol) return mid;
                if (glo * gm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_g = g;
        prev_r = r;
    }
    return std::numeric_limits<double>::infinity();
}

StokesPolicy is_beyond_stokes(const LaserField& field, const TargetAtom& atom,
                              Vec2 p) {
    const double pr = std::hypot(p.z, p.x);
    if (pr == 0.0) return StokesPolicy::keep_both;
    const double pc = stokes_critical_momentum(field, atom, std::atan2(p.x, p.z));
    if (!(pr > pc)) return StokesPolicy::keep_both;

    const auto [t1, t2] = grouped_times(field, atom, p, 0);
    if (!t1.valid_quadrant || !t2.valid_quadrant) return StokesPolicy::keep_both;
    const double im1 = std::imag(direct_action(field, atom, p, t1.t_prime));
    const double im2 = std::imag(direct_action(field, atom, p, t2.t_prime));
    if (im1 == im2) return StokesPolicy::keep_both;
    return im1 > im2 ? StokesPolicy::discard_t1 : StokesPolicy::discard_t2;
}

} // namespace orbholo
