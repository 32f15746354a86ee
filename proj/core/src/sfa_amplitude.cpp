#include "orbholo/sfa_amplitude.hpp"

#include <algorithm>
#include <cmath>

#include "orbholo/errors.hpp"
#include "orbholo/units.hpp"

namespace orbholo {

const char* orbit_name(OrbitLabel label) {
    switch (label) {
    case OrbitLabel::a: return "a";
    case OrbitLabel::b: return "b";
    case OrbitLabel::c: return "c";
    case OrbitLabel::d: return "d";
    }
    return "?";
}

OrbitLabel orbit_from_name(const std::string& name) {
    if (name == "a") return OrbitLabel::a;
    if (name == "b") return OrbitLabel::b;
    if (name == "c") return OrbitLabel::c;
    if (name == "d") return OrbitLabel::d;
    throw domain_error("unknown orbit label '" + name + "' (expected a, b, c, or d)");
}

cplx direct_action(const LaserField& field, const TargetAtom& atom, Vec2 p,
                   cplx t_prime) {
    const double up = field.up();
    const double w = field.omega();
    const double eps = field.eps();
    const cplx u = w * t_prime + field.phi();
    const double p2 = p.z * p.z + p.x * p.x;
    return (0.5 * p2 + atom.ip() + up) * t_prime +
           up * (1.0 - eps * eps) / (2.0 * w * (1.0 + eps * eps)) * std::sin(2.0 * u) +
           field.a0() / w * (p.z * std::sin(u) - eps * p.x * std::cos(u));
}

cplx action_second_derivative(const LaserField& field, Vec2 p, cplx t_prime) {
    const CVec2 v = p + field.vector_potential(t_prime);
    return -cdot(v, field.electric_field(t_prime));
}

cplx action_third_derivative(const LaserField& field, Vec2 p, cplx t_prime) {
    const CVec2 a = field.vector_potential(t_prime);
    const CVec2 v = p + a;
    const CVec2 e = field.electric_field(t_prime);
    return cdot(e, e) - field.omega() * field.omega() * cdot(v, a);
}

cplx dipole_matrix_element(const LaserField& field, const TargetAtom& atom, Vec2 p,
                           cplx t_prime, DipoleModel model) {
    if (model == DipoleModel::unit) return 1.0;

    const double kappa = std::sqrt(2.0 * atom.ip());
    const cplx cd = cplx(0.0, -1.0) * std::pow(2.0, 3.5) * std::pow(kappa, 2.5) /
                    units::pi;
    const CVec2 v = p + field.vector_potential(t_prime);
    const cplx g = cdot(v, v) + 2.0 * atom.ip();

    if (std::abs(g) < 1e-6 * std::max(1.0, 2.0 * atom.ip())) {
        // At a saddle the 1s form has a third-order pole in g.  Expanding
        // g = 2 S'' tau + S''' tau^2 around the saddle and folding the pole
        // into the Gaussian fluctuation integral leaves one finite term
        // (odd powers of tau drop, and integrating tau^-2 by parts along
        // the descent contour gives i S'' times the plain Gaussian), so
        // the effective dipole multiplying sqrt(2 pi i / S'') is
        //   i S''' / (16 S''^2).
        const cplx s2 = action_second_derivative(field, p, t_prime);
        const cplx s3 = action_third_derivative(field, p, t_prime);
        return cd * cplx(0.0, 1.0) * s3 / (16.0 * s2 * s2);
    }
    return cd * cdot(field.electric_field(t_prime), v) / (g * g * g);
}

SfaOrbitContribution orbit_amplitude(const LaserField& field, const TargetAtom& atom,
                                     Vec2 p, const IonizationSolution& sol,
                                     DipoleModel model) {
    SfaOrbitContribution out;
    out.t_prime = sol.t_prime;
    out.action = direct_action(field, atom, p, sol.t_prime);
    const cplx s2 = action_second_derivative(field, p, sol.t_prime);
    const cplx gauss = std::sqrt(cplx(0.0, 2.0 * units::pi) / s2);
    out.prefactor = dipole_matrix_element(field, atom, p, sol.t_prime, model) * gauss;
    out.amplitude = out.prefactor * std::exp(cplx(0.0, 1.0) * out.action);
    out.label = sol.group == TimeGroup::t1 ? OrbitLabel::a : OrbitLabel::b;
    out.stokes_discarded = sol.stokes_discarded;
    return out;
}

std::vector<SfaOrbitContribution> sfa_orbit_contributions(
    const LaserField& field, const TargetAtom& atom, Vec2 p,
    const std::vector<OrbitLabel>& orbits, int n_cycles, DipoleModel model,
    StokesHandling stokes) {
    if (orbits.empty()) throw domain_error("orbit set must not be empty");
    if (n_cycles < 1) throw domain_error("n_cycles must be positive");
    bool want_a = false;
    bool want_b = false;
    for (const OrbitLabel o : orbits) {
        if (o == OrbitLabel::a) want_a = true;
        else if (o == OrbitLabel::b) want_b = true;
        else throw domain_error("the analytic engine provides orbits a and b only");
    }

    // Solutions repeat each cycle with the exact phase step
    // delta = T (p^2/2 + ip + up), so n_cycles enters as a geometric factor.
    const double p2 = p.z * p.z + p.x * p.x;
    const double delta = field.period() * (0.5 * p2 + atom.ip() + field.up());
    cplx cycle_factor = 0.0;
    for (int k = 0; k < n_cycles; ++k)
        cycle_factor += std::exp(cplx(0.0, delta * k));

    std::vector<IonizationSolution> times;
    if (field.eps() == 1.0) {
        // Single saddle per cycle; it carries the orbit-a slot and there is
        // no b contribution.
        if (want_a) times.push_back(circular_limit_times(field, atom, p, 0).front());
    } else {
        auto [t1, t2] = grouped_times(field, atom, p, 0);
        StokesPolicy policy = StokesPolicy::keep_both;
        if (stokes == StokesHandling::apply ||
            (stokes == StokesHandling::automatic && field.eps() > 0.35))
            policy = is_beyond_stokes(field, atom, p);
        t1.stokes_discarded = policy == StokesPolicy::discard_t1;
        t2.stokes_discarded = policy == StokesPolicy::discard_t2;
        if (want_a) times.push_back(t1);
        if (want_b) times.push_back(t2);
    }

    std::vector<SfaOrbitContribution> out;
    out.reserve(times.size());
    for (const IonizationSolution& sol : times) {
        SfaOrbitContribution c = orbit_amplitude(field, atom, p, sol, model);
        c.amplitude *= cycle_factor;
        out.push_back(c);
    }
    return out;
}

cplx sfa_transition_amplitude(const LaserField& field, const TargetAtom& atom, Vec2 p,
                              const std::vector<OrbitLabel>& orbits, int n_cycles,
                              DipoleModel model, StokesHandling stokes) {
    cplx sum = 0.0;
    for (const SfaOrbitContribution& c :
         sfa_orbit_contributions(field, atom, p, orbits, n_cycles, model, stokes))
        if (!c.stokes_discarded) sum += c.amplitude;
    return sum;
}

} // namespace orbholo
