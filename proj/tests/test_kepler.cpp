#include "doctest.h"

#include <cmath>

#include "orbholo/errors.hpp"
#include "orbholo/kepler.hpp"
#include "orbholo/trajectory.hpp"

using namespace orbholo;

namespace {

// Effectively field-free configuration: the field type requires up > 0, so
// a vanishing ponderomotive energy stands in for "laser off".
LaserField off_field() { return LaserField(1e-30, 0.05, 0.0); }

PropagationOptions tight_opts() {
    PropagationOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    return opts;
}

// Action closure at the matching point reached after propagating for a
// time t: the raw leg integral is replaced by its drift counterterm plus
// the analytic Coulomb tail.  On a pure Coulomb orbit the result must not
// depend on where the handoff happens.
double closure_value(const TargetAtom& atom, Vec2 r0, Vec2 p0, double t) {
    const LaserField field = off_field();
    if (t == 0.0) {
        const KeplerAsymptotics kep = kepler_asymptotics(atom, r0, p0);
        return kep.tail_phase;
    }
    const PropagationResult run =
        propagate(field, atom, r0, p0, 0.0, t, tight_opts());
    const KeplerAsymptotics kep = kepler_asymptotics(atom, run.r, run.p);
    const double drift = 0.5 * dot(kep.p_inf, kep.p_inf) * t;
    return -run.s_raw + drift + kep.tail_phase;
}

Vec2 rotate(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.z - s * v.x, s * v.z + c * v.x};
}

} // namespace

TEST_CASE("asymptotic momentum matches long-time propagation") {
    const LaserField field = off_field();
    const TargetAtom atom{0.90357, 1.0};
    const Vec2 r0{8.0, 2.0};
    const Vec2 p0{-0.05, 0.55};

    const KeplerAsymptotics kep = kepler_asymptotics(atom, r0, p0);
    const double energy = 0.5 * dot(p0, p0) - atom.z_eff() / norm(r0);
    CHECK(kep.energy == doctest::Approx(energy).epsilon(1e-13));
    CHECK(norm(kep.p_inf) == doctest::Approx(std::sqrt(2.0 * energy)).epsilon(1e-12));

    const double ell = cross(r0, p0);
    const double ecc =
        std::sqrt(1.0 + 2.0 * energy * ell * ell / (atom.z_eff() * atom.z_eff()));
    CHECK(kep.ecc == doctest::Approx(ecc).epsilon(1e-12));

    // The propagated momentum bends toward the asymptote like 1/r.
    const PropagationResult mid =
        propagate(field, atom, r0, p0, 0.0, 1e4, tight_opts());
    const PropagationResult late =
        propagate(field, atom, r0, p0, 0.0, 1e5, tight_opts());
    const double gap_mid = norm(mid.p - kep.p_inf);
    const double gap_late = norm(late.p - kep.p_inf);
    CHECK(gap_late < 5e-4);
    CHECK(gap_late < 0.3 * gap_mid);

    // Re-anchoring the map anywhere along the orbit gives the same asymptote.
    const KeplerAsymptotics again = kepler_asymptotics(atom, late.r, late.p);
    CHECK(norm(again.p_inf - kep.p_inf) < 1e-8);
    CHECK(again.energy == doctest::Approx(kep.energy).epsilon(1e-9));
    CHECK(again.ecc == doctest::Approx(kep.ecc).epsilon(1e-8));
}

TEST_CASE("action closure is independent of the handoff point") {
    const TargetAtom atom{0.90357, 1.0};

    SUBCASE("orbit already outgoing") {
        const Vec2 r0{8.0, 2.0};
        const Vec2 p0{-0.05, 0.55};
        const double base = closure_value(atom, r0, p0, 0.0);
        for (double t : {2e3, 8e3, 3e4}) {
            CHECK(std::abs(closure_value(atom, r0, p0, t) - base) < 1e-6);
        }
    }

    SUBCASE("orbit closed before and after perihelion") {
        // Inbound start, perihelion near t = 14, then escape.
        const Vec2 r0{8.0, 2.0};
        const Vec2 p0{-0.5, 0.2};
        const double base = closure_value(atom, r0, p0, 0.0);
        for (double t : {5.0, 40.0, 2e3, 2e4}) {
            CHECK(std::abs(closure_value(atom, r0, p0, t) - base) < 1e-6);
        }
    }
}

TEST_CASE("radial outgoing orbit keeps its direction") {
    const LaserField field = off_field();
    const TargetAtom atom{0.90357, 1.0};
    const Vec2 r0{3.0, 0.0};
    const Vec2 p0{0.9, 0.0};

    const KeplerAsymptotics kep = kepler_asymptotics(atom, r0, p0);
    const double energy = 0.5 * 0.81 - 1.0 / 3.0;
    CHECK(kep.p_inf.x == 0.0);
    CHECK(kep.p_inf.z == doctest::Approx(std::sqrt(2.0 * energy)).epsilon(1e-12));

    const PropagationResult late =
        propagate(field, atom, r0, p0, 0.0, 1e5, tight_opts());
    CHECK(norm(late.p - kep.p_inf) < 2e-4);

    // The closure identity holds on the degenerate hyperbola too.
    const double base = closure_value(atom, r0, p0, 0.0);
    CHECK(std::abs(closure_value(atom, r0, p0, 5e3) - base) < 1e-6);
}

TEST_CASE("asymptotic map commutes with plane rotations") {
    const TargetAtom atom{0.90357, 1.0};
    const Vec2 r0{8.0, 2.0};
    const Vec2 p0{-0.5, 0.2};
    const double angle = 0.5235987755982988;

    const KeplerAsymptotics plain = kepler_asymptotics(atom, r0, p0);
    const KeplerAsymptotics turned =
        kepler_asymptotics(atom, rotate(r0, angle), rotate(p0, angle));
    const Vec2 expected = rotate(plain.p_inf, angle);
    CHECK(turned.p_inf.z == doctest::Approx(expected.z).epsilon(1e-12));
    CHECK(turned.p_inf.x == doctest::Approx(expected.x).epsilon(1e-12));
    CHECK(turned.tail_phase == doctest::Approx(plain.tail_phase).epsilon(1e-12));
    CHECK(turned.ecc == doctest::Approx(plain.ecc).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
    const TargetAtom atom{0.90357, 1.0};

    // Nonpositive energy has no outgoing asymptote.
    CHECK_THROWS_AS(kepler_asymptotics(atom, {8.0, 2.0}, {-0.25, 0.1}),
                    bound_electron_error);
    // Exactly parabolic counts as bound for the handoff.
    CHECK_THROWS_AS(kepler_asymptotics(atom, {2.0, 0.0}, {0.0, 1.0}),
                    bound_electron_error);
    // Radial inbound runs into the core.
    CHECK_THROWS_AS(kepler_asymptotics(atom, {3.0, 0.0}, {-0.9, 0.0}),
                    hard_collision_error);
    // The map is undefined at the origin.
    CHECK_THROWS_AS(kepler_asymptotics(atom, {0.0, 0.0}, {0.9, 0.0}),
                    singularity_error);
}

TEST_CASE("zero core charge passes the momentum through") {
    const TargetAtom bare{0.90357, 0.0};
    const Vec2 r0{8.0, 2.0};
    const Vec2 p0{-0.5, 0.2};
    const KeplerAsymptotics kep = kepler_asymptotics(bare, r0, p0);
    CHECK(kep.p_inf.z == p0.z);
    CHECK(kep.p_inf.x == p0.x);
    CHECK(kep.tail_phase == 0.0);
    CHECK(kep.ecc == 1.0);
}

TEST_CASE("jacobian of the asymptotic map tracks the propagated flow") {
    const LaserField field = off_field();
    const TargetAtom atom{0.90357, 1.0};
    const Vec2 r0{8.0, 2.0};
    const Vec2 p0{-0.05, 0.55};

    const auto [d_r, d_p] = kepler_jacobian(atom, r0, p0);

    // The finite-horizon monodromy approaches the asymptotic-map derivative
    // with an O(1/t) tail (momentum tail times secular shear), so a single
    // horizon converges too slowly; two horizons a factor of four apart
    // cancel the leading term.
    PropagationOptions opts = tight_opts();
    opts.with_monodromy = true;
    const PropagationResult mid = propagate(field, atom, r0, p0, 0.0, 4e4, opts);
    const PropagationResult far = propagate(field, atom, r0, p0, 0.0, 1.6e5, opts);
    auto extrap = [](const Mat2& m1, const Mat2& m4) {
        return Mat2{(4.0 * m4.zz - m1.zz) / 3.0, (4.0 * m4.zx - m1.zx) / 3.0,
                    (4.0 * m4.xz - m1.xz) / 3.0, (4.0 * m4.xx - m1.xx) / 3.0};
    };
    auto close = [](const Mat2& a, const Mat2& b, double tol) {
        CHECK(std::abs(a.zz - b.zz) < tol);
        CHECK(std::abs(a.zx - b.zx) < tol);
        CHECK(std::abs(a.xz - b.xz) < tol);
        CHECK(std::abs(a.xx - b.xx) < tol);
    };
    close(d_r, extrap(mid.m_pr, far.m_pr), 5e-4);
    close(d_p, extrap(mid.m_pp, far.m_pp), 5e-4);
}
