#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "orbholo/errors.hpp"
#include "orbholo/quartic.hpp"

using namespace orbholo;

namespace {

// Independent oracle: eigenvalues of the companion matrix.
std::array<cplx, 4> companion_roots(double b, double c, double d, double e) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 3) = -e;
    m(1, 3) = -d;
    m(2, 3) = -c;
    m(3, 3) = -b;
    m(1, 0) = m(2, 1) = m(3, 2) = 1.0;
    const Eigen::Vector4cd ev = m.eigenvalues();
    return {ev(0), ev(1), ev(2), ev(3)};
}

// Greedy matching is enough here: quartic roots of the tested polynomials
// are well separated relative to the tolerance.
double max_matched_distance(std::array<cplx, 4> got, std::array<cplx, 4> want) {
    double worst = 0.0;
    std::vector<cplx> pool(want.begin(), want.end());
    for (const cplx& r : got) {
        auto best = std::min_element(pool.begin(), pool.end(),
                                     [&](const cplx& a, const cplx& b) {
                                         return std::abs(a - r) < std::abs(b - r);
                                     });
        worst = std::max(worst, std::abs(*best - r));
        pool.erase(best);
    }
    return worst;
}

double residual_scale(double b, double c, double d, double e, cplx x) {
    const double ax = std::abs(x);
    double scale = std::abs(e);
    scale = std::max(scale, std::abs(d) * ax);
    scale = std::max(scale, std::abs(c) * ax * ax);
    scale = std::max(scale, std::abs(b) * ax * ax * ax);
    scale = std::max(scale, ax * ax * ax * ax);
    return std::max(scale, 1.0);
}

cplx evaluate(double b, double c, double d, double e, cplx x) {
    return (((x + b) * x + c) * x + d) * x + e;
}

} // namespace

TEST_CASE("closed form matches the companion oracle on random quartics") {
    std::mt19937_64 rng(0x5eedc0ffeeULL);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    int solved = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const double b = coef(rng), c = coef(rng), d = coef(rng), e = coef(rng);
        QuarticClosedForm sol;
        try {
            sol = quartic_solve_closed(b, c, d, e);
        } catch (const resolvent_degeneracy_error&) {
            continue; // documented fallback path, exercised below
        }
        ++solved;
        const auto oracle = companion_roots(b, c, d, e);
        CHECK(max_matched_distance(sol.roots, oracle) < 1e-8);
        for (const cplx& r : sol.roots)
            CHECK(std::abs(evaluate(b, c, d, e, r)) <
                  1e-10 * residual_scale(b, c, d, e, r));
    }
    CHECK(solved > 1900);
}

TEST_CASE("iterative fallback solves degenerate shapes") {
    // (x^2 + 1)^2: double pairs at +-i, q = 0 exactly.
    const auto roots = quartic_roots_iterative(0.0, 2.0, 0.0, 1.0);
    for (const cplx& r : roots) {
        CHECK(std::abs(r.real()) < 1e-7);
        CHECK(std::abs(std::abs(r.imag()) - 1.0) < 1e-7);
    }
}

TEST_CASE("perfect squares keep zeta and eta at zero") {
    // (x^2 + 2 s x + u)^2 expands to b = 4s, c = 2u + 4s^2, d = 4su, e = u^2.
    const double s = 0.37, u = 1.21;
    const auto sol =
        quartic_solve_closed(4.0 * s, 2.0 * u + 4.0 * s * s, 4.0 * s * u, u * u);
    CHECK(std::abs(sol.zeta) < 1e-12);
    CHECK(std::abs(sol.eta) < 1e-12);
    // Double roots at -s +- sqrt(s^2 - u).
    const cplx inner = std::sqrt(cplx(s * s - u, 0.0));
    for (const cplx& r : sol.roots) {
        const double d1 = std::abs(r - (-s + inner));
        const double d2 = std::abs(r - (-s - inner));
        CHECK(std::min(d1, d2) < 1e-9);
    }
}

TEST_CASE("polish drives residuals to machine precision") {
    const double b = 1.7, c = -2.2, d = 0.9, e = -0.3;
    const auto oracle = companion_roots(b, c, d, e);
    for (const cplx& r0 : oracle) {
        const cplx noisy = r0 + cplx(3e-7, -2e-7);
        const cplx polished = quartic_polish(noisy, b, c, d, e);
        CHECK(std::abs(evaluate(b, c, d, e, polished)) < 1e-13);
    }
}

TEST_CASE("resolvent pairing stays stable under tiny coefficient changes") {
    // Near the perfect-square manifold the pair assignment (roots 0,1 vs
    // 2,3) must not flip for an infinitesimal perturbation.
    const double s = -0.8, u = 0.9;
    const double b = 4.0 * s, c = 2.0 * u + 4.0 * s * s, d = 4.0 * s * u, e = u * u;
    const auto base = quartic_solve_closed(b, c, d, e);
    const auto bumped = quartic_solve_closed(b, c, d + 1e-11, e);
    CHECK(max_matched_distance(base.roots, bumped.roots) < 1e-5);
    CHECK(std::abs(base.roots[0] - bumped.roots[0]) < 1e-5);
    CHECK(std::abs(base.roots[2] - bumped.roots[2]) < 1e-5);
}
