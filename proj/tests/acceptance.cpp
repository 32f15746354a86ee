// Acceptance gate: one numbered run per contract, a single PASS/FAIL line
// with the measured values, exit 0 on pass and 1 on fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbholo/analysis.hpp"
#include "orbholo/cqsfa.hpp"
#include "orbholo/errors.hpp"
#include "orbholo/pmd.hpp"
#include "orbholo/quartic.hpp"
#include "orbholo/sfa_amplitude.hpp"
#include "orbholo/sfa_times.hpp"
#include "orbholo/units.hpp"

using namespace orbholo;

namespace {

LaserField paper_field(double eps, double phi = 0.0) {
    return LaserField::from_experiment(2.5e14, 735.0, eps, phi);
}

TargetAtom helium() { return TargetAtom{0.90357, 1.0}; }
TargetAtom bare() { return TargetAtom{0.90357, 0.0}; }

std::string str(double v, int prec = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// Distance to the nearest integer multiple of pi.
double fold_pi(double x) {
    return std::abs(x - units::pi * std::round(x / units::pi));
}

// ---------------------------------------------------------------- 1 -----

bool criterion1(std::ostringstream& msg) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string cmd = std::string(ORBHOLO_CLI_PATH) + " estimate 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        msg << "could not launch the front end";
        return false;
    }
    std::string out;
    char buf[512];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int raw = pclose(pipe);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) {
        msg << "estimate exited with status " << raw;
        return false;
    }
    const std::size_t pos = out.find("eps_c = ");
    double eps_c = 0.0;
    if (pos == std::string::npos ||
        std::sscanf(out.c_str() + pos, "eps_c = %lf", &eps_c) != 1) {
        msg << "estimate output lacks an eps_c value";
        return false;
    }
    msg << "eps_c = " << str(eps_c, 4) << " (target 0.334 +- 0.005), "
        << str(seconds, 3) << " s";
    return std::abs(eps_c - 0.334) <= 0.005 && seconds < 1.0;
}

// ---------------------------------------------------------------- 2 -----

std::complex<double> polish_local(std::complex<double> x, double b, double c, double d,
                                  double e) {
    for (int k = 0; k < 8; ++k) {
        const std::complex<double> f = (((x + b) * x + c) * x + d) * x + e;
        const std::complex<double> df = ((4.0 * x + 3.0 * b) * x + 2.0 * c) * x + d;
        if (std::abs(df) == 0.0) break;
        x -= f / df;
    }
    return x;
}

bool criterion2(std::ostringstream& msg) {
    std::mt19937 rng(987654321u);
    std::uniform_real_distribution<double> mom(-2.0, 2.0);
    std::uniform_real_distribution<double> ell(0.0, 0.95);
    const TargetAtom atom = helium();
    const double tol = residual_tolerance(atom);

    double worst_residual = 0.0;
    double worst_root_gap = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Vec2 p{mom(rng), mom(rng)};
        const double eps = ell(rng);
        const LaserField field = paper_field(eps);

        const auto [t1, t2] = grouped_times(field, atom, p, 0);
        worst_residual = std::max(worst_residual,
                                  std::abs(saddle_residual(field, atom, p, t1.t_prime)));
        worst_residual = std::max(worst_residual,
                                  std::abs(saddle_residual(field, atom, p, t2.t_prime)));

        const QuarticResolvent qr = quartic_coefficients(field, atom, p);
        const double b = qr.a3.real(), c = qr.a2.real(), d = qr.a1.real(),
                     e = qr.a0.real();
        std::array<cplx, 4> closed;
        try {
            closed = quartic_solve_closed(b, c, d, e).roots;
        } catch (const resolvent_degeneracy_error&) {
            closed = quartic_roots_iterative(b, c, d, e);
        }

        Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
        companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
        companion(0, 3) = -e;
        companion(1, 3) = -d;
        companion(2, 3) = -c;
        companion(3, 3) = -b;
        const Eigen::EigenSolver<Eigen::Matrix4d> es(companion);

        for (const cplx root : closed) {
            const cplx refined = quartic_polish(root, b, c, d, e, 6);
            double nearest = 1e300;
            for (int k = 0; k < 4; ++k) {
                const std::complex<double> ev =
                    polish_local(es.eigenvalues()[k], b, c, d, e);
                nearest = std::min(nearest, std::abs(refined - ev));
            }
            worst_root_gap = std::max(worst_root_gap, nearest);
        }
    }

    msg << "max |residual| = " << str(worst_residual, 3) << " (bound " << str(tol, 3)
        << "), max root gap vs companion = " << str(worst_root_gap, 3)
        << " (bound 1e-10)";
    return worst_residual < tol && worst_root_gap < 1e-10;
}

// ---------------------------------------------------------------- 3 -----

bool criterion3(std::ostringstream& msg) {
    const LaserField field = paper_field(0.0);
    const TargetAtom atom = helium();
    const double w = field.omega();

    double worst_time_gap = 0.0;
    double worst_zeta = 0.0;
    double worst_eta = 0.0;
    for (int j = 0; j < 50; ++j) {
        for (int i = 0; i < 50; ++i) {
            const Vec2 p{-2.0 + 4.0 * i / 49.0, -2.0 + 4.0 * j / 49.0};

            // Independent linear-field solution: cos(w t') has the closed
            // form (-p_z +- i sqrt(p_x^2 + 2 ip)) / a0.
            std::vector<cplx> candidates;
            const double transverse = std::sqrt(p.x * p.x + 2.0 * atom.ip());
            for (const int sign : {1, -1}) {
                const cplx u0 =
                    std::acos(cplx(-p.z / field.a0(), sign * transverse / field.a0()));
                for (int n = -2; n <= 2; ++n)
                    for (const int pm : {1, -1}) {
                        const cplx t = (double(pm) * u0 + 2.0 * units::pi * n) / w;
                        if (t.imag() > 0.0) candidates.push_back(t);
                    }
            }

            const auto [t1, t2] = grouped_times(field, atom, p, 0);
            for (const cplx t : {t1.t_prime, t2.t_prime}) {
                double nearest = 1e300;
                for (const cplx cand : candidates)
                    nearest = std::min(nearest, std::abs(t - cand));
                worst_time_gap = std::max(worst_time_gap, nearest);
            }

            const QuarticResolvent qr = quartic_coefficients(field, atom, p);
            worst_zeta = std::max(worst_zeta, std::abs(qr.zeta));
            worst_eta = std::max(worst_eta, std::abs(qr.eta));
        }
    }

    msg << "max |t' - closed form| = " << str(worst_time_gap, 3)
        << " (bound 1e-10), max |zeta| = " << str(worst_zeta, 3) << ", max |eta| = "
        << str(worst_eta, 3) << " (bounds 1e-12)";
    return worst_time_gap < 1e-10 && worst_zeta < 1e-12 && worst_eta < 1e-12;
}

// ---------------------------------------------------------------- 4 -----

bool criterion4(std::ostringstream& msg) {
    const TargetAtom atom = helium();

    const LaserField near_circular = paper_field(0.999);
    double worst_step = 0.0;
    for (int k = 0; k < 14; ++k) {
        const Vec2 p{0.2 + 0.1 * k, 0.0};
        const auto [t1, t2] = grouped_times(near_circular, atom, p, 0);
        worst_step = std::max(worst_step, fold_pi(near_circular.omega() *
                                                  t1.t_prime.real()));
        worst_step = std::max(worst_step, fold_pi(near_circular.omega() *
                                                  t2.t_prime.real()));
    }

    const LaserField circular = paper_field(1.0);
    double worst_exact = 0.0;
    for (const double pz : {0.3, 0.7, 1.2, -0.5, -1.0}) {
        const auto times = circular_limit_times(circular, atom, Vec2{pz, 0.0}, 0);
        for (const IonizationSolution& sol : times)
            worst_exact =
                std::max(worst_exact, fold_pi(circular.omega() * sol.t_prime.real()));
    }

    msg << "eps 0.999: max |Re wt' mod pi| = " << str(worst_step, 3)
        << " (bound 0.02); eps 1: max deviation from n pi = " << str(worst_exact, 3)
        << " (bound 1e-10)";
    return worst_step < 0.02 && worst_exact < 1e-10;
}

// ---------------------------------------------------------------- 5 -----

bool criterion5(std::ostringstream& msg) {
    const TargetAtom atom = helium();
    std::vector<double> crits;
    double worst_gap = 0.0;

    for (const double eps : {0.2, 0.4, 0.7}) {
        const LaserField field = paper_field(eps);
        const double pc = stokes_critical_momentum(field, atom, 0.0, 10.0);
        if (!std::isfinite(pc)) {
            msg << "no Stokes crossing found at eps " << str(eps, 2);
            return false;
        }
        crits.push_back(pc);
        const Vec2 p{pc, 0.0};
        const auto [t1, t2] = grouped_times(field, atom, p, 0);
        const double gap = std::abs(direct_action(field, atom, p, t1.t_prime).real() -
                                    direct_action(field, atom, p, t2.t_prime).real());
        worst_gap = std::max(worst_gap, gap);
    }

    msg << "p_crit = {" << str(crits[0]) << ", " << str(crits[1]) << ", "
        << str(crits[2]) << "}, max |Re S gap| = " << str(worst_gap, 3)
        << " (bound 1e-6)";
    return crits[0] > crits[1] && crits[1] > crits[2] && worst_gap < 1e-6;
}

// ---------------------------------------------------------------- 6 -----

std::vector<double> minor_axis_cut(double eps, int samples, double half_range) {
    const LaserField field = paper_field(eps);
    const TargetAtom atom = helium();
    PMDGrid grid = build_grid({0.0, 0.02, 2, -half_range, half_range, samples},
                              {OrbitLabel::a, OrbitLabel::b});
    compute_pmd(Method::sfa, field, atom, grid, 1);
    std::vector<double> cut(samples);
    for (int j = 0; j < samples; ++j) cut[j] = grid.probability[grid.cell_index(0, j)];
    return cut;
}

bool criterion6(std::ostringstream& msg) {
    PMDGrid grid = build_grid({-2.0, 2.0, 200, -2.0, 2.0, 200},
                              {OrbitLabel::a, OrbitLabel::b});
    compute_pmd(Method::sfa, paper_field(0.3), helium(), grid, 1);

    // The two strongest interior local maxima are the lobe centers.
    struct Lobe {
        double value;
        double pz, px;
    };
    std::vector<Lobe> lobes;
    const int n = 200;
    for (int j = 1; j + 1 < n; ++j)
        for (int i = 1; i + 1 < n; ++i) {
            const double v = grid.probability[grid.cell_index(i, j)];
            if (v > grid.probability[grid.cell_index(i - 1, j)] &&
                v > grid.probability[grid.cell_index(i + 1, j)] &&
                v > grid.probability[grid.cell_index(i, j - 1)] &&
                v > grid.probability[grid.cell_index(i, j + 1)])
                lobes.push_back({v, grid.pz(i), grid.px(j)});
        }
    std::sort(lobes.begin(), lobes.end(),
              [](const Lobe& a, const Lobe& b) { return a.value > b.value; });
    if (lobes.size() < 2) {
        msg << "fewer than two lobes found";
        return false;
    }
    const double cell = 4.0 / 199.0;
    const Lobe& upper = lobes[0].px > lobes[1].px ? lobes[0] : lobes[1];
    const Lobe& lower = lobes[0].px > lobes[1].px ? lobes[1] : lobes[0];
    const bool centered = std::abs(upper.pz) <= cell && std::abs(lower.pz) <= cell &&
                          std::abs(upper.px - 0.391) <= cell &&
                          std::abs(lower.px + 0.391) <= cell;

    std::vector<double> vis;
    for (const double eps : {0.1, 0.2, 0.3, 0.35})
        vis.push_back(fringe_visibility(minor_axis_cut(eps, 361, 1.8)));
    const bool fading =
        vis[0] > vis[1] && vis[1] > vis[2] && vis[2] > vis[3] && vis[3] < 0.1;

    msg << "lobes at (" << str(upper.pz, 3) << ", " << str(upper.px, 3) << ") and ("
        << str(lower.pz, 3) << ", " << str(lower.px, 3)
        << ") vs (0, +-0.391) within one cell (" << str(cell, 3) << "): "
        << (centered ? "yes" : "NO") << "; visibility {" << str(vis[0], 3) << ", "
        << str(vis[1], 3) << ", " << str(vis[2], 3) << ", " << str(vis[3], 3)
        << "} monotone and < 0.1 at 0.35: " << (fading ? "yes" : "NO");
    return centered && fading;
}

// ---------------------------------------------------------------- 7 -----

bool criterion7(std::ostringstream& msg) {
    const LaserField field = paper_field(0.3);
    const TargetAtom atom = bare();
    const GridAxes axes{-1.0, 1.0, 41, -1.0, 1.0, 41};
    const std::vector<OrbitLabel> pair{OrbitLabel::a, OrbitLabel::b};

    PMDGrid sfa = build_grid(axes, pair);
    compute_pmd(Method::sfa, field, atom, sfa, 1);

    PMDGrid cqsfa = build_grid(axes, pair);
    PmdOptions opts;
    opts.cqsfa.newton_tol = 1e-11;
    opts.cqsfa.momentum_tol = 1e-10;
    compute_pmd(Method::cqsfa, field, atom, cqsfa, 1, opts);

    int masked = 0;
    double worst = 0.0;
    for (int c = 0; c < sfa.cells(); ++c) {
        if (cqsfa.masked[c]) {
            ++masked;
            continue;
        }
        for (int k = 0; k < 2; ++k)
            worst = std::max(worst,
                             std::abs(cqsfa.amplitudes[k][c] - sfa.amplitudes[k][c]));
    }

    msg << "max pointwise |amplitude gap| = " << str(worst, 3)
        << " (bound 1e-8), unresolved cells = " << masked << " of " << sfa.cells();
    return masked == 0 && worst < 1e-8;
}

// ---------------------------------------------------------------- 8 -----

bool criterion8(std::ostringstream& msg) {
    const TargetAtom atom = helium();
    std::vector<double> samples(21);
    for (int i = 0; i < 21; ++i) samples[i] = -1.5 + 3.0 * i / 20.0;

    CqsfaOptions opts;
    opts.newton_tol = 1e-10;
    opts.momentum_tol = 1e-8;

    const auto curves0 = imaginary_time_scan_all(paper_field(0.0), atom,
                                                 ScanAxis::final_px, samples, opts);
    double worst_even = 0.0;
    for (int k = 0; k < 4; ++k) {
        const ScanCurve& curve = curves0[k];
        for (int i = 0; i < 10; ++i) {
            const double lhs = curve.im_t[i];
            const double rhs = curve.im_t[20 - i];
            if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
                msg << "orbit " << orbit_name(static_cast<OrbitLabel>(k))
                    << " unresolved at |p_fx| = " << str(std::abs(samples[i]), 3);
                return false;
            }
            worst_even = std::max(worst_even, std::abs(lhs - rhs));
        }
    }

    // Orbit a approaches the analytic times as the transverse drift grows.
    const ScanCurve sfa_curve = imaginary_time_scan(Method::sfa, paper_field(0.0),
                                                    atom, OrbitLabel::a,
                                                    ScanAxis::final_px, samples);
    const auto gap_at = [&](int i) {
        return 0.5 * (std::abs(curves0[0].im_t[i] - sfa_curve.im_t[i]) +
                      std::abs(curves0[0].im_t[20 - i] - sfa_curve.im_t[20 - i]));
    };
    const double gap_far = gap_at(0);  // |p_fx| = 1.5
    const double gap_near = gap_at(8); // |p_fx| = 0.3

    const auto curves1 = imaginary_time_scan_all(paper_field(0.1), atom,
                                                 ScanAxis::final_px, samples, opts);
    double worst_mirror = 0.0;
    for (int i = 0; i < 21; ++i) {
        if (i == 10) continue;
        const double a_here = curves1[0].im_t[i];
        const double b_there = curves1[1].im_t[20 - i];
        if (!std::isfinite(a_here) || !std::isfinite(b_there)) {
            msg << "eps 0.1 mirror scan unresolved at p_fx = " << str(samples[i], 3);
            return false;
        }
        worst_mirror = std::max(worst_mirror, std::abs(a_here - b_there));
    }

    msg << "max even-parity gap = " << str(worst_even, 3)
        << " (bound 1e-6); SFA approach: gap(1.5) = " << str(gap_far, 3) << " vs 0.25*"
        << str(gap_near, 3) << "; max a/b mirror gap = " << str(worst_mirror, 3)
        << " (bound 1e-4)";
    return worst_even < 1e-6 && gap_far < 0.25 * gap_near && worst_mirror < 1e-4;
}

// ---------------------------------------------------------------- 9 -----

bool criterion9(std::ostringstream& msg) {
    const TargetAtom atom = helium();
    const std::vector<double> eps_list{0.0, 0.1, 0.2, 0.3};
    std::vector<double> imt_c, imt_d;

    for (const double eps : eps_list) {
        const AxisScan scan = minor_axis_scan(paper_field(eps), atom, {0.5});
        const auto& c_slot = scan.by_label[static_cast<int>(OrbitLabel::c)][0];
        const auto& d_slot = scan.by_label[static_cast<int>(OrbitLabel::d)][0];
        if (!c_slot || !d_slot) {
            msg << "orbit " << (c_slot ? "d" : "c") << " unresolved at eps "
                << str(eps, 2);
            return false;
        }
        imt_c.push_back(c_slot->t_prime.imag());
        imt_d.push_back(d_slot->t_prime.imag());
    }

    bool rising = true;
    for (int i = 0; i + 1 < 4; ++i)
        rising = rising && imt_c[i + 1] >= imt_c[i] - 1e-8 &&
                 imt_d[i + 1] >= imt_d[i] - 1e-8;

    msg << "Im t' orbit c = {" << str(imt_c[0]) << ", " << str(imt_c[1]) << ", "
        << str(imt_c[2]) << ", " << str(imt_c[3]) << "}, orbit d = {" << str(imt_d[0])
        << ", " << str(imt_d[1]) << ", " << str(imt_d[2]) << ", " << str(imt_d[3])
        << "}";
    return rising;
}

// --------------------------------------------------------------- 10 -----

bool criterion10(std::ostringstream& msg) {
    const LaserField field = paper_field(0.0);
    const TargetAtom atom = helium();
    PMDGrid grid = build_grid({-1.0, 1.0, 101, -1.0, 1.0, 101},
                              {OrbitLabel::a, OrbitLabel::b, OrbitLabel::c,
                               OrbitLabel::d});
    grid.metadata.emplace_back("engine", "cqsfa");
    grid.metadata.emplace_back("eps", "0");

    PmdOptions opts;
    opts.cqsfa.propagation.rtol = 1e-9;
    opts.cqsfa.propagation.atol = 1e-11;
    compute_pmd(Method::cqsfa, field, atom, grid, 1, opts);

    // (i) Fan contrast: a+b fringes across the row nearest p_z = 0.15,
    // restricted to |p| < 0.35.
    const std::vector<double> fan_all = pair_interference(grid, OrbitLabel::a,
                                                          OrbitLabel::b);
    std::vector<double> fan_cut;
    const int fan_row = 57; // p_z = 0.14
    for (int j = 35; j <= 65; ++j) {
        const double v = fan_all[grid.cell_index(fan_row, j)];
        if (!std::isfinite(v)) {
            msg << "fan cut unresolved at p_x = " << str(grid.px(j), 3);
            return false;
        }
        fan_cut.push_back(v);
    }
    const double fan_vis = fringe_visibility(fan_cut);

    // (ii) Spider axis prominence: b+c contrast along p_z on the p_x = 0
    // column against the p_x = 0.5 column, over the common resolved span.
    const std::vector<double> spider_all = pair_interference(grid, OrbitLabel::b,
                                                             OrbitLabel::c);
    std::vector<double> on_axis, off_axis;
    for (int i = 55; i <= 99; ++i) { // p_z in [0.1, 0.98]
        const double v0 = spider_all[grid.cell_index(i, 50)];
        const double v5 = spider_all[grid.cell_index(i, 75)];
        if (!std::isfinite(v0) || !std::isfinite(v5)) continue;
        on_axis.push_back(v0);
        off_axis.push_back(v5);
    }
    if (on_axis.size() < 8) {
        msg << "spider columns resolved at only " << on_axis.size() << " rows";
        return false;
    }
    const double spider_on = fringe_visibility(on_axis);
    const double spider_off = fringe_visibility(off_axis);

    // Regression gate: the first verified grid freezes the bytes.
    std::ostringstream bytes_os;
    write_pmd(bytes_os, grid);
    const std::string bytes = bytes_os.str();
    const std::filesystem::path golden =
        std::filesystem::path(ORBHOLO_GOLDEN_DIR) / "criterion10.pmd";
    std::string golden_note;
    bool bytes_ok = true;
    if (std::filesystem::exists(golden)) {
        std::ifstream is(golden, std::ios::binary);
        std::ostringstream stored;
        stored << is.rdbuf();
        bytes_ok = stored.str() == bytes;
        golden_note = bytes_ok ? "matches golden file" : "DIFFERS from golden file";
    } else {
        std::filesystem::create_directories(golden.parent_path());
        std::ofstream os(golden, std::ios::binary);
        os << bytes;
        golden_note = "golden file created";
    }

    msg << "fan a+b visibility = " << str(fan_vis, 3)
        << " (bound 0.5); spider b+c visibility on-axis " << str(spider_on, 3)
        << " vs off-axis " << str(spider_off, 3) << "; " << golden_note;
    return fan_vis > 0.5 && spider_on > spider_off && bytes_ok;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1-10>\n");
        return 2;
    }
    const int index = std::atoi(argv[1]);
    if (index < 1 || index > 10) {
        std::fprintf(stderr, "criterion index must be 1-10\n");
        return 2;
    }

    bool (*const table[10])(std::ostringstream&) = {
        criterion1, criterion2, criterion3, criterion4, criterion5,
        criterion6, criterion7, criterion8, criterion9, criterion10};

    std::ostringstream msg;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = table[index - 1](msg);
    } catch (const std::exception& e) {
        ok = false;
        msg << "unhandled exception: " << e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("%s: criterion %d: %s  [%.1f s]\n", ok ? "PASS" : "FAIL", index,
                msg.str().c_str(), seconds);
    return ok ? 0 : 1;
}
