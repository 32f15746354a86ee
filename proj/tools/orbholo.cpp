// Command-line front end for the orbit-holography engines: momentum
// distributions, ionization times, Stokes boundaries, imaginary-time scans,
// analytic estimates, and trajectory dumps.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "orbholo/analysis.hpp"
#include "orbholo/cqsfa.hpp"
#include "orbholo/errors.hpp"
#include "orbholo/pmd.hpp"
#include "orbholo/sfa_amplitude.hpp"
#include "orbholo/sfa_times.hpp"
#include "orbholo/trajectory.hpp"
#include "orbholo/units.hpp"

namespace {

using namespace orbholo;

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Shared field/atom/run configuration mirrored by every subcommand so a
// single flat key=value config file can drive any of them.
struct Shared {
    double intensity = 2.5e14; // W/cm^2
    double wavelength = 735.0; // nm
    double up = 0.0;           // a.u.; with --omega, replaces the pair above
    double omega = 0.0;        // a.u.
    double eps = 0.3;
    double phi = 0.0; // rad
    double ip = 0.90357;
    double z_eff = 1.0;
    double truncate = 0.0; // multiplier; 0 keeps the full potential
    int threads = 0;       // 0 = env override or machine parallelism
    // Solver overrides (trajectory engine).
    double newton_tol = 1e-8;
    double momentum_tol = 1e-6;
    double rtol = 1e-10;
    double atol = 1e-12;
    double horizon_cycles = 20.0;

    bool direct_field = false; // true once --up/--omega were used

    LaserField field() const {
        if (direct_field) return LaserField(up, omega, eps, phi);
        return LaserField::from_experiment(intensity, wavelength, eps, phi);
    }
    TargetAtom atom(const LaserField& f) const {
        TargetAtom a{ip, z_eff};
        if (truncate > 0.0) return a.with_truncation(truncation_bounds(f, a, truncate));
        return a;
    }
    CqsfaOptions cqsfa() const {
        CqsfaOptions o;
        o.newton_tol = newton_tol;
        o.momentum_tol = momentum_tol;
        o.horizon_cycles = horizon_cycles;
        o.propagation.rtol = rtol;
        o.propagation.atol = atol;
        return o;
    }
    int resolved_threads() const {
        if (threads > 0) return threads;
        if (const char* env = std::getenv("ORBIT_HOLOGRAPHY_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) return n;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? static_cast<int>(hw) : 1;
    }
};

void add_shared(CLI::App* cmd, Shared& s) {
    cmd->set_config("--config", "", "Config file with key=value lines mirroring flags");
    auto* gi = cmd->add_option("--intensity", s.intensity, "Peak intensity [W/cm^2]")
                   ->capture_default_str();
    auto* gw = cmd->add_option("--wavelength", s.wavelength, "Wavelength [nm]")
                   ->capture_default_str();
    auto* gu = cmd->add_option("--up", s.up, "Ponderomotive energy [a.u.], with --omega");
    auto* go = cmd->add_option("--omega", s.omega, "Carrier frequency [a.u.], with --up");
    gu->needs(go);
    go->needs(gu);
    gu->excludes(gi)->excludes(gw);
    cmd->add_option("--eps", s.eps, "Ellipticity, 0 <= eps <= 1")->capture_default_str();
    cmd->add_option("--phi", s.phi, "Carrier-envelope phase [rad]")->capture_default_str();
    cmd->add_option("--ip", s.ip, "Ionization potential [a.u.]")->capture_default_str();
    cmd->add_option("--z-eff", s.z_eff, "Binding-potential asymptotic charge [a.u.]")
        ->capture_default_str();
    cmd->add_option("--truncate", s.truncate,
                    "Potential truncation multiplier (tunnel-exit units); 0 = full range")
        ->capture_default_str();
    cmd->add_option("--threads", s.threads,
                    "Worker threads; 0 = ORBIT_HOLOGRAPHY_THREADS or machine parallelism")
        ->capture_default_str();
    cmd->add_option("--newton-tol", s.newton_tol,
                    "Tunneling-equation residual bound [a.u.]")
        ->capture_default_str();
    cmd->add_option("--momentum-tol", s.momentum_tol,
                    "Final-momentum match bound [a.u.]")
        ->capture_default_str();
    cmd->add_option("--rtol", s.rtol, "Integrator relative tolerance")
        ->capture_default_str();
    cmd->add_option("--atol", s.atol, "Integrator absolute tolerance")
        ->capture_default_str();
    cmd->add_option("--horizon-cycles", s.horizon_cycles,
                    "In-field propagation horizon [field cycles]")
        ->capture_default_str();
    cmd->callback([&s, gu] {
        if (gu->count()) s.direct_field = true;
    });
}

std::vector<OrbitLabel> parse_orbits(const std::string& text) {
    std::vector<OrbitLabel> out;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ','))
        if (!token.empty()) out.push_back(orbit_from_name(token));
    if (out.empty()) throw domain_error("orbit list is empty");
    return out;
}

DipoleModel parse_dipole(const std::string& name) {
    if (name == "unit") return DipoleModel::unit;
    if (name == "hydrogenic") return DipoleModel::hydrogenic_1s;
    throw domain_error("unknown dipole model '" + name + "'");
}

StokesHandling parse_stokes(const std::string& name) {
    if (name == "auto") return StokesHandling::automatic;
    if (name == "keep") return StokesHandling::keep_all;
    if (name == "apply") return StokesHandling::apply;
    throw domain_error("unknown stokes policy '" + name + "'");
}

Method parse_method(const std::string& name) {
    if (name == "sfa") return Method::sfa;
    if (name == "cqsfa") return Method::cqsfa;
    throw domain_error("unknown method '" + name + "'");
}

GridScale parse_scale_target(const std::string& name) {
    if (name == "linear") return GridScale::linear;
    return GridScale::log10;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw domain_error("cannot open output file '" + path + "'");
    return os;
}

// Plot recipes are plain gnuplot scripts reading the documented formats;
// plotting is never a build dependency.
void write_pmd_plot_script(const std::string& path, const std::string& data) {
    std::ofstream os = open_output(path);
    os << "# gnuplot recipe for the momentum distribution in " << data << "\n"
       << "# run: gnuplot -p " << path << "\n"
       << "set datafile separator \",\"\n"
       << "set datafile missing \"nan\"\n"
       << "set xlabel \"p_z [a.u.]\"\n"
       << "set ylabel \"p_x [a.u.]\"\n"
       << "set size ratio -1\n"
       << "set view map\n"
       << "splot \"" << data << "\" using 1:2:3 with points pt 5 ps 0.4 palette\n";
}

void write_curve_plot_script(const std::string& path, const std::string& data,
                             const char* ylabel) {
    std::ofstream os = open_output(path);
    os << "# gnuplot recipe for " << data << "\n"
       << "# run: gnuplot -p " << path << "\n"
       << "set datafile missing \"nan\"\n"
       << "set xlabel \"p [a.u.]\"\n"
       << "set ylabel \"" << ylabel << "\"\n"
       << "plot \"" << data << "\" using 1:2 with linespoints\n";
}

// Config keys echoed into every PMD header, in a fixed order so files are
// reproducible byte-for-byte from their own headers.
void echo_config(PMDGrid& grid, const Shared& s, Method method, int cycles,
                 const std::string& dipole, const std::string& stokes) {
    auto& m = grid.metadata;
    m.emplace_back("method", method == Method::sfa ? "sfa" : "cqsfa");
    if (s.direct_field) {
        m.emplace_back("up", format17(s.up));
        m.emplace_back("omega", format17(s.omega));
    } else {
        m.emplace_back("intensity", format17(s.intensity));
        m.emplace_back("wavelength", format17(s.wavelength));
    }
    m.emplace_back("eps", format17(s.eps));
    m.emplace_back("phi", format17(s.phi));
    m.emplace_back("ip", format17(s.ip));
    m.emplace_back("z_eff", format17(s.z_eff));
    m.emplace_back("truncate", format17(s.truncate));
    m.emplace_back("cycles", std::to_string(cycles));
    m.emplace_back("dipole", dipole);
    m.emplace_back("stokes", stokes);
    m.emplace_back("newton_tol", format17(s.newton_tol));
    m.emplace_back("momentum_tol", format17(s.momentum_tol));
    m.emplace_back("rtol", format17(s.rtol));
    m.emplace_back("atol", format17(s.atol));
    m.emplace_back("horizon_cycles", format17(s.horizon_cycles));
}

struct PmdArgs {
    Shared shared;
    std::string method = "sfa";
    std::string orbits = "a,b";
    int cycles = 1;
    double pz_min = -2.0, pz_max = 2.0;
    double px_min = -2.0, px_max = 2.0;
    int n_z = 200, n_x = 200;
    std::string scale = "raw";
    std::string dipole = "unit";
    std::string stokes = "auto";
    std::string out;
    std::string plot_script;
    std::string from;
};

// Rebuilds the full argument set from a PMD header so a file regenerates
// itself bit-for-bit.
void load_args_from_header(PmdArgs& a) {
    std::ifstream is(a.from, std::ios::binary);
    if (!is) throw domain_error("cannot open PMD file '" + a.from + "'");
    const PMDGrid grid = read_pmd(is);
    a.pz_min = grid.axes.pz_min;
    a.pz_max = grid.axes.pz_max;
    a.n_z = grid.axes.n_z;
    a.px_min = grid.axes.px_min;
    a.px_max = grid.axes.px_max;
    a.n_x = grid.axes.n_x;
    a.scale = grid.scale;
    a.orbits.clear();
    for (const OrbitLabel o : grid.orbit_set) {
        if (!a.orbits.empty()) a.orbits += ',';
        a.orbits += orbit_name(o);
    }
    bool have_up = false;
    bool have_omega = false;
    for (const auto& [key, value] : grid.metadata) {
        if (key == "method") a.method = value;
        else if (key == "intensity") a.shared.intensity = std::stod(value);
        else if (key == "wavelength") a.shared.wavelength = std::stod(value);
        else if (key == "up") { a.shared.up = std::stod(value); have_up = true; }
        else if (key == "omega") { a.shared.omega = std::stod(value); have_omega = true; }
        else if (key == "eps") a.shared.eps = std::stod(value);
        else if (key == "phi") a.shared.phi = std::stod(value);
        else if (key == "ip") a.shared.ip = std::stod(value);
        else if (key == "z_eff") a.shared.z_eff = std::stod(value);
        else if (key == "truncate") a.shared.truncate = std::stod(value);
        else if (key == "cycles") a.cycles = std::stoi(value);
        else if (key == "dipole") a.dipole = value;
        else if (key == "stokes") a.stokes = value;
        else if (key == "newton_tol") a.shared.newton_tol = std::stod(value);
        else if (key == "momentum_tol") a.shared.momentum_tol = std::stod(value);
        else if (key == "rtol") a.shared.rtol = std::stod(value);
        else if (key == "atol") a.shared.atol = std::stod(value);
        else if (key == "horizon_cycles") a.shared.horizon_cycles = std::stod(value);
    }
    a.shared.direct_field = have_up && have_omega;
}

PMDGrid compute_grid(const PmdArgs& a) {
    const LaserField field = a.shared.field();
    const TargetAtom atom = a.shared.atom(field);
    GridAxes axes{a.pz_min, a.pz_max, a.n_z, a.px_min, a.px_max, a.n_x};
    PMDGrid grid = build_grid(axes, parse_orbits(a.orbits));
    const Method method = parse_method(a.method);

    PmdOptions opts;
    opts.model = parse_dipole(a.dipole);
    opts.stokes = parse_stokes(a.stokes);
    opts.cqsfa = a.shared.cqsfa();
    opts.threads = a.shared.resolved_threads();

    echo_config(grid, a.shared, method, a.cycles, a.dipole, a.stokes);
    compute_pmd(method, field, atom, grid, a.cycles, opts);
    if (a.scale != "raw") normalize_log(grid, parse_scale_target(a.scale));
    return grid;
}

int run_pmd(const PmdArgs& args) {
    PmdArgs effective = args;
    if (!args.from.empty()) load_args_from_header(effective);
    const PMDGrid grid = compute_grid(effective);
    std::ofstream os = open_output(args.out);
    write_pmd(os, grid);
    const std::string script =
        args.plot_script.empty() ? args.out + ".gp" : args.plot_script;
    write_pmd_plot_script(script, args.out);
    return 0;
}

struct PairArgs {
    PmdArgs pmd;
    std::string in;
    std::string pair = "ab";
};

int run_pair(const PairArgs& args) {
    if (args.pair.size() != 2)
        throw domain_error("--pair expects two orbit letters, e.g. ab");
    const OrbitLabel first = orbit_from_name(std::string(1, args.pair[0]));
    const OrbitLabel second = orbit_from_name(std::string(1, args.pair[1]));

    PMDGrid grid;
    if (!args.in.empty()) {
        std::ifstream is(args.in, std::ios::binary);
        if (!is) throw domain_error("cannot open PMD file '" + args.in + "'");
        grid = read_pmd(is);
        if (grid.scale != "raw")
            throw domain_error("pair interference needs a raw-scale PMD file");
    } else {
        PmdArgs effective = args.pmd;
        effective.orbits = std::string(1, args.pair[0]);
        if (second != first) effective.orbits += std::string(",") + args.pair[1];
        effective.scale = "raw";
        grid = compute_grid(effective);
    }

    grid.probability = pair_interference(grid, first, second);
    grid.metadata.emplace_back("pair", args.pair);
    if (args.pmd.scale != "raw") normalize_log(grid, parse_scale_target(args.pmd.scale));

    std::ofstream os = open_output(args.pmd.out);
    write_pmd(os, grid);
    const std::string script =
        args.pmd.plot_script.empty() ? args.pmd.out + ".gp" : args.pmd.plot_script;
    write_pmd_plot_script(script, args.pmd.out);
    return 0;
}

struct TimesArgs {
    Shared shared;
    double pz = 0.5;
    double px = 0.2;
    bool all = false;
};

int run_times(const TimesArgs& args) {
    const LaserField field = args.shared.field();
    const TargetAtom atom = args.shared.atom(field);
    const Vec2 p{args.pz, args.px};

    std::printf("# eps = %s, p = (%s, %s) [a.u.]\n", format6(field.eps()).c_str(),
                format17(p.z).c_str(), format17(p.x).c_str());
    std::printf("# orbit  re_t_prime  im_t_prime  residual  valid\n");
    auto print_line = [&](const char* name, const IonizationSolution& sol) {
        const double residual = std::abs(saddle_residual(field, atom, p, sol.t_prime));
        std::printf("%s  %.17g  %.17g  %.3g  %d\n", name, sol.t_prime.real(),
                    sol.t_prime.imag(), residual, sol.valid_quadrant ? 1 : 0);
    };
    if (field.eps() == 1.0) {
        const auto times = circular_limit_times(field, atom, p, 0);
        print_line("a", times.front());
        return 0;
    }
    if (args.all) {
        const auto candidates = candidate_times(field, atom, p, 0);
        const char* names[4] = {"t11", "t12", "t21", "t22"};
        for (int k = 0; k < 4; ++k) print_line(names[k], candidates[k]);
        return 0;
    }
    const auto [t1, t2] = grouped_times(field, atom, p, 0);
    print_line("a", t1);
    print_line("b", t2);
    return 0;
}

struct ScanArgs {
    Shared shared;
    std::string method = "sfa";
    std::string orbit = "a";
    std::string axis = "final";
    double px_min = -1.5;
    double px_max = 1.5;
    int n = 21;
    std::string out;
    std::string plot_script;
};

int run_scan(const ScanArgs& args) {
    if (args.n < 2) throw domain_error("scan needs at least 2 samples");
    const LaserField field = args.shared.field();
    const TargetAtom atom = args.shared.atom(field);
    const Method method = parse_method(args.method);
    const ScanAxis axis =
        args.axis == "initial" ? ScanAxis::initial_px : ScanAxis::final_px;
    if (args.axis != "initial" && args.axis != "final")
        throw domain_error("--axis must be final or initial");

    std::vector<double> samples(args.n);
    for (int i = 0; i < args.n; ++i)
        samples[i] = args.px_min + (args.px_max - args.px_min) * i / (args.n - 1);

    std::vector<std::pair<std::string, std::string>> metadata;
    metadata.emplace_back("eps", format17(field.eps()));
    metadata.emplace_back("ip", format17(atom.ip()));

    std::vector<ScanCurve> curves;
    if (args.orbit == "all") {
        if (method == Method::sfa) {
            curves.push_back(imaginary_time_scan(method, field, atom, OrbitLabel::a,
                                                 axis, samples));
            curves.push_back(imaginary_time_scan(method, field, atom, OrbitLabel::b,
                                                 axis, samples));
        } else {
            const auto all = imaginary_time_scan_all(field, atom, axis, samples,
                                                     args.shared.cqsfa());
            curves.assign(all.begin(), all.end());
        }
    } else {
        curves.push_back(imaginary_time_scan(method, field, atom,
                                             orbit_from_name(args.orbit), axis,
                                             samples, args.shared.cqsfa()));
    }

    if (args.out.empty()) {
        for (const auto& curve : curves) {
            write_scan_curve(std::cout, curve, metadata);
            std::cout << "\n";
        }
        return 0;
    }
    for (const auto& curve : curves) {
        const std::string path = curves.size() == 1
                                     ? args.out
                                     : args.out + "." + orbit_name(curve.orbit);
        std::ofstream os = open_output(path);
        write_scan_curve(os, curve, metadata);
        const std::string script = !args.plot_script.empty() && curves.size() == 1
                                       ? args.plot_script
                                       : path + ".gp";
        write_curve_plot_script(script, path, "Im t' [a.u.]");
    }
    return 0;
}

struct StokesArgs {
    Shared shared;
    int n_angles = 1;
    double angle_start = 0.0;
    double angle_stop = 0.0;
    double search_radius = 10.0;
    std::string out;
};

int run_stokes(const StokesArgs& args) {
    if (args.n_angles < 1) throw domain_error("--n-angles must be positive");
    const LaserField field = args.shared.field();
    const TargetAtom atom = args.shared.atom(field);

    std::ostringstream table;
    table << "# eps = " << format17(field.eps()) << "\n";
    table << "# columns = angle p_crit re_action_gap\n";
    for (int k = 0; k < args.n_angles; ++k) {
        const double angle =
            args.n_angles == 1
                ? args.angle_start
                : args.angle_start +
                      (args.angle_stop - args.angle_start) * k / (args.n_angles - 1);
        const double p_crit =
            stokes_critical_momentum(field, atom, angle, args.search_radius);
        double gap = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(p_crit)) {
            const Vec2 p{p_crit * std::cos(angle), p_crit * std::sin(angle)};
            const auto [t1, t2] = grouped_times(field, atom, p, 0);
            const cplx s1 = direct_action(field, atom, p, t1.t_prime);
            const cplx s2 = direct_action(field, atom, p, t2.t_prime);
            gap = s1.real() - s2.real();
        }
        table << format17(angle) << "  " << format17(p_crit) << "  " << format17(gap)
              << "\n";
    }
    if (args.out.empty()) {
        std::cout << table.str();
    } else {
        std::ofstream os = open_output(args.out);
        os << table.str();
    }
    return 0;
}

struct EstimateArgs {
    Shared shared;
    double multiplier = 5.0;
};

int run_estimate(const EstimateArgs& args) {
    const LaserField field = args.shared.field();
    const TargetAtom atom = args.shared.atom(field);
    const double eps_c = critical_ellipticity(field, atom, args.multiplier);
    const Vec2 center0 = distribution_centers(field, 0);
    const Vec2 center1 = distribution_centers(field, 1);
    const double sigma = transverse_width(field, atom);
    const double separation = std::abs(center0.x - center1.x);

    std::printf("critical ellipticity   eps_c = %.4f  (%s-width overlap rule)\n",
                eps_c, format6(args.multiplier).c_str());
    std::printf("half-cycle centers     (%.4g, %.4f)  and  (%.4g, %.4f)  [a.u.]\n",
                center0.z, center0.x, center1.z, center1.x);
    std::printf("transverse width       sigma = %.4f  [a.u.]\n", sigma);
    std::printf("center separation      %.4f  [a.u.]  (%.2f widths)\n", separation,
                separation / sigma);
    return 0;
}

struct TrajArgs {
    Shared shared;
    std::string method = "cqsfa";
    std::string orbit = "a";
    double pz = 0.5;
    double px = 0.2;
    double duration = 3.0; // field cycles
    std::string out;
};

int dump_trajectory(std::ostream& os, const LaserField& field, const TargetAtom& atom,
                    const OrbitSolution& sol, double duration,
                    const PropagationOptions& base) {
    PropagationOptions opts = base;
    opts.record_samples = true;
    opts.with_monodromy = false;
    const double t0 = sol.t_prime.real();
    const PropagationResult run = propagate(field, atom, sol.exit_position, sol.p0, t0,
                                            t0 + duration * field.period(), opts);
    os << "# tunnel exit at t = " << format17(t0) << " [a.u.], r = ("
       << format17(sol.exit_position.z) << ", " << format17(sol.exit_position.x)
       << ")\n";
    os << "# p0 = (" << format17(sol.p0.z) << ", " << format17(sol.p0.x) << ")\n";
    os << "# columns = tau r_z r_x p_z p_x\n";
    char line[176];
    for (const TrajectorySample& s : run.samples) {
        std::snprintf(line, sizeof line, "%.17g %.17g %.17g %.17g %.17g\n", s.t - t0,
                      s.r.z, s.r.x, s.p.z, s.p.x);
        os << line;
    }
    return 0;
}

int run_traj(const TrajArgs& args) {
    const LaserField field = args.shared.field();
    const TargetAtom atom = args.shared.atom(field);
    const OrbitLabel want = orbit_from_name(args.orbit);
    const Vec2 target{args.pz, args.px};
    const Method method = parse_method(args.method);

    std::optional<OrbitSolution> found;
    if (method == Method::sfa) {
        if (want != OrbitLabel::a && want != OrbitLabel::b)
            throw domain_error("the analytic engine provides orbits a and b only");
        const TargetAtom free{atom.ip(), 0.0};
        const ShootSeed seed = sfa_seed(
            field, free, target, want == OrbitLabel::a ? TimeGroup::t1 : TimeGroup::t2);
        found = shoot(field, free, seed, target, args.shared.cqsfa());
        found->orbit_label = want;
        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!args.out.empty()) {
            file = open_output(args.out);
            os = &file;
        }
        return dump_trajectory(*os, field, free, *found, args.duration,
                               args.shared.cqsfa().propagation);
    }

    // Reuse the grid continuation by placing the target on the corner of a
    // minimal lattice, then pick the class that lands on the wanted letter.
    const double pad = 0.02;
    const GridSolutions sols =
        solve_grid(field, atom, target.z - pad, target.z, 2, target.x - pad, target.x,
                   2, args.shared.cqsfa());
    const int corner = 1 * 2 + 1;
    for (int k = 0; k < 4; ++k) {
        const auto& slot = sols.by_class[k][corner];
        if (slot && slot->orbit_label == want) {
            found = *slot;
            break;
        }
    }
    if (!found)
        throw non_convergence_error(
            "no orbit " + args.orbit + " solution reached p = (" + format6(target.z) +
                ", " + format6(target.x) + ")",
            std::numeric_limits<double>::quiet_NaN());
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!args.out.empty()) {
        file = open_output(args.out);
        os = &file;
    }
    return dump_trajectory(*os, field, atom, *found, args.duration,
                           args.shared.cqsfa().propagation);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photoelectron momentum distributions from quantum-orbit models "
                 "in elliptically polarized fields.  All quantities are in atomic "
                 "units except intensity [W/cm^2] and wavelength [nm]."};
    app.require_subcommand(1);

    PmdArgs pmd_args;
    auto* pmd_cmd = app.add_subcommand(
        "pmd", "Compute a momentum-distribution grid and its plot recipe");
    add_shared(pmd_cmd, pmd_args.shared);
    pmd_cmd->add_option("--method", pmd_args.method, "Engine: sfa or cqsfa")
        ->capture_default_str();
    pmd_cmd->add_option("--orbits", pmd_args.orbits, "Comma-separated orbit letters")
        ->capture_default_str();
    pmd_cmd->add_option("--cycles", pmd_args.cycles, "Field cycles in the coherent sum")
        ->capture_default_str();
    pmd_cmd->add_option("--pz-min", pmd_args.pz_min, "Grid p_z lower edge [a.u.]")
        ->capture_default_str();
    pmd_cmd->add_option("--pz-max", pmd_args.pz_max, "Grid p_z upper edge [a.u.]")
        ->capture_default_str();
    pmd_cmd->add_option("--px-min", pmd_args.px_min, "Grid p_x lower edge [a.u.]")
        ->capture_default_str();
    pmd_cmd->add_option("--px-max", pmd_args.px_max, "Grid p_x upper edge [a.u.]")
        ->capture_default_str();
    pmd_cmd->add_option("--nz", pmd_args.n_z, "Grid cells along p_z")
        ->capture_default_str();
    pmd_cmd->add_option("--nx", pmd_args.n_x, "Grid cells along p_x")
        ->capture_default_str();
    pmd_cmd->add_option("--scale", pmd_args.scale, "Output scale: raw, linear, or log10")
        ->capture_default_str();
    pmd_cmd->add_option("--dipole", pmd_args.dipole, "Dipole model: unit or hydrogenic")
        ->capture_default_str();
    pmd_cmd->add_option("--stokes", pmd_args.stokes,
                        "Stokes-transition policy: auto, keep, or apply")
        ->capture_default_str();
    pmd_cmd->add_option("--out", pmd_args.out, "Output PMD file")->required();
    pmd_cmd->add_option("--plot-script", pmd_args.plot_script,
                        "Plot recipe path (default: <out>.gp)");
    pmd_cmd->add_option("--from", pmd_args.from,
                        "Regenerate from an existing PMD file's header");

    PairArgs pair_args;
    auto* pair_cmd = app.add_subcommand(
        "pair", "Two-orbit interference |M_i + M_j|^2 from stored amplitudes");
    add_shared(pair_cmd, pair_args.pmd.shared);
    pair_cmd->add_option("--pair", pair_args.pair, "Two orbit letters, e.g. ab")
        ->capture_default_str();
    pair_cmd->add_option("--in", pair_args.in,
                         "Existing raw-scale PMD file (otherwise compute fresh)");
    pair_cmd->add_option("--method", pair_args.pmd.method, "Engine: sfa or cqsfa")
        ->capture_default_str();
    pair_cmd->add_option("--cycles", pair_args.pmd.cycles,
                         "Field cycles in the coherent sum")
        ->capture_default_str();
    pair_cmd->add_option("--pz-min", pair_args.pmd.pz_min, "Grid p_z lower edge [a.u.]")
        ->capture_default_str();
    pair_cmd->add_option("--pz-max", pair_args.pmd.pz_max, "Grid p_z upper edge [a.u.]")
        ->capture_default_str();
    pair_cmd->add_option("--px-min", pair_args.pmd.px_min, "Grid p_x lower edge [a.u.]")
        ->capture_default_str();
    pair_cmd->add_option("--px-max", pair_args.pmd.px_max, "Grid p_x upper edge [a.u.]")
        ->capture_default_str();
    pair_cmd->add_option("--nz", pair_args.pmd.n_z, "Grid cells along p_z")
        ->capture_default_str();
    pair_cmd->add_option("--nx", pair_args.pmd.n_x, "Grid cells along p_x")
        ->capture_default_str();
    pair_cmd->add_option("--scale", pair_args.pmd.scale,
                         "Output scale: raw, linear, or log10")
        ->capture_default_str();
    pair_cmd->add_option("--dipole", pair_args.pmd.dipole,
                         "Dipole model: unit or hydrogenic")
        ->capture_default_str();
    pair_cmd->add_option("--stokes", pair_args.pmd.stokes,
                         "Stokes-transition policy: auto, keep, or apply")
        ->capture_default_str();
    pair_cmd->add_option("--out", pair_args.pmd.out, "Output PMD file")->required();
    pair_cmd->add_option("--plot-script", pair_args.pmd.plot_script,
                         "Plot recipe path (default: <out>.gp)");

    TimesArgs times_args;
    auto* times_cmd =
        app.add_subcommand("times", "Ionization times at one final momentum");
    add_shared(times_cmd, times_args.shared);
    times_cmd->add_option("--pz", times_args.pz, "Final momentum p_z [a.u.]")
        ->capture_default_str();
    times_cmd->add_option("--px", times_args.px, "Final momentum p_x [a.u.]")
        ->capture_default_str();
    times_cmd->add_flag("--all", times_args.all,
                        "Print all four quartic candidates, not the grouped pair");

    ScanArgs scan_args;
    auto* scan_cmd = app.add_subcommand(
        "scan-imt", "Imaginary ionization time along the minor momentum axis");
    add_shared(scan_cmd, scan_args.shared);
    scan_cmd->add_option("--method", scan_args.method, "Engine: sfa or cqsfa")
        ->capture_default_str();
    scan_cmd->add_option("--orbit", scan_args.orbit, "Orbit letter or 'all'")
        ->capture_default_str();
    scan_cmd->add_option("--axis", scan_args.axis,
                         "Abscissa: final or initial transverse momentum")
        ->capture_default_str();
    scan_cmd->add_option("--px-min", scan_args.px_min, "Scan start p_x [a.u.]")
        ->capture_default_str();
    scan_cmd->add_option("--px-max", scan_args.px_max, "Scan end p_x [a.u.]")
        ->capture_default_str();
    scan_cmd->add_option("--n", scan_args.n, "Number of samples")->capture_default_str();
    scan_cmd->add_option("--out", scan_args.out,
                         "Output file (multi-orbit scans append .<orbit>)");
    scan_cmd->add_option("--plot-script", scan_args.plot_script, "Plot recipe path");

    StokesArgs stokes_args;
    auto* stokes_cmd = app.add_subcommand(
        "stokes", "Stokes-transition critical momentum along momentum-plane rays");
    add_shared(stokes_cmd, stokes_args.shared);
    stokes_cmd->add_option("--n-angles", stokes_args.n_angles, "Number of ray angles")
        ->capture_default_str();
    stokes_cmd
        ->add_option("--angle-start", stokes_args.angle_start,
                     "First ray angle from the major axis [rad]")
        ->capture_default_str();
    stokes_cmd
        ->add_option("--angle-stop", stokes_args.angle_stop, "Last ray angle [rad]")
        ->capture_default_str();
    stokes_cmd
        ->add_option("--search-radius", stokes_args.search_radius,
                     "Radial search window [a.u.]")
        ->capture_default_str();
    stokes_cmd->add_option("--out", stokes_args.out, "Output table file");

    EstimateArgs estimate_args;
    auto* estimate_cmd = app.add_subcommand(
        "estimate", "Analytic centers, widths, and the critical ellipticity");
    add_shared(estimate_cmd, estimate_args.shared);
    estimate_cmd
        ->add_option("--multiplier", estimate_args.multiplier,
                     "Center separation in transverse widths at the critical point")
        ->capture_default_str();

    TrajArgs traj_args;
    auto* traj_cmd =
        app.add_subcommand("traj", "Continuum trajectory dump for one orbit");
    add_shared(traj_cmd, traj_args.shared);
    traj_cmd->add_option("--method", traj_args.method, "Engine: sfa or cqsfa")
        ->capture_default_str();
    traj_cmd->add_option("--orbit", traj_args.orbit, "Orbit letter")
        ->capture_default_str();
    traj_cmd->add_option("--pz", traj_args.pz, "Final momentum p_z [a.u.]")
        ->capture_default_str();
    traj_cmd->add_option("--px", traj_args.px, "Final momentum p_x [a.u.]")
        ->capture_default_str();
    traj_cmd->add_option("--duration", traj_args.duration, "Dump window [field cycles]")
        ->capture_default_str();
    traj_cmd->add_option("--out", traj_args.out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 64;
    }

    try {
        if (pmd_cmd->parsed()) return run_pmd(pmd_args);
        if (pair_cmd->parsed()) return run_pair(pair_args);
        if (times_cmd->parsed()) return run_times(times_args);
        if (scan_cmd->parsed()) return run_scan(scan_args);
        if (stokes_cmd->parsed()) return run_stokes(stokes_args);
        if (estimate_cmd->parsed()) return run_estimate(estimate_args);
        if (traj_cmd->parsed()) return run_traj(traj_args);
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 64;
}
