#include "orbholo/pmd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "orbholo/errors.hpp"
#include "orbholo/sfa_amplitude.hpp"

namespace orbholo {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr cplx kNanAmp{std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN()};

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void run_partitioned(int count, int threads, const std::function<void(int, int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(body, begin, end);
    }
    for (auto& th : pool) th.join();
}

void fill_sfa(const LaserField& field, const TargetAtom& atom, PMDGrid& grid,
              int n_cycles, const PmdOptions& opts) {
    for (const OrbitLabel o : grid.orbit_set)
        if (o != OrbitLabel::a && o != OrbitLabel::b)
            throw domain_error("the analytic engine provides orbits a and b only");

    const int n_orbits = static_cast<int>(grid.orbit_set.size());
    run_partitioned(grid.cells(), opts.threads, [&](int begin, int end) {
        for (int c = begin; c < end; ++c) {
            const int i = c % grid.axes.n_z;
            const int j = c / grid.axes.n_z;
            const Vec2 p{grid.pz(i), grid.px(j)};
            const auto contributions = sfa_orbit_contributions(
                field, atom, p, grid.orbit_set, n_cycles, opts.model, opts.stokes);
            cplx total(0.0, 0.0);
            bool flagged = false;
            for (int k = 0; k < n_orbits; ++k) {
                cplx amp(0.0, 0.0);
                for (const auto& contrib : contributions) {
                    if (contrib.label != grid.orbit_set[k]) continue;
                    flagged = flagged || contrib.stokes_discarded;
                    if (!contrib.stokes_discarded) amp = contrib.amplitude;
                    break;
                }
                grid.amplitudes[k][c] = amp;
                total += amp;
            }
            grid.probability[c] = std::norm(total);
            grid.masked[c] = 0;
            grid.stokes_flag[c] = flagged ? 1 : 0;
        }
    });
}

void fill_cqsfa(const LaserField& field, const TargetAtom& atom, PMDGrid& grid,
                int n_cycles, const PmdOptions& opts) {
    const GridAxes& ax = grid.axes;
    const GridSolutions sols =
        solve_grid(field, atom, ax.pz_min, ax.pz_max, ax.n_z, ax.px_min, ax.px_max,
                   ax.n_x, opts.cqsfa);

    const int n_orbits = static_cast<int>(grid.orbit_set.size());
    int masked_cells = 0;
    for (int c = 0; c < grid.cells(); ++c) {
        const int i = c % ax.n_z;
        const int j = c / ax.n_z;
        const Vec2 p{grid.pz(i), grid.px(j)};

        std::vector<const OrbitSolution*> here;
        for (int k = 0; k < 4; ++k) {
            const auto& slot = sols.by_class[k][c];
            if (!slot) continue;
            bool duplicate = false;
            for (const OrbitSolution* seen : here) {
                if (std::abs(slot->t_prime - seen->t_prime) < 1e-9 &&
                    norm(slot->p0 - seen->p0) < 1e-9) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) here.push_back(&*slot);
        }

        const cplx cycles = cycle_sum_factor(field, atom, p, n_cycles);
        cplx total(0.0, 0.0);
        bool gap = false;
        for (int k = 0; k < n_orbits; ++k) {
            cplx amp(0.0, 0.0);
            bool found = false;
            for (const OrbitSolution* sol : here) {
                if (sol->orbit_label != grid.orbit_set[k]) continue;
                amp += cqsfa_orbit_term(field, atom, *sol, opts.model);
                found = true;
            }
            if (!found) {
                grid.amplitudes[k][c] = kNanAmp;
                gap = true;
            } else {
                grid.amplitudes[k][c] = amp * cycles;
                total += amp * cycles;
            }
        }
        grid.masked[c] = gap ? 1 : 0;
        grid.stokes_flag[c] = 0;
        grid.probability[c] = gap ? kNan : std::norm(total);
        if (gap) ++masked_cells;
    }

    const double fraction = static_cast<double>(masked_cells) / grid.cells();
    if (fraction > 0.05 || sols.coverage_warning)
        grid.metadata.emplace_back("coverage_warning",
                                   "masked cell fraction " + format17(fraction));
}

bool parse_header_line(const std::string& line, std::string& key, std::string& value) {
    // Header lines read "# key = value".
    std::size_t pos = 1;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t sep = line.find(" = ", pos);
    if (sep == std::string::npos || sep == pos) return false;
    key = line.substr(pos, sep - pos);
    value = line.substr(sep + 3);
    return true;
}

double parse_double(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw domain_error("malformed number '" + text + "'");
    return v;
}

int parse_int(const std::string& text, const char* what) {
    const double v = parse_double(text);
    const int n = static_cast<int>(v);
    if (static_cast<double>(n) != v)
        throw domain_error(std::string("expected an integer for ") + what);
    return n;
}

} // namespace

double PMDGrid::pz(int i) const {
    return axes.pz_min + (axes.pz_max - axes.pz_min) * i / (axes.n_z - 1);
}

double PMDGrid::px(int j) const {
    return axes.px_min + (axes.px_max - axes.px_min) * j / (axes.n_x - 1);
}

PMDGrid build_grid(const GridAxes& axes, const std::vector<OrbitLabel>& orbit_set) {
    if (axes.n_z < 2 || axes.n_x < 2)
        throw domain_error("grid needs at least 2 cells per axis");
    if (!(axes.pz_max > axes.pz_min) || !(axes.px_max > axes.px_min))
        throw domain_error("grid bounds must be ordered");
    if (orbit_set.empty()) throw domain_error("orbit set must not be empty");
    for (std::size_t i = 0; i < orbit_set.size(); ++i)
        for (std::size_t j = i + 1; j < orbit_set.size(); ++j)
            if (orbit_set[i] == orbit_set[j])
                throw domain_error("orbit set must not repeat a label");

    PMDGrid grid;
    grid.axes = axes;
    grid.orbit_set = orbit_set;
    const std::size_t cells = static_cast<std::size_t>(axes.n_z) * axes.n_x;
    grid.amplitudes.assign(orbit_set.size(), std::vector<cplx>(cells, kNanAmp));
    grid.probability.assign(cells, kNan);
    grid.masked.assign(cells, 1);
    grid.stokes_flag.assign(cells, 0);
    return grid;
}

void compute_pmd(Method method, const LaserField& field, const TargetAtom& atom,
                 PMDGrid& grid, int n_cycles, const PmdOptions& opts) {
    if (n_cycles < 1) throw domain_error("n_cycles must be positive");
    if (grid.scale != "raw")
        throw domain_error("compute_pmd expects an unnormalized grid");
    if (method == Method::sfa)
        fill_sfa(field, atom, grid, n_cycles, opts);
    else
        fill_cqsfa(field, atom, grid, n_cycles, opts);
}

std::vector<double> pair_interference(const PMDGrid& grid, OrbitLabel first,
                                      OrbitLabel second) {
    int ka = -1;
    int kb = -1;
    for (std::size_t k = 0; k < grid.orbit_set.size(); ++k) {
        if (grid.orbit_set[k] == first) ka = static_cast<int>(k);
        if (grid.orbit_set[k] == second) kb = static_cast<int>(k);
    }
    if (ka < 0 || kb < 0)
        throw domain_error("pair interference needs both orbits in the grid");
    std::vector<double> out(grid.probability.size());
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = std::norm(grid.amplitudes[ka][c] + grid.amplitudes[kb][c]);
    return out;
}

void normalize_log(PMDGrid& grid, GridScale scale, double floor_decades) {
    const std::string target = scale == GridScale::linear ? "linear" : "log10";
    if (grid.scale == target) return;
    if (grid.scale == "log10")
        throw domain_error("a log-scaled grid cannot be rescaled");
    if (!(floor_decades > 0.0)) throw domain_error("floor_decades must be positive");

    if (grid.scale == "raw") {
        double peak = 0.0;
        for (double v : grid.probability)
            if (std::isfinite(v)) peak = std::max(peak, v);
        if (peak <= 0.0)
            throw domain_error("cannot normalize an all-zero distribution");
        for (double& v : grid.probability) v /= peak;
        grid.metadata.emplace_back("norm_max", format17(peak));
        grid.scale = "linear";
    }
    if (target == "log10") {
        for (double& v : grid.probability) {
            if (!std::isfinite(v)) continue;
            v = v > 0.0 ? std::max(std::log10(v), -floor_decades) : -floor_decades;
        }
        grid.scale = "log10";
    }
}

void write_pmd(std::ostream& os, const PMDGrid& grid) {
    os << "# format_version = 1\n";
    os << "# pz_min = " << format17(grid.axes.pz_min) << "\n";
    os << "# pz_max = " << format17(grid.axes.pz_max) << "\n";
    os << "# n_z = " << grid.axes.n_z << "\n";
    os << "# px_min = " << format17(grid.axes.px_min) << "\n";
    os << "# px_max = " << format17(grid.axes.px_max) << "\n";
    os << "# n_x = " << grid.axes.n_x << "\n";
    std::string orbits;
    for (const OrbitLabel o : grid.orbit_set) orbits += orbit_name(o);
    os << "# orbits = " << orbits << "\n";
    os << "# scale = " << grid.scale << "\n";
    for (const auto& [key, value] : grid.metadata)
        os << "# " << key << " = " << value << "\n";

    std::string line;
    for (int c = 0; c < grid.cells(); ++c) {
        const int i = c % grid.axes.n_z;
        const int j = c / grid.axes.n_z;
        line.clear();
        line += format17(grid.pz(i));
        line += ',';
        line += format17(grid.px(j));
        line += ',';
        line += format17(grid.probability[c]);
        for (std::size_t k = 0; k < grid.orbit_set.size(); ++k) {
            line += ',';
            line += format17(grid.amplitudes[k][c].real());
            line += ',';
            line += format17(grid.amplitudes[k][c].imag());
        }
        line += '\n';
        os << line;
    }
}

PMDGrid read_pmd(std::istream& is) {
    GridAxes axes;
    std::vector<OrbitLabel> orbit_set;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string scale = "raw";
    bool version_seen = false;
    bool shape_seen[6] = {false, false, false, false, false, false};

    std::string line;
    std::vector<std::string> body;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') {
            body.push_back(line);
            continue;
        }
        std::string key;
        std::string value;
        if (!parse_header_line(line, key, value))
            throw domain_error("malformed header line: " + line);
        if (key == "format_version") {
            if (parse_int(value, "format_version") != 1)
                throw domain_error("unsupported format_version " + value);
            version_seen = true;
        } else if (key == "pz_min") {
            axes.pz_min = parse_double(value);
            shape_seen[0] = true;
        } else if (key == "pz_max") {
            axes.pz_max = parse_double(value);
            shape_seen[1] = true;
        } else if (key == "n_z") {
            axes.n_z = parse_int(value, "n_z");
            shape_seen[2] = true;
        } else if (key == "px_min") {
            axes.px_min = parse_double(value);
            shape_seen[3] = true;
        } else if (key == "px_max") {
            axes.px_max = parse_double(value);
            shape_seen[4] = true;
        } else if (key == "n_x") {
            axes.n_x = parse_int(value, "n_x");
            shape_seen[5] = true;
        } else if (key == "orbits") {
            for (char ch : value) orbit_set.push_back(orbit_from_name(std::string(1, ch)));
        } else if (key == "scale") {
            scale = value;
        } else {
            metadata.emplace_back(key, value);
        }
    }
    if (!version_seen) throw domain_error("missing format_version header");
    for (bool seen : shape_seen)
        if (!seen) throw domain_error("incomplete grid shape header");
    if (scale != "raw" && scale != "linear" && scale != "log10")
        throw domain_error("unknown scale '" + scale + "'");

    PMDGrid grid = build_grid(axes, orbit_set);
    grid.metadata = std::move(metadata);
    grid.scale = scale;
    if (static_cast<int>(body.size()) != grid.cells())
        throw domain_error("cell count does not match the grid shape");

    const std::size_t fields = 3 + 2 * grid.orbit_set.size();
    std::vector<double> row(fields);
    for (int c = 0; c < grid.cells(); ++c) {
        const char* cursor = body[c].c_str();
        for (std::size_t f = 0; f < fields; ++f) {
            char* end = nullptr;
            row[f] = std::strtod(cursor, &end);
            if (end == cursor)
                throw domain_error("malformed data line: " + body[c]);
            cursor = end;
            if (f + 1 < fields) {
                if (*cursor != ',')
                    throw domain_error("malformed data line: " + body[c]);
                ++cursor;
            }
        }
        grid.probability[c] = row[2];
        bool gap = false;
        for (std::size_t k = 0; k < grid.orbit_set.size(); ++k) {
            grid.amplitudes[k][c] = cplx(row[3 + 2 * k], row[4 + 2 * k]);
            gap = gap || std::isnan(row[3 + 2 * k]);
        }
        grid.masked[c] = gap ? 1 : 0;
        bool discarded = false;
        for (std::size_t k = 0; k < grid.orbit_set.size(); ++k)
            discarded = discarded || grid.amplitudes[k][c] == cplx(0.0, 0.0);
        grid.stokes_flag[c] = !gap && discarded ? 1 : 0;
    }
    return grid;
}

} // namespace orbholo
