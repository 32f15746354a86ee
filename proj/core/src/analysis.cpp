#include "orbholo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "orbholo/errors.hpp"
#include "orbholo/sfa_times.hpp"

namespace orbholo {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const char* method_name(Method m) { return m == Method::sfa ? "sfa" : "cqsfa"; }

const char* axis_name(ScanAxis a) {
    return a == ScanAxis::final_px ? "final_px" : "initial_px";
}

ScanCurve curve_from_axis_scan(const AxisScan& scan, Method method, OrbitLabel orbit,
                               ScanAxis axis) {
    ScanCurve out;
    out.method = method;
    out.orbit = orbit;
    out.axis = axis;
    const auto& column = scan.by_label[static_cast<int>(orbit)];
    out.param.reserve(scan.p_fx.size());
    out.im_t.reserve(scan.p_fx.size());
    for (std::size_t i = 0; i < scan.p_fx.size(); ++i) {
        const auto& sol = column[i];
        if (axis == ScanAxis::final_px) {
            out.param.push_back(scan.p_fx[i]);
        } else {
            out.param.push_back(sol ? sol->p0.x : kNan);
        }
        out.im_t.push_back(sol ? sol->t_prime.imag() : kNan);
    }
    return out;
}

} // namespace

Vec2 distribution_center_at(const LaserField& field, double t) {
    const Vec2 a = field.vector_potential(t);
    return {-a.z, -a.x};
}

Vec2 distribution_centers(const LaserField& field, int peak_index) {
    const double parity = (peak_index % 2 == 0) ? 1.0 : -1.0;
    return {0.0, -field.eps() * field.a0() * parity};
}

double transverse_width(const LaserField& field, const TargetAtom& atom) {
    const double stretch = std::sqrt(1.0 + field.eps() * field.eps());
    return std::sqrt(field.omega() * std::sqrt(field.up()) /
                     (stretch * std::sqrt(2.0 * atom.ip())));
}

double critical_ellipticity(const LaserField& field, const TargetAtom& atom,
                            double overlap_multiplier) {
    if (!(overlap_multiplier > 0.0))
        throw domain_error("overlap_multiplier must be positive");
    // Squaring the separation condition twice turns it into a quadratic in
    // eps^2: 256 eps^4 = k (1 + eps^2) with k = m^4 w^2 / (2 ip up).
    const double m2 = overlap_multiplier * overlap_multiplier;
    const double w = field.omega();
    const double k = m2 * m2 * w * w / (2.0 * atom.ip() * field.up());
    const double eps_sq = (k + std::sqrt(k * (k + 1024.0))) / 512.0;
    return std::sqrt(eps_sq);
}

ScanCurve imaginary_time_scan(Method method, const LaserField& field,
                              const TargetAtom& atom, OrbitLabel orbit, ScanAxis axis,
                              const std::vector<double>& pfx_samples,
                              const CqsfaOptions& opts) {
    if (method == Method::cqsfa) {
        const AxisScan scan = minor_axis_scan(field, atom, pfx_samples, opts);
        return curve_from_axis_scan(scan, method, orbit, axis);
    }
    if (orbit == OrbitLabel::c || orbit == OrbitLabel::d)
        throw domain_error("the analytic engine resolves only orbits a and b");
    // Without the binding potential the initial and final transverse momenta
    // coincide, so both axis parameterizations yield the same curve.
    ScanCurve out;
    out.method = method;
    out.orbit = orbit;
    out.axis = axis;
    out.param = pfx_samples;
    out.im_t.reserve(pfx_samples.size());
    for (double px : pfx_samples) {
        const Vec2 p{0.0, px};
        const auto pair = grouped_times(field, atom, p, 0);
        // Labels follow the tunnel exit side, matching the trajectory
        // classification in the limit where the momentum is kept: orbit a
        // leaves from z > 0, orbit b from z < 0.  Which saddle group that is
        // flips with the sign of the transverse momentum.
        const bool first_up = tunnel_exit(field, p, pair.first.t_prime).z > 0.0;
        const IonizationSolution& sol =
            ((orbit == OrbitLabel::a) == first_up) ? pair.first : pair.second;
        out.im_t.push_back(sol.t_prime.imag());
    }
    return out;
}

std::array<ScanCurve, 4> imaginary_time_scan_all(const LaserField& field,
                                                 const TargetAtom& atom, ScanAxis axis,
                                                 const std::vector<double>& pfx_samples,
                                                 const CqsfaOptions& opts) {
    const AxisScan scan = minor_axis_scan(field, atom, pfx_samples, opts);
    std::array<ScanCurve, 4> out;
    for (int k = 0; k < 4; ++k)
        out[k] = curve_from_axis_scan(scan, Method::cqsfa, static_cast<OrbitLabel>(k),
                                      axis);
    return out;
}

void write_scan_curve(std::ostream& os, const ScanCurve& curve,
                      const std::vector<std::pair<std::string, std::string>>& metadata) {
    os << "# method = " << method_name(curve.method) << "\n";
    os << "# orbit = " << orbit_name(curve.orbit) << "\n";
    os << "# axis = " << axis_name(curve.axis) << "\n";
    for (const auto& [key, value] : metadata) os << "# " << key << " = " << value << "\n";
    os << "# columns = p im_t\n";
    char line[96];
    for (std::size_t i = 0; i < curve.param.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g  %.17g\n", curve.param[i],
                      curve.im_t[i]);
        os << line;
    }
}

double fringe_visibility(const std::vector<double>& cut, int window_hint) {
    const int n = static_cast<int>(cut.size());
    if (n < 8) throw domain_error("visibility needs at least 8 samples");
    double peak = 0.0;
    for (double v : cut) {
        if (!std::isfinite(v) || v < 0.0)
            throw domain_error("visibility input must be finite and nonnegative");
        peak = std::max(peak, v);
    }
    if (peak == 0.0) throw domain_error("visibility of an all-zero cut is undefined");

    // Light smoothing so single-sample wiggles do not count as fringes.
    std::vector<double> smooth(cut);
    for (int i = 1; i + 1 < n; ++i)
        smooth[i] = (cut[i - 1] + cut[i] + cut[i + 1]) / 3.0;

    std::vector<int> extrema;
    for (int i = 1; i + 1 < n; ++i) {
        const bool peak_at = smooth[i] > smooth[i - 1] && smooth[i] > smooth[i + 1];
        const bool dip_at = smooth[i] < smooth[i - 1] && smooth[i] < smooth[i + 1];
        if (peak_at || dip_at) extrema.push_back(i);
    }
    // Fewer than four alternating extrema means under two full oscillations:
    // a smooth envelope (isolated humps included), not a fringe pattern.
    if (extrema.size() < 4) return 0.0;

    int window = window_hint;
    if (window <= 0) {
        std::vector<int> gaps;
        for (std::size_t k = 1; k < extrema.size(); ++k)
            gaps.push_back(extrema[k] - extrema[k - 1]);
        std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
        window = 2 * gaps[gaps.size() / 2];
    }
    window = std::clamp(window, 3, n);
    if (window % 2 == 0) ++window;

    // Envelope by centered moving average; division exposes the modulation.
    const int half = window / 2;
    std::vector<double> ratio(n);
    const double floor_value = 1e-12 * peak;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += cut[j];
        const double envelope = sum / static_cast<double>(hi - lo + 1);
        ratio[i] = cut[i] / std::max(envelope, floor_value);
    }

    double weighted = 0.0;
    double weight_total = 0.0;
    for (int start = 0; start + window <= n; ++start) {
        double lo = ratio[start], hi = ratio[start];
        double weight = 0.0;
        for (int j = start; j < start + window; ++j) {
            lo = std::min(lo, ratio[j]);
            hi = std::max(hi, ratio[j]);
            weight += cut[j];
        }
        if (hi + lo <= 0.0) continue;
        weighted += weight * (hi - lo) / (hi + lo);
        weight_total += weight;
    }
    if (weight_total <= 0.0) return 0.0;
    return std::clamp(weighted / weight_total, 0.0, 1.0);
}

} // namespace orbholo
