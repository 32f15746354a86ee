#ifndef ORBHOLO_ANALYSIS_HPP
#define ORBHOLO_ANALYSIS_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "orbholo/cqsfa.hpp"
#include "orbholo/field.hpp"
#include "orbholo/potential.hpp"

namespace orbholo {

enum class Method { sfa, cqsfa };
enum class ScanAxis { final_px, initial_px };

// Drift-momentum center -A(t) of the tunneling-equation circles at real
// time t; the most probable final momentum for ionization at t.
Vec2 distribution_center_at(const LaserField& field, double t);

// Field-peak specialization w t' = (2n+1) pi/2:
//   (0, -eps 2 sqrt(up)/sqrt(1+eps^2) (-1)^n).
Vec2 distribution_centers(const LaserField& field, int peak_index);

// Transverse Gaussian width of the ionized wavepacket,
//   sigma = sqrt( w sqrt(up) / (sqrt(1+eps^2) sqrt(2 ip)) ).
double transverse_width(const LaserField& field, const TargetAtom& atom);

// Ellipticity at which the half-cycle centers are overlap_multiplier
// transverse widths apart, beyond which intra-cycle fringes wash out:
// the positive root of 4 eps sqrt(up)/sqrt(1+eps^2) = m sigma(eps).
// The default multiplier 5 gives the closed form
//   (5 sqrt(w)/(32 sqrt(ip up))) sqrt(25 w + sqrt(2048 ip up + 625 w^2)).
double critical_ellipticity(const LaserField& field, const TargetAtom& atom,
                            double overlap_multiplier = 5.0);

struct ScanCurve {
    Method method = Method::sfa;
    OrbitLabel orbit = OrbitLabel::a;
    ScanAxis axis = ScanAxis::final_px;
    // Abscissa per sample: p_fx, or the solution's p_0x for the
    // initial-momentum parameterization.
    std::vector<double> param;
    // Im t' per sample; NaN marks unresolved samples (continuation gaps).
    std::vector<double> im_t;
};

// Im t' of one orbit along the minor axis p_fz = 0.  The analytic engine
// serves orbits a and b directly; the trajectory engine resolves all four
// letters by angular continuation (opts apply there only).
ScanCurve imaginary_time_scan(Method method, const LaserField& field,
                              const TargetAtom& atom, OrbitLabel orbit,
                              ScanAxis axis, const std::vector<double>& pfx_samples,
                              const CqsfaOptions& opts = {});

// All four orbit letters of a trajectory-engine scan in one continuation
// pass (imaginary_time_scan re-solves per orbit; batch callers use this).
std::array<ScanCurve, 4> imaginary_time_scan_all(const LaserField& field,
                                                 const TargetAtom& atom,
                                                 ScanAxis axis,
                                                 const std::vector<double>& pfx_samples,
                                                 const CqsfaOptions& opts = {});

// Columns "p  im_t" with '#' key=value metadata lines; gaps print as nan.
void write_scan_curve(std::ostream& os, const ScanCurve& curve,
                      const std::vector<std::pair<std::string, std::string>>& metadata);

// Michelson contrast of the oscillatory part of a probability cut:
// the cut is divided by a moving-average envelope (window of one fringe
// period, estimated from the extremum spacing unless window_hint > 0 gives
// it directly), then windowed (max-min)/(max+min) values are averaged with
// intensity weights.  Cuts with fewer than two full oscillations return 0.
// Throws domain_error for cuts shorter than 8 samples, negative or
// non-finite entries, or an all-zero cut (undefined visibility).
double fringe_visibility(const std::vector<double>& cut, int window_hint = 0);

} // namespace orbholo

#endif
