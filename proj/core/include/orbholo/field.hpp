#ifndef ORBHOLO_FIELD_HPP
#define ORBHOLO_FIELD_HPP

#include <complex>

namespace orbholo {

using cplx = std::complex<double>;

// Momentum-plane vector; z is the major polarization axis, x the minor one.
// The dynamics is confined to this plane.
struct Vec2 {
    double z = 0.0;
    double x = 0.0;
};

struct CVec2 {
    cplx z{0.0, 0.0};
    cplx x{0.0, 0.0};
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.z + b.z, a.x + b.x}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.z - b.z, a.x - b.x}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.z, s * a.x}; }
inline double dot(Vec2 a, Vec2 b) { return a.z * b.z + a.x * b.x; }
inline double cross(Vec2 a, Vec2 b) { return a.z * b.x - a.x * b.z; }
inline double norm(Vec2 a) { return std::sqrt(a.z * a.z + a.x * a.x); }

// Monochromatic elliptically polarized laser field in the dipole
// approximation, all quantities in atomic units.
//
//   A(t) = (2 sqrt(up) / sqrt(1 + eps^2)) [ cos(w t + phi) e_z + eps sin(w t + phi) e_x ]
//   E(t) = -dA/dt
//
// The ponderomotive energy up is held fixed when eps varies, so field
// strength is rescaled by the ellipticity normalization.
class LaserField {
public:
    // up: ponderomotive energy (hartree), omega: angular frequency
    // (1/a.u. time), eps: ellipticity in [0,1], phi: unit-cell offset
    // phase (radians, normalized into [0, 2 pi)).
    LaserField(double up, double omega, double eps, double phi = 0.0);

    // Conversion from experimental parameters: intensity in W/cm^2,
    // wavelength in nm.  up = E0^2/(4 omega^2) with E0 = sqrt(I/I_au).
    static LaserField from_experiment(double intensity_w_cm2, double wavelength_nm,
                                      double eps, double phi = 0.0);

    double up() const { return up_; }
    double omega() const { return omega_; }
    double eps() const { return eps_; }
    double phi() const { return phi_; }

    // Quiver-momentum amplitude 2 sqrt(up)/sqrt(1+eps^2).
    double a0() const { return a0_; }
    // Peak electric-field magnitude omega * a0 (on the major axis).
    double e_max() const { return omega_ * a0_; }
    double period() const;

    // A(t), analytically continued to complex time.
    CVec2 vector_potential(cplx t) const;
    // E(t) = -dA/dt, analytically continued to complex time.
    CVec2 electric_field(cplx t) const;
    // Antiderivative of A(t) (excursion integral), zero integration constant.
    CVec2 excursion(cplx t) const;

    Vec2 vector_potential(double t) const;
    Vec2 electric_field(double t) const;
    Vec2 excursion(double t) const;

private:
    double up_;
    double omega_;
    double eps_;
    double phi_;
    double a0_;
};

} // namespace orbholo

#endif
