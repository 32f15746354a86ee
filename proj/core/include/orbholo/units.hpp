#ifndef ORBHOLO_UNITS_HPP
#define ORBHOLO_UNITS_HPP

namespace orbholo::units {

// Atomic unit of intensity in W/cm^2.  Fixed constant so experiment-to-a.u.
// conversions are bit-reproducible.
inline constexpr double intensity_au = 3.50944758e16;

// omega(a.u.) * wavelength(nm) for a photon: omega = omega_nm / lambda_nm.
inline constexpr double omega_nm = 45.5633525316;

inline constexpr double pi = 3.14159265358979323846;

} // namespace orbholo::units

#endif
