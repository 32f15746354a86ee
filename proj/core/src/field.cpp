#include "orbholo/field.hpp"

#include <cmath>

#include "orbholo/errors.hpp"
#include "orbholo/units.hpp"

namespace orbholo {

LaserField::LaserField(double up, double omega, double eps, double phi)
    : up_(up), omega_(omega), eps_(eps), phi_(phi) {
    if (!(up > 0.0)) throw domain_error("LaserField: up must be positive");
    if (!(omega > 0.0)) throw domain_error("LaserField: omega must be positive");
    if (!(eps >= 0.0 && eps <= 1.0)) throw domain_error("LaserField: eps must lie in [0,1]");
    if (!std::isfinite(phi)) throw domain_error("LaserField: phi must be finite");
    const double two_pi = 2.0 * units::pi;
    phi_ = std::fmod(phi, two_pi);
    if (phi_ < 0.0) phi_ += two_pi;
    a0_ = 2.0 * std::sqrt(up_) / std::sqrt(1.0 + eps_ * eps_);
}

LaserField LaserField::from_experiment(double intensity_w_cm2, double wavelength_nm,
                                       double eps, double phi) {
    if (!(intensity_w_cm2 > 0.0)) throw domain_error("from_experiment: intensity must be positive");
    if (!(wavelength_nm > 0.0)) throw domain_error("from_experiment: wavelength must be positive");
    const double omega = units::omega_nm / wavelength_nm;
    const double e0 = std::sqrt(intensity_w_cm2 / units::intensity_au);
    const double up = e0 * e0 / (4.0 * omega * omega);
    return LaserField(up, omega, eps, phi);
}

double LaserField::period() const { return 2.0 * units::pi / omega_; }

CVec2 LaserField::vector_potential(cplx t) const {
    const cplx ph = omega_ * t + phi_;
    return {a0_ * std::cos(ph), eps_ * a0_ * std::sin(ph)};
}

CVec2 LaserField::electric_field(cplx t) const {
    const cplx ph = omega_ * t + phi_;
    return {omega_ * a0_ * std::sin(ph), -eps_ * omega_ * a0_ * std::cos(ph)};
}

CVec2 LaserField::excursion(cplx t) const {
    const cplx ph = omega_ * t + phi_;
    return {a0_ / omega_ * std::sin(ph), -eps_ * a0_ / omega_ * std::cos(ph)};
}

Vec2 LaserField::vector_potential(double t) const {
    const double ph = omega_ * t + phi_;
    return {a0_ * std::cos(ph), eps_ * a0_ * std::sin(ph)};
}

Vec2 LaserField::electric_field(double t) const {
    const double ph = omega_ * t + phi_;
    return {omega_ * a0_ * std::sin(ph), -eps_ * omega_ * a0_ * std::cos(ph)};
}

Vec2 LaserField::excursion(double t) const {
    const double ph = omega_ * t + phi_;
    return {a0_ / omega_ * std::sin(ph), -eps_ * a0_ / omega_ * std::cos(ph)};
}

} // namespace orbholo
