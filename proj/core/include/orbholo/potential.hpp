#ifndef ORBHOLO_POTENTIAL_HPP
#define ORBHOLO_POTENTIAL_HPP

#include <optional>

#include "orbholo/field.hpp"

namespace orbholo {

// Smooth truncation window for the Coulomb tail: full strength below r0,
// cos^7 taper on [r0, l), zero beyond l.  Radii in bohr.
struct Truncation {
    double r0 = 0.0;
    double l = 0.0;
};

struct Mat2 {
    // Row-major 2x2: [zz zx; xz xx].
    double zz = 0.0, zx = 0.0, xz = 0.0, xx = 0.0;
};

inline Vec2 mat2_apply(const Mat2& m, Vec2 v) {
    return {m.zz * v.z + m.zx * v.x, m.xz * v.z + m.xx * v.x};
}
inline Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
    return {a.zz * b.zz + a.zx * b.xz, a.zz * b.zx + a.zx * b.xx,
            a.xz * b.zz + a.xx * b.xz, a.xz * b.zx + a.xx * b.xx};
}
inline Mat2 mat2_add(const Mat2& a, const Mat2& b) {
    return {a.zz + b.zz, a.zx + b.zx, a.xz + b.xz, a.xx + b.xx};
}
inline double mat2_det(const Mat2& m) { return m.zz * m.xx - m.zx * m.xz; }

// Single-active-electron target.  V(r) = -z_eff/|r| * f(|r|), with f the
// optional truncation window.  z_eff defaults to 1 (helium SAE asymptotic
// charge); it is configurable because the binding-potential normalization
// admits more than one reading.
class TargetAtom {
public:
    TargetAtom(double ip, double z_eff = 1.0,
               std::optional<Truncation> truncation = std::nullopt);

    double ip() const { return ip_; }
    double z_eff() const { return z_eff_; }
    const std::optional<Truncation>& truncation() const { return truncation_; }

    // Returns a copy with the given truncation window.
    TargetAtom with_truncation(Truncation t) const;
    TargetAtom without_truncation() const;

private:
    double ip_;
    double z_eff_;
    std::optional<Truncation> truncation_;
};

// V(r) in hartree.  Throws singularity_error at |r| = 0.
double potential_value(const TargetAtom& atom, Vec2 r);

// Analytic gradient of V, including the taper product-rule term.
Vec2 potential_gradient(const TargetAtom& atom, Vec2 r);

// Analytic Hessian of V; used for stability-matrix transport.
Mat2 potential_hessian(const TargetAtom& atom, Vec2 r);

// Truncation bounds from the approximate tunnel-exit scale:
// r0 = multiplier * ip/e_max, l = r0 + e_max/(2 omega^2).
Truncation truncation_bounds(const LaserField& field, const TargetAtom& atom,
                             double multiplier);

} // namespace orbholo

#endif
