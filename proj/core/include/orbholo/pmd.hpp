#ifndef ORBHOLO_PMD_HPP
#define ORBHOLO_PMD_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "orbholo/analysis.hpp"
#include "orbholo/cqsfa.hpp"

namespace orbholo {

// Endpoint-inclusive momentum grid: n cell centers from min to max with
// spacing (max - min)/(n - 1) on each axis.
struct GridAxes {
    double pz_min = -2.0;
    double pz_max = 2.0;
    int n_z = 2;
    double px_min = -2.0;
    double px_max = 2.0;
    int n_x = 2;
};

enum class GridScale { linear, log10 };

// Momentum distribution with per-orbit complex partial amplitudes.  Cells
// are row-major with p_z fastest: cell = j * n_z + i for (pz_i, px_j).
struct PMDGrid {
    GridAxes axes;
    std::vector<OrbitLabel> orbit_set;
    // amplitudes[k][cell] is the cycle-summed amplitude of orbit_set[k];
    // Stokes-discarded saddles store exactly 0, unresolved cells store NaN.
    std::vector<std::vector<cplx>> amplitudes;
    // |sum of stored amplitudes|^2 while scale is "raw"; rescaled copies
    // keep the raw amplitudes so interference terms stay recomputable.
    std::vector<double> probability;
    std::vector<unsigned char> masked;      // some requested orbit unresolved
    std::vector<unsigned char> stokes_flag; // a saddle was discarded here
    // Ordered key/value pairs echoed into the '#' header on write.
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string scale = "raw"; // raw | linear | log10

    int cells() const { return axes.n_z * axes.n_x; }
    int cell_index(int i, int j) const { return j * axes.n_z + i; }
    double pz(int i) const;
    double px(int j) const;
};

struct PmdOptions {
    DipoleModel model = DipoleModel::unit;
    StokesHandling stokes = StokesHandling::automatic;
    CqsfaOptions cqsfa{};
    // Worker threads for the analytic fill; never changes results.
    int threads = 1;
};

// Validates axes (n >= 2, max > min) and the orbit set (nonempty, no
// repeats) and allocates NaN-filled storage.
PMDGrid build_grid(const GridAxes& axes, const std::vector<OrbitLabel>& orbit_set);

// Fills amplitudes and probability.  The analytic engine serves orbit sets
// within {a, b} on every cell; the trajectory engine resolves all four
// letters by grid continuation, masking unreached cells.  A masked fraction
// above 5% of cells appends a coverage_warning metadata entry.
void compute_pmd(Method method, const LaserField& field, const TargetAtom& atom,
                 PMDGrid& grid, int n_cycles, const PmdOptions& opts = {});

// |A_first + A_second|^2 per cell from the stored amplitudes; the pair
// (o, o) is 4x the single-orbit probability.  Orbits absent from the grid's
// orbit set throw domain_error.  Masked cells stay NaN.
std::vector<double> pair_interference(const PMDGrid& grid, OrbitLabel first,
                                      OrbitLabel second);

// Rescales probability in place: linear divides by the grid maximum; log10
// additionally takes log10 clamped at -floor_decades.  Requires a positive
// maximum (all-zero grids throw domain_error).  Re-applying the scale a
// grid already has is a no-op, so normalization is idempotent; amplitudes
// are never rescaled.  The divisor is recorded as norm_max metadata.
void normalize_log(PMDGrid& grid, GridScale scale, double floor_decades = 6.0);

// Text format: '#'-prefixed "key = value" header lines (grid shape, orbit
// set, scale, format_version = 1, then the metadata pairs), followed by one
// line per cell "pz,px,prob,re,im[,re,im...]" with 17-significant-digit
// floats, row-major with p_z fastest.  NaN cells serialize as nan markers.
// Identical grids serialize to identical bytes.
void write_pmd(std::ostream& os, const PMDGrid& grid);

// Inverse of write_pmd; throws domain_error on malformed input or an
// unsupported format_version.
PMDGrid read_pmd(std::istream& is);

} // namespace orbholo

#endif
