#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kld/grid.hpp"

namespace kld {

/// Circular defect. Positive depth moves the reflecting surface away from the
/// sensor (a hole reads deeper than the nominal standoff).
struct HoleSpec {
    double center_axial = 0.0; // mm along the pipe axis
    double center_circ = 0.0;  // degrees around the circumference
    double diameter = 10.0;    // mm
    double depth = 2.0;        // mm, <= wall thickness
};

/// Full-circumference girth weld; protrudes toward the sensor, so readings
/// across the band drop by `depth`.
struct WeldSpec {
    double center_axial = 0.0; // mm
    double width = 10.0;       // mm
    double depth = 2.0;        // mm
};

struct SynthConfig {
    double pipe_inner_diameter = 400.0; // mm
    double wall_thickness = 2.0;        // mm
    double axial_length = 1000.0;       // mm of scanned pipe section
    double nominal_standoff = 100.0;    // mm sensor-to-surface
    double snr_db = 50.0;               // infinity disables noise
    double quantization = 0.1;          // mm sensor resolution
    double axial_pitch = 1.0;           // mm between axial samples
    double circ_pitch = 1.0;            // degrees between circumferential samples
    std::vector<HoleSpec> holes;
    std::optional<WeldSpec> weld;
    std::uint64_t seed = 1;

    std::size_t grid_rows() const;
    std::size_t grid_cols() const;
    /// Arc length of one degree at the inner surface.
    double mm_per_degree() const;

    /// Checks ranges, containment in the scanned extent and pairwise
    /// hole/weld overlap; throws std::invalid_argument on violations.
    void validate() const;
};

enum class CellKind : std::uint8_t { clean = 0, hole = 1, weld = 2 };

/// Ground-truth footprint of a configuration: which cells a hole or the weld
/// band covers. Test-harness data; the filter never sees it.
struct FootprintMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<CellKind> cells;

    CellKind at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
    std::size_t count(CellKind kind) const;
};

FootprintMask footprint_mask(const SynthConfig& config);

/// Share of grid cells covered by hole footprints.
double anomaly_cell_fraction(const SynthConfig& config);

/// True when sample (i, j) lies inside the given hole footprint.
bool in_hole(const SynthConfig& config, const HoleSpec& hole, std::size_t i,
             std::size_t j);

/// Deterministic scan synthesis: nominal standoff, plus hole/weld offsets,
/// plus zero-mean Gaussian noise with sigma = standoff * 10^(-snr_db/20),
/// quantized to the sensor resolution. Cells consume the noise stream in
/// row-major order; identical configs produce bit-identical grids.
ScanGrid generate_scan(const SynthConfig& config);

double noise_sigma(const SynthConfig& config);

/// The canonical ten-hole test layout: five through holes and five blind
/// holes with 5/10/15 mm diameters on a staggered lattice, plus a girth weld
/// at mid-span. Exact coordinates are a convention of this library.
SynthConfig paper_layout();

/// `config` minus every anomaly (holes and weld); the pure-noise companion
/// used for baseline studies.
SynthConfig strip_anomalies(const SynthConfig& config);

/// Copies of holes[prototype] tiled over free lattice sites until the hole
/// cell share reaches `target_fraction` (or sites run out; callers read the
/// achieved share via anomaly_cell_fraction). Existing holes are kept.
SynthConfig with_filler_holes(const SynthConfig& base, double target_fraction,
                              std::size_t prototype);

SynthConfig load_synth_config(const std::filesystem::path& path);
void save_synth_config(const SynthConfig& config,
                       const std::filesystem::path& path);

/// Portable stream of standard Gaussian deviates: mt19937_64 feeding a
/// Box-Muller transform, two raw outputs per deviate, no pair caching.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    std::mt19937_64 engine_;
};

} // namespace kld
