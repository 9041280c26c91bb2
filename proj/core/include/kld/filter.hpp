#pragma once

#include <cstddef>
#include <filesystem>

#include "kld/divergence.hpp"
#include "kld/field.hpp"
#include "kld/grid.hpp"

namespace kld {

/// Window and binning parameters of the local filter. Defaults follow the
/// reference pipe-inspection setup: a 121 x 3 window and 67/60 bins for the
/// baseline and local distributions.
struct FilterConfig {
    std::size_t axial_half = 60;    // l: window rows each side of the center
    std::size_t circ_half = 1;      // w: window columns each side
    std::size_t baseline_bins = 67; // k: bins of the baseline distribution
    std::size_t local_bins = 60;    // K: bins of each window distribution
    LogBase log_base = LogBase::natural;
    Smoothing smoothing = Smoothing::skip();
    unsigned threads = 0; // 0 = hardware concurrency

    void validate() const;
};

/// Counters captured while filling a map; negative values can appear when the
/// baseline and local bin grids are misaligned and are reported rather than
/// clamped.
struct MapDiagnostics {
    std::size_t negative_values = 0;
    std::size_t infinite_values = 0;
    double min_value = 0.0;
};

/// Per-sample divergence (or entropy) map, same shape as the source grid.
struct KldMap {
    Field2D values;
    double axial_pitch = 1.0;
    double circ_pitch = 1.0;
    bool periodic_circ = true;
    FilterConfig config;
    MapDiagnostics diagnostics;

    std::size_t rows() const { return values.rows; }
    std::size_t cols() const { return values.cols; }
    double at(std::size_t i, std::size_t j) const { return values.at(i, j); }
};

/// Maps every sample to the divergence between its window distribution
/// (local_bins bins over the window's own range, clipped windows normalized
/// by their actual cardinality) and `baseline`. Deterministic and
/// independent of the worker partitioning.
KldMap local_kld_map(const ScanGrid& grid, const Pmf& baseline,
                     const FilterConfig& config);

/// Peer benchmark filter: Shannon entropy of the same window distributions.
KldMap local_entropy_map(const ScanGrid& grid, const FilterConfig& config);

/// Map files reuse the grid CSV/binary layout with quantization 0 (values are
/// written shortest-round-trip, so re-loading is bit-exact).
void save_map(const KldMap& map, const std::filesystem::path& path,
              GridFormat format);

} // namespace kld
