#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kld/field.hpp"

namespace kld {

enum class GridFormat { csv, binary };

/// Thrown by the grid readers. Each failure mode is a distinct kind and the
/// message names the offending cell where one exists.
class GridParseError : public std::runtime_error {
public:
    enum class Kind {
        io,
        malformed_header,
        ragged_row,
        non_numeric_cell,
        off_lattice_value,
    };

    GridParseError(Kind k, const std::string& msg)
        : std::runtime_error(msg), kind_(k) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// A rectangular scan of proximity readings taken on a cylindrical surface
/// unwrapped to a lattice. Immutable after construction; concurrent reads
/// are safe.
class ScanGrid {
public:
    /// Validates invariants: positive dimensions, positive pitches, and when
    /// quantization > 0 every value on the quantization lattice within 1e-9 mm
    /// (values are canonicalized to exact lattice points on construction).
    ScanGrid(Field2D values, double axial_pitch, double circ_pitch,
             double quantization, bool periodic_circ);

    const Field2D& values() const { return values_; }
    std::size_t rows() const { return values_.rows; }
    std::size_t cols() const { return values_.cols; }
    double at(std::size_t i, std::size_t j) const { return values_.at(i, j); }

    double axial_pitch() const { return axial_pitch_; }
    double circ_pitch() const { return circ_pitch_; }
    double quantization() const { return quantization_; }
    bool periodic_circ() const { return periodic_circ_; }

    bool operator==(const ScanGrid& other) const = default;

private:
    Field2D values_;
    double axial_pitch_;
    double circ_pitch_;
    double quantization_;
    bool periodic_circ_;
};

ScanGrid load_grid(const std::filesystem::path& path, GridFormat format);
void save_grid(const ScanGrid& grid, const std::filesystem::path& path,
               GridFormat format);

/// Guesses csv/binary from the file extension (".bin" -> binary, else csv).
GridFormat format_from_path(const std::filesystem::path& path);

/// Readings inside the (2l+1) x (2w+1) window centered at (i, j), 0-based.
/// The window wraps in j when the grid is circumferentially periodic (never
/// duplicating a column) and is clipped at the grid edge otherwise and along
/// the axial direction, so the result may hold fewer than (2l+1)(2w+1)
/// readings near boundaries.
std::vector<double> window_subset(const ScanGrid& grid, std::size_t i,
                                  std::size_t j, std::size_t l, std::size_t w);

/// Allocation-free variant used by the per-point filters; appends to `out`
/// after clearing it.
void window_subset_into(const ScanGrid& grid, std::size_t i, std::size_t j,
                        std::size_t l, std::size_t w, std::vector<double>& out);

/// Snaps v onto the quantization lattice q. For decimal lattices (1/q integral)
/// the result is the correctly rounded decimal value, so text round-trips are
/// bit-exact.
double quantize_to(double v, double q);

} // namespace kld
