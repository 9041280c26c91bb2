#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kld {

/// Equal-width histogram over a reading sample. The sample extremes become
/// the outer edges; a value equal to the maximum lands in the last bin. A
/// sample of identical values is degenerate: all counts in bin 0 and a zero
/// bin width.
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    double bin_width = 0.0;
    std::vector<std::uint64_t> counts;
    /// Smallest sample that fell into each bin; NaN for empty bins.
    std::vector<double> bin_min;
    std::uint64_t total = 0;

    std::size_t bins() const { return counts.size(); }
    bool degenerate() const { return bin_width == 0.0; }

    /// Bin index of x, or -1 when x lies outside [lo, hi].
    std::ptrdiff_t bin_of(double x) const;

    /// Bin midpoint.
    double midpoint(std::size_t n) const;

    /// The bin element at which other distributions are evaluated: the
    /// smallest sample of an occupied bin, the midpoint otherwise (synthetic
    /// histograms carry no samples).
    double representative(std::size_t n) const;
};

/// Probability mass function derived from a histogram, with per-bin densities
/// (mass / bin width) so distributions binned on different grids can be
/// compared.
struct Pmf {
    Histogram hist;
    std::vector<double> mass;
    std::vector<double> density;

    std::size_t bins() const { return mass.size(); }
    bool degenerate() const { return hist.degenerate(); }
    double lo() const { return hist.lo; }
    double hi() const { return hist.hi; }
    double bin_width() const { return hist.bin_width; }

    /// Density of the bin containing x; 0 outside the support. A degenerate
    /// Pmf is a point mass: infinite density at lo, 0 elsewhere.
    double density_at(double x) const;

    /// Probability mass of the bin containing x; 0 outside the support.
    double mass_at(double x) const;

    /// Builds a Pmf directly from bin masses on [lo, hi]; counts carry no
    /// provenance. Meant for synthetic distributions in tests and studies.
    static Pmf from_masses(double lo, double hi, std::vector<double> mass);
};

Histogram build_histogram(std::span<const double> sample, std::size_t bins);
Pmf pmf_from_histogram(const Histogram& hist);

/// Density of pmf's bin containing x (0 outside support), the q(phi) lookup.
double lookup_density(const Pmf& pmf, double x);

} // namespace kld
