#include "kld/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kld {

namespace {

// Floor of (x - lo) / width with a half-ulp guard: a quotient within half an
// ulp below an integer edge is treated as sitting on the edge, and edges
// belong to the upper bin.
std::size_t raw_bin(double x, double lo, double width) {
    const double t = (x - lo) / width;
    auto k = static_cast<std::size_t>(t);
    const double upper = static_cast<double>(k) + 1.0;
    if (upper - t <= upper * (std::numeric_limits<double>::epsilon() / 2))
        ++k;
    return k;
}

} // namespace

std::ptrdiff_t Histogram::bin_of(double x) const {
    if (std::isnan(x) || x < lo || x > hi)
        return -1;
    if (degenerate())
        return 0;
    if (x == hi)
        return static_cast<std::ptrdiff_t>(bins()) - 1;
    const std::size_t k = raw_bin(x, lo, bin_width);
    return static_cast<std::ptrdiff_t>(std::min(k, bins() - 1));
}

double Histogram::midpoint(std::size_t n) const {
    if (degenerate())
        return lo;
    return lo + (static_cast<double>(n) + 0.5) * bin_width;
}

double Histogram::representative(std::size_t n) const {
    if (n < bin_min.size() && !std::isnan(bin_min[n]))
        return bin_min[n];
    return midpoint(n);
}

Histogram build_histogram(std::span<const double> sample, std::size_t bins) {
    if (sample.empty())
        throw std::invalid_argument("build_histogram: empty sample");
    if (bins == 0)
        throw std::invalid_argument("build_histogram: bins must be >= 1");

    auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    Histogram h;
    h.lo = *lo_it;
    h.hi = *hi_it;
    h.counts.assign(bins, 0);
    h.bin_min.assign(bins, std::numeric_limits<double>::quiet_NaN());
    h.total = sample.size();
    if (std::isnan(h.lo) || std::isnan(h.hi))
        throw std::invalid_argument("build_histogram: NaN in sample");

    if (h.hi == h.lo) {
        h.bin_width = 0.0;
        h.counts[0] = sample.size();
        h.bin_min[0] = h.lo;
        return h;
    }

    h.bin_width = (h.hi - h.lo) / static_cast<double>(bins);
    for (double x : sample) {
        std::size_t k = x == h.hi ? bins - 1 : raw_bin(x, h.lo, h.bin_width);
        k = std::min(k, bins - 1);
        ++h.counts[k];
        if (std::isnan(h.bin_min[k]) || x < h.bin_min[k])
            h.bin_min[k] = x;
    }
    return h;
}

Pmf pmf_from_histogram(const Histogram& hist) {
    if (hist.total == 0)
        throw std::invalid_argument("pmf_from_histogram: all-zero counts");

    Pmf p;
    p.hist = hist;
    p.mass.resize(hist.bins());
    p.density.resize(hist.bins());
    const double n = static_cast<double>(hist.total);
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        p.mass[i] = static_cast<double>(hist.counts[i]) / n;
        if (hist.degenerate())
            p.density[i] = p.mass[i] > 0
                               ? std::numeric_limits<double>::infinity()
                               : 0.0;
        else
            p.density[i] = p.mass[i] / hist.bin_width;
    }
    return p;
}

double Pmf::density_at(double x) const {
    const auto n = hist.bin_of(x);
    return n < 0 ? 0.0 : density[static_cast<std::size_t>(n)];
}

double Pmf::mass_at(double x) const {
    const auto n = hist.bin_of(x);
    return n < 0 ? 0.0 : mass[static_cast<std::size_t>(n)];
}

Pmf Pmf::from_masses(double lo, double hi, std::vector<double> mass) {
    if (mass.empty())
        throw std::invalid_argument("Pmf::from_masses: no bins");
    if (!(lo < hi))
        throw std::invalid_argument("Pmf::from_masses: need lo < hi");
    double sum = 0.0;
    for (double m : mass) {
        if (m < 0 || std::isnan(m))
            throw std::invalid_argument("Pmf::from_masses: negative mass");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("Pmf::from_masses: masses must sum to 1");

    Pmf p;
    p.hist.lo = lo;
    p.hist.hi = hi;
    p.hist.bin_width = (hi - lo) / static_cast<double>(mass.size());
    p.hist.counts.assign(mass.size(), 0);
    p.hist.total = 0;
    p.density.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
        p.density[i] = mass[i] / p.hist.bin_width;
    p.mass = std::move(mass);
    return p;
}

double lookup_density(const Pmf& pmf, double x) { return pmf.density_at(x); }

} // namespace kld
