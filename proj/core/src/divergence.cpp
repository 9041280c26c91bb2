#include "kld/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double apply_log(double ratio, LogBase base) {
    return base == LogBase::natural ? std::log(ratio) : std::log2(ratio);
}

void check_finite_masses(const Pmf& p, const char* who) {
    for (double m : p.mass)
        if (std::isnan(m))
            throw std::invalid_argument(std::string(who) + ": NaN mass");
}

// Probability q assigns to the bin [lo, hi) of another grid when q itself is
// a point mass.
double atom_mass_in(const Pmf& q, double bin_lo, double bin_hi, bool last_bin) {
    const double v = q.lo();
    const bool inside = last_bin ? (v >= bin_lo && v <= bin_hi)
                                 : (v >= bin_lo && v < bin_hi);
    return inside ? 1.0 : 0.0;
}

// Divergence with at least one point-mass side, evaluated on bin masses.
double degenerate_kl(const Pmf& p, const Pmf& q, const Smoothing& smoothing,
                     LogBase base) {
    if (p.degenerate() && q.degenerate()) {
        if (p.lo() == q.lo())
            return 0.0;
        // disjoint atoms: the single term hits a zero denominator
        return smoothing.mode == Smoothing::Mode::none ? kInf : 0.0;
    }

    if (p.degenerate()) {
        const double qm = q.mass_at(p.lo());
        if (qm > 0.0)
            return apply_log(1.0 / qm, base);
        if (smoothing.mode == Smoothing::Mode::none)
            return kInf;
        if (smoothing.mode == Smoothing::Mode::additive_epsilon &&
            q.hist.bin_of(p.lo()) >= 0) {
            const double eps = smoothing.epsilon;
            const double qs = eps / (1.0 + eps * static_cast<double>(q.bins()));
            return apply_log(1.0 / qs, base);
        }
        return 0.0; // dropped term
    }

    // q is the point mass: compare p's bin masses against 0/1 bin coverage.
    double sum = 0.0;
    for (std::size_t n = 0; n < p.bins(); ++n) {
        const double pm = p.mass[n];
        if (pm == 0.0)
            continue;
        const bool last = n + 1 == p.bins();
        const double lo = p.lo() + static_cast<double>(n) * p.bin_width();
        const double hi = last ? p.hi() : lo + p.bin_width();
        const double qm = atom_mass_in(q, lo, hi, last);
        if (qm == 0.0) {
            if (smoothing.mode == Smoothing::Mode::none)
                return kInf;
            continue;
        }
        sum += pm * apply_log(pm / qm, base);
    }
    return sum;
}

} // namespace

Smoothing Smoothing::additive(double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("Smoothing::additive: epsilon must be > 0");
    return {Mode::additive_epsilon, eps};
}

double kl_divergence(const Pmf& p, const Pmf& q, const Smoothing& smoothing,
                     LogBase base) {
    check_finite_masses(p, "kl_divergence");
    check_finite_masses(q, "kl_divergence");

    if (smoothing.mode == Smoothing::Mode::jensen_shannon)
        return jensen_shannon_divergence(p, q, base);

    if (p.degenerate() || q.degenerate())
        return degenerate_kl(p, q, smoothing, base);

    // Pre-smoothed baseline masses for the additive mode; lookups outside the
    // baseline support stay zero (epsilon only fills existing bins) and those
    // terms are dropped.
    std::vector<double> smoothed;
    const bool additive = smoothing.mode == Smoothing::Mode::additive_epsilon;
    if (additive) {
        const double eps = smoothing.epsilon;
        const double norm = 1.0 + eps * static_cast<double>(q.bins());
        smoothed.resize(q.bins());
        for (std::size_t m = 0; m < q.bins(); ++m)
            smoothed[m] = (q.mass[m] + eps) / norm;
    }

    double sum = 0.0;
    for (std::size_t n = 0; n < p.bins(); ++n) {
        const double pm = p.mass[n];
        if (pm == 0.0)
            continue;
        const double rep = p.hist.representative(n);
        double qm;
        if (additive) {
            const auto m = q.hist.bin_of(rep);
            qm = m < 0 ? 0.0 : smoothed[static_cast<std::size_t>(m)];
        } else {
            qm = q.mass_at(rep);
        }
        if (qm == 0.0) {
            if (smoothing.mode == Smoothing::Mode::none)
                return kInf;
            continue; // skip_zero_terms, or additive outside the support
        }
        sum += pm * apply_log(pm / qm, base);
    }
    return sum;
}

double shannon_entropy(const Pmf& p, LogBase base) {
    check_finite_masses(p, "shannon_entropy");
    double sum = 0.0;
    for (double m : p.mass)
        if (m > 0.0)
            sum -= m * apply_log(m, base);
    return sum;
}

double jensen_shannon_divergence(const Pmf& p, const Pmf& q, LogBase base) {
    check_finite_masses(p, "jensen_shannon_divergence");
    check_finite_masses(q, "jensen_shannon_divergence");

    const double log2v = apply_log(2.0, base);
    if (p.degenerate() && q.degenerate())
        return p.lo() == q.lo() ? 0.0 : log2v;
    // A point mass and a binned density are mutually singular.
    if (p.degenerate() || q.degenerate())
        return log2v;

    // Piecewise-constant densities: integrate exactly over the union of both
    // edge sets.
    std::vector<double> edges;
    edges.reserve(p.bins() + q.bins() + 2);
    for (std::size_t n = 0; n <= p.bins(); ++n)
        edges.push_back(n == p.bins() ? p.hi()
                                      : p.lo() + static_cast<double>(n) * p.bin_width());
    for (std::size_t n = 0; n <= q.bins(); ++n)
        edges.push_back(n == q.bins() ? q.hi()
                                      : q.lo() + static_cast<double>(n) * q.bin_width());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    double d_pm = 0.0;
    double d_qm = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double len = edges[k + 1] - edges[k];
        if (len <= 0.0)
            continue;
        const double mid = edges[k] + len / 2;
        const double pd = p.density_at(mid);
        const double qd = q.density_at(mid);
        const double md = (pd + qd) / 2;
        if (pd > 0.0)
            d_pm += pd * len * apply_log(pd / md, base);
        if (qd > 0.0)
            d_qm += qd * len * apply_log(qd / md, base);
    }
    return (d_pm + d_qm) / 2;
}

} // namespace kld
