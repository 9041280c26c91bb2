#include "kld/baseline.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "detail/format.hpp"

namespace kld {

Pmf baseline_from_all(const ScanGrid& grid, std::size_t bins) {
    return pmf_from_histogram(build_histogram(grid.values().values, bins));
}

Pmf baseline_from_noise(const ScanGrid& noise_grid, std::size_t bins) {
    return pmf_from_histogram(build_histogram(noise_grid.values().values, bins));
}

SensitivityReport sensitivity_delta(const Pmf& probe, const Pmf& q_all,
                                    const Pmf& q_noise, LogBase base) {
    auto log_fn = [base](double x) {
        return base == LogBase::natural ? std::log(x) : std::log2(x);
    };

    double delta = 0.0;
    if (probe.degenerate()) {
        const double qa = q_all.mass_at(probe.lo());
        const double qn = q_noise.mass_at(probe.lo());
        if (qa > 0.0 && qn > 0.0)
            delta = log_fn(qn / qa);
    } else {
        for (std::size_t n = 0; n < probe.bins(); ++n) {
            const double pm = probe.mass[n];
            if (pm == 0.0)
                continue;
            const double rep = probe.hist.representative(n);
            const double qa = q_all.mass_at(rep);
            const double qn = q_noise.mass_at(rep);
            if (qa == 0.0 || qn == 0.0)
                continue; // P log(0/Q) convention: dropped
            delta += pm * log_fn(qn / qa);
        }
    }

    SensitivityReport report;
    report.delta_a = delta;
    report.d_kl_qa = kl_divergence(probe, q_all, Smoothing::skip(), base);
    report.d_kl_qn = kl_divergence(probe, q_noise, Smoothing::skip(), base);
    if (report.d_kl_qa != 0.0) {
        report.relative_sensitivity = delta / report.d_kl_qa;
        report.relative_defined = true;
    }
    return report;
}

ProbePlacement place_probe(const SynthConfig& config, const ProbeSpec& probe) {
    if (probe.hole_index >= config.holes.size())
        throw std::invalid_argument("place_probe: no such hole");
    const HoleSpec& hole = config.holes[probe.hole_index];
    const std::size_t rows = config.grid_rows();
    const std::size_t cols = config.grid_cols();

    const auto col = static_cast<std::size_t>(
        (static_cast<std::size_t>(
             std::llround(hole.center_circ / config.circ_pitch)) %
         cols));
    const auto center_row = static_cast<std::ptrdiff_t>(
        std::llround(hole.center_axial / config.axial_pitch));
    const auto window_reach = static_cast<std::ptrdiff_t>(probe.axial_half);
    const auto hole_reach = static_cast<std::ptrdiff_t>(
        std::ceil(hole.diameter / (2 * config.axial_pitch)));

    ProbePlacement best;
    double best_gap = 2.0;
    for (std::ptrdiff_t i = center_row - hole_reach - window_reach;
         i <= center_row + hole_reach + window_reach; ++i) {
        if (i < 0 || i >= static_cast<std::ptrdiff_t>(rows))
            continue;
        std::size_t inside = 0;
        std::size_t count = 0;
        const std::ptrdiff_t wspan = static_cast<std::ptrdiff_t>(probe.circ_half);
        for (std::ptrdiff_t di = -window_reach; di <= window_reach; ++di) {
            const std::ptrdiff_t ii = i + di;
            if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(rows))
                continue;
            for (std::ptrdiff_t dj = -wspan; dj <= wspan; ++dj) {
                const auto cc = static_cast<std::ptrdiff_t>(cols);
                const auto jj = static_cast<std::size_t>(
                    ((static_cast<std::ptrdiff_t>(col) + dj) % cc + cc) % cc);
                ++count;
                if (in_hole(config, hole, static_cast<std::size_t>(ii), jj))
                    ++inside;
            }
        }
        if (count == 0)
            continue;
        const double share =
            static_cast<double>(inside) / static_cast<double>(count);
        const double gap = std::abs(share - 0.5);
        if (gap < best_gap) {
            best_gap = gap;
            best = {static_cast<std::size_t>(i), col, share};
        }
    }
    if (best_gap >= 2.0)
        throw std::runtime_error("place_probe: no feasible window center");
    return best;
}

std::vector<SensitivityReport> sensitivity_sweep(
    const SynthConfig& base_config, std::span<const double> fractions,
    const ProbeSpec& probe, std::size_t baseline_bins, LogBase base) {
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0) || fractions[i] >= 1.0)
            throw std::invalid_argument(
                "sensitivity_sweep: fractions must lie in (0, 1)");
        if (i && fractions[i] <= fractions[i - 1])
            throw std::invalid_argument(
                "sensitivity_sweep: fractions must increase");
    }

    // The probe distribution is built once, from the base layout, and held
    // fixed across every anomaly fraction.
    SynthConfig probe_config = base_config;
    probe_config.weld.reset();
    const ScanGrid probe_grid = generate_scan(probe_config);
    const ProbePlacement placement = place_probe(probe_config, probe);
    const Pmf probe_pmf = pmf_from_histogram(build_histogram(
        window_subset(probe_grid, placement.row, placement.col,
                      probe.axial_half, probe.circ_half),
        probe.bins));

    const ScanGrid noise_grid = generate_scan(strip_anomalies(base_config));
    const Pmf q_noise = baseline_from_noise(noise_grid, baseline_bins);

    std::ostringstream desc;
    desc << "window (2*" << probe.axial_half << "+1)x(2*" << probe.circ_half
         << "+1) at row " << placement.row << ", col " << placement.col
         << ", hole share " << detail::format_double(placement.hole_share)
         << " of hole " << probe.hole_index;

    std::vector<SensitivityReport> reports;
    reports.reserve(fractions.size());
    for (double f : fractions) {
        const SynthConfig variant =
            with_filler_holes(probe_config, f, probe.hole_index);
        const ScanGrid grid = generate_scan(variant);
        const Pmf q_all = baseline_from_all(grid, baseline_bins);
        SensitivityReport r = sensitivity_delta(probe_pmf, q_all, q_noise, base);
        r.anomaly_fraction = anomaly_cell_fraction(variant);
        r.probe_description = desc.str();
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string sensitivity_csv(std::span<const SensitivityReport> reports) {
    using detail::format_double;
    std::string out = "fraction,delta_a,d_kl_qa,d_kl_qn,relative_sensitivity\n";
    for (const auto& r : reports) {
        out += format_double(r.anomaly_fraction);
        out += ',';
        out += format_double(r.delta_a);
        out += ',';
        out += format_double(r.d_kl_qa);
        out += ',';
        out += format_double(r.d_kl_qn);
        out += ',';
        out += r.relative_defined ? format_double(r.relative_sensitivity)
                                  : std::string("undefined");
        out += '\n';
    }
    return out;
}

} // namespace kld
