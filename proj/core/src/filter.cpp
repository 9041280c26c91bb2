#include "kld/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace kld {

namespace {

MapDiagnostics merge(const MapDiagnostics& a, const MapDiagnostics& b) {
    return {a.negative_values + b.negative_values,
            a.infinite_values + b.infinite_values,
            std::min(a.min_value, b.min_value)};
}

void observe(MapDiagnostics& d, double v) {
    if (std::isinf(v))
        ++d.infinite_values;
    else if (v < 0.0)
        ++d.negative_values;
    d.min_value = std::min(d.min_value, v);
}

template <typename PerPoint>
KldMap run_map(const ScanGrid& grid, const FilterConfig& config,
               PerPoint&& per_point) {
    config.validate();
    KldMap map;
    map.values = Field2D(grid.rows(), grid.cols());
    map.axial_pitch = grid.axial_pitch();
    map.circ_pitch = grid.circ_pitch();
    map.periodic_circ = grid.periodic_circ();
    map.config = config;

    unsigned workers = config.threads
                           ? config.threads
                           : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, grid.rows()));

    std::vector<MapDiagnostics> diags(workers);
    auto body = [&](unsigned worker, std::size_t row_begin, std::size_t row_end) {
        std::vector<double> window;
        window.reserve((2 * config.axial_half + 1) * (2 * config.circ_half + 1));
        MapDiagnostics& d = diags[worker];
        for (std::size_t i = row_begin; i < row_end; ++i) {
            for (std::size_t j = 0; j < grid.cols(); ++j) {
                window_subset_into(grid, i, j, config.axial_half,
                                   config.circ_half, window);
                const double v = per_point(window);
                map.values.at(i, j) = v;
                observe(d, v);
            }
        }
    };

    if (workers <= 1) {
        body(0, 0, grid.rows());
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (grid.rows() + workers - 1) / workers;
        for (unsigned t = 0; t < workers; ++t) {
            const std::size_t begin = static_cast<std::size_t>(t) * chunk;
            const std::size_t end = std::min(grid.rows(), begin + chunk);
            if (begin >= end)
                break;
            pool.emplace_back(body, t, begin, end);
        }
        for (auto& th : pool)
            th.join();
    }

    for (const auto& d : diags)
        map.diagnostics = merge(map.diagnostics, d);
    return map;
}

} // namespace

void FilterConfig::validate() const {
    if (baseline_bins == 0 || local_bins == 0)
        throw std::invalid_argument("FilterConfig: bin counts must be >= 1");
    if (smoothing.mode == Smoothing::Mode::additive_epsilon &&
        !(smoothing.epsilon > 0.0))
        throw std::invalid_argument(
            "FilterConfig: additive smoothing needs epsilon > 0");
}

KldMap local_kld_map(const ScanGrid& grid, const Pmf& baseline,
                     const FilterConfig& config) {
    return run_map(grid, config, [&](const std::vector<double>& window) {
        const Pmf local =
            pmf_from_histogram(build_histogram(window, config.local_bins));
        return kl_divergence(local, baseline, config.smoothing,
                             config.log_base);
    });
}

KldMap local_entropy_map(const ScanGrid& grid, const FilterConfig& config) {
    return run_map(grid, config, [&](const std::vector<double>& window) {
        const Pmf local =
            pmf_from_histogram(build_histogram(window, config.local_bins));
        return shannon_entropy(local, config.log_base);
    });
}

void save_map(const KldMap& map, const std::filesystem::path& path,
              GridFormat format) {
    ScanGrid carrier(map.values, map.axial_pitch, map.circ_pitch, 0.0,
                     map.periodic_circ);
    save_grid(carrier, path, format);
}

} // namespace kld
