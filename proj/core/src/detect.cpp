#include "kld/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "detail/format.hpp"

namespace kld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Threshold maximizing the between-class variance of a 256-bin histogram
// spanning the finite value range. Returns nothing for a constant map.
std::optional<double> otsu_threshold(const Field2D& values) {
    double lo = kInf;
    double hi = -kInf;
    for (double v : values.values) {
        if (!std::isfinite(v))
            continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo < hi))
        return std::nullopt;

    constexpr std::size_t kBins = 256;
    const double width = (hi - lo) / kBins;
    std::vector<double> hist(kBins, 0.0);
    for (double v : values.values) {
        std::size_t b;
        if (v >= hi)
            b = kBins - 1; // also collects +inf
        else if (v <= lo)
            b = 0;
        else
            b = static_cast<std::size_t>((v - lo) / width);
        hist[std::min(b, kBins - 1)] += 1.0;
    }

    const double total = static_cast<double>(values.size());
    double sum_all = 0.0;
    for (std::size_t b = 0; b < kBins; ++b)
        sum_all += static_cast<double>(b) * hist[b];

    double best_var = -1.0;
    std::size_t best_bin = 0;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (std::size_t t = 0; t + 1 < kBins; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0)
            continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (var > best_var) {
            best_var = var;
            best_bin = t;
        }
    }
    if (best_var < 0.0)
        return std::nullopt;
    return lo + static_cast<double>(best_bin + 1) * width;
}

std::optional<double> mean_sigma_threshold(const Field2D& values, double n) {
    double sum = 0.0;
    double count = 0.0;
    for (double v : values.values)
        if (std::isfinite(v)) {
            sum += v;
            count += 1.0;
        }
    if (count < 2.0)
        return std::nullopt;
    const double mean = sum / count;
    double ss = 0.0;
    for (double v : values.values)
        if (std::isfinite(v))
            ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / count);
    if (sigma == 0.0)
        return std::nullopt;
    return mean + n * sigma;
}

struct Component {
    std::vector<std::size_t> cells; // flat indices
    std::size_t min_row = 0, max_row = 0;
    bool full_circle = false;       // covers every column of some row
    std::size_t full_min_row = 0, full_max_row = 0;
};

std::vector<Component> label_components(const Field2D& values, double threshold,
                                        bool periodic) {
    const std::size_t rows = values.rows;
    const std::size_t cols = values.cols;
    std::vector<std::int8_t> in(values.size());
    for (std::size_t n = 0; n < values.size(); ++n)
        in[n] = values.values[n] > threshold ? 1 : 0;

    std::vector<std::uint8_t> seen(values.size(), 0);
    std::vector<Component> components;
    std::vector<std::size_t> stack;
    std::vector<std::size_t> row_cover(rows);

    for (std::size_t start = 0; start < values.size(); ++start) {
        if (!in[start] || seen[start])
            continue;
        Component comp;
        comp.min_row = rows;
        std::fill(row_cover.begin(), row_cover.end(), 0);
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t cell = stack.back();
            stack.pop_back();
            comp.cells.push_back(cell);
            const std::size_t i = cell / cols;
            const std::size_t j = cell % cols;
            comp.min_row = std::min(comp.min_row, i);
            comp.max_row = std::max(comp.max_row, i);
            ++row_cover[i];

            for (int di = -1; di <= 1; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0)
                        continue;
                    const auto ii = static_cast<std::ptrdiff_t>(i) + di;
                    if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(rows))
                        continue;
                    auto jj = static_cast<std::ptrdiff_t>(j) + dj;
                    if (periodic) {
                        jj = (jj + static_cast<std::ptrdiff_t>(cols)) %
                             static_cast<std::ptrdiff_t>(cols);
                    } else if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(cols)) {
                        continue;
                    }
                    const std::size_t next =
                        static_cast<std::size_t>(ii) * cols +
                        static_cast<std::size_t>(jj);
                    if (in[next] && !seen[next]) {
                        seen[next] = 1;
                        stack.push_back(next);
                    }
                }
            }
        }

        comp.full_min_row = rows;
        for (std::size_t i = comp.min_row; i <= comp.max_row; ++i) {
            if (row_cover[i] == cols) {
                comp.full_circle = true;
                comp.full_min_row = std::min(comp.full_min_row, i);
                comp.full_max_row = std::max(comp.full_max_row, i);
            }
        }
        components.push_back(std::move(comp));
    }
    return components;
}

double spearman(std::vector<double> x, std::vector<double> y, bool& defined) {
    defined = false;
    const std::size_t n = x.size();
    if (n < 2)
        return 0.0;

    auto ranks_of = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> ranks(n);
        std::size_t k = 0;
        while (k < n) {
            std::size_t k2 = k;
            while (k2 + 1 < n && v[order[k2 + 1]] == v[order[k]])
                ++k2;
            const double avg = (static_cast<double>(k) + static_cast<double>(k2)) / 2.0 + 1.0;
            for (std::size_t m = k; m <= k2; ++m)
                ranks[order[m]] = avg;
            k = k2 + 1;
        }
        return ranks;
    };

    const std::vector<double> rx = ranks_of(x);
    const std::vector<double> ry = ranks_of(y);
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0)
        return 0.0;
    defined = true;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

AnomalyReport segment(const Field2D& values, double axial_pitch,
                      double circ_pitch, bool periodic_circ,
                      const SegmentPolicy& policy) {
    AnomalyReport report;
    std::optional<double> threshold =
        policy.kind == SegmentPolicy::Kind::otsu
            ? otsu_threshold(values)
            : mean_sigma_threshold(values, policy.sigma_multiplier);
    if (!threshold)
        return report; // constant map: nothing to segment
    report.threshold_used = *threshold;

    const std::size_t min_area =
        policy.min_area ? policy.min_area : values.size() / 8192;
    const std::size_t cols = values.cols;
    for (const Component& comp :
         label_components(values, *threshold, periodic_circ)) {
        if (comp.cells.size() < min_area)
            continue;
        double peak = -kInf;
        double finite_peak = *threshold;
        double sum = 0.0;
        for (std::size_t cell : comp.cells) {
            const double v = values.values[cell];
            peak = std::max(peak, v);
            if (std::isfinite(v)) {
                finite_peak = std::max(finite_peak, v);
                sum += v;
            }
        }
        const double mean = sum / static_cast<double>(comp.cells.size());

        if (comp.full_circle) {
            WeldBand weld;
            weld.center_axial_mm =
                (static_cast<double>(comp.full_min_row + comp.full_max_row) / 2.0) *
                axial_pitch;
            weld.width_mm =
                static_cast<double>(comp.full_max_row - comp.full_min_row + 1) *
                axial_pitch;
            weld.area_cells = comp.cells.size();
            weld.peak_kld = peak;
            weld.mean_kld = mean;
            report.welds.push_back(weld);
            continue;
        }

        Anomaly a;
        a.area_cells = comp.cells.size();
        a.peak_kld = peak;
        a.mean_kld = mean;

        // Centroid weighted by the response above threshold; ragged component
        // outlines then barely move it off the response core.
        double axial_sum = 0.0;
        double sx = 0.0;
        double sy = 0.0;
        double wsum = 0.0;
        std::vector<std::uint8_t> col_used(cols, 0);
        for (std::size_t cell : comp.cells) {
            const std::size_t i = cell / cols;
            const std::size_t j = cell % cols;
            const double v = values.values[cell];
            const double weight = (std::isfinite(v) ? v : finite_peak) - *threshold;
            axial_sum += weight * static_cast<double>(i) * axial_pitch;
            const double rad =
                static_cast<double>(j) * circ_pitch * std::numbers::pi / 180.0;
            sx += weight * std::cos(rad);
            sy += weight * std::sin(rad);
            wsum += weight;
            col_used[j] = 1;
        }
        a.centroid_axial_mm = axial_sum / wsum;
        double deg = std::atan2(sy, sx) * 180.0 / std::numbers::pi;
        if (deg < 0.0)
            deg += 360.0;
        a.centroid_circ_deg = deg;
        a.axial_extent_mm =
            static_cast<double>(comp.max_row - comp.min_row + 1) * axial_pitch;

        // Columns covered, wrap-aware: the extent is the circumference minus
        // the widest empty gap.
        std::size_t used = 0;
        for (auto u : col_used)
            used += u;
        std::size_t max_gap = 0;
        std::size_t gap = 0;
        for (std::size_t j = 0; j < 2 * cols; ++j) {
            if (!col_used[j % cols]) {
                ++gap;
                if (gap >= cols) { // no used column at all (cannot happen)
                    max_gap = cols;
                    break;
                }
            } else {
                max_gap = std::max(max_gap, gap);
                gap = 0;
            }
        }
        const std::size_t covered =
            used == cols ? cols : cols - std::min(max_gap, cols);
        a.circ_extent_deg = static_cast<double>(covered) * circ_pitch;
        report.anomalies.push_back(a);
    }

    std::sort(report.anomalies.begin(), report.anomalies.end(),
              [](const Anomaly& a, const Anomaly& b) {
                  if (a.peak_kld != b.peak_kld)
                      return a.peak_kld > b.peak_kld;
                  if (a.area_cells != b.area_cells)
                      return a.area_cells > b.area_cells;
                  if (a.centroid_axial_mm != b.centroid_axial_mm)
                      return a.centroid_axial_mm < b.centroid_axial_mm;
                  return a.centroid_circ_deg < b.centroid_circ_deg;
              });
    for (std::size_t r = 0; r < report.anomalies.size(); ++r)
        report.anomalies[r].depth_rank = r + 1;

    std::sort(report.welds.begin(), report.welds.end(),
              [](const WeldBand& a, const WeldBand& b) {
                  return a.center_axial_mm < b.center_axial_mm;
              });
    return report;
}

AnomalyReport segment(const KldMap& map, const SegmentPolicy& policy) {
    return segment(map.values, map.axial_pitch, map.circ_pitch,
                   map.periodic_circ, policy);
}

DetectionMetrics score_against_truth(const AnomalyReport& report,
                                     const SynthConfig& truth) {
    const double mmpd = truth.mm_per_degree();
    for (const Anomaly& a : report.anomalies) {
        if (a.centroid_axial_mm < 0.0 ||
            a.centroid_axial_mm > truth.axial_length)
            throw std::invalid_argument(
                "score_against_truth: report does not fit the truth grid");
    }

    DetectionMetrics metrics;
    std::vector<std::uint8_t> hole_taken(truth.holes.size(), 0);
    std::vector<double> peaks, depths, sizes;

    for (const Anomaly& a : report.anomalies) {
        std::ptrdiff_t best = -1;
        double best_dist = kInf;
        for (std::size_t h = 0; h < truth.holes.size(); ++h) {
            if (hole_taken[h])
                continue;
            const HoleSpec& hole = truth.holes[h];
            const double da = a.centroid_axial_mm - hole.center_axial;
            const double dc = std::fmod(
                std::abs(a.centroid_circ_deg - hole.center_circ), 360.0);
            const double darc = (dc > 180.0 ? 360.0 - dc : dc) * mmpd;
            const double dist = std::sqrt(da * da + darc * darc);
            if (dist <= hole.diameter / 2 && dist < best_dist) {
                best_dist = dist;
                best = static_cast<std::ptrdiff_t>(h);
            }
        }
        if (best >= 0) {
            hole_taken[static_cast<std::size_t>(best)] = 1;
            ++metrics.true_positives;
            const HoleSpec& hole = truth.holes[static_cast<std::size_t>(best)];
            metrics.matches.push_back(
                {static_cast<std::size_t>(best), a.depth_rank, a.peak_kld});
            peaks.push_back(a.peak_kld);
            depths.push_back(hole.depth);
            sizes.push_back(hole.depth * hole.diameter);
        } else {
            ++metrics.false_positives;
        }
    }
    for (auto taken : hole_taken)
        if (!taken)
            ++metrics.false_negatives;

    bool def_depth = false;
    bool def_size = false;
    metrics.rank_correlation_depth = spearman(peaks, depths, def_depth);
    metrics.rank_correlation_size = spearman(peaks, sizes, def_size);
    metrics.rank_correlation_defined = def_depth;
    return metrics;
}

std::string report_text(const AnomalyReport& report) {
    using detail::format_double;
    std::string out;
    out += "threshold = " + format_double(report.threshold_used) + "\n";
    out += "anomaly_count = " + std::to_string(report.anomalies.size()) + "\n";
    out += "weld_count = " + std::to_string(report.welds.size()) + "\n";
    for (const Anomaly& a : report.anomalies) {
        const std::string p = "anomaly." + std::to_string(a.depth_rank) + ".";
        out += p + "axial_mm = " + format_double(a.centroid_axial_mm) + "\n";
        out += p + "circ_deg = " + format_double(a.centroid_circ_deg) + "\n";
        out += p + "axial_extent_mm = " + format_double(a.axial_extent_mm) + "\n";
        out += p + "circ_extent_deg = " + format_double(a.circ_extent_deg) + "\n";
        out += p + "area_cells = " + std::to_string(a.area_cells) + "\n";
        out += p + "peak_kld = " + format_double(a.peak_kld) + "\n";
        out += p + "mean_kld = " + format_double(a.mean_kld) + "\n";
        out += p + "rank = " + std::to_string(a.depth_rank) + "\n";
    }
    for (std::size_t w = 0; w < report.welds.size(); ++w) {
        const WeldBand& weld = report.welds[w];
        const std::string p = "weld." + std::to_string(w + 1) + ".";
        out += p + "center_axial_mm = " + format_double(weld.center_axial_mm) + "\n";
        out += p + "width_mm = " + format_double(weld.width_mm) + "\n";
    }
    return out;
}

std::string report_csv(const AnomalyReport& report) {
    using detail::format_double;
    std::string out =
        "id,axial_mm,circ_deg,axial_extent_mm,circ_extent_deg,area,peak_kld,"
        "mean_kld,rank,kind\n";
    std::size_t id = 0;
    for (const Anomaly& a : report.anomalies) {
        out += std::to_string(++id) + ',';
        out += format_double(a.centroid_axial_mm) + ',';
        out += format_double(a.centroid_circ_deg) + ',';
        out += format_double(a.axial_extent_mm) + ',';
        out += format_double(a.circ_extent_deg) + ',';
        out += std::to_string(a.area_cells) + ',';
        out += format_double(a.peak_kld) + ',';
        out += format_double(a.mean_kld) + ',';
        out += std::to_string(a.depth_rank) + ",anomaly\n";
    }
    for (const WeldBand& w : report.welds) {
        out += std::to_string(++id) + ',';
        out += format_double(w.center_axial_mm) + ',';
        out += "0.0,";
        out += format_double(w.width_mm) + ',';
        out += "360.0,";
        out += std::to_string(w.area_cells) + ',';
        out += format_double(w.peak_kld) + ',';
        out += format_double(w.mean_kld) + ',';
        out += "0,weld\n";
    }
    return out;
}

} // namespace kld
