#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kld/field.hpp"
#include "kld/filter.hpp"
#include "kld/synth.hpp"

namespace kld {

/// Data-adaptive binarization policies; neither takes a user threshold.
/// Components smaller than min_area cells are discarded as speckle; 0 picks
/// an automatic floor of cells/8192, far below any window-smeared defect
/// response but above isolated threshold-crossing noise.
struct SegmentPolicy {
    enum class Kind { otsu, mean_plus_sigma };

    Kind kind = Kind::otsu;
    double sigma_multiplier = 3.0;
    std::size_t min_area = 0;

    static SegmentPolicy otsu() { return {Kind::otsu, 0.0, 0}; }
    static SegmentPolicy mean_plus_sigma(double n) {
        return {Kind::mean_plus_sigma, n, 0};
    }
};

struct Anomaly {
    double centroid_axial_mm = 0.0;
    double centroid_circ_deg = 0.0;
    double axial_extent_mm = 0.0;
    double circ_extent_deg = 0.0;
    std::size_t area_cells = 0;
    double peak_kld = 0.0;
    double mean_kld = 0.0;
    std::size_t depth_rank = 0; // 1 = strongest response
};

/// Full-circumference component, reported separately so a girth weld is never
/// mistaken for a defect.
struct WeldBand {
    double center_axial_mm = 0.0;
    double width_mm = 0.0;
    std::size_t area_cells = 0;
    double peak_kld = 0.0;
    double mean_kld = 0.0;
};

struct AnomalyReport {
    std::vector<Anomaly> anomalies; // sorted by depth_rank
    std::vector<WeldBand> welds;
    double threshold_used = 0.0;
};

/// Binarizes with the adaptive policy, labels 8-connected components (wrapping
/// circumferentially when the map is periodic), and classifies any component
/// that covers a whole row as a weld band. An all-constant map yields an
/// empty report.
AnomalyReport segment(const Field2D& values, double axial_pitch,
                      double circ_pitch, bool periodic_circ,
                      const SegmentPolicy& policy);
AnomalyReport segment(const KldMap& map, const SegmentPolicy& policy);

struct MatchedHole {
    std::size_t hole_index = 0;
    std::size_t depth_rank = 0;
    double peak_kld = 0.0;
};

struct DetectionMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    /// Spearman correlation of peak response against ground-truth depth and
    /// against the depth * diameter size proxy, over matched holes.
    double rank_correlation_depth = 0.0;
    double rank_correlation_size = 0.0;
    bool rank_correlation_defined = false;
    std::vector<MatchedHole> matches;
};

/// Centroid-in-footprint matching of reported anomalies against the holes of
/// the generating configuration.
DetectionMetrics score_against_truth(const AnomalyReport& report,
                                     const SynthConfig& truth);

/// Line-oriented key=value rendering of a report.
std::string report_text(const AnomalyReport& report);

/// CSV rows: id,axial_mm,circ_deg,axial_extent_mm,circ_extent_deg,area,
/// peak_kld,mean_kld,rank,kind.
std::string report_csv(const AnomalyReport& report);

} // namespace kld
