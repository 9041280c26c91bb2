#pragma once

#include <span>
#include <string>
#include <vector>

#include "kld/divergence.hpp"
#include "kld/grid.hpp"
#include "kld/synth.hpp"

namespace kld {

/// Baseline distribution over every reading of the grid. Each sample's own
/// bin is non-empty by construction, so local divergences against this
/// baseline stay finite under the skip-zero-terms convention.
Pmf baseline_from_all(const ScanGrid& grid, std::size_t bins);

/// Baseline from an anomaly-free scan; readings from other grids may fall
/// outside its support and look up a zero density.
Pmf baseline_from_noise(const ScanGrid& noise_grid, std::size_t bins);

/// Error introduced by adopting the full-data baseline instead of a pure
/// noise baseline for one probe distribution.
struct SensitivityReport {
    double anomaly_fraction = 0.0;
    double delta_a = 0.0; // D(P||Q_all) - D(P||Q_noise), dropped-terms convention
    double d_kl_qa = 0.0;
    double d_kl_qn = 0.0;
    double relative_sensitivity = 0.0; // delta_a / d_kl_qa
    bool relative_defined = false;     // false when D(P||Q_all) == 0
    std::string probe_description;
};

/// delta_a = sum of probe_mass[n] * log(qn_mass(r_n) / qa_mass(r_n)) over the
/// probe's bins, dropping terms where either baseline carries no mass at the
/// bin representative r_n.
SensitivityReport sensitivity_delta(const Pmf& probe, const Pmf& q_all,
                                    const Pmf& q_noise,
                                    LogBase base = LogBase::natural);

/// Which window around which hole provides the fixed probe distribution.
/// Defaults give a 15 x 3 window whose center is slid along the axial line
/// through the hole center until about half the window cells lie inside the
/// hole footprint.
struct ProbeSpec {
    std::size_t hole_index = 0;
    std::size_t axial_half = 7;
    std::size_t circ_half = 1;
    std::size_t bins = 60;
};

/// Center (row, col) of the probe window and the achieved in-hole share.
struct ProbePlacement {
    std::size_t row = 0;
    std::size_t col = 0;
    double hole_share = 0.0;
};

ProbePlacement place_probe(const SynthConfig& config, const ProbeSpec& probe);

/// Fig.-9-style study: datasets with a growing share of anomaly cells
/// (filler copies of the probe hole), a fixed probe distribution, and one
/// report per requested fraction carrying the achieved fraction.
std::vector<SensitivityReport> sensitivity_sweep(
    const SynthConfig& base_config, std::span<const double> fractions,
    const ProbeSpec& probe, std::size_t baseline_bins = 67,
    LogBase base = LogBase::natural);

/// CSV rows `fraction,delta_a,d_kl_qa,d_kl_qn,relative_sensitivity`.
std::string sensitivity_csv(std::span<const SensitivityReport> reports);

} // namespace kld
